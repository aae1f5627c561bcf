import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import entr

from miregion.errors import ConditionNotMet, EpsilonTooLarge, InvalidCycle, InvalidPath, NotIndependent
from miregion.graphs import SupportCycle, SupportPath, find_cycle, has_path_length_3
from miregion.models import WitnessConfig
from miregion.optimize import residuals_of
from miregion.probability import entropy_profile, extend, trivial_channel, validate_pmf
from miregion.witnesses import (
    achieved_indep_value,
    bvn_channel,
    cycle_witness_channel,
    extract_cycle,
    f_integral,
    f_integral_numeric,
    indep_lower_bound,
    path_witness_channel,
    verify_bvn,
    witness_report,
)


def test_path_witness_on_l_shape(p_l):
    _, path = has_path_length_3(p_l)
    c = path_witness_channel(p_l, path, WitnessConfig(epsilon=1 / 24))
    prof = entropy_profile(extend(p_l, c))
    assert residuals_of(p_l, c, ("indep_x",))["indep_x"] <= 1e-12
    assert prof.i_yu_given_x > 1e-6
    q = c.q[:, :, 0]
    assert q[path.x1, path.y1] != pytest.approx(q[path.x2, path.y1])


def test_path_witness_rejects_large_epsilon(p_l):
    _, path = has_path_length_3(p_l)
    with pytest.raises(EpsilonTooLarge):
        path_witness_channel(p_l, path, WitnessConfig(epsilon=0.2))


def test_path_witness_rejects_cells_off_support(p_l):
    with pytest.raises(InvalidPath):
        path_witness_channel(p_l, SupportPath(x1=1, y1=0, x2=0, y2=1))


def test_cycle_witness_on_independent_bits(p_ind):
    c = cycle_witness_channel(p_ind, find_cycle(p_ind))
    res = residuals_of(p_ind, c, ("indep_x", "indep_y"))
    assert max(res.values()) <= 1e-12
    assert entropy_profile(extend(p_ind, c)).i_xyu > 1e-6


def test_cycle_witness_rejects_bad_cycles(p_ind, p_l):
    with pytest.raises(InvalidCycle):
        cycle_witness_channel(p_ind, SupportCycle(ys=(0,), xs=(0,)))
    with pytest.raises(InvalidCycle):
        cycle_witness_channel(p_l, SupportCycle(ys=(0, 1), xs=(0, 1)))


def test_bvn_on_independent_bits(p_ind):
    report = verify_bvn(p_ind, bvn_channel(p_ind))
    assert report["i_xyu"] == pytest.approx(1.0, abs=1e-9)
    assert report["i_xy_given_u_minus_i_xy"] == pytest.approx(1.0, abs=1e-9)


def test_bvn_on_uniform_ternary(uniform3):
    c = bvn_channel(uniform3)
    report = verify_bvn(uniform3, c)
    assert c.u_size == 3
    assert report["i_xyu"] == pytest.approx(np.log2(3), abs=1e-9)
    assert max(report["residuals"].values()) <= 1e-9


def test_bvn_on_equal_bits_is_trivial_gain(p_eq):
    report = witness_report(p_eq, bvn_channel(p_eq))
    assert report["i_xyu"] == pytest.approx(0.0, abs=1e-9)


def test_bvn_requires_max_condition(p_l):
    with pytest.raises(ConditionNotMet) as info:
        bvn_channel(p_l)
    assert info.value.predicate == "max_condition"


@pytest.mark.parametrize("a, b", [(0.3, 0.5), (0.7, 0.6), (0.2, 0.2), (0.9, 0.05), (1.0, 0.4)])
def test_f_integral_matches_midpoint_rule(a, b):
    assert f_integral(a, b) == pytest.approx(f_integral_numeric(a, b, 10_000), abs=1e-6)


def test_f_integral_matches_adaptive_quadrature():
    a, b = 0.45, 0.8

    def integrand(u):
        end = u + a
        overlap = max(min(end, b) - u, 0.0) + max(min(end - 1.0, b), 0.0)
        return float(entr(min(overlap, a, b)) / np.log(2))

    value, _ = quad(integrand, 0.0, 1.0, points=[b - a, 1.0 - a, b], limit=200)
    assert f_integral(a, b) == pytest.approx(value, abs=1e-8)


def test_f_integral_edges():
    assert f_integral(1.0, 0.5) == pytest.approx(0.5)
    assert f_integral(0.0, 0.7) == 0.0
    assert f_integral(0.3, 0.6) == pytest.approx(f_integral(0.6, 0.3))
    with pytest.raises(ValueError):
        f_integral(1.5, 0.2)


def test_independent_source_bounds():
    p = validate_pmf(np.full((4, 4), 1 / 16))
    assert indep_lower_bound(p) == pytest.approx(1.0)
    assert achieved_indep_value(p) >= 1.0


def test_independent_source_bounds_on_random_marginals(rng):
    for _ in range(10):
        px, py = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(4))
        p = validate_pmf(np.outer(px, py))
        assert achieved_indep_value(p) >= indep_lower_bound(p) - 1e-9


def test_bounds_need_independent_source(p_eq):
    with pytest.raises(NotIndependent):
        indep_lower_bound(p_eq)
    with pytest.raises(NotIndependent):
        achieved_indep_value(p_eq)


def test_extract_cycle_from_witness(p_ind):
    c = cycle_witness_channel(p_ind, find_cycle(p_ind))
    cycle = extract_cycle(p_ind, c)
    assert cycle is not None
    assert cycle.length == 2
    assert all(p_ind.p[cell] > 0 for cell in cycle.cells())
    assert extract_cycle(p_ind, trivial_channel(p_ind)) is None
