import numpy as np
import pytest

from miregion.errors import DegenerateRatio, InfeasibleT
from miregion.models import CurveRequest
from miregion.optimize import point_of
from miregion.probability import (
    Channel,
    conditional_entropy,
    entropy,
    mutual_information,
    reveal_x,
    reveal_y,
    validate_pmf,
)
from miregion.quantities import (
    CATALOGUE,
    SUPPORT_FORMS,
    compute_all,
    excess_functional_info,
    g_ppi,
    g_rstar,
    gacs_korner_ci,
    ib_curve,
    ib_value,
    interaction_informations,
    korner_graph_entropy,
    necessary_cond_entropy,
    pf_curve,
    run_curve,
    s_star,
    synthesis_curve,
    synthesis_minimax,
    v_star,
    wyner_ci,
)


def test_table_has_a_form_per_quantity():
    assert set(SUPPORT_FORMS) <= set(CATALOGUE)
    assert len(SUPPORT_FORMS) == 9


def test_common_information_on_equal_bits(p_eq, fast_cfg):
    assert gacs_korner_ci(p_eq).value == pytest.approx(1.0)
    assert wyner_ci(p_eq, fast_cfg).value == pytest.approx(1.0, abs=1e-3)


def test_common_information_on_independent_bits(p_ind, fast_cfg):
    gk = gacs_korner_ci(p_ind)
    assert gk.value == pytest.approx(0.0, abs=1e-12)
    assert gk.method == "exact-graph"
    assert wyner_ci(p_ind, fast_cfg).value == pytest.approx(0.0, abs=1e-3)


def test_graph_entropy_values(p_eq, p_ind, pentagon):
    assert korner_graph_entropy(p_eq).value == pytest.approx(0.0, abs=1e-9)
    assert korner_graph_entropy(p_ind).value == pytest.approx(1.0, abs=1e-9)
    pent = korner_graph_entropy(pentagon)
    assert pent.value == pytest.approx(np.log2(2.5), abs=1e-6)
    assert pent.method == "independent-set"
    assert pent.metadata["witness_value"] == pytest.approx(pent.value, abs=1e-6)


def test_necessary_conditional_entropy(p_eq, p_ind, p_l):
    assert necessary_cond_entropy(p_eq).value == pytest.approx(0.0, abs=1e-12)
    assert necessary_cond_entropy(p_ind).value == pytest.approx(0.0, abs=1e-12)
    res = necessary_cond_entropy(p_l)
    assert res.value == pytest.approx(conditional_entropy(p_l, "x"))
    assert res.method == "partition-search"


def test_privacy_quantities_on_independent_bits(p_ind, fast_cfg):
    assert g_rstar(p_ind, fast_cfg, seeds=[reveal_y(p_ind)]).value >= 1.0 - 1e-9
    efi = excess_functional_info(p_ind, fast_cfg)
    assert efi.value == pytest.approx(0.0, abs=1e-6)
    assert efi.metadata["frl_upper_bound"] == pytest.approx(0.0, abs=1e-9)


def test_ratio_quantities_on_equal_bits(p_eq, fast_cfg):
    assert s_star(p_eq, fast_cfg).value == pytest.approx(1.0, abs=1e-6)
    assert v_star(p_eq, fast_cfg).value == pytest.approx(1.0, abs=1e-6)


def test_ratio_needs_random_y(fast_cfg):
    p = validate_pmf([[0.5], [0.5]])
    with pytest.raises(DegenerateRatio):
        s_star(p, fast_cfg)
    out = compute_all(p, fast_cfg, only=["gacs_korner_ci", "s_star"])
    assert list(out) == ["gacs_korner_ci"]


def test_interaction_short_circuits(p_eq, p_ind, p_l, uniform3, dsbs, fast_cfg):
    assert g_ppi(p_l, fast_cfg).value == 0.0
    assert g_ppi(p_l, fast_cfg).certificate["predicate"] == "no_cycle"
    assert g_ppi(p_ind, fast_cfg).value == pytest.approx(1.0)
    assert g_ppi(uniform3, fast_cfg).value == pytest.approx(np.log2(3))
    dsbs_ppi = g_ppi(dsbs, fast_cfg)
    assert dsbs_ppi.value == pytest.approx(entropy([0.9, 0.1]))
    assert dsbs_ppi.metadata["witness_gain"] == pytest.approx(dsbs_ppi.value, abs=1e-9)
    eq = interaction_informations(p_eq, fast_cfg)
    assert all(q.value == 0.0 for q in eq.values())


def test_interaction_informations_are_nested(p_l, fast_cfg):
    out = interaction_informations(p_l, fast_cfg)
    assert out["g_ppi"].value == 0.0
    assert 0.0 < out["g_pni"].value <= conditional_entropy(p_l, "x") + 1e-4
    assert out["g_nni"].value >= out["g_pni"].value - 1e-6
    assert "det_y_residual" in out["g_pni"].metadata


def test_ppi_without_structure_stays_below_the_exact_value(p_ind, fast_cfg):
    res = g_ppi(p_ind, fast_cfg, use_structure=False)
    assert 0.0 < res.value <= 1.0 + 1e-3
    assert res.residuals["indep_x"] <= 1e-5


def test_information_bottleneck_on_equal_bits(p_eq, fast_cfg):
    df = ib_curve(p_eq, [0.0, 0.5, 1.0, 1.2], fast_cfg)
    assert list(df.columns) == ["t", "value", "raw", "cleanup", "status"]
    np.testing.assert_allclose(df["value"][:3], [0.0, 0.5, 1.0], atol=1e-3)
    assert df["status"].iloc[3] == "infeasible"
    assert np.isnan(df["value"].iloc[3])
    assert df["value"][:3].is_monotonic_increasing


def test_ib_value_rejects_large_t(p_ind, fast_cfg):
    with pytest.raises(InfeasibleT):
        ib_value(p_ind, 0.5, fast_cfg)


def test_privacy_funnel_on_independent_bits(p_ind, fast_cfg):
    df = pf_curve(p_ind, [0.0, 0.5, 1.0], fast_cfg)
    np.testing.assert_allclose(df["value"], 0.0, atol=1e-3)


def test_synthesis_on_equal_bits(p_eq, fast_cfg):
    df = synthesis_curve(p_eq, [0.0, 0.5, 1.0], fast_cfg)
    np.testing.assert_allclose(df["value"], 1.0, atol=1e-3)
    assert (df["cleanup"] >= 0).all()


def test_synthesis_mixes_pooled_points():
    pts = np.array([[0.0, 0.0, 1.0], [0.6, 0.0, 0.6]])
    value, w = synthesis_minimax(pts, 0.5)
    # the better single point gives 0.5; the even mixture balances both terms at 0.3
    assert value == pytest.approx(0.3)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-9)
    assert synthesis_minimax(pts, 0.0)[0] == pytest.approx(0.6)


def test_run_curve_uses_request_config(p_eq, fast_cfg):
    req = CurveRequest(quantity="channel-synthesis", t_grid=[0.0, 1.0], config=fast_cfg.optimizer)
    assert len(run_curve(p_eq, req)) == 2


def test_compute_all_keeps_catalogue_order(p_eq, fast_cfg):
    out = compute_all(p_eq, fast_cfg, only=["necessary_cond_entropy", "gacs_korner_ci", "g_ppi"])
    assert list(out)[:2] == ["gacs_korner_ci", "necessary_cond_entropy"]
    assert list(out) == ["gacs_korner_ci", "necessary_cond_entropy", "g_ppi"]
    d = out["gacs_korner_ci"].to_dict()
    assert d["value_bits"] == pytest.approx(1.0)
    assert d["table1_form"] == "psi'(1, 1, -2; 0, 0, 1)"


@pytest.mark.slow
def test_wyner_on_binary_symmetric_source(dsbs):
    a = 0.5 * (1 - np.sqrt(1 - 2 * 0.1))
    expected = 1 + entropy([0.1, 0.9]) - 2 * entropy([a, 1 - a])
    assert wyner_ci(dsbs).value == pytest.approx(expected, abs=1e-3)


@pytest.mark.slow
def test_interaction_optimizer_reaches_maximum_on_independent_bits(p_ind):
    out = interaction_informations(p_ind, use_structure=False)
    for q in out.values():
        assert q.value == pytest.approx(1.0, abs=1e-3)


@pytest.mark.slow
def test_graph_entropy_agrees_with_channel_solve(pentagon):
    res = korner_graph_entropy(pentagon, cross_check=True)
    assert res.metadata["channel_solve"] == pytest.approx(np.log2(2.5), abs=1e-3)


@pytest.mark.slow
def test_gacs_korner_support_form(two_blocks):
    res = gacs_korner_ci(two_blocks, with_support_form=True)
    assert res.form_gap <= 1e-3


@pytest.mark.slow
def test_wyner_matches_grid_oracle(dsbs, dsbs_wyner_oracle):
    assert wyner_ci(dsbs).value == pytest.approx(dsbs_wyner_oracle.value, abs=1e-3)


def _dsbs_wyner_channel(crossover: float = 0.1) -> Channel:
    a = 0.5 * (1 - np.sqrt(1 - 2 * crossover))
    bsc = np.array([[1 - a, a], [a, 1 - a]])
    joint = 0.5 * np.einsum("ux,uy->xyu", bsc, bsc)
    return Channel(joint / joint.sum(axis=2, keepdims=True))


@pytest.mark.slow
def test_synthesis_reaches_mixtures_on_binary_symmetric_source(dsbs):
    ts = [0.2, 0.3, 0.4]
    df = synthesis_curve(dsbs, ts)
    known = np.array([point_of(dsbs, c) for c in (_dsbs_wyner_channel(), reveal_x(dsbs), reveal_y(dsbs))])
    for t, value in zip(ts, df["value"]):
        assert value <= synthesis_minimax(known, t)[0] + 1e-3
        assert value >= mutual_information(dsbs) - 1e-6
    # at t=0.3 the best mixture of the known points is about 0.628; no single point gets below 0.70
    assert df["value"].iloc[1] <= 0.63


@pytest.mark.slow
def test_gacs_korner_support_form_on_planted_blocks(planted_blocks, fast_cfg):
    for p, _ in planted_blocks:
        res = gacs_korner_ci(p, fast_cfg, with_support_form=True)
        assert res.form_gap <= 1e-3, res.to_dict()
