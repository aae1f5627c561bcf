import numpy as np
import pytest

from miregion.errors import (
    AlphabetTooLarge,
    DimensionMismatch,
    EmptyMatrix,
    MassDeviationTooLarge,
    NegativeEntry,
)
from miregion.probability import (
    Channel,
    conditional_entropy,
    deterministic_channel,
    entropy,
    entropy_profile,
    extend,
    mixture_channel,
    mixture_of,
    mutual_information,
    product_channel,
    product_joint,
    prune_channel,
    random_channel,
    random_pmf,
    reveal_x,
    reveal_xy,
    tensor_power,
    trivial_channel,
    validate_pmf,
)


def test_validate_pmf_accepts_and_labels():
    p = validate_pmf([[0.5, 0.0], [0.0, 0.5]])
    assert p.x_alphabet == ("x0", "x1")
    assert p.mass_deviation == 0.0


def test_validate_pmf_renormalizes_small_mass_error():
    p = validate_pmf([[0.5 + 4e-10, 0.0], [0.0, 0.5]])
    assert p.p.sum() == pytest.approx(1.0, abs=1e-15)
    assert p.mass_deviation == pytest.approx(4e-10)


@pytest.mark.parametrize(
    "raw, exc",
    [
        ([[0.5, -0.1], [0.3, 0.3]], NegativeEntry),
        ([[0.5, 0.1], [0.3, 0.3]], MassDeviationTooLarge),
        ([], EmptyMatrix),
        ([0.5, 0.5], DimensionMismatch),
    ],
)
def test_validate_pmf_rejects(raw, exc):
    with pytest.raises(exc):
        validate_pmf(raw)


def test_validation_errors_are_value_errors():
    with pytest.raises(ValueError):
        validate_pmf([[0.5, -0.1], [0.3, 0.3]])


def test_entropy_values():
    assert entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([0.9, 0.1]) == pytest.approx(0.4689956, abs=1e-7)


def test_mutual_information(p_eq, p_ind, dsbs):
    assert mutual_information(p_eq) == pytest.approx(1.0)
    assert mutual_information(p_ind) == pytest.approx(0.0, abs=1e-15)
    assert mutual_information(dsbs) == pytest.approx(0.5310044, abs=1e-7)
    assert conditional_entropy(dsbs, "x") == pytest.approx(entropy([0.9, 0.1]))


def test_extend_xor_channel_on_independent_bits(p_ind):
    c = deterministic_channel([[0, 1], [1, 0]])
    prof = entropy_profile(extend(p_ind, c))
    assert prof.h_u == pytest.approx(1.0)
    assert prof.i_xu == pytest.approx(0.0, abs=1e-12)
    assert prof.i_yu == pytest.approx(0.0, abs=1e-12)
    assert prof.i_xyu == pytest.approx(1.0)


def test_extend_rejects_wrong_shape(p_ind):
    with pytest.raises(DimensionMismatch):
        extend(p_ind, Channel(np.ones((3, 2, 1))))


def test_chain_rule_on_random_channels(rng):
    for _ in range(100):
        nx, ny = rng.integers(1, 5, size=2)
        p = random_pmf(rng, int(nx), int(ny))
        c = random_channel(rng, p.nx, p.ny, int(rng.integers(1, 5)))
        prof = entropy_profile(extend(p, c))
        assert prof.i_xyu == pytest.approx(prof.i_xu + prof.i_yu_given_x, abs=1e-10)
        assert prof.i_xyu == pytest.approx(prof.i_yu + prof.i_xu_given_y, abs=1e-10)


def test_entropy_is_concave(rng):
    for _ in range(50):
        a, b = rng.dirichlet(np.ones(5), size=2)
        lam = rng.uniform()
        assert entropy(lam * a + (1 - lam) * b) >= lam * entropy(a) + (1 - lam) * entropy(b) - 1e-12


def test_mixture_point_is_linear(rng):
    for _ in range(100):
        p = random_pmf(rng, 3, 2)
        c0 = random_channel(rng, 3, 2, 2)
        c1 = random_channel(rng, 3, 2, 3)
        lam = float(rng.uniform())
        mixed = mixture_channel(c0, c1, lam)
        assert mixed.u_size == 5
        v0 = entropy_profile(extend(p, c0)).point.as_array()
        v1 = entropy_profile(extend(p, c1)).point.as_array()
        v = entropy_profile(extend(p, mixed)).point.as_array()
        np.testing.assert_allclose(v, (1 - lam) * v0 + lam * v1, atol=1e-10)


def test_mixture_midpoint_of_corners(p_ind):
    mixed = mixture_channel(trivial_channel(p_ind), reveal_xy(p_ind), 0.5)
    np.testing.assert_allclose(entropy_profile(extend(p_ind, mixed)).point, (0.5, 0.5, 1.0), atol=1e-12)


def test_mixture_of_rejects_bad_weights(p_ind):
    with pytest.raises(ValueError):
        mixture_of([trivial_channel(p_ind), reveal_x(p_ind)], [0.7, 0.7])


def test_product_joint_additivity(p_eq, p_ind):
    assert mutual_information(product_joint(p_eq, p_eq)) == pytest.approx(2.0)
    assert mutual_information(product_joint(p_ind, p_ind)) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(product_joint(p_eq, p_ind)) == pytest.approx(1.0)
    pp = product_joint(p_eq, p_ind)
    assert entropy(pp.px) == pytest.approx(entropy(p_eq.px) + entropy(p_ind.px))


def test_product_joint_size_cap(p_ind):
    with pytest.raises(AlphabetTooLarge):
        product_joint(p_ind, p_ind, max_states=3)


def test_tensor_power(p_eq, p_ind):
    assert tensor_power(p_eq, 1) is p_eq
    np.testing.assert_allclose(tensor_power(p_eq, 2).p, np.eye(4) / 4)
    np.testing.assert_allclose(tensor_power(p_ind, 2).p, np.full((4, 4), 1 / 16))
    with pytest.raises(ValueError):
        tensor_power(p_eq, 3)


def test_product_channel_point_is_sum(rng):
    p1, p2 = random_pmf(rng, 2, 2), random_pmf(rng, 2, 3)
    c1, c2 = random_channel(rng, 2, 2, 2), random_channel(rng, 2, 3, 2)
    v = entropy_profile(extend(product_joint(p1, p2), product_channel(c1, c2))).point.as_array()
    v1 = entropy_profile(extend(p1, c1)).point.as_array()
    v2 = entropy_profile(extend(p2, c2)).point.as_array()
    np.testing.assert_allclose(v, v1 + v2, atol=1e-10)


def test_prune_channel_drops_dead_symbols(p_eq):
    q = np.zeros((2, 2, 3))
    q[:, :, 0] = 1.0
    q[1, 1] = [0.0, 1.0, 0.0]
    pruned = prune_channel(p_eq, Channel(q))
    assert pruned.u_size == 2
