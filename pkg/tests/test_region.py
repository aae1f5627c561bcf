import numpy as np
import pytest

from miregion.models import RegionConfig
from miregion.optimize import residuals_of
from miregion.probability import entropy_profile, extend, random_channel, random_pmf
from miregion.region import (
    TABLE_DIRECTIONS,
    default_directions,
    frl_channel,
    icosphere_directions,
    inner_bound_points,
    membership,
    mi_point,
    mi_point_of_triple,
    outer_bound_check,
    outer_halfspaces,
    outer_support,
    outer_volume,
    sample_region,
)


def test_outer_halfspaces_shape(p_l):
    A, c, names = outer_halfspaces(p_l)
    assert A.shape == (7, 3)
    assert len(c) == len(names) == 7


def test_channel_points_stay_inside_outer_bound(rng):
    for _ in range(100):
        p = random_pmf(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        c = random_channel(rng, p.nx, p.ny, int(rng.integers(1, 6)))
        v = mi_point(p, c)
        assert outer_bound_check(p, v, tol=1e-9).inside
        np.testing.assert_allclose(mi_point_of_triple(extend(p, c)), v, atol=1e-15)


def test_outer_bound_names_the_violation(p_ind):
    check = outer_bound_check(p_ind, (0.0, 0.0, 1.5))
    assert not check.inside
    assert "v_XY - v_Y <= H(X|Y)" in check.violations


def test_outer_support_and_volume(p_ind, p_eq):
    assert outer_support(p_ind, (-1, -1, 1)) == pytest.approx(1.0)
    assert outer_support(p_ind, (0, 0, 1)) == pytest.approx(2.0)
    assert outer_volume(p_ind) > 0
    assert outer_volume(p_eq) == 0.0


def test_frl_channel_properties(rng):
    for _ in range(50):
        p = random_pmf(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        c = frl_channel(p, "x->y")
        prof = entropy_profile(extend(p, c))
        assert residuals_of(p, c, ("indep_x",))["indep_x"] <= 1e-12
        assert prof.h_y_given_xu <= 1e-12
        assert c.u_size <= p.nx * (p.ny - 1) + 1


def test_frl_mirror_direction(p_l):
    c = frl_channel(p_l, "y->x")
    assert residuals_of(p_l, c, ("indep_y",))["indep_y"] <= 1e-12
    assert entropy_profile(extend(p_l, c)).h_x_given_yu <= 1e-12


def test_frl_on_independent_bits_recovers_y(p_ind):
    prof = entropy_profile(extend(p_ind, frl_channel(p_ind)))
    assert prof.i_yu == pytest.approx(1.0)
    assert prof.i_xu == pytest.approx(0.0, abs=1e-12)


def test_inner_bound_points_on_independent_bits(p_ind):
    pts = [tuple(np.round(v, 9)) for v, _ in inner_bound_points(p_ind)]
    assert pts[:4] == [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 2)]
    for v, _ in inner_bound_points(p_ind):
        assert outer_bound_check(p_ind, v).inside


def test_directions():
    dirs = icosphere_directions(2)
    assert dirs.shape == (162, 3)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert default_directions(RegionConfig()).shape == (162 + len(TABLE_DIRECTIONS), 3)
    assert icosphere_directions(0).shape == (12, 3)


def test_sample_region_flags_degenerate(p_eq, fast_cfg):
    approx = sample_region(p_eq, cfg=fast_cfg)
    assert approx.degenerate
    assert approx.dimension == 1
    assert approx.inner_volume() == 0.0
    assert (approx.gaps >= -1e-9).all()
    df = approx.to_frame()
    assert list(df.columns) == ["v_X", "v_Y", "v_XY", "tag"]


def test_sample_region_full_dimensional(p_ind, fast_cfg):
    approx = sample_region(p_ind, cfg=fast_cfg)
    assert approx.dimension == 3
    assert approx.metadata["sfrl_constructed"] is False
    out = approx.to_dict()
    assert len(out["halfspaces"]) == len(approx.directions)
    assert 0 < approx.inner_volume() <= outer_volume(p_ind) + 1e-9


def test_sample_region_rejects_flat_direction_sets(p_ind, fast_cfg):
    with pytest.raises(ValueError):
        sample_region(p_ind, directions=[(1, 0, 0)] * 6, cfg=fast_cfg)


def test_membership_verdicts(p_ind, fast_cfg):
    assert membership(p_ind, (0, 0, 0), fast_cfg).inside
    inside = membership(p_ind, (0.5, 0.5, 1.0), fast_cfg)
    assert inside.inside
    np.testing.assert_allclose(mi_point(p_ind, inside.witness), (0.5, 0.5, 1.0), atol=1e-6)
    xor = membership(p_ind, (0, 0, 1), fast_cfg)
    assert xor.inside
    out = membership(p_ind, (0, 0, 1.5), fast_cfg)
    assert out.outside and out.certified
    assert out.certificate["source"] == "outer_bound"


def test_membership_with_seed_channel(p_ind, fast_cfg):
    c = random_channel(np.random.default_rng(0), 2, 2, 3)
    v = mi_point(p_ind, c)
    verdict = membership(p_ind, v, fast_cfg, seeds=[c])
    assert verdict.inside
