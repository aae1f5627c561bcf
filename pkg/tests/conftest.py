from pathlib import Path

import numpy as np
import pytest

from miregion.io import load_pmf
from miregion.models import Config, OptimizerConfig, RegionConfig
from miregion.probability import validate_pmf

PMF_DIR = Path(__file__).resolve().parent.parent / "mi_region" / "pmfs"


@pytest.fixture
def pmf_dir() -> Path:
    return PMF_DIR


@pytest.fixture
def p_eq():
    return load_pmf(PMF_DIR / "p_eq.json")


@pytest.fixture
def p_ind():
    return load_pmf(PMF_DIR / "p_ind.json")


@pytest.fixture
def p_l():
    return load_pmf(PMF_DIR / "p_l.json")


@pytest.fixture
def dsbs():
    return load_pmf(PMF_DIR / "dsbs_0.1.json")


@pytest.fixture
def pentagon():
    return load_pmf(PMF_DIR / "pentagon.json")


@pytest.fixture
def uniform3():
    return validate_pmf(np.full((3, 3), 1.0 / 9.0))


@pytest.fixture
def two_blocks():
    p = np.zeros((4, 4))
    p[:2, :2] = 0.125
    p[2:, 2:] = 0.125
    return validate_pmf(p)


@pytest.fixture
def fast_cfg() -> Config:
    return Config(
        optimizer=OptimizerConfig(restarts=12, max_iterations=300, deterministic_seeds=4),
        region=RegionConfig(subdivision_level=0, restarts_per_direction=4, membership_rounds=8),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def dsbs_wyner_oracle():
    from miregion.models import ConstraintSpec, ObjectiveSpec
    from miregion.optimize import grid_oracle

    return grid_oracle(
        load_pmf(PMF_DIR / "dsbs_0.1.json"),
        ObjectiveSpec(b=(0, 0, 1), sense="minimize"),
        ConstraintSpec(structural=("markov_xuy",)),
        u_size=2,
        step=0.01,
    )


@pytest.fixture
def planted_blocks(rng):
    """20 block-diagonal pmfs with their block masses."""
    out = []
    for _ in range(20):
        sizes = rng.integers(1, 3, size=int(rng.integers(2, 4)))
        masses = rng.dirichlet(np.ones(len(sizes)))
        n = int(sizes.sum())
        p = np.zeros((n, n))
        start = 0
        for s, m in zip(sizes, masses):
            p[start:start + s, start:start + s] = rng.dirichlet(np.ones(s * s)).reshape(s, s) * m
            start += s
        out.append((validate_pmf(p), masses))
    return out
