import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .guards import assert_chain_ordered
from .models import Config
from .probability import (
    Channel,
    JointPmf,
    TriplePmf,
    conditional_entropy,
    mutual_information,
    product_channel,
    product_joint,
    random_channel,
    random_pmf,
    validate_pmf,
)
from .quantities import QuantityResult, g_nni, g_pni, g_ppi, interaction_informations
from .region import membership, mi_point, mi_point_of_triple

logger = logging.getLogger(__name__)

CHAIN_TOL = 1e-6


def bounds_report(p: JointPmf, cfg: Optional[Config] = None,
                  results: Optional[dict[str, QuantityResult]] = None) -> dict:
    """0 <= G_PPI <= G_PNI <= G_NNI <= min{H(X|Y), H(Y|X)}, reported rather than raised."""
    cfg = cfg or Config()
    results = results or interaction_informations(p, cfg)
    bound = min(conditional_entropy(p, "y"), conditional_entropy(p, "x"))
    chain = [
        ("zero", 0.0),
        ("g_ppi", results["g_ppi"].value),
        ("g_pni", results["g_pni"].value),
        ("g_nni", results["g_nni"].value),
        ("min_conditional_entropy", bound),
    ]
    failure = None
    try:
        assert_chain_ordered(chain, tol=CHAIN_TOL)
    except AssertionError as exc:
        failure = str(exc)
        logger.warning("interaction information chain broken: %s", failure)
    return {
        "chain": {name: value for name, value in chain},
        "ordered": failure is None,
        "optimizer_failure": failure,
        "methods": {k: results[k].method for k in ("g_ppi", "g_pni", "g_nni")},
    }


def chain_frame(pmfs: Sequence[JointPmf], cfg: Optional[Config] = None) -> pd.DataFrame:
    rows = []
    for i, p in enumerate(pmfs):
        rep = bounds_report(p, cfg)
        rows.append({"pmf": i, **rep["chain"], "ordered": rep["ordered"]})
    return pd.DataFrame(rows)


def random_corpus(count: int, nx: int = 3, ny: int = 3, seed: int = 0) -> list[JointPmf]:
    rng = np.random.default_rng(seed)
    return [random_pmf(rng, nx, ny) for _ in range(count)]


# superadditivity -----------------------------------------------------------------------


def superadditivity_check(p1: JointPmf, p2: JointPmf, cfg: Optional[Config] = None,
                          trials: int = 100, u_size: int = 2, seed: int = 0) -> tuple[pd.DataFrame, dict]:
    """Sampled v1 + v2 tested for membership in the product-source region, with
    U = (U1, U2) offered as the generating witness."""
    cfg = cfg or Config()
    p12 = product_joint(p1, p2, max_states=cfg.limits.product_states)
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(trials):
        c1 = random_channel(rng, p1.nx, p1.ny, u_size)
        c2 = random_channel(rng, p2.nx, p2.ny, u_size)
        v = np.add(mi_point(p1, c1), mi_point(p2, c2))
        c12 = product_channel(c1, c2)
        gap = float(np.abs(np.asarray(mi_point(p12, c12)) - v).max())
        verdict = membership(p12, v, cfg, seeds=[c12])
        rows.append({"trial": k, "v_X": v[0], "v_Y": v[1], "v_XY": v[2],
                     "witness_gap": gap, "status": verdict.status})
    df = pd.DataFrame(rows)
    summary = {
        "trials": trials,
        "inside": int((df.status == "inside").sum()),
        "max_witness_gap": float(df.witness_gap.max()) if trials else 0.0,
    }
    return df, summary


def quantity_superadditivity(p1: JointPmf, p2: JointPmf, name: str = "g_ppi",
                             cfg: Optional[Config] = None) -> dict:
    """g(p1 x p2) against g(p1) + g(p2); the product of the two witnesses seeds the product solve."""
    cfg = cfg or Config()
    fn = {"g_ppi": g_ppi, "g_pni": g_pni, "g_nni": g_nni}[name]
    q1, q2 = fn(p1, cfg), fn(p2, cfg)
    p12 = product_joint(p1, p2, max_states=cfg.limits.product_states)
    q12 = fn(p12, cfg, seeds=[product_channel(q1.witness, q2.witness)])
    return {
        "name": name,
        "parts": [q1.value, q2.value],
        "product": q12.value,
        "excess": q12.value - q1.value - q2.value,
    }


# data processing ---------------------------------------------------------------------


def erasure_matrix(n: int, erasure: float) -> np.ndarray:
    """Row-stochastic |n| x |n+1| erasure channel; the last column is the erasure symbol."""
    m = np.zeros((n, n + 1))
    m[np.arange(n), np.arange(n)] = 1.0 - erasure
    m[:, n] = erasure
    return m


def _check_stochastic(m: np.ndarray, rows: int, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != rows:
        raise ValueError(f"{what} must have {rows} rows, got shape {m.shape}")
    if (m < 0).any() or np.abs(m.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError(f"{what} rows must be pmfs")
    return m


def processed_source(p: JointPmf, x_channel, y_channel) -> JointPmf:
    """(X2, Y2) with X2 drawn from X1 and Y2 from Y1."""
    a = _check_stochastic(x_channel, p.nx, "x_channel")
    b = _check_stochastic(y_channel, p.ny, "y_channel")
    return validate_pmf(a.T @ p.p @ b)


def processed_point(p: JointPmf, c: Channel, x_channel, y_channel):
    """The same U evaluated against (X2, Y2)."""
    a = _check_stochastic(x_channel, p.nx, "x_channel")
    b = _check_stochastic(y_channel, p.ny, "y_channel")
    t = np.einsum("xa,yb,xy,xyu->abu", a, b, p.p, c.q)
    return mi_point_of_triple(TriplePmf(t))


def data_processing_check(p: JointPmf, x_channel, y_channel, cfg: Optional[Config] = None,
                          trials: int = 50, u_size: int = 3, seed: int = 0,
                          tol: float = 1e-10) -> tuple[pd.DataFrame, dict]:
    """For sampled v of (X1,Y1), w of (X2,Y2) from the same channel must satisfy
    w <= v coordinatewise and I(X2;Y2) - w_X - w_Y + w_XY <= I(X1;Y1) - v_X - v_Y + v_XY."""
    p2 = processed_source(p, x_channel, y_channel)
    i1, i2 = mutual_information(p), mutual_information(p2)
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(trials):
        c = random_channel(rng, p.nx, p.ny, u_size)
        v = mi_point(p, c)
        w = processed_point(p, c, x_channel, y_channel)
        slack = {
            "x": v.v_x - w.v_x,
            "y": v.v_y - w.v_y,
            "xy": v.v_xy - w.v_xy,
            "tension": (i1 - v.v_x - v.v_y + v.v_xy) - (i2 - w.v_x - w.v_y + w.v_xy),
        }
        rows.append({"trial": k, **{f"slack_{n}": s for n, s in slack.items()}})
    df = pd.DataFrame(rows)
    slacks = df.filter(like="slack_")
    summary = {
        "trials": trials,
        "min_slack": {c: float(slacks[c].min()) for c in slacks.columns} if trials else {},
        "holds": bool((slacks >= -tol).all().all()) if trials else True,
    }
    return df, summary
