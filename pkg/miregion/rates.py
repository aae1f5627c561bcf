"""Rate regions of the extended Gray-Wyner system and the maps between them and the region."""

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from .errors import OuterBoundViolated, PmfValidationError
from .models import Config
from .probability import JointPmf, MiPoint, conditional_entropy, entropy, mutual_information
from .region import (
    MembershipVerdict,
    RegionApprox,
    _collect_base_points,
    _dominance_lp,
    dominance_search,
    outer_bound_check,
    outer_halfspaces,
)

logger = logging.getLogger(__name__)

RATE_LABELS = ("R0", "R1", "R2", "R3", "R4")
CLAMP_TOL = 1e-9


class RateTuple(NamedTuple):
    r0: float
    r1: float
    r2: float
    r3: float
    r4: float


def rate_tuple(values) -> RateTuple:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (5,):
        raise PmfValidationError(f"a rate tuple has 5 coordinates, got {arr.shape}")
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise PmfValidationError("rates must be finite and nonnegative")
    return RateTuple(*(float(a) for a in arr))


def _entropies(p: JointPmf) -> dict[str, float]:
    return {
        "H(X)": entropy(p.px),
        "H(Y)": entropy(p.py),
        "H(X,Y)": entropy(p.p),
        "H(X|Y)": conditional_entropy(p, "y"),
        "H(Y|X)": conditional_entropy(p, "x"),
        "I(X;Y)": mutual_information(p),
    }


def rate_map(p: JointPmf) -> tuple[np.ndarray, np.ndarray]:
    """The causal image R(v) = M v + d."""
    h = _entropies(p)
    M = np.array(
        [
            [0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 1.0, -1.0],
            [1.0, 0.0, -1.0],
        ]
    )
    d = np.array([0.0, h["H(X)"], h["H(Y)"], h["H(X|Y)"], h["H(Y|X)"]])
    return M, d


def rate_tuple_of(p: JointPmf, v) -> RateTuple:
    """(v_XY, H(X)-v_X, H(Y)-v_Y, H(X|Y)-v_XY+v_Y, H(Y|X)-v_XY+v_X), dust clamped to 0."""
    check = outer_bound_check(p, v)
    if not check.inside:
        raise OuterBoundViolated(f"point {tuple(v)} violates the outer bound: {check.violations}")
    M, d = rate_map(p)
    r = M @ np.asarray(v, dtype=float) + d
    r = np.where(r < 0, 0.0, r)
    return RateTuple(*(float(x) for x in r))


def rate_membership(p: JointPmf, r, cfg: Optional[Config] = None,
                    approx: Optional[RegionApprox] = None) -> MembershipVerdict:
    """r in the causal region: some v has R(v) <= r componentwise."""
    cfg = cfg or Config()
    M, d = rate_map(p)
    return dominance_search(
        p, M, d, np.asarray(r, dtype=float), cfg, RATE_LABELS,
        points=approx.points if approx else None,
        witnesses=approx.witnesses if approx else None,
    )


# noncausal region -------------------------------------------------------------------

NONCAUSAL_NAMES = (
    "R0 >= I(X,Y;U)",
    "R1 >= H(X|U)",
    "R2 >= H(Y|U)",
    "R3 >= H(X|U) - H(Y)",
    "R4 >= H(Y|U) - H(X)",
    "R0 + R3 >= H(X|Y)",
    "R0 + R4 >= H(Y|X)",
    "R2 + R3 >= H(X|U)",
    "R1 + R4 >= H(Y|U)",
    "R0 + R2 + R3 >= H(X,Y)",
    "R0 + R1 + R4 >= H(X,Y)",
)


def noncausal_system(p: JointPmf) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The eleven inequalities as L r >= N v + e."""
    h = _entropies(p)
    hx, hy = h["H(X)"], h["H(Y)"]
    L = np.array(
        [
            [1, 0, 0, 0, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 1, 0, 0],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 0, 1],
            [1, 0, 0, 1, 0],
            [1, 0, 0, 0, 1],
            [0, 0, 1, 1, 0],
            [0, 1, 0, 0, 1],
            [1, 0, 1, 1, 0],
            [1, 1, 0, 0, 1],
        ],
        dtype=float,
    )
    N = np.array(
        [
            [0, 0, 1],
            [-1, 0, 0],
            [0, -1, 0],
            [-1, 0, 0],
            [0, -1, 0],
            [0, 0, 0],
            [0, 0, 0],
            [-1, 0, 0],
            [0, -1, 0],
            [0, 0, 0],
            [0, 0, 0],
        ],
        dtype=float,
    )
    e = np.array([0.0, hx, hy, hx - hy, hy - hx, h["H(X|Y)"], h["H(Y|X)"], hx, hy, h["H(X,Y)"], h["H(X,Y)"]])
    return L, N, e


def noncausal_rates_feasible(p: JointPmf, r, v) -> tuple[bool, dict[str, float]]:
    """Slack of each inequality at the point v; feasible when every slack >= -1e-9."""
    L, N, e = noncausal_system(p)
    slack = L @ np.asarray(r, dtype=float) - N @ np.asarray(v, dtype=float) - e
    slacks = {n: float(s) for n, s in zip(NONCAUSAL_NAMES, slack)}
    return bool((slack >= -CLAMP_TOL).all()), slacks


def noncausal_rate_membership(p: JointPmf, r, cfg: Optional[Config] = None,
                              approx: Optional[RegionApprox] = None) -> MembershipVerdict:
    cfg = cfg or Config()
    r = np.asarray(r, dtype=float)
    if (r < -cfg.region.membership_tolerance).any():
        return MembershipVerdict(status="outside", certificate={"source": "nonnegativity"})
    L, N, e = noncausal_system(p)
    return dominance_search(
        p, N, e, L @ r, cfg, NONCAUSAL_NAMES,
        points=approx.points if approx else None,
        witnesses=approx.witnesses if approx else None,
    )


# projections -------------------------------------------------------------------------


def gray_wyner_point(p: JointPmf, v) -> tuple[float, float, float]:
    v_x, v_y, v_xy = (float(a) for a in v)
    return (v_xy, entropy(p.px) - v_x, entropy(p.py) - v_y)


def wyner_sum_rate(p: JointPmf, v) -> float:
    return float(sum(gray_wyner_point(p, v)))


TENSION_MATRIX = np.array([[-1.0, 0.0, 1.0], [0.0, -1.0, 1.0], [-1.0, -1.0, 1.0]])


def tension_point(p: JointPmf, v) -> tuple[float, float, float]:
    """(I(Y;U|X), I(X;U|Y), I(X;Y|U)) in terms of v."""
    t = TENSION_MATRIX @ np.asarray(v, dtype=float) + np.array([0.0, 0.0, mutual_information(p)])
    return tuple(float(a) for a in t)


@dataclass
class ProjectedRegion:
    """Image of a region approximation under an affine map, closed upward in every coordinate."""

    name: str
    columns: tuple[str, str, str]
    points: np.ndarray
    normals: np.ndarray
    bounds: np.ndarray
    metadata: dict = field(default_factory=dict)

    def contains(self, g, tol: float = 1e-7) -> Optional[bool]:
        """True if g dominates a convex combination of the image points, False if it
        violates a kept half-space, None otherwise."""
        g = np.asarray(g, dtype=float)
        t, _ = _dominance_lp(self.points, np.eye(3), np.zeros(3), g)
        if t <= tol:
            return True
        if len(self.normals) and (self.normals @ g - self.bounds > tol).any():
            return False
        return None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.points, columns=list(self.columns))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "points": self.points.tolist(),
            "halfspaces": [{"normal": n.tolist(), "bound": float(b)} for n, b in zip(self.normals, self.bounds)],
            "metadata": self.metadata,
        }


def _project(approx: RegionApprox, T: np.ndarray, offset: np.ndarray, name: str,
             columns: tuple[str, str, str]) -> ProjectedRegion:
    """g = T v + offset; b.v <= psi becomes (T^-T b).g <= psi + (T^-T b).offset."""
    pts = approx.array() @ T.T + offset
    Tinv_t = np.linalg.inv(T).T
    normals, bounds = [], []
    for b, psi in zip(approx.directions, approx.psi):
        n = Tinv_t @ b
        # only lower-bounding half-spaces survive the upward closure
        if (n <= 1e-12).all():
            normals.append(n)
            bounds.append(psi + n @ offset)
    return ProjectedRegion(
        name=name,
        columns=columns,
        points=pts,
        normals=np.array(normals).reshape(-1, 3),
        bounds=np.array(bounds),
        metadata={"source_points": len(pts), "kept_halfspaces": len(normals)},
    )


def gray_wyner_projection(approx: RegionApprox, p: JointPmf) -> ProjectedRegion:
    T = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
    offset = np.array([0.0, entropy(p.px), entropy(p.py)])
    return _project(approx, T, offset, "gray_wyner", ("R0", "R1", "R2"))


def tension_projection(approx: RegionApprox, p: JointPmf) -> ProjectedRegion:
    offset = np.array([0.0, 0.0, mutual_information(p)])
    return _project(approx, TENSION_MATRIX, offset, "tension", ("I(Y;U|X)", "I(X;U|Y)", "I(X;Y|U)"))


# closure of the multi-letter region ---------------------------------------------------

CL_FORMS = ("cone", "ray", "noncausal", "gray_wyner")


def cl_infty_corners(p: JointPmf) -> list[MiPoint]:
    """Corner points p1..p8 of the outer bound other than (I, I, I)."""
    hx, hy = entropy(p.px), entropy(p.py)
    if hx < hy:
        return [MiPoint(b, a, c) for a, b, c in cl_infty_corners(p.transpose())]
    h = _entropies(p)
    info = h["I(X;Y)"]
    return [
        MiPoint(0.0, 0.0, 0.0),
        MiPoint(hx, info, hx),
        MiPoint(info, hy, hy),
        MiPoint(hx, hy, h["H(X,Y)"]),
        MiPoint(h["H(X|Y)"], 0.0, h["H(X|Y)"]),
        MiPoint(0.0, h["H(Y|X)"], h["H(Y|X)"]),
        MiPoint(0.0, 0.0, h["H(Y|X)"]),
        MiPoint(hx - hy, 0.0, h["H(X|Y)"]),
    ]


def _cl_system(p: JointPmf, v: np.ndarray, form: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple]:
    """The query as: some w in the region has M w + d <= r."""
    if form == "cone":
        M = np.diag([-1.0, -1.0, 1.0])
        return M, np.zeros(3), M @ v, ("w_X >= v_X", "w_Y >= v_Y", "w_XY <= v_XY")
    if form == "ray":
        M = np.array([[1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, -1.0], [0.0, -1.0, 1.0], [-1.0, 0.0, 0.0]])
        r = np.array([v[0] - v[2], v[2] - v[0], v[1] - v[2], v[2] - v[1], -v[0]])
        return M, np.zeros(5), r, ("ray x", "ray x", "ray y", "ray y", "t <= 0")
    if form == "noncausal":
        L, N, e = noncausal_system(p)
        M_r, d_r = rate_map(p)
        return N, e, L @ (M_r @ v + d_r), NONCAUSAL_NAMES
    if form == "gray_wyner":
        T = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
        return T, np.zeros(3), T @ v, ("R0", "R1", "R2")
    raise ValueError(f"Unknown form {form}")


def _cl_precheck(p: JointPmf, v: np.ndarray, form: str, tol: float) -> Optional[str]:
    """Reason v is certainly outside before any search, or None."""
    if form == "ray":
        if v[0] < -tol or v[1] < -tol:
            return "quadrant"
        return None
    if form == "noncausal":
        M_r, d_r = rate_map(p)
        if (M_r @ v + d_r < -tol).any():
            return "nonnegativity"
        return None
    check = outer_bound_check(p, v, tol=tol)
    if not check.inside:
        return max(check.violations, key=check.violations.get)
    return None


def cl_infty_membership(p: JointPmf, v, form: str = "cone", cfg: Optional[Config] = None,
                        approx: Optional[RegionApprox] = None) -> MembershipVerdict:
    """Three-valued membership of v in the closure of the multi-letter region, by one of
    its equivalent expressions. Boundary points of the unclosed set are not decided."""
    cfg = cfg or Config()
    v = np.asarray(v, dtype=float)
    reason = _cl_precheck(p, v, form, cfg.region.membership_tolerance)
    if reason is not None:
        return MembershipVerdict(status="outside", certificate={"source": "outer_bound", "inequality": reason})
    M, d, r, labels = _cl_system(p, v, form)
    if approx is not None:
        points, witnesses = list(approx.points), list(approx.witnesses)
    else:
        points, witnesses, _ = _collect_base_points(p, cfg)
    corners = cl_infty_corners(p)
    return dominance_search(
        p, M, d, r, cfg, labels,
        points=points + corners,
        witnesses=witnesses + [None] * len(corners),
    )


@dataclass
class ClInftyApprox:
    points: np.ndarray
    tags: list[str]
    cone_halfspaces: list[tuple[np.ndarray, float]]
    ray_halfspaces: list[tuple[np.ndarray, float]]

    def to_dict(self) -> dict:
        def hs(items):
            return [{"normal": n.tolist(), "bound": float(b)} for n, b in items]

        return {
            "points": self.points.tolist(),
            "tags": self.tags,
            "cone_halfspaces": hs(self.cone_halfspaces),
            "ray_halfspaces": hs(self.ray_halfspaces),
        }


def cl_infty_region(approx: RegionApprox, p: JointPmf) -> ClInftyApprox:
    """Both set expressions as half-space/hull approximations over the same generating points."""
    corners = cl_infty_corners(p)
    points = np.vstack([approx.array(), np.array(corners)])
    tags = list(approx.tags) + [f"corner:p{i + 1}" for i in range(len(corners))]
    A, c, _ = outer_halfspaces(p)
    cone = [(a, float(b)) for a, b in zip(A, c)]
    ray = [(np.array([-1.0, 0.0, 0.0]), 0.0), (np.array([0.0, -1.0, 0.0]), 0.0)]
    for b, psi in zip(approx.directions, approx.psi):
        # support stays finite only on the polar of the added cone
        if b[0] >= -1e-12 and b[1] >= -1e-12 and b[2] <= 1e-12:
            cone.append((b, float(psi)))
        if b.sum() >= -1e-12:
            ray.append((b, float(psi)))
    return ClInftyApprox(points, tags, cone, ray)


def _approx_verdict(p: JointPmf, v: np.ndarray, form: str, points: np.ndarray, band: float) -> str:
    reason = _cl_precheck(p, v, form, band)
    if reason is not None:
        return "outside"
    M, d, r, _ = _cl_system(p, v, form)
    t, _ = _dominance_lp(points, M, d, r)
    if t <= 1e-9:
        return "inside"
    if t > band:
        return "outside"
    return "boundary"


def cl_infty_consistency(approx: RegionApprox, p: JointPmf, samples: int = 100, seed: int = 0,
                         band: float = 1e-6) -> tuple[pd.DataFrame, dict]:
    """Evaluate random queries in all four expressions over the same generating points and
    report agreement among queries every form decides."""
    cl = cl_infty_region(approx, p)
    rng = np.random.default_rng(seed)
    hi = np.array([entropy(p.px), entropy(p.py), entropy(p.p)]) + 0.1
    queries = rng.uniform(-0.1, 1.0, size=(samples, 3)) * hi
    rows = []
    for v in queries:
        row = {"v_X": v[0], "v_Y": v[1], "v_XY": v[2]}
        for form in CL_FORMS:
            row[form] = _approx_verdict(p, v, form, cl.points, band)
        rows.append(row)
    df = pd.DataFrame(rows)
    decided = df[~df[list(CL_FORMS)].isin(["boundary"]).any(axis=1)]
    summary = {"samples": samples, "decided": int(len(decided))}
    for other in CL_FORMS[1:]:
        agree = int((decided["cone"] == decided[other]).sum())
        summary[f"cone_vs_{other}"] = agree / len(decided) if len(decided) else 1.0
    if summary["decided"] and min(summary[f"cone_vs_{o}"] for o in CL_FORMS[1:]) < 1.0:
        logger.warning("closure expressions disagree on some decided queries: %s", summary)
    return df, summary


def noncausal_corner_tuple(p: JointPmf, index: int, slack: float = 0.0) -> RateTuple:
    """R(p_i) + slack for the i-th closure corner (1-based)."""
    corner = cl_infty_corners(p)[index - 1]
    M, d = rate_map(p)
    r = M @ np.asarray(corner) + d + slack
    return RateTuple(*(float(max(x, 0.0)) for x in r))
