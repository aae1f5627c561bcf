"""The mutual information region: point map, inner/outer bounds, sampling and membership."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .errors import EnumerationTooLarge
from .guards import assert_within_outer_bound
from .models import Config, OptimizerConfig, RegionConfig
from .optimize import enumerate_deterministic, support_function
from .probability import (
    SUPPORT_TOL,
    Channel,
    JointPmf,
    MiPoint,
    TriplePmf,
    conditional_entropy,
    entropy_profile,
    extend,
    mixture_channel,
    mixture_of,
    mutual_information,
    prune_channel,
    reveal_x,
    reveal_xy,
    reveal_y,
    trivial_channel,
)

logger = logging.getLogger(__name__)

# nine support-function directions of the named quantities, plus (0,0,1)
TABLE_DIRECTIONS = (
    (1.0, 1.0, -1.0),
    (1.0, 1.0, -2.0),
    (1.0, 2.0, -2.0),
    (1.0, -1.0, 0.0),
    (-2.0, 0.0, 1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
    (-1.0, 0.0, 0.0),
    (-1.0, -1.0, 0.0),
    (0.0, 0.0, 1.0),
)

OUTER_NAMES = (
    "v_X >= 0",
    "v_Y >= 0",
    "v_X + v_Y - v_XY <= I(X;Y)",
    "v_XY - v_Y >= 0",
    "v_XY - v_Y <= H(X|Y)",
    "v_XY - v_X >= 0",
    "v_XY - v_X <= H(Y|X)",
)

CONSTRUCTION_PRUNE = 1e-14


def mi_point(p: JointPmf, c: Channel) -> MiPoint:
    """(I(X;U), I(Y;U), I(X,Y;U)) for U drawn from c."""
    return entropy_profile(extend(p, c)).point


def mi_point_of_triple(t: TriplePmf) -> MiPoint:
    return entropy_profile(t).point


# outer bound -------------------------------------------------------------------


def outer_halfspaces(p: JointPmf) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """The outer bound as A v <= c."""
    A = np.array(
        [
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [1.0, 1.0, -1.0],
            [0.0, 1.0, -1.0],
            [0.0, -1.0, 1.0],
            [1.0, 0.0, -1.0],
            [-1.0, 0.0, 1.0],
        ]
    )
    c = np.array(
        [
            0.0,
            0.0,
            mutual_information(p),
            0.0,
            conditional_entropy(p, "y"),
            0.0,
            conditional_entropy(p, "x"),
        ]
    )
    return A, c, OUTER_NAMES


@dataclass
class BoundCheck:
    inside: bool
    violations: dict[str, float]
    slacks: dict[str, float]

    def to_dict(self) -> dict:
        return {"inside": self.inside, "violations": self.violations, "slacks": self.slacks}


def outer_bound_check(p: JointPmf, v, tol: float = 1e-9) -> BoundCheck:
    A, c, names = outer_halfspaces(p)
    excess = A @ np.asarray(v, dtype=float) - c
    violations = {n: float(e) for n, e in zip(names, excess) if e > tol}
    slacks = {n: float(-e) for n, e in zip(names, excess)}
    return BoundCheck(not violations, violations, slacks)


def outer_support(p: JointPmf, b) -> float:
    """max b.v over the outer bound (an LP)."""
    A, c, _ = outer_halfspaces(p)
    res = linprog(-np.asarray(b, dtype=float), A_ub=A, b_ub=c, bounds=[(None, None)] * 3, method="highs")
    return float(-res.fun)


def outer_volume(p: JointPmf) -> float:
    A, c, _ = outer_halfspaces(p)
    norms = np.linalg.norm(A, axis=1)
    # Chebyshev centre: largest ball inside A v <= c
    res = linprog(
        np.array([0.0, 0.0, 0.0, -1.0]),
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=c,
        bounds=[(None, None)] * 3 + [(0.0, None)],
        method="highs",
    )
    if res.status != 0 or res.x[3] <= 1e-9:
        return 0.0
    hs = HalfspaceIntersection(np.hstack([A, -c[:, None]]), res.x[:3])
    return float(ConvexHull(hs.intersections).volume)


# constructive inner points ----------------------------------------------------------


def frl_channel(p: JointPmf, direction: str = "x->y", merge_tol: float = 1e-12) -> Channel:
    """V independent of X with Y a function of (X, V), by cutting [0,1) at every
    breakpoint of the conditional CDFs of Y given each x.

    direction "y->x" builds the mirror image (V independent of Y, X a function of (Y, V)).
    """
    if direction == "y->x":
        mirrored = frl_channel(p.transpose(), "x->y", merge_tol)
        return Channel(np.transpose(mirrored.q, (1, 0, 2)))
    if direction != "x->y":
        raise ValueError(f"Unknown direction {direction}")

    pxy = np.asarray(p.p)
    px = p.px
    live = np.flatnonzero(px > SUPPORT_TOL)
    cdfs = np.cumsum(pxy[live] / px[live, None], axis=1)
    cuts = []
    for c in np.sort(cdfs[:, :-1].ravel()):
        if merge_tol < c < 1.0 - merge_tol and (not cuts or c - cuts[-1] > merge_tol):
            cuts.append(float(c))
    edges = np.array([0.0, *cuts, 1.0])
    lengths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    k = len(lengths)

    q = np.broadcast_to(lengths, (p.nx, p.ny, k)).copy()
    for row, x in enumerate(live):
        cond = pxy[x] / px[x]
        ys = np.minimum(np.searchsorted(cdfs[row], mids, side="right"), p.ny - 1)
        for y in np.flatnonzero(cond > SUPPORT_TOL):
            q[x, y] = np.where(ys == y, lengths, 0.0) / cond[y]
    rows = q.sum(axis=2, keepdims=True)
    return Channel(q / rows)


def functional_pair_channel(p: JointPmf) -> Channel:
    """U = (V, W): V independent of X with H(Y|X,V)=0, then W independent of (Y,V)
    with H(X|Y,V,W)=0.
    """
    q1 = np.asarray(frl_channel(p, "x->y").q)
    kv = q1.shape[2]
    # source ((Y,V), X) for the second representation
    joint = np.einsum("xy,xyv->yvx", p.p, q1).reshape(p.ny * kv, p.nx)
    labels = tuple(f"({y},{v})" for y in p.y_alphabet for v in range(kv))
    second = JointPmf(labels, p.x_alphabet, joint)
    q2 = np.asarray(frl_channel(second, "x->y").q).reshape(p.ny, kv, p.nx, -1)
    q = np.einsum("xyv,yvxw->xyvw", q1, q2).reshape(p.nx, p.ny, -1)
    return prune_channel(p, Channel(q), tol=CONSTRUCTION_PRUNE)


def fifth_inner_channel(p: JointPmf) -> tuple[Channel, dict]:
    """Channel landing on (H(X|Y), H(Y|X), H(X|Y)+H(Y|X))."""
    pair = functional_pair_channel(p)
    s = conditional_entropy(p, "y") + conditional_entropy(p, "x")
    t = mi_point(p, pair).v_xy
    info = mutual_information(p)
    denom = s - t + info
    lam = 0.0 if denom <= 0.0 else min(max((s - t) / denom, 0.0), 1.0)
    if t > s + 1e-9:
        logger.warning("functional pair reached I(X,Y;U)=%.9f above H(X|Y)+H(Y|X)=%.9f", t, s)
    mixed = prune_channel(p, mixture_channel(pair, reveal_xy(p), lam), tol=CONSTRUCTION_PRUNE)
    return mixed, {"pair_v_xy": t, "mix_weight": lam, "pair_u_size": pair.u_size}


def inner_bound_points(p: JointPmf) -> list[tuple[MiPoint, Channel]]:
    """U = empty, X, Y, (X,Y) and the composed functional-representation point."""
    channels = [trivial_channel(p), reveal_x(p), reveal_y(p), reveal_xy(p), fifth_inner_channel(p)[0]]
    return [(mi_point(p, c), c) for c in channels]


# directions ----------------------------------------------------------------------


def icosphere_directions(level: int = 2) -> np.ndarray:
    """Unit vertices of an icosahedron subdivided `level` times (10*4^level + 2 of them)."""
    phi = (1.0 + 5.0 ** 0.5) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = refined
    return np.array(verts)


def default_directions(cfg: RegionConfig) -> np.ndarray:
    dirs = icosphere_directions(cfg.subdivision_level)
    if cfg.include_table_directions:
        dirs = np.vstack([dirs, np.array(TABLE_DIRECTIONS)])
    return dirs


# sampled region -------------------------------------------------------------------


@dataclass
class RegionApprox:
    """Inner hull of achieved points with witnesses, and half-spaces from sampled directions."""

    points: list[MiPoint]
    witnesses: list[Channel]
    tags: list[str]
    directions: np.ndarray
    psi: np.ndarray  # max over inner points of b.v per direction
    outer_psi: np.ndarray  # LP value over the outer bound per direction
    dimension: int = 3
    hull_vertices: list[int] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.dimension < 3

    @property
    def gaps(self) -> np.ndarray:
        return self.outer_psi - self.psi

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 3)

    def inner_volume(self) -> float:
        if self.degenerate:
            return 0.0
        return float(ConvexHull(self.array()).volume)

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.array(), columns=["v_X", "v_Y", "v_XY"])
        df["tag"] = self.tags
        return df

    def to_dict(self) -> dict:
        return {
            "points": [
                {"v": list(pt), "tag": tag, "witness": i}
                for i, (pt, tag) in enumerate(zip(self.points, self.tags))
            ],
            "halfspaces": [
                {"b": [float(x) for x in b], "psi_hat": float(s), "psi_outer": float(o), "gap": float(o - s)}
                for b, s, o in zip(self.directions, self.psi, self.outer_psi)
            ],
            "witnesses": [np.asarray(c.q).tolist() for c in self.witnesses],
            "hull_vertices": list(self.hull_vertices),
            "degenerate": self.degenerate,
            "dimension": self.dimension,
            "metadata": self.metadata,
        }


def affine_dimension(points: np.ndarray, tol: float = 1e-9) -> tuple[int, np.ndarray]:
    """Rank of the centred point cloud and the orthonormal basis of its span."""
    centred = points - points.mean(axis=0)
    if len(points) < 2:
        return 0, np.zeros((0, 3))
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    scale = max(1.0, float(np.abs(points).max()))
    rank = int((s > tol * scale).sum())
    return rank, vt[:rank]


def hull_vertices(points: np.ndarray) -> tuple[int, list[int]]:
    rank, basis = affine_dimension(points)
    if rank == 0:
        return 0, [0]
    coords = (points - points.mean(axis=0)) @ basis.T
    if rank == 1:
        return 1, sorted({int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))})
    return rank, sorted(int(i) for i in ConvexHull(coords).vertices)


def _collect_base_points(p: JointPmf, cfg: Config) -> tuple[list, list, list]:
    points, witnesses, tags = [], [], []
    for tag, (pt, c) in zip(("empty", "X", "Y", "XY", "frl"), inner_bound_points(p)):
        points.append(pt)
        witnesses.append(c)
        tags.append(f"inner:{tag}")
    try:
        for c, pt in enumerate_deterministic(p, cfg.region.enumeration_u_size, cfg.limits):
            points.append(pt)
            witnesses.append(c)
            tags.append("deterministic")
    except EnumerationTooLarge:
        logger.warning("skipping deterministic enumeration: alphabet too large for u_size=%d",
                       cfg.region.enumeration_u_size)
    return points, witnesses, tags


def _direction_config(cfg: Config) -> OptimizerConfig:
    return cfg.optimizer.model_copy(update={"restarts": cfg.region.restarts_per_direction, "threads": 1})


def sample_region(p: JointPmf, directions: Optional[Sequence] = None,
                  cfg: Optional[Config] = None) -> RegionApprox:
    cfg = cfg or Config()
    dirs = default_directions(cfg.region) if directions is None else np.asarray(directions, dtype=float)
    if dirs.ndim != 2 or dirs.shape[1] != 3 or np.linalg.matrix_rank(dirs) < 3 or len(dirs) < 6:
        raise ValueError("need at least 6 directions spanning 3-space")

    points, witnesses, tags = _collect_base_points(p, cfg)
    opt = _direction_config(cfg)

    def solve(b):
        return support_function(p, b, opt, limits=cfg.limits)

    if cfg.optimizer.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.optimizer.threads) as pool:
            results = list(pool.map(solve, dirs))
    else:
        results = [solve(b) for b in dirs]
    for i, res in enumerate(results):
        points.append(res.point)
        witnesses.append(res.witness)
        tags.append(f"support[{i}]")

    for pt in points:
        assert_within_outer_bound(outer_bound_check(p, pt, tol=1e-9).violations)

    arr = np.array(points, dtype=float)
    psi = (arr @ dirs.T).max(axis=0)
    outer_psi = np.array([outer_support(p, b) for b in dirs])
    dim, verts = hull_vertices(arr)
    info = mutual_information(p)
    approx = RegionApprox(
        points=points,
        witnesses=witnesses,
        tags=tags,
        directions=dirs,
        psi=psi,
        outer_psi=outer_psi,
        dimension=dim,
        hull_vertices=verts,
        metadata={
            "direction_set_version": cfg.region.direction_set_version if directions is None else "custom",
            "directions": len(dirs),
            "max_gap": float((outer_psi - psi).max()),
            "sfrl_epsilon_bound": float(np.log2(info + 1.0) + 4.0),
            "sfrl_constructed": False,
        },
    )
    if approx.degenerate:
        logger.info("region is degenerate: affine dimension %d", dim)
    return approx


# membership ----------------------------------------------------------------------


@dataclass
class MembershipVerdict:
    status: str  # "inside" | "outside" | "unknown"
    certified: bool = True
    witness: Optional[Channel] = None
    combination: list[tuple[float, tuple]] = field(default_factory=list)
    certificate: dict = field(default_factory=dict)
    gap: Optional[float] = None
    rounds: int = 0

    @property
    def inside(self) -> bool:
        return self.status == "inside"

    @property
    def outside(self) -> bool:
        return self.status == "outside"

    def to_dict(self) -> dict:
        out = {"status": self.status, "certified": self.certified, "rounds": self.rounds}
        if self.combination:
            out["combination"] = [{"weight": w, "v": list(v)} for w, v in self.combination]
        if self.witness is not None:
            out["witness"] = np.asarray(self.witness.q).tolist()
        if self.certificate:
            out["certificate"] = self.certificate
        if self.gap is not None:
            out["gap"] = self.gap
        return out


def _dominance_lp(P: np.ndarray, M: np.ndarray, d: np.ndarray, r: np.ndarray):
    """min t over convex weights lam with M (sum lam_i P_i) + d <= r + t."""
    n, m = len(P), len(d)
    MP = P @ M.T  # (n, m)
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([MP.T, -np.ones((m, 1))])
    b_ub = r - d
    A_eq = np.hstack([np.ones((1, n)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0.0, None)] * n + [(None, None)], method="highs")
    return float(res.x[-1]), res.x[:-1]


def _separating_weights(P: np.ndarray, M: np.ndarray, d: np.ndarray, r: np.ndarray) -> tuple[float, np.ndarray]:
    """Dual of `_dominance_lp`: weights y >= 0, sum y = 1, maximizing y.(d - r) + min_i y.M P_i."""
    n, m = len(P), len(d)
    MP = P @ M.T
    c = np.concatenate([-(d - r), [-1.0]])
    A_ub = np.hstack([-MP, np.ones((n, 1))])
    A_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0.0, None)] * m + [(None, None)], method="highs")
    return float(-res.fun), res.x[:m]


def _outer_dominance(p: JointPmf, M: np.ndarray, d: np.ndarray, r: np.ndarray) -> tuple[float, np.ndarray]:
    """min t over v in the outer bound with M v + d <= r + t, plus the dual weights on the rows of M."""
    A, c, _ = outer_halfspaces(p)
    m = len(d)
    obj = np.array([0.0, 0.0, 0.0, 1.0])
    A_ub = np.vstack([np.hstack([M, -np.ones((m, 1))]), np.hstack([A, np.zeros((len(c), 1))])])
    b_ub = np.concatenate([r - d, c])
    res = linprog(obj, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * 4, method="highs")
    weights = -np.asarray(res.ineqlin.marginals[:m])
    return float(res.x[3]), weights


def dominance_search(p: JointPmf, M: np.ndarray, d: np.ndarray, r: np.ndarray,
                     cfg: Config, labels: Sequence[str],
                     points: Optional[list] = None, witnesses: Optional[list] = None) -> MembershipVerdict:
    """Is there v in the region with M v + d <= r? Column generation over witnesses.

    The outer bound decides certified Outside; the witness hull decides Inside;
    sampled support solves give uncertified Outside; the rest is Unknown.
    """
    tol = cfg.region.membership_tolerance
    M, d, r = (np.asarray(a, dtype=float) for a in (M, d, r))
    t_outer, y_outer = _outer_dominance(p, M, d, r)
    if t_outer > tol:
        y = y_outer / y_outer.sum() if y_outer.sum() > 0 else y_outer
        return MembershipVerdict(
            status="outside",
            certified=True,
            certificate={
                "source": "outer_bound",
                "violation": t_outer,
                "weights": {lab: float(w) for lab, w in zip(labels, y) if w > 1e-12},
            },
        )

    if points is None or witnesses is None:
        base_points, base_witnesses, _ = _collect_base_points(p, cfg)
        points = list(base_points) if points is None else list(points)
        witnesses = list(base_witnesses) if witnesses is None else list(witnesses)
    else:
        points, witnesses = list(points), list(witnesses)
    opt = _direction_config(cfg)

    t = np.inf
    for rounds in range(1, cfg.region.membership_rounds + 1):
        P = np.array(points, dtype=float)
        t, lam = _dominance_lp(P, M, d, r)
        if t <= tol:
            keep = np.flatnonzero(lam > 1e-12)
            weights = lam[keep] / lam[keep].sum()
            chosen = [witnesses[i] for i in keep]
            # generating points without a channel (closure corners) leave only the combination
            witness = mixture_of(chosen, weights) if all(c is not None for c in chosen) else None
            return MembershipVerdict(
                status="inside",
                witness=witness,
                combination=[(float(w), tuple(points[i])) for w, i in zip(weights, keep)],
                rounds=rounds,
            )
        _, y = _separating_weights(P, M, d, r)
        b = -(M.T @ y)
        if not np.any(np.abs(b) > 1e-12):
            break
        res = support_function(p, b, opt, seeds=[w for w in witnesses[-1:] if w is not None], limits=cfg.limits)
        points.append(res.point)
        witnesses.append(res.witness)
        # best weighted requirement any sampled point meets along y
        excess = float(y @ (d - r) - res.value)
        if excess > tol:
            return MembershipVerdict(
                status="outside",
                certified=False,
                certificate={
                    "source": "sampled_halfspace",
                    "b": [float(x) for x in b],
                    "psi_hat": res.value,
                    "violation": excess,
                    "weights": {lab: float(w) for lab, w in zip(labels, y) if w > 1e-12},
                },
                gap=float(outer_support(p, b) - res.value),
                rounds=rounds,
            )
    return MembershipVerdict(status="unknown", certified=False, gap=float(t), rounds=cfg.region.membership_rounds)


POINT_LABELS = ("v_X <= ", "v_Y <= ", "v_XY <= ", "v_X >= ", "v_Y >= ", "v_XY >= ")


def membership(p: JointPmf, v, cfg: Optional[Config] = None,
               approx: Optional[RegionApprox] = None,
               seeds: Sequence[Channel] = ()) -> MembershipVerdict:
    """Three-valued decision of v in the region.

    `seeds` are extra channels whose points join the generating set, e.g. a product witness.
    """
    cfg = cfg or Config()
    v = np.asarray(v, dtype=float)
    check = outer_bound_check(p, v, tol=cfg.region.membership_tolerance)
    if not check.inside:
        name, amount = max(check.violations.items(), key=lambda kv: kv[1])
        return MembershipVerdict(
            status="outside",
            certified=True,
            certificate={"source": "outer_bound", "inequality": name, "violation": amount},
        )
    points = list(approx.points) if approx else None
    witnesses = list(approx.witnesses) if approx else None
    if seeds:
        if points is None:
            points, witnesses = [], []
            for pt, c in inner_bound_points(p):
                points.append(pt)
                witnesses.append(c)
        for c in seeds:
            points.append(mi_point(p, c))
            witnesses.append(c)
    M = np.vstack([np.eye(3), -np.eye(3)])
    labels = [f"{lab}{x:g}" for lab, x in zip(POINT_LABELS, np.concatenate([v, v]))]
    return dominance_search(p, M, np.zeros(6), np.concatenate([v, -v]), cfg, labels,
                            points=points, witnesses=witnesses)
