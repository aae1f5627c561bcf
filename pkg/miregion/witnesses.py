"""Explicit channels behind the zero, positivity and maximum conditions of the interaction informations."""

import logging
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.special import entr

from .errors import ConditionNotMet, EpsilonTooLarge, InvalidCycle, InvalidPath, NotIndependent, SizeLimitError
from .graphs import SupportCycle, SupportPath, gacs_korner, max_condition_check
from .guards import assert_residuals
from .models import LimitsConfig, WitnessConfig
from .optimize import residuals_of
from .probability import LN2, SUPPORT_TOL, Channel, JointPmf, entropy, entropy_profile, extend, is_independent

logger = logging.getLogger(__name__)

BVN_TOL = 1e-12


def _epsilon(masses: list[float], wc: WitnessConfig) -> float:
    cap = min(masses) / 4.0
    eps = wc.epsilon if wc.epsilon is not None else wc.epsilon_fraction * min(masses)
    if eps <= 0 or eps > cap * (1 + 1e-12):
        raise EpsilonTooLarge(f"epsilon={eps:g} must lie in (0, {cap:g}] for this source")
    return eps


def path_witness_channel(p: JointPmf, path: SupportPath, wc: Optional[WitnessConfig] = None) -> Channel:
    """Binary U tilted on (x1,y1) and (x1,y2) in opposite directions; U stays independent of X
    while p(u|x1,y1) differs from p(u|x2,y1)."""
    wc = wc or WitnessConfig()
    x1, y1, x2, y2 = path.x1, path.y1, path.x2, path.y2
    if x1 == x2 or y1 == y2:
        raise InvalidPath(f"path needs x1 != x2 and y1 != y2, got {path}")
    cells = [(x1, y1), (x1, y2), (x2, y1)]
    if any(p.p[c] <= SUPPORT_TOL for c in cells):
        raise InvalidPath(f"path cells {cells} are not all in the support")
    eps = _epsilon([p.p[x1, y1], p.p[x1, y2]], wc)
    up = np.full((p.nx, p.ny), 0.5)
    up[x1, y1] += eps / p.p[x1, y1]
    up[x1, y2] -= eps / p.p[x1, y2]
    return Channel(np.stack([up, 1.0 - up], axis=-1))


def cycle_witness_channel(p: JointPmf, cycle: SupportCycle, wc: Optional[WitnessConfig] = None) -> Channel:
    """Binary U tilted alternately around the cycle; independent of X and of Y, dependent on (X,Y)."""
    wc = wc or WitnessConfig()
    if cycle.length < 2 or len(set(cycle.xs)) != cycle.length or len(set(cycle.ys)) != cycle.length:
        raise InvalidCycle(f"not a simple alternating cycle: ys={cycle.ys} xs={cycle.xs}")
    cells = cycle.cells()
    if any(p.p[c] <= SUPPORT_TOL for c in cells):
        raise InvalidCycle("cycle uses cells outside the support")
    eps = _epsilon([p.p[c] for c in cells], wc)
    up = np.full((p.nx, p.ny), 0.5)
    for i, c in enumerate(cells):
        up[c] += (eps if i % 2 == 0 else -eps) / p.p[c]
    return Channel(np.stack([up, 1.0 - up], axis=-1))


def _bvn_decompose(s: np.ndarray, max_terms: int) -> list[tuple[float, np.ndarray]]:
    """Doubly stochastic s as a weighted sum of permutation matrices (row -> column index)."""
    residual = s.copy()
    terms = []
    n = len(s)
    for _ in range(max_terms):
        if residual.max() <= BVN_TOL:
            break
        match = maximum_bipartite_matching(csr_matrix(residual > BVN_TOL), perm_type="column")
        if (match < 0).any():
            raise ConditionNotMet("support submatrix has no perfect matching", predicate="max_condition")
        theta = float(residual[np.arange(n), match].min())
        terms.append((theta, match.copy()))
        residual[np.arange(n), match] -= theta
        residual[residual < BVN_TOL] = 0.0
    return terms


def bvn_channel(p: JointPmf, limits: Optional[LimitsConfig] = None) -> Channel:
    """One Birkhoff-von Neumann permutation index per Gacs-Korner component, independent across
    components. Requires the maximum condition."""
    limits = limits or LimitsConfig()
    if not max_condition_check(p):
        raise ConditionNotMet("p(x) = p(y) fails on some support pair, or H(X) != H(Y)",
                              predicate="max_condition")
    _, labeling = gacs_korner(p)
    components = []
    for comp in range(labeling.count):
        xs = [i for i, c in enumerate(labeling.x_component) if c == comp]
        ys = [j for j, c in enumerate(labeling.y_component) if c == comp]
        if len(xs) != len(ys):
            raise ConditionNotMet(f"component {comp} is not square", predicate="max_condition")
        sub = p.p[np.ix_(xs, ys)]
        s = sub / sub.sum() * len(xs)
        terms = _bvn_decompose(s, max_terms=int((sub > SUPPORT_TOL).sum()) + 1)
        components.append((xs, ys, s, terms))

    sizes = [len(t) for *_, t in components]
    total = int(np.prod(sizes))
    if total > limits.bvn_u_size:
        raise SizeLimitError(f"product of permutation counts {sizes} exceeds {limits.bvn_u_size}")

    # posterior of each component's permutation index given the cell, then product across components
    q = np.ones((p.nx, p.ny) + tuple(sizes))
    for k, (xs, ys, s, terms) in enumerate(components):
        thetas = np.array([t for t, _ in terms])
        marginal = thetas / thetas.sum()
        post = np.zeros((p.nx, p.ny, len(terms)))
        post[:, :, :] = marginal
        for r, x in enumerate(xs):
            for c, y in enumerate(ys):
                if s[r, c] <= BVN_TOL:
                    continue
                hits = np.array([float(match[r] == c) * t for t, match in terms])
                post[x, y] = hits / hits.sum()
        shape = [1] * len(sizes)
        shape[k] = len(terms)
        in_comp = np.zeros((p.nx, p.ny), dtype=bool)
        in_comp[np.ix_(xs, ys)] = True
        factor = np.where(in_comp[:, :, None], post, marginal[None, None, :])
        q = q * factor.reshape((p.nx, p.ny) + tuple(shape))
    channel = Channel(q.reshape(p.nx, p.ny, total))
    logger.info("bvn witness with %d permutations per component %s", total, sizes)
    return channel


def witness_report(p: JointPmf, c: Channel) -> dict:
    """Point, structural residuals and interaction gain of a witness."""
    prof = entropy_profile(extend(p, c))
    residuals = residuals_of(p, c, ("indep_x", "indep_y", "det_x", "det_y"))
    return {
        "point": list(prof.point),
        "u_size": c.u_size,
        "residuals": residuals,
        "i_xy_given_u_minus_i_xy": prof.i_xy_given_u - prof.i_xy,
        "i_xu_given_y": prof.i_xu_given_y,
        "i_xyu": prof.i_xyu,
    }


def verify_bvn(p: JointPmf, c: Channel, tol: float = 1e-9) -> dict:
    report = witness_report(p, c)
    assert_residuals(report["residuals"], tol, what="bvn witness")
    return report


# independent sources --------------------------------------------------------------


def _l(t):
    return entr(np.asarray(t, dtype=float)) / LN2


def _int_l(u: float) -> float:
    """Integral of -t log2 t over [0, u]."""
    if u <= 0:
        return 0.0
    return u * u / (4.0 * LN2) - 0.5 * u * u * np.log2(u)


def f_integral(a: float, b: float) -> float:
    """Integral over u in [0,1] of l(|[0,b] cap ([u,u+a] mod 1)|), in bits."""
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError(f"a and b must lie in [0,1], got {a}, {b}")
    if b > a:
        a, b = b, a
    if a + b <= 1.0:
        return float((a - b) * _l(b) + 2.0 * _int_l(b))
    c = a + b - 1.0
    return float((a - b) * _l(b) + c * _l(c) + 2.0 * (_int_l(b) - _int_l(c)))


def f_integral_numeric(a: float, b: float, m: int) -> float:
    """Midpoint rule with m nodes; the overlap is computed on the circle directly."""
    u = (np.arange(m) + 0.5) / m
    ends = u + a
    overlap = np.clip(np.minimum(ends, b) - u, 0.0, None) + np.clip(np.minimum(ends - 1.0, b), 0.0, None)
    overlap = np.minimum(overlap, min(a, b))
    return float(_l(overlap).mean())


def _require_independent(p: JointPmf) -> None:
    if not is_independent(p, tol=1e-9):
        raise NotIndependent("source is not a product of its marginals")


def indep_lower_bound(p: JointPmf) -> float:
    """E[-log2 max{p(X), p(Y)}] - 1 for independent X, Y."""
    _require_independent(p)
    px, py = p.px, p.py
    outer = np.outer(px, py)
    mx = np.maximum(px[:, None], py[None, :])
    with np.errstate(divide="ignore"):
        logs = np.where(outer > 0, -np.log2(np.where(mx > 0, mx, 1.0)), 0.0)
    return float((outer * logs).sum() - 1.0)


def achieved_indep_value(p: JointPmf) -> float:
    """I(X,Y;U) for U = V + W mod 1 with X, Y read off the uniform V, W through their CDFs."""
    _require_independent(p)
    total = sum(f_integral(a, b) for a in p.px if a > 0 for b in p.py if b > 0)
    return float(entropy(p.p) - total)


# cycle diagnostics ---------------------------------------------------------------


def extract_cycle(p: JointPmf, c: Channel, tol: float = 1e-9) -> Optional[SupportCycle]:
    """Walk the deviations p(x,y|u) - p(x,y) of a witness independent of X and of Y:
    up along a row to a surplus cell, down along its column to a deficit cell, until a
    vertex repeats. None when the witness is within tol of independence from (X,Y)."""
    t = extend(p, c).p
    pu = t.sum(axis=(0, 1))
    live = np.flatnonzero(pu > SUPPORT_TOL)
    if not len(live):
        return None
    dev = t[:, :, live] / pu[live] - p.p[:, :, None]
    x, y, k = np.unravel_index(int(np.argmax(dev)), dev.shape)
    if dev[x, y, k] <= tol:
        return None
    d = dev[:, :, k]

    walk: list[tuple[str, int]] = [("y", int(y)), ("x", int(x))]
    while True:
        row = d[x].copy()
        row[y] = np.inf
        y_next = int(np.argmin(row))
        if row[y_next] >= -tol:
            logger.warning("cycle walk stalled at x=%d: no deficit cell beyond tolerance", x)
            return None
        col = d[:, y_next].copy()
        col[x] = -np.inf
        x_next = int(np.argmax(col))
        if col[x_next] <= tol:
            logger.warning("cycle walk stalled at y=%d: no surplus cell beyond tolerance", y_next)
            return None
        for node in (("y", y_next), ("x", x_next)):
            if node in walk:
                loop = walk[walk.index(node):]
                if loop[0][0] == "x":
                    loop = loop[1:] + loop[:1]
                return SupportCycle(tuple(n for _, n in loop[0::2]), tuple(n for _, n in loop[1::2]))
            walk.append(node)
        x, y = x_next, y_next
