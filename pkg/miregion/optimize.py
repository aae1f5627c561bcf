"""Local search over channels p(u|x,y) for linear objectives on the point map.

Every quantity the solver touches is an affine function of the four entropies
h = (H(U), H(X,U), H(Y,U), H(X,Y,U)); H(X), H(Y), H(X,Y) are fixed by the source.
Objectives and constraint residuals are therefore carried as weight vectors on h,
and the gradient with respect to p(x,y,u) is sum_A w_A * (-log2 m_A).
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import entr, softmax

from .errors import AlphabetTooLarge, EnumerationTooLarge, Infeasible, OracleTooLarge
from .graphs import confusability_graph, gacs_korner_channel, independent_sets
from .guards import assert_rows_are_pmfs, assert_value_reproduces
from .models import ConstraintSpec, LimitsConfig, ObjectiveSpec, OptimizerConfig
from .probability import (
    LN2,
    SUPPORT_TOL,
    Channel,
    JointPmf,
    MiPoint,
    entropy,
    entropy_profile,
    extend,
    mixture_of,
    prune_channel,
)

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-15
ARMIJO = 1e-4
MAX_HALVINGS = 40
MAX_STEP = 1e6
SEED_CHUNK = 2048
ESCALATIONS = 2
TIE = 1e-12
LOGIT_FLOOR = 1e-12
REFINE_FTOL = 1e-14
REFINE_GTOL = 1e-10
ORACLE_REPAIR_ITERATIONS = 500

# rows: v_X, v_Y, v_XY as base + V_H @ h, base = (H(X), H(Y), H(X,Y))
V_H = np.array([[1.0, -1.0, 0.0, 0.0], [1.0, 0.0, -1.0, 0.0], [1.0, 0.0, 0.0, -1.0]])

# name -> (weights on (H(X), H(Y), H(X,Y)), weights on h)
RESIDUAL_TERMS = {
    "indep_x": ((1, 0, 0), (1, -1, 0, 0)),  # I(X;U)
    "indep_y": ((0, 1, 0), (1, 0, -1, 0)),  # I(Y;U)
    "markov_xuy": ((0, 0, 0), (-1, 1, 1, -1)),  # I(X;Y|U)
    "markov_xyu": ((0, -1, 1), (0, 0, 1, -1)),  # I(X;U|Y)
    "markov_uxy": ((-1, 0, 1), (0, 1, 0, -1)),  # I(Y;U|X)
    "det_x": ((0, 0, 0), (0, 0, -1, 1)),  # H(X|Y,U)
    "det_y": ((0, 0, 0), (0, -1, 0, 1)),  # H(Y|X,U)
    "func_y": ((0, -1, 0), (0, 0, 1, 0)),  # H(U|Y)
    "func_x": ((-1, 0, 0), (0, 1, 0, 0)),  # H(U|X)
}
POLISHABLE = ("indep_x", "indep_y")


@dataclass
class SolveResult:
    value: float
    witness: Channel
    point: MiPoint
    residuals: dict[str, float] = field(default_factory=dict)
    converged: bool = False
    stats: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    # every feasible candidate seen, for face selection and region sampling
    pool: list[tuple[Channel, MiPoint]] = field(default_factory=list, repr=False)


@dataclass
class _Candidate:
    index: int
    origin: str
    channel: Channel
    point: MiPoint
    value: float
    residuals: dict[str, float]
    feasible: bool

    @property
    def residual_total(self) -> float:
        return float(sum(self.residuals.values()))


def source_entropies(p: JointPmf) -> np.ndarray:
    return np.array([entropy(p.px), entropy(p.py), entropy(p.p)])


def batch_entropies(t: np.ndarray) -> np.ndarray:
    """h for a stack of triples t with shape (N, |X|, |Y|, |U|); returns (N, 4)."""
    def H(a, axes):
        return entr(a).sum(axis=axes) / LN2

    return np.stack(
        [
            H(t.sum(axis=(1, 2)), 1),
            H(t.sum(axis=2), (1, 2)),
            H(t.sum(axis=1), (1, 2)),
            H(t, (1, 2, 3)),
        ],
        axis=1,
    )


def project_rows(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of every last-axis row onto the probability simplex."""
    k = v.shape[-1]
    u = np.sort(v, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1) - 1.0
    ind = np.arange(1, k + 1)
    cond = u - css / ind > 0
    rho = k - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1.0)
    return np.maximum(v - theta, 0.0)


def restricted_growth_strings(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Set partitions of n items into at most k labelled-by-first-use blocks."""
    a = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield tuple(a)
            return
        for label in range(min(used + 1, k)):
            a[i] = label
            yield from rec(i + 1, max(used, label + 1))

    if n == 0:
        yield ()
        return
    yield from rec(0, 0)


def count_partitions(n: int, k: int) -> int:
    """Number of restricted growth strings of length n with at most k labels."""
    # Stirling numbers of the second kind, row by row
    row = [1] + [0] * k
    for _ in range(n):
        new = [0] * (k + 1)
        for j in range(1, k + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return sum(row[1:]) if n > 0 else 1


def default_u_size(p: JointPmf, cfg: OptimizerConfig) -> int:
    bound = p.default_u_size
    if cfg.u_size is None:
        return bound
    if cfg.u_size > bound and not cfg.allow_large_u:
        raise AlphabetTooLarge(
            f"u_size={cfg.u_size} exceeds the cardinality bound {bound}; set allow_large_u to override"
        )
    return cfg.u_size


def point_of(p: JointPmf, c: Channel) -> MiPoint:
    return entropy_profile(extend(p, c)).point


def residuals_of(p: JointPmf, c: Channel, names: Sequence[str]) -> dict[str, float]:
    base = source_entropies(p)
    prof = entropy_profile(extend(p, c))
    h = np.array([prof.h_u, prof.h_xu, prof.h_yu, prof.h_xyu])
    out = {}
    for name in names:
        cw, hw = RESIDUAL_TERMS[name]
        out[name] = max(float(base @ np.array(cw) + h @ np.array(hw)), 0.0)
    return out


def _linear_rows(constraints: ConstraintSpec) -> list[tuple[np.ndarray, float, bool, str]]:
    """Each constraint as (a, bound, is_equality) meaning a.v <= bound or a.v == bound."""
    rows = []
    for i, lc in enumerate(constraints.linear):
        a = np.asarray(lc.a, dtype=float)
        if lc.relation == ">=":
            rows.append((-a, -lc.bound, False, f"linear[{i}]"))
        else:
            rows.append((a, lc.bound, lc.relation == "==", f"linear[{i}]"))
    return rows


def linear_violations(v: np.ndarray, rows) -> dict[str, float]:
    out = {}
    for a, bound, is_eq, name in rows:
        g = float(a @ v - bound)
        out[name] = abs(g) if is_eq else max(g, 0.0)
    return out


class _Problem:
    """One objective, one constraint set, one source: everything local search needs."""

    def __init__(self, p: JointPmf, objective: ObjectiveSpec, constraints: ConstraintSpec,
                 cfg: OptimizerConfig, k: int):
        self.p = p
        self.pxy = np.asarray(p.p)
        self.k = k
        self.cfg = cfg
        self.base = source_entropies(p)
        self.sign = 1.0 if objective.sense == "maximize" else -1.0
        self.b = np.asarray(objective.b, dtype=float)
        self.names = tuple(constraints.structural)
        if "markov_xyu" in self.names:
            self.param = "y"
        elif "markov_uxy" in self.names:
            self.param = "x"
        else:
            self.param = "full"
        self.exact = {"y": {"markov_xyu"}, "x": {"markov_uxy"}, "full": set()}[self.param]
        self.penalized = [n for n in self.names if n not in self.exact]
        self.polished = [n for n in self.names if n in POLISHABLE]
        self.linear = _linear_rows(constraints)
        self.const = {n: float(self.base @ np.array(RESIDUAL_TERMS[n][0])) for n in self.names}
        self.weights = {n: np.array(RESIDUAL_TERMS[n][1], dtype=float) for n in self.names}
        self.constrained = bool(self.names or self.linear)

        if self.param == "y":
            self.row_mass = p.py
        elif self.param == "x":
            self.row_mass = p.px
        else:
            self.row_mass = self.pxy.reshape(-1)

    # parameterization ------------------------------------------------------

    def expand(self, r: np.ndarray) -> np.ndarray:
        nx, ny = self.pxy.shape
        if self.param == "y":
            return np.broadcast_to(r[None, :, :], (nx, ny, r.shape[-1]))
        if self.param == "x":
            return np.broadcast_to(r[:, None, :], (nx, ny, r.shape[-1]))
        return r.reshape(nx, ny, r.shape[-1])

    def reduce(self, g: np.ndarray) -> np.ndarray:
        if self.param == "y":
            return g.sum(axis=0)
        if self.param == "x":
            return g.sum(axis=1)
        return g.reshape(-1, g.shape[-1])

    def to_param(self, q: np.ndarray) -> np.ndarray:
        """Closest parameterized channel: rows averaged over the dropped variable."""
        t = self.pxy[:, :, None] * q
        if self.param == "y":
            mass, rows = self.p.py, t.sum(axis=0)
        elif self.param == "x":
            mass, rows = self.p.px, t.sum(axis=1)
        else:
            return q.reshape(-1, q.shape[-1]).copy()
        out = np.full(rows.shape, 1.0 / q.shape[-1])
        live = mass > SUPPORT_TOL
        out[live] = rows[live] / mass[live, None]
        return out

    def row_index(self, x: int, y: int) -> int:
        if self.param == "y":
            return y
        if self.param == "x":
            return x
        return x * self.pxy.shape[1] + y

    # evaluation ------------------------------------------------------------

    def measure(self, r: np.ndarray):
        t = self.pxy[:, :, None] * self.expand(r)
        m_u = t.sum(axis=(0, 1))
        m_xu = t.sum(axis=1)
        m_yu = t.sum(axis=0)
        h = np.array([entr(m).sum() / LN2 for m in (m_u, m_xu, m_yu, t)])
        return h, (m_u, m_xu, m_yu, t)

    def point(self, h: np.ndarray) -> np.ndarray:
        return self.base + V_H @ h

    def residual(self, name: str, h: np.ndarray) -> float:
        return self.const[name] + float(self.weights[name] @ h)

    def score(self, r, mu: float, lam: np.ndarray):
        """Penalized objective to maximize and its weight vector on h."""
        h, marg = self.measure(r)
        v = self.point(h)
        f = self.sign * float(self.b @ v)
        dv = self.sign * self.b.copy()
        wh = np.zeros(4)
        for name in self.penalized:
            f -= mu * self.residual(name, h)
            wh -= mu * self.weights[name]
        for i, (a, bound, is_eq, _) in enumerate(self.linear):
            g = float(a @ v - bound)
            if is_eq:
                f -= lam[i] * g + 0.5 * mu * g * g
                dv -= (lam[i] + mu * g) * a
            else:
                shifted = max(0.0, lam[i] + mu * g)
                f -= (shifted * shifted - lam[i] * lam[i]) / (2.0 * mu)
                dv -= shifted * a
        wh += V_H.T @ dv
        return f, wh, marg

    def gradient(self, wh: np.ndarray, marg) -> np.ndarray:
        m_u, m_xu, m_yu, t = marg
        lg = [np.log2(np.maximum(m, LOG_FLOOR)) for m in marg]
        g = -(wh[0] * lg[0][None, None, :] + wh[1] * lg[1][:, None, :]
              + wh[2] * lg[2][None, :, :] + wh[3] * lg[3])
        return self.reduce(self.pxy[:, :, None] * g)

    def local_search(self, r: np.ndarray, mu: float, lam: np.ndarray) -> tuple[np.ndarray, int]:
        f, wh, marg = self.score(r, mu, lam)
        step = 1.0
        it = 0
        for it in range(1, self.cfg.max_iterations + 1):
            g = self.gradient(wh, marg)
            accepted = False
            for _ in range(MAX_HALVINGS):
                cand = project_rows(r + step * g)
                fc, whc, margc = self.score(cand, mu, lam)
                if fc >= f + ARMIJO * float(np.sum(g * (cand - r))):
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            gain = fc - f
            r, f, wh, marg = cand, fc, whc, margc
            step = min(step * 2.0, MAX_STEP)
            if gain <= self.cfg.tolerance:
                break
        return r, it

    def run(self, r: np.ndarray) -> tuple[np.ndarray, int]:
        lam = np.zeros(len(self.linear))
        if not self.constrained:
            return self.local_search(r, 0.0, lam)
        total = 0
        schedule = list(self.cfg.penalty_schedule)
        stages = schedule + [schedule[-1]] * (self.cfg.multiplier_rounds if self.linear else 0)
        for mu in stages:
            r, n = self.local_search(r, mu, lam)
            total += n
            lam = self.update_multipliers(r, mu, lam)
        mu = schedule[-1]
        for _ in range(ESCALATIONS):
            h, _ = self.measure(r)
            entropic = [self.residual(n, h) for n in self.penalized if n not in POLISHABLE]
            if not entropic or max(entropic) <= self.cfg.entropic_tolerance:
                break
            mu *= 10.0
            r, n = self.local_search(r, mu, lam)
            total += n
        if self.cfg.refine_rounds and any(n not in POLISHABLE for n in self.penalized):
            r, n = self.refine(r, mu, lam)
            total += n
        return r, total

    def refine(self, r: np.ndarray, mu: float, lam: np.ndarray) -> tuple[np.ndarray, int]:
        """L-BFGS on row logits, the penalty weight rising tenfold per round from mu."""
        shape = r.shape
        z = np.log(np.maximum(r, LOGIT_FLOOR)).reshape(-1)
        total = 0
        for _ in range(self.cfg.refine_rounds):
            def negative_score(flat: np.ndarray, mu: float = mu):
                rows = softmax(flat.reshape(shape), axis=1)
                f, wh, marg = self.score(rows, mu, lam)
                g = self.gradient(wh, marg)
                # chain rule through the row softmax; per-row constants in g cancel
                dz = rows * (g - (rows * g).sum(axis=1, keepdims=True))
                return -f, -dz.reshape(-1)

            res = minimize(negative_score, z, jac=True, method="L-BFGS-B",
                           options={"maxiter": self.cfg.max_iterations, "ftol": REFINE_FTOL,
                                    "gtol": REFINE_GTOL})
            z = res.x
            total += int(res.nit)
            mu *= 10.0
        return softmax(z.reshape(shape), axis=1), total

    def update_multipliers(self, r, mu, lam):
        if not self.linear:
            return lam
        h, _ = self.measure(r)
        v = self.point(h)
        out = lam.copy()
        for i, (a, bound, is_eq, _) in enumerate(self.linear):
            g = float(a @ v - bound)
            out[i] = lam[i] + mu * g if is_eq else max(0.0, lam[i] + mu * g)
        return out

    # feasibility restoration ----------------------------------------------

    def polish(self, r: np.ndarray) -> np.ndarray:
        """Minimum-norm move onto p(u|x)=p(u) and/or p(u|y)=p(u), then mix with uniform."""
        if not self.polished:
            return r
        nx, ny = self.pxy.shape
        rows, k = r.shape
        _, (m_u, _, _, _) = self.measure(r)
        eqs, rhs = [], []
        for i in range(rows):
            line = np.zeros(rows * k)
            line[i * k:(i + 1) * k] = 1.0
            eqs.append(line)
            rhs.append(1.0)
        if "indep_x" in self.polished:
            for x in range(nx):
                for u in range(k):
                    line = np.zeros(rows * k)
                    for y in range(ny):
                        line[self.row_index(x, y) * k + u] += self.pxy[x, y]
                    eqs.append(line)
                    rhs.append(self.p.px[x] * m_u[u])
        if "indep_y" in self.polished:
            for y in range(ny):
                for u in range(k):
                    line = np.zeros(rows * k)
                    for x in range(nx):
                        line[self.row_index(x, y) * k + u] += self.pxy[x, y]
                    eqs.append(line)
                    rhs.append(self.p.py[y] * m_u[u])
        A = np.array(eqs)
        flat = r.reshape(-1)
        delta, *_ = np.linalg.lstsq(A, np.array(rhs) - A @ flat, rcond=None)
        out = (flat + delta).reshape(rows, k)

        live = self.row_mass > SUPPORT_TOL
        out[~live] = 1.0 / k
        neg = out[live]
        if (neg < 0).any():
            worst = neg[neg < 0]
            theta = float(np.max(-worst / (1.0 / k - worst)))
            out = (1.0 - theta) * out + theta / k
        out = np.clip(out, 0.0, None)
        return out / out.sum(axis=1, keepdims=True)

    def anchors(self) -> list[tuple[str, np.ndarray]]:
        nx, ny = self.pxy.shape
        named = {
            "trivial": np.ones((nx, ny, 1)),
            "reveal_x": np.eye(nx)[:, None, :].repeat(ny, axis=1),
            "reveal_y": np.eye(ny)[None, :, :].repeat(nx, axis=0),
            "reveal_xy": np.eye(nx * ny).reshape(nx, ny, nx * ny),
        }
        return [(n, np.ascontiguousarray(self.expand(self.to_param(q)))) for n, q in named.items()]

    def repair_linear(self, q: np.ndarray) -> Optional[np.ndarray]:
        """Mix with a structurally admissible anchor by the smallest weight restoring a.v <= bound."""
        c = Channel(q)
        v = point_of(self.p, c).as_array()
        if max(linear_violations(v, self.linear).values(), default=0.0) <= self.cfg.constraint_tolerance:
            return q
        best = None
        for name, qa in self.anchors():
            ca = Channel(qa)
            res = residuals_of(self.p, ca, self.penalized)
            if any(res[n] > self.tolerance_for(n) for n in self.penalized):
                continue
            va = point_of(self.p, ca).as_array()
            lo, hi = 0.0, 1.0
            for a, bound, is_eq, _ in self.linear:
                g0, g1 = float(a @ v - bound), float(a @ va - bound)
                if is_eq:
                    if abs(g0 - g1) < 1e-15:
                        if abs(g0) > self.cfg.constraint_tolerance:
                            lo, hi = 1.0, 0.0
                        continue
                    lam = g0 / (g0 - g1)
                    lo, hi = max(lo, lam), min(hi, lam)
                elif g0 > 0 and g1 >= g0:
                    lo, hi = 1.0, 0.0
                elif g0 > 0:
                    lo = max(lo, g0 / (g0 - g1))
                elif g1 > 0:
                    hi = min(hi, g0 / (g0 - g1))
            if lo > hi + 1e-12:
                continue
            mixed = mixture_of([c, ca], [1.0 - lo, lo])
            value = self.sign * float(self.b @ ((1.0 - lo) * v + lo * va))
            if best is None or value > best[0] + TIE:
                best = (value, mixed.q, name, lo)
        if best is None:
            return None
        logger.debug("linear repair: mixed with %s at weight %.3e", best[2], best[3])
        return np.array(best[1])

    def tolerance_for(self, name: str) -> float:
        if name in POLISHABLE or name in self.exact:
            return self.cfg.constraint_tolerance
        return self.cfg.entropic_tolerance

    def finalize(self, index: int, origin: str, r: np.ndarray) -> Optional[_Candidate]:
        r = self.polish(r)
        q = np.ascontiguousarray(self.expand(r))
        if self.linear:
            q = self.repair_linear(q)
            if q is None:
                return None
        channel = prune_channel(self.p, Channel(q))
        return self.candidate(index, origin, channel)

    def candidate(self, index: int, origin: str, channel: Channel) -> _Candidate:
        point = point_of(self.p, channel)
        residuals = residuals_of(self.p, channel, self.names)
        residuals.update(linear_violations(point.as_array(), self.linear))
        feasible = all(
            residuals[n] <= self.tolerance_for(n) for n in self.names
        ) and all(residuals[row[3]] <= self.cfg.constraint_tolerance for row in self.linear)
        value = point.dot(self.b)
        return _Candidate(index, origin, channel, point, value, residuals, feasible)


# seeds ------------------------------------------------------------------------


def _pad(r: np.ndarray, k: int) -> Optional[np.ndarray]:
    if r.shape[-1] > k:
        return None
    return np.concatenate([r, np.zeros(r.shape[:-1] + (k - r.shape[-1],))], axis=-1)


def _structural_seeds(problem: _Problem) -> list[tuple[str, np.ndarray]]:
    seeds = problem.anchors()
    seeds.append(("gacs_korner", np.array(gacs_korner_channel(problem.p).q)))
    return seeds


def _one_hot_rows(problem: _Problem, labels: np.ndarray) -> np.ndarray:
    live = np.flatnonzero(problem.row_mass > SUPPORT_TOL)
    full = np.zeros((len(labels), len(problem.row_mass)), dtype=int)
    full[:, live] = labels
    r = np.zeros(full.shape + (problem.k,))
    np.put_along_axis(r, full[:, :, None], 1.0, axis=2)
    return r


def _score_rows(problem: _Problem, r: np.ndarray) -> np.ndarray:
    nx, ny = problem.pxy.shape
    n, k = len(r), problem.k
    if problem.param == "y":
        q = np.broadcast_to(r[:, None, :, :], (n, nx, ny, k))
    elif problem.param == "x":
        q = np.broadcast_to(r[:, :, None, :], (n, nx, ny, k))
    else:
        q = r.reshape(n, nx, ny, k)
    h = batch_entropies(problem.pxy[None, :, :, None] * q)
    v = problem.base[None, :] + h @ V_H.T
    mu = problem.cfg.penalty_schedule[-1] if problem.constrained else 0.0
    score = problem.sign * (v @ problem.b)
    for name in problem.penalized:
        score -= mu * (problem.const[name] + h @ problem.weights[name])
    for a, bound, is_eq, _ in problem.linear:
        g = v @ a - bound
        score -= mu * (g * g if is_eq else np.maximum(g, 0.0) ** 2)
    return score


def _deterministic_seeds(problem: _Problem, count: int, cap: int) -> list[tuple[str, np.ndarray]]:
    """Best `count` deterministic maps on the parameter rows, scored at the last penalty stage."""
    if count == 0:
        return []
    n_live = int((problem.row_mass > SUPPORT_TOL).sum())
    labelings = itertools.islice(restricted_growth_strings(n_live, problem.k), cap)
    kept: list[tuple[float, int, np.ndarray]] = []
    offset = 0
    while True:
        block = list(itertools.islice(labelings, SEED_CHUNK))
        if not block:
            break
        r = _one_hot_rows(problem, np.array(block, dtype=int).reshape(len(block), n_live))
        score = _score_rows(problem, r)
        for j in np.argsort(-score, kind="stable")[:count]:
            kept.append((float(score[j]), offset + int(j), r[j]))
        kept = sorted(kept, key=lambda item: (-item[0], item[1]))[:count]
        offset += len(block)
    return [(f"deterministic[{i}]", r) for _, i, r in kept]


def independent_set_seed(p: JointPmf, max_vertices: int = 20) -> Optional[Channel]:
    """Each x spread uniformly over the maximal independent sets containing it."""
    if p.nx > max_vertices:
        return None
    sets = independent_sets(confusability_graph(p), max_vertices)
    member = np.array([[x in s for s in sets] for x in range(p.nx)], dtype=float)
    rows = member / member.sum(axis=1, keepdims=True)
    return Channel(np.repeat(rows[:, None, :], p.ny, axis=1))


# main entry points ------------------------------------------------------------


def _select(candidates: list[_Candidate], sign: float) -> _Candidate:
    best_value = max(sign * c.value for c in candidates)
    tied = [c for c in candidates if sign * c.value >= best_value - TIE]
    return min(tied, key=lambda c: (c.residual_total, c.channel.u_size, c.index))


def _solve_functional(p: JointPmf, objective: ObjectiveSpec, constraints: ConstraintSpec,
                      cfg: OptimizerConfig, k: int, limits: LimitsConfig) -> SolveResult:
    """H(U|Y)=0 or H(U|X)=0: U is a labelling of one alphabet, so search exhaustively."""
    problem = _Problem(p, objective, constraints, cfg, k)
    on_y = "func_y" in constraints.structural
    n = p.ny if on_y else p.nx
    total = count_partitions(n, k)
    if total > limits.enumeration:
        raise EnumerationTooLarge(f"{total} labellings exceed the enumeration cap {limits.enumeration}")
    candidates = []
    for i, labels in enumerate(restricted_growth_strings(n, k)):
        lab = np.asarray(labels)
        grid = np.broadcast_to(lab[None, :], (p.nx, p.ny)) if on_y else np.broadcast_to(lab[:, None], (p.nx, p.ny))
        q = np.zeros((p.nx, p.ny, int(lab.max()) + 1))
        np.put_along_axis(q, grid[:, :, None], 1.0, axis=2)
        cand = problem.candidate(i, f"labelling[{i}]", Channel(q))
        if cand.feasible:
            candidates.append(cand)
    if not candidates:
        raise Infeasible("no labelling satisfies the constraint set")
    best = _select(candidates, problem.sign)
    return SolveResult(
        value=best.value,
        witness=best.channel,
        point=best.point,
        residuals=best.residuals,
        converged=True,
        stats={"starts": total, "feasible": len(candidates), "best_start": best.origin},
        metadata={"method": "enumeration", "u_size": k},
        pool=[(c.channel, c.point) for c in candidates],
    )


def solve_constrained(p: JointPmf, objective: ObjectiveSpec, constraints: ConstraintSpec,
                      cfg: OptimizerConfig, seeds: Sequence[Channel] = (),
                      limits: Optional[LimitsConfig] = None) -> SolveResult:
    """Best feasible value of b.v over channels found by multi-start projected gradient.

    Raises Infeasible when no start ends within the constraint tolerances.
    """
    limits = limits or LimitsConfig()
    k = default_u_size(p, cfg)
    if {"func_y", "func_x"} & set(constraints.structural):
        return _solve_functional(p, objective, constraints, cfg, k, limits)

    problem = _Problem(p, objective, constraints, cfg, k)
    rng = np.random.default_rng(cfg.seed)
    n_rows = len(problem.row_mass)
    randoms = rng.dirichlet(np.ones(k), size=(cfg.restarts, n_rows))

    as_is: list[tuple[str, np.ndarray]] = []
    for name, q in _structural_seeds(problem):
        if q.shape[-1] <= k:
            as_is.append((name, problem.to_param(q)))
    for i, c in enumerate(seeds):
        c.check_source(p)
        as_is.append((f"seed[{i}]", problem.to_param(np.array(c.q))))
    if "det_x" in problem.names:
        mis = independent_set_seed(p, limits.graph_vertices)
        if mis is not None:
            as_is.append(("independent_sets", problem.to_param(np.array(mis.q))))

    starts: list[tuple[str, np.ndarray]] = []
    for name, r in as_is:
        padded = _pad(r, k)
        if padded is not None:
            starts.append((name, padded))
    starts += _deterministic_seeds(problem, cfg.deterministic_seeds, cfg.seed_enumeration_cap)
    starts += [(f"random[{i}]", randoms[i]) for i in range(cfg.restarts)]

    def run_start(item):
        index, (origin, r0) = item
        r, iterations = problem.run(r0)
        assert_rows_are_pmfs(r)
        logger.debug("start %s finished after %d iterations", origin, iterations)
        return problem.finalize(index, origin, r), iterations

    indexed = list(enumerate(starts))
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(run_start, indexed))
    else:
        outcomes = [run_start(item) for item in indexed]

    candidates = [problem.finalize(len(starts) + i, f"{name}(as-is)", r) for i, (name, r) in enumerate(as_is)]
    candidates += [c for c, _ in outcomes]
    candidates = [c for c in candidates if c is not None]
    feasible = [c for c in candidates if c.feasible]
    if not feasible:
        worst = min(candidates, key=lambda c: c.residual_total) if candidates else None
        raise Infeasible(
            "no channel met the constraint tolerances"
            + (f"; closest residuals {worst.residuals}" if worst else "")
        )

    best = _select(feasible, problem.sign)
    agreeing = sum(1 for c in feasible if problem.sign * (best.value - c.value) <= cfg.stable_tolerance)
    assert_value_reproduces(best.value, point_of(p, best.channel).dot(problem.b))
    metadata = {"method": "optimizer", "u_size": k, "parameterization": problem.param}
    if constraints.structural and cfg.u_size is None:
        metadata["u_size_caveat"] = (
            "cardinality bound |X||Y|+2 is proved for the unconstrained region only"
        )
    converged = agreeing >= 2
    if not converged:
        logger.warning("best value %.9f reached by a single start; treat as a loose bound", best.value)
    logger.info("solve b=%s sense=%s -> %.9f from %s", tuple(problem.b), objective.sense, best.value, best.origin)
    return SolveResult(
        value=best.value,
        witness=best.channel,
        point=best.point,
        residuals=best.residuals,
        converged=converged,
        stats={
            "starts": len(candidates),
            "feasible": len(feasible),
            "agreeing": agreeing,
            "best_start": best.origin,
            "iterations": int(sum(n for _, n in outcomes)),
        },
        metadata=metadata,
        pool=[(c.channel, c.point) for c in feasible],
    )


def support_function(p: JointPmf, b, cfg: OptimizerConfig, seeds: Sequence[Channel] = (),
                     limits: Optional[LimitsConfig] = None) -> SolveResult:
    """Lower bound on sup{b.v : v in the region} with a witness channel."""
    return solve_constrained(p, ObjectiveSpec(b=tuple(b)), ConstraintSpec(), cfg, seeds, limits)


SENSITIVITY_TOLERANCES = (1e-4, 1e-3)


def directional_derivative(p: JointPmf, b, c, cfg: OptimizerConfig, seeds: Sequence[Channel] = (),
                           limits: Optional[LimitsConfig] = None) -> SolveResult:
    """max{d.c : d in argmax b.v}, from the pooled candidates of the b solve and of
    the W*b + c solves for W in the penalty schedule.
    """
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    first = support_function(p, b, cfg, seeds, limits)
    pool = list(first.pool)
    carry = [first.witness, *seeds]
    for weight in cfg.penalty_schedule:
        combined = weight * b + c
        if not np.any(combined):
            continue
        stage = support_function(p, combined, cfg, carry, limits)
        pool += stage.pool
        carry = [stage.witness, *carry]

    psi = max(v.dot(b) for _, v in pool)

    def face_value(tol: float):
        face = [(ch, v) for ch, v in pool if v.dot(b) >= psi - tol]
        return max(face, key=lambda item: item[1].dot(c)), len(face)

    (witness, point), face_size = face_value(cfg.argmax_tolerance)
    sensitivity = {f"{cfg.argmax_tolerance:g}": point.dot(c)}
    for tol in SENSITIVITY_TOLERANCES:
        (_, v_tol), _ = face_value(tol)
        sensitivity[f"{tol:g}"] = v_tol.dot(c)
    return SolveResult(
        value=point.dot(c),
        witness=witness,
        point=point,
        residuals={},
        converged=first.converged,
        stats={"pool": len(pool), "face_size": face_size},
        metadata={
            "method": "optimizer",
            "psi_b": psi,
            "argmax_tolerance": cfg.argmax_tolerance,
            "sensitivity": sensitivity,
        },
        pool=pool,
    )


def enumerate_deterministic(p: JointPmf, u_size: int,
                            limits: Optional[LimitsConfig] = None) -> list[tuple[Channel, MiPoint]]:
    """Every deterministic map (x,y) -> u on the support, up to relabelling of U."""
    limits = limits or LimitsConfig()
    cells = np.argwhere(p.support)
    if float(u_size) ** len(cells) > limits.enumeration:
        raise EnumerationTooLarge(
            f"{u_size}^{len(cells)} maps exceed the enumeration cap {limits.enumeration}"
        )
    out = []
    for labels in restricted_growth_strings(len(cells), u_size):
        grid = np.zeros((p.nx, p.ny), dtype=int)
        grid[cells[:, 0], cells[:, 1]] = labels
        q = np.zeros((p.nx, p.ny, u_size))
        np.put_along_axis(q, grid[:, :, None], 1.0, axis=2)
        channel = Channel(q)
        out.append((channel, point_of(p, channel)))
    return out


def grid_oracle(p: JointPmf, objective: ObjectiveSpec, constraints: ConstraintSpec,
                u_size: int = 2, step: float = 0.01, limits: Optional[LimitsConfig] = None,
                chunk: int = 200_000) -> SolveResult:
    """Exhaustive scan of q(u=0|x,y) on a grid over the support cells, |U| <= 2.

    The best `oracle_candidates` grid points within `oracle_candidate_tolerance` are moved
    onto the constraints by minimizing their residuals alone; the objective plays no part
    in that move. Only points within `oracle_tolerance` are reported.
    """
    limits = limits or LimitsConfig()
    cells = np.argwhere(p.support)
    n = len(cells)
    if u_size not in (1, 2):
        raise OracleTooLarge(f"grid oracle supports u_size <= 2, got {u_size}")
    if n > limits.oracle_cells:
        raise OracleTooLarge(f"{n} support cells exceed the oracle cap of {limits.oracle_cells}")
    if step < limits.oracle_min_step:
        raise OracleTooLarge(f"step {step} is below the minimum {limits.oracle_min_step}")

    sign = 1.0 if objective.sense == "maximize" else -1.0
    b = np.asarray(objective.b, dtype=float)
    names = tuple(constraints.structural)
    rows = _linear_rows(constraints)
    base = source_entropies(p)
    pc = p.p[cells[:, 0], cells[:, 1]]
    structural_weights = [(np.array(RESIDUAL_TERMS[nm][0], dtype=float), np.array(RESIDUAL_TERMS[nm][1], dtype=float))
                          for nm in names]

    m = int(round(1.0 / step))
    grid = np.linspace(0.0, 1.0, m + 1) if u_size == 2 else np.ones(1)
    first = grid[grid <= 0.5 + 1e-12] if u_size == 2 else grid
    shape = (len(first),) + (len(grid),) * (n - 1)
    total = int(np.prod(shape))

    def terms(qs: np.ndarray):
        """Points, structural residuals and signed linear slacks of a stack of grid channels."""
        t = np.zeros((len(qs), p.nx, p.ny, 2))
        t[:, cells[:, 0], cells[:, 1], 0] = pc * qs
        t[:, cells[:, 0], cells[:, 1], 1] = pc * (1.0 - qs)
        h = batch_entropies(t)
        v = base[None, :] + h @ V_H.T
        structural = np.zeros((len(qs), len(names)))
        for j, (cw, hw) in enumerate(structural_weights):
            structural[:, j] = base @ cw + h @ hw
        slack = np.zeros((len(qs), len(rows)))
        for j, (a, bound, _, _) in enumerate(rows):
            slack[:, j] = v @ a - bound
        return v, structural, slack

    def worst_of(structural: np.ndarray, slack: np.ndarray) -> np.ndarray:
        worst = np.zeros(len(structural))
        if names:
            worst = np.maximum(worst, structural.max(axis=1))
        for j, (_, _, is_eq, _) in enumerate(rows):
            worst = np.maximum(worst, np.abs(slack[:, j]) if is_eq else slack[:, j])
        return worst

    def infeasibility(q: np.ndarray) -> float:
        _, structural, slack = terms(np.clip(q, 0.0, 1.0)[None, :])
        value = float(np.maximum(structural[0], 0.0).sum())
        for j, (_, _, is_eq, _) in enumerate(rows):
            g = slack[0, j] if is_eq else max(slack[0, j], 0.0)
            value += g * g
        return value

    exact_count, candidate_count = 0, 0
    kept_q, kept_val = np.zeros((0, n)), np.zeros(0)
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(start + chunk, total)), shape)
        qs = np.stack([first[idx[0]]] + [grid[i] for i in idx[1:]], axis=1)
        v, structural, slack = terms(qs)
        worst = worst_of(structural, slack)
        exact_count += int((worst <= limits.oracle_tolerance).sum())
        loose = worst <= limits.oracle_candidate_tolerance
        candidate_count += int(loose.sum())
        if not loose.any():
            continue
        kept_q = np.vstack([kept_q, qs[loose]])
        kept_val = np.concatenate([kept_val, sign * (v[loose] @ b)])
        if len(kept_val) > limits.oracle_candidates:
            top = np.argpartition(-kept_val, limits.oracle_candidates - 1)[: limits.oracle_candidates]
            kept_q, kept_val = kept_q[top], kept_val[top]
    if not len(kept_q):
        raise Infeasible("no grid point meets the oracle candidate tolerance")

    best_val, best_q, repaired = -np.inf, None, 0
    for q0 in kept_q[np.argsort(-kept_val, kind="stable")]:
        res = minimize(infeasibility, q0, method="L-BFGS-B", bounds=[(0.0, 1.0)] * n,
                       options={"maxiter": ORACLE_REPAIR_ITERATIONS, "ftol": 1e-16, "gtol": 1e-14})
        q = np.clip(res.x, 0.0, 1.0)
        v, structural, slack = terms(q[None, :])
        if worst_of(structural, slack)[0] > limits.oracle_tolerance:
            continue
        repaired += 1
        value = sign * float(v[0] @ b)
        if value > best_val + TIE:
            best_val, best_q = value, q.copy()
    if best_q is None:
        raise Infeasible(
            f"none of {len(kept_q)} grid candidates could be moved within {limits.oracle_tolerance:g} "
            "of the constraints"
        )
    logger.info("grid oracle: %d candidates, %d repaired, best %.9f", len(kept_q), repaired, sign * best_val)

    def objective_at(qs: np.ndarray) -> float:
        v, _, _ = terms(qs[None, :])
        return sign * float(v[0] @ b)

    derivs = []
    hstep = 1e-6
    for i in range(n):
        lo, hi = best_q.copy(), best_q.copy()
        lo[i] = max(0.0, lo[i] - hstep)
        hi[i] = min(1.0, hi[i] + hstep)
        derivs.append((objective_at(hi) - objective_at(lo)) / (hi[i] - lo[i]))
    slack_bound = step * float(np.sum(np.abs(derivs)))

    q = np.zeros((p.nx, p.ny, 2))
    q[:, :, 0] = 1.0
    q[cells[:, 0], cells[:, 1], 0] = best_q
    q[cells[:, 0], cells[:, 1], 1] = 1.0 - best_q
    witness = Channel(q)
    point = point_of(p, witness)
    residuals = residuals_of(p, witness, names)
    residuals.update(linear_violations(point.as_array(), rows))
    return SolveResult(
        value=point.dot(b),
        witness=witness,
        point=point,
        residuals=residuals,
        converged=True,
        stats={
            "grid_points": total,
            "feasible": exact_count,
            "candidates": candidate_count,
            "repaired": repaired,
            "step": step,
        },
        metadata={"method": "oracle", "lipschitz_slack": slack_bound, "u_size": u_size},
    )
