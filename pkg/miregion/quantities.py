"""Named information quantities as configured solves, exact graph methods and constructions."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import linprog

from .errors import AlphabetTooLarge, DegenerateRatio, Infeasible, InfeasibleT
from .graphs import (
    confusability_graph,
    find_cycle,
    gacs_korner,
    gacs_korner_channel,
    has_path_length_3,
    independent_sets,
    max_condition_check,
)
from .models import Config, ConstraintSpec, CurveRequest, LinearConstraint, ObjectiveSpec, OptimizerConfig
from .optimize import (
    SolveResult,
    count_partitions,
    directional_derivative,
    point_of,
    restricted_growth_strings,
    solve_constrained,
    support_function,
)
from .probability import (
    SUPPORT_TOL,
    Channel,
    JointPmf,
    conditional_entropy,
    deterministic_channel,
    entropy,
    entropy_profile,
    extend,
    mutual_information,
    reveal_x,
    reveal_y,
    trivial_channel,
)
from .region import frl_channel
from .witnesses import bvn_channel, cycle_witness_channel, path_witness_channel

logger = logging.getLogger(__name__)

RATIO_FLOOR = 1e-6
DINKELBACH_ITERATIONS = 20
DINKELBACH_TOL = 1e-8
KORNER_TOL = 1e-8
KORNER_ITERATIONS = 50_000
SYNTHESIS_WEIGHTS = 9

# name -> (b, c or None, sign): value = sign * psi'(b; c), or sign * psi(b) when c is None
SUPPORT_FORMS = {
    "wyner_ci": ((1, 1, -1), (0, 0, -1), -1.0),
    "gacs_korner_ci": ((1, 1, -2), (0, 0, 1), 1.0),
    "necessary_cond_entropy": ((1, 2, -2), (1, 0, -1), -1.0),
    "korner_graph_entropy": ((1, -1, 0), (-1, 0, 0), -1.0),
    "excess_functional_info": ((-2, 0, 1), (0, 1, -1), -1.0),
    "g_rstar": ((-1, 1, -1), (0, 1, 0), 1.0),
    "g_nni": ((-1, -1, 1), None, 1.0),
    "g_pni": ((-1, 0, 0), (0, -1, 1), 1.0),
    "g_ppi": ((-1, -1, 0), (0, 0, 1), 1.0),
}


@dataclass
class QuantityResult:
    name: str
    value: float
    method: str  # exact-graph | independent-set | optimizer | oracle | construction | partition-search
    witness: Optional[Channel] = None
    residuals: dict[str, float] = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)
    support_form: Optional[str] = None
    form_value: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    @property
    def form_gap(self) -> Optional[float]:
        if self.form_value is None:
            return None
        return abs(self.value - self.form_value)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "value_bits": self.value,
            "method": self.method,
            "witness": None if self.witness is None else np.asarray(self.witness.q).tolist(),
            "residuals": self.residuals,
            "table1_form": self.support_form,
        }
        if self.certificate:
            out["certificate"] = self.certificate
        if self.form_value is not None:
            out["form_value"] = self.form_value
            out["form_gap"] = self.form_gap
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def _form(name: str) -> Optional[str]:
    if name not in SUPPORT_FORMS:
        return None
    b, c, sign = SUPPORT_FORMS[name]
    prefix = "-" if sign < 0 else ""
    if c is None:
        return f"{prefix}psi{tuple(b)}"
    return f"{prefix}psi'({', '.join(map(str, b))}; {', '.join(map(str, c))})"


def form_value(p: JointPmf, name: str, cfg: Optional[Config] = None,
               seeds: Sequence[Channel] = ()) -> tuple[float, SolveResult]:
    """The support-function form of a named quantity."""
    cfg = cfg or Config()
    b, c, sign = SUPPORT_FORMS[name]
    if c is None:
        res = support_function(p, b, cfg.optimizer, seeds, cfg.limits)
    else:
        res = directional_derivative(p, b, c, cfg.optimizer, seeds, cfg.limits)
    return sign * res.value, res


def _result(name: str, res: SolveResult, value: Optional[float] = None, **extra) -> QuantityResult:
    return QuantityResult(
        name=name,
        value=res.value if value is None else value,
        method=extra.pop("method", res.metadata.get("method", "optimizer")),
        witness=res.witness,
        residuals=dict(res.residuals),
        support_form=_form(name),
        metadata={"converged": res.converged, **res.metadata, **extra},
    )


def _attach_support_form(q: QuantityResult, p: JointPmf, cfg: Config, seeds: Sequence[Channel] = ()) -> QuantityResult:
    value, _ = form_value(p, q.name, cfg, seeds)
    q.form_value = value
    if q.form_gap is not None and q.form_gap > 1e-3:
        logger.warning("%s: optimizer %.6f and support form %.6f differ by %.2e",
                       q.name, q.value, value, q.form_gap)
    return q


def _solve(p: JointPmf, b, sense: str, structural: Sequence[str], cfg: Config,
           linear: Sequence[LinearConstraint] = (), seeds: Sequence[Channel] = (),
           opt: Optional[OptimizerConfig] = None) -> SolveResult:
    return solve_constrained(
        p,
        ObjectiveSpec(b=tuple(float(x) for x in b), sense=sense),
        ConstraintSpec(linear=tuple(linear), structural=tuple(structural)),
        opt or cfg.optimizer,
        seeds,
        cfg.limits,
    )


# common information ---------------------------------------------------------------


def wyner_ci(p: JointPmf, cfg: Optional[Config] = None, seeds: Sequence[Channel] = (),
             with_support_form: bool = False) -> QuantityResult:
    """min I(X,Y;U) over X - U - Y."""
    cfg = cfg or Config()
    res = _solve(p, (0, 0, 1), "minimize", ("markov_xuy",), cfg,
                 seeds=[reveal_x(p), reveal_y(p), *seeds])
    q = _result("wyner_ci", res)
    return _attach_support_form(q, p, cfg, [res.witness]) if with_support_form else q


def gacs_korner_ci(p: JointPmf, cfg: Optional[Config] = None, with_support_form: bool = False) -> QuantityResult:
    cfg = cfg or Config()
    bits, labeling = gacs_korner(p)
    witness = gacs_korner_channel(p)
    q = QuantityResult(
        name="gacs_korner_ci",
        value=bits,
        method="exact-graph",
        witness=witness,
        certificate={"component_masses": list(labeling.masses)},
        support_form=_form("gacs_korner_ci"),
    )
    return _attach_support_form(q, p, cfg, [witness]) if with_support_form else q


# graph entropy ---------------------------------------------------------------------


def _korner_weights(px: np.ndarray, member: np.ndarray) -> tuple[np.ndarray, float, int]:
    """Minimize -sum p_x log2 a_x over a in the hull of independent-set indicators.

    Multiplicative updates on the set weights, stopped by the duality gap log2 max_S g_S.
    """
    lam = np.full(member.shape[1], 1.0 / member.shape[1])
    live = px > 0
    gap = np.inf
    for it in range(1, KORNER_ITERATIONS + 1):
        a = member @ lam
        g = (px[live] / a[live]) @ member[live]
        gap = float(np.log2(g.max()))
        if gap <= KORNER_TOL:
            return lam, gap, it
        lam = lam * g
        lam /= lam.sum()
    logger.warning("graph entropy stopped at gap %.2e after %d iterations", gap, KORNER_ITERATIONS)
    return lam, gap, KORNER_ITERATIONS


def korner_graph_entropy(p: JointPmf, cfg: Optional[Config] = None, cross_check: bool = False,
                         with_support_form: bool = False) -> QuantityResult:
    """min I(X;W) over W an independent set of the confusability graph containing X."""
    cfg = cfg or Config()
    sets = independent_sets(confusability_graph(p), cfg.limits.graph_vertices)
    member = np.array([[x in s for s in sets] for x in range(p.nx)], dtype=float)
    px = np.asarray(p.px)
    lam, gap, iterations = _korner_weights(px, member)
    a = member @ lam
    live = px > 0
    value = float(-(px[live] * np.log2(a[live])).sum())

    post = np.where(member > 0, lam[None, :] / np.where(a > 0, a, 1.0)[:, None], 0.0)
    post[~live] = member[~live] / member[~live].sum(axis=1, keepdims=True)
    keep = lam > SUPPORT_TOL
    rows = post[:, keep]
    mass = rows.sum(axis=1, keepdims=True)
    rows = np.where(mass > 0, rows / np.where(mass > 0, mass, 1.0), 1.0 / rows.shape[1])
    witness = Channel(np.repeat(rows[:, None, :], p.ny, axis=1))
    achieved = entropy_profile(extend(p, witness)).i_xu

    q = QuantityResult(
        name="korner_graph_entropy",
        value=value,
        method="independent-set",
        witness=witness,
        certificate={
            "independent_sets": [list(s) for s, k in zip(sets, keep) if k],
            "weights": [float(w) for w in lam[keep]],
            "duality_gap": gap,
        },
        support_form=_form("korner_graph_entropy"),
        metadata={"iterations": iterations, "witness_value": achieved},
    )
    if cross_check:
        res = _solve(p, (1, 0, 0), "minimize", ("markov_uxy", "det_x"), cfg, seeds=[witness])
        q.metadata["channel_solve"] = res.value
    return _attach_support_form(q, p, cfg, [witness]) if with_support_form else q


def necessary_cond_entropy(p: JointPmf, cfg: Optional[Config] = None,
                           with_support_form: bool = False) -> QuantityResult:
    """min H(U|X) over functions U of Y with X - U - Y, by searching partitions of the Y alphabet."""
    cfg = cfg or Config()
    if p.ny > cfg.limits.partition_alphabet:
        raise AlphabetTooLarge(f"|Y|={p.ny} exceeds the partition cap {cfg.limits.partition_alphabet}")
    live = np.flatnonzero(p.py > SUPPORT_TOL)
    cond = p.p[:, live] / p.py[live]

    if count_partitions(len(live), len(live)) <= cfg.limits.enumeration // 100:
        method = "partition-search"
        candidates = restricted_growth_strings(len(live), len(live))
    else:
        # a partition keeps X - U - Y iff each block shares one p(x|y); the coarsest such wins
        method = "exact-graph"
        classes: list[np.ndarray] = []
        labels = []
        for j in range(len(live)):
            hit = next((i for i, c in enumerate(classes) if np.allclose(c, cond[:, j], atol=1e-12)), None)
            if hit is None:
                classes.append(cond[:, j])
                hit = len(classes) - 1
            labels.append(hit)
        candidates = [tuple(labels)]

    best_value, best_labels, checked = np.inf, None, 0
    for labels in candidates:
        lab = np.asarray(labels)
        checked += 1
        if any(not np.allclose(cond[:, lab == k], cond[:, lab == k][:, :1], atol=1e-12)
               for k in range(lab.max() + 1)):
            continue
        full = np.zeros(p.ny, dtype=int)
        full[live] = lab
        c = deterministic_channel(np.broadcast_to(full[None, :], (p.nx, p.ny)))
        h = entropy_profile(extend(p, c)).h_u_given_x
        if h < best_value - 1e-15:
            best_value, best_labels = h, full
    witness = deterministic_channel(np.broadcast_to(best_labels[None, :], (p.nx, p.ny)))
    q = QuantityResult(
        name="necessary_cond_entropy",
        value=float(max(best_value, 0.0)),
        method=method,
        witness=witness,
        certificate={"y_blocks": [p.y_alphabet[j] + f"->{int(best_labels[j])}" for j in range(p.ny)]},
        support_form=_form("necessary_cond_entropy"),
        metadata={"partitions_checked": checked},
    )
    return _attach_support_form(q, p, cfg, [witness]) if with_support_form else q


# privacy and functional information ------------------------------------------------


def g_rstar(p: JointPmf, cfg: Optional[Config] = None, seeds: Sequence[Channel] = (),
            with_support_form: bool = False) -> QuantityResult:
    """max I(Y;U) over X - Y - U with U independent of X."""
    cfg = cfg or Config()
    res = _solve(p, (0, 1, 0), "maximize", ("markov_xyu", "indep_x"), cfg, seeds=[trivial_channel(p), *seeds])
    q = _result("g_rstar", res)
    return _attach_support_form(q, p, cfg, [res.witness]) if with_support_form else q


def excess_functional_info(p: JointPmf, cfg: Optional[Config] = None, seeds: Sequence[Channel] = (),
                           with_support_form: bool = False) -> QuantityResult:
    """H(Y|X) - max{I(Y;U) : U independent of X}; the functional representation channel seeds it."""
    cfg = cfg or Config()
    frl = frl_channel(p, "x->y")
    res = _solve(p, (0, 1, 0), "maximize", ("indep_x",), cfg, seeds=[frl, trivial_channel(p), *seeds])
    value = conditional_entropy(p, "x") - res.value
    frl_prof = entropy_profile(extend(p, frl))
    q = _result(
        "excess_functional_info", res, value=max(value, 0.0),
        frl_upper_bound=max(conditional_entropy(p, "x") - frl_prof.i_yu, 0.0),
        sfrl_bound=float(np.log2(mutual_information(p) + 1.0) + 4.0),
    )
    return _attach_support_form(q, p, cfg, [res.witness, frl]) if with_support_form else q


def _dinkelbach(p: JointPmf, cfg: Config, sense: str) -> tuple[float, Channel, dict]:
    """sup (sense=maximize) or inf of I(X;U)/I(Y;U) over X - Y - U, I(Y;U) >= RATIO_FLOOR."""
    if entropy(p.py) < RATIO_FLOOR:
        raise DegenerateRatio("Y is deterministic; every channel has I(Y;U) = 0")
    sign = 1.0 if sense == "maximize" else -1.0
    best_c = reveal_y(p)
    pt = entropy_profile(extend(p, best_c)).point
    ratio = pt.v_x / pt.v_y
    excluded = 0
    history = [ratio]
    carry = [best_c]
    for _ in range(DINKELBACH_ITERATIONS):
        res = _solve(p, (sign, -sign * ratio, 0.0), "maximize", ("markov_xyu",), cfg, seeds=carry)
        improved = False
        for ch, v in res.pool:
            if v.v_y < RATIO_FLOOR:
                excluded += 1
                continue
            r = v.v_x / v.v_y
            if sign * (r - ratio) > DINKELBACH_TOL:
                ratio, best_c, improved = r, ch, True
        history.append(ratio)
        carry = [best_c, res.witness]
        if res.value <= DINKELBACH_TOL or not improved:
            break
    return ratio, best_c, {"iterations": len(history) - 1, "history": history, "excluded_small_v_y": excluded}


def s_star(p: JointPmf, cfg: Optional[Config] = None) -> QuantityResult:
    cfg = cfg or Config()
    value, witness, meta = _dinkelbach(p, cfg, "maximize")
    return QuantityResult("s_star", value, "optimizer", witness=witness, metadata=meta)


def v_star(p: JointPmf, cfg: Optional[Config] = None) -> QuantityResult:
    cfg = cfg or Config()
    value, witness, meta = _dinkelbach(p, cfg, "minimize")
    return QuantityResult("v_star", value, "optimizer", witness=witness, metadata=meta)


# interaction informations -----------------------------------------------------------


def _gain(p: JointPmf, c: Channel) -> float:
    v = entropy_profile(extend(p, c)).point
    return v.v_xy - v.v_x - v.v_y


def _exact(name: str, value: float, witness: Channel, predicate: str, p: JointPmf) -> QuantityResult:
    logger.info("%s short-circuits to %.9f (%s)", name, value, predicate)
    return QuantityResult(
        name=name,
        value=value,
        method="exact-graph" if predicate != "max_condition" else "construction",
        witness=witness,
        certificate={"predicate": predicate},
        support_form=_form(name),
        metadata={"witness_gain": _gain(p, witness)},
    )


def g_ppi(p: JointPmf, cfg: Optional[Config] = None, seeds: Sequence[Channel] = (),
          use_structure: bool = True, with_support_form: bool = False) -> QuantityResult:
    """max I(X;Y|U) - I(X;Y) with U independent of X and of Y."""
    cfg = cfg or Config()
    cycle = find_cycle(p)
    if use_structure:
        if cycle is None:
            return _exact("g_ppi", 0.0, trivial_channel(p), "no_cycle", p)
        if max_condition_check(p):
            return _exact("g_ppi", conditional_entropy(p, "x"), bvn_channel(p, cfg.limits), "max_condition", p)
    extra = [trivial_channel(p), *seeds]
    if cycle is not None:
        extra.append(cycle_witness_channel(p, cycle, cfg.witness))
    res = _solve(p, (-1, -1, 1), "maximize", ("indep_x", "indep_y"), cfg, seeds=extra)
    q = _result("g_ppi", res)
    return _attach_support_form(q, p, cfg, [res.witness]) if with_support_form else q


def g_pni(p: JointPmf, cfg: Optional[Config] = None, seeds: Sequence[Channel] = (),
          use_structure: bool = True, with_support_form: bool = False,
          enforce_det_y: bool = False) -> QuantityResult:
    """max I(X;Y|U) - I(X;Y) with U independent of X.

    With `enforce_det_y` the solve also requires H(Y|X,U) = 0; otherwise that form is
    only reported as a residual on the witness.
    """
    cfg = cfg or Config()
    found, path = has_path_length_3(p)
    if use_structure:
        if not found:
            return _exact("g_pni", 0.0, trivial_channel(p), "no_path_length_3", p)
        if max_condition_check(p):
            return _exact("g_pni", conditional_entropy(p, "x"), bvn_channel(p, cfg.limits), "max_condition", p)
    extra = [trivial_channel(p), *seeds]
    if path is not None:
        extra.append(path_witness_channel(p, path, cfg.witness))
    structural = ("indep_x", "det_y") if enforce_det_y else ("indep_x",)
    res = _solve(p, (-1, -1, 1), "maximize", structural, cfg, seeds=extra)
    q = _result("g_pni", res)
    q.metadata["det_y_residual"] = entropy_profile(extend(p, res.witness)).h_y_given_xu
    return _attach_support_form(q, p, cfg, [res.witness]) if with_support_form else q


def g_nni(p: JointPmf, cfg: Optional[Config] = None, seeds: Sequence[Channel] = (),
          use_structure: bool = True, with_support_form: bool = False) -> QuantityResult:
    """max I(X;Y|U) - I(X;Y) over all channels."""
    cfg = cfg or Config()
    found, path = has_path_length_3(p)
    if use_structure:
        if not found:
            return _exact("g_nni", 0.0, trivial_channel(p), "no_path_length_3", p)
        if max_condition_check(p):
            return _exact("g_nni", conditional_entropy(p, "x"), bvn_channel(p, cfg.limits), "max_condition", p)
    extra = [trivial_channel(p), *seeds]
    if path is not None:
        extra.append(path_witness_channel(p, path, cfg.witness))
    res = support_function(p, (-1, -1, 1), cfg.optimizer, extra, cfg.limits)
    q = _result("g_nni", res)
    return _attach_support_form(q, p, cfg, [res.witness]) if with_support_form else q


def interaction_informations(p: JointPmf, cfg: Optional[Config] = None,
                             use_structure: bool = True) -> dict[str, QuantityResult]:
    """G_PPI, G_PNI, G_NNI in nested order, each solve seeded with the previous witness."""
    cfg = cfg or Config()
    ppi = g_ppi(p, cfg, use_structure=use_structure)
    pni = g_pni(p, cfg, seeds=[ppi.witness], use_structure=use_structure)
    nni = g_nni(p, cfg, seeds=[pni.witness, ppi.witness], use_structure=use_structure)
    return {"g_ppi": ppi, "g_pni": pni, "g_nni": nni}


# curves ------------------------------------------------------------------------------


def _ge(a, t: float) -> LinearConstraint:
    return LinearConstraint(a=a, relation=">=", bound=float(t))


def ib_value(p: JointPmf, t: float, cfg: Optional[Config] = None,
             seeds: Sequence[Channel] = ()) -> SolveResult:
    """min I(Y;U) over X - Y - U with I(X;U) >= t."""
    cfg = cfg or Config()
    if t > mutual_information(p) + 1e-9:
        raise InfeasibleT(f"t={t:g} exceeds I(X;Y)={mutual_information(p):.6f}")
    return _solve(p, (0, 1, 0), "minimize", ("markov_xyu",), cfg,
                  linear=[_ge((1.0, 0.0, 0.0), t)], seeds=[reveal_y(p), *seeds])


def pf_value(p: JointPmf, t: float, cfg: Optional[Config] = None,
             seeds: Sequence[Channel] = ()) -> SolveResult:
    """min I(X;U) over X - Y - U with I(Y;U) >= t."""
    cfg = cfg or Config()
    if t > entropy(p.py) + 1e-9:
        raise InfeasibleT(f"t={t:g} exceeds H(Y)={entropy(p.py):.6f}")
    return _solve(p, (1, 0, 0), "minimize", ("markov_xyu",), cfg,
                  linear=[_ge((0.0, 1.0, 0.0), t)], seeds=[reveal_y(p), *seeds])


def _cleanup(t_grid: Sequence[float], values: list[float], increasing: bool) -> tuple[list[float], list[float]]:
    """Monotone envelope of upper bounds: a bound at one t also bounds every t the curve
    lies below. Infeasible (NaN) entries are left alone."""
    order = np.argsort(np.asarray(t_grid, dtype=float), kind="stable")
    if increasing:
        order = order[::-1]
    out = list(values)
    best = np.inf
    for i in order:
        if not np.isfinite(out[i]):
            continue
        best = min(best, out[i])
        out[i] = best
    return out, [float(a - b) if np.isfinite(a) else 0.0 for a, b in zip(values, out)]


def _sweep(p: JointPmf, t_grid: Sequence[float], cfg: Config, solve_one) -> pd.DataFrame:
    raw, status, carry = [], [], []
    for t in t_grid:
        try:
            res = solve_one(p, t, cfg, carry)
        except (InfeasibleT, Infeasible) as exc:
            logger.info("t=%g infeasible: %s", t, exc)
            raw.append(float("nan"))
            status.append("infeasible")
            continue
        raw.append(res.value)
        status.append("ok" if res.converged else "unconverged")
        carry = [res.witness]
    clean, delta = _cleanup(t_grid, raw, increasing=True)
    return pd.DataFrame({"t": list(t_grid), "value": clean, "raw": raw, "cleanup": delta, "status": status})


def ib_curve(p: JointPmf, t_grid: Sequence[float], cfg: Optional[Config] = None) -> pd.DataFrame:
    return _sweep(p, t_grid, cfg or Config(), ib_value)


def pf_curve(p: JointPmf, t_grid: Sequence[float], cfg: Optional[Config] = None) -> pd.DataFrame:
    return _sweep(p, t_grid, cfg or Config(), pf_value)


def synthesis_minimax(points: np.ndarray, t: float) -> tuple[float, np.ndarray]:
    """min over mixtures w of max{w.v_X, w.v_XY - t}, with the mixing weights.

    Time sharing keeps X - U - Y, so every mixture of feasible points is feasible.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    # variables (w_1..w_n, s): minimize s
    c = np.concatenate([np.zeros(n), [1.0]])
    A_ub = np.vstack([
        np.concatenate([pts[:, 0], [-1.0]]),
        np.concatenate([pts[:, 2], [-1.0]]),
    ])
    A_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=[0.0, t], A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0.0, None)] * n + [(None, None)], method="highs")
    if res.status != 0:
        raise Infeasible(f"synthesis mixture LP failed at t={t:g}: {res.message}")
    return float(res.x[-1]), res.x[:n]


def synthesis_curve(p: JointPmf, t_grid: Sequence[float], cfg: Optional[Config] = None) -> pd.DataFrame:
    """min max{I(X;U), I(X,Y;U) - t} over X - U - Y.

    Weighted solves of l*v_X + (1-l)*v_XY sweep the lower boundary of the Markov face;
    each t is then solved over mixtures of the pooled points.
    """
    cfg = cfg or Config()
    carry = [reveal_x(p), reveal_y(p)]
    pool = [point_of(p, c) for c in carry]
    for lam in np.linspace(0.0, 1.0, SYNTHESIS_WEIGHTS):
        if lam == 0.0:
            b = (0.0, 0.0, 1.0)
        else:
            b = (float(lam), 0.0, float(1.0 - lam))
        res = _solve(p, b, "minimize", ("markov_xuy",), cfg, seeds=carry)
        pool += [v for _, v in res.pool]
        carry = [res.witness, *carry[:2]]
    pts = np.array(pool, dtype=float)
    raw = [synthesis_minimax(pts, float(t))[0] for t in t_grid]
    clean, delta = _cleanup(t_grid, raw, increasing=False)
    return pd.DataFrame({"t": list(t_grid), "value": clean, "raw": raw, "cleanup": delta,
                         "status": ["ok"] * len(raw)})


CURVES = {
    "information-bottleneck": ib_curve,
    "privacy-funnel": pf_curve,
    "channel-synthesis": synthesis_curve,
}


def run_curve(p: JointPmf, req: CurveRequest, cfg: Optional[Config] = None) -> pd.DataFrame:
    cfg = (cfg or Config()).model_copy(update={"optimizer": req.config})
    return CURVES[req.quantity](p, req.t_grid, cfg)


# catalogue -----------------------------------------------------------------------------

CATALOGUE = (
    "wyner_ci",
    "gacs_korner_ci",
    "korner_graph_entropy",
    "necessary_cond_entropy",
    "g_rstar",
    "excess_functional_info",
    "s_star",
    "v_star",
    "g_ppi",
    "g_pni",
    "g_nni",
)


def compute_all(p: JointPmf, cfg: Optional[Config] = None, only: Optional[Sequence[str]] = None,
                with_support_form: bool = False) -> dict[str, QuantityResult]:
    cfg = cfg or Config()
    wanted = [n for n in CATALOGUE if only is None or n in only]
    out: dict[str, QuantityResult] = {}
    if {"g_ppi", "g_pni", "g_nni"} & set(wanted):
        out.update(interaction_informations(p, cfg))
        if with_support_form:
            for name in ("g_ppi", "g_pni", "g_nni"):
                _attach_support_form(out[name], p, cfg, [out[name].witness])
    singles = {
        "wyner_ci": lambda: wyner_ci(p, cfg, with_support_form=with_support_form),
        "gacs_korner_ci": lambda: gacs_korner_ci(p, cfg, with_support_form=with_support_form),
        "korner_graph_entropy": lambda: korner_graph_entropy(p, cfg, with_support_form=with_support_form),
        "necessary_cond_entropy": lambda: necessary_cond_entropy(p, cfg, with_support_form=with_support_form),
        "g_rstar": lambda: g_rstar(p, cfg, with_support_form=with_support_form),
        "excess_functional_info": lambda: excess_functional_info(p, cfg, with_support_form=with_support_form),
        "s_star": lambda: s_star(p, cfg),
        "v_star": lambda: v_star(p, cfg),
    }
    for name in wanted:
        if name in singles:
            try:
                out[name] = singles[name]()
            except DegenerateRatio as exc:
                logger.warning("%s skipped: %s", name, exc)
    return {n: out[n] for n in CATALOGUE if n in out and n in wanted}
