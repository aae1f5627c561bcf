"""Command-line surface: `miregion <command> PMF.json [flags]`.

Every command prints one JSON report (or CSV with --csv) that embeds its run manifest.
Exit codes: 0 ok, 2 parse error, 3 validation error or failed guard, 4 infeasible or
condition not met.
"""

import argparse
import json
import logging
import sys
import time
from contextlib import contextmanager
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import __version__
from .checks import bounds_report
from .errors import ConditionNotMet, MiRegionError, ParseError
from .graphs import describe, find_cycle, gacs_korner_channel, has_path_length_3
from .io import channel_document, load_config, load_pmf, write_frame, write_report
from .models import Config, CurveRequest, RunManifest
from .optimize import support_function
from .probability import JointPmf
from .quantities import CATALOGUE, compute_all, run_curve
from .rates import cl_infty_membership, noncausal_rate_membership, rate_membership, rate_tuple
from .region import frl_channel, membership, sample_region
from .witnesses import bvn_channel, cycle_witness_channel, path_witness_channel, witness_report

logger = logging.getLogger(__name__)

CURVE_KINDS = {"ib": "information-bottleneck", "pf": "privacy-funnel", "synth": "channel-synthesis"}
WITNESS_KINDS = ("path", "cycle", "bvn", "frl", "gk")


class _Stages:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.times: dict[str, float] = {}

    @contextmanager
    def __call__(self, name: str):
        start = time.perf_counter()
        yield
        if self.enabled:
            self.times[name] = round(time.perf_counter() - start, 6)


def _vector(text: str, n: int, what: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"{what} must be {n} comma-separated numbers, got {text!r}") from exc
    if len(vals) != n:
        raise ParseError(f"{what} must have {n} entries, got {len(vals)}")
    return vals


def parse_t_grid(text: str) -> list[float]:
    """'start:step:stop' (inclusive) or a comma list."""
    try:
        if ":" in text:
            start, step, stop = (float(s) for s in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(max(count, 0))]
        return [float(s) for s in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"bad t-grid {text!r}: {exc}") from exc


def _config(args) -> Config:
    cfg = load_config(args.config)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.restarts is not None:
        updates["restarts"] = args.restarts
    if args.usize is not None:
        updates["u_size"] = args.usize
    if args.threads is not None:
        updates["threads"] = args.threads
    if updates:
        opt = cfg.optimizer.model_validate({**cfg.optimizer.model_dump(), **updates})
        cfg = cfg.model_copy(update={"optimizer": opt})
    return cfg


def _manifest(args, cfg: Config, stages: _Stages) -> dict:
    return RunManifest(
        input=args.input,
        command=args.command,
        config=cfg.model_dump(),
        tool_version=__version__,
        direction_set_version=cfg.region.direction_set_version,
        stages=stages.times,
    ).model_dump()


def _emit(args, report: dict, frame: Optional[pd.DataFrame] = None) -> None:
    if args.csv and frame is not None:
        write_frame(frame, args.out, manifest=report.get("manifest"))
    else:
        write_report(report, args.out)


# commands ----------------------------------------------------------------------------------


def cmd_quantities(args, p: JointPmf, cfg: Config, stages: _Stages):
    only = args.only.split(",") if args.only else None
    if only:
        unknown = sorted(set(only) - set(CATALOGUE))
        if unknown:
            raise ParseError(f"unknown quantities {unknown}; choose from {list(CATALOGUE)}")
    with stages("quantities"):
        results = compute_all(p, cfg, only=only, with_support_form=args.support_form)
    report = {"quantities": {name: q.to_dict() for name, q in results.items()}}
    if all(k in results for k in ("g_ppi", "g_pni", "g_nni")):
        report["chain"] = bounds_report(p, cfg, results)
    frame = pd.DataFrame(
        [{"name": n, "value_bits": q.value, "method": q.method, "table1_form": q.support_form}
         for n, q in results.items()]
    )
    return report, frame


def cmd_region(args, p: JointPmf, cfg: Config, stages: _Stages):
    if args.support:
        b = _vector(args.support, 3, "--support")
        with stages("support"):
            res = support_function(p, b, cfg.optimizer, limits=cfg.limits)
        report = {
            "b": b,
            "psi_hat": res.value,
            "point": list(res.point),
            "witness": channel_document(res.witness),
            "residuals": res.residuals,
            "converged": res.converged,
        }
        return report, None
    if args.member:
        v = _vector(args.member, 3, "--member")
        with stages("membership"):
            if args.form:
                verdict = cl_infty_membership(p, v, args.form, cfg)
            else:
                verdict = membership(p, v, cfg)
        return {"v": v, "form": args.form, "verdict": verdict.to_dict()}, None
    with stages("sampling"):
        approx = sample_region(p, cfg=cfg)
    return {"region": approx.to_dict()}, approx.to_frame()


def cmd_rates(args, p: JointPmf, cfg: Config, stages: _Stages):
    r = rate_tuple(_vector(args.tuple, 5, "--tuple"))
    with stages("membership"):
        if args.noncausal:
            verdict = noncausal_rate_membership(p, r, cfg)
        else:
            verdict = rate_membership(p, r, cfg)
    return {"rates": list(r), "noncausal": args.noncausal, "verdict": verdict.to_dict()}, None


def cmd_curve(args, p: JointPmf, cfg: Config, stages: _Stages):
    req = CurveRequest(quantity=CURVE_KINDS[args.kind], t_grid=parse_t_grid(args.t_grid), config=cfg.optimizer)
    with stages("curve"):
        df = run_curve(p, req, cfg)
    return {"quantity": req.quantity, "rows": df.to_dict(orient="records")}, df


def _witness(kind: str, p: JointPmf, cfg: Config, direction: str):
    if kind == "path":
        found, path = has_path_length_3(p)
        if not found:
            raise ConditionNotMet("support graph has no path of length 3", predicate="has_path_length_3")
        return path_witness_channel(p, path, cfg.witness), {"path": list(path.labels(p))}
    if kind == "cycle":
        cycle = find_cycle(p)
        if cycle is None:
            raise ConditionNotMet("support graph has no cycle", predicate="has_cycle")
        return cycle_witness_channel(p, cycle, cfg.witness), {"cycle": cycle.labels(p)}
    if kind == "bvn":
        return bvn_channel(p, cfg.limits), {}
    if kind == "frl":
        return frl_channel(p, direction), {"direction": direction}
    return gacs_korner_channel(p), {}


def cmd_witness(args, p: JointPmf, cfg: Config, stages: _Stages):
    with stages("construction"):
        channel, extra = _witness(args.kind, p, cfg, args.direction)
    report = {"kind": args.kind, **extra, "channel": channel_document(channel), **witness_report(p, channel)}
    return report, None


def cmd_graph(args, p: JointPmf, cfg: Config, stages: _Stages):
    return {"graph": describe(p, cfg.limits.graph_vertices)}, None


COMMANDS = {
    "quantities": cmd_quantities,
    "region": cmd_region,
    "rates": cmd_rates,
    "curve": cmd_curve,
    "witness": cmd_witness,
    "graph": cmd_graph,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="JSON pmf file")
    common.add_argument("--config", default=None, help="YAML config (default mi_region/inputs.yaml)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--restarts", type=int, default=None)
    common.add_argument("--usize", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--csv", action="store_true", help="tabular extract as CSV where one exists")
    common.add_argument("--timings", action="store_true", help="record per-stage wall clock in the manifest")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="miregion", description="Mutual information region toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quantities", parents=[common], help="named information quantities")
    q.add_argument("--only", default=None, help="comma list of quantity names")
    q.add_argument("--support-form", action="store_true", help="also evaluate each support-function form")

    r = sub.add_parser("region", parents=[common], help="sample, support values and membership")
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--samples", action="store_true", help="sample the region (default)")
    mode.add_argument("--support", default=None, metavar="B", help="b_X,b_Y,b_XY")
    mode.add_argument("--member", default=None, metavar="V", help="v_X,v_Y,v_XY")
    r.add_argument("--form", choices=["cone", "ray", "noncausal", "gray_wyner"], default=None,
                   help="with --member: test the closure of the multi-letter region instead")

    t = sub.add_parser("rates", parents=[common], help="rate-region membership")
    t.add_argument("--tuple", required=True, metavar="R", help="R0,R1,R2,R3,R4")
    t.add_argument("--noncausal", action="store_true")

    c = sub.add_parser("curve", parents=[common], help="bottleneck, funnel and synthesis curves")
    c.add_argument("--kind", choices=sorted(CURVE_KINDS), required=True)
    c.add_argument("--t-grid", required=True, help="start:step:stop or a comma list")

    w = sub.add_parser("witness", parents=[common], help="explicit channel constructions")
    w.add_argument("--kind", choices=WITNESS_KINDS, required=True)
    w.add_argument("--direction", choices=["x->y", "y->x"], default="x->y")

    sub.add_parser("graph", parents=[common], help="support graph structure")
    return parser


def _fail(exc: BaseException, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    predicate = getattr(exc, "predicate", "")
    if predicate:
        payload["predicate"] = predicate
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    stages = _Stages(args.timings)
    try:
        with stages("load"):
            cfg = _config(args)
            p = load_pmf(args.input)
        report, frame = COMMANDS[args.command](args, p, cfg, stages)
        report = {"manifest": _manifest(args, cfg, stages), **report}
        _emit(args, report, frame)
    except (ParseError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(exc, 2)
    except MiRegionError as exc:
        return _fail(exc, exc.exit_code)
    except (ValidationError, ValueError, AssertionError) as exc:
        # guard failures on a constructed witness are reported like invalid input
        return _fail(exc, 3)
    return 0
