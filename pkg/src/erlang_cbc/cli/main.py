"""``erlang-cbc`` command line: evaluate, staff, sweep, phase-diagram, simulate, reproduce."""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import approx, asymptotic, exact, reproduce, simulate as sim, staffing
from ..model import AbandonmentSpec, CbcControl, ModelParams, ParameterError, check
from .records import INDICATOR_COLUMNS, indicator_record, input_echo, render

EXIT_OK, EXIT_USAGE, EXIT_ENGINE, EXIT_UNSATISFIABLE = 0, 2, 3, 4
METHODS = ("exact", "nonasym", "asym", "sqrt", "wh", "sim")
SWEEP_VARS = ("servers", "lambda", "eps", "tau", "gamma", "delta")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# parsing helpers


def _abandon(text: str) -> AbandonmentSpec:
    try:
        return AbandonmentSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _methods(text: str) -> list[str]:
    out = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {', '.join(METHODS)}")
    return out


def _add_model(p: argparse.ArgumentParser, servers_required=True):
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="arrival rate")
    p.add_argument("--mu", type=float, required=True, help="service rate per server")
    p.add_argument("--servers", "-s", type=int, required=servers_required, default=None)
    p.add_argument("--abandon", type=_abandon, required=True,
                   help="reneging:<gamma> or balking:<delta>")
    p.add_argument("--eps", type=float, default=0.0, help="arrival cut while congested")
    p.add_argument("--tau", type=float, default=0.0, help="service boost while congested")


def _add_output(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("csv", "json", "table"), default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def _add_sim(p: argparse.ArgumentParser):
    p.add_argument("--horizon", type=float, default=1e4)
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--warmup", type=float, default=None, help="default: 10%% of horizon")


def _params(args, servers=None) -> ModelParams:
    s = args.servers if servers is None else servers
    params = ModelParams(args.lam, args.mu, 0 if s is None else s, args.abandon,
                         CbcControl(args.eps, args.tau))
    check(params)
    return params


# --------------------------------------------------------------------------
# evaluation


def evaluate_method(params: ModelParams, method: str, args=None) -> dict:
    if method == "exact":
        return indicator_record(params, method, exact.indicators_exact(params))
    if method == "nonasym":
        return indicator_record(params, method, approx.indicators_nonasymptotic(params))
    if method == "wh":
        return indicator_record(params, method, approx.indicators_wilson_hilferty(params))
    if method == "asym":
        return indicator_record(params, method, asymptotic.indicators_asymptotic(params),
                                regime=asymptotic.regime_of(params).value)
    if method == "sqrt":
        return indicator_record(params, method, staffing.evaluate(params, staffing.Evaluator.SQRT_STAFFING))
    if method == "sim":
        if not (args.horizon > 0 and args.replications >= 1) or (args.warmup is not None and args.warmup < 0):
            raise UsageError("simulation needs horizon > 0, replications >= 1 and warmup >= 0")
        cfg = sim.SimConfig(params, args.horizon, args.replications, args.seed, args.warmup)
        est = sim.simulate(cfg)
        m = est.mean
        ind = exact.PerformanceIndicators(p_q=m["p_q"], p_ab=m["p_ab"], l_q=m["l_q"], w_q=m["w_q"])
        hw = {k: est.half_width[k] for k in ("p_q", "p_ab", "l_q", "w_q")}
        rec = indicator_record(params, method, ind, half_widths=hw)
        rec.update(replications=cfg.replications, horizon=cfg.horizon, warmup=cfg.warmup, seed=cfg.seed)
        return rec
    raise UsageError(f"unknown method {method!r}")


def cmd_evaluate(args):
    params = _params(args)
    records = [evaluate_method(params, m, args) for m in args.method]
    return records, [], INDICATOR_COLUMNS


def cmd_simulate(args):
    params = _params(args)
    return [evaluate_method(params, "sim", args)], [], INDICATOR_COLUMNS


def cmd_staff(args):
    base = _params(args, servers=1)
    if args.target_pq is not None:
        metric, target = staffing.Metric.DELAY, args.target_pq
    else:
        metric, target = staffing.Metric.ABANDONMENT, args.target_pab
    if not 0.0 < target < 1.0:
        raise UsageError("target must lie strictly between 0 and 1")
    query = staffing.StaffingQuery(base, target, metric, args.evaluator, args.cap)
    res = staffing.min_staff(query)
    rec = input_echo(base.replace(s=res.s))
    rec.update(evaluator=query.evaluator.value, metric=metric.value, target=target,
               s_star=res.s, achieved=res.metric_value, p_q=res.achieved.p_q,
               p_ab=res.achieved.p_ab, c_root=res.c_root, s_ceiling=res.s_ceiling)
    return [rec], [], None


def sweep_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid; empty when ``stop < start``."""
    if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)) or step <= 0:
        raise UsageError("sweep range needs finite start/stop and step > 0")
    if stop < start:
        return np.empty(0)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _sweep_point(args, value) -> ModelParams:
    var = args.var
    if var == "servers":
        if value != round(value):
            raise UsageError("servers sweep needs integer start and step")
        return _params(args, servers=int(round(value)))
    base = _params(args, servers=args.servers)
    if var == "lambda":
        return check(base.replace(lam=float(value)))
    if var in ("eps", "tau"):
        return check(base.replace(**{var: float(value)}))
    kind = "reneging" if var == "gamma" else "balking"
    if base.abandon.kind.value != kind:
        raise UsageError(f"sweeping {var} needs --abandon {kind}:<rate>")
    return check(base.replace(**{var: float(value)}))


def cmd_sweep(args):
    if args.var != "servers" and args.servers is None:
        raise UsageError("--servers is required unless sweeping servers")
    values = sweep_values(args.start, args.stop, args.step)
    points = [_sweep_point(args, v) for v in values]
    jobs = [(p, m) for p in points for m in args.method]
    workers = sim.worker_count()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(lambda j: evaluate_method(j[0], j[1], args), jobs))
    else:
        records = [evaluate_method(p, m, args) for p, m in jobs]
    return records, [f"sweep {args.var} from {args.start:g} to {args.stop:g} step {args.step:g}"], INDICATOR_COLUMNS


def cmd_phase(args):
    if args.nx < 2 or args.ny < 2:
        raise UsageError("grid needs nx >= 2 and ny >= 2")
    grid = asymptotic.phase_diagram(args.representation, args.nx, args.ny,
                                    (args.x_min, args.x_max), tau=args.tau, ratio=args.ratio)
    records = [dict(x=c.x, intervention=c.intervention, regime=c.regime.value,
                    p_q_asym=c.p_q, p_ab_asym=c.p_ab) for c in grid.cells]
    notes = [f"representation={grid.representation.value} tau={args.tau:g} intervention=1-R_Q/R"]
    return records, notes, None


def cmd_reproduce(args):
    art = reproduce.TARGETS[args.target]()
    notes = [f"target={art.name}"] + art.notes
    for chk in art.checks:
        line = f"{'PASS' if chk.passed else 'FAIL'} {chk.name}: {chk.detail}"
        notes.append(line)
        print(line, file=sys.stderr)
    return art.rows, notes, art.columns


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erlang-cbc",
                                     description="Erlang A queues with congestion-based control")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="performance indicators for one configuration")
    _add_model(p)
    p.add_argument("--method", type=_methods, default=["exact"],
                   help=f"comma-separated subset of {','.join(METHODS)}")
    _add_sim(p)
    _add_output(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("staff", help="minimum staffing for a delay or abandonment target")
    _add_model(p, servers_required=False)
    tgt = p.add_mutually_exclusive_group(required=True)
    tgt.add_argument("--target-pq", type=float, help="require P_Q < target")
    tgt.add_argument("--target-pab", type=float, help="require P_ab < target")
    p.add_argument("--evaluator", choices=[e.value for e in staffing.Evaluator], default="exact")
    p.add_argument("--cap", type=int, default=staffing.DEFAULT_STAFF_CAP)
    _add_output(p)
    p.set_defaults(func=cmd_staff)

    p = sub.add_parser("sweep", help="evaluate along a grid of one parameter")
    _add_model(p, servers_required=False)
    p.add_argument("--var", choices=SWEEP_VARS, required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--method", type=_methods, default=["exact"])
    _add_sim(p)
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("phase-diagram", help="asymptotic regime labels on a grid")
    p.add_argument("--representation", choices=[r.value for r in asymptotic.Representation],
                   default="staffing")
    p.add_argument("--nx", type=int, default=101)
    p.add_argument("--ny", type=int, default=101)
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--ratio", type=float, default=1.0, help="mu_q/theta at the singular point")
    _add_output(p)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("simulate", help="replicated discrete-event simulation")
    _add_model(p)
    _add_sim(p)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="regenerate benchmark table or figure data")
    p.add_argument("target", choices=sorted(reproduce.TARGETS))
    _add_output(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        records, notes, columns = args.func(args)
    except (UsageError, ParameterError, staffing.NotApplicableError) as exc:
        print(f"erlang-cbc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except staffing.UnsatisfiableError as exc:
        print(f"erlang-cbc: unsatisfiable: {exc}", file=sys.stderr)
        return EXIT_UNSATISFIABLE
    except Exception as exc:  # any engine failure
        print(f"erlang-cbc: engine failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    text = render(records, args.format, notes, columns)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
