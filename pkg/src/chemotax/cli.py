"""Command-line surface: run, epsilon-study, blowup-scan, ode, validate.

Exit codes: 0 completed, 10 blow-up detected, 1 error, 2 usage problems
(unknown subcommand, bad flags).  Relative output directories resolve
against ``$CHEMOTAX_OUTPUT_ROOT`` when that variable is set.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, RunConfig, load_config
from .diagnostics import DiagConfig
from .dynamics import advance, cfl_dt, validate_state
from .errors import ChemotaxError, DtCollapse, ScanError, SweepError
from .io import write_snapshot, write_timeseries
from .model import validate_kinetics
from .ode import (
    BlowupOdeParams,
    GrowthOdeParams,
    blowup_threshold,
    integrate_blowup_ode,
    integrate_growth_ode,
    pure_power_blowup_time,
)
from .scenarios import blowup_scan, epsilon_sweep, make_initial_state, run_scenario

OUTPUT_ROOT_VAR = "CHEMOTAX_OUTPUT_ROOT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemotax",
        description="Finite-volume chemotaxis solver with blow-up diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "advance one configured scenario and persist diagnostics"),
        ("epsilon-study", "diffusion-ladder consistency study"),
        ("blowup-scan", "bisect the initial amplitude at the blow-up transition"),
        ("ode", "comparison-ODE toolkit (growth, blowup, pure-power, threshold)"),
        ("validate", "check kinetics hypotheses and preflight a few steps"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a TOML configuration")
        p.add_argument("--output", help="output directory (overrides output.dir)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker bound for parallelizable phases (default 1)")
    return parser


def _load(path: str):
    try:
        return load_config(path)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return None
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return None


def _output_dir(args, cfg: RunConfig) -> str:
    stem = os.path.splitext(os.path.basename(args.config))[0]
    path = args.output or cfg.output_dir or f"{stem}.out"
    root = os.environ.get(OUTPUT_ROOT_VAR)
    if root and not os.path.isabs(path):
        path = os.path.join(root, path)
    os.makedirs(path, exist_ok=True)
    return path


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _cmd_run(args, cfg: RunConfig) -> int:
    out = _output_dir(args, cfg)
    result = run_scenario(cfg.scenario(), cfg.params, cfg.step, cfg.elliptic, cfg.diag)
    write_timeseries(result.trajectory.records, os.path.join(out, "timeseries.csv"))
    write_snapshot(result.final_state, os.path.join(out, "snapshot_final.csv"))
    v = result.verdict
    if v.kind == "Completed":
        print(f"COMPLETED t={_fmt(result.final_state.t)} peak_linf={_fmt(v.peak_linf)}")
        return 0
    if v.kind == "BlowupDetected":
        print(f"BLOWUP t={_fmt(v.t_detect)} trigger={v.trigger} peak_linf={_fmt(v.peak_linf)}")
        return 10
    print(f"ABORTED t={_fmt(v.t_detect if v.t_detect is not None else result.final_state.t)} "
          f"reason={v.reason}", file=sys.stderr)
    return 1


def _cmd_epsilon_study(args, cfg: RunConfig) -> int:
    if cfg.study is None:
        print("config error: epsilon-study needs a [study] section", file=sys.stderr)
        return 1
    out = _output_dir(args, cfg)
    try:
        result = epsilon_sweep(cfg.study, cfg.scenario(), cfg.params, cfg.step,
                               cfg.elliptic, cfg.diag)
    except SweepError as exc:
        print(f"BLOWUP {exc}", file=sys.stderr)
        return 10
    lines = ["eps,dist_to_next,dist_to_limit"]
    for k, eps in enumerate(result.eps):
        to_next = result.dist_consecutive[k] if k < len(result.dist_consecutive) else float("nan")
        lines.append(f"{_fmt(eps)},{_fmt(to_next)},{_fmt(result.dist_to_limit[k])}")
    with open(os.path.join(out, "eps_distances.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"COMPLETED levels={len(result.eps)} steps={result.steps} t_end={_fmt(result.t_end)}")
    for k in range(len(result.dist_consecutive)):
        print(f"  D_{k} = {_fmt(result.dist_consecutive[k])}")
    return 0


def _cmd_blowup_scan(args, cfg: RunConfig) -> int:
    if cfg.scan is None:
        print("config error: blowup-scan needs a [scan] section", file=sys.stderr)
        return 1
    out = _output_dir(args, cfg)
    try:
        result = blowup_scan(cfg.scenario(), cfg.params, cfg.step,
                             cfg.scan.amp_lo, cfg.scan.amp_hi, cfg.scan.iters,
                             cfg.elliptic, cfg.diag, threads=max(args.threads, 1))
    except ScanError as exc:
        print(f"scan error: {exc}", file=sys.stderr)
        return 1
    with open(os.path.join(out, "scan_result.csv"), "w") as fh:
        fh.write("amp_lo,amp_hi,lp_u0_lo,lp_u0_hi,iterations,probes\n")
        fh.write(",".join([_fmt(result.amp_lo), _fmt(result.amp_hi),
                           _fmt(result.lp_u0_lo), _fmt(result.lp_u0_hi),
                           str(result.iterations), str(result.probes)]) + "\n")
    print(f"COMPLETED bracket=[{_fmt(result.amp_lo)}, {_fmt(result.amp_hi)}] "
          f"lp_u0=[{_fmt(result.lp_u0_lo)}, {_fmt(result.lp_u0_hi)}] probes={result.probes}")
    return 0


def _cmd_ode(args, cfg: RunConfig) -> int:
    if cfg.ode_task is None:
        print("config error: ode needs an [ode] section with an operation", file=sys.stderr)
        return 1
    task = cfg.ode_task
    out = _output_dir(args, cfg)
    try:
        if task.operation == "growth":
            res = integrate_growth_ode(GrowthOdeParams(task.C, task.p, task.w0),
                                       task.t_end, task.rtol)
            _write_series(os.path.join(out, "ode_series.csv"), res.t, res.w)
            guard = " guard_tripped" if res.guard_tripped else ""
            print(f"COMPLETED reached={_fmt(res.reached)} final={_fmt(res.w[-1])}{guard}")
        elif task.operation == "blowup":
            res = integrate_blowup_ode(
                BlowupOdeParams(task.alpha1, task.alpha2, task.alpha3, task.p, task.y0),
                task.rtol, task.y_cap, task.horizon)
            _write_series(os.path.join(out, "ode_series.csv"), res.t, res.y)
            if res.blowup_time is not None:
                tail = f" tail_bound={_fmt(res.tail_bound)}" if res.tail_bound is not None else ""
                print(f"BLOWUP t={_fmt(res.blowup_time)}{tail}")
            else:
                certainty = "certified" if res.certified_bounded else "within horizon only"
                print(f"BOUNDED ({certainty})")
        elif task.operation == "pure-power":
            print(f"T_star={_fmt(pure_power_blowup_time(task.w0, task.k, task.p))}")
        else:
            thr = blowup_threshold(task.alpha1, task.alpha2, task.alpha3, task.p, task.beta0)
            print(f"threshold={_fmt(thr)}")
    except (ValueError, RuntimeError) as exc:
        print(f"ode error: {exc}", file=sys.stderr)
        return 1
    return 0


def _write_series(path, t, y):
    with open(path, "w") as fh:
        fh.write("t,value\n")
        for tt, yy in zip(t, y):
            fh.write(f"{_fmt(tt)},{_fmt(yy)}\n")


def _cmd_validate(args, cfg: RunConfig) -> int:
    report = validate_kinetics(cfg.params.kinetics)
    print(report.summary())
    ok = report.passed

    try:
        state = make_initial_state(cfg.scenario(), cfg.params, cfg.elliptic)
    except (ValueError, ChemotaxError) as exc:
        print(f"[FAIL] initial state: {exc}")
        return 1
    problems = validate_state(state, cfg.params, cfg.elliptic)
    steps = 0
    try:
        for _ in range(5):
            if state.t >= cfg.step.t_end:
                break
            state, _dt = advance(state, cfg.params, cfg.step, cfg.elliptic,
                                 dt=min(cfl_dt(state, cfg.step, cfg.params),
                                        cfg.step.t_end - state.t))
            problems.extend(validate_state(state, cfg.params, cfg.elliptic))
            steps += 1
    except DtCollapse as exc:
        problems.append(f"time step collapsed during preflight: {exc}")
    if problems:
        for p in problems:
            print(f"[FAIL] preflight: {p}")
        ok = False
    else:
        print(f"[PASS] preflight: {steps} steps, state invariants hold")
    return 0 if ok else 1


_COMMANDS = {
    "run": _cmd_run,
    "epsilon-study": _cmd_epsilon_study,
    "blowup-scan": _cmd_blowup_scan,
    "ode": _cmd_ode,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    cfg = _load(args.config)
    if cfg is None:
        return 1
    try:
        return _COMMANDS[args.command](args, cfg)
    except ChemotaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
