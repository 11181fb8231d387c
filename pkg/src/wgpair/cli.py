"""Command-line entry point.

Scalars go to stdout as ``key = value`` lines; tables go to ``--out`` as CSV
with a ``<name>.manifest.json`` next to them. A ``--config`` file of
``key = value`` lines supplies defaults that explicit flags override.

CSV columns per subcommand:
  rates        theta,g_c,gamma,gamma_plus,gamma_minus,delta,condition_class
  kraus        row,col,re,im
  emit1        t,f_R_re,f_R_im,f_L_re,f_L_im
  ratio1       state,method,p_left,p_right,r1,divergent
  two-photon   theta,g_c,gamma,P_RR,P_LL,P_RL,P_LR,p_parallel,p_antiparallel,r2_oracle,r2_printed,full_decay
  noon         t,fidelity,expected,branch_r_re,branch_r_im,branch_l_re,branch_l_im
  sweep        theta,g_c,<quantities>
  trajectories key,value  (the statistics block)
  validate     dt,max_error,survival_error
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .collision import BinConfig, convergence_study, run as run_collision
from .core import DEFAULT_TOL, SystemParams, classify_condition, derive_rates, kraus, named_state
from .output import build_manifest, key_value_lines, write_table
from .single import DirectionalityResult, emission_probabilities, photon_waveform, r1_result
from .sweep import DEFAULT_QUANTITIES, QUANTITIES, SweepSpec, run_sweep
from .trajectories import DETECTION_LABELS, run_trajectories, summarize
from .two_photon import PAIRS, bunching_report, noon_overlap

DEFAULT_THETA = math.pi / 2
DEFAULT_GC = 1.0


class CliError(Exception):
    pass


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _common(p: argparse.ArgumentParser, dt: float | None = None, tmax: float | None = None,
            multi_dt: bool = False) -> None:
    p.add_argument("--config", type=Path, help="flat key = value file merged under the flags")
    p.add_argument("--gamma", type=float, default=1.0, help="single-qubit decay rate (default 1)")
    ang = p.add_mutually_exclusive_group()
    ang.add_argument("--theta", type=float, help="propagation phase in radians (default pi/2)")
    ang.add_argument("--theta-pi", type=float, help="propagation phase in units of pi")
    p.add_argument("--gc", type=float, default=DEFAULT_GC, help="cancellation coupling (default 1)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="classification tolerance")
    p.add_argument("--out", type=Path, help="CSV output path")
    p.add_argument("--force", action="store_true", help="skip regime checks")
    if multi_dt:
        p.add_argument("--dt", type=float, action="append", help="time step (repeatable)")
    else:
        p.add_argument("--dt", type=float, default=dt, help="time step")
    p.add_argument("--tmax", type=float, default=tmax, help="time horizon")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1000, help="number of trajectories")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgpair",
        description=__doc__.split("\n\n")[0],
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"wgpair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="collective decay rates and regime")
    _common(p, dt=1e-3, tmax=20.0)

    p = sub.add_parser("kraus", help="no-emission propagator K(t)")
    _common(p, dt=1e-3, tmax=20.0)
    p.add_argument("--t", type=float, default=1.0)

    p = sub.add_parser("emit1", help="one-photon waveforms and emission probabilities")
    _common(p, dt=1e-2, tmax=20.0)
    p.add_argument("--state", default="eg")

    p = sub.add_parser("ratio1", help="left/right directionality ratio r1")
    _common(p, dt=1e-3, tmax=20.0)
    p.add_argument("--state", default="eg", choices=["eg", "ge", "psiL", "psiR"])
    p.add_argument("--method", default="closed", choices=["closed", "integral", "collision"])

    p = sub.add_parser("two-photon", help="pair probabilities and bunching ratio r2 from |ee>")
    _common(p, dt=1e-2, tmax=20.0)
    p.add_argument("--method", default="analytic", choices=["analytic", "collision"])

    p = sub.add_parser("noon", help="N00N-state fidelity F(t)")
    _common(p, dt=1e-3, tmax=20.0)
    p.add_argument("--t", type=float, action="append", help="evaluation time (repeatable, default 1)")
    p.add_argument("--method", default="analytic", choices=["analytic", "collision"])

    p = sub.add_parser("sweep", help="(theta, g_c) grid of observables")
    _common(p, dt=1e-3, tmax=20.0)
    p.add_argument("--theta-start", type=float, default=0.0)
    p.add_argument("--theta-stop", type=float, default=2 * math.pi)
    p.add_argument("--theta-count", type=int, default=101)
    p.add_argument("--gc-start", type=float, default=-2.0)
    p.add_argument("--gc-stop", type=float, default=2.0)
    p.add_argument("--gc-count", type=int, default=81)
    p.add_argument("--quantities", default=",".join(DEFAULT_QUANTITIES),
                   help=f"comma-separated subset of {','.join(QUANTITIES)}")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("trajectories", help="quantum-jump statistics from |ee>")
    _common(p, dt=1e-3, tmax=None)
    p.add_argument("--state", default="ee")
    p.add_argument("--detection", default="directional", choices=sorted(DETECTION_LABELS))
    p.add_argument("--freeze", type=_bool, default=False, help="stop each trajectory after its first click")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dump", type=Path, help="write one JSON record per trajectory")

    p = sub.add_parser("validate", help="dt-halving convergence study of the collision model")
    _common(p, multi_dt=True)
    p.add_argument("--state", default="eg")
    p.add_argument("--horizon", type=float, default=10.0)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def read_config(path: Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    sub = _subparser(parser, args.command)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in read_config(args.config).items():
        if key not in actions or key in ("config", "help"):
            raise CliError(f"unknown config key {key!r} for {args.command}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = _bool(raw)
        elif isinstance(action, argparse._AppendAction):
            conv = action.type or str
            defaults[key] = [conv(v) for v in raw.replace(",", " ").split()]
        else:
            defaults[key] = (action.type or str)(raw)
    sub.set_defaults(**defaults)
    merged = parser.parse_args(argv)
    # append actions extend a default list instead of replacing it
    for key, value in defaults.items():
        if isinstance(actions[key], argparse._AppendAction):
            given = getattr(merged, key)
            if given is not value and given[: len(value)] == value and len(given) > len(value):
                setattr(merged, key, given[len(value):])
    return merged


def params_from(args) -> SystemParams:
    if args.theta_pi is not None:
        theta = args.theta_pi * math.pi
    elif args.theta is not None:
        theta = args.theta
    else:
        theta = DEFAULT_THETA
    return SystemParams(theta, args.gc, args.gamma)


def _param_record(args) -> dict:
    skip = {"config", "out", "dump"}
    rec = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        rec[k] = str(v) if isinstance(v, Path) else v
    return rec


def _emit(args, header, rows, seeds=None, tolerances=None) -> None:
    if args.out is None:
        return
    manifest = build_manifest(args.command, _param_record(args), seeds, tolerances or {"classification": args.tol})
    write_table(args.out, header, rows, manifest)


def _single_dt(args) -> float:
    dt = args.dt
    if isinstance(dt, list):
        dt = dt[-1]
    return float(dt)


def cmd_rates(args, out) -> None:
    params = params_from(args)
    r = derive_rates(params)
    cond = classify_condition(params, args.tol)
    label = cond.kind if cond.n is None else f"{cond.kind}({cond.n})"
    out.write(key_value_lines([
        ("theta", params.theta), ("g_c", params.g_c), ("gamma", params.gamma),
        ("gamma_plus", r.gamma_plus), ("gamma_minus", r.gamma_minus), ("delta", r.delta),
        ("condition_class", label), ("tol", args.tol),
    ]))
    _emit(args, ("theta", "g_c", "gamma", "gamma_plus", "gamma_minus", "delta", "condition_class"),
          [(params.theta, params.g_c, params.gamma, r.gamma_plus, r.gamma_minus, r.delta, label)])


def cmd_kraus(args, out) -> None:
    params = params_from(args)
    k = kraus(params, args.t)
    labels = ("ee", "eg", "ge", "gg")
    pairs = [("t", args.t)]
    rows = []
    for i in range(4):
        for j in range(4):
            pairs.append((f"K_{labels[i]}_{labels[j]}_re", k[i, j].real))
            pairs.append((f"K_{labels[i]}_{labels[j]}_im", k[i, j].imag))
            rows.append((labels[i], labels[j], k[i, j].real, k[i, j].imag))
    pairs.append(("max_singular_value", float(np.linalg.norm(k, 2))))
    out.write(key_value_lines(pairs))
    _emit(args, ("row", "col", "re", "im"), rows)


def cmd_emit1(args, out) -> None:
    params = params_from(args)
    state = named_state(args.state, params)
    res = emission_probabilities(params, state)
    out.write(key_value_lines([
        ("state", args.state), ("p_left", res.p_left), ("p_right", res.p_right),
        ("p_total", res.p_left + res.p_right),
    ]))
    if args.out is not None:
        dt = _single_dt(args)
        times = np.arange(int(round(args.tmax / dt)) + 1) * dt
        fr = photon_waveform(params, state, "R").sample(times)
        fl = photon_waveform(params, state, "L").sample(times)
        rows = [(t, a.real, a.imag, b.real, b.imag) for t, a, b in zip(times, fr, fl)]
        _emit(args, ("t", "f_R_re", "f_R_im", "f_L_re", "f_L_im"), rows)


def cmd_ratio1(args, out) -> None:
    params = params_from(args)
    key = {"psiL": "psi_L", "psiR": "psi_R"}.get(args.state, args.state)
    if args.method == "collision":
        config = BinConfig.from_horizon(_single_dt(args), args.tmax, params.gamma)
        state = run_collision(params, named_state(args.state, params), config)
        p = state.emission_probabilities()
        res = DirectionalityResult.from_probabilities(p["L"], p["R"])
    else:
        res = r1_result(params, key, args.method)
    out.write(key_value_lines([
        ("state", args.state), ("method", args.method),
        ("p_left", res.p_left), ("p_right", res.p_right),
        ("r1", res.ratio), ("divergent", res.divergent),
    ]))
    _emit(args, ("state", "method", "p_left", "p_right", "r1", "divergent"),
          [(args.state, args.method, res.p_left, res.p_right, res.ratio, res.divergent)])


def cmd_two_photon(args, out) -> None:
    params = params_from(args)
    rep = bunching_report(params)
    probs = dict(rep.pair_probabilities)
    pairs = []
    if args.method == "collision":
        config = BinConfig.from_horizon(_single_dt(args), args.tmax, params.gamma)
        state = run_collision(params, named_state("ee", params), config)
        probs = state.pair_probabilities()
        par = probs["RR"] + probs["LL"]
        anti = probs["RL"] + probs["LR"]
        pairs.append(("r2_collision", anti / par if par > 0 else math.nan))
    par = probs["RR"] + probs["LL"]
    anti = probs["RL"] + probs["LR"]
    head = [(f"P_{p}", probs[p]) for p in PAIRS] + [
        ("p_parallel", par), ("p_antiparallel", anti),
        ("r2_oracle", rep.r2_oracle), ("r2_printed", rep.r2_printed), ("full_decay", rep.full_decay),
    ]
    out.write(key_value_lines(head + pairs))
    _emit(args, ("theta", "g_c", "gamma") + tuple(f"P_{p}" for p in PAIRS)
          + ("p_parallel", "p_antiparallel", "r2_oracle", "r2_printed", "full_decay"),
          [(params.theta, params.g_c, params.gamma, *(probs[p] for p in PAIRS),
            par, anti, rep.r2_oracle, rep.r2_printed, rep.full_decay)])


def cmd_noon(args, out) -> None:
    params = params_from(args)
    cond = classify_condition(params, args.tol)
    if cond.kind != "controlled_antiresonance" and not args.force:
        raise CliError(f"noon needs a controlled antiresonance (got {cond.kind}); pass --force to override")
    times = args.t or [1.0]
    if any(t < 0 for t in times):
        raise CliError("--t must be >= 0")
    rows, pairs = [], []
    if args.method == "collision":
        dt = _single_dt(args)
        marks = [int(round(t / dt)) for t in times]
        config = BinConfig(dt, max(marks), params.gamma)
        state = run_collision(params, named_state("ee", params), config, checkpoints=marks)
        branches = state.checkpoints
        results = []
        for t, m in zip(times, marks):
            br, bl = branches[m] if m else (0j, 0j)
            results.append((t, abs((br - bl) / math.sqrt(2.0)) ** 2, br, bl))
    else:
        results = []
        for t in times:
            ov = noon_overlap(params, t)
            results.append((t, ov.fidelity, ov.branch_r, ov.branch_l))
    for t, f, br, bl in results:
        expected = (1.0 - math.exp(-params.gamma * t)) ** 4
        suffix = "" if len(times) == 1 else f"_{t:g}"
        pairs += [(f"F{suffix}", f), (f"expected{suffix}", expected)]
        rows.append((t, f, expected, br.real, br.imag, bl.real, bl.imag))
    out.write(key_value_lines([("condition_class", cond.kind), ("method", args.method)] + pairs))
    _emit(args, ("t", "fidelity", "expected", "branch_r_re", "branch_r_im", "branch_l_re", "branch_l_im"), rows)


def cmd_sweep(args, out) -> None:
    if args.out is None:
        raise CliError("sweep requires --out")
    spec = SweepSpec(
        args.theta_start, args.theta_stop, args.theta_count,
        args.gc_start, args.gc_stop, args.gc_count,
        tuple(q.strip() for q in args.quantities.split(",") if q.strip()),
        args.gamma, args.tol,
    )
    rows = run_sweep(spec, jobs=args.jobs)
    _emit(args, spec.header, rows)
    out.write(key_value_lines([("cells", len(rows)), ("out", str(args.out))]))


def cmd_trajectories(args, out) -> None:
    params = params_from(args)
    batch = run_trajectories(
        params, named_state(args.state, params), _single_dt(args), args.n, args.seed,
        args.detection, args.tmax, args.freeze, n_jobs=args.jobs,
    )
    stats = summarize(batch)
    rows = [("seed", args.seed), ("dt", _single_dt(args))] + stats.as_rows()
    out.write(key_value_lines(rows))
    _emit(args, ("key", "value"), rows, seeds={"master": args.seed})
    if args.dump is not None:
        labels = DETECTION_LABELS[args.detection]
        with open(args.dump, "w", encoding="utf-8") as fh:
            for i in range(len(batch.indices)):
                k = int(batch.n_clicks[i])
                rec = {
                    "index": int(batch.indices[i]),
                    "key": int(batch.keys[i]),
                    "clicks": [[float(batch.click_times[i, j]), labels[batch.click_channels[i, j]]]
                               for j in range(k)],
                }
                fh.write(json.dumps(rec) + "\n")


def cmd_validate(args, out) -> None:
    params = params_from(args)
    dts = args.dt or [1e-3, 5e-4]
    study = convergence_study(params, named_state(args.state, params), dts, args.horizon)
    pairs = []
    for dt, e, s in zip(study.dts, study.errors, study.survival_errors):
        pairs += [(f"error_dt_{dt:g}", e), (f"survival_error_dt_{dt:g}", s)]
    for i, (r, o) in enumerate(zip(study.ratios, study.orders)):
        pairs += [(f"ratio_{i}", r), (f"order_{i}", o)]
    out.write(key_value_lines(pairs))
    _emit(args, ("dt", "max_error", "survival_error"),
          list(zip(study.dts, study.errors, study.survival_errors)))


COMMANDS = {
    "rates": cmd_rates,
    "kraus": cmd_kraus,
    "emit1": cmd_emit1,
    "ratio1": cmd_ratio1,
    "two-photon": cmd_two_photon,
    "noon": cmd_noon,
    "sweep": cmd_sweep,
    "trajectories": cmd_trajectories,
    "validate": cmd_validate,
}


def args_command(argv) -> str:
    argv = sys.argv[1:] if argv is None else argv
    return next((a for a in argv if a in COMMANDS), "")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        COMMANDS[args.command](args, out)
    except (CliError, ValueError, OSError) as exc:
        print(f"wgpair {args_command(argv)}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
