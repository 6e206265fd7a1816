"""Command-line front end.

Subcommands: ``simulate``, ``steady``, ``classify``, ``sweep``, ``check``,
``catalog``.  Exit codes: 0 success (or claim pass), 1 claim fail, 2 usage
error, 3 numerical failure.  Diagnostics go to stderr; data goes only to the
paths given by flags (or stdout for ``catalog``).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import catalog as cat
from .analysis import classify_curvature, find_steady_state
from .claims import CLAIMS, SweepSpec, collapse_window, mechanism_trajectory, run_claim, sweep
from .core import ParameterSet, StateVector
from .dsl import compile_model, default_initial_state, parse_model
from .errors import (
    BlowupError,
    ConvergenceTimeoutError,
    EvaluationError,
    NoConvergenceError,
    ParseError,
    QsslabError,
    SemanticError,
    StiffnessError,
    UsageError,
)
from .integrate import Trajectory, integrate_adaptive, integrate_fixed
from .svg import render_plot

# EvaluationError counts as numerical: it fires while a compiled model is
# being integrated (overflow, division by zero), not while parsing.
_NUMERICAL_ERRORS = (
    BlowupError, StiffnessError, NoConvergenceError, ConvergenceTimeoutError,
    EvaluationError,
)


def _parse_kv(pairs, what):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise UsageError(f"{what} expects name=value, got {pair!r}")
        name, _, value = pair.partition("=")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"{what} {name!r}: {value!r} is not a number") from None
    return out


def _load_model(spec: str):
    """Resolve a --model argument: catalog name or .qssm path."""
    if spec.endswith(".qssm"):
        try:
            with open(spec, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read model file {spec!r}: {exc}") from None
        defn = parse_model(text)
        return compile_model(defn), default_initial_state(defn), None
    names = cat.all_kind_names()
    if spec not in names:
        raise UsageError(
            f"unknown model {spec!r}; catalog: " + ", ".join(names)
            + " (or give a .qssm file path)"
        )
    return cat.make_model(spec), cat.default_state(spec), spec


def _assemble_params(model, kind, param_args):
    given = _parse_kv(param_args, "--param")
    if kind is not None:
        params = cat.default_params(kind)
        return params.with_updates(**given) if given else params
    return ParameterSet(given)


def _assemble_state(model, base_state, init_args):
    given = _parse_kv(init_args, "--init")
    values = dict(zip(base_state.names, base_state.values))
    for name, value in given.items():
        if name not in values:
            raise UsageError(
                f"--init {name!r} is not a state of this model "
                f"(states: {', '.join(base_state.names)})"
            )
        values[name] = value
    return StateVector(base_state.names, [values[n] for n in base_state.names])


def write_trajectory_csv(trajectory: Trajectory, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(trajectory.state_names) + "\n")
        for i in range(len(trajectory)):
            row = [f"{trajectory.times[i]:.17g}"]
            row += [f"{v:.17g}" for v in trajectory.states[i]]
            fh.write(",".join(row) + "\n")


def read_trajectory_csv(path: str) -> Trajectory:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read trajectory {path!r}: {exc}") from None
    if not lines or not lines[0].startswith("t,"):
        raise UsageError(f"{path!r} is not a trajectory CSV (expected header 't,...')")
    names = tuple(lines[0].split(",")[1:])
    times = []
    states = []
    for line in lines[1:]:
        cells = line.split(",")
        times.append(float(cells[0]))
        states.append([float(c) for c in cells[1:]])
    return Trajectory(np.array(times), np.array(states), names, {"scheme": "csv"})


def _write_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    model, base_state, kind = _load_model(args.model)
    params = _assemble_params(model, kind, args.param)
    state0 = _assemble_state(model, base_state, args.init)
    if args.dt is not None:
        traj = integrate_fixed(model, params, state0, args.t0, args.t_end, args.dt)
    else:
        traj = integrate_adaptive(
            model, params, state0, args.t0, args.t_end,
            rtol=args.rtol, atol=args.atol,
        )
    write_trajectory_csv(traj, args.out)
    if args.plot:
        series = [
            (name, traj.times.tolist(), traj.component(name).tolist())
            for name in traj.state_names
        ]
        with open(args.plot, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_plot(series, title=model.name, xlabel="t", ylabel="concentration"))
    return 0


def _cmd_steady(args) -> int:
    model, base_state, kind = _load_model(args.model)
    params = _assemble_params(model, kind, args.param)
    guess = _assemble_state(model, base_state, args.guess)
    report = find_steady_state(model, params, guess)
    _write_json(
        {
            "schema": 1,
            "model": model.name,
            "values": report.values.as_dict(),
            "residual": report.residual,
            "method": report.method,
            "relaxation_rate": report.relaxation_rate,
            "time_to_epsilon": report.time_to_epsilon,
        },
        args.out,
    )
    return 0


def _cmd_classify(args) -> int:
    traj = read_trajectory_csv(args.traj)
    window = None
    if args.window:
        try:
            lo, _, hi = args.window.partition(":")
            window = (float(lo), float(hi))
        except ValueError:
            raise UsageError(f"--window expects t0:t1, got {args.window!r}") from None
    verdict = classify_curvature(traj, args.component, window=window)
    _write_json(
        {
            "schema": 1,
            "component": args.component,
            "class": verdict.curvature_class,
            "window": list(verdict.window),
            "evidence": verdict.evidence,
            "shape_label": verdict.shape_label,
        },
        args.out,
    )
    return 0


def _cmd_sweep(args) -> int:
    model, base_state, kind = _load_model(args.model)
    params = _assemble_params(model, kind, args.param)
    name, _, values = args.sweep.partition("=")
    if not values:
        raise UsageError("--sweep expects name=v1,v2,...")
    try:
        grid = tuple(float(v) for v in values.split(","))
    except ValueError:
        raise UsageError(f"--sweep values must be numbers, got {values!r}") from None
    state0 = _assemble_state(model, base_state, args.init)
    metrics = tuple(m.strip() for m in args.metrics.split(","))
    spec = SweepSpec(
        model_kind=args.model, base_params=params, sweep_param=name.strip(),
        grid=grid, initial_state=state0, metrics=metrics,
    )
    rows = sweep(spec)
    columns = [spec.sweep_param] + [m for m in metrics]
    extras = sorted({k for row in rows for k in row} - set(columns))
    columns += extras
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for col in columns:
                value = row.get(col, "")
                cells.append(f"{value:.17g}" if isinstance(value, float) else str(value))
            fh.write(",".join(cells) + "\n")
    return 0


def _cmd_check(args) -> int:
    overrides = _parse_kv(args.override, "--override") or None
    report = run_claim(args.claim, overrides)
    if args.json:
        _write_json(report.to_json_dict(), args.json)
    if args.plot:
        series = []
        shade = None
        for kind in cat.MechanismKind:
            _, _, traj = mechanism_trajectory(kind, overrides)
            series.append((kind.value, traj.times.tolist(), traj.component("T").tolist()))
            if shade is None:
                shade = collapse_window(traj, "T")
        with open(args.plot, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_plot(
                series, title=args.claim, xlabel="t", ylabel="T",
                shade=shade,
            ))
    print(f"{report.claim_id}: {report.verdict.upper()}", file=sys.stderr)
    print(report.narrative, file=sys.stderr)
    return 0 if report.passed else 1


def _cmd_catalog(_args) -> int:
    for name in cat.all_kind_names():
        model = cat.make_model(name)
        params = cat.default_params(name)
        print(f"{name}")
        print(f"  states:   {', '.join(model.state_names)}")
        print(f"  equation: {model.equation}")
        print(f"  time-dependent: {'yes' if model.time_dependent else 'no'}")
        specs = []
        for spec in model.param_schema:
            text = spec.name
            if spec.minimum is not None:
                text += f" ({'>' if spec.exclusive else '>='} {spec.minimum:g})"
            text += f" = {params[spec.name]:g}"
            specs.append(text)
        print(f"  params:   {'; '.join(specs)}")
        if model.slow_rate_params:
            print(f"  slow rates: {', '.join(model.slow_rate_params)}")
        print()
    print("claims: " + ", ".join(sorted(CLAIMS)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsslab",
        description="Simulate and analyze quasi-steady-state CD4 decline models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a model and write a CSV trajectory")
    sim.add_argument("--model", required=True, help="catalog name or .qssm file")
    sim.add_argument("--param", action="append", metavar="NAME=VALUE")
    sim.add_argument("--init", action="append", metavar="STATE=VALUE")
    sim.add_argument("--t0", type=float, default=0.0)
    sim.add_argument("--t-end", type=float, required=True, dest="t_end")
    sim.add_argument("--dt", type=float, default=None, help="fixed-step RK4 step size")
    sim.add_argument("--rtol", type=float, default=1e-8)
    sim.add_argument("--atol", type=float, default=1e-12)
    sim.add_argument("--out", required=True, help="output CSV path")
    sim.add_argument("--plot", default=None, help="optional SVG path")
    sim.set_defaults(func=_cmd_simulate)

    steady = sub.add_parser("steady", help="locate a steady state")
    steady.add_argument("--model", required=True)
    steady.add_argument("--param", action="append", metavar="NAME=VALUE")
    steady.add_argument("--guess", action="append", metavar="STATE=VALUE")
    steady.add_argument("--out", default=None, help="output JSON path (default stdout)")
    steady.set_defaults(func=_cmd_steady)

    classify = sub.add_parser("classify", help="classify trajectory curvature")
    classify.add_argument("--traj", required=True, help="trajectory CSV path")
    classify.add_argument("--component", default="T")
    classify.add_argument("--window", default=None, metavar="T0:T1")
    classify.add_argument("--out", default=None, help="output JSON path (default stdout)")
    classify.set_defaults(func=_cmd_classify)

    swp = sub.add_parser("sweep", help="sweep one parameter and tabulate metrics")
    swp.add_argument("--model", required=True)
    swp.add_argument("--param", action="append", metavar="NAME=VALUE")
    swp.add_argument("--sweep", required=True, metavar="NAME=V1,V2,...")
    swp.add_argument("--init", action="append", metavar="STATE=VALUE")
    swp.add_argument("--metrics", default="T*,t_eps")
    swp.add_argument("--out", required=True, help="output CSV path")
    swp.set_defaults(func=_cmd_sweep)

    check = sub.add_parser("check", help="run a registered claim")
    check.add_argument("claim", choices=sorted(CLAIMS))
    check.add_argument("--json", default=None, help="write the report JSON here")
    check.add_argument("--override", action="append", metavar="NAME=VALUE",
                       help="override matching parameters in the claim protocol")
    check.add_argument("--plot", default=None, help="write a mechanism overview SVG here")
    check.set_defaults(func=_cmd_check)

    catalog_cmd = sub.add_parser("catalog", help="list models, parameters, defaults")
    catalog_cmd.set_defaults(func=_cmd_catalog)
    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, SemanticError) as exc:
        print(f"model definition error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except QsslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
