"""Named, machine-checkable experiments over parameter grids.

Five claims are registered:

``destruction-lowers-and-hastens``
    Across every destruction variant, raising the destruction strength
    lowers the steady state AND shortens the time to reach it.  The swept
    legs: linear destruction, superlinear destruction (n = 2, 3), homeostatic
    model with the quadratic brake raised, homeostatic model with the net
    proliferation lowered.

``destruction-only-decelerates``
    Every destruction-only trajectory started above its steady state
    classifies as decelerating-decline: no parameter choice produces an
    accelerating fall.

``aids-curve-needs-feedback``
    The four slow-feedback mechanisms produce an accelerating-decline
    verdict on their collapse window, while no destruction-only grid point
    does.

``qss-reduction-valid``
    With a fast destroyer agent (delta_D/y in {100, 1000}) the full
    two-compartment trajectory and its quasi-steady-state reduction agree
    within 1% of the T range in sup-norm on [0, 10/y].

``mechanism-satisfies-conditions``
    Each mechanism destroys T only indirectly, its slow rates are at most
    y/100, its latent plateau spans at least 50/y, and its per-capita
    removal rate never decreases while T falls on the collapse window.

Every claim is a deterministic predicate: re-running with identical
configuration reproduces the report bit for bit (reports carry no
timestamps).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import classify_curvature, find_steady_state, time_to_epsilon
from .catalog import (
    MechanismKind,
    default_horizon,
    default_params,
    default_state,
    make_base_model,
    make_mechanism_model,
)
from .core import ModelSystem, ParameterSet, StateVector
from .errors import QsslabError, UsageError
from .integrate import Trajectory, integrate_adaptive

STRENGTH_GRID = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
EPSILON = 0.01
_REL_TOL = 1e-9  # strictness tolerance for "strictly decreasing"
_SOLVER = {"rtol": 1e-8, "atol": 1e-12}


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep request for the ``sweep`` operation."""

    model_kind: str
    base_params: ParameterSet
    sweep_param: str
    grid: tuple[float, ...]
    initial_state: StateVector | None = None
    metrics: tuple[str, ...] = ("T*", "t_eps")

    def __post_init__(self):
        grid = tuple(float(v) for v in self.grid)
        if len(grid) < 2:
            raise UsageError("sweep grid needs at least 2 values")
        if any(not math.isfinite(v) for v in grid):
            raise UsageError("sweep grid values must be finite")
        if list(grid) != sorted(grid):
            raise UsageError("sweep grid values must be sorted ascending")
        object.__setattr__(self, "grid", grid)
        known = {"T*", "T*_formula", "T*_approx", "t_eps", "rate", "curvature"}
        bad = [m for m in self.metrics if m not in known]
        if bad:
            raise UsageError(f"unknown metrics {bad}; known: {sorted(known)}")


@dataclass(frozen=True)
class ClaimReport:
    """Verdict plus per-grid-point evidence for one registered claim."""

    claim_id: str
    verdict: str  # "pass" | "fail"
    grid: list = field(default_factory=list)
    narrative: str = ""
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "claim_id": self.claim_id,
            "verdict": self.verdict,
            "narrative": self.narrative,
            "grid": self.grid,
            "provenance": dict(sorted(self.provenance.items())),
        }


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------

def collapse_window(trajectory: Trajectory, component: str = "T") -> tuple[float, float]:
    """The collapse window of a falling trajectory: from the time the fall
    reaches 10% of its total range to the moment of peak decline rate.

    For a decline whose rate only ever decreases (every destruction-only
    model) the peak rate sits at the start, so this window is degenerate;
    a non-degenerate window is itself a signature of rate build-up.
    """
    values = trajectory.component(component)
    times = trajectory.times
    hi = float(values.max())
    lo = float(values.min())
    span = hi - lo
    below = np.nonzero(values < hi - 0.1 * span)[0]
    ia = max(int(below[0]) - 1, 0) if below.size else 0
    slopes = np.gradient(values, times)
    ib = ia + int(np.argmin(slopes[ia:]))
    return float(times[ia]), float(times[ib])


def per_capita_removal(model: ModelSystem, params: ParameterSet,
                       trajectory: Trajectory) -> np.ndarray:
    """r(t) = (a - y*T - dT/dt) / T along a trajectory: the total removal
    pressure on T beyond baseline death, per cell.  dT/dt is evaluated
    exactly from the model right-hand side at the stored states."""
    p = model.resolve_params(params)
    a, y = p["a"], p["y"]
    T = trajectory.component("T")
    out = np.empty(len(trajectory))
    for i, t in enumerate(trajectory.times):
        dT = float(model.rhs(float(t), trajectory.states[i], p)[0])
        out[i] = (a - y * T[i] - dT) / T[i]
    return out


_MECH_CACHE: dict = {}


def mechanism_trajectory(kind: MechanismKind | str,
                         overrides: dict | None = None) -> tuple[ModelSystem, ParameterSet, Trajectory]:
    """Simulate a mechanism from its chronic default state over its default
    horizon (cached: claims share these runs)."""
    kind = MechanismKind(str(kind)) if not isinstance(kind, MechanismKind) else kind
    params = default_params(kind)
    if overrides:
        applicable = {k: v for k, v in overrides.items() if k in params}
        if applicable:
            params = params.with_updates(**applicable)
    key = (kind.value, tuple(sorted(params.items())))
    if key not in _MECH_CACHE:
        model = make_mechanism_model(kind, params)
        traj = integrate_adaptive(
            model, params, default_state(kind), 0.0, default_horizon(kind), **_SOLVER
        )
        _MECH_CACHE[key] = (model, params, traj)
    return _MECH_CACHE[key]


def _strictly_decreasing(values) -> bool:
    for prev, cur in zip(values, values[1:]):
        if not (prev - cur > _REL_TOL * max(abs(prev), abs(cur), 1e-300)):
            return False
    return True


# ---------------------------------------------------------------------------
# Destruction-variant legs (shared by the ordering and curvature claims)
# ---------------------------------------------------------------------------

def _destruction_legs():
    """Families of models indexed by a destruction strength s >= 0.

    Returns (leg name, kind, params(s), T0) tuples; T0 is twice the baseline
    (s = 0) steady state of the family.
    """
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    return (
        ("linear", "linear-destruction",
         lambda s: ParameterSet(a=1.0, y=1.0, gamma=s), 2.0),
        ("power-n2", "power-destruction",
         lambda s: ParameterSet(a=1.0, y=1.0, gamma=s, n=2.0), 2.0),
        ("power-n3", "power-destruction",
         lambda s: ParameterSet(a=1.0, y=1.0, gamma=s, n=3.0), 2.0),
        ("logistic-gamma-raised", "logistic-source",
         lambda s: ParameterSet(a=1.0, y=0.0, gamma=1.0 + s), 2.0),
        ("logistic-y-lowered", "logistic-proliferation",
         lambda s: ParameterSet(a=1.0, y=1.0 - s, gamma=1.0), 2.0 * golden),
    )


def _claim_lowers_and_hastens(overrides=None) -> ClaimReport:
    rows = []
    failures = []
    for leg, kind, params_of, T0 in _destruction_legs():
        t_stars = []
        t_epss = []
        for s in STRENGTH_GRID:
            params = params_of(s)
            if overrides:
                applicable = {k: v for k, v in overrides.items() if k in params}
                params = params.with_updates(**applicable)
            model = make_base_model(kind, params)
            state0 = StateVector(("T",), [T0])
            report = find_steady_state(model, params, state0)
            t_star = float(report.values.values[0])
            t_eps = time_to_epsilon(model, params, state0, EPSILON)
            t_stars.append(t_star)
            t_epss.append(t_eps)
            rows.append({
                "leg": leg, "model": kind, "strength": s,
                "T_star": t_star, "t_eps": t_eps,
            })
        if not _strictly_decreasing(t_stars):
            failures.append(f"{leg}: T* not strictly decreasing: {t_stars}")
        if not _strictly_decreasing(t_epss):
            failures.append(f"{leg}: t_eps not strictly decreasing: {t_epss}")
    verdict = "pass" if not failures else "fail"
    narrative = (
        "Raising the destruction strength lowered the steady state and shortened "
        f"the approach time (epsilon = {EPSILON:g}) across every variant."
        if not failures else
        "Ordering violated: " + " | ".join(failures) + ". The steady state always "
        "drops with destruction strength, but the relative approach time can grow "
        "when the net proliferation rate is lowered, because the terminal "
        "relaxation rate sqrt(y^2 + 4*a*gamma) shrinks as y falls toward zero; "
        "only the late, near-steady-state stage is slower."
    )
    return ClaimReport(
        "destruction-lowers-and-hastens", verdict, rows, narrative,
        {"epsilon": EPSILON, "grid": list(STRENGTH_GRID), "protocol":
         "T0 = 2x baseline steady state per leg", **_SOLVER},
    )


def _destruction_grid_points(overrides=None):
    """(label, model, params, T0 vector) combinations for the curvature claim."""
    points = []
    for leg, kind, params_of, _T0 in _destruction_legs():
        for s in STRENGTH_GRID:
            params = params_of(s)
            if overrides:
                applicable = {k: v for k, v in overrides.items() if k in params}
                params = params.with_updates(**applicable)
            points.append((f"{leg}[s={s:g}]", kind, params))
    for g_eff in (0.25, 1.0):
        params = ParameterSet(a=1.0, y=1.0, x=10.0 * g_eff, delta_D=10.0)
        points.append((f"coupled-agent[x/delta_D={g_eff:g}]", "coupled-agent", params))
    return points


def _claim_destruction_decelerates(overrides=None) -> ClaimReport:
    rows = []
    failures = []
    for label, kind, params in _destruction_grid_points(overrides):
        try:
            model = make_base_model(kind, params)
            if model.dimension == 1:
                guess = StateVector(("T",), [1.0])
            else:
                g_eff = params["x"] / params["delta_D"]
                guess = StateVector(("T", "D"), [1.0, g_eff])
            ss = find_steady_state(model, params, guess)
            t_star = ss.values.values[0]
            scale = 2.0
            if model.dimension == 1:
                state0 = StateVector(("T",), [scale * t_star])
            else:
                state0 = StateVector(
                    ("T", "D"),
                    [scale * t_star, scale * ss.values.values[1]],
                )
            horizon = 8.0 / ss.relaxation_rate
            traj = integrate_adaptive(model, params, state0, 0.0, horizon, **_SOLVER)
            verdict = classify_curvature(traj, "T")
            rows.append({
                "point": label, "T_star": float(t_star),
                "class": verdict.curvature_class,
                "evidence": verdict.evidence,
            })
            if verdict.curvature_class != "decelerating-decline":
                failures.append(f"{label} -> {verdict.curvature_class}")
        except QsslabError as exc:
            rows.append({"point": label, "error": str(exc)})
            failures.append(f"{label} -> error: {exc}")
    verdict = "pass" if not failures else "fail"
    narrative = (
        f"All {len(rows)} destruction-only trajectories started above their "
        "steady state flatten as they fall (decelerating-decline); none accelerate."
        if not failures else
        "Unexpected curvature: " + " | ".join(failures)
    )
    return ClaimReport(
        "destruction-only-decelerates", verdict, rows, narrative,
        {"combinations": len(rows), "start": "T0 = 2x steady state", **_SOLVER},
    )


def _claim_needs_feedback(overrides=None) -> ClaimReport:
    rows = []
    failures = []
    for kind in MechanismKind:
        model, params, traj = mechanism_trajectory(kind, overrides)
        window = collapse_window(traj, "T")
        try:
            verdict = classify_curvature(traj, "T", window=window)
            cls = verdict.curvature_class
            evidence = verdict.evidence
        except QsslabError as exc:
            cls = f"error: {exc}"
            evidence = {}
        rows.append({
            "mechanism": kind.value, "collapse_window": list(window),
            "class": cls, "evidence": evidence,
        })
        if cls != "accelerating-decline":
            failures.append(f"{kind.value} -> {cls}")
    base = _claim_destruction_decelerates(overrides)
    accel_in_base = [
        r["point"] for r in base.grid if r.get("class") == "accelerating-decline"
    ]
    rows.append({
        "destruction_only_combinations": len(base.grid),
        "accelerating_among_them": accel_in_base,
    })
    if accel_in_base:
        failures.append(f"destruction-only points accelerated: {accel_in_base}")
    verdict = "pass" if not failures else "fail"
    narrative = (
        "Only the slow positive-feedback mechanisms reproduce the accelerating "
        "long-term fall: every mechanism collapse window classifies "
        "accelerating-decline and no destruction-only trajectory does."
        if not failures else
        "Feedback signature not reproduced: " + " | ".join(failures)
    )
    return ClaimReport(
        "aids-curve-needs-feedback", verdict, rows, narrative,
        {"window": "10% of fall to peak decline rate", **_SOLVER},
    )


def _claim_qss_reduction(overrides=None) -> ClaimReport:
    from .analysis import qss_reduce

    rows = []
    failures = []
    cases = [(100.0, 100.0), (1000.0, 1000.0), (100.0, 1.0)]
    for delta_D, x in cases:
        params = ParameterSet(a=1.0, y=1.0, x=x, delta_D=delta_D)
        if overrides:
            applicable = {k: v for k, v in overrides.items() if k in params}
            params = params.with_updates(**applicable)
        model = make_base_model("coupled-agent", params)
        g_eff = params["x"] / params["delta_D"]
        T0 = 2.0
        state0 = StateVector(("T", "D"), [T0, g_eff * T0])
        full = integrate_adaptive(model, params, state0, 0.0, 10.0, **_SOLVER)
        reduced_model, reduced_params = qss_reduce(model, params)
        red = integrate_adaptive(
            reduced_model, reduced_params, StateVector(("T",), [T0]), 0.0, 10.0,
            **_SOLVER,
        )
        red_on_full = np.interp(full.times, red.times, red.component("T"))
        T_full = full.component("T")
        t_range = float(T_full.max() - T_full.min())
        gap = float(np.max(np.abs(T_full - red_on_full)))
        rel = gap / t_range if t_range > 0 else float("inf")
        rows.append({
            "delta_D": params["delta_D"], "x": params["x"], "gamma_eff": g_eff,
            "sup_gap": gap, "T_range": t_range, "relative_gap": rel,
        })
        if rel > 0.01:
            failures.append(
                f"delta_D={params['delta_D']:g}, x={params['x']:g}: gap {rel:.3%}"
            )
    verdict = "pass" if not failures else "fail"
    narrative = (
        "With a fast destroyer agent the full two-compartment trajectory and its "
        "quasi-steady-state reduction agree within 1% of the T range."
        if not failures else
        "Reduction gap too large: " + " | ".join(failures)
    )
    return ClaimReport(
        "qss-reduction-valid", verdict, rows, narrative,
        {"horizon": 10.0, "tolerance": "1% of T range, sup-norm", **_SOLVER},
    )


def _claim_mechanism_conditions(overrides=None) -> ClaimReport:
    rows = []
    failures = []
    for kind in MechanismKind:
        model, params, traj = mechanism_trajectory(kind, overrides)
        p = model.resolve_params(params)
        y = p["y"]

        # condition 1: destruction is indirect -- at fixed compartment levels
        # the per-capita removal rate does not depend on T
        state = default_state(kind)
        removal = per_capita_removal(model, params, _two_point_traj(model, state))
        halved = StateVector(
            state.names, [v * (0.5 if n == "T" else 1.0)
                          for n, v in zip(state.names, state.values)]
        )
        removal_h = per_capita_removal(model, params, _two_point_traj(model, halved))
        indirect = abs(removal[0] - removal_h[0]) <= 1e-9 * max(abs(removal[0]), 1e-12)

        # condition 2: designated slow rates at most y/100
        slow_values = {name: p[name] for name in model.slow_rate_params}
        slow_ok = all(v <= y / 100.0 + 1e-15 for v in slow_values.values())

        # latent plateau: time until T first drops below 90% of its maximum
        T = traj.component("T")
        below = np.nonzero(T < 0.9 * T.max())[0]
        plateau = float(traj.times[below[0]]) if below.size else float(traj.times[-1])
        plateau_ok = plateau >= 50.0 / y

        # condition 3: per-capita removal non-decreasing while T falls
        # on the collapse window
        t_a, t_b = collapse_window(traj, "T")
        mask = (traj.times >= t_a) & (traj.times <= t_b)
        r = per_capita_removal(model, params, traj)[mask]
        drops = np.nonzero(
            np.diff(r) < -1e-6 * np.maximum(np.abs(r[:-1]), 1e-12)
        )[0]
        removal_ok = drops.size == 0

        rows.append({
            "mechanism": kind.value,
            "indirect_destruction": bool(indirect),
            "slow_rates": slow_values, "slow_ok": bool(slow_ok),
            "plateau": plateau, "plateau_required": 50.0 / y,
            "removal_monotone": bool(removal_ok),
            "collapse_window": [t_a, t_b],
        })
        for ok, what in ((indirect, "indirect destruction"), (slow_ok, "slow rates"),
                         (plateau_ok, "latent plateau"), (removal_ok, "removal trend")):
            if not ok:
                failures.append(f"{kind.value}: {what}")
    verdict = "pass" if not failures else "fail"
    narrative = (
        "Every mechanism destroys T only through other compartments, runs its "
        "slow arm at no more than y/100, holds a latent plateau of at least 50/y, "
        "and its per-capita removal rate never drops while T falls."
        if not failures else
        "Conditions violated: " + " | ".join(failures)
    )
    return ClaimReport(
        "mechanism-satisfies-conditions", verdict, rows, narrative,
        {"plateau_rule": "first drop below 90% of max", **_SOLVER},
    )


def _two_point_traj(model: ModelSystem, state: StateVector) -> Trajectory:
    """Degenerate two-point trajectory used to evaluate removal at one state."""
    return Trajectory(
        np.array([0.0, 1.0]),
        np.vstack([state.values, state.values]),
        model.state_names,
        {"scheme": "probe"},
    )


CLAIMS = {
    "destruction-lowers-and-hastens": _claim_lowers_and_hastens,
    "destruction-only-decelerates": _claim_destruction_decelerates,
    "aids-curve-needs-feedback": _claim_needs_feedback,
    "qss-reduction-valid": _claim_qss_reduction,
    "mechanism-satisfies-conditions": _claim_mechanism_conditions,
}


def run_claim(claim_id: str, overrides: dict | None = None) -> ClaimReport:
    """Run one registered claim; ``overrides`` replaces matching parameters
    wherever a grid model's schema declares them (used to probe falsified
    configurations)."""
    try:
        protocol = CLAIMS[claim_id]
    except KeyError:
        known = ", ".join(sorted(CLAIMS))
        raise UsageError(f"unknown claim {claim_id!r}; registered claims: {known}") from None
    return protocol(overrides)


def sweep(spec: SweepSpec) -> list[dict]:
    """Evaluate the requested metrics at every grid value of one parameter.

    Rows are ordered by grid value; numerical failures are recorded in the
    row (``error`` key) rather than aborting the sweep.
    """
    from .catalog import make_model
    from .closedform import power_approx_steady, steady_state_formula

    rows = []
    for value in spec.grid:
        params = spec.base_params.with_updates(**{spec.sweep_param: value})
        row: dict = {spec.sweep_param: value}
        try:
            model = make_model(spec.model_kind, params)
            state0 = spec.initial_state or default_state(spec.model_kind)
            ss = None
            for metric in spec.metrics:
                try:
                    if metric in ("T*", "t_eps", "rate", "curvature") and ss is None:
                        ss = find_steady_state(model, params, state0)
                    if metric == "T*":
                        row[metric] = float(ss.values.values[0])
                    elif metric == "rate":
                        row[metric] = ss.relaxation_rate
                    elif metric == "t_eps":
                        row[metric] = time_to_epsilon(model, params, state0, EPSILON)
                    elif metric == "curvature":
                        horizon = 8.0 / ss.relaxation_rate
                        traj = integrate_adaptive(
                            model, params, state0, 0.0, horizon, **_SOLVER
                        )
                        row[metric] = classify_curvature(traj, model.state_names[0]).curvature_class
                    elif metric == "T*_formula":
                        result = steady_state_formula(spec.model_kind, params)
                        row[metric] = result[0] if isinstance(result, tuple) else result
                    elif metric == "T*_approx":
                        row[metric] = power_approx_steady(
                            params["a"], params["y"], params["gamma"],
                            params["n"] if "n" in params else 1.0,
                        )
                except QsslabError as exc:
                    row[f"{metric}_error"] = str(exc)
        except QsslabError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows
