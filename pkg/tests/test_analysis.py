import math

import numpy as np
import pytest

from qsslab import (
    ParameterSet,
    StateVector,
    classify_curvature,
    find_steady_state,
    integrate_adaptive,
    linear_destruction_solution,
    make_base_model,
    make_mechanism_model,
    qss_reduce,
    relaxation_rate,
    time_to_epsilon,
)
from qsslab.errors import (
    InsufficientDataError,
    NoConvergenceError,
    UnsupportedKindError,
    ValidationError,
)
from qsslab.integrate import Trajectory


def sampled_trajectory(fn, times, name="T"):
    times = np.asarray(times, dtype=float)
    values = np.array([fn(t) for t in times])
    return Trajectory(times, values.reshape(-1, 1), (name,), {"scheme": "sampled"})


class TestFindSteadyState:
    def test_linear_destruction(self):
        model = make_base_model("linear-destruction")
        params = ParameterSet(a=10, y=1, gamma=1)
        report = find_steady_state(model, params, StateVector(("T",), [1.0]))
        assert report.values["T"] == pytest.approx(5.0, abs=1e-12)
        assert report.residual <= 1e-12
        assert report.relaxation_rate == pytest.approx(2.0)

    def test_power_destruction_true_root(self):
        model = make_base_model("power-destruction")
        params = ParameterSet(a=1, y=1, gamma=1, n=2)
        report = find_steady_state(model, params, StateVector(("T",), [1.0]))
        assert report.values["T"] == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-9)

    def test_empty_steady_state(self):
        model = make_base_model("healthy")
        report = find_steady_state(model, ParameterSet(a=0, y=1), StateVector(("T",), [1.0]))
        assert report.values["T"] == pytest.approx(0.0, abs=1e-12)

    def test_coupled_agent_two_dimensional(self):
        model = make_base_model("coupled-agent")
        params = ParameterSet(a=1, y=1, x=1, delta_D=1)
        report = find_steady_state(model, params, StateVector(("T", "D"), [1.0, 1.0]))
        phi = (math.sqrt(5) - 1) / 2
        assert report.values["T"] == pytest.approx(phi, abs=1e-10)
        assert report.values["D"] == pytest.approx(phi, abs=1e-10)

    def test_no_root_raises_with_best_iterate(self):
        # dT/dt = a + T^2 has no nonnegative root for a > 0
        from qsslab.core import ModelSystem, ParamSpec

        model = ModelSystem(
            name="rootless", state_names=("T",),
            param_schema=(ParamSpec("a", 0.0, False, None),),
            rhs=lambda t, s, p: np.array([p["a"] + s[0] ** 2]),
        )
        with pytest.raises(NoConvergenceError) as excinfo:
            find_steady_state(model, ParameterSet(a=1.0), StateVector(("T",), [1.0]))
        assert excinfo.value.best is not None

    def test_invalid_params_rejected(self):
        model = make_base_model("healthy")
        with pytest.raises(ValidationError):
            find_steady_state(model, ParameterSet(a=1), StateVector(("T",), [1.0]))


class TestTimeToEpsilon:
    def test_healthy_exponential(self):
        model = make_base_model("healthy")
        t = time_to_epsilon(model, ParameterSet(a=1, y=1), StateVector(("T",), [0.0]),
                            math.exp(-3))
        assert t == pytest.approx(3.0, abs=0.03)

    def test_linear_destruction_is_faster(self):
        model = make_base_model("linear-destruction")
        t = time_to_epsilon(model, ParameterSet(a=1, y=1, gamma=1),
                            StateVector(("T",), [0.0]), math.exp(-3))
        assert t == pytest.approx(1.5, abs=0.015)

    def test_start_at_steady_state_gives_zero(self):
        model = make_base_model("logistic-source")
        t = time_to_epsilon(model, ParameterSet(a=4, y=0, gamma=1),
                            StateVector(("T",), [2.0]), 0.5)
        assert t == 0.0

    @pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 1.0, 2.0, 4.0])
    @pytest.mark.parametrize("kind", ["healthy", "linear-destruction"])
    def test_agrees_with_rate_within_one_percent(self, kind, gamma):
        if kind == "healthy":
            params = ParameterSet(a=1, y=1 + gamma)  # same family of rates
        else:
            params = ParameterSet(a=1, y=1, gamma=gamma)
        model = make_base_model(kind)
        epsilon = 0.01
        measured = time_to_epsilon(model, params, StateVector(("T",), [0.0]), epsilon)
        expected = -math.log(epsilon) / relaxation_rate(kind, params)
        assert measured == pytest.approx(expected, rel=0.01)

    def test_epsilon_domain(self):
        model = make_base_model("healthy")
        with pytest.raises(ValidationError):
            time_to_epsilon(model, ParameterSet(a=1, y=1), StateVector(("T",), [0.0]), 1.5)


class TestClassifyCurvature:
    def test_exponential_approach_decelerates(self):
        rate = 2.0
        times = np.linspace(0, 5 / rate, 64)
        traj = sampled_trajectory(lambda t: linear_destruction_solution(1, 1, 1, 4.0, t), times)
        verdict = classify_curvature(traj, "T")
        assert verdict.curvature_class == "decelerating-decline"
        assert verdict.evidence["positive_fraction"] >= 0.9

    def test_constant_is_flat(self):
        traj = sampled_trajectory(lambda t: 3.0, np.linspace(0, 1, 16))
        assert classify_curvature(traj, "T").curvature_class == "flat"

    def test_accelerating_decline_detected(self):
        # e^{+t}-shaped runaway fall: second differences all negative
        traj = sampled_trajectory(lambda t: 2.0 - 0.1 * math.exp(t), np.linspace(0, 3, 64))
        verdict = classify_curvature(traj, "T")
        assert verdict.curvature_class == "accelerating-decline"

    def test_non_monotonic_detected(self):
        traj = sampled_trajectory(lambda t: math.cos(3 * t), np.linspace(0, 6, 128))
        assert classify_curvature(traj, "T").curvature_class == "non-monotonic"

    def test_explicit_window(self):
        traj = sampled_trajectory(lambda t: 2.0 - 0.1 * math.exp(t), np.linspace(0, 3, 256))
        verdict = classify_curvature(traj, "T", window=(1.0, 2.5))
        assert verdict.curvature_class == "accelerating-decline"
        assert verdict.window[0] >= 1.0 - 1e-9 and verdict.window[1] <= 2.5 + 1e-9

    def test_too_few_points(self):
        traj = sampled_trajectory(lambda t: 1.0 - t, np.linspace(0, 1, 8))
        with pytest.raises(InsufficientDataError):
            classify_curvature(traj, "T", window=(0.0, 0.2))

    def test_mechanism_collapse_window_accelerates(self):
        from qsslab.claims import collapse_window

        model = make_mechanism_model("bcell-depletion")
        from qsslab import default_horizon, default_params, default_state

        params = default_params("bcell-depletion")
        traj = integrate_adaptive(model, params, default_state("bcell-depletion"),
                                  0.0, default_horizon("bcell-depletion"),
                                  rtol=1e-8, atol=1e-12)
        window = collapse_window(traj, "T")
        verdict = classify_curvature(traj, "T", window=window)
        assert verdict.curvature_class == "accelerating-decline"


class TestQssReduce:
    def test_maps_to_quadratic_destruction(self):
        model = make_base_model("coupled-agent")
        reduced, params = qss_reduce(model, ParameterSet(a=1, y=1, x=1, delta_D=10))
        assert reduced.kind == "power-destruction"
        assert params["gamma"] == pytest.approx(0.1)
        assert params["n"] == 2.0

    def test_zero_coupling_gives_healthy(self):
        model = make_base_model("coupled-agent")
        reduced, params = qss_reduce(model, ParameterSet(a=1, y=1, x=0, delta_D=5))
        assert reduced.kind == "healthy"
        assert params.as_dict() == {"a": 1.0, "y": 1.0}

    def test_wrong_kind_refused(self):
        with pytest.raises(UnsupportedKindError):
            qss_reduce(make_base_model("healthy"), ParameterSet(a=1, y=1))

    def test_reduction_error_within_one_percent(self):
        params = ParameterSet(a=1, y=1, x=1, delta_D=100)
        model = make_base_model("coupled-agent")
        T0 = 2.0
        state0 = StateVector(("T", "D"), [T0, T0 / 100.0])
        full = integrate_adaptive(model, params, state0, 0.0, 10.0, rtol=1e-8, atol=1e-12)
        reduced, reduced_params = qss_reduce(model, params)
        red = integrate_adaptive(reduced, reduced_params, StateVector(("T",), [T0]),
                                 0.0, 10.0, rtol=1e-8, atol=1e-12)
        red_T = np.interp(full.times, red.times, red.component("T"))
        T = full.component("T")
        assert np.max(np.abs(T - red_T)) <= 0.01 * (T.max() - T.min())
