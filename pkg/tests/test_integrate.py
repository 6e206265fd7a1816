import math

import numpy as np
import pytest

from qsslab import (
    ParameterSet,
    StateVector,
    integrate_adaptive,
    integrate_fixed,
    linear_solution,
    logistic_solution,
    make_base_model,
    qss_reduce,
)
from qsslab.core import ModelSystem, ParamSpec
from qsslab.errors import BlowupError, DomainError, StiffnessError, ValidationError
from qsslab.integrate import Trajectory


def blowup_model():
    def rhs(t, s, p):
        with np.errstate(over="ignore"):
            return np.array([p["g"] * s[0] ** 2])

    return ModelSystem(
        name="quadratic-growth",
        state_names=("T",),
        param_schema=(ParamSpec("g", 0.0, False, None),),
        rhs=rhs,
    )


class TestFixedStep:
    def test_pure_decay_endpoint(self):
        model = make_base_model("healthy")
        traj = integrate_fixed(model, ParameterSet(a=0, y=1),
                               StateVector(("T",), [1.0]), 0.0, 1.0, 0.01)
        assert traj.component("T")[-1] == pytest.approx(math.exp(-1), abs=1e-8)

    def test_fourth_order_convergence(self):
        model = make_base_model("healthy")
        params = ParameterSet(a=1, y=1)
        state0 = StateVector(("T",), [0.0])

        def endpoint_error(dt):
            traj = integrate_fixed(model, params, state0, 0.0, 5.0, dt)
            return abs(traj.component("T")[-1] - linear_solution(1, 1, 0, 5.0))

        ratio = endpoint_error(0.25) / endpoint_error(0.125)
        assert ratio >= 15.5  # order >= log2(15.5) ~ 3.95

    def test_fixed_point_preserved(self):
        model = make_base_model("healthy")
        traj = integrate_fixed(model, ParameterSet(a=1, y=1),
                               StateVector(("T",), [1.0]), 0.0, 3.0, 0.37)
        assert np.max(np.abs(traj.component("T") - 1.0)) <= 1e-12

    def test_lands_exactly_on_t_end(self):
        model = make_base_model("healthy")
        traj = integrate_fixed(model, ParameterSet(a=1, y=1),
                               StateVector(("T",), [0.5]), 0.0, 1.0, 0.3)
        assert traj.times[-1] == 1.0

    def test_blowup_raises_with_time(self):
        model = blowup_model()
        with pytest.raises(BlowupError) as excinfo:
            integrate_fixed(model, ParameterSet(g=1.0), StateVector(("T",), [1.0]),
                            0.0, 3.0, 0.1)
        assert 0.0 < excinfo.value.time <= 3.0

    def test_precondition_failures(self):
        model = make_base_model("healthy")
        with pytest.raises(DomainError):
            integrate_fixed(model, ParameterSet(a=1, y=1), StateVector(("T",), [1.0]),
                            1.0, 1.0, 0.1)
        with pytest.raises(DomainError):
            integrate_fixed(model, ParameterSet(a=1, y=1), StateVector(("T",), [1.0]),
                            0.0, 1.0, 0.0)
        with pytest.raises(ValidationError):
            integrate_fixed(model, ParameterSet(a=1), StateVector(("T",), [1.0]),
                            0.0, 1.0, 0.1)


class TestAdaptive:
    def test_matches_quadratic_closed_form(self):
        model = make_base_model("logistic-proliferation")
        params = ParameterSet(a=1, y=1, gamma=1)
        traj = integrate_adaptive(model, params, StateVector(("T",), [0.0]),
                                  0.0, 10.0, rtol=1e-10, atol=1e-13)
        worst = max(
            abs(T - logistic_solution(1, 1, 1, 0.0, t))
            for t, T in zip(traj.times, traj.component("T"))
        )
        assert worst <= 1e-8

    def test_stiff_coupled_agent_completes_and_matches_reduction(self):
        params = ParameterSet(a=1, y=1, x=1000.0, delta_D=1000.0)
        model = make_base_model("coupled-agent", params)
        state0 = StateVector(("T", "D"), [2.0, 2.0])
        full = integrate_adaptive(model, params, state0, 0.0, 10.0,
                                  rtol=1e-8, atol=1e-12)
        reduced_model, reduced_params = qss_reduce(model, params)
        red = integrate_adaptive(reduced_model, reduced_params,
                                 StateVector(("T",), [2.0]), 0.0, 10.0,
                                 rtol=1e-8, atol=1e-12)
        red_T = np.interp(full.times, red.times, red.component("T"))
        T = full.component("T")
        gap = np.max(np.abs(T - red_T)) / (T.max() - T.min())
        assert gap <= 0.01

    def test_tiny_span(self):
        model = make_base_model("healthy")
        traj = integrate_adaptive(model, ParameterSet(a=1, y=1),
                                  StateVector(("T",), [0.5]), 0.0, 1e-9,
                                  rtol=1e-8, atol=1e-12)
        # endpoint ~ state0 + rhs * span (one Euler step's worth of motion)
        assert traj.times[-1] == pytest.approx(1e-9, rel=1e-12)
        assert traj.component("T")[-1] == pytest.approx(0.5 + 0.5e-9, abs=1e-15)
        assert len(traj) <= 8

    def test_determinism(self):
        model = make_base_model("logistic-source")
        params = ParameterSet(a=4, y=0, gamma=1)
        runs = [
            integrate_adaptive(model, params, StateVector(("T",), [0.1]), 0.0, 5.0,
                               rtol=1e-9, atol=1e-12)
            for _ in range(2)
        ]
        assert np.array_equal(runs[0].times, runs[1].times)
        assert np.array_equal(runs[0].states, runs[1].states)

    @pytest.mark.parametrize(
        "kind,params,state",
        [
            ("healthy", ParameterSet(a=1, y=1), [0.0]),
            ("linear-destruction", ParameterSet(a=1, y=1, gamma=2), [4.0]),
            ("coupled-agent", ParameterSet(a=1, y=1, x=2, delta_D=4), [2.0, 1.0]),
            ("logistic-source", ParameterSet(a=4, y=0, gamma=1), [0.0]),
        ],
    )
    def test_nonnegativity_preserved(self, kind, params, state):
        model = make_base_model(kind)
        atol = 1e-12
        traj = integrate_adaptive(model, params,
                                  StateVector(model.state_names, state),
                                  0.0, 20.0, rtol=1e-8, atol=atol)
        assert np.min(traj.states) >= -atol

    def test_blowup_or_stiffness_on_singular_problem(self):
        model = blowup_model()
        with pytest.raises((BlowupError, StiffnessError)):
            integrate_adaptive(model, ParameterSet(g=1.0), StateVector(("T",), [1.0]),
                               0.0, 2.0, rtol=1e-8, atol=1e-12)

    def test_bad_tolerances(self):
        model = make_base_model("healthy")
        with pytest.raises(DomainError):
            integrate_adaptive(model, ParameterSet(a=1, y=1),
                               StateVector(("T",), [1.0]), 0.0, 1.0, rtol=0.0)


class TestTrajectory:
    def test_invariants_enforced(self):
        with pytest.raises(ValidationError):
            Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)), ("T",), {})
        with pytest.raises(ValidationError):
            Trajectory(np.array([0.0]), np.zeros((1, 1)), ("T",), {})
        with pytest.raises(ValidationError):
            Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [float("nan")]]), ("T",), {})

    def test_first_state_is_initial_condition(self):
        model = make_base_model("healthy")
        state0 = StateVector(("T",), [0.123456])
        traj = integrate_adaptive(model, ParameterSet(a=1, y=1), state0, 0.0, 1.0)
        assert traj.states[0, 0] == state0.values[0]
        assert traj.times[0] == 0.0

    def test_component_access(self):
        model = make_base_model("coupled-agent")
        params = ParameterSet(a=1, y=1, x=1, delta_D=2)
        traj = integrate_adaptive(model, params, StateVector(("T", "D"), [1.0, 0.5]),
                                  0.0, 1.0)
        assert traj.component("D").shape == traj.times.shape
        with pytest.raises(ValidationError):
            traj.component("V")
