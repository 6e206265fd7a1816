"""Core model abstraction: parameter sets, state vectors, and ODE systems.

A ``ModelSystem`` bundles an ordered list of state variables with a pure
right-hand-side function and a parameter schema.  Everything is immutable
after construction and safe to share across threads; ``eval_rhs`` never
mutates its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import ParameterError, ShapeError


class ParameterSet:
    """Immutable named map of rate constants.

    Values must be finite.  Lookup of a name that is not present raises
    ``ParameterError`` -- there are no silent defaults at this level
    (schema defaults are applied by ``ModelSystem.resolve_params``).
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[str, float] | None = None, **kwargs: float):
        merged: dict[str, float] = {}
        if entries:
            merged.update(entries)
        merged.update(kwargs)
        clean: dict[str, float] = {}
        for name, value in merged.items():
            v = float(value)
            if not math.isfinite(v):
                raise ParameterError(f"parameter {name!r} must be finite, got {value!r}")
            clean[str(name)] = v
        object.__setattr__(self, "_entries", clean)

    def __setattr__(self, name, value):
        raise AttributeError("ParameterSet is immutable")

    def __getitem__(self, name: str) -> float:
        try:
            return self._entries[name]
        except KeyError:
            raise ParameterError(f"undeclared parameter {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, ParameterSet) and self._entries == other._entries

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in sorted(self._entries.items()))
        return f"ParameterSet({inner})"

    def items(self):
        return self._entries.items()

    def as_dict(self) -> dict[str, float]:
        return dict(self._entries)

    def with_updates(self, **kwargs: float) -> "ParameterSet":
        merged = dict(self._entries)
        merged.update(kwargs)
        return ParameterSet(merged)


class StateVector:
    """Ordered, named vector of real components.

    Used both for states (concentrations) and for derivatives returned by
    ``eval_rhs``, so sign is unconstrained here; nonnegativity of initial
    conditions is checked by ``validate``.
    """

    __slots__ = ("names", "values")

    def __init__(self, names: Iterable[str], values):
        names = tuple(str(n) for n in names)
        vals = np.asarray(values, dtype=float).reshape(-1)
        if len(names) != vals.size:
            raise ShapeError(f"{len(names)} names but {vals.size} values")
        if len(set(names)) != len(names):
            raise ShapeError(f"duplicate component names in {names}")
        if not np.all(np.isfinite(vals)):
            raise ShapeError("state components must be finite")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    def __getitem__(self, name: str) -> float:
        try:
            return float(self.values[self.names.index(name)])
        except ValueError:
            raise ShapeError(f"no component named {name!r}") from None

    def __len__(self) -> int:
        return len(self.names)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={v:.6g}" for n, v in zip(self.names, self.values))
        return f"StateVector({inner})"

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}


@dataclass(frozen=True)
class ParamSpec:
    """Schema entry for one parameter.

    ``minimum``/``exclusive`` encode the admissible range (``minimum=None``
    means unconstrained sign).  ``default=None`` marks the parameter as
    required.
    """

    name: str
    minimum: float | None = 0.0
    exclusive: bool = False
    default: float | None = None

    @property
    def nonneg(self) -> bool:
        return self.minimum is not None and self.minimum >= 0.0

    def check(self, value: float) -> str | None:
        """Return a violation message, or None if the value is admissible."""
        if self.minimum is None:
            return None
        if self.exclusive:
            if not value > self.minimum:
                return f"{self.name} must be > {self.minimum:g}, got {value:g}"
        elif not value >= self.minimum:
            return f"{self.name} must be >= {self.minimum:g}, got {value:g}"
        return None


RhsFunction = Callable[[float, np.ndarray, Mapping[str, float]], np.ndarray]


@dataclass(frozen=True)
class ModelSystem:
    """An autonomous (or, for the drifting-virulence model, time-forced) ODE system.

    ``rhs(t, values, params)`` must be pure and return an array with the
    declared state dimension.  ``equation`` is a human-readable rendering of
    the system used by the CLI catalog listing.
    """

    name: str
    state_names: tuple[str, ...]
    param_schema: tuple[ParamSpec, ...]
    rhs: RhsFunction
    time_dependent: bool = False
    equation: str = ""
    kind: str | None = None
    slow_rate_params: tuple[str, ...] = ()
    param_resolver: Callable[[Mapping[str, float]], dict[str, float]] | None = field(
        default=None, repr=False
    )

    @property
    def dimension(self) -> int:
        return len(self.state_names)

    def schema_for(self, name: str) -> ParamSpec | None:
        for spec in self.param_schema:
            if spec.name == name:
                return spec
        return None

    def resolve_params(self, params: ParameterSet) -> dict[str, float]:
        """Apply defaults and alternative parameterizations; raise on a missing

        required parameter.  Schema range checks live in ``validate``; this
        only guarantees every declared name has a value.
        """
        raw = params.as_dict()
        if self.param_resolver is not None:
            raw = self.param_resolver(raw)
        resolved: dict[str, float] = {}
        for spec in self.param_schema:
            if spec.name in raw:
                resolved[spec.name] = raw[spec.name]
            elif spec.default is not None:
                resolved[spec.name] = spec.default
            else:
                raise ParameterError(
                    f"missing parameter {spec.name!r} for model {self.name!r}"
                )
        return resolved


def eval_rhs(model: ModelSystem, t: float, state: StateVector, params: ParameterSet) -> StateVector:
    """Evaluate the model derivative at (t, state).  Pure; no mutation.

    Raises ``ShapeError`` on dimension mismatch and ``ParameterError`` when a
    schema parameter is absent.
    """
    if state.names != model.state_names:
        raise ShapeError(
            f"state components {state.names} do not match model states {model.state_names}"
        )
    resolved = model.resolve_params(params)
    out = np.asarray(model.rhs(float(t), state.values, resolved), dtype=float).reshape(-1)
    if out.size != model.dimension:
        raise ShapeError(
            f"rhs returned {out.size} components for {model.dimension}-dimensional model"
        )
    return StateVector(model.state_names, out)


def validate(model: ModelSystem, params: ParameterSet, state0: StateVector | None = None) -> list[str]:
    """Collect every violation: missing/out-of-range parameters, wrong state

    dimension, non-finite or negative initial components.  An empty list
    means the combination is valid.
    """
    violations: list[str] = []
    raw = params.as_dict()
    if model.param_resolver is not None:
        try:
            raw = model.param_resolver(raw)
        except ParameterError as exc:
            violations.append(str(exc))
    for spec in model.param_schema:
        if spec.name in raw:
            value = raw[spec.name]
        elif spec.default is not None:
            value = spec.default
        else:
            violations.append(f"missing parameter {spec.name!r}")
            continue
        message = spec.check(value)
        if message:
            violations.append(message)
    if state0 is not None:
        if state0.names != model.state_names:
            violations.append(
                f"initial state components {state0.names} do not match model "
                f"states {model.state_names}"
            )
        else:
            for name, value in zip(state0.names, state0.values):
                if not np.isfinite(value):
                    violations.append(f"initial {name} is not finite")
                elif value < 0:
                    violations.append(f"initial {name} is negative ({value:g})")
    return violations
