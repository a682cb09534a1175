"""Derivative-free and gradient-based minimizers with fixed, reproducible
controls.

Both optimizers speak to an objective through a small protocol:
``energy(t)``, ``gradient(t)``, and live ``energy_evaluations`` /
``gradient_calls`` counters.  The evaluation cap is enforced against the
objective's own counter, so energy evaluations spent inside a
finite-difference gradient count toward the budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np


class ObjectiveProtocol(Protocol):
    def energy(self, t: np.ndarray) -> float: ...
    def gradient(self, t: np.ndarray) -> np.ndarray: ...
    @property
    def energy_evaluations(self) -> int: ...
    @property
    def gradient_calls(self) -> int: ...


@dataclass(frozen=True)
class OptimizerConfig:
    """Termination thresholds shared by both methods."""

    method: str = "lbfgs"
    energy_tolerance: float = 1e-5
    parameter_tolerance: float = 1e-4
    gradient_tolerance: float = 1e-4
    max_evaluations: int = 20000

    def __post_init__(self) -> None:
        if self.method not in ("lbfgs", "nelder_mead"):
            raise ValueError(f"unknown optimizer {self.method!r}")
        for name in ("energy_tolerance", "parameter_tolerance", "gradient_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class VqeResult:
    """Outcome of one variational minimization."""

    optimal_energy: float
    optimal_t: np.ndarray
    energy_evaluations: int
    gradient_calls: int
    converged: bool
    termination: str
    infidelity: float | None = None
    overlap: float | None = None
    exact_energy: float | None = None


class CountingObjective:
    """Adapter giving plain callables the objective protocol."""

    def __init__(self, fn: Callable[[np.ndarray], float],
                 grad: Callable[[np.ndarray], np.ndarray] | None = None):
        self._fn = fn
        self._grad = grad
        self._n_energy = 0
        self._n_grad = 0

    def energy(self, t: np.ndarray) -> float:
        self._n_energy += 1
        return float(self._fn(np.asarray(t, dtype=float)))

    def gradient(self, t: np.ndarray) -> np.ndarray:
        if self._grad is None:
            raise ValueError("no gradient function supplied")
        self._n_grad += 1
        return np.asarray(self._grad(np.asarray(t, dtype=float)), dtype=float)

    @property
    def energy_evaluations(self) -> int:
        return self._n_energy

    @property
    def gradient_calls(self) -> int:
        return self._n_grad


@dataclass
class _Best:
    energy: float = np.inf
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def update(self, energy: float, t: np.ndarray) -> None:
        if energy < self.energy:
            self.energy = energy
            self.t = np.array(t, copy=True)


class _BudgetExhausted(Exception):
    """Internal signal: the evaluation cap would be exceeded."""


def _make_guard(objective: ObjectiveProtocol, config: OptimizerConfig, best: _Best):
    """Budget-checked energy and gradient calls.

    A gradient call that spends energy evaluations internally (central
    differences) declares its cost through ``gradient_energy_cost`` so the
    cap is never overshot.
    """

    def guarded_energy(x: np.ndarray) -> float:
        if objective.energy_evaluations + 1 > config.max_evaluations:
            raise _BudgetExhausted
        value = objective.energy(x)
        best.update(value, x)
        return value

    def guarded_gradient(x: np.ndarray) -> np.ndarray:
        cost = getattr(objective, "gradient_energy_cost", 0)
        if objective.energy_evaluations + cost > config.max_evaluations:
            raise _BudgetExhausted
        return objective.gradient(x)

    return guarded_energy, guarded_gradient


# Nelder-Mead controls: reflection/expansion/contraction/shrink factors and
# the relative (absolute at zero) initial-simplex displacement.
NM_REFLECT = 1.0
NM_EXPAND = 2.0
NM_CONTRACT = 0.5
NM_SHRINK = 0.5
NM_NONZERO_STEP = 0.05
NM_ZERO_STEP = 0.00025


def nelder_mead(
    objective: ObjectiveProtocol, t0: np.ndarray, config: OptimizerConfig
) -> VqeResult:
    """Downhill simplex minimization.

    The initial simplex displaces each coordinate by 5% (0.00025 where the
    start value is zero).  Converges when both the simplex's energy spread
    and its parameter spread fall below the configured tolerances.
    """
    t0 = np.asarray(t0, dtype=float)
    n = t0.size
    if n < 1:
        raise ValueError("need at least one parameter")
    best = _Best()
    evaluate, _ = _make_guard(objective, config, best)

    converged = False
    termination = "max_evaluations"
    try:
        simplex = [t0.copy()]
        for j in range(n):
            vertex = t0.copy()
            vertex[j] = vertex[j] * (1.0 + NM_NONZERO_STEP) if vertex[j] != 0 else NM_ZERO_STEP
            simplex.append(vertex)
        simplex = np.array(simplex)
        values = np.array([evaluate(v) for v in simplex])

        while True:
            order = np.argsort(values, kind="stable")
            simplex = simplex[order]
            values = values[order]
            energy_spread = float(np.max(np.abs(values[1:] - values[0])))
            param_spread = float(np.max(np.abs(simplex[1:] - simplex[0])))
            if energy_spread <= config.energy_tolerance and param_spread <= config.parameter_tolerance:
                converged = True
                termination = "simplex_tolerance"
                break

            centroid = np.mean(simplex[:-1], axis=0)
            worst = simplex[-1]
            reflected = centroid + NM_REFLECT * (centroid - worst)
            f_reflected = evaluate(reflected)
            if f_reflected < values[0]:
                expanded = centroid + NM_EXPAND * (centroid - worst)
                f_expanded = evaluate(expanded)
                if f_expanded < f_reflected:
                    simplex[-1], values[-1] = expanded, f_expanded
                else:
                    simplex[-1], values[-1] = reflected, f_reflected
            elif f_reflected < values[-2]:
                simplex[-1], values[-1] = reflected, f_reflected
            else:
                if f_reflected < values[-1]:
                    contracted = centroid + NM_CONTRACT * (centroid - worst)
                else:
                    contracted = centroid - NM_CONTRACT * (centroid - worst)
                f_contracted = evaluate(contracted)
                if f_contracted < min(f_reflected, values[-1]):
                    simplex[-1], values[-1] = contracted, f_contracted
                else:
                    for k in range(1, n + 1):
                        simplex[k] = simplex[0] + NM_SHRINK * (simplex[k] - simplex[0])
                        values[k] = evaluate(simplex[k])
    except _BudgetExhausted:
        pass

    return VqeResult(
        optimal_energy=best.energy,
        optimal_t=best.t,
        energy_evaluations=objective.energy_evaluations,
        gradient_calls=objective.gradient_calls,
        converged=converged,
        termination=termination,
    )


# L-BFGS controls: history length and Armijo backtracking parameters.
LBFGS_HISTORY = 10
ARMIJO_C1 = 1e-4
ARMIJO_SHRINK = 0.5
ARMIJO_MIN_STEP = 1e-14


def lbfgs(
    objective: ObjectiveProtocol, t0: np.ndarray, config: OptimizerConfig
) -> VqeResult:
    """Limited-memory BFGS with a backtracking Armijo line search.

    Stops on small max-norm gradient, small accepted energy change, small
    accepted step, the evaluation cap, or a failed line search (the last
    two with ``converged=False``).
    """
    x = np.asarray(t0, dtype=float).copy()
    best = _Best()
    evaluate, gradient = _make_guard(objective, config, best)

    converged = False
    termination = "max_evaluations"
    try:
        f = evaluate(x)
        g = gradient(x)
        s_history: list[np.ndarray] = []
        y_history: list[np.ndarray] = []

        while True:
            if float(np.max(np.abs(g))) < config.gradient_tolerance:
                converged = True
                termination = "gradient_tolerance"
                break

            direction = -_two_loop(g, s_history, y_history)
            slope = float(np.dot(g, direction))
            if slope >= 0:  # stale curvature: fall back to steepest descent
                direction = -g
                slope = float(np.dot(g, direction))

            step = 1.0
            accepted = False
            f_new = f
            while step >= ARMIJO_MIN_STEP:
                candidate = x + step * direction
                f_new = evaluate(candidate)
                if f_new <= f + ARMIJO_C1 * step * slope:
                    accepted = True
                    break
                step *= ARMIJO_SHRINK
            if not accepted:
                termination = "line_search_failure"
                break

            x_new = x + step * direction
            g_new = gradient(x_new)
            s = x_new - x
            y = g_new - g
            if float(np.dot(s, y)) > 1e-14:
                s_history.append(s)
                y_history.append(y)
                if len(s_history) > LBFGS_HISTORY:
                    s_history.pop(0)
                    y_history.pop(0)

            delta_f = abs(f_new - f)
            delta_x = float(np.max(np.abs(s)))
            x, f, g = x_new, f_new, g_new
            if delta_f < config.energy_tolerance:
                converged = True
                termination = "energy_tolerance"
                break
            if delta_x < config.parameter_tolerance:
                converged = True
                termination = "parameter_tolerance"
                break
    except _BudgetExhausted:
        termination = "max_evaluations"
        converged = False

    return VqeResult(
        optimal_energy=best.energy,
        optimal_t=best.t,
        energy_evaluations=objective.energy_evaluations,
        gradient_calls=objective.gradient_calls,
        converged=converged,
        termination=termination,
    )


def _two_loop(g: np.ndarray, s_history: list[np.ndarray], y_history: list[np.ndarray]) -> np.ndarray:
    """Standard L-BFGS two-loop recursion for the quasi-Newton direction."""
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_history), reversed(y_history)):
        rho = 1.0 / float(np.dot(y, s))
        alpha = rho * float(np.dot(s, q))
        alphas.append((alpha, rho, s, y))
        q -= alpha * y
    if y_history:
        y_last, s_last = y_history[-1], s_history[-1]
        q *= float(np.dot(s_last, y_last)) / float(np.dot(y_last, y_last))
    for alpha, rho, s, y in reversed(alphas):
        beta = rho * float(np.dot(y, q))
        q += (alpha - beta) * s
    return q
