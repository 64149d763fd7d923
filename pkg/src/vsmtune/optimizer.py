"""Projected gradient descent over box-constrained device coefficients.

Iterates ``alpha <- Proj[alpha - gamma * grad J(alpha)]`` where
``alpha = [m, d]`` stacks the virtual inertia and damping vectors and
``Proj`` clamps to the box. The step ``gamma`` comes from Armijo
backtracking along the projection arc, which keeps the objective history
monotone for this smooth nonconvex problem; trial points whose dynamics
are not Hurwitz are rejected and the step halved. Convergence is judged
on the projected-gradient residual rather than the raw gradient norm,
since optima routinely sit on the box boundary.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ParameterError, StabilityError
from .netmodel import DeviceParams, ReducedNetwork
from .objective import ObjectiveConfig, eval_objective, objective_value

log = logging.getLogger(__name__)

STEP_FLOOR = 1e-14


class TerminationReason(str, enum.Enum):
    gradient_tol = "gradient_tol"
    max_iter = "max_iter"
    step_collapse = "step_collapse"


@dataclass(frozen=True)
class DescentConfig:
    """Step-size and termination settings for the descent loop."""

    gamma0: float = 1e-2
    max_iter: int = 5000
    grad_tol: float = 1e-6
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    init_m: np.ndarray | None = None
    init_d: np.ndarray | None = None

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ConfigurationError("gamma0 must be positive")
        if not 0 < self.backtrack < 1:
            raise ConfigurationError("backtrack factor must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ConfigurationError("armijo_c must lie in (0, 1)")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        if not self.grad_tol > 0:
            raise ConfigurationError("grad_tol must be positive")


@dataclass(frozen=True)
class OptResult:
    """Optimizer output: final design, objective trace, termination info."""

    m_star: np.ndarray
    d_star: np.ndarray
    J_history: np.ndarray
    iterations: int
    converged: bool
    termination_reason: TerminationReason


def project(alpha: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Componentwise clamp of ``alpha`` to ``[lb, ub]``; idempotent."""
    alpha = np.asarray(alpha, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub):
        raise ConfigurationError("projection box has lb > ub in some component")
    return np.clip(alpha, lb, ub)


def optimize(
    net: ReducedNetwork,
    params: DeviceParams,
    cfg: ObjectiveConfig,
    dcfg: DescentConfig = DescentConfig(),
    ref_bus: int = 0,
) -> OptResult:
    """Minimize the regularized H2 objective over the coefficient box.

    The starting point is ``(dcfg.init_m, dcfg.init_d)`` when given and
    the box midpoint otherwise; it must lie inside the box and yield
    Hurwitz dynamics. Termination: projected-gradient residual at the
    reference step ``gamma0`` below ``grad_tol * (1 + ||alpha_0||)``,
    the iteration cap, or the backtracked step underflowing.
    """
    n = params.n
    lb = np.concatenate([params.m_lb, params.d_lb])
    ub = np.concatenate([params.m_ub, params.d_ub])

    mid_m, mid_d = params.box_midpoint()
    m0 = np.asarray(dcfg.init_m, dtype=float) if dcfg.init_m is not None else mid_m
    d0 = np.asarray(dcfg.init_d, dtype=float) if dcfg.init_d is not None else mid_d
    if m0.shape != (n,) or d0.shape != (n,):
        raise ConfigurationError("starting point has wrong dimension")
    alpha = np.concatenate([m0, d0])
    if np.any(alpha < lb) or np.any(alpha > ub):
        raise ConfigurationError("starting point is infeasible for the box bounds")

    def split(a: np.ndarray) -> DeviceParams:
        return params.with_design(a[:n], a[n:])

    def value(a: np.ndarray) -> float:
        return objective_value(split(a), cfg, net, ref_bus)

    tol = dcfg.grad_tol * (1.0 + float(np.linalg.norm(alpha)))

    ev = eval_objective(split(alpha), cfg, net, ref_bus)
    J = ev.J_total
    J_history = [J]
    iterations = 0
    converged = False

    while True:
        grad = np.concatenate([ev.grad_m, ev.grad_d])
        residual = float(np.linalg.norm(alpha - project(alpha - dcfg.gamma0 * grad, lb, ub)))
        if residual <= tol:
            converged = True
            reason = TerminationReason.gradient_tol
            break
        if iterations >= dcfg.max_iter:
            reason = TerminationReason.max_iter
            break

        gamma = dcfg.gamma0
        accepted = None
        while gamma >= STEP_FLOOR:
            trial = project(alpha - gamma * grad, lb, ub)
            step = trial - alpha
            try:
                J_trial = value(trial)
            except (StabilityError, ParameterError):
                gamma *= dcfg.backtrack
                continue
            if J_trial <= J + dcfg.armijo_c * float(grad @ step):
                accepted = (trial, J_trial)
                break
            gamma *= dcfg.backtrack

        if accepted is None:
            reason = TerminationReason.step_collapse
            break

        alpha, J = accepted
        J_history.append(J)
        ev = eval_objective(split(alpha), cfg, net, ref_bus)
        iterations += 1
        if log.isEnabledFor(logging.DEBUG) and iterations % 50 == 0:
            log.debug("iter %d: J=%.9g gamma=%.3g", iterations, J, gamma)

    return OptResult(
        m_star=alpha[:n].copy(),
        d_star=alpha[n:].copy(),
        J_history=np.asarray(J_history),
        iterations=iterations,
        converged=converged,
        termination_reason=reason,
    )
