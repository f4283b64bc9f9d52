"""Gradient-descent minimization over ansatz parameters.

This module never executes circuits; it only calls the energy and gradient
callables it is given.  Steps that would leave the parameter domain are
clipped to the (margin-shrunk) closed bounds and flagged on the resulting
trace point.  Convergence requires both the parameter step and the energy
change to fall below their tolerances, which needs at least two iterates;
a zero gradient converges immediately at iteration 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import degrees

import numpy as np

__all__ = [
    "OptimizerConfig",
    "TracePoint",
    "OptimizationTrace",
    "gradient_descent",
    "run_optimizer",
    "optimizer_methods",
    "check_convergence",
    "write_trace_csv",
]


@dataclass(frozen=True)
class OptimizerConfig:
    theta0: tuple[float, ...]
    method: str = "gradient_descent"
    step_size: object = 1.0          # scalar, schedule sequence, or callable k -> gamma
    max_iters: int = 200
    param_tol: float = 1e-6          # radians, on ||theta_{k+1} - theta_k||
    energy_tol: float = 1e-6         # relative to max(1, |E|)

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta0", tuple(float(x) for x in self.theta0))
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.param_tol <= 0 or self.energy_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class TracePoint:
    k: int
    theta: tuple[float, ...]
    energy: float
    gradient: tuple[float, ...]
    clipped: bool = False


@dataclass
class OptimizationTrace:
    points: list[TracePoint] = field(default_factory=list)
    status: str = "error"            # converged | max_iters | error
    message: str = ""

    @property
    def final(self) -> TracePoint:
        if not self.points:
            raise RuntimeError("empty optimization trace")
        return self.points[-1]

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def iterations(self) -> int:
        return max(0, len(self.points) - 1)


def _step_scale(step_size, k: int) -> float:
    if callable(step_size):
        return float(step_size(k))
    if isinstance(step_size, (list, tuple, np.ndarray)):
        seq = list(step_size)
        return float(seq[min(k, len(seq) - 1)])
    return float(step_size)


def check_convergence(points, config: OptimizerConfig) -> bool:
    """True iff the last two trace points are closer than both tolerances."""
    points = list(points)
    if len(points) < 2:
        raise ValueError("convergence needs at least two iterates")
    prev, last = points[-2], points[-1]
    dtheta = float(np.linalg.norm(np.subtract(last.theta, prev.theta)))
    denergy = abs(last.energy - prev.energy)
    return (dtheta <= config.param_tol
            and denergy <= config.energy_tol * max(1.0, abs(last.energy)))


def _clip(theta: np.ndarray, domain) -> tuple[np.ndarray, bool]:
    if domain is None:
        return theta, False
    clipped = False
    out = theta.copy()
    for i, bounds in enumerate(domain):
        if bounds is None:
            continue
        lo, hi = bounds
        if out[i] < lo:
            out[i] = lo
            clipped = True
        elif out[i] > hi:
            out[i] = hi
            clipped = True
    return out, clipped


def gradient_descent(energy_fn, gradient_fn, config: OptimizerConfig,
                     domain=None) -> OptimizationTrace:
    """Fixed-schedule descent theta_{k+1} = theta_k - gamma_k * grad E."""
    trace = OptimizationTrace()
    theta = np.asarray(config.theta0, dtype=float)
    clipped_into = False
    for k in range(config.max_iters + 1):
        try:
            energy = float(energy_fn(theta))
            grad = np.asarray(gradient_fn(theta), dtype=float)
        except (RuntimeError, ValueError, ArithmeticError) as exc:
            trace.status = "error"
            trace.message = f"evaluation failed at iteration {k}: {exc}"
            return trace
        if not np.isfinite(energy) or not np.all(np.isfinite(grad)):
            trace.status = "error"
            trace.message = f"non-finite energy or gradient at iteration {k}"
            return trace
        trace.points.append(TracePoint(k, tuple(theta.tolist()), energy,
                                       tuple(grad.tolist()), clipped_into))
        if k >= 1 and check_convergence(trace.points, config):
            trace.status = "converged"
            trace.message = f"converged after {k} iterations"
            return trace
        if k == config.max_iters:
            break
        step = _step_scale(config.step_size, k) * grad
        if not np.any(step):
            trace.status = "converged"
            trace.message = f"zero gradient at iteration {k}"
            return trace
        theta, clipped_into = _clip(theta - step, domain)
    trace.status = "max_iters"
    trace.message = f"stopped at the iteration cap ({config.max_iters})"
    return trace


_METHODS = {"gradient_descent": gradient_descent}


def optimizer_methods() -> tuple[str, ...]:
    return tuple(sorted(_METHODS))


def run_optimizer(energy_fn, gradient_fn, config: OptimizerConfig,
                  domain=None) -> OptimizationTrace:
    try:
        method = _METHODS[config.method]
    except KeyError:
        raise ValueError(
            f"unknown optimizer {config.method!r}; available: {', '.join(optimizer_methods())}"
        ) from None
    return method(energy_fn, gradient_fn, config, domain=domain)


def write_trace_csv(trace: OptimizationTrace, path) -> None:
    """Iterate table with parameters in both radians and degrees."""
    if not trace.points:
        raise ValueError("no trace points to write")
    d = len(trace.points[0].theta)
    header = ["k"]
    header += [f"theta_{i}_rad" for i in range(d)]
    header += [f"theta_{i}_deg" for i in range(d)]
    header += ["energy", "clipped"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for pt in trace.points:
            row = [pt.k]
            row += [f"{x:.17g}" for x in pt.theta]
            row += [f"{degrees(x):.17g}" for x in pt.theta]
            row += [f"{pt.energy:.17g}", int(pt.clipped)]
            writer.writerow(row)
