"""Explicit Runge-Kutta time integration with dense sampling.

Two methods: classical fixed-step RK4 (the default, dt = 0.05 day) and an
adaptive Dormand-Prince 5(4) pair with PI step-size control. No positivity
clamping anywhere; tiny negative excursions are the integrator telling the
truth and are asserted against bounds in the tests instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .model import Trajectory

FIXED_RK4 = "fixed-rk4"
ADAPTIVE_RK45 = "adaptive-rk45"


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = FIXED_RK4
    dt: float = 0.05             # fixed-rk4 step (days)
    rel_tol: float = 1e-8        # adaptive-rk45 only
    abs_tol: float = 1e-10       # adaptive-rk45 only
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in (FIXED_RK4, ADAPTIVE_RK45):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


def _check_finite(y: np.ndarray, t: float) -> None:
    if not np.isfinite(y).all():
        raise NumericError(f"non-finite state encountered at t={t:.6g}")


def _rk4_step(rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_rk4(rhs, y0, t0, t_end, config) -> Trajectory:
    dt = config.dt
    n_full = int(np.floor((t_end - t0) / dt + 1e-9))
    grid = [t0 + k * dt for k in range(1, n_full + 1)]
    if not grid or grid[-1] < t_end - 1e-9 * dt:
        grid.append(t_end)
    else:
        grid[-1] = t_end
    if len(grid) > config.max_steps:
        raise NumericError(
            f"{len(grid)} steps needed, exceeds max_steps={config.max_steps}")

    times = [t0]
    states = [np.asarray(y0, dtype=float)]
    t, y = t0, states[0]
    for t_next in grid:
        y = _rk4_step(rhs, t, y, t_next - t)
        _check_finite(y, t_next)
        t = t_next
        times.append(t)
        states.append(y)
    return Trajectory(times=np.array(times), states=np.vstack(states))


# Dormand-Prince 5(4) tableau; the 5th-order solution is propagated.
_DP_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
          11.0 / 84.0, 0.0)
_DP_B4 = (5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
          -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0)


def _integrate_rk45(rhs, y0, t0, t_end, config) -> Trajectory:
    rtol, atol = config.rel_tol, config.abs_tol
    t = t0
    y = np.asarray(y0, dtype=float)
    times = [t0]
    states = [y]
    h = (t_end - t0) / 100.0
    err_prev = 1.0
    k = [None] * 7

    steps = 0
    while t < t_end:
        steps += 1
        if steps > config.max_steps:
            raise NumericError(
                f"max_steps={config.max_steps} exceeded at t={t:.6g}")
        h = min(h, t_end - t)
        k[0] = rhs(t, y)
        for s in range(6):
            ys = y + h * sum(a * k[j] for j, a in enumerate(_DP_A[s]))
            k[s + 1] = rhs(t + _DP_C[s] * h, ys)
        y5 = y + h * sum(b * k[j] for j, b in enumerate(_DP_B5) if b != 0.0)
        y4 = y + h * sum(b * k[j] for j, b in enumerate(_DP_B4) if b != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
        err = max(err, 1e-16)
        if err <= 1.0:
            t_new = t + h
            if t_new >= t_end - 1e-12 * max(1.0, abs(t_end)):
                t_new = t_end
            _check_finite(y5, t_new)
            t, y = t_new, y5
            times.append(t)
            states.append(y)
            factor = 0.9 * err ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
            err_prev = err
        else:
            factor = 0.9 * err ** (-0.2)
        h *= min(5.0, max(0.2, factor))
        if h <= 1e-14 * max(1.0, abs(t_end - t0)):
            raise NumericError(f"step size collapsed at t={t:.6g}")
    return Trajectory(times=np.array(times), states=np.vstack(states))


def integrate(rhs, y0, t0: float, t_end: float,
              config: IntegratorConfig | None = None) -> Trajectory:
    """Integrate dy/dt = rhs(t, y) over [t0, t_end].

    The returned trajectory contains t0 and t_end exactly; adaptive mode
    records every accepted step.
    """
    if config is None:
        config = IntegratorConfig()
    if not t_end > t0:
        raise ValueError(f"need t_end > t0, got [{t0}, {t_end}]")
    y0 = np.asarray(y0, dtype=float)
    if not np.isfinite(y0).all():
        raise ValueError("y0 must be finite")
    if config.method == FIXED_RK4:
        return _integrate_rk4(rhs, y0, t0, t_end, config)
    return _integrate_rk45(rhs, y0, t0, t_end, config)


def sample_at(traj: Trajectory, times) -> np.ndarray:
    """States linearly interpolated at the requested times (exact at nodes)."""
    times = np.asarray(times, dtype=float)
    lo, hi = traj.times[0], traj.times[-1]
    if times.size and (times.min() < lo or times.max() > hi):
        raise ValueError(
            f"requested times outside [{lo:.6g}, {hi:.6g}]")
    out = np.empty((times.size, traj.states.shape[1]))
    for j in range(traj.states.shape[1]):
        out[:, j] = np.interp(times, traj.times, traj.states[:, j])
    return out
