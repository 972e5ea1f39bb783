"""Nonlinear least-squares calibration of the aggregated model.

Free parameters are optimized in an unconstrained space (log transforms for
the positive rates, logit for the initial active fraction pI0) with a damped
Gauss-Newton (Levenberg-Marquardt) iteration and forward-difference Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataio import TimeSeries
from .errors import NumericError
from .integrate import IntegratorConfig, integrate, sample_at
from .model import AGG_LABELS, AggParams, agg_rhs, make_agg_initial

PREVALENCE = "prevalence"
DAILY_INCIDENCE = "daily-incidence"

FREE_PARAM_NAMES = ("rho", "beta_R", "alpha", "beta", "pI0")

# Order-of-magnitude starting points from which both bundled experiments
# converge; override per problem via FitProblem.init.
DEFAULT_INIT = {"rho": 1.0, "beta_R": 0.1, "alpha": 10.0, "beta": 0.3,
                "pI0": 0.2}

_I_COL = AGG_LABELS.index("I")
_C_COL = AGG_LABELS.index("C")


def to_unconstrained(name: str, x: float) -> float:
    if name == "pI0":
        if not 0.0 < x < 1.0:
            raise ValueError(f"pI0 must be in (0, 1), got {x}")
        return math.log(x / (1.0 - x))
    if not x > 0.0:
        raise ValueError(f"{name} must be > 0, got {x}")
    return math.log(x)


def to_natural(name: str, u: float) -> float:
    if name == "pI0":
        if u >= 0.0:
            return 1.0 / (1.0 + math.exp(-u))
        z = math.exp(u)
        return z / (1.0 + z)
    return math.exp(u)


@dataclass(frozen=True)
class FitProblem:
    """Observed series plus the free/fixed split of model parameters.

    fixed must provide gamma, I0 and N, plus every name from
    FREE_PARAM_NAMES that is not listed in free.
    """

    observed: TimeSeries
    observable: str
    free: tuple
    fixed: dict
    init: dict = field(default_factory=dict)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    model: str = "aggregated"

    def __post_init__(self):
        object.__setattr__(self, "free", tuple(self.free))
        if self.model != "aggregated":
            raise ValueError(f"unsupported model {self.model!r}")
        if self.observable not in (PREVALENCE, DAILY_INCIDENCE):
            raise ValueError(f"unknown observable {self.observable!r}")
        unknown = [n for n in self.free if n not in FREE_PARAM_NAMES]
        if unknown:
            raise ValueError(f"unknown free parameter(s) {unknown}")
        if len(set(self.free)) != len(self.free):
            raise ValueError("free parameter names must be unique")
        missing = [n for n in FREE_PARAM_NAMES
                   if n not in self.free and n not in self.fixed]
        overlap = [n for n in self.free if n in self.fixed]
        if missing or overlap:
            raise ValueError(
                f"free and fixed must partition {FREE_PARAM_NAMES}: "
                f"missing {missing}, overlapping {overlap}")
        for name in ("gamma", "I0", "N"):
            if name not in self.fixed:
                raise ValueError(f"fixed must provide {name!r}")
        if len(self.observed) < 2:
            raise ValueError("observed series needs at least 2 points")
        object.__setattr__(self, "fixed", dict(self.fixed))
        init = dict(DEFAULT_INIT)
        init.update(self.init)
        for name in self.free:
            to_unconstrained(name, init[name])   # domain check
        object.__setattr__(self, "init", init)

    def theta0(self) -> np.ndarray:
        return np.array([to_unconstrained(n, self.init[n]) for n in self.free])

    def natural(self, theta) -> dict:
        """Full parameter dict with theta mapped back to natural space."""
        params = dict(self.fixed)
        for name, u in zip(self.free, theta):
            params[name] = to_natural(name, float(u))
        return params


@dataclass(frozen=True)
class FitResult:
    params: dict          # full parameter set, fitted values in natural space
    sse: float
    rmse: float
    iterations: int
    converged: bool
    residuals: np.ndarray
    sse_path: np.ndarray  # SSE at start plus after every accepted step


def simulate_observable(params: AggParams, pI0: float, I0: float, times,
                        observable: str,
                        config: IntegratorConfig | None = None) -> np.ndarray:
    """Model observable on the requested time grid.

    prevalence: infected count I(t). daily-incidence: first differences of the
    cumulative counter C, with the initial state anchored one day before the
    first grid point so the first difference is defined.
    """
    times = np.asarray(times, dtype=float)
    y0 = make_agg_initial(params.N, I0 * params.N, pI0 * params.N).to_array()
    rhs = lambda t, y: agg_rhs(y, params)
    if observable == PREVALENCE:
        traj = integrate(rhs, y0, times[0], times[-1], config)
        return sample_at(traj, times)[:, _I_COL]
    if observable == DAILY_INCIDENCE:
        traj = integrate(rhs, y0, times[0] - 1.0, times[-1], config)
        grid = np.concatenate([[times[0] - 1.0], times])
        cum = sample_at(traj, grid)[:, _C_COL]
        return np.diff(cum)
    raise ValueError(f"unknown observable {observable!r}")


def _penalty(observed: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(observed))
    if norm == 0.0:
        norm = 1.0
    return np.full(observed.size, 1e6 * norm / math.sqrt(observed.size))


def residuals(problem: FitProblem, theta) -> np.ndarray:
    """Pointwise model - observed; simulation failures become a large flat
    penalty vector so the optimizer stays total over the unconstrained space."""
    obs = problem.observed.values
    try:
        p = problem.natural(theta)
        params = AggParams(beta=p["beta"], gamma=p["gamma"], rho=p["rho"],
                           alpha=p["alpha"], beta_R=p["beta_R"], N=p["N"])
        y = simulate_observable(params, p["pI0"], p["I0"],
                                problem.observed.times, problem.observable,
                                problem.integrator)
    except (ValueError, NumericError, OverflowError):
        return _penalty(obs)
    if not np.isfinite(y).all():
        return _penalty(obs)
    return y - obs


def _jacobian(problem: FitProblem, theta: np.ndarray,
              r0: np.ndarray, step: float = 1e-6) -> np.ndarray:
    J = np.empty((r0.size, theta.size))
    for k in range(theta.size):
        theta_k = theta.copy()
        theta_k[k] += step
        J[:, k] = (residuals(problem, theta_k) - r0) / step
    return J


def fit(problem: FitProblem, max_iterations: int = 500,
        step_max: float = 3.0) -> FitResult:
    """Levenberg-Marquardt in transformed space.

    Damping starts at 1e-3, x10 on a rejected step, /10 on an accepted one.
    Proposals longer than step_max in the transformed space are rejected
    outright (same x10 response) so early iterations cannot jump out of the
    basin. Stops on relative SSE improvement < 1e-10 for 3 consecutive
    accepted steps, gradient norm < 1e-12, or the iteration cap.
    Accepted-step SSE is non-increasing by construction; hitting the cap is
    reported as converged=False, never raised.
    """
    theta = problem.theta0()
    r = residuals(problem, theta)
    sse = float(r @ r)
    sse_path = [sse]
    lam = 1e-3
    consec_small = 0
    converged = False
    J = g = A = None
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        if J is None:
            J = _jacobian(problem, theta, r)
            g = J.T @ r
            A = J.T @ J
            if float(np.linalg.norm(g)) < 1e-12:
                converged = True
                break
        # Levenberg damping (lam*I, not lam*diag): nearly-flat directions get
        # damped uniformly instead of keeping their huge undamped steps.
        try:
            delta = np.linalg.solve(A + lam * np.eye(theta.size), -g)
        except np.linalg.LinAlgError:
            lam = min(lam * 10.0, 1e12)
            continue
        if float(np.linalg.norm(delta)) > step_max:
            lam = min(lam * 10.0, 1e12)
            continue
        r_new = residuals(problem, theta + delta)
        sse_new = float(r_new @ r_new)
        if sse_new <= sse:
            rel_impr = (sse - sse_new) / sse if sse > 0 else 0.0
            theta = theta + delta
            r, sse = r_new, sse_new
            sse_path.append(sse)
            lam = max(lam / 10.0, 1e-12)
            J = None
            consec_small = consec_small + 1 if rel_impr < 1e-10 else 0
            if consec_small >= 3:
                converged = True
                break
        else:
            lam = min(lam * 10.0, 1e12)

    return FitResult(params=problem.natural(theta), sse=sse,
                     rmse=math.sqrt(sse / r.size), iterations=iterations,
                     converged=converged, residuals=r,
                     sse_path=np.array(sse_path))
