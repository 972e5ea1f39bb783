"""Compartmental dynamics for the aggregated spatial-SIR model and the
coupled-district (metapopulation) reference model.

The aggregated model tracks five compartments plus a cumulative-infection
counter:

    p_S  population of districts the epidemic has not reached yet
    S    susceptibles in currently active districts
    I    infected in currently active districts
    R    recovered in currently active districts
    p_R  population of districts where the local outbreak is over
    C    cumulative new infections (bookkeeping, not a compartment)

State vectors are plain numpy arrays ordered as ``AGG_LABELS``; the dataclasses
below are the validated views used at construction boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

AGG_LABELS = ("p_S", "S", "I", "R", "p_R", "C")

# Ratio terms with denominator p_I are zeroed below this fraction of N.
PI_GUARD = 1e-12


def saturation(x: float) -> float:
    """Smooth saturation (2/pi)*atan(pi/2 * x), strictly increasing, < 1."""
    return (2.0 / math.pi) * math.atan(0.5 * math.pi * x)


def solve_r_infty(r0: float) -> float:
    """Final attack fraction: the root in [0, 1) of r = 1 - exp(-r0*r).

    Returns 0 for r0 <= 1 (the only root in [0, 1)); otherwise bisects
    [1e-9, 1] down to an interval of width 1e-14.
    """
    if r0 < 0:
        raise ValueError(f"r0 must be >= 0, got {r0}")
    if r0 <= 1.0:
        return 0.0

    def f(r: float) -> float:
        return r - (1.0 - math.exp(-r0 * r))

    lo, hi = 1e-9, 1.0
    if f(lo) >= 0.0:
        # Root is below the bracket floor; indistinguishable from zero here.
        return 0.0
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AggParams:
    """Parameters of the aggregated model.

    r_inf and s_inf are derived from beta/gamma at construction and are not
    free: r_inf solves the final-size equation, s_inf = 1 - r_inf.
    """

    beta: float           # transmission rate (1/day)
    gamma: float          # recovery rate (1/day)
    rho: float            # spatial-advance mobility coefficient (1/day)
    alpha: float          # connectivity scale (dimensionless)
    beta_R: float         # recovery-flux rate (1/day)
    N: float = 1.0        # total population (1.0 when normalized)
    r_inf: float = field(init=False)
    s_inf: float = field(init=False)

    def __post_init__(self):
        for name in ("beta", "gamma", "rho", "alpha", "beta_R"):
            v = getattr(self, name)
            if not (v >= 0.0) or not math.isfinite(v):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not (self.N > 0.0) or not math.isfinite(self.N):
            raise ValueError(f"N must be finite and > 0, got {self.N}")
        r = solve_r_infty(self.beta / self.gamma)
        object.__setattr__(self, "r_inf", r)
        object.__setattr__(self, "s_inf", 1.0 - r)


@dataclass(frozen=True)
class AggState:
    """One aggregated-model state; fields in persons (or fractions of N=1)."""

    p_S: float
    S: float
    I: float
    R: float
    p_R: float
    C: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.p_S, self.S, self.I, self.R, self.p_R, self.C])

    @classmethod
    def from_array(cls, y) -> "AggState":
        p_S, S, I, R, p_R, C = (float(v) for v in y)
        return cls(p_S, S, I, R, p_R, C)

    @property
    def p_I(self) -> float:
        """Population of active districts, always S + I + R (never stored)."""
        return self.S + self.I + self.R


def make_agg_initial(N: float, I0: float, pI0: float) -> AggState:
    """Initial state with pI0 persons in active districts, I0 of them infected.

    The epidemic starts with R = p_R = 0 and the cumulative counter at I0.
    """
    if not (0.0 < I0 < pI0):
        raise ValueError(f"need 0 < I0 < pI0, got I0={I0}, pI0={pI0}")
    if not pI0 <= N:
        raise ValueError(f"need pI0 <= N, got pI0={pI0}, N={N}")
    return AggState(p_S=N - pI0, S=pI0 - I0, I=I0, R=0.0, p_R=0.0, C=I0)


def agg_rhs(y, params: AggParams) -> np.ndarray:
    """Time derivative of the aggregated state (order ``AGG_LABELS``).

    Ratio terms with denominator p_I are zeroed when p_I < 1e-12*N; at that
    limit every numerator carries a factor I or R that vanishes as well.
    dC/dt counts the infection flux only (arrivals from p_S are relabeled
    susceptibles, not new infections).
    """
    p_S, S, I, R, _p_R, _C = y.tolist() if isinstance(y, np.ndarray) else \
        (float(v) for v in y)
    p = params
    N = p.N
    p_I = S + I + R

    adv = p.rho * I * saturation(p.alpha * p_S / N)
    if p_I < PI_GUARD * N:
        inf = 0.0
        fin = 0.0
    else:
        inf = p.beta * S * I / p_I
        fin = p.beta_R * S * R / p_I
    rec = p.gamma * I
    # fin/s_inf is split as fin + fin*r_inf/s_inf so the five compartment
    # derivatives cancel to machine precision when summed.
    fin_r = fin * (p.r_inf / p.s_inf)

    return np.array([
        -adv,                   # d p_S
        adv - inf - fin,        # d S
        inf - rec,              # d I
        rec - fin_r,            # d R
        fin + fin_r,            # d p_R
        inf,                    # d C
    ])


@dataclass(frozen=True)
class NetParams:
    """Parameters of the coupled-district reference model.

    mobility[i, j] is the daily time fraction a resident of district i spends
    in district j; rows must sum to 1.
    """

    beta: float
    gamma: float
    populations: np.ndarray    # length D, all > 0
    mobility: np.ndarray       # D x D, row-stochastic

    def __post_init__(self):
        pops = np.asarray(self.populations, dtype=float).copy()
        mob = np.asarray(self.mobility, dtype=float).copy()
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if pops.ndim != 1 or pops.size == 0 or not (pops > 0).all():
            raise ValueError("populations must be a vector of positive values")
        D = pops.size
        if mob.shape != (D, D):
            raise ValueError(f"mobility must be {D}x{D}, got {mob.shape}")
        if (mob < 0).any():
            raise ValueError("mobility entries must be >= 0")
        rowsums = mob.sum(axis=1)
        if np.abs(rowsums - 1.0).max() > 1e-12:
            raise ValueError("mobility rows must sum to 1 within 1e-12")
        pops.setflags(write=False)
        mob.setflags(write=False)
        object.__setattr__(self, "populations", pops)
        object.__setattr__(self, "mobility", mob)

    @property
    def D(self) -> int:
        return self.populations.size


@dataclass(frozen=True)
class NetState:
    """Per-district S, I, R vectors; state vector layout is S | I | R."""

    S: np.ndarray
    I: np.ndarray
    R: np.ndarray

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.S, self.I, self.R]).astype(float)

    @classmethod
    def from_array(cls, y) -> "NetState":
        y = np.asarray(y, dtype=float)
        D = y.size // 3
        return cls(S=y[:D].copy(), I=y[D:2 * D].copy(), R=y[2 * D:].copy())


def net_labels(D: int) -> tuple[str, ...]:
    """Column labels matching NetState.to_array ordering."""
    return tuple(f"{c}_{i}" for c in ("S", "I", "R") for i in range(1, D + 1))


def make_net_initial(params: NetParams, seed_district: int, seed_size: float) -> NetState:
    """All-susceptible start with seed_size infected in one district (1-based)."""
    D = params.D
    if not 1 <= seed_district <= D:
        raise ValueError(f"seed_district must be in 1..{D}, got {seed_district}")
    if not 0.0 < seed_size < params.populations[seed_district - 1]:
        raise ValueError(f"seed_size must be in (0, N_i), got {seed_size}")
    S = params.populations.astype(float).copy()
    I = np.zeros(D)
    R = np.zeros(D)
    S[seed_district - 1] -= seed_size
    I[seed_district - 1] = seed_size
    return NetState(S=S, I=I, R=R)


def chain_mobility(D: int, p: float) -> np.ndarray:
    """Row-stochastic chain: fraction p spent in each of up to two neighbors.

    Interior rows carry 1-2p on the diagonal; the two boundary rows have a
    single neighbor and carry 1-p so rows stay stochastic.
    """
    if D < 2:
        raise ValueError(f"D must be >= 2, got {D}")
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p must be in [0, 0.5], got {p}")
    M = np.zeros((D, D))
    for i in range(D):
        if i > 0:
            M[i, i - 1] = p
        if i < D - 1:
            M[i, i + 1] = p
        M[i, i] = 1.0 - (2.0 * p if 0 < i < D - 1 else p)
    return M


def effective_infected(I, mobility) -> np.ndarray:
    """Infected effectively present in each district: Ihat_i = sum_j P_ji I_j."""
    I = np.asarray(I, dtype=float)
    P = np.asarray(mobility, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or I.shape != (P.shape[0],):
        raise ValueError(f"shape mismatch: I {I.shape} vs mobility {P.shape}")
    return I @ P


def net_rhs(y, params: NetParams) -> np.ndarray:
    """Time derivative of the coupled-district state (layout S | I | R)."""
    y = np.asarray(y, dtype=float)
    D = params.D
    S, I = y[:D], y[D:2 * D]
    Ihat = effective_infected(I, params.mobility)
    inf = params.beta * S * Ihat / params.populations
    rec = params.gamma * I
    return np.concatenate([-inf, inf - rec, rec])


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus state matrix, one row per time."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        states = np.array(self.states, dtype=float)
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise ValueError("states must have one row per time")
        if times.size < 1 or not (np.diff(times) > 0).all():
            raise ValueError("times must be non-empty and strictly increasing")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
