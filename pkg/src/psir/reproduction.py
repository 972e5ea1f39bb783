"""Basic reproduction numbers via the next-generation-matrix construction."""

from __future__ import annotations

import numpy as np

from .errors import NumericError
from .model import AggParams, NetParams


def spectral_radius(M, rel_tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """Dominant-eigenvalue magnitude of a non-negative square matrix.

    Power iteration started from the all-ones vector; converges when the
    eigenvalue estimate is stable to rel_tol.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    x = np.ones(M.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        y = M @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        lam_new = norm / float(np.linalg.norm(x))
        x = y / norm
        if abs(lam_new - lam) <= rel_tol * abs(lam_new):
            return lam_new
        lam = lam_new
    raise NumericError(
        f"power iteration did not converge within {max_iter} iterations")


def next_gen_r0(F, V) -> float:
    """Spectral radius of F V^-1 for new-infection matrix F, transfer matrix V."""
    F = np.asarray(F, dtype=float)
    V = np.asarray(V, dtype=float)
    if F.shape != V.shape or F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"F and V must be square and same shape, got {F.shape} vs {V.shape}")
    try:
        V_inv = np.linalg.inv(V)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"V is singular: {exc}") from exc
    return spectral_radius(F @ V_inv)


def r0_aggregated(params: AggParams) -> float:
    """R0 of the aggregated model: beta/gamma, as for plain SIR."""
    return params.beta / params.gamma


def r0_network(params: NetParams) -> float:
    """R0 of the coupled-district model: (beta/gamma) * spectral_radius(P).

    Computed the long way so that the identity R0 = beta/gamma for any
    row-stochastic mobility stays a testable result rather than an assumption.
    """
    return (params.beta / params.gamma) * spectral_radius(params.mobility)
