from pathlib import Path

import numpy as np
import pytest

from psir.dataio import TimeSeries, load_case_series, moving_average, normalize_cases
from psir.integrate import IntegratorConfig, integrate, sample_at
from psir.model import (AggParams, NetParams, agg_rhs, chain_mobility,
                        make_agg_initial, make_net_initial, net_rhs)

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"
CONFIGS = REPO / "configs"

# Parameters calibrated against the D=10 chain scenario (beta=1, gamma=0.5).
PLATEAU = dict(beta=1.0, gamma=0.5, rho=0.657, alpha=32.81, beta_R=0.152)
PLATEAU_PI0 = 0.105

# Parameters calibrated against the Argentina first-wave series.
ARGENTINA = dict(beta=0.2118, gamma=0.1667, rho=0.8026, alpha=242.4,
                 beta_R=0.01911)
ARGENTINA_PI0 = 0.1796
ARGENTINA_I0 = 1.43e-4


@pytest.fixture(scope="session")
def plateau_params():
    return AggParams(**PLATEAU)


@pytest.fixture(scope="session")
def chain10_params():
    return NetParams(beta=1.0, gamma=0.5, populations=np.full(10, 0.1),
                     mobility=chain_mobility(10, 0.005))


@pytest.fixture(scope="session")
def chain10_traj(chain10_params):
    """Reference network run: seed 1e-6 in district 1, [0, 120] days."""
    y0 = make_net_initial(chain10_params, 1, 1e-6).to_array()
    return integrate(lambda t, y: net_rhs(y, chain10_params), y0, 0.0, 120.0,
                     IntegratorConfig(dt=0.05))


@pytest.fixture(scope="session")
def chain10_total_series(chain10_traj):
    """Daily total infected of the reference network run."""
    days = np.arange(0.0, 121.0)
    total = sample_at(chain10_traj, days)[:, 10:20].sum(axis=1)
    return TimeSeries(days, total)


@pytest.fixture(scope="session")
def sir_reference():
    """Classical SIR run (beta=1, gamma=0.5, N=1, I0=1e-6), the single
    population benchmark for the plateau comparison."""
    def rhs(t, y):
        S, I, R = y
        inf = 1.0 * S * I / 1.0
        return np.array([-inf, inf - 0.5 * I, 0.5 * I])

    y0 = np.array([1.0 - 1e-6, 1e-6, 0.0])
    return integrate(rhs, y0, 0.0, 120.0, IntegratorConfig(dt=0.05))


@pytest.fixture(scope="session")
def argentina_series():
    """Bundled Argentina series after the standard preprocessing."""
    series = load_case_series(DATA / "argentina_daily_cases.csv")
    series = moving_average(series, 7)
    return normalize_cases(series, 45e6, 10.0)
