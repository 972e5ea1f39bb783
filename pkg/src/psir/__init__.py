"""Aggregated spatial-SIR epidemic toolkit.

Simulation of the five-compartment aggregated model and its coupled-district
reference model, reproduction-number computations, and least-squares
calibration against observed case series.
"""

from .calibrate import (DAILY_INCIDENCE, PREVALENCE, FitProblem, FitResult,
                        fit, residuals, simulate_observable)
from .dataio import (TimeSeries, export_trajectory, load_case_series,
                     moving_average, normalize_cases)
from .errors import NumericError
from .integrate import IntegratorConfig, integrate, sample_at
from .model import (AGG_LABELS, AggParams, AggState, NetParams, NetState,
                    Trajectory, agg_rhs, chain_mobility, effective_infected,
                    make_agg_initial, make_net_initial, net_labels, net_rhs,
                    saturation, solve_r_infty)
from .reproduction import next_gen_r0, r0_aggregated, r0_network, spectral_radius
from .svgchart import render_svg

__version__ = "0.1.0"

__all__ = [
    "AGG_LABELS", "AggParams", "AggState", "DAILY_INCIDENCE", "FitProblem",
    "FitResult", "IntegratorConfig", "NetParams", "NetState", "NumericError",
    "PREVALENCE", "TimeSeries", "Trajectory", "agg_rhs", "chain_mobility",
    "effective_infected", "export_trajectory", "fit", "integrate",
    "load_case_series", "make_agg_initial", "make_net_initial",
    "moving_average", "net_labels", "net_rhs", "next_gen_r0",
    "normalize_cases", "r0_aggregated", "r0_network", "render_svg",
    "residuals", "sample_at", "saturation", "simulate_observable",
    "solve_r_infty", "spectral_radius",
]
