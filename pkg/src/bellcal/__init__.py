"""Click-model calibration and Bell-value extrapolation for pulsed pair sources.

A pulsed down-conversion source emits a Poisson-distributed number of photon
pairs per pulse. At low pump power almost every double click is a genuine
entangled coincidence; at high power accidental coincidences from multi-pair
emission wash out the measured Bell violation. This package fits the
detection efficiency and the Bell-vs-power line from observed count rates,
predicts the Bell value and event rate at any pump power, solves the inverse
problem (what power yields a target Bell value), and validates the whole
analytic model against a pulse-level Monte Carlo.
"""

from .calibration import (
    BellCertificate,
    BracketError,
    CalibrationError,
    CalibrationReport,
    DegenerateFitError,
    ExperimentRun,
    ModelAssumptionError,
    ModelError,
    PhysicalFit,
    RunCalibration,
    calibrate,
    chsh_certificate,
    estimate_eta,
    estimate_eta_per_run,
    fit_linear,
    solve_lambda_from_counts,
    solve_lambda_from_doubles,
    to_physical,
)
from .clicks import (
    ClickKind,
    DEFAULT_PULSE_FREQ_HZ,
    SourceParams,
    TruncationPolicy,
    expected_doubles_count,
    expected_rate,
    expected_singles_count,
    p_double,
    p_ent,
    p_single,
    poisson_pmf,
    xi,
)
from .montecarlo import (
    ChshEstimate,
    PulseTally,
    SimConfig,
    simulate_chsh,
    simulate_pulses,
)
from .prediction import (
    InfeasibleTargetError,
    PredictionPoint,
    events_per_second,
    predict_bell,
    solve_lambda_for_bell,
    sweep,
    visibility,
    visibility_linearized,
)

__version__ = "0.1.0"

__all__ = [
    "BellCertificate",
    "BracketError",
    "CalibrationError",
    "CalibrationReport",
    "ChshEstimate",
    "ClickKind",
    "DEFAULT_PULSE_FREQ_HZ",
    "DegenerateFitError",
    "ExperimentRun",
    "InfeasibleTargetError",
    "ModelAssumptionError",
    "ModelError",
    "PhysicalFit",
    "PredictionPoint",
    "PulseTally",
    "RunCalibration",
    "SimConfig",
    "SourceParams",
    "TruncationPolicy",
    "calibrate",
    "chsh_certificate",
    "estimate_eta",
    "estimate_eta_per_run",
    "events_per_second",
    "expected_doubles_count",
    "expected_rate",
    "expected_singles_count",
    "fit_linear",
    "p_double",
    "p_ent",
    "p_single",
    "poisson_pmf",
    "predict_bell",
    "simulate_chsh",
    "simulate_pulses",
    "solve_lambda_for_bell",
    "solve_lambda_from_counts",
    "solve_lambda_from_doubles",
    "sweep",
    "to_physical",
    "visibility",
    "visibility_linearized",
    "xi",
]
