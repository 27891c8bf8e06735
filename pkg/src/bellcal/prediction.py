"""Forward model: visibility, Bell value, and event rate versus pump power.

Given a calibrated PhysicalFit, the observed Bell value at mean pair number
lambda is B(lambda) = alpha * T * v(eta, lambda) - beta, where the visibility
v is the fraction of double clicks that are genuine entangled coincidences.
Raising the pump power raises the event rate but dilutes the visibility with
accidentals, so B falls; this module quantifies that tradeoff in both
directions (lambda -> B and target B -> lambda).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.optimize import bisect

from .calibration import (
    BellCertificate,
    BracketError,
    LAMBDA_BRACKET_CEILING,
    ModelAssumptionError,
    ModelError,
    PhysicalFit,
    chsh_certificate,
)
from .clicks import (
    ClickKind,
    DEFAULT_PULSE_FREQ_HZ,
    SourceParams,
    TruncationPolicy,
    expected_rate,
    xi,
)


class InfeasibleTargetError(ModelError):
    """The requested Bell value lies outside the solvable range."""


@dataclass(frozen=True)
class PredictionPoint:
    """One forward-model evaluation: (lambda, visibility, Bell, events/s)."""

    lambda_mean: float
    visibility: float
    bell_value: float
    events_per_second: float


def visibility(params: SourceParams, policy: TruncationPolicy | None = None) -> float:
    """Fraction of double clicks that are genuine entangled coincidences.

    Ratio of the entangled rate to the double rate. Both rates scale as
    lambda * eta^2 to first order, so the lambda -> 0 limit is 1; that limit
    is returned explicitly at lambda = 0.
    """
    if params.eta == 0.0:
        raise ValueError("visibility requires eta > 0")
    if params.lambda_mean == 0.0:
        return 1.0
    doubles = expected_rate(params, ClickKind.DOUBLE, policy)
    if doubles == 0.0:
        # both rates underflow for astronomically small lambda; use the limit
        return 1.0
    return expected_rate(params, ClickKind.ENTANGLED, policy) / doubles


def visibility_linearized(eta: float, lambda_mean: float) -> float:
    """First-order visibility 1 - (lambda/2) * xi(eta), valid for small lambda."""
    if lambda_mean < 0.0:
        raise ValueError(f"lambda_mean must be >= 0, got {lambda_mean}")
    return 1.0 - 0.5 * lambda_mean * xi(eta)


def _check_fit_consistency(
    fit: PhysicalFit, cert: BellCertificate, eta: float
) -> None:
    """Reject fits produced under a different certificate or eta.

    The line (a, b) must be recoverable from (alpha, beta) with this
    certificate's quantum bound; a different bound breaks the identity.
    """
    if abs(eta - fit.eta_used) > 1e-12:
        raise ModelAssumptionError(
            f"fit was produced for eta = {fit.eta_used!r}, called with {eta!r}"
        )
    t_bound = cert.tsirelson_bound
    a_back = -0.5 * fit.alpha * t_bound * fit.xi_used
    b_back = fit.alpha * t_bound - fit.beta
    if not (
        math.isclose(a_back, fit.slope_a, rel_tol=1e-9, abs_tol=1e-12)
        and math.isclose(b_back, fit.intercept_b, rel_tol=1e-9, abs_tol=1e-12)
    ):
        raise ModelAssumptionError(
            f"fit does not match certificate {cert.name!r} "
            f"(quantum bound {t_bound!r}); it was produced under a different one"
        )


def predict_bell(
    fit: PhysicalFit,
    params: SourceParams,
    cert: BellCertificate | None = None,
    policy: TruncationPolicy | None = None,
) -> float:
    """Observed Bell value at the given pump power.

    B = alpha * T * v(eta, lambda) - beta. At lambda = 0 this returns the
    fit intercept b, the zero-noise Bell value. Nonincreasing in lambda.
    """
    cert = chsh_certificate() if cert is None else cert
    _check_fit_consistency(fit, cert, params.eta)
    vis = visibility(params, policy)
    return fit.alpha * cert.tsirelson_bound * vis - fit.beta


def events_per_second(
    params: SourceParams, policy: TruncationPolicy | None = None
) -> float:
    """Double-click event rate in events per second: f * rate(Double)."""
    return params.pulse_freq_hz * expected_rate(params, ClickKind.DOUBLE, policy)


def solve_lambda_for_bell(
    fit: PhysicalFit,
    target_bell: float,
    eta: float,
    cert: BellCertificate | None = None,
    policy: TruncationPolicy | None = None,
    tol: float = 1e-8,
    allow_below_classical: bool = False,
) -> float:
    """Pump power at which the predicted Bell value equals the target.

    B(lambda) decreases from the intercept b at lambda = 0, so the root is
    unique. Feasible targets lie in [classical_bound, b]; targets below the
    classical bound certify nothing and are only solved when
    allow_below_classical is set. Raises InfeasibleTargetError outside the
    allowed range and BracketError if B never falls to the target below the
    lambda ceiling (B(lambda) approaches -beta from above).
    """
    cert = chsh_certificate() if cert is None else cert
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    intercept = fit.intercept_b
    if target_bell > intercept:
        raise InfeasibleTargetError(
            f"target {target_bell} exceeds the zero-noise Bell value {intercept:.6f}"
        )
    if target_bell < cert.classical_bound and not allow_below_classical:
        raise InfeasibleTargetError(
            f"target {target_bell} is below the classical bound "
            f"{cert.classical_bound}; such targets need the explicit override"
        )

    def gap(lam: float) -> float:
        params = SourceParams(eta, lam, DEFAULT_PULSE_FREQ_HZ)
        return predict_bell(fit, params, cert, policy) - target_bell

    if gap(0.0) == 0.0:
        return 0.0
    hi = 1.0
    while gap(hi) > 0.0:
        hi *= 2.0
        if hi > LAMBDA_BRACKET_CEILING:
            raise BracketError(
                f"predicted Bell value never falls to {target_bell} for lambda "
                f"up to {LAMBDA_BRACKET_CEILING:.0f} (floor is {-fit.beta:.6f})"
            )
    if gap(hi) == 0.0:
        return hi
    # converge well inside tol so the returned power reproduces the target
    # Bell value to comparable accuracy (the line's slope exceeds 1)
    return float(bisect(gap, 0.0, hi, xtol=tol / 16.0))


def sweep(
    fit: PhysicalFit,
    eta: float,
    lambda_grid: Sequence[float],
    cert: BellCertificate | None = None,
    policy: TruncationPolicy | None = None,
    pulse_freq_hz: float = DEFAULT_PULSE_FREQ_HZ,
) -> tuple[PredictionPoint, ...]:
    """Forward-model curve over a strictly increasing grid of lambda values.

    Bell values are nonincreasing and event rates nondecreasing along the
    grid. Raises ValueError for an empty, negative, or unsorted grid.
    """
    grid = [float(lam) for lam in lambda_grid]
    if not grid:
        raise ValueError("lambda_grid must not be empty")
    if grid[0] < 0.0:
        raise ValueError(f"lambda_grid values must be >= 0, got {grid[0]}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda_grid must be strictly increasing")
    points = []
    for lam in grid:
        params = SourceParams(eta, lam, pulse_freq_hz)
        points.append(
            PredictionPoint(
                lambda_mean=lam,
                visibility=visibility(params, policy),
                bell_value=predict_bell(fit, params, cert, policy),
                events_per_second=events_per_second(params, policy),
            )
        )
    return tuple(points)
