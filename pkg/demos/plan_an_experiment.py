#!/usr/bin/env python3
"""Trade Bell violation against event rate for a calibrated setup.

Raising the pump power multiplies the double-click rate but also the
accidental background, which drags the CHSH value toward the classical
bound. Given a calibration this script answers the planning question:
how many events per second can I have at a given target violation?
"""

from bellcal import (
    SourceParams,
    calibrate,
    events_per_second,
    solve_lambda_for_bell,
    sweep,
    visibility,
)
from bellcal.cli import bundled_runs_path, read_run_file


def main() -> None:
    report = calibrate(read_run_file(bundled_runs_path()))
    fit = report.fit
    eta = fit.eta_used
    print(f"calibration: eta = {eta:.4f}, B(lambda) = {fit.slope_a:.4f} lambda + {fit.intercept_b:.4f}\n")

    print(f"{'B target':>8} {'lambda':>8} {'visibility':>10} {'events/s':>10}")
    for target in (2.625, 2.6, 2.5, 2.4, 2.3, 2.2, 2.1, 2.0):
        lam = solve_lambda_for_bell(fit, target, eta)
        params = SourceParams(eta, lam)
        print(
            f"{target:>8.3f} {lam:>8.4f} {visibility(params):>10.4f} "
            f"{events_per_second(params):>10.0f}"
        )

    # a 5-sigma certification in fixed wall time wants the product
    # (B - 2)^2 * rate as large as possible; scan for the sweet spot
    grid = [i * 0.75 / 199 for i in range(200)]
    points = sweep(fit, eta, grid)
    best = max(
        (p for p in points if p.bell_value > 2.0),
        key=lambda p: (p.bell_value - 2.0) ** 2 * p.events_per_second,
    )
    print(
        f"\nfastest 5-sigma point: lambda = {best.lambda_mean:.4f}, "
        f"B = {best.bell_value:.4f}, {best.events_per_second:.0f} events/s"
    )


if __name__ == "__main__":
    main()
