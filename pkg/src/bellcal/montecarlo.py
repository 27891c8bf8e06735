"""Stochastic oracle: pulse-level simulation of the click model and CHSH test.

Every closed-form probability in this package has an empirical counterpart
here, computed by actually drawing pair numbers, detections, and detector
assignments pulse by pulse. Agreement within statistical error is the
strongest check we have that the analytic model and its implementation say
the same thing.

Reproducibility contract (stable across versions):

* Each block of pulses owns a Philox stream keyed by
  ``(seed, block_index)`` as two unsigned 64-bit words; blocks are
  independent, so results do not depend on execution order and tallies
  merge by addition.
* Within a block the draw order is fixed: (1) one uniform per pulse,
  inverted through the Poisson CDF to get the pair number k; (2) for each
  distinct k > 0 in ascending order, a ``(m, 2, k)`` uniform array compared
  against eta for detections, then a ``(m, 2, k)`` uniform array compared
  against 1/2 for detector assignment; (3) for the CHSH variant only, one
  uniform per double click for the setting, one for Alice's outcome, one
  for Bob's conditional outcome.
* Because the CHSH draws come after all pulse-level draws in each block,
  ``simulate_pulses`` and ``simulate_chsh`` produce identical tallies for
  identical ``(params, cfg)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson as _poisson

from .clicks import SourceParams


@dataclass(frozen=True)
class SimConfig:
    """Size and seeding of a simulation; results are a pure function of it."""

    n_pulses: int
    seed: int
    block_size: int = 1 << 16

    def __post_init__(self) -> None:
        if self.n_pulses <= 0:
            raise ValueError(f"n_pulses must be > 0, got {self.n_pulses}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.block_size <= 0:
            raise ValueError(f"block_size must be > 0, got {self.block_size}")


@dataclass(frozen=True)
class PulseTally:
    """Click counts over a simulated pulse train."""

    pulses: int
    singles: int
    doubles: int
    entangled_coincidences: int

    def __post_init__(self) -> None:
        if min(self.pulses, self.singles, self.doubles, self.entangled_coincidences) < 0:
            raise ValueError("tally counts must be >= 0")
        if not self.entangled_coincidences <= self.doubles <= self.pulses:
            raise ValueError(
                f"expected entangled <= doubles <= pulses, got "
                f"{self.entangled_coincidences} / {self.doubles} / {self.pulses}"
            )
        if self.singles + self.doubles > self.pulses:
            raise ValueError("singles and doubles are disjoint; counts exceed pulses")


@dataclass(frozen=True)
class ChshEstimate:
    """Empirical CHSH value with per-setting correlators and standard error."""

    bell_value: float
    correlators: tuple[float, float, float, float]
    setting_counts: tuple[int, int, int, int]
    std_error: float


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, block], dtype=np.uint64))
    )


def _poisson_cdf_table(lambda_mean: float) -> np.ndarray:
    # table covers all but < 1e-15 of the mass; draws beyond it are clipped
    # to the last bin by searchsorted, which cannot bias any paper regime
    kmax = max(20, int(_poisson.isf(1e-15, lambda_mean)) + 1)
    return _poisson.cdf(np.arange(kmax + 1), lambda_mean)


# ideal CHSH correlators at the optimal angles, one per setting pair;
# the fourth enters the combination with a minus sign
_E_IDEAL = np.array([1.0, 1.0, 1.0, -1.0]) / math.sqrt(2.0)


def _run_blocks(
    params: SourceParams,
    cfg: SimConfig,
    state_visibility: float | None,
) -> tuple[PulseTally, ChshEstimate | None]:
    """Shared block loop; draws CHSH outcomes only when a visibility is given."""
    want_chsh = state_visibility is not None
    cdf = _poisson_cdf_table(params.lambda_mean)
    eta = params.eta
    singles = doubles = entangled = 0
    sum_ab = np.zeros(4)
    n_ab = np.zeros(4, dtype=np.int64)
    n_blocks = (cfg.n_pulses + cfg.block_size - 1) // cfg.block_size
    for block in range(n_blocks):
        n = min(cfg.block_size, cfg.n_pulses - block * cfg.block_size)
        rng = _block_rng(cfg.seed, block)
        ks = np.searchsorted(cdf, rng.random(n), side="right")
        ent_flags = []
        for k in np.unique(ks):
            if k == 0:
                continue
            m = int(np.sum(ks == k))
            detected = rng.random((m, 2, k)) < eta
            assigned = rng.random((m, 2, k)) < 0.5
            n_a = detected[:, 0, :].sum(axis=1)
            n_b = detected[:, 1, :].sum(axis=1)
            is_double = (n_a > 0) & (n_b > 0)
            is_entangled = (
                (n_a == 1)
                & (n_b == 1)
                & (detected[:, 0, :].argmax(axis=1) == detected[:, 1, :].argmax(axis=1))
            )
            fired = (
                (detected & ~assigned)[:, 0, :].any(axis=1).astype(np.int64)
                + (detected & assigned)[:, 0, :].any(axis=1).astype(np.int64)
                + (detected & ~assigned)[:, 1, :].any(axis=1).astype(np.int64)
                + (detected & assigned)[:, 1, :].any(axis=1).astype(np.int64)
            )
            singles += int(np.sum(fired == 1))
            doubles += int(is_double.sum())
            entangled += int(is_entangled.sum())
            if want_chsh:
                ent_flags.append(is_entangled[is_double])
        if want_chsh and ent_flags:
            flags = np.concatenate(ent_flags)
            nd = flags.size
            settings = np.minimum((rng.random(nd) * 4).astype(np.int64), 3)
            a_out = np.where(rng.random(nd) < 0.5, 1.0, -1.0)
            corr = np.where(flags, state_visibility * _E_IDEAL[settings], 0.0)
            # P(b = a | setting) = (1 + E)/2 gives uniform marginals and
            # correlator E exactly
            b_out = a_out * np.where(rng.random(nd) < (1.0 + corr) / 2.0, 1.0, -1.0)
            sum_ab += np.bincount(settings, weights=a_out * b_out, minlength=4)
            n_ab += np.bincount(settings, minlength=4)

    tally = PulseTally(
        pulses=cfg.n_pulses,
        singles=singles,
        doubles=doubles,
        entangled_coincidences=entangled,
    )
    if not want_chsh:
        return tally, None
    with np.errstate(invalid="ignore", divide="ignore"):
        corrs = sum_ab / n_ab
        variances = (1.0 - corrs**2) / n_ab
    bell = float(corrs[0] + corrs[1] + corrs[2] - corrs[3])
    estimate = ChshEstimate(
        bell_value=bell,
        correlators=tuple(float(c) for c in corrs),
        setting_counts=tuple(int(c) for c in n_ab),
        std_error=float(np.sqrt(np.sum(variances))),
    )
    return tally, estimate


def simulate_pulses(params: SourceParams, cfg: SimConfig) -> PulseTally:
    """Draw cfg.n_pulses pulses and tally singles, doubles, and coincidences.

    Per pulse: k pairs from Poisson(lambda_mean); each of the 2k photons is
    detected with probability eta and lands on one of two detectors with
    probability 1/2. A single is exactly one of the four detectors firing, a
    double is at least one detector per side, an entangled coincidence is
    exactly one detected photon per side with both from the same pair.
    """
    tally, _ = _run_blocks(params, cfg, None)
    return tally


def simulate_chsh(
    params: SourceParams, state_visibility: float, cfg: SimConfig
) -> ChshEstimate:
    """Empirical CHSH value over the double clicks of a simulated pulse train.

    Each double click picks one of the four measurement settings uniformly.
    Entangled coincidences produce +-1 outcome pairs with correlator
    state_visibility * E_ideal(setting); accidental doubles produce
    independent uniform outcomes. The Bell value is undefined (NaN) until
    every setting has at least one event.
    """
    if not 0.0 <= state_visibility <= 1.0:
        raise ValueError(
            f"state_visibility must be in [0, 1], got {state_visibility}"
        )
    _, estimate = _run_blocks(params, cfg, state_visibility)
    assert estimate is not None
    return estimate
