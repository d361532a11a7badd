"""Multi-tone amplitude estimation by linear least squares.

The classic three-parameter sine fit (known frequency, unknown in-phase and
quadrature components plus offset) extended to a sum of K tones: the design
matrix stacks cos/sin columns for every tone and one shared DC column, and
one linear least-squares solve yields all amplitudes at once. Frequencies
are treated as exactly known; the anchors are quartz stabilized.

The solve uses an orthogonal decomposition (SVD via lstsq) rather than the
normal equations: the four tones sit only ~1.1 to 1.4 Fourier bins apart at
the 1.5 ms record length, so conditioning deserves care.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AmplitudeEstimate, ConfigError, MeasurementError, SampleRecord

# Condition numbers above this indicate an effectively rank-deficient basis
# (e.g. near-duplicate frequencies) and are rejected at construction. The
# reference four-tone configuration sits below 2.
_MAX_CONDITION = 1e8


@dataclass(frozen=True)
class SinefitBasis:
    """Precomputed design matrix for records of a fixed length and rate.

    Columns are [cos f1, sin f1, ..., cos fK, sin fK, 1], evaluated at
    sample instants n / sample_rate.
    """

    frequencies: tuple[float, ...]
    sample_rate: float
    record_length: int
    matrix: np.ndarray
    condition_number: float

    @property
    def n_tones(self) -> int:
        return len(self.frequencies)


def build_basis(
    frequencies: Sequence[float], sample_rate: float, record_length: int
) -> SinefitBasis:
    """Construct the cos/sin/DC design matrix and verify its conditioning."""
    freqs = tuple(float(f) for f in frequencies)
    if not freqs:
        raise ConfigError("at least one tone frequency is required")
    if len(set(freqs)) != len(freqs):
        raise ConfigError("tone frequencies must be distinct")
    for f in freqs:
        if not 0 < f < sample_rate / 2:
            raise ConfigError(f"frequency {f} Hz outside (0, sample_rate/2)")
    k = len(freqs)
    if 2 * k + 1 > record_length:
        raise ConfigError(
            f"record_length {record_length} too short for {k} tones (need >= {2 * k + 1})"
        )

    t = np.arange(record_length) / sample_rate
    matrix = np.empty((record_length, 2 * k + 1))
    for i, f in enumerate(freqs):
        w = 2.0 * math.pi * f * t
        matrix[:, 2 * i] = np.cos(w)
        matrix[:, 2 * i + 1] = np.sin(w)
    matrix[:, -1] = 1.0

    condition = float(np.linalg.cond(matrix))
    if not math.isfinite(condition) or condition > _MAX_CONDITION:
        raise ConfigError(
            f"design matrix is effectively rank deficient (condition {condition:.3g})"
        )
    matrix.flags.writeable = False
    return SinefitBasis(freqs, float(sample_rate), int(record_length), matrix, condition)


def estimate_amplitudes(
    record: SampleRecord, basis: SinefitBasis, anchor_ids: Sequence[str]
) -> AmplitudeEstimate:
    """Estimate per-tone amplitudes and the shared DC from one record.

    Solves min ||s - Phi c||_2 and reports amplitude_i = hypot(a_i, b_i)
    from the cosine/sine coefficients of tone i.
    """
    if len(anchor_ids) != basis.n_tones:
        raise MeasurementError(
            f"got {len(anchor_ids)} anchor ids for {basis.n_tones} tones"
        )
    samples = record.samples
    if samples.size != basis.record_length:
        raise MeasurementError(
            f"record length {samples.size} does not match basis length {basis.record_length}"
        )
    if record.sample_rate != basis.sample_rate:
        raise MeasurementError("record sample_rate does not match basis")

    coeffs, _, rank, _ = np.linalg.lstsq(basis.matrix, samples, rcond=None)
    if rank < basis.matrix.shape[1]:
        raise MeasurementError(
            f"normal equations numerically singular (rank {rank}, "
            f"condition {basis.condition_number:.3g})"
        )
    residual = samples - basis.matrix @ coeffs
    per_anchor = {
        aid: float(math.hypot(coeffs[2 * i], coeffs[2 * i + 1]))
        for i, aid in enumerate(anchor_ids)
    }
    return AmplitudeEstimate(
        per_anchor=per_anchor,
        dc=float(coeffs[-1]),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        condition_number=basis.condition_number,
    )
