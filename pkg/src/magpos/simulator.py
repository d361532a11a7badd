"""Forward signal model: receiver voltage record for a given true position.

Each anchor contributes one sinusoid whose amplitude follows the power-law
ranging model at the true transmitter-receiver distance; the sum is
corrupted by optional white noise and per-acquisition amplitude jitter, then
clamped and quantized by a mid-tread uniform ADC model. This module replaces
the coils, receiver electronics and digitizer for desk-scale experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .configio import get_float, get_int, parse_kv_file, parse_kv_text
from .core import (
    Anchor,
    AnchorSet,
    ConfigError,
    GeometryError,
    Point2,
    SampleRecord,
)
from .ranging import power_law_amplitude

# Phase seed for the default per-anchor tone phases. Phases are free
# parameters of the deployment, not ground truth; estimators must be
# invariant to them.
_DEFAULT_PHASE_SEED = 773


@dataclass(frozen=True)
class AdcSpec:
    """Digitizer parameters. bits=None disables quantization (ideal ADC)."""

    bits: int | None = 12
    full_scale: float = 5.0
    sample_rate: float = 200_000.0
    record_length: int = 300

    def __post_init__(self) -> None:
        if self.bits is not None and self.bits < 1:
            raise ConfigError("adc bits must be >= 1 or None")
        if not self.full_scale > 0:
            raise ConfigError("adc full_scale must be positive")
        if not self.sample_rate > 0:
            raise ConfigError("adc sample_rate must be positive")
        if self.record_length < 1:
            raise ConfigError("adc record_length must be >= 1")

    @property
    def lsb(self) -> float | None:
        if self.bits is None:
            return None
        return self.full_scale / 2**self.bits

    def rails(self) -> tuple[float, float]:
        """(lowest, highest) representable sample value."""
        if self.bits is None:
            return (-self.full_scale / 2, self.full_scale / 2)
        lsb = self.full_scale / 2**self.bits
        return (-(2 ** (self.bits - 1)) * lsb, (2 ** (self.bits - 1) - 1) * lsb)


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian noise plus per-acquisition amplitude jitter.

    white_noise_sigma is volts per sample; amplitude_jitter_rel multiplies
    each tone amplitude by (1 + jitter * N(0,1)) once per acquisition.
    Identical seeds reproduce identical sample streams.
    """

    white_noise_sigma: float = 0.0
    amplitude_jitter_rel: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.white_noise_sigma < 0:
            raise ConfigError("white_noise_sigma must be >= 0")
        if self.amplitude_jitter_rel < 0:
            raise ConfigError("amplitude_jitter_rel must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")


@dataclass(frozen=True)
class SimScenario:
    """Complete description of one simulated deployment."""

    anchor_set: AnchorSet
    noise: NoiseModel = field(default_factory=NoiseModel)
    adc: AdcSpec = field(default_factory=AdcSpec)
    phases: Mapping[str, float] | None = None
    receiver_height_offset: float = 0.0

    def __post_init__(self) -> None:
        n_tones = len(self.anchor_set)
        if self.adc.record_length < 2 * n_tones + 1:
            raise ConfigError(
                "record_length must be >= 2 * number of tones + 1 for the "
                "amplitude estimator to be solvable"
            )
        if self.phases is not None:
            missing = set(self.anchor_set.ids) - set(self.phases)
            if missing:
                raise ConfigError(f"phases missing for anchors: {sorted(missing)}")

    def tone_phases(self) -> dict[str, float]:
        if self.phases is not None:
            return {aid: float(self.phases[aid]) for aid in self.anchor_set.ids}
        return default_phases(self.anchor_set.ids)

    def with_noise(self, noise: NoiseModel) -> "SimScenario":
        return replace(self, noise=noise)

    def with_seed(self, seed: int) -> "SimScenario":
        return replace(self, noise=replace(self.noise, seed=seed))


def default_phases(anchor_ids: tuple[str, ...]) -> dict[str, float]:
    """Fixed pseudo-random tone phases, assigned in anchor order."""
    rng = np.random.default_rng(_DEFAULT_PHASE_SEED)
    values = rng.uniform(0.0, 2.0 * math.pi, size=len(anchor_ids))
    return {aid: float(p) for aid, p in zip(anchor_ids, values)}


def true_distance(anchor: Anchor, position: Point2) -> float:
    """Euclidean distance in the reference plane between anchor and receiver."""
    dx = position[0] - anchor.position[0]
    dy = position[1] - anchor.position[1]
    d = math.hypot(dx, dy)
    if d < 1e-12:
        raise GeometryError(f"position coincides with anchor {anchor.id}")
    return d


def tone_amplitude(anchor: Anchor, distance: float) -> float:
    """Received tone amplitude at `distance` per the power-law model."""
    return power_law_amplitude(anchor.alpha, anchor.beta, distance)


def _record_rng(noise: NoiseModel, position: Point2, t0: float) -> np.random.Generator:
    # Keyed on (seed, position, t0) so that a given acquisition is bit
    # reproducible while distinct acquisitions get independent streams.
    key = np.array([position[0], position[1], t0], dtype=np.float64).view(np.uint64)
    return np.random.default_rng([noise.seed, *key.tolist()])


def quantize(values: np.ndarray, adc: AdcSpec) -> np.ndarray:
    """Mid-tread uniform quantization with saturation at the rails."""
    lo, hi = adc.rails()
    if adc.bits is None:
        return np.clip(values, lo, hi)
    lsb = adc.lsb
    codes = np.floor(values / lsb + 0.5)
    codes = np.clip(codes, -(2 ** (adc.bits - 1)), 2 ** (adc.bits - 1) - 1)
    return codes * lsb


def synthesize_record(scenario: SimScenario, position: Point2, t0: float = 0.0) -> SampleRecord:
    """Digitized voltage record for a receiver at `position`, starting at t0.

    samples[n] = quantize( sum_i V_i sin(2 pi f_i (t0 + n/fs) + phi_i) + noise )
    where V_i is the power-law amplitude at the true distance to anchor i.
    A nonzero receiver_height_offset h turns the planar distance d into
    sqrt(d**2 + h**2), the deliberate mismatch used to study the coplanarity
    assumption.
    """
    adc = scenario.adc
    phases = scenario.tone_phases()
    h = scenario.receiver_height_offset
    rng = _record_rng(scenario.noise, position, t0)

    amps = []
    for anchor in scenario.anchor_set:
        d = true_distance(anchor, position)
        amps.append(tone_amplitude(anchor, math.hypot(d, h)))
    amps = np.array(amps)

    # One jitter draw per tone per acquisition, then per-sample white noise;
    # the draw order is fixed so streams stay reproducible.
    jitter = rng.standard_normal(len(amps))
    amps = amps * (1.0 + scenario.noise.amplitude_jitter_rel * jitter)

    # Reduce each tone's start phase mod 2 pi before synthesis: keeping the
    # full 2 pi f t0 argument would push sin() to 1e9-radian inputs where
    # per-sample time rounding turns into phase jitter. A constant phase
    # offset error is harmless; estimation is phase invariant.
    n_over_fs = np.arange(adc.record_length) / adc.sample_rate
    signal = np.zeros(adc.record_length)
    for anchor, amp in zip(scenario.anchor_set, amps):
        w = 2.0 * math.pi * anchor.frequency
        theta0 = math.remainder(w * t0 + phases[anchor.id], 2.0 * math.pi)
        signal += amp * np.sin(w * n_over_fs + theta0)
    signal += scenario.noise.white_noise_sigma * rng.standard_normal(adc.record_length)

    return SampleRecord(
        samples=quantize(signal, adc),
        sample_rate=adc.sample_rate,
        adc_bits=adc.bits,
        full_scale=adc.full_scale,
        timestamp=t0,
    )


def saturation_flag(record: SampleRecord) -> bool:
    """True iff any sample sits at an ADC rail."""
    adc = AdcSpec(
        bits=record.adc_bits,
        full_scale=record.full_scale,
        sample_rate=record.sample_rate,
        record_length=max(len(record), 1),
    )
    lo, hi = adc.rails()
    eps = record.full_scale * 1e-12
    samples = record.samples
    return bool(samples.size and ((samples <= lo + eps) | (samples >= hi - eps)).any())


def scenario_to_text(scenario: SimScenario) -> str:
    """Serialize a scenario to the flat key = value format."""
    lines = [
        "# simulated deployment",
        f"sample_rate = {scenario.adc.sample_rate}",
        f"record_length = {scenario.adc.record_length}",
        f"adc_bits = {'none' if scenario.adc.bits is None else scenario.adc.bits}",
        f"full_scale = {scenario.adc.full_scale}",
        f"noise.white_sigma = {scenario.noise.white_noise_sigma}",
        f"noise.amplitude_jitter_rel = {scenario.noise.amplitude_jitter_rel}",
        f"noise.seed = {scenario.noise.seed}",
        f"receiver_height_offset = {scenario.receiver_height_offset}",
    ]
    for a in scenario.anchor_set:
        x, y, z = a.position
        lines.append(f"anchor.{a.id}.position = {x} {y} {z}")
        lines.append(f"anchor.{a.id}.frequency = {a.frequency}")
        lines.append(f"anchor.{a.id}.alpha = {a.alpha}")
        lines.append(f"anchor.{a.id}.beta = {a.beta}")
    phases = scenario.tone_phases()
    for aid, phase in phases.items():
        lines.append(f"phase.{aid} = {phase}")
    return "\n".join(lines) + "\n"


def scenario_from_kv(kv: dict[str, str]) -> SimScenario:
    anchor_ids = sorted(
        {k.split(".")[1] for k in kv if k.startswith("anchor.") and k.count(".") == 2}
    )
    if not anchor_ids:
        raise ConfigError("scenario defines no anchors")
    anchors = []
    for aid in anchor_ids:
        pos_key = f"anchor.{aid}.position"
        if pos_key not in kv:
            raise ConfigError(f"missing {pos_key}")
        parts = kv[pos_key].split()
        if len(parts) != 3:
            raise ConfigError(f"{pos_key}: expected 'x y z'")
        try:
            position = tuple(float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"{pos_key}: bad coordinate") from exc
        anchors.append(
            Anchor(
                id=aid,
                position=position,  # type: ignore[arg-type]
                frequency=get_float(kv, f"anchor.{aid}.frequency"),
                alpha=get_float(kv, f"anchor.{aid}.alpha"),
                beta=get_float(kv, f"anchor.{aid}.beta"),
            )
        )
    bits_raw = kv.get("adc_bits", "12").strip().lower()
    bits = None if bits_raw in ("none", "off") else get_int(kv, "adc_bits", 12)
    adc = AdcSpec(
        bits=bits,
        full_scale=get_float(kv, "full_scale", 5.0),
        sample_rate=get_float(kv, "sample_rate", 200_000.0),
        record_length=get_int(kv, "record_length", 300),
    )
    noise = NoiseModel(
        white_noise_sigma=get_float(kv, "noise.white_sigma", 0.0),
        amplitude_jitter_rel=get_float(kv, "noise.amplitude_jitter_rel", 0.0),
        seed=get_int(kv, "noise.seed", 0),
    )
    phases = {
        k.split(".", 1)[1]: get_float(kv, k) for k in kv if k.startswith("phase.")
    }
    return SimScenario(
        anchor_set=AnchorSet(tuple(anchors)),
        noise=noise,
        adc=adc,
        phases=phases or None,
        receiver_height_offset=get_float(kv, "receiver_height_offset", 0.0),
    )


def scenario_from_text(text: str) -> SimScenario:
    return scenario_from_kv(parse_kv_text(text))


def load_scenario(path: str) -> SimScenario:
    return scenario_from_kv(parse_kv_file(path))
