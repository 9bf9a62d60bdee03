"""Laser phase noise, shot-to-shot frequency draws and AOM gate envelopes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .physics import C_LIGHT

DEFAULT_BEAT_CEILING_HZ = 1e9

# raised-cosine edge: the 10-90 % transition covers this fraction of the full edge
_RC_10_90 = (np.arccos(-0.8) - np.arccos(0.8)) / np.pi


def _rng(seed, *keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys)))


@dataclass(frozen=True)
class LaserNoiseModel:
    """Frequency and phase noise of one free-running laser.

    ``linewidth_hz`` is the long-term FWHM. Within a single sub-microsecond
    exposure the cavity fluctuations are frozen and the phase diffuses at
    the Schawlow-Townes rate ``st_limit_hz``. Between shots the centre
    frequency wanders with standard deviation
    ``drift_rate_hz_per_s * shot_period_s`` around ``nominal_offset_hz``.
    """

    linewidth_hz: float = 3e6
    coherence_time_ns: float = 300.0
    st_limit_hz: float = 2.5e3
    drift_rate_hz_per_s: float = 0.0
    shot_period_s: float = 1.014
    nominal_offset_hz: float = 0.0

    def __post_init__(self):
        if self.linewidth_hz < 0 or self.st_limit_hz < 0 or self.drift_rate_hz_per_s < 0:
            raise ValueError("linewidths and drift rate must be non-negative")
        if self.st_limit_hz > self.linewidth_hz:
            raise ValueError("st_limit_hz cannot exceed linewidth_hz")
        if self.linewidth_hz > 0:
            if self.coherence_time_ns <= 0:
                raise ValueError("coherence_time_ns must be positive")
            expected = 1e9 / (np.pi * self.linewidth_hz)
            ratio = self.coherence_time_ns / expected
            if not 0.1 <= ratio <= 10.0:
                raise ValueError(
                    f"coherence_time_ns={self.coherence_time_ns} inconsistent with "
                    f"linewidth_hz={self.linewidth_hz} (expected ~{expected:.0f} ns within 10x)"
                )
        if self.shot_period_s <= 0:
            raise ValueError("shot_period_s must be positive")

    @property
    def jitter_hz(self) -> float:
        return self.drift_rate_hz_per_s * self.shot_period_s


@dataclass(frozen=True)
class GateEnvelope:
    """AOM intensity gate.

    ``delay_ns`` and ``delay_ns + width_ns`` are the half-maximum points of
    the raised-cosine rise and fall, so the time integral equals
    ``width_ns``. ``tilt_ns_per_mm`` delays the gate linearly across y,
    measured from ``tilt_origin_mm``.
    """

    width_ns: float = 655.0
    edge_ns: float = 10.0
    delay_ns: float = 150.0
    tilt_ns_per_mm: float = 0.0
    tilt_origin_mm: float = 7.5
    diffraction_shift_hz: float = 210e6

    def __post_init__(self):
        if self.width_ns <= 0 or self.edge_ns <= 0:
            raise ValueError("width_ns and edge_ns must be positive")
        if self.full_edge_ns > self.width_ns:
            raise ValueError("edges longer than the gate width")

    @property
    def full_edge_ns(self) -> float:
        """Duration of one raised-cosine edge from 0 to 1."""
        return self.edge_ns / _RC_10_90

    @property
    def end_ns(self) -> float:
        return self.delay_ns + self.width_ns

    def support(self, y_range_mm: float = 0.0) -> tuple[float, float]:
        """Time interval outside which the gate is zero for y in [0, y_range_mm]."""
        half = 0.5 * self.full_edge_ns
        shifts = (self.tilt_ns_per_mm * (0.0 - self.tilt_origin_mm),
                  self.tilt_ns_per_mm * (y_range_mm - self.tilt_origin_mm))
        return self.delay_ns - half + min(shifts), self.end_ns + half + max(shifts)


def gate(envelope: GateEnvelope, t_ns, y_mm=0.0):
    """Envelope factor in [0, 1] at time ``t_ns`` and position ``y_mm``."""
    t = np.asarray(t_ns, dtype=float)
    shape = np.broadcast_shapes(t.shape, np.shape(y_mm))
    local = t - envelope.tilt_ns_per_mm * (np.asarray(y_mm, dtype=float) - envelope.tilt_origin_mm)
    local = np.broadcast_to(local, shape).reshape(-1)
    d = envelope.full_edge_ns
    lo, hi = envelope.delay_ns - 0.5 * d, envelope.end_ns - 0.5 * d
    out = ((local >= lo + d) & (local <= hi)).astype(float)
    rising = (local > lo) & (local < lo + d)
    falling = (local > hi) & (local < hi + d)
    out[rising] = 0.5 * (1.0 - np.cos(np.pi * (local[rising] - lo) / d))
    out[falling] = 0.5 * (1.0 + np.cos(np.pi * (local[falling] - hi) / d))
    return out.reshape(shape) if shape else float(out[0])


@dataclass(frozen=True)
class PhasePath:
    """Sampled phase trajectory on a regular grid starting at ``t0_ns``."""

    t0_ns: float
    dt_ns: float
    phase: np.ndarray = field(repr=False)

    @property
    def times_ns(self) -> np.ndarray:
        return self.t0_ns + self.dt_ns * np.arange(self.phase.size)

    def __call__(self, t_ns):
        return np.interp(t_ns, self.times_ns, self.phase)


def sample_phase_path(model: LaserNoiseModel, duration_ns: float, dt_ns: float, seed,
                      *, short_term: bool = False, t0_ns: float = 0.0, stream: int = 0) -> PhasePath:
    """Brownian phase with increment variance ``2 pi linewidth dt``.

    With ``short_term`` the Schawlow-Townes limit replaces the long-term
    linewidth as diffusion rate. The initial phase is uniform on [0, 2 pi).
    """
    if dt_ns <= 0:
        raise ValueError("dt_ns must be positive")
    if duration_ns < dt_ns:
        raise ValueError("duration_ns must be at least dt_ns")
    linewidth = model.st_limit_hz if short_term else model.linewidth_hz
    n = int(np.ceil(duration_ns / dt_ns)) + 1
    rng = _rng(seed, 1, stream)
    phi0 = rng.uniform(0.0, 2.0 * np.pi)
    sigma = np.sqrt(2.0 * np.pi * linewidth * dt_ns * 1e-9)
    steps = rng.standard_normal(n - 1) * sigma
    phase = phi0 + np.concatenate(([0.0], np.cumsum(steps)))
    return PhasePath(t0_ns, dt_ns, phase)


def shot_detunings(model1: LaserNoiseModel, model2: LaserNoiseModel, shot_index: int, seed,
                   *, ceiling_hz: float = DEFAULT_BEAT_CEILING_HZ) -> tuple[float, float]:
    """Per-shot frequency offsets (Hz) of both lasers from the common carrier.

    Each laser sits at its nominal offset plus a Gaussian draw of width
    ``jitter_hz``; the second offset is adjusted so the beat stays within
    ``+-ceiling_hz``, beyond which fringes are unresolvable.
    """
    rng = _rng(seed, 2, shot_index)
    d1, d2 = rng.standard_normal(2)
    off1 = model1.nominal_offset_hz + model1.jitter_hz * d1
    off2 = model2.nominal_offset_hz + model2.jitter_hz * d2
    beat = float(np.clip(off2 - off1, -ceiling_hz, ceiling_hz))
    return off1, off1 + beat


def shot_frequencies(model1: LaserNoiseModel, model2: LaserNoiseModel, shot_index: int, seed,
                     *, wavelength_nm: float = 532.0,
                     ceiling_hz: float = DEFAULT_BEAT_CEILING_HZ) -> tuple[float, float]:
    """Angular frequencies (omega1, omega2) of both lasers for one shot.

    The AOM shifts of the two beams are taken as compensated by temperature
    tuning, so the carrier is ``c / wavelength`` for both.
    """
    nu0 = C_LIGHT / (wavelength_nm * 1e-9)
    off1, off2 = shot_detunings(model1, model2, shot_index, seed, ceiling_hz=ceiling_hz)
    return 2.0 * np.pi * (nu0 + off1), 2.0 * np.pi * (nu0 + off2)
