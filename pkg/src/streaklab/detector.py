"""Photon-counting streak camera: Poisson event generation and binning."""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .physics import BeamGeometry, FieldPair, interference_phase
from .sources import GateEnvelope, LaserNoiseModel, PhasePath, _rng, gate, sample_phase_path, shot_detunings

MAX_EXPECTED_EVENTS = 1e9
_CHUNK = 2_000_000


@dataclass(frozen=True)
class SourceState:
    """One laser as seen by the camera.

    ``photon_rate_per_ns`` is the photon flux reaching the entrance slit;
    the camera scales it by slit transmission and quantum efficiency.
    """

    name: str
    photon_rate_per_ns: float
    noise: LaserNoiseModel = field(default_factory=LaserNoiseModel)
    gate: GateEnvelope = field(default_factory=GateEnvelope)

    def __post_init__(self):
        if self.photon_rate_per_ns < 0:
            raise ValueError(f"{self.name}: photon rate must be non-negative")


@dataclass(frozen=True)
class DetectorConfig:
    qe: float = 0.1037
    slit_factor: float = 1e-3
    sweep_ns_per_mm: float = 50.0
    sweep_length_mm: float = 20.0
    y_range_mm: float = 15.0
    y_res_mm: float = 0.070
    t_res_fraction: float = 0.0034
    ccd_cols: int = 1392
    ccd_rows: int = 1024
    adc_bits: int = 12
    gray_per_event: int = 1
    saturation_events: int = 50
    dark_rate_per_cm2_s: float = 100.0
    photocathode_mm: tuple[float, float] = (8.0, 2.0)

    def __post_init__(self):
        if not 0.0 < self.qe <= 1.0:
            raise ValueError("qe must lie in (0, 1]")
        if not 0.0 < self.slit_factor <= 1.0:
            raise ValueError("slit_factor must lie in (0, 1]")
        for name in ("sweep_ns_per_mm", "sweep_length_mm", "y_range_mm", "y_res_mm", "t_res_fraction"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.ccd_cols < 1 or self.ccd_rows < 1 or self.adc_bits < 1:
            raise ValueError("CCD geometry and ADC depth must be positive")
        if self.dark_rate_per_cm2_s < 0 or self.saturation_events < 1 or self.gray_per_event < 1:
            raise ValueError("invalid dark rate, saturation or gain")

    @property
    def window_ns(self) -> float:
        """Full sweep duration."""
        return self.sweep_ns_per_mm * self.sweep_length_mm

    @property
    def t_res_ns(self) -> float:
        return self.t_res_fraction * self.window_ns

    @property
    def n_t(self) -> int:
        return max(1, int(round(self.window_ns / self.t_res_ns)))

    @property
    def n_y(self) -> int:
        return max(1, int(round(self.y_range_mm / self.y_res_mm)))

    @property
    def t_edges(self) -> np.ndarray:
        return np.linspace(0.0, self.window_ns, self.n_t + 1)

    @property
    def y_edges(self) -> np.ndarray:
        return np.linspace(0.0, self.y_range_mm, self.n_y + 1)

    @property
    def adc_max(self) -> int:
        return 2 ** self.adc_bits - 1

    @property
    def dark_rate_per_ns(self) -> float:
        area_cm2 = self.photocathode_mm[0] * self.photocathode_mm[1] / 100.0
        return self.dark_rate_per_cm2_s * area_cm2 * 1e-9

    def detected_rate(self, source: SourceState) -> float:
        """Photoelectrons per ns produced by ``source`` over the whole y range."""
        return source.photon_rate_per_ns * self.slit_factor * self.qe


@dataclass
class Interferogram:
    """Single-exposure photoelectron record.

    ``events`` is an (n, 2) array of (t_ns, y_mm). ``meta`` carries
    acquisition settings; ``truth`` the simulated ground truth, kept apart
    so analysis never reads it.
    """

    events: np.ndarray
    detector: DetectorConfig
    meta: dict = field(default_factory=dict)
    truth: dict = field(default_factory=dict)

    def __post_init__(self):
        self.events = np.asarray(self.events, dtype=float).reshape(-1, 2)

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def t(self) -> np.ndarray:
        return self.events[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.events[:, 1]

    @property
    def counts(self) -> np.ndarray:
        return bin_events(self.events, self.detector)

    @property
    def image(self) -> np.ndarray:
        return ccd_image(self.events, self.detector)


@numba.njit(cache=True)
def _gate_value(local, lo, d, hi):
    if local <= lo or local >= hi + d:
        return 0.0
    if local < lo + d:
        return 0.5 * (1.0 - np.cos(np.pi * (local - lo) / d))
    if local > hi:
        return 0.5 * (1.0 + np.cos(np.pi * (local - hi) / d))
    return 1.0


@numba.njit(cache=True)
def _shot_intensity(t, y, rates, gates, phase_coef, path, path_t0, path_dt, out):
    # gates rows: (lo, d, hi, tilt, origin); phase = ky*y + kt*t + c0 + path(t)
    r1, r2, cross, inv_y = rates[0], rates[1], rates[2], rates[3]
    ky, kt, c0, yc = phase_coef[0], phase_coef[1], phase_coef[2], phase_coef[3]
    last = path.size - 1
    for i in range(t.size):
        ti, yi = t[i], y[i]
        g1 = _gate_value(ti - gates[0, 3] * (yi - gates[0, 4]), gates[0, 0], gates[0, 1], gates[0, 2])
        g2 = _gate_value(ti - gates[1, 3] * (yi - gates[1, 4]), gates[1, 0], gates[1, 1], gates[1, 2])
        x = (ti - path_t0) / path_dt
        if x <= 0.0:
            dphi = path[0]
        elif x >= last:
            dphi = path[last]
        else:
            k = int(x)
            dphi = path[k] + (x - k) * (path[k + 1] - path[k])
        phi = ky * (yi - yc) + kt * ti + c0 + dphi
        lam = r1 * g1 + r2 * g2 + cross * np.sqrt(g1 * g2) * np.cos(phi)
        out[i] = max(lam, 0.0) * inv_y
    return out


class ShotModel:
    """Intensity field lambda(t, y) of one shot, in events per ns per mm."""

    def __init__(self, sources, geometry: BeamGeometry, detector: DetectorConfig, seed=0,
                 shot_index: int = 0, mutual_visibility: float = 1.0, phase_dt_ns: float = 1.0):
        a, b = sources
        self.sources = (a, b)
        self.geometry = geometry
        self.detector = detector
        # only the frequency difference enters, so work relative to the common carrier
        off1, off2 = shot_detunings(a.noise, b.noise, shot_index, seed)
        self.beat_hz = off2 - off1
        r1, r2 = detector.detected_rate(a), detector.detected_rate(b)
        self.fields = FieldPair(r1, r2, 2.0 * np.pi * off1, 2.0 * np.pi * off2,
                                mutual_visibility=mutual_visibility)
        window = detector.window_ns
        p1, p2 = (sample_phase_path(s.noise, window, phase_dt_ns, seed, short_term=True, stream=2 * shot_index + i)
                  for i, s in enumerate(self.sources))
        self.relative_phase = PhasePath(p1.t0_ns, p1.dt_ns, p2.phase - p1.phase)
        self.bound = (np.sqrt(r1) + np.sqrt(r2)) ** 2 / detector.y_range_mm

    def lit_interval(self) -> tuple[float, float]:
        """Sweep interval where at least one gate can be open."""
        y = self.detector.y_range_mm
        lo, hi = [], []
        for s, r in zip(self.sources, (self.fields.rate1, self.fields.rate2)):
            if r > 0:
                a, b = s.gate.support(y)
                lo.append(a)
                hi.append(b)
        if not lo:
            return 0.0, 0.0
        return max(0.0, min(lo)), min(self.detector.window_ns, max(hi))

    def intensity(self, t_ns, y_mm):
        """Compiled evaluation of ``reference_intensity`` for 1-D arrays."""
        fp, det, geo = self.fields, self.detector, self.geometry
        t = np.ascontiguousarray(t_ns, dtype=float).ravel()
        y = np.ascontiguousarray(y_mm, dtype=float).ravel()
        cross = 2.0 * fp.mutual_visibility * np.sqrt(fp.rate1 * fp.rate2)
        rates = np.array([fp.rate1, fp.rate2, cross, 1.0 / det.y_range_mm])
        gates = np.array([[s.gate.delay_ns - 0.5 * s.gate.full_edge_ns, s.gate.full_edge_ns,
                           s.gate.end_ns - 0.5 * s.gate.full_edge_ns, s.gate.tilt_ns_per_mm, s.gate.tilt_origin_mm]
                          for s in self.sources])
        ky = 2.0 * geo.k_mean * np.sin(geo.theta_rad) * geo.orientation * 1e-3
        kt = -fp.delta_omega * 1e-9
        c0 = geo.delta_k * np.cos(geo.theta_rad) * geo.z0_m
        coef = np.array([ky, kt, c0, 0.5 * det.y_range_mm])
        path = self.relative_phase
        return _shot_intensity(t, y, rates, gates, coef, path.phase, path.t0_ns, path.dt_ns, np.empty(t.size))

    def reference_intensity(self, t_ns, y_mm):
        """Intensity from the physics-core phase and gate functions (broadcasting)."""
        fp, det = self.fields, self.detector
        g1 = gate(self.sources[0].gate, t_ns, y_mm)
        g2 = gate(self.sources[1].gate, t_ns, y_mm)
        y_m = (np.asarray(y_mm) - 0.5 * det.y_range_mm) * 1e-3
        dphi = self.relative_phase(t_ns)
        phi = interference_phase(fp, self.geometry, y_m, np.asarray(t_ns) * 1e-9, delta_phase=dphi)
        cross = 2.0 * fp.mutual_visibility * np.sqrt(fp.rate1 * g1 * fp.rate2 * g2)
        lam = fp.rate1 * g1 + fp.rate2 * g2 + cross * np.cos(phi)
        return np.maximum(lam, 0.0) / det.y_range_mm

    def truth(self) -> dict:
        fp, geo = self.fields, self.geometry
        spacing_mm = np.pi / (geo.k_mean * np.sin(geo.theta_rad)) * 1e3
        beat = self.beat_hz
        return {
            "beat_hz": beat,
            "slope_mm_per_ns": beat * spacing_mm * 1e-9 * geo.orientation,
            "spacing_mm": spacing_mm,
            "rate1_per_ns": fp.rate1,
            "rate2_per_ns": fp.rate2,
            "visibility": fp.theoretical_visibility,
            "higher_energy": "B" if beat > 0 else ("A" if beat < 0 else "none"),
        }


def thin_poisson(intensity, bound: float, t_range, y_range, rng: np.random.Generator) -> np.ndarray:
    """Sample an inhomogeneous Poisson process on a rectangle by thinning.

    ``intensity(t, y)`` must not exceed ``bound`` anywhere in the rectangle.
    """
    t0, t1 = t_range
    y0, y1 = y_range
    area = max(t1 - t0, 0.0) * max(y1 - y0, 0.0)
    mean = bound * area
    if mean > MAX_EXPECTED_EVENTS:
        raise ValueError(f"expected {mean:.3g} candidate events exceeds the {MAX_EXPECTED_EVENTS:.0e} limit")
    n = rng.poisson(mean) if mean > 0 else 0
    if n == 0:
        return np.empty((0, 2))
    # sorted uniform times from normalized exponential spacings
    gaps = rng.standard_exponential(n + 1)
    t_all = np.cumsum(gaps)
    t_all = t0 + (t1 - t0) * (t_all[:-1] / t_all[-1])
    kept = []
    for start in range(0, n, _CHUNK):
        t = t_all[start:start + _CHUNK]
        y = rng.uniform(y0, y1, t.size)
        u = rng.uniform(0.0, bound, t.size)
        keep = u < intensity(t, y)
        kept.append(np.column_stack((t[keep], y[keep])))
    return np.concatenate(kept)


def simulate_shot(sources, geometry: BeamGeometry, detector: DetectorConfig, seed=0, *,
                  shot_index: int = 0, mutual_visibility: float = 1.0,
                  dark_noise: bool = True) -> Interferogram:
    """Simulate one streak-camera exposure of the two gated lasers."""
    model = ShotModel(sources, geometry, detector, seed, shot_index, mutual_visibility)
    rng = _rng(seed, 3, shot_index)
    t_lo, t_hi = model.lit_interval()
    events = thin_poisson(model.intensity, model.bound, (t_lo, t_hi), (0.0, detector.y_range_mm), rng)
    dark = np.empty((0, 2))
    if dark_noise and detector.dark_rate_per_ns > 0:
        dark_density = detector.dark_rate_per_ns / detector.y_range_mm
        dark = thin_poisson(lambda t, y: np.full(np.shape(t), dark_density), dark_density,
                            (0.0, detector.window_ns), (0.0, detector.y_range_mm), rng)
        events = np.concatenate((events, dark))
    events = np.round(events, 4)
    events[:, 0] = np.clip(events[:, 0], 0.0, detector.window_ns)
    events[:, 1] = np.clip(events[:, 1], 0.0, detector.y_range_mm)
    if len(dark):
        events = events[np.argsort(events[:, 0], kind="stable")]
    meta = {
        "seed": int(seed),
        "shot": int(shot_index),
        "window_ns": detector.window_ns,
        "y_range_mm": detector.y_range_mm,
        "sweep_ns_per_mm": detector.sweep_ns_per_mm,
    }
    return Interferogram(events, detector, meta, model.truth())


def bin_events(events, detector: DetectorConfig) -> np.ndarray:
    """Event counts per instrument resolution cell, shape (n_y, n_t)."""
    ev = np.asarray(events, dtype=float).reshape(-1, 2)
    counts, _, _ = np.histogram2d(ev[:, 1], ev[:, 0], bins=(detector.y_edges, detector.t_edges))
    return counts.astype(np.int64)


def ccd_image(events, detector: DetectorConfig, clip: bool = True) -> np.ndarray:
    """Phosphor-screen frame on the CCD grid, shape (ccd_rows, ccd_cols).

    Every photoelectron becomes one spot of ``gray_per_event`` levels; spots
    sharing a pixel add up to the saturation level.
    """
    ev = np.asarray(events, dtype=float).reshape(-1, 2)
    col = np.minimum((ev[:, 0] / detector.window_ns * detector.ccd_cols).astype(np.int64), detector.ccd_cols - 1)
    row = np.minimum((ev[:, 1] / detector.y_range_mm * detector.ccd_rows).astype(np.int64), detector.ccd_rows - 1)
    flat = np.bincount(row * detector.ccd_cols + col, minlength=detector.ccd_rows * detector.ccd_cols)
    img = flat.reshape(detector.ccd_rows, detector.ccd_cols)
    if not clip:
        return img
    img = np.minimum(img, detector.saturation_events) * detector.gray_per_event
    return np.minimum(img, detector.adc_max).astype(np.uint16)


def expected_image(sources, geometry: BeamGeometry, detector: DetectorConfig, seed=0, *,
                   shot_index: int = 0, mutual_visibility: float = 1.0, dark_noise: bool = True,
                   oversample: int = 8) -> np.ndarray:
    """Expected counts per instrument cell, by midpoint integration of the intensity.

    Uses the same frequency and phase realization as
    ``simulate_shot(..., seed, shot_index=shot_index)``.
    """
    if oversample < 4:
        raise ValueError("oversample must be at least 4")
    model = ShotModel(sources, geometry, detector, seed, shot_index, mutual_visibility)
    nt, ny = detector.n_t * oversample, detector.n_y * oversample
    dt = detector.window_ns / nt
    dy = detector.y_range_mm / ny
    tc = (np.arange(nt) + 0.5) * dt
    out = np.empty((detector.n_y, detector.n_t))
    for j in range(detector.n_y):
        yc = (j * oversample + np.arange(oversample) + 0.5) * dy
        lam = model.reference_intensity(tc[None, :], yc[:, None])
        out[j] = lam.reshape(oversample, detector.n_t, oversample).sum(axis=(0, 2)) * dt * dy
    if dark_noise:
        cell = detector.window_ns / detector.n_t * detector.y_range_mm / detector.n_y
        out += detector.dark_rate_per_ns / detector.y_range_mm * cell
    return out
