"""Two-beam field superposition at the streak-camera photocathode.

Beam 1 (source A, "cheb") travels with transverse wave vector along -y,
beam 2 (source B, "oxeb") along +y. All functions are pure and accept
numpy arrays for the coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

C_LIGHT = 299_792_458.0  # m/s
HBAR = 1.054_571_817e-34  # J s

MAX_PARAXIAL_THETA = 0.01
MAX_RELATIVE_DK = 1e-6


def beat_to_angular(delta_nu_hz):
    """Beat frequency (Hz) to angular frequency difference (rad/s)."""
    return 2.0 * np.pi * np.asarray(delta_nu_hz, dtype=float)


def angular_to_beat(delta_omega):
    """Angular frequency difference (rad/s) to beat frequency (Hz)."""
    return np.asarray(delta_omega, dtype=float) / (2.0 * np.pi)


@dataclass(frozen=True)
class BeamGeometry:
    """Crossing geometry of the two collimated beams.

    ``theta_rad`` is the tilt of *each* beam from the detector normal, so
    the full crossing angle is ``2 * theta_rad``. ``orientation`` is +1 when
    +y points along source B's transverse momentum and -1 for the mirrored
    axis convention.
    """

    theta_rad: float = 0.14e-3
    lambda1_nm: float = 532.0
    lambda2_nm: float = 532.0
    z0_m: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        if not 0.0 < self.theta_rad < MAX_PARAXIAL_THETA:
            if self.theta_rad == 0.0:
                raise ValueError("degenerate collinear geometry (theta_rad = 0)")
            raise ValueError(
                f"theta_rad={self.theta_rad!r} outside the paraxial range (0, {MAX_PARAXIAL_THETA})"
            )
        if self.lambda1_nm <= 0 or self.lambda2_nm <= 0:
            raise ValueError("wavelengths must be positive")
        if abs(self.k2 - self.k1) / self.k_mean >= MAX_RELATIVE_DK:
            raise ValueError("beams are not near-degenerate: |k2 - k1| / k_mean >= 1e-6")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    @property
    def k1(self) -> float:
        return 2.0 * np.pi / (self.lambda1_nm * 1e-9)

    @property
    def k2(self) -> float:
        return 2.0 * np.pi / (self.lambda2_nm * 1e-9)

    @property
    def k_mean(self) -> float:
        return 0.5 * (self.k1 + self.k2)

    @property
    def delta_k(self) -> float:
        return self.k2 - self.k1

    @property
    def wave_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """(k1, k2) as (ky, kz) pairs in rad/m, in this geometry's y convention."""
        s, c = np.sin(self.theta_rad), np.cos(self.theta_rad)
        o = self.orientation
        return (np.array([-o * self.k1 * s, self.k1 * c]),
                np.array([o * self.k2 * s, self.k2 * c]))

    def mirrored(self) -> "BeamGeometry":
        """Same beams described with the y axis reversed."""
        return BeamGeometry(self.theta_rad, self.lambda1_nm, self.lambda2_nm, self.z0_m, -self.orientation)


@dataclass(frozen=True)
class FieldPair:
    """Mean detected rates, instantaneous phases and frequencies of both beams.

    Rates are photoelectrons per ns. ``omega1``/``omega2`` are angular
    frequencies in rad/s; only their difference enters the fringe pattern.
    """

    rate1: float
    rate2: float
    omega1: float = 2.0 * np.pi * C_LIGHT / 532e-9
    omega2: float = 2.0 * np.pi * C_LIGHT / 532e-9
    phase1: float = 0.0
    phase2: float = 0.0
    mutual_visibility: float = 1.0

    def __post_init__(self):
        if self.rate1 < 0 or self.rate2 < 0:
            raise ValueError("detection rates must be non-negative")
        if not 0.0 <= self.mutual_visibility <= 1.0:
            raise ValueError("mutual_visibility must lie in [0, 1]")

    @property
    def delta_omega(self) -> float:
        return self.omega2 - self.omega1

    @property
    def delta_phase(self) -> float:
        return self.phase2 - self.phase1

    @property
    def theoretical_visibility(self) -> float:
        total = self.rate1 + self.rate2
        if total == 0:
            return 0.0
        return 2.0 * self.mutual_visibility * np.sqrt(self.rate1 * self.rate2) / total


def interference_phase(fp: FieldPair, geo: BeamGeometry, y, t, delta_phase=None):
    """Interference phase at transverse position ``y`` (m) and time ``t`` (s).

    ``delta_phase`` overrides ``fp.delta_phase`` and may be an array
    (a sampled relative phase trajectory evaluated at ``t``).
    """
    dphi = fp.delta_phase if delta_phase is None else delta_phase
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    spatial = 2.0 * geo.k_mean * np.sin(geo.theta_rad) * geo.orientation * y
    axial = geo.delta_k * np.cos(geo.theta_rad) * geo.z0_m
    return spatial + axial - fp.delta_omega * t + dphi


def detection_rate(fp: FieldPair, geo: BeamGeometry, y, t, delta_phase=None):
    """Photodetection rate ``r1 + r2 + 2 v sqrt(r1 r2) cos(phase)``; never negative."""
    phi = interference_phase(fp, geo, y, t, delta_phase)
    cross = 2.0 * fp.mutual_visibility * np.sqrt(fp.rate1 * fp.rate2)
    rate = fp.rate1 + fp.rate2 + cross * np.cos(phi)
    # clip rounding residue at exact destructive nulls
    return np.maximum(rate, 0.0)


def fringe_spacing(geo: BeamGeometry) -> float:
    """Distance between fringe maxima along y, in metres."""
    s = np.sin(geo.theta_rad)
    if s == 0:
        raise ValueError("degenerate collinear geometry")
    return 2.0 * np.pi / (2.0 * geo.k_mean * s)


def equiphase_slope(fp: FieldPair, geo: BeamGeometry) -> float:
    """Velocity dy/dt of the equiphase lines in mm/ns (signed)."""
    s = np.sin(geo.theta_rad)
    if s == 0:
        raise ValueError("degenerate collinear geometry")
    v_m_per_s = fp.delta_omega / (2.0 * geo.k_mean * s * geo.orientation)
    return v_m_per_s * 1e-6
