import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from streaklab.sources import (GateEnvelope, LaserNoiseModel, gate, sample_phase_path, shot_detunings,
                               shot_frequencies)


def test_wiener_increment_variance():
    # Var[phi(T) - phi(0)] = 2 pi linewidth T for a Brownian phase
    model = LaserNoiseModel(linewidth_hz=3e6, coherence_time_ns=106.0)
    T = 100.0
    ends = np.array([np.subtract(*sample_phase_path(model, T, 1.0, seed)(np.array([T, 0.0])))
                     for seed in range(10_000)])
    expected = 2 * np.pi * 3e6 * T * 1e-9
    assert ends.var() == pytest.approx(expected, rel=0.05)
    assert abs(ends.mean()) < 4 * np.sqrt(expected / ends.size)


def test_short_term_uses_schawlow_townes_rate():
    model = LaserNoiseModel(st_limit_hz=2.5e3)
    T = 1000.0
    ends = np.array([np.ptp(sample_phase_path(model, T, T, s, short_term=True).phase) for s in range(4000)])
    assert np.mean(ends ** 2) == pytest.approx(2 * np.pi * 2.5e3 * T * 1e-9, rel=0.1)


def test_phase_coherence_decays_as_lorentzian():
    # <cos dphi(tau)> = exp(-pi linewidth tau)
    model = LaserNoiseModel(linewidth_hz=1e6, coherence_time_ns=318.0)
    paths = np.array([sample_phase_path(model, 400, 4.0, s).phase for s in range(3000)])
    lag = 50
    tau_ns = lag * 4.0
    coh = np.mean(np.cos(paths[:, lag:] - paths[:, :-lag]))
    assert coh == pytest.approx(np.exp(-np.pi * 1e6 * tau_ns * 1e-9), abs=0.02)


def test_phase_path_is_deterministic_and_stream_separated():
    m = LaserNoiseModel()
    a = sample_phase_path(m, 50, 1.0, 3)
    np.testing.assert_array_equal(a.phase, sample_phase_path(m, 50, 1.0, 3).phase)
    assert not np.array_equal(a.phase, sample_phase_path(m, 50, 1.0, 3, stream=1).phase)


def test_noise_model_validation():
    with pytest.raises(ValueError, match="inconsistent"):
        LaserNoiseModel(linewidth_hz=3e6, coherence_time_ns=1e5)
    with pytest.raises(ValueError):
        LaserNoiseModel(st_limit_hz=5e6)
    with pytest.raises(ValueError):
        sample_phase_path(LaserNoiseModel(), 10, 0.0, 1)
    with pytest.raises(ValueError):
        sample_phase_path(LaserNoiseModel(), 0.5, 1.0, 1)


def test_shot_jitter_statistics():
    m = LaserNoiseModel(drift_rate_hz_per_s=1e7, shot_period_s=1.0, nominal_offset_hz=2e6)
    offs = np.array([shot_detunings(m, m, i, 11) for i in range(4000)])
    assert offs[:, 0].mean() == pytest.approx(2e6, abs=4 * 1e7 / np.sqrt(4000))
    assert offs[:, 0].std() == pytest.approx(1e7, rel=0.05)
    beat = offs[:, 1] - offs[:, 0]
    assert beat.std() == pytest.approx(np.sqrt(2) * 1e7, rel=0.05)
    assert shot_detunings(m, m, 5, 11) == shot_detunings(m, m, 5, 11)


def test_beat_clamped_at_ceiling():
    a = LaserNoiseModel()
    b = LaserNoiseModel(nominal_offset_hz=5e9)
    off1, off2 = shot_detunings(a, b, 0, 0)
    assert off2 - off1 == pytest.approx(1e9)
    w1, w2 = shot_frequencies(a, LaserNoiseModel(nominal_offset_hz=54.9e6), 0, 0)
    assert (w2 - w1) / (2 * np.pi) == pytest.approx(54.9e6, rel=1e-6)


def test_gate_integral_equals_width():
    env = GateEnvelope(width_ns=655, edge_ns=10, delay_ns=150)
    t = np.linspace(0, 1000, 2_000_001)
    area = trapezoid(gate(env, t), t)
    assert area == pytest.approx(655.0, rel=1e-6)
    assert gate(env, 150.0) == pytest.approx(0.5)
    assert gate(env, 805.0) == pytest.approx(0.5)


def test_gate_edge_10_90_time():
    env = GateEnvelope(edge_ns=10, delay_ns=100)
    t = np.linspace(80, 120, 400_001)
    g = gate(env, t)
    t10, t90 = t[np.argmax(g >= 0.1)], t[np.argmax(g >= 0.9)]
    assert t90 - t10 == pytest.approx(10.0, abs=1e-3)


def test_pulse_front_tilt_shifts_gate():
    env = GateEnvelope(delay_ns=202, tilt_ns_per_mm=0.5, tilt_origin_mm=7.5)
    assert gate(env, 202.0, 7.5) == pytest.approx(0.5)
    assert gate(env, 207.0, 17.5) == pytest.approx(0.5)
    lo, hi = env.support(15.0)
    assert gate(env, lo - 1e-9, 0.0) == 0.0 and gate(env, hi + 1e-9, 15.0) == 0.0


@given(t=st.floats(-100, 1200), y=st.floats(0, 15), tilt=st.floats(-1, 1))
@settings(max_examples=200, deadline=None)
def test_gate_bounded(t, y, tilt):
    assert 0.0 <= gate(GateEnvelope(tilt_ns_per_mm=tilt), t, y) <= 1.0


def test_gate_validation():
    with pytest.raises(ValueError):
        GateEnvelope(width_ns=0)
    with pytest.raises(ValueError):
        GateEnvelope(width_ns=10, edge_ns=10)
