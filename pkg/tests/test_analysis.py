import dataclasses

import numpy as np
import pytest
from scipy import stats

from shotlib import beat_config, fitted_shot, simulate
from streaklab.analysis import (InsufficientEvents, NoFringesDetected, _spectral_seed, estimate_fringes,
                                find_overlap, subset_uncertainty, which_path)
from streaklab.detector import Interferogram
from streaklab.physics import BeamGeometry

# ~90k events per shot: fast fits for the unit tests
LOW = 0.05


def test_spectral_seed_on_synthetic_cosine():
    y = (np.arange(214) + 0.5) * 15 / 214
    t = (np.arange(150) + 0.5) * 3.4
    fy, ft = 0.5263, 0.0211
    img = 100 * (1 + np.cos(2 * np.pi * (fy * y[:, None] - ft * t[None, :])))
    got = _spectral_seed(img, 3.4, 15 / 214)
    assert got[0] == pytest.approx(fy, rel=0.02)
    assert got[1] == pytest.approx(ft, rel=0.05)
    assert _spectral_seed(np.full((214, 150), 100.0) + np.random.default_rng(0).normal(0, 1, (214, 150)),
                          3.4, 15 / 214) is None


def test_overlap_window_brackets_both_gates():
    ig = simulate(beat_config(20e6, rate_scale=LOW), 1)
    lo, hi = find_overlap(ig.events, ig.detector)
    # A opens at 202 ns (tilted by +-3.75 ns), B closes at 805 ns
    assert lo == pytest.approx(202, abs=10)
    assert hi == pytest.approx(805, abs=10)
    assert find_overlap(np.empty((0, 2)), ig.detector) is None


def test_ridge_slope_recovers_truth():
    shot = fitted_shot(30e6, 2, rate_scale=LOW)
    est, truth = shot.est, shot.truth
    assert est.slope_mm_per_ns == pytest.approx(truth["slope_mm_per_ns"], abs=5 * est.slope_stderr_total)
    assert est.spacing_mm == pytest.approx(1.9, abs=0.01)
    assert est.beat_freq_mhz == pytest.approx(30.0, abs=0.83)
    assert est.visibility == pytest.approx(1.0, abs=0.02)
    assert shot.folded == pytest.approx(est.visibility, abs=0.03)
    assert est.residual_rms == pytest.approx(1.0, abs=0.1)
    assert est.beat_freq_resolution_mhz >= 1e3 / (2 * est.overlap_ns)


def test_standard_errors_match_seed_scatter():
    # without phase diffusion the scatter is pure shot noise; the observed information must predict it
    shots = [fitted_shot(-12e6, s, rate_scale=LOW, st_limit_hz=0.0) for s in range(24)]
    beats = np.array([s.est.beat_freq_mhz for s in shots])
    errs = np.array([s.est.beat_freq_stderr_mhz for s in shots])
    ratio = beats.std(ddof=1) / np.median(errs)
    # chi distribution with 23 dof: 0.65..1.35 covers > 99.5 %
    assert 0.65 < ratio < 1.35


def test_total_slope_error_covers_phase_diffusion():
    # with Schawlow-Townes diffusion the shot-noise error alone is far too small
    shots = [fitted_shot(-12e6, s, rate_scale=LOW) for s in range(24)]
    slopes = np.array([s.est.slope_mm_per_ns for s in shots])
    total = np.median([s.est.slope_stderr_total for s in shots])
    stat = np.median([s.est.slope_stderr for s in shots])
    assert 0.65 < slopes.std(ddof=1) / total < 1.35
    assert slopes.std(ddof=1) / stat > 3


def test_estimator_consistency_over_fifty_shots():
    shots = [fitted_shot(-12e6, s, rate_scale=LOW) for s in range(50)]
    beats = np.array([s.est.beat_freq_mhz for s in shots])
    reported = np.median([s.est.beat_freq_stderr_total_mhz for s in shots])
    assert abs(beats.mean() + 12.0) < 0.83
    assert 0.5 < beats.std(ddof=1) / reported < 2.0


def test_which_path_follows_orientation():
    shot = fitted_shot(30e6, 2, rate_scale=LOW)
    assert shot.verdict.higher_energy_source == "B"
    assert shot.verdict.path_assignment == {"A": "AP", "B": "BP"}
    mirrored = which_path(shot.est, BeamGeometry().mirrored())
    assert mirrored.higher_energy_source == "A"
    assert "oxeb" in shot.verdict.note


def test_zero_beat_is_undetermined():
    shots = [fitted_shot(0.0, s, rate_scale=LOW) for s in range(20)]
    assert not any(s.verdict.determined for s in shots)
    # |slope| < 2 sigma for about 95 % of null shots
    assert np.mean([abs(s.est.slope_mm_per_ns) < 2 * s.est.slope_stderr_total for s in shots]) >= 0.8


def test_single_source_reports_no_fringes():
    cfg = beat_config(20e6, rate_scale=LOW)
    cfg = dataclasses.replace(cfg, source_b=dataclasses.replace(cfg.source_b, photon_rate_per_ns=0.0))
    with pytest.raises(NoFringesDetected):
        estimate_fringes(simulate(cfg, 3))


def test_too_few_events():
    ig = simulate(beat_config(20e6, rate_scale=LOW), 1)
    sparse = Interferogram(ig.events[::500], ig.detector, ig.meta)
    with pytest.raises(InsufficientEvents):
        estimate_fringes(sparse, window=(300.0, 700.0))


def test_subset_errors_scale_as_inverse_root():
    ig = simulate(beat_config(25e6, rate_scale=LOW * 4), 6)
    table = subset_uncertainty(ig, [0.1, 0.2, 0.4, 1.0], seed=1)
    assert len(table.fitted) == 4
    assert -0.6 <= table.exponent <= -0.4
    full = estimate_fringes(ig, window=find_overlap(ig.events, ig.detector))
    assert table.rows[-1].slope_stderr == full.slope_stderr


def test_subset_error_ratio_and_trend():
    ig = simulate(beat_config(25e6, rate_scale=LOW * 4), 7)
    fractions = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0]
    table = subset_uncertainty(ig, fractions, seed=2)
    errs = {r.fraction: r.slope_stderr for r in table.rows}
    assert errs[0.25] / errs[1.0] == pytest.approx(2.0, rel=0.3)
    assert stats.spearmanr([r.n_events for r in table.rows], [r.slope_stderr for r in table.rows])[0] < -0.8
    skipped = subset_uncertainty(ig, [0.0001, 1.0], seed=1, min_events=5000)
    assert "skipped" in skipped.rows[0].note
    with pytest.raises(ValueError):
        subset_uncertainty(ig, [1.5])
