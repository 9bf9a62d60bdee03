import dataclasses

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from streaklab.budget import (BudgetInput, BudgetReport, compute_budget, detected_flux, distinguishability_time,
                              fourier_limit, fringe_position_uncertainty, photon_flux, schawlow_townes, sql_phase,
                              sql_slope_floor)
from streaklab.io import emit_kv, parse_kv


def test_flux_chain_hand_values():
    # 10 mW at 3.54e15 rad/s: 0.01 / (1.0546e-34 * 3.54e15) = 2.6787e16 /s
    assert photon_flux(0.01, 3.54e15) == pytest.approx(2.67868e7, rel=1e-5)
    assert detected_flux(2.67868e7, 1e-3, 0.1037) == pytest.approx(2777.79, rel=1e-5)
    assert sql_phase(2680.0) == pytest.approx(9.6583e-3, rel=1e-4)
    assert fringe_position_uncertainty(2 * np.pi, 1.88) == pytest.approx(1.88)
    assert fourier_limit(603.0) == pytest.approx(0.829187, rel=1e-6)
    assert distinguishability_time(-54.9e6) == pytest.approx(18.2149, rel=1e-5)
    # 4 pi hbar omega / (tau^2 P) with tau = 0.2 ns, P = 50 mW
    assert schawlow_townes(3.54e15, 2e-10, 0.05) == pytest.approx(2345.63, rel=1e-5)


def test_report_carries_both_detected_flux_bases():
    r = compute_budget(BudgetInput())
    assert r.detected_per_ns == pytest.approx(2777.79, rel=1e-5)
    assert r.quoted_detected_per_ns == 2680.0
    assert r.detected_flux_discrepancy == pytest.approx(0.0365, abs=1e-3)
    off = compute_budget(BudgetInput(quoted_detected_per_ns=None))
    assert off.quoted_sql_phase_rad is None


def test_doubling_power_doubles_detected_flux():
    a = compute_budget(BudgetInput())
    b = compute_budget(BudgetInput(power_w=0.1))
    assert b.detected_per_ns == pytest.approx(2 * a.detected_per_ns)
    assert b.st_linewidth_hz == pytest.approx(a.st_linewidth_hz / 2)


@given(p=st.floats(1e-4, 10), qe=st.floats(0.01, 1), beat=st.floats(1e5, 1e9))
@settings(max_examples=50, deadline=None)
def test_report_round_trips_through_kv(p, qe, beat):
    r = compute_budget(BudgetInput(power_w=p, qe=qe, beat_hz=beat))
    assert BudgetReport(**parse_kv(emit_kv(r.as_dict()))) == r


@given(n=st.floats(1.0, 1e9))
@settings(max_examples=100, deadline=None)
def test_sql_scales_as_inverse_root(n):
    assert sql_phase(4 * n) == pytest.approx(sql_phase(n) / 2)


def test_slope_floor_matches_definition():
    f = sql_slope_floor(1e6, 500.0, 0.5)
    assert f == pytest.approx(5e-4 / (2 * np.pi * 0.5 * 500.0))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        sql_phase(0)
    with pytest.raises(ValueError):
        BudgetInput(qe=1.5)
    with pytest.raises(ValueError):
        BudgetInput(beat_hz=0)
    with pytest.raises(ValueError):
        fourier_limit(0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        BudgetInput().power_w = 1


def test_brownian_slope_variance_symbolic():
    """Least-squares slope of W(t) on [0, T]: Var = 6 D / (5 T) for E[dW^2] = D dt."""
    t, s, T, D = sp.symbols("t s T D", positive=True)
    w = (t - T / 2) / sp.integrate((t - T / 2) ** 2, (t, 0, T))
    ws = w.subs(t, s)
    # Cov[W(t), W(s)] = D min(t, s)
    var = sp.integrate(sp.integrate(w * ws * D * sp.Min(t, s), (s, 0, T)), (t, 0, T))
    assert sp.simplify(var - 6 * D / (5 * T)) == 0
