"""Fringe parameter estimation and the slope-sign which-path rule.

Model inside the beam-overlap window, with centred coordinates
``tau = t - t_mid`` and ``eta = y - y_mid``::

    lambda(tau, eta) = a + c cos(psi) + s sin(psi),
    psi = 2 pi (fy * eta - ft * tau)

so that ``ft`` (cycles/ns) is the signed beat frequency and the equiphase
lines move with slope ``ft / fy`` (mm/ns).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import ndimage, signal

from .detector import DetectorConfig, Interferogram, bin_events
from .physics import BeamGeometry

PEAK_TO_MEDIAN = 5.0
MIN_EVENTS = 1000
PREFIT_EVENTS = 100_000
DEFAULT_MARGIN_NS = 15.0
DEFAULT_Z_THRESHOLD = 5.0
# sum of both lasers' short-time (Schawlow-Townes) linewidths
DEFAULT_PHASE_DIFFUSION_HZ = 5e3

SOURCE_NAMES = {"A": "cheb", "B": "oxeb"}
PATHS = {"A": "AP", "B": "BP"}


class AnalysisError(RuntimeError):
    pass


class NoFringesDetected(AnalysisError):
    pass


class InsufficientEvents(AnalysisError):
    pass


class FitDidNotConverge(AnalysisError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class FringeEstimate:
    """Fitted fringe parameters with standard errors from the observed information.

    ``slope_stderr`` is the shot-noise error only; ``slope_stderr_phase``
    adds the slope scatter expected from relative-phase diffusion during the
    window. ``beat_freq_resolution_mhz`` never drops below the Fourier
    limit ``1 / (2 * overlap_ns)``.
    """

    spatial_freq_cyc_per_mm: float
    slope_mm_per_ns: float
    beat_freq_mhz: float
    visibility: float
    phase0_rad: float
    residual_rms: float
    n_events: int
    slope_stderr: float
    spatial_freq_stderr: float = 0.0
    beat_freq_stderr_mhz: float = 0.0
    visibility_stderr: float = 0.0
    slope_stderr_phase: float = 0.0
    beat_freq_resolution_mhz: float = 0.0
    window_ns: tuple[float, float] = (0.0, 0.0)
    overlap_ns: float = 0.0
    y_center_mm: float = 0.0
    iterations: int = 0
    params: np.ndarray = field(default=None, repr=False)
    covariance: np.ndarray = field(default=None, repr=False)

    @property
    def spacing_mm(self) -> float:
        return 1.0 / self.spatial_freq_cyc_per_mm

    @property
    def spacing_stderr_mm(self) -> float:
        return self.spatial_freq_stderr / self.spatial_freq_cyc_per_mm ** 2

    @property
    def slope_stderr_total(self) -> float:
        return float(np.hypot(self.slope_stderr, self.slope_stderr_phase))

    @property
    def beat_freq_stderr_total_mhz(self) -> float:
        phase_mhz = self.slope_stderr_phase * self.spatial_freq_cyc_per_mm * 1e3
        return float(np.hypot(self.beat_freq_stderr_mhz, phase_mhz))

    @property
    def t_center_ns(self) -> float:
        return 0.5 * (self.window_ns[0] + self.window_ns[1])

    def phase(self, t_ns, y_mm):
        """Fitted fringe phase at image coordinates, maxima at multiples of 2 pi."""
        tau = np.asarray(t_ns) - self.t_center_ns
        eta = np.asarray(y_mm) - self.y_center_mm
        fy = self.spatial_freq_cyc_per_mm
        ft = self.beat_freq_mhz * 1e-3
        return 2.0 * np.pi * (fy * eta - ft * tau) + self.phase0_rad


@dataclass
class WhichPathVerdict:
    higher_energy_source: str
    path_assignment: dict
    confidence: float
    note: str

    @property
    def determined(self) -> bool:
        return self.higher_energy_source != "undetermined"


@dataclass
class FoldedVisibility:
    value: float
    histogram: np.ndarray
    reliable: bool


@dataclass
class SubsetRow:
    fraction: float
    n_events: int
    slope_stderr: float
    note: str = ""


@dataclass
class SubsetTable:
    rows: list
    exponent: float

    @property
    def fitted(self) -> list:
        return [r for r in self.rows if np.isfinite(r.slope_stderr)]


def detector_from_meta(meta: dict) -> DetectorConfig:
    """Rebuild the binning geometry recorded in an event file header."""
    window = float(meta["window_ns"])
    sweep = float(meta.get("sweep_ns_per_mm", 50.0))
    kw = dict(sweep_ns_per_mm=sweep, sweep_length_mm=window / sweep, y_range_mm=float(meta["y_range_mm"]))
    for key in ("y_res_mm", "t_res_fraction"):
        if key in meta:
            kw[key] = float(meta[key])
    return DetectorConfig(**kw)


def _edges(marginal, k, noise_scale):
    d = np.zeros_like(marginal)
    d[k:-k] = marginal[2 * k:] - marginal[:-2 * k]
    level = np.percentile(marginal, 99)
    thresh = max(0.15 * level, 8.0 * np.sqrt(2.0 * max(level, 1.0) * noise_scale))
    rises, rp = signal.find_peaks(d, height=thresh, distance=2 * k)
    falls, fp = signal.find_peaks(-d, height=thresh, distance=2 * k)
    return rises, rp["peak_heights"], falls, fp["peak_heights"]


def find_overlap(events, detector: DetectorConfig, edge_ns: float = 17.0) -> tuple[float, float] | None:
    """Locate the interval where both gated beams illuminate the camera.

    Steps in the time marginal mark gate openings and closings. The overlap
    starts at the later of the two strongest openings and ends at the
    earlier of the two strongest closings. With a single step each way the
    whole lit interval is returned. ``None`` when nothing is lit.
    """
    ev = np.asarray(events).reshape(-1, 2)
    if len(ev) == 0:
        return None
    edges = detector.t_edges
    dt = edges[1] - edges[0]
    marginal = np.histogram(ev[:, 0], bins=edges)[0].astype(float)
    smooth = ndimage.uniform_filter1d(marginal, 3, mode="nearest")
    k = max(1, int(np.ceil(edge_ns / dt)))
    if marginal.size <= 2 * k + 2:
        return None
    # 3-bin smoothing cuts the Poisson variance by 3
    rises, rh, falls, fh = _edges(smooth, k, 1.0 / 3.0)
    if rises.size == 0 or falls.size == 0:
        return None
    top_r = np.sort(rises[np.argsort(rh)[-2:]])
    top_f = np.sort(falls[np.argsort(fh)[-2:]])
    start = top_r[-1]
    stop = top_f[0]
    if stop <= start:
        stop = top_f[-1]
        if stop <= start:
            return None
    centers = 0.5 * (edges[:-1] + edges[1:])
    return float(centers[start]), float(centers[stop])


def _axis_integrals(f, lo, hi, sign, nodes):
    """Integral over [lo, hi] of exp(i sign 2 pi f u) and its first two f-derivatives."""
    x, w = nodes
    u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w
    k = sign * 2j * np.pi * u
    e = np.exp(k * f) * w
    return e.sum(), (k * e).sum(), (k * k * e).sum()


def _nodes(cycles):
    return _leggauss(int(np.ceil(4.0 * abs(cycles))) + 48)


@functools.lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


@numba.njit(cache=True)
def _sum_log_rate(tau, eta, p):
    a, c, s, fy, ft = p[0], p[1], p[2], p[3], p[4]
    total = 0.0
    for i in range(tau.size):
        psi = 2.0 * np.pi * (fy * eta[i] - ft * tau[i])
        lam = a + c * np.cos(psi) + s * np.sin(psi)
        if lam <= 0.0:
            return -np.inf
        total += np.log(lam)
    return total


@numba.njit(cache=True)
def _event_derivatives(tau, eta, p, grad, hess):
    """Gradient and Hessian of -sum(log rate) over the events (accumulated in place)."""
    a, c, s, fy, ft = p[0], p[1], p[2], p[3], p[4]
    g = np.empty(5)
    for i in range(tau.size):
        gy = 2.0 * np.pi * eta[i]
        gt = -2.0 * np.pi * tau[i]
        psi = fy * gy + ft * gt
        cs, sn = np.cos(psi), np.sin(psi)
        osc = c * cs + s * sn
        inv = 1.0 / (a + osc)
        d1 = s * cs - c * sn
        g[0] = inv
        g[1] = cs * inv
        g[2] = sn * inv
        g[3] = d1 * gy * inv
        g[4] = d1 * gt * inv
        for j in range(5):
            grad[j] -= g[j]
            for k in range(j, 5):
                hess[j, k] += g[j] * g[k]
        # minus the second derivatives of the rate, weighted by 1/rate
        hess[1, 3] += sn * gy * inv
        hess[1, 4] += sn * gt * inv
        hess[2, 3] -= cs * gy * inv
        hess[2, 4] -= cs * gt * inv
        hess[3, 3] += osc * gy * gy * inv
        hess[3, 4] += osc * gy * gt * inv
        hess[4, 4] += osc * gt * gt * inv
    for j in range(5):
        for k in range(j):
            hess[j, k] = hess[k, j]


class _Likelihood:
    """Unbinned Poisson log-likelihood of the fringe model on a rectangle."""

    def __init__(self, tau, eta, tau_range, eta_range):
        self.tau, self.eta = tau, eta
        self.tau_range, self.eta_range = tau_range, eta_range
        self.area = (tau_range[1] - tau_range[0]) * (eta_range[1] - eta_range[0])

    def rate(self, p):
        a, c, s, fy, ft = p
        psi = 2.0 * np.pi * (fy * self.eta - ft * self.tau)
        return a + c * np.cos(psi) + s * np.sin(psi)

    def integral_terms(self, p):
        a, c, s, fy, ft = p
        ny = _nodes(fy * (self.eta_range[1] - self.eta_range[0]))
        nt = _nodes(ft * (self.tau_range[1] - self.tau_range[0]))
        iy, iy1, iy2 = _axis_integrals(fy, *self.eta_range, 1.0, ny)
        it, it1, it2 = _axis_integrals(ft, *self.tau_range, -1.0, nt)
        return (iy * it, iy1 * it, iy * it1, iy2 * it, iy1 * it1, iy * it2)

    def nll(self, p):
        log_sum = _sum_log_rate(self.tau, self.eta, np.asarray(p, dtype=float))
        if not np.isfinite(log_sum):
            return np.inf
        z = self.integral_terms(p)[0]
        w = complex(p[1], -p[2])
        return -log_sum + p[0] * self.area + (w * z).real

    def derivatives(self, p):
        a, c, s, fy, ft = p
        grad = np.zeros(5)
        hess = np.zeros((5, 5))
        _event_derivatives(self.tau, self.eta, np.asarray(p, dtype=float), grad, hess)
        z, zy, zt, zyy, zyt, ztt = self.integral_terms(p)
        w = complex(c, -s)
        grad += np.array([self.area, z.real, z.imag, (w * zy).real, (w * zt).real])
        hl = np.zeros((5, 5))
        hl[1, 3] = hl[3, 1] = zy.real
        hl[2, 3] = hl[3, 2] = zy.imag
        hl[1, 4] = hl[4, 1] = zt.real
        hl[2, 4] = hl[4, 2] = zt.imag
        hl[3, 3] = (w * zyy).real
        hl[3, 4] = hl[4, 3] = (w * zyt).real
        hl[4, 4] = (w * ztt).real
        hess += hl
        return grad, hess


def _spectral_seed(counts, t_bin, y_bin, pad=4):
    """Dominant fringe (fy, ft) from the 2-D amplitude spectrum of binned counts.

    Returns ``None`` when the strongest component (fy > 0) is below
    ``PEAK_TO_MEDIAN`` times the median amplitude.
    """
    ny, nt = counts.shape
    x = counts - counts.mean()
    spec = np.abs(np.fft.fft2(x))
    ky = np.fft.fftfreq(ny, d=y_bin)
    half = ky > 0
    if not half.any():
        return None
    sub = spec[half]
    if sub.max() < PEAK_TO_MEDIAN * np.median(sub):
        return None
    padded = np.abs(np.fft.fft2(x, s=(pad * ny, pad * nt)))
    kyp = np.fft.fftfreq(pad * ny, d=y_bin)
    ktp = np.fft.fftfreq(pad * nt, d=t_bin)
    padded[kyp <= 0.5 / (ny * y_bin)] = 0.0
    iy, it = np.unravel_index(np.argmax(padded), padded.shape)

    def vertex(v_m, v_0, v_p):
        den = v_m - 2.0 * v_0 + v_p
        return 0.0 if den == 0 else 0.5 * (v_m - v_p) / den

    ry, rt = padded.shape
    dy = vertex(padded[(iy - 1) % ry, it], padded[iy, it], padded[(iy + 1) % ry, it])
    dt = vertex(padded[iy, (it - 1) % rt], padded[iy, it], padded[iy, (it + 1) % rt])
    fy = kyp[iy] + dy * (kyp[1] - kyp[0])
    kt = ktp[it] + dt * (ktp[1] - ktp[0])
    # exp(-2 pi i (ky y + kt t)) peaks at ky = fy, kt = -ft for the model phase
    return fy, -kt


def _newton_step(lik, p, f, grad, hess):
    """Backtracking Newton step; ``None`` if the Hessian is not positive definite."""
    try:
        np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return None
    step = -np.linalg.solve(hess, grad)
    slope = grad @ step
    t = 1.0
    for _ in range(40):
        trial = p + t * step
        ft = lik.nll(trial)
        if ft <= f + 1e-4 * t * slope:
            return trial, ft, -slope
        t *= 0.5
    return None


def _damped_step(lik, p, f, grad, hess, mu):
    scale = np.sqrt(np.abs(np.diag(hess))) + 1e-300
    hs = hess / np.outer(scale, scale)
    gs = grad / scale
    while mu < 1e12:
        try:
            step = -np.linalg.solve(hs + mu * np.eye(5), gs) / scale
        except np.linalg.LinAlgError:
            mu *= 10.0
            continue
        trial = p + step
        ft = lik.nll(trial)
        if ft <= f:
            return trial, ft, -(grad @ step), mu
        mu *= 10.0
    return None


def _maximize(lik: _Likelihood, p0, max_iter=50, tol=1e-7):
    """Minimize the negative log-likelihood by Newton steps with a damped fallback."""
    p = np.array(p0, dtype=float)
    f = lik.nll(p)
    if not np.isfinite(f):
        raise FitDidNotConverge("initial parameters give a non-positive rate", {"p0": p.tolist()})
    mu = 1e-3
    for it in range(1, max_iter + 1):
        grad, hess = lik.derivatives(p)
        res = _newton_step(lik, p, f, grad, hess)
        if res is None:
            res = _damped_step(lik, p, f, grad, hess, mu)
            if res is None:
                break
            p, f, decrement, mu = res
            mu = max(mu / 10.0, 1e-9)
        else:
            p, f, decrement = res
        if decrement < tol:
            grad, hess = lik.derivatives(p)
            return p, hess, it
    grad, hess = lik.derivatives(p)
    try:
        decrement = float(grad @ np.linalg.solve(hess, grad))
    except np.linalg.LinAlgError:
        decrement = np.inf
    if decrement < 1e-3:
        return p, hess, max_iter
    raise FitDidNotConverge(
        f"likelihood refinement did not converge in {max_iter} iterations",
        {"params": p.tolist(), "nll": f, "newton_decrement": decrement},
    )


def _window_events(ig: Interferogram, window):
    t = ig.t
    sel = (t >= window[0]) & (t <= window[1])
    return ig.events[sel]


def estimate_fringes(ig: Interferogram, *, window=None, margin_ns: float = DEFAULT_MARGIN_NS,
                     phase_diffusion_hz: float = DEFAULT_PHASE_DIFFUSION_HZ,
                     min_events: int = MIN_EVENTS, max_iter: int = 50) -> FringeEstimate:
    """Fit the fringe model to the events of one interferogram.

    ``window`` is the (start, stop) of beam overlap in ns; by default it is
    detected from the time marginal. The fit uses the window shrunk by
    ``margin_ns`` on both sides so the gate edges stay outside.
    """
    det = ig.detector
    if window is None:
        window = find_overlap(ig.events, det)
        if window is None:
            raise NoFringesDetected("no fringes detected: no illuminated interval found")
    overlap = window[1] - window[0]
    fit_lo, fit_hi = window[0] + margin_ns, window[1] - margin_ns
    if fit_hi - fit_lo < 4.0 * det.t_res_ns:
        fit_lo, fit_hi = window
    ev = _window_events(ig, (fit_lo, fit_hi))
    n = len(ev)
    if n < min_events:
        raise InsufficientEvents(f"only {n} events in the overlap window (need {min_events})")

    t_edges = det.t_edges
    i0 = np.searchsorted(t_edges, fit_lo, side="right") - 1
    i1 = np.searchsorted(t_edges, fit_hi, side="left")
    counts = bin_events(ev, det)[:, max(i0, 0):i1]
    seed = _spectral_seed(counts, t_edges[1] - t_edges[0], det.y_range_mm / det.n_y)
    if seed is None:
        raise NoFringesDetected("no fringes detected: spectral peak below 5x the median amplitude")
    fy0, ft0 = seed

    y_mid = 0.5 * det.y_range_mm
    t_mid = 0.5 * (fit_lo + fit_hi)
    tau = ev[:, 0] - t_mid
    eta = ev[:, 1] - y_mid
    lik = _Likelihood(tau, eta, (fit_lo - t_mid, fit_hi - t_mid), (-y_mid, y_mid))
    a0 = n / lik.area
    psi = 2.0 * np.pi * (fy0 * eta - ft0 * tau)
    c0 = 2.0 * np.cos(psi).sum() / lik.area
    s0 = 2.0 * np.sin(psi).sum() / lik.area
    amp = np.hypot(c0, s0)
    if amp > 0.9 * a0:
        c0, s0 = c0 * 0.9 * a0 / amp, s0 * 0.9 * a0 / amp
    p0 = np.array([a0, c0, s0, fy0, ft0])
    stride = n // PREFIT_EVENTS
    if stride >= 2:
        # coarse fit on every stride-th event; rate densities scale with the sampling fraction
        sub = _Likelihood(tau[::stride], eta[::stride], lik.tau_range, lik.eta_range)
        q = sub.tau.size / n
        p0[:3] *= q
        p0 = _maximize(sub, p0, max_iter=max_iter)[0]
        p0[:3] /= q
        # near unit visibility the subsample optimum can dip below zero at events it never saw
        shrink = 0.999
        while not np.isfinite(lik.nll(p0)) and shrink > 0.5:
            p0[1:3] *= shrink * p0[0] / max(np.hypot(p0[1], p0[2]), p0[0])
            shrink -= 0.01
    p, hess, iters = _maximize(lik, p0, max_iter=max_iter)
    if p[3] < 0:
        p[2], p[3], p[4] = -p[2], -p[3], -p[4]
        flip = np.diag([1.0, 1.0, -1.0, -1.0, -1.0])
        hess = flip @ hess @ flip
    try:
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError as exc:
        raise FitDidNotConverge("singular information matrix", {"params": p.tolist()}) from exc
    a, c, s, fy, ft = p
    var = np.clip(np.diag(cov), 0.0, None)

    slope = ft / fy
    j_slope = np.array([0.0, 0.0, 0.0, -ft / fy ** 2, 1.0 / fy])
    slope_err = float(np.sqrt(max(j_slope @ cov @ j_slope, 0.0)))
    r = np.hypot(c, s)
    vis = r / a
    j_vis = np.array([-r / a ** 2, c / (r * a), s / (r * a), 0.0, 0.0]) if r > 0 else np.zeros(5)
    vis_err = float(np.sqrt(max(j_vis @ cov @ j_vis, 0.0)))

    duration_s = (fit_hi - fit_lo) * 1e-9
    diffusion = 2.0 * np.pi * phase_diffusion_hz
    # least-squares slope of a Brownian phase over T has variance 6 D / (5 T)
    ft_phase_err = np.sqrt(6.0 * diffusion / (5.0 * duration_s)) / (2.0 * np.pi) * 1e-9
    beat_err_mhz = float(np.sqrt(var[4])) * 1e3

    expected = _binned_model(p, det, fit_lo, fit_hi, t_mid, y_mid, counts.shape, i0)
    resid = (counts - expected) / np.sqrt(np.maximum(expected, 1e-12))

    return FringeEstimate(
        spatial_freq_cyc_per_mm=float(fy),
        slope_mm_per_ns=float(slope),
        beat_freq_mhz=float(ft * 1e3),
        visibility=float(min(vis, 1.0)),
        phase0_rad=float(np.arctan2(-s, c)),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        n_events=int(n),
        slope_stderr=slope_err,
        spatial_freq_stderr=float(np.sqrt(var[3])),
        beat_freq_stderr_mhz=beat_err_mhz,
        visibility_stderr=vis_err,
        slope_stderr_phase=float(ft_phase_err / fy),
        beat_freq_resolution_mhz=float(max(beat_err_mhz, 1e3 / (2.0 * overlap))),
        window_ns=(float(fit_lo), float(fit_hi)),
        overlap_ns=float(overlap),
        y_center_mm=float(y_mid),
        iterations=int(iters),
        params=p,
        covariance=cov,
    )


def _binned_model(p, det, fit_lo, fit_hi, t_mid, y_mid, shape, i0):
    """Expected counts of the fitted model per instrument cell of the fit window."""
    a, c, s, fy, ft = p
    ye = det.y_edges - y_mid
    te = np.clip(det.t_edges[max(i0, 0):max(i0, 0) + shape[1] + 1], fit_lo, fit_hi) - t_mid

    def prim(lo, hi, f, sign):
        # integral of exp(i sign 2 pi f u) over each [lo, hi]
        if abs(f) < 1e-12:
            return (hi - lo).astype(complex)
        k = sign * 2j * np.pi * f
        return (np.exp(k * hi) - np.exp(k * lo)) / k

    iy = prim(ye[:-1], ye[1:], fy, 1.0)
    it = prim(te[:-1], te[1:], ft, -1.0)
    area = np.outer(np.diff(ye), np.diff(te))
    z = np.outer(iy, it)
    return a * area + (complex(c, -s) * z).real


def visibility(obj) -> float:
    """Fringe visibility of a ``FringeEstimate``, or of a fresh fit to an ``Interferogram``."""
    if isinstance(obj, Interferogram):
        obj = estimate_fringes(obj)
    return float(obj.visibility)


def folded_visibility(ig: Interferogram, est: FringeEstimate, n_bins: int = 16,
                      min_per_bin: int = 10) -> FoldedVisibility:
    """Visibility from events folded onto one fringe period using the fitted phase.

    The histogram contrast is divided by the bin-averaging factor
    ``sinc(1 / n_bins)`` so it estimates the underlying visibility.
    """
    ev = _window_events(ig, est.window_ns)
    # first bin centred on the fringe maximum
    phase = np.mod(est.phase(ev[:, 0], ev[:, 1]) + np.pi / n_bins, 2.0 * np.pi)
    hist = np.histogram(phase, bins=n_bins, range=(0.0, 2.0 * np.pi))[0]
    hi, lo = hist.max(), hist.min()
    raw = (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0
    value = min(raw / np.sinc(1.0 / n_bins), 1.0)
    return FoldedVisibility(float(value), hist, bool(lo >= min_per_bin))


def which_path(est: FringeEstimate, geo: BeamGeometry, threshold: float = DEFAULT_Z_THRESHOLD) -> WhichPathVerdict:
    """Assign the higher photon energy to one source from the fringe slope sign.

    The fringes drift along the transverse momentum of the higher-energy
    photons. Source B's transverse momentum points along ``geo.orientation``
    in image coordinates. Paths are fixed by geometry: A -> AP, B -> BP.
    """
    err = est.slope_stderr_total
    z = abs(est.slope_mm_per_ns) / err if err > 0 else np.inf
    paths = dict(PATHS)
    if not z >= threshold:
        note = (f"slope {est.slope_mm_per_ns:+.4g} mm/ns consistent with zero (z={z:.2f} < {threshold:g}); "
                "photons are not frequency distinguished")
        return WhichPathVerdict("undetermined", paths, float(z), note)
    along_b = np.sign(est.slope_mm_per_ns) == geo.orientation
    high, low = ("B", "A") if along_b else ("A", "B")
    note = (f"{SOURCE_NAMES[high]} ({high}) emitted the higher-frequency photons along path {PATHS[high]}; "
            f"{SOURCE_NAMES[low]} ({low}) the lower-frequency photons along path {PATHS[low]}")
    return WhichPathVerdict(high, paths, float(z), note)


def subset_uncertainty(ig: Interferogram, fractions, seed=0, *, min_events: int = MIN_EVENTS,
                       **fit_kw) -> SubsetTable:
    """Re-fit nested random subsets of the events and track the slope error.

    The overlap window is detected once on the full record. The returned
    exponent is the log-log slope of ``slope_stderr`` against event count.
    """
    fractions = [float(f) for f in fractions]
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise ValueError("fractions must lie in (0, 1]")
    window = fit_kw.pop("window", None) or find_overlap(ig.events, ig.detector)
    if window is None:
        raise NoFringesDetected("no fringes detected: no illuminated interval found")
    order = np.random.default_rng(seed).permutation(ig.n_events)
    rows = []
    for f in fractions:
        if f == 1.0:
            sub = ig
        else:
            keep = np.sort(order[:int(round(f * ig.n_events))])
            sub = Interferogram(ig.events[keep], ig.detector, ig.meta)
        try:
            est = estimate_fringes(sub, window=window, min_events=min_events, **fit_kw)
        except InsufficientEvents as exc:
            rows.append(SubsetRow(f, sub.n_events, float("nan"), f"skipped: {exc}"))
            continue
        rows.append(SubsetRow(f, est.n_events, est.slope_stderr))
    ok = [r for r in rows if np.isfinite(r.slope_stderr)]
    if len(ok) >= 2:
        exponent = float(np.polyfit(np.log([r.n_events for r in ok]), np.log([r.slope_stderr for r in ok]), 1)[0])
    else:
        exponent = float("nan")
    return SubsetTable(rows, exponent)
