"""Command-line entry point: ``streaklab {simulate,analyze,budget,score}``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .analysis import (SOURCE_NAMES, AnalysisError, FitDidNotConverge, InsufficientEvents, NoFringesDetected,
                       estimate_fringes, folded_visibility, which_path)
from .budget import compute_budget
from .config import MAX_SEED, ConfigError, ExperimentConfig, emit_config, load_config
from .detector import simulate_shot

EXIT_OK, EXIT_FAIL, EXIT_NO_FRINGES, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3, 4
CONFIG_NAME = "experiment.ini"
# beats below this are not expected to be resolved by a single shot
SCORE_MIN_BEAT_HZ = 5e6

log = logging.getLogger("streaklab")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load(args, *, default_path=None) -> ExperimentConfig:
    path = args.config or default_path
    try:
        cfg = load_config(path, strict=args.strict) if path else ExperimentConfig()
        over = {}
        if getattr(args, "seed", None) is not None:
            if not 0 <= args.seed <= MAX_SEED:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            over["seed"] = args.seed
        if getattr(args, "shots", None) is not None:
            over["shots"] = args.shots
        if getattr(args, "out", None) is not None:
            over["out"] = args.out
        return dataclasses.replace(cfg, **over)
    except ConfigError as exc:
        raise CliError(f"config error: {exc}", EXIT_CONFIG) from None
    except ValueError as exc:
        raise CliError(f"config error: {exc}", EXIT_CONFIG) from None
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_IO) from None


def _simulate_one(cfg: ExperimentConfig, index: int) -> tuple[int, int, float]:
    out = Path(cfg.out)
    ig = simulate_shot(cfg.sources, cfg.geometry, cfg.detector, cfg.seed, shot_index=index,
                       mutual_visibility=cfg.mutual_visibility, dark_noise=cfg.dark_noise)
    stem = out / f"shot_{index}"
    io.write_events(f"{stem}.events", ig)
    io.write_pgm(f"{stem}.pgm", ig.image, cfg.detector.adc_max)
    io.write_kv(f"{stem}.truth", {"seed": cfg.seed, "shot": index, **ig.truth})
    return index, ig.n_events, ig.truth["beat_hz"]


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / CONFIG_NAME).write_text(emit_config(cfg))
    except OSError as exc:
        raise CliError(f"cannot write to {out}: {exc}", EXIT_IO) from None
    workers = max(1, min(args.workers, cfg.shots or 1))
    try:
        if workers == 1:
            results = [_simulate_one(cfg, i) for i in range(cfg.shots)]
        else:
            with ProcessPoolExecutor(workers) as pool:
                results = list(pool.map(_simulate_one, [cfg] * cfg.shots, range(cfg.shots)))
    except OSError as exc:
        raise CliError(f"write failed: {exc}", EXIT_IO) from None
    for index, n, beat in results:
        print(f"shot_{index}: {n} events, beat {beat / 1e6:+.3f} MHz")
    return EXIT_OK


def _analyze_file(path, cfg: ExperimentConfig):
    """Fit one event file; returns (report, estimate, verdict, interferogram)."""
    ig = io.read_events(path)
    a = cfg.analysis
    est = estimate_fringes(ig, margin_ns=a.margin_ns, phase_diffusion_hz=a.phase_diffusion_hz)
    verdict = which_path(est, cfg.geometry, a.z_threshold)
    folded = folded_visibility(ig, est)
    if verdict.determined:
        high = verdict.higher_energy_source
        summary = f"{SOURCE_NAMES[high]} higher energy, path {verdict.path_assignment[high]}"
    else:
        summary = "undetermined"
    report = {
        "file": str(path),
        "status": "fringes",
        "n_events": ig.n_events,
        "fit_events": est.n_events,
        "window_start_ns": est.window_ns[0],
        "window_end_ns": est.window_ns[1],
        "spatial_freq_cyc_per_mm": est.spatial_freq_cyc_per_mm,
        "spacing_mm": est.spacing_mm,
        "spacing_stderr_mm": est.spacing_stderr_mm,
        "slope_mm_per_ns": est.slope_mm_per_ns,
        "slope_stderr": est.slope_stderr,
        "slope_stderr_total": est.slope_stderr_total,
        "beat_freq_mhz": est.beat_freq_mhz,
        "beat_freq_stderr_mhz": est.beat_freq_stderr_mhz,
        "beat_freq_stderr_total_mhz": est.beat_freq_stderr_total_mhz,
        "beat_freq_resolution_mhz": est.beat_freq_resolution_mhz,
        "visibility": est.visibility,
        "visibility_stderr": est.visibility_stderr,
        "folded_visibility": folded.value,
        "residual_rms": est.residual_rms,
        "higher_energy_source": verdict.higher_energy_source,
        "confidence_z": verdict.confidence,
        "verdict": summary,
        "note": verdict.note,
    }
    return report, est, verdict, ig


def _sibling_config(path) -> str | None:
    cand = Path(path).parent / CONFIG_NAME
    return str(cand) if cand.exists() else None


def cmd_analyze(args) -> int:
    code = EXIT_OK
    for path in args.events:
        cfg = _load(args, default_path=_sibling_config(path))
        try:
            report, est, _, ig = _analyze_file(path, cfg)
        except (io.FileFormatError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = max(code, EXIT_IO)
            continue
        except (NoFringesDetected, InsufficientEvents) as exc:
            print(io.emit_kv({"file": str(path), "status": "no-fringes", "verdict": "no fringes detected",
                              "note": str(exc)}), end="")
            code = max(code, EXIT_NO_FRINGES)
            continue
        except AnalysisError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            code = max(code, EXIT_FAIL)
            continue
        text = io.emit_kv(report)
        print(text, end="")
        try:
            if args.report:
                Path(args.report).write_text(text)
            if args.overlay:
                io.write_overlay(args.overlay, ig, est)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = max(code, EXIT_IO)
    return code


def cmd_budget(args) -> int:
    cfg = _load(args)
    report = compute_budget(cfg.budget)
    text = io.emit_kv(report.as_dict())
    print(text, end="")
    if args.report:
        try:
            Path(args.report).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write report: {exc}", EXIT_IO) from None
    return EXIT_OK


SCORE_COLUMNS = ("shot", "beat_true_mhz", "beat_est_mhz", "beat_abs_err_mhz", "slope_err_mm_per_ns",
                 "z", "verdict", "expected", "correct")


def score_rows(paths, cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for path in paths:
        truth_path = Path(path).with_suffix(".truth")
        if not truth_path.exists():
            raise CliError(f"missing truth metadata for {path} (expected {truth_path})", EXIT_IO)
        truth = io.read_kv(truth_path)
        beat = float(truth["beat_hz"])
        expected = truth["higher_energy"] if abs(beat) >= SCORE_MIN_BEAT_HZ else (
            "undetermined" if beat == 0 else "any")
        row = {"shot": Path(path).stem, "beat_true_mhz": beat / 1e6}
        try:
            report, est, verdict, _ = _analyze_file(path, cfg)
        except (NoFringesDetected, InsufficientEvents, FitDidNotConverge) as exc:
            label = "fit-failed" if isinstance(exc, FitDidNotConverge) else "no-fringes"
            row.update(beat_est_mhz=np.nan, beat_abs_err_mhz=np.nan, slope_err_mm_per_ns=np.nan, z=np.nan,
                       verdict=label, expected=expected, correct=expected in ("undetermined", "any"))
            rows.append(row)
            continue
        got = verdict.higher_energy_source
        row.update(beat_est_mhz=est.beat_freq_mhz, beat_abs_err_mhz=abs(est.beat_freq_mhz - beat / 1e6),
                   slope_err_mm_per_ns=est.slope_mm_per_ns - float(truth["slope_mm_per_ns"]),
                   z=verdict.confidence, verdict=got, expected=expected,
                   correct=expected == "any" or got == expected)
        rows.append(row)
    return rows


def cmd_score(args) -> int:
    paths = list(args.events)
    if args.out:
        paths += sorted(Path(args.out).glob("shot_*.events"), key=lambda p: int(p.stem.split("_")[1]))
    cfg = _load(args, default_path=_sibling_config(paths[0]) if paths else None)
    try:
        rows = score_rows(paths, cfg)
    except (io.FileFormatError, OSError) as exc:
        raise CliError(f"error: {exc}", EXIT_IO) from None
    print("\t".join(SCORE_COLUMNS))
    for r in rows:
        print("\t".join(io._format_value(r[c]) if not isinstance(r[c], float) else f"{r[c]:.6g}"
                        for c in SCORE_COLUMNS))
    scored = [r for r in rows if r["expected"] != "any"]
    summary = {"n_shots": len(rows), "n_scored": len(scored),
               "verdict_accuracy": float(np.mean([r["correct"] for r in scored])) if scored else float("nan")}
    null = [r for r in rows if r["expected"] == "undetermined"]
    if null:
        summary["null_undetermined_fraction"] = float(np.mean([r["verdict"] != "A" and r["verdict"] != "B"
                                                               for r in null]))
    errs = [r["beat_abs_err_mhz"] for r in rows if np.isfinite(r["beat_abs_err_mhz"])]
    if errs:
        summary["median_beat_abs_err_mhz"] = float(np.median(errs))
    print(io.emit_kv(summary), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="streaklab", description="Two-laser streak-camera interference simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--strict", action="store_true", help="reject unknown config keys")

    s = sub.add_parser("simulate", help="simulate shots and write events, images and truth")
    common(s)
    s.add_argument("--seed", type=int)
    s.add_argument("--shots", type=int)
    s.add_argument("--out", metavar="DIR")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="fit fringes and infer which path")
    common(a)
    a.add_argument("events", nargs="+")
    a.add_argument("--report", metavar="PATH")
    a.add_argument("--overlay", metavar="PATH", help="PGM with the fitted equiphase lines")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("budget", help="photon-flux and quantum-limit arithmetic")
    common(b)
    b.add_argument("--report", metavar="PATH")
    b.set_defaults(func=cmd_budget)

    c = sub.add_parser("score", help="compare analysis with simulation truth")
    common(c)
    c.add_argument("events", nargs="*")
    c.add_argument("--out", metavar="DIR", help="score every shot_*.events in DIR")
    c.set_defaults(func=cmd_score)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
