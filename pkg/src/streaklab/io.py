"""Event files, PGM images and key-value report documents."""
from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np

from .analysis import detector_from_meta
from .detector import Interferogram, ccd_image

EVENTS_MAGIC = "#streaklab-events"
EVENTS_VERSION = 1


class FileFormatError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


def _format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _parse_value(text: str):
    low = text.lower()
    if low == "none":
        return None
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def write_events(path, ig: Interferogram) -> None:
    """Write the event list as text: header, ``#key=value`` metadata, ``t_ns<TAB>y_mm`` rows."""
    det = ig.detector
    meta = dict(ig.meta)
    meta.update(window_ns=det.window_ns, y_range_mm=det.y_range_mm, sweep_ns_per_mm=det.sweep_ns_per_mm,
                y_res_mm=det.y_res_mm, t_res_fraction=det.t_res_fraction, n_events=ig.n_events)
    buf = io.StringIO()
    buf.write(f"{EVENTS_MAGIC} {EVENTS_VERSION}\n")
    for key in sorted(meta):
        buf.write(f"#{key}={_format_value(meta[key])}\n")
    data = buf.getvalue().encode("ascii")
    if ig.n_events:
        data += _format_records(ig.events)
    Path(path).write_bytes(data)


def _format_records(events) -> bytes:
    """``%.4f\t%.4f\n`` rows, built digit by digit for speed."""
    ev = np.asarray(events, dtype=float)
    if ev.min() < 0 or ev.max() >= 1e4:
        out = io.StringIO()
        np.savetxt(out, ev, fmt="%.4f", delimiter="\t")
        return out.getvalue().encode("ascii")
    fixed = np.rint(ev * 1e4).astype(np.int64)
    n = len(fixed)
    chars = np.zeros((n, 20), dtype=np.uint8)
    keep = np.ones((n, 20), dtype=bool)
    for col, base in ((0, 0), (1, 10)):
        whole, frac = np.divmod(fixed[:, col], 10_000)
        for k in range(4):
            chars[:, base + 3 - k] = 48 + (whole // 10 ** k) % 10
            chars[:, base + 8 - k] = 48 + (frac // 10 ** k) % 10
            if k:
                keep[:, base + 3 - k] = whole >= 10 ** k
        chars[:, base + 4] = ord(".")
    chars[:, 9] = ord("\t")
    chars[:, 19] = ord("\n")
    return chars[keep].tobytes()


def _scan_for_error(lines, start, path):
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FileFormatError(f"expected 2 tab-separated fields, got {len(parts)}", path, lineno)
        for p in parts:
            try:
                float(p)
            except ValueError:
                raise FileFormatError(f"not a number: {p!r}", path, lineno) from None
    raise FileFormatError("unparseable event records", path)


def read_events(path) -> Interferogram:
    """Read an event file written by ``write_events``."""
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise FileFormatError("not a text event file", path, 1) from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(EVENTS_MAGIC):
        raise FileFormatError(f"missing '{EVENTS_MAGIC}' header", path, 1)
    try:
        major = int(lines[0][len(EVENTS_MAGIC):].strip().split(".")[0])
    except ValueError:
        raise FileFormatError("unreadable format version", path, 1) from None
    if major != EVENTS_VERSION:
        raise FileFormatError(f"unsupported event file version {major}", path, 1)
    meta = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        key, sep, value = lines[i][1:].partition("=")
        if not sep or not key:
            raise FileFormatError("metadata line must be '#key=value'", path, i + 1)
        meta[key.strip()] = _parse_value(value.strip())
        i += 1
    body = lines[i:]
    if body:
        try:
            events = np.loadtxt(io.StringIO("\n".join(body)), delimiter="\t", ndmin=2, comments=None)
        except ValueError:
            _scan_for_error(lines, i, path)
        if events.shape[1] != 2:
            _scan_for_error(lines, i, path)
    else:
        events = np.empty((0, 2))
    for key in ("window_ns", "y_range_mm"):
        if key not in meta:
            raise FileFormatError(f"missing metadata '{key}'", path)
    expected = meta.get("n_events")
    if expected is not None and expected != len(events):
        raise FileFormatError(f"truncated: header declares {expected} events, found {len(events)}",
                              path, len(lines) + 1)
    det = detector_from_meta(meta)
    if len(events) and (events[:, 0].min() < 0 or events[:, 0].max() > det.window_ns
                        or events[:, 1].min() < 0 or events[:, 1].max() > det.y_range_mm):
        raise FileFormatError("event outside the sweep window", path)
    return Interferogram(events, det, meta)


def write_pgm(path, image, maxval: int = 4095) -> None:
    """Binary greymap (P5) with 16-bit big-endian samples."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    if img.min(initial=0) < 0 or img.max(initial=0) > maxval:
        raise ValueError(f"pixel values outside [0, {maxval}]")
    rows, cols = img.shape
    header = f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else "u1"
    Path(path).write_bytes(header + img.astype(dtype).tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise FileFormatError("not a binary PGM (P5)", path, 1)
    cols, rows, maxval = (int(f) for f in fields[1:])
    pos += 1
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(data[pos:], dtype=dtype, count=rows * cols).reshape(rows, cols).astype(np.uint16)


def write_overlay(path, ig: Interferogram, est) -> None:
    """CCD frame with the fitted equiphase lines (fringe maxima) drawn at full scale."""
    det = ig.detector
    img = ccd_image(ig.events, det).astype(np.int64)
    tc = (np.arange(det.ccd_cols) + 0.5) * det.window_ns / det.ccd_cols
    yc = (np.arange(det.ccd_rows) + 0.5) * det.y_range_mm / det.ccd_rows
    phase = est.phase(tc[None, :], yc[:, None])
    wrapped = np.angle(np.exp(1j * phase))
    # half-width of a line: ~1 pixel along y
    tol = 2.0 * np.pi * est.spatial_freq_cyc_per_mm * det.y_range_mm / det.ccd_rows
    inside = (tc >= est.window_ns[0]) & (tc <= est.window_ns[1])
    img[(np.abs(wrapped) < tol) & inside[None, :]] = det.adc_max
    write_pgm(path, img, det.adc_max)


def emit_kv(data: dict) -> str:
    """One ``key: value`` line per entry."""
    return "".join(f"{k}: {_format_value(v)}\n" for k, v in data.items())


def parse_kv(text: str, path=None) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise FileFormatError("expected 'key: value'", path, lineno)
        out[key.strip()] = _parse_value(value.strip())
    return out


def write_kv(path, data: dict) -> None:
    tmp = f"{path}.tmp"
    Path(tmp).write_text(emit_kv(data))
    os.replace(tmp, path)


def read_kv(path) -> dict:
    return parse_kv(Path(path).read_text(), path)
