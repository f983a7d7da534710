"""File formats: signal/IF/alpha CSVs, ground-truth JSON, solver trace JSON,
the binary TFR container, and PGM image output.

The TFR container is little-endian: magic "TYCN", u32 version (1), u32 rows,
u32 cols, f64 dt, f64 dw, then row-major f64 (re, im) pairs. Round trips are
bit-exact.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .synth import GIMTComponent
from .types import SampledSignal, TFGrid, TFMatrix, make_grid

_TFR_MAGIC = b"TYCN"
_TFR_VERSION = 1
_TFR_HEADER = struct.Struct("<4sIIIdd")


class InputError(ValueError):
    """A file or argument violates an input contract (CLI exit code 2)."""


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _write_csv(path, header: str, columns):
    rows = np.column_stack(columns)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def _read_csv(path, expected_header: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    with open(path) as fh:
        header = fh.readline().strip()
        if header != expected_header:
            raise InputError(f"{path}: expected header '{expected_header}', got '{header}'")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as err:
            raise InputError(f"{path}: {err}") from None
    if data.shape[1] != 2:
        raise InputError(f"{path}: expected two columns, got {data.shape[1]}")
    return data


def write_signal_csv(path, signal: SampledSignal):
    t = np.arange(signal.n_samples) * signal.dt
    _write_csv(path, "t,value", (t, signal.samples))


def read_signal_csv(path) -> SampledSignal:
    data = _read_csv(path, "t,value")
    t, values = data[:, 0], data[:, 1]
    if t.size < 5:
        raise InputError(f"{path}: need at least 5 samples")
    steps = np.diff(t)
    dt = float(t[1] - t[0])  # exact for files whose time column starts at 0
    if dt <= 0 or np.any(np.abs(steps - dt) > 1e-9 * max(dt, 1.0)):
        raise InputError(f"{path}: time column must be uniformly spaced")
    if not np.all(np.isfinite(values)):
        raise InputError(f"{path}: non-finite sample values")
    return SampledSignal(values, dt)


def write_alpha_csv(path, alpha_values: np.ndarray, dt: float):
    t = np.arange(len(alpha_values)) * dt
    _write_csv(path, "t,alpha", (t, alpha_values))


def read_if_trace(path):
    """Load a (t, instantaneous_frequency_hz) trace with a required header
    and strictly increasing times. Returns (t, if_hz)."""
    data = _read_csv(path, "t,instantaneous_frequency_hz")
    t, if_hz = data[:, 0], data[:, 1]
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise InputError(f"{path}: time column must be strictly increasing")
    return t, if_hz


def resample_if_trace(t: np.ndarray, if_hz: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Cubic-spline resampling of an IF trace onto the benchmark grid."""
    if times[0] < t[0] - 1e-9 or times[-1] > t[-1] + 1e-9:
        raise InputError("IF trace does not cover the requested time window")
    return CubicSpline(t, if_hz)(times)


# ---------------------------------------------------------------------------
# ground-truth JSON
# ---------------------------------------------------------------------------

def write_truth_json(path, components, dt: float):
    payload = {
        "dt": dt,
        "n_samples": int(components[0].amp.size),
        "components": [
            {
                "amp": c.amp.tolist(),
                "phase_cycles": c.phase.tolist(),
                "support": [int(c.support[0]), int(c.support[1])],
            }
            for c in components
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def read_truth_json(path):
    """Returns (components, dt, n_samples)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        with open(path) as fh:
            payload = json.load(fh)
        dt = float(payload["dt"])
        n = int(payload["n_samples"])
        components = [
            GIMTComponent(
                np.asarray(c["amp"], dtype=np.float64),
                np.asarray(c["phase_cycles"], dtype=np.float64),
                (int(c["support"][0]), int(c["support"][1])),
            )
            for c in payload["components"]
        ]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as err:
        raise InputError(f"{path}: malformed truth file ({err})") from None
    return components, dt, n


# ---------------------------------------------------------------------------
# solver trace JSON
# ---------------------------------------------------------------------------

def write_trace_json(path, trace, chosen_mu_tilde=None):
    payload = {
        "lipschitz": trace.lipschitz,
        "chosen_mu_tilde": chosen_mu_tilde,
        "records": [
            {
                "mu_tilde": r.mu_tilde,
                "inner_iterations": r.inner_iterations,
                "h_total": r.terms.total,
                "data_term": r.terms.data_term,
                "transport_term": r.terms.transport_term,
                "l1_term": r.terms.l1_term,
                "alpha_term": r.terms.alpha_term,
                "rel_change_f": r.rel_change_f,
                "rel_change_alpha": r.rel_change_alpha,
            }
            for r in trace.records
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# binary TFR container
# ---------------------------------------------------------------------------

def write_tfr(path, F: TFMatrix):
    header = _TFR_HEADER.pack(_TFR_MAGIC, _TFR_VERSION, F.grid.n_rows, F.grid.n_cols,
                              F.grid.dt, F.grid.dw)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(F.values, dtype="<c16").tobytes())


def read_tfr(path) -> TFMatrix:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    raw = path.read_bytes()
    if len(raw) < _TFR_HEADER.size:
        raise InputError(f"{path}: truncated TFR file")
    magic, version, rows, cols, dt, dw = _TFR_HEADER.unpack_from(raw)
    if magic != _TFR_MAGIC:
        raise InputError(f"{path}: not a TFR file (bad magic {magic!r})")
    if version != _TFR_VERSION:
        raise InputError(f"{path}: unsupported TFR version {version}")
    expected = _TFR_HEADER.size + rows * cols * 16
    if len(raw) != expected:
        raise InputError(f"{path}: payload size mismatch ({len(raw)} vs {expected} bytes)")
    try:
        grid = make_grid(cols - 1, dt)
    except ValueError as err:
        raise InputError(f"{path}: invalid grid ({err})") from None
    if grid.n_rows != rows or grid.dw != dw:
        raise InputError(f"{path}: header grid is inconsistent (rows={rows}, dw={dw})")
    values = np.frombuffer(raw, dtype="<c16", offset=_TFR_HEADER.size).reshape(rows, cols)
    return TFMatrix(grid, values.copy())


# ---------------------------------------------------------------------------
# PGM image output
# ---------------------------------------------------------------------------

def write_pgm(path, image01: np.ndarray):
    """Write a [0, 1] matrix as binary 8-bit PGM, row 0 at the top.

    Callers pass frequency rows already ordered top-to-bottom descending.
    """
    levels = np.rint(255.0 * np.clip(image01, 0.0, 1.0)).astype(np.uint8)
    h, w = levels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(levels.tobytes())
