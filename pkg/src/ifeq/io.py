"""File formats for signals, TF matrices, ground truth and images.

Signal CSV
    Header ``t,re,im`` then one row per sample, ``%.17g``. A two-column
    ``t,x`` file is read as a real signal and made analytic.
TF matrix CSV
    No header. Row ``i`` is frequency bin ``i`` (ascending), column ``j`` is
    frame ``j``. Entries are complex literals ``re+imj`` with 17 significant
    digits, readable by ``np.loadtxt(path, dtype=complex, delimiter=",")``.
    Residual fields are real and hold ``nan`` off the mask. Axes and
    parameters go in a JSON sidecar with the same stem.
PGM
    Binary P5, max gray 255, highest frequency on the top row. Gray level is
    ``20 log10(|x| / max|x|)`` mapped linearly from ``[-60, 0]`` dB.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .estimators import EstimatorField
from .sharpen import SharpenedTFR
from .signals import ComponentDescriptor, ComponentKind, Signal, analytic

PGM_FLOOR_DB = -60.0


def _sample_rate(t):
    if t.size < 2:
        raise ValueError("need at least two samples to infer the sample rate")
    dt = np.diff(t)
    step = (t[-1] - t[0]) / (t.size - 1)
    if not step > 0 or np.max(np.abs(dt - step)) > 1e-6 * step:
        raise ValueError("time column must be uniformly increasing")
    return 1.0 / step


def write_signal_csv(path, s: Signal):
    data = np.column_stack([s.t, s.samples.real, s.samples.imag])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="t,re,im", comments="")


def read_signal_csv(path) -> Signal:
    path = Path(path)
    with path.open() as fh:
        header = [h.strip() for h in fh.readline().split(",")]
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if header == ["t", "re", "im"] and data.shape[1] == 3:
        fs = _sample_rate(data[:, 0])
        return Signal(data[:, 1] + 1j * data[:, 2], fs, float(data[0, 0]))
    if header == ["t", "x"] and data.shape[1] == 2:
        s = analytic(data[:, 1], _sample_rate(data[:, 0]))
        s.t0 = float(data[0, 0])
        return s
    raise ValueError(f"{path}: expected header 't,re,im' or 't,x', got {','.join(header)}")


def read_wav(path) -> Signal:
    """Mono 16-bit PCM WAV, scaled to [-1, 1) and made analytic."""
    fs, data = wavfile.read(path)
    if data.dtype != np.int16:
        raise ValueError(f"{path}: only 16-bit PCM is supported, got {data.dtype}")
    if data.ndim != 1:
        raise ValueError(f"{path}: only mono files are supported")
    return analytic(data.astype(float) / 32768.0, float(fs))


def read_signal(path) -> Signal:
    if str(path).lower().endswith(".wav"):
        return read_wav(path)
    return read_signal_csv(path)


def _complex_fmt(z):
    return f"{z.real:.17g}{z.imag:+.17g}j"


def write_matrix_csv(path, values):
    """Write a complex or real matrix in the TF CSV layout."""
    values = np.asarray(values)
    with open(path, "w") as fh:
        if np.iscomplexobj(values):
            for row in values:
                fh.write(",".join(_complex_fmt(z) for z in row) + "\n")
        else:
            np.savetxt(fh, values, fmt="%.17g", delimiter=",")


def read_matrix_csv(path, complex_values=True) -> np.ndarray:
    dtype = complex if complex_values else float
    return np.loadtxt(path, dtype=dtype, delimiter=",", ndmin=2)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value"):  # enums
        return value.value
    return value


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_tfr(stem, tfr: SharpenedTFR, extra=None):
    """Write ``<stem>.csv``, ``<stem>.json`` and ``<stem>.diag.txt``."""
    stem = Path(stem)
    write_matrix_csv(stem.with_suffix(".csv"), tfr.values)
    meta = {
        "method": tfr.method,
        "fs": tfr.fs,
        "t_axis": tfr.t_axis,
        "omega_axis": tfr.omega_axis,
        "params": tfr.params,
        **(extra or {}),
    }
    write_json(stem.with_suffix(".json"), meta)
    stem.with_suffix(".diag.txt").write_text(diagnostics_text(tfr))


def write_field(stem, f: EstimatorField, t_axis, omega_axis):
    stem = Path(stem)
    write_matrix_csv(stem.with_suffix(".csv"), f.values)
    meta = {
        "kind": f.kind,
        "units": f.units,
        "t_axis": t_axis,
        "omega_axis": omega_axis,
        "meta": f.meta,
    }
    write_json(stem.with_suffix(".json"), meta)


def diagnostics_text(tfr: SharpenedTFR) -> str:
    """Plain ``key: value`` lines; paths and source lists are left out."""
    d = tfr.diagnostics
    lines = [f"method: {tfr.method.value}"]
    lines.append(f"masked: {d.get('masked', 0)}")
    lines.append(f"non_converged: {d.get('non_converged', 0)}")
    lines.append(f"dropped: {d.get('out_of_range', 0)}")
    lines.append(f"off_mask: {d.get('off_mask', 0)}")
    if "survivors" in d:
        lines.append(f"survivors: {d['survivors']}")
    if "iterations" in d:
        lines.append("iterations: " + " ".join(str(n) for n in d["iterations"]))
    return "\n".join(lines) + "\n"


def to_gray(values, floor_db=PGM_FLOOR_DB) -> np.ndarray:
    """Log-scaled 8-bit magnitudes, row 0 = highest frequency."""
    mag = np.abs(np.asarray(values))
    peak = mag.max() if mag.size else 0.0
    if not peak > 0:
        return np.zeros(mag.shape, np.uint8)
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(mag / peak)
    db = np.clip(db, floor_db, 0.0)
    gray = np.floor((db - floor_db) / -floor_db * 255 + 0.5).astype(np.uint8)
    return gray[::-1]


def write_pgm(path, values, floor_db=PGM_FLOOR_DB):
    gray = to_gray(values, floor_db)
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(gray).tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while raw[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos].decode("ascii"))
    if tokens[0] != "P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError(f"{path}: expected max gray 255, got {maxval}")
    data = np.frombuffer(raw[pos + 1 : pos + 1 + w * h], dtype=np.uint8)
    return data.reshape(h, w)


def write_descriptors(path, descriptors, t_axis, fs):
    """Ground truth as JSON with curves sampled once per frame."""
    out = []
    for d in descriptors:
        entry = d.to_dict()
        if d.kind in (ComponentKind.LFM, ComponentKind.COS_FM):
            entry["if_curve"] = d.if_curve(t_axis)
        elif d.kind is ComponentKind.IMPULSE:
            entry["time"] = d.time
        out.append(entry)
    write_json(path, {"fs": fs, "t_axis": t_axis, "components": out})


def read_descriptors(path) -> list:
    data = json.loads(Path(path).read_text())
    return [ComponentDescriptor.from_dict(c) for c in data["components"]]
