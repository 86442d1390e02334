"""Concentration, localisation, energy and timing scores for TF methods."""

from __future__ import annotations

import math
import statistics
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .methods import LABELS, run_method, window_spec
from .sharpen import EXTRACTION_METHODS, Method, SharpenedTFR
from .signals import ComponentDescriptor, ComponentKind, Signal
from .stft import WindowKind, stft, threshold_mask


def renyi_entropy(tfr, alpha=3):
    """Renyi entropy (bits) of the normalised squared magnitudes.

    ``H = log2(sum p^alpha) / (1 - alpha)`` with ``p = |tfr|^2 / sum |tfr|^2``.
    Lower means more concentrated.
    """
    if alpha == 1:
        raise ValueError("alpha = 1 is the Shannon limit; use alpha != 1")
    e = np.abs(np.asarray(tfr)) ** 2
    total = e.sum()
    if not total > 0:
        raise ValueError("Renyi entropy of an all-zero matrix is undefined")
    p = e / total
    return float(np.log2(np.sum(p**alpha)) / (1 - alpha))


def _corridor_argmax(mag, centre, half):
    """Index of the largest entry of ``mag`` within ``centre +- half``, or None."""
    lo = max(int(math.floor(centre + 0.5)) - half, 0)
    hi = min(int(math.floor(centre + 0.5)) + half + 1, mag.size)
    if hi <= lo:
        return None
    seg = mag[lo:hi]
    if not np.any(seg > 0):
        return None
    return lo + int(np.argmax(seg))


def ridge_error(tfr: SharpenedTFR, descriptors, corridor=10, margin=0):
    """Mean distance from the in-corridor argmax to the true curve.

    IF components are scored per column (in bins), impulses and linear
    group-delay components per row (in frames). ``margin`` frames at either
    end are excluded for IF components. Components whose corridor never
    holds energy are reported as ``nan`` with a warning.

    Returns
    -------
    list of float
        One mean absolute deviation per descriptor.
    """
    mag = np.abs(tfr.values)
    n_f, n_t = mag.shape
    d_omega = tfr.omega_axis[1] - tfr.omega_axis[0]
    t_start = tfr.t_axis[0]
    out = []
    for d in descriptors:
        d = d if isinstance(d, ComponentDescriptor) else ComponentDescriptor.from_dict(d)
        errs = []
        if d.kind in (ComponentKind.LFM, ComponentKind.COS_FM):
            cols = range(margin, n_t - margin)
            truth = d.if_curve(tfr.t_axis) / d_omega
            for j in cols:
                if not 0 <= truth[j] < n_f:
                    continue
                k = _corridor_argmax(mag[:, j], truth[j], corridor)
                if k is not None:
                    errs.append(abs(k - truth[j]))
        else:
            if d.kind is ComponentKind.IMPULSE:
                truth = np.full(n_f, (d.time - t_start) * tfr.fs)
                rows = range(n_f)
            else:
                truth = (d.gd_curve(tfr.omega_axis) - t_start) * tfr.fs
                p = d.params
                rows = np.flatnonzero((tfr.omega_axis >= p["w_lo"]) & (tfr.omega_axis <= p["w_hi"]))
            for i in rows:
                k = _corridor_argmax(mag[i, :], truth[i], corridor)
                if k is not None:
                    errs.append(abs(k - truth[i]))
        if not errs:
            warnings.warn(f"empty corridor for {d.kind.value} component", RuntimeWarning, stacklevel=2)
            out.append(float("nan"))
        else:
            out.append(float(np.mean(errs)))
    return out


def energy_ratio(tfr: SharpenedTFR, SG, mask):
    """Output over input masked energy.

    Relocation methods are scored on the marginal they preserve (column sums
    for frequency relocation, row sums for the time squeeze); extraction on
    plain squared magnitude, which cannot exceed one.
    """
    masked = np.where(mask, SG, 0)
    if tfr.method is Method.STFT:
        return 1.0
    if tfr.method in EXTRACTION_METHODS:
        return float(np.sum(np.abs(tfr.values) ** 2) / np.sum(np.abs(masked) ** 2))
    axis = 0
    if tfr.method is Method.TSST:
        axis = 1
        masked = masked * np.exp(-1j * np.outer(tfr.omega_axis, tfr.t_axis))
    num = np.sum(np.abs(tfr.values.sum(axis=axis)) ** 2)
    den = np.sum(np.abs(masked.sum(axis=axis)) ** 2)
    return float(num / den)


@dataclass
class MethodReport:
    method: str
    renyi_entropy: float = float("nan")
    ridge_error: list = field(default_factory=list)
    energy_ratio: float = float("nan")
    wall_time: float = float("nan")
    non_converged: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def csv_row(self) -> str:
        ridge = ";".join(f"{e:.6g}" for e in self.ridge_error)
        return (
            f"{self.method},{self.renyi_entropy:.10g},{ridge},{self.energy_ratio:.12g},"
            f"{self.wall_time:.6g},{self.non_converged}"
        )


CSV_HEADER = "method,renyi,ridge_err,energy_ratio,time_s,nonconv"


def time_method(name, s: Signal, cfg: RunConfig, repeats=3):
    """Median wall time over ``repeats`` runs and the last result."""
    if repeats < 3:
        raise ValueError("repeats must be >= 3")
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = run_method(name, s, cfg)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def bench(methods, s: Signal, cfg: RunConfig | None = None, repeats=3, corridor=10, alpha=3,
          results=None):
    """Run every method on ``s`` and score it.

    Methods run one after another for timing isolation; a failing method is
    reported with its error and the run continues. Pass a dict as
    ``results`` to collect each method's output by name.
    """
    cfg = cfg or RunConfig()
    spec = window_spec(cfg)
    SG = None
    reports = []
    for name in methods:
        label = LABELS.get(name, name)
        try:
            wall, tfr = time_method(name, s, cfg, repeats)
            if results is not None:
                results[name] = tfr
            if SG is None or SG.shape != tfr.shape:
                SG = stft(s, spec, WindowKind.G, len(tfr.omega_axis) * 2)
                mask = threshold_mask(SG, cfg.gamma)[0]
            reports.append(
                MethodReport(
                    label,
                    renyi_entropy(tfr.values, alpha),
                    ridge_error(tfr, s.components, corridor, spec.half_length(s.fs)),
                    energy_ratio(tfr, SG, mask),
                    wall,
                    int(tfr.diagnostics.get("non_converged", 0)),
                )
            )
        except Exception as exc:  # recorded per method; the bench keeps going
            reports.append(MethodReport(label, error=f"{type(exc).__name__}: {exc}"))
    return reports


def format_table(reports) -> str:
    head = f"{'method':<14}{'renyi':>9}{'ridge_err':>30}{'energy':>14}{'time_s':>10}{'nonconv':>9}"
    lines = [head, "-" * len(head)]
    for r in reports:
        if not r.ok:
            lines.append(f"{r.method:<14}  FAILED: {r.error}")
            continue
        ridge = " ".join(f"{e:.2f}" for e in r.ridge_error)
        lines.append(
            f"{r.method:<14}{r.renyi_entropy:>9.3f}{ridge:>30}{r.energy_ratio:>14.10f}"
            f"{r.wall_time:>10.4f}{r.non_converged:>9d}"
        )
    return "\n".join(lines)


def corridor_coverage(tfr: SharpenedTFR, descriptor, corridor=10, margin=0) -> float:
    """Fraction of columns holding a nonzero cell within ``corridor`` bins of the IF.

    A gap-free extracted ridge scores 1. Columns whose true IF lies off the
    frequency axis are not counted.
    """
    d = descriptor
    if d.kind not in (ComponentKind.LFM, ComponentKind.COS_FM):
        raise ValueError(f"corridor coverage needs an IF component, got {d.kind.value}")
    nz = np.abs(tfr.values) > 0
    n_f, n_t = nz.shape
    truth = d.if_curve(tfr.t_axis) / (tfr.omega_axis[1] - tfr.omega_axis[0])
    hits = []
    for j in range(margin, n_t - margin):
        if not 0 <= truth[j] < n_f:
            continue
        k = int(math.floor(truth[j] + 0.5))
        hits.append(bool(nz[max(k - corridor, 0) : k + corridor + 1, j].any()))
    if not hits:
        raise ValueError("no column has its IF on the frequency axis")
    return float(np.mean(hits))


def _by_kind(descriptors, *kinds):
    return [i for i, d in enumerate(descriptors) if d.kind in kinds]


def check_orderings(reports, descriptors, time_limit=10.0):
    """Qualitative comparisons expected on the four-component testbed.

    Returns
    -------
    list of (name, passed, detail)
    """
    r = {rep.method: rep for rep in reports if rep.ok}
    need = {"STFT", "FSST", "FSST2", "TSST", "ET_IF", "RM_IF"}
    missing = need - set(r)
    if missing:
        return [("methods present", False, "missing " + ",".join(sorted(missing)))]
    out = []
    e = {k: r[k].renyi_entropy for k in ("ET_IF", "FSST2", "FSST", "STFT")}
    out.append((
        "entropy ET_IF < FSST2 < FSST < STFT",
        e["ET_IF"] < e["FSST2"] < e["FSST"] < e["STFT"],
        " ".join(f"{k}={v:.4f}" for k, v in e.items()),
    ))
    imp = _by_kind(descriptors, ComponentKind.IMPULSE)
    worse = all(
        r[m].ridge_error[i] > r["TSST"].ridge_error[i] for m in ("FSST", "FSST2") for i in imp
    )
    detail = " ".join(
        f"{m}=" + ",".join(f"{r[m].ridge_error[i]:.3f}" for i in imp) for m in ("FSST", "FSST2", "TSST")
    )
    out.append(("impulse ridge error FSST, FSST2 > TSST", bool(imp) and worse, detail))
    et = r["ET_IF"].ridge_error
    out.append((
        "ET_IF ridge error <= 1 on every component",
        all(np.isfinite(x) and x <= 1 for x in et),
        ",".join(f"{x:.3f}" for x in et),
    ))
    t = {m: rep.wall_time for m, rep in r.items()}
    out.append((
        "time STFT below every other method",
        all(t["STFT"] < v for m, v in t.items() if m != "STFT"),
        f"STFT={t['STFT']:.4f}",
    ))
    out.append((
        "time ET_IF < FSST2 and RM_IF < FSST2",
        t["ET_IF"] < t["FSST2"] and t["RM_IF"] < t["FSST2"],
        f"ET_IF={t['ET_IF']:.4f} RM_IF={t['RM_IF']:.4f} FSST2={t['FSST2']:.4f}",
    ))
    out.append((
        f"every method under {time_limit:g} s",
        all(v < time_limit for v in t.values()),
        f"max={max(t.values()):.4f}",
    ))
    return out


def check_noise(et_tfr: SharpenedTFR, descriptors, corridor=10, margin=0):
    """The extracted chirp ridge should show gaps: coverage below one."""
    lfm = _by_kind(descriptors, ComponentKind.LFM)
    if not lfm:
        return [("chirp present", False, "no LFM component in the ground truth")]
    cov = [corridor_coverage(et_tfr, descriptors[i], corridor, margin) for i in lfm]
    return [("ET_IF chirp corridor coverage < 1", all(c < 1 for c in cov),
             ",".join(f"{c:.4f}" for c in cov))]
