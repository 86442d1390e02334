"""Sharpened TF representations: squeezing, extraction and iterative reassignment.

Every method works on the discrete grid of a :class:`~ifeq.stft.TFBundle`.
Relocation methods move each masked coefficient ``S^g(t, w0)`` to a new bin
and add it there, so per-column (per-row for the time squeeze) complex sums
are preserved. Extraction keeps a masked copy of ``S^g`` on the root set of
an IF equation and zeroes everything else.

Frequencies snap to the nearest bin, rounding half up. A target outside the
axis leaves the coefficient where it is and is counted in the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .estimators import (
    MAGNITUDE_RESIDUALS,
    SIGNED_RESIDUALS,
    EstimatorField,
    FieldKind,
    h_domega,
    omega1,
)
from .stft import TFBundle, WindowKind, threshold_mask


class Method(str, Enum):
    STFT = "STFT"
    FSST = "FSST"
    FSST2 = "FSST2"
    TSST = "TSST"
    SET = "SET"
    ET_IF = "ET_IF"
    RM_IF_FP = "RM_IF_FP"
    RM_IF_NEWTON = "RM_IF_NEWTON"
    RM_IF_LM = "RM_IF_LM"
    MSST = "MSST"


RELOCATION_METHODS = (
    Method.FSST,
    Method.FSST2,
    Method.TSST,
    Method.MSST,
    Method.RM_IF_FP,
    Method.RM_IF_NEWTON,
    Method.RM_IF_LM,
)
EXTRACTION_METHODS = (Method.SET, Method.ET_IF)


@dataclass
class SharpenedTFR:
    values: np.ndarray
    method: Method
    t_axis: np.ndarray
    omega_axis: np.ndarray
    fs: float
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.values.shape


@dataclass
class SolverConfig:
    """Iteration settings for IF-equation reassignment.

    ``tau``, ``rho`` and ``tol`` default to values derived from the field:
    ``tau = 1/sigma^2`` for H_RE (contracting on every linear chirp) and
    ``-1`` for H_SET; ``rho`` is 10% of the typical slope; ``tol`` is half a
    frequency bin.
    """

    tau: float | None = None
    rho: float | None = None
    max_iter: int = 50
    tol: float | None = None
    derivative: str = "central-difference"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.rho is not None and not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.tau is not None and self.tau == 0:
            raise ValueError("tau must be non-zero")
        if self.derivative not in ("central-difference", "window-identity"):
            raise ValueError(f"unknown derivative mode {self.derivative!r}")


@dataclass
class ExtractRule:
    """Discrete extractor settings.

    abs_tol : float, optional
        Ceiling on ``|h|`` for magnitude residuals (seconds). Defaults to
        ``max(sigma^2 * d_omega / 2, 1 / (2 fs))``, the residual a half-bin
        (or half-frame) offset produces.
    set_tol : float, optional
        Ceiling on ``|w - omega1|`` for H_SET (rad/s); defaults to half a bin.
    directions : tuple
        Axes along which a magnitude residual may reach a strict local
        minimum. Frequency minima pick out IF ridges, time minima pick out
        impulses.
    """

    abs_tol: float | None = None
    set_tol: float | None = None
    directions: tuple = ("omega", "time")


def _snap(omega, d_omega):
    return np.floor(omega / d_omega + 0.5).astype(np.int64)


def _accumulate(values, rows, cols, shape):
    n_f, n_t = shape
    flat = rows * n_t + cols
    re = np.bincount(flat, weights=values.real, minlength=n_f * n_t)
    im = np.bincount(flat, weights=values.imag, minlength=n_f * n_t)
    return (re + 1j * im).reshape(shape)


def _masked_cells(mask):
    # column-major order: within each column sources are visited bottom-up
    cols, rows = np.nonzero(mask.T)
    return rows, cols


def _result(values, method, b: TFBundle, params, diagnostics):
    return SharpenedTFR(values, method, b.t_axis, b.omega_axis, b.fs, params, diagnostics)


def _field_mask(b, est, gamma):
    if gamma is None:
        return est.valid
    return threshold_mask(b[WindowKind.G], gamma)[0] & est.valid


def squeeze_freq(b: TFBundle, est: EstimatorField, gamma=None) -> SharpenedTFR:
    """Synchrosqueeze along frequency onto the bin nearest ``est``."""
    if est.kind not in (FieldKind.OMEGA1, FieldKind.OMEGA2):
        raise ValueError(f"squeeze_freq needs an IF estimate, got {est.kind.value}")
    mask = _field_mask(b, est, gamma)
    rows, cols = _masked_cells(mask)
    target = _snap(est.values[rows, cols], b.d_omega)
    off = (target < 0) | (target >= b.shape[0])
    target = np.where(off, rows, target)
    out = _accumulate(b[WindowKind.G][rows, cols], target, cols, b.shape)
    method = Method.FSST if est.kind is FieldKind.OMEGA1 else Method.FSST2
    diag = {"masked": int(rows.size), "out_of_range": int(np.count_nonzero(off))}
    return _result(out, method, b, {"gamma": est.meta.get("gamma", gamma)}, diag)


def time_phase_stft(b: TFBundle) -> np.ndarray:
    """``S^g`` with phase referenced to the time origin, ``exp(-j w t) S^g``.

    Along a frequency row the frame-centred phase of a transient rotates as
    ``exp(j w t)``; removing it lets coefficients add coherently in time.
    """
    return b[WindowKind.G] * np.exp(-1j * np.outer(b.omega_axis, b.t_axis))


def squeeze_time(b: TFBundle, gd: EstimatorField, gamma=None) -> SharpenedTFR:
    """Time-reassigned synchrosqueeze onto the frame nearest the group delay.

    The relocated coefficients are those of :func:`time_phase_stft`, whose
    row sums are preserved.
    """
    if gd.kind is not FieldKind.GDELAY:
        raise ValueError(f"squeeze_time needs a GDELAY field, got {gd.kind.value}")
    mask = _field_mask(b, gd, gamma)
    rows, cols = np.nonzero(mask)  # row-major: each row visited left to right
    target = np.floor((gd.values[rows, cols] - b.t_axis[0]) * b.fs + 0.5).astype(np.int64)
    off = (target < 0) | (target >= b.shape[1])
    target = np.where(off, cols, target)
    out = _accumulate(time_phase_stft(b)[rows, cols], rows, target, b.shape)
    diag = {"masked": int(rows.size), "out_of_range": int(np.count_nonzero(off))}
    return _result(out, Method.TSST, b, {"gamma": gd.meta.get("gamma", gamma)}, diag)


def _strict_min(a, axis, rtol=1e-9):
    """Strict local minimum of the non-negative ``a`` along ``axis``.

    nan neighbours count as +inf. A minimum must undercut both neighbours by
    a relative ``rtol``, so round-off ripple on a flat field (an impulse
    along frequency) does not register. An exact two-cell tie between higher
    walls keeps its lower cell.
    """
    a = np.where(np.isnan(a), np.inf, a)
    a = np.moveaxis(a, axis, 0)
    p = np.pad(a, [(1, 2), (0, 0)], constant_values=np.inf)
    lo, hi, hi2 = p[:-3], p[2:-1], p[3:]
    tight = 1.0 - rtol
    below_lo = a < tight * lo
    with np.errstate(invalid="ignore"):
        tie = (np.abs(a - hi) <= rtol * a) & (hi < tight * hi2)
    out = below_lo & ((a < tight * hi) | tie)
    return np.moveaxis(out, 0, axis)


def _sign_change_survivors(h):
    """One survivor per sign change of ``h`` between frequency neighbours."""
    keep = np.zeros(h.shape, bool)
    lo, hi = h[:-1, :], h[1:, :]
    with np.errstate(invalid="ignore"):
        pair = (lo * hi <= 0) & np.isfinite(lo) & np.isfinite(hi)
        pick_lo = pair & (np.abs(lo) <= np.abs(hi))
        pick_hi = pair & ~pick_lo
    keep[:-1, :] |= pick_lo
    keep[1:, :] |= pick_hi
    return keep


def extract(b: TFBundle, h: EstimatorField, rule: ExtractRule | None = None) -> SharpenedTFR:
    """Keep ``S^g`` only where the IF-equation residual ``h`` has a root.

    Magnitude residuals survive at strict local minima below ``abs_tol``;
    H_RE survives at the smaller-``|h|`` endpoint of each sign change along
    frequency; H_SET survives where ``|w - omega1|`` is under ``set_tol``.
    """
    rule = rule or ExtractRule()
    if h.kind not in MAGNITUDE_RESIDUALS + SIGNED_RESIDUALS:
        raise ValueError(f"extract needs an IF-equation residual, got {h.kind.value}")
    if h.values.shape != b.shape:
        raise ValueError("residual field and bundle grids differ")
    vals = h.values
    params = {"gamma": h.meta.get("gamma"), "residual": h.kind.value}
    if h.kind in MAGNITUDE_RESIDUALS:
        tol = rule.abs_tol
        if tol is None:
            tol = max(h.meta["sigma"] ** 2 * b.d_omega / 2, 1 / (2 * b.fs))
        mins = np.zeros(b.shape, bool)
        if "omega" in rule.directions:
            mins |= _strict_min(vals, 0)
        if "time" in rule.directions:
            mins |= _strict_min(vals, 1)
        with np.errstate(invalid="ignore"):
            keep = h.valid & mins & (vals < tol)
        params["abs_tol"] = tol
        method = Method.ET_IF
    elif h.kind is FieldKind.H_SET:
        tol = b.d_omega / 2 if rule.set_tol is None else rule.set_tol
        with np.errstate(invalid="ignore"):
            keep = h.valid & (np.abs(vals) < tol)
        params["set_tol"] = tol
        method = Method.SET
    else:
        keep = h.valid & _sign_change_survivors(vals)
        method = Method.ET_IF
    out = np.where(keep, b[WindowKind.G], 0)
    diag = {"masked": int(np.count_nonzero(h.valid)), "survivors": int(np.count_nonzero(keep))}
    return _result(out, method, b, params, diag)


def central_difference(h: EstimatorField, d_omega) -> np.ndarray:
    """Frequency derivative of ``h`` on the grid; one-sided at mask edges."""
    v = h.values
    up = np.full(v.shape, np.nan)
    dn = np.full(v.shape, np.nan)
    up[:-1] = v[1:]
    dn[1:] = v[:-1]
    both = np.isfinite(up) & np.isfinite(dn)
    d = np.full(v.shape, np.nan)
    d[both] = (up[both] - dn[both]) / (2 * d_omega)
    only_up = np.isfinite(up) & ~np.isfinite(dn)
    only_dn = np.isfinite(dn) & ~np.isfinite(up)
    d[only_up] = (up[only_up] - v[only_up]) / d_omega
    d[only_dn] = (v[only_dn] - dn[only_dn]) / d_omega
    d[~h.valid] = np.nan
    return d


def _resolve(cfg: SolverConfig, h: EstimatorField, b: TFBundle):
    sig2 = b.window.sigma ** 2
    if h.kind is FieldKind.H_RE:
        tau, rho = 1.0 / sig2, 0.1 * sig2
    else:
        tau, rho = -1.0, 0.1
    return (
        tau if cfg.tau is None else cfg.tau,
        rho if cfg.rho is None else cfg.rho,
        b.d_omega / 2 if cfg.tol is None else cfg.tol,
    )


def _iterate(step, valid, rows, cols, max_iter, tol, d_omega, n_f, record=False):
    """Run a grid-valued root iteration from every source cell at once.

    ``step(cur_rows, cols)`` returns the next frequency in rad/s. An iterate
    halts without converging when the residual is undefined at its cell or
    the next frequency falls off the axis; it then stays where it is.
    """
    cur = rows.copy()
    active = np.ones(rows.size, bool)
    converged = np.zeros(rows.size, bool)
    iters = np.zeros(rows.size, np.int64)
    halted = {"off_mask": 0, "out_of_range": 0}
    path = [cur.copy()] if record else None
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        r, c = cur[idx], cols[idx]
        bad = ~valid[r, c]
        halted["off_mask"] += int(np.count_nonzero(bad))
        active[idx[bad]] = False
        idx, r, c = idx[~bad], r[~bad], c[~bad]
        nxt = step(r, c)
        with np.errstate(invalid="ignore"):
            fin = np.isfinite(nxt)
            tgt = np.where(fin, _snap(np.where(fin, nxt, 0.0), d_omega), -1)
        off = (tgt < 0) | (tgt >= n_f)
        halted["out_of_range"] += int(np.count_nonzero(off))
        active[idx[off]] = False
        idx, r, tgt = idx[~off], r[~off], tgt[~off]
        iters[idx] += 1
        still = np.abs((tgt - r) * d_omega) < tol
        converged[idx[still]] = True
        active[idx[still]] = False
        mv = idx[~still]
        cur[mv] = tgt[~still]
        if record:
            path.append(cur.copy())
    return cur, converged, iters, halted, path


def reassign_iterative(
    b: TFBundle,
    h: EstimatorField,
    cfg: SolverConfig | None = None,
    method="FP",
    record=False,
) -> SharpenedTFR:
    """Relocate each masked coefficient to a root of the signed residual ``h``.

    Parameters
    ----------
    b : TFBundle
    h : EstimatorField
        H_RE or H_SET.
    cfg : SolverConfig
    method : {"FP", "NEWTON", "LM"}
        Fixed point ``w + tau h``, Newton ``w - h/h'`` or damped Newton
        ``w - h/(h' + rho sign(h'))``.
    record : bool
        Keep every iterate in ``diagnostics["path"]`` (rows of bin indices).
    """
    cfg = cfg or SolverConfig()
    if h.kind not in SIGNED_RESIDUALS:
        raise ValueError(f"iterative reassignment needs H_RE or H_SET, got {h.kind.value}")
    method = str(method).upper()
    if method not in ("FP", "NEWTON", "LM"):
        raise ValueError(f"unknown solver {method!r}")
    tau, rho, tol = _resolve(cfg, h, b)
    w = b.omega_axis
    H = h.values
    if method == "FP":
        def step(r, c):
            return w[r] + tau * H[r, c]
    else:
        if cfg.derivative == "window-identity":
            dH = h_domega(b, h)
        else:
            dH = central_difference(h, b.d_omega)
        damp = 0.0 if method == "NEWTON" else rho

        def step(r, c):
            d = dH[r, c]
            d = d + damp * np.where(d < 0, -1.0, 1.0)
            hv = H[r, c]
            with np.errstate(divide="ignore", invalid="ignore"):
                # a zero residual is a root even where the slope vanishes too
                return np.where(hv == 0, w[r], w[r] - hv / d)

    rows, cols = _masked_cells(h.valid)
    cur, conv, iters, halted, path = _iterate(
        step, h.valid, rows, cols, cfg.max_iter, tol, b.d_omega, b.shape[0], record
    )
    out = _accumulate(b[WindowKind.G][rows, cols], cur, cols, b.shape)
    diag = {
        "masked": int(rows.size),
        "non_converged": int(np.count_nonzero(~conv)),
        "iterations": np.bincount(iters).tolist(),
        **halted,
    }
    if record:
        diag["path"] = np.array(path)
        diag["sources"] = (rows, cols)
        diag["converged"] = conv
    name = {"FP": Method.RM_IF_FP, "NEWTON": Method.RM_IF_NEWTON, "LM": Method.RM_IF_LM}[method]
    params = {
        "residual": h.kind.value,
        "tau": tau,
        "rho": rho,
        "tol": tol,
        "max_iter": cfg.max_iter,
        "derivative": cfg.derivative,
        "gamma": h.meta.get("gamma"),
    }
    return _result(out, name, b, params, diag)


def msst(b: TFBundle, n_iters=3, gamma=0.01) -> SharpenedTFR:
    """Multi-synchrosqueezing: follow ``w <- omega1(t, w)`` for ``n_iters`` steps."""
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    est = omega1(b, gamma)
    w1 = est.values
    rows, cols = _masked_cells(est.valid)
    cur = rows.copy()
    active = np.ones(rows.size, bool)
    n_f = b.shape[0]
    off_mask = out_of_range = 0
    for _ in range(n_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        r, c = cur[idx], cols[idx]
        bad = ~est.valid[r, c]
        off_mask += int(np.count_nonzero(bad))
        active[idx[bad]] = False
        idx, r, c = idx[~bad], r[~bad], c[~bad]
        tgt = _snap(w1[r, c], b.d_omega)
        off = (tgt < 0) | (tgt >= n_f)
        out_of_range += int(np.count_nonzero(off))
        active[idx[off]] = False
        cur[idx[~off]] = tgt[~off]
    out = _accumulate(b[WindowKind.G][rows, cols], cur, cols, b.shape)
    diag = {"masked": int(rows.size), "off_mask": off_mask, "out_of_range": out_of_range}
    return _result(out, Method.MSST, b, {"n_iters": n_iters, "gamma": gamma}, diag)
