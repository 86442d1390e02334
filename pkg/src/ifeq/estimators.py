"""IF / GD estimators and IF-equation residual fields over a TF grid.

All fields live on the bundle grid and are defined only on the threshold
mask; cells outside it hold ``nan`` and ``valid`` is False there. A residual
of exactly zero is a root, so zero is never used as a fill value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .signals import Signal
from .stft import TFBundle, WindowKind, WindowSpec, default_nfft, stft_bundle, threshold_mask

G, DG, DDG, TG, TDG = (WindowKind.G, WindowKind.DG, WindowKind.DDG, WindowKind.TG, WindowKind.TDG)


class FieldKind(str, Enum):
    OMEGA1 = "OMEGA1"
    OMEGA2 = "OMEGA2"
    GDELAY = "GDELAY"
    H_MAG = "H_MAG"
    H_RE = "H_RE"
    H_SET = "H_SET"
    H_MULTIRES = "H_MULTIRES"


UNITS = {
    FieldKind.OMEGA1: "rad/s",
    FieldKind.OMEGA2: "rad/s",
    FieldKind.GDELAY: "s",
    FieldKind.H_MAG: "s",
    FieldKind.H_RE: "s",
    FieldKind.H_SET: "rad/s",
    FieldKind.H_MULTIRES: "s",
}

SIGNED_RESIDUALS = (FieldKind.H_RE, FieldKind.H_SET)
MAGNITUDE_RESIDUALS = (FieldKind.H_MAG, FieldKind.H_MULTIRES)


@dataclass
class EstimatorField:
    values: np.ndarray
    valid: np.ndarray
    kind: FieldKind
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.where(self.valid, self.values, np.nan)

    @property
    def units(self) -> str:
        return UNITS[self.kind]


def _mask(b: TFBundle, gamma):
    mask, lam = threshold_mask(b[G], gamma)
    return mask, lam


def _meta(b: TFBundle, gamma, lam, **extra):
    return {
        "gamma": gamma,
        "lam": lam,
        "sigma": b.window.sigma,
        "fs": b.fs,
        "d_omega": b.d_omega,
        **extra,
    }


def _omega_grid(b: TFBundle):
    return b.omega_axis[:, None]


def _ratio(num, den, mask):
    out = np.zeros(den.shape, dtype=complex)
    np.divide(num, den, out=out, where=mask)
    return out


def dt_stft(b: TFBundle):
    """Time derivative of S^g from the window identity."""
    return -b[DG] + 1j * _omega_grid(b) * b[G]


def dw_stft(b: TFBundle):
    """Frequency derivative of S^g from the window identity."""
    return -1j * b[TG]


def omega1(b: TFBundle, gamma=0.01) -> EstimatorField:
    """First-order IF estimate ``Re{(dS/dt) / (j S)}``."""
    b.require(G, DG)
    mask, lam = _mask(b, gamma)
    vals = np.real(_ratio(dt_stft(b), 1j * b[G], mask))
    return EstimatorField(vals, mask, FieldKind.OMEGA1, _meta(b, gamma, lam))


def _second_order_terms(b: TFBundle, mask):
    S = b[G]
    w = _omega_grid(b)
    dt = dt_stft(b)
    dw = dw_stft(b)
    dtt = b[DDG] - 2j * w * b[DG] - w**2 * S
    # d/dt of -j S^{tg}, with (t g)' = g + t g'
    dtw = 1j * S + 1j * b[TDG] + w * b[TG]
    S2 = S * S
    d_dt_ratio = _ratio(dtt * S - dt * dt, S2, mask)
    d_dw_ratio = _ratio(dtw * S - dw * dt, S2, mask)
    return dt, dw, d_dt_ratio, d_dw_ratio


def omega2(b: TFBundle, gamma=0.01, degeneracy_tol=1e-6) -> EstimatorField:
    """Second-order IF estimate, exact on Gaussian-windowed linear chirps.

    The chirp-rate estimate ``q = d_t(dS_t/S) / (j - d_t(dS_w/S))`` corrects
    the first-order estimate by ``Re{q * dS_w / (j S)}``. Where the
    denominator vanishes (relative to ``degeneracy_tol``), as it does on
    impulses, the first-order value is used unchanged.
    """
    b.require(*WindowKind)
    mask, lam = _mask(b, gamma)
    S = b[G]
    dt, dw, d_dt_ratio, d_dw_ratio = _second_order_terms(b, mask)
    w1 = np.real(_ratio(dt, 1j * S, mask))
    den = 1j - d_dw_ratio
    degenerate = np.abs(den) < degeneracy_tol * (1 + np.abs(d_dw_ratio))
    ok = mask & ~degenerate
    q = _ratio(d_dt_ratio, den, ok)
    vals = np.where(ok, w1 + np.real(q * _ratio(dw, 1j * S, ok)), w1)
    meta = _meta(b, gamma, lam, degenerate=int(np.count_nonzero(mask & degenerate)))
    return EstimatorField(vals, mask, FieldKind.OMEGA2, meta)


def group_delay(b: TFBundle, gamma=0.01) -> EstimatorField:
    """Time-reassignment operator ``t + Re{S^{tg} / S^g}`` in seconds."""
    b.require(G, TG)
    mask, lam = _mask(b, gamma)
    vals = b.t_axis[None, :] + np.real(_ratio(b[TG], b[G], mask))
    return EstimatorField(vals, mask, FieldKind.GDELAY, _meta(b, gamma, lam))


def h_mag(b: TFBundle, gamma=0.01) -> EstimatorField:
    """Magnitude IF equation ``|S^{tg} / S^g|``; vanishes on IF and GD curves."""
    b.require(G, TG)
    mask, lam = _mask(b, gamma)
    vals = np.abs(_ratio(b[TG], b[G], mask))
    return EstimatorField(vals, mask, FieldKind.H_MAG, _meta(b, gamma, lam))


def h_re(b: TFBundle, gamma=0.01) -> EstimatorField:
    """Signed IF equation ``Re{(dS/dw) / S} = Im{S^{tg} / S^g}``.

    On a linear chirp this is ``-sigma^2 (w - phi') / (1 + sigma^4 c^2)``:
    positive below the ridge, negative above it.
    """
    b.require(G, TG)
    mask, lam = _mask(b, gamma)
    vals = np.imag(_ratio(b[TG], b[G], mask))
    return EstimatorField(vals, mask, FieldKind.H_RE, _meta(b, gamma, lam))


def h_set(omega1_field: EstimatorField, omega_axis) -> EstimatorField:
    """Synchroextracting residual ``w - omega1(t, w)``."""
    if omega1_field.kind is not FieldKind.OMEGA1:
        raise ValueError(f"h_set needs an OMEGA1 field, got {omega1_field.kind.value}")
    w = np.asarray(omega_axis, dtype=float)[:, None]
    return EstimatorField(
        w - omega1_field.values, omega1_field.valid.copy(), FieldKind.H_SET, dict(omega1_field.meta)
    )


def h_multires(s: Signal, sigmas, gamma=0.01, n_fft=None, trunc_radius=5.0) -> EstimatorField:
    """Geometric mean of ``|S^{tg_i} / S^{g_i}|`` over several window widths.

    All widths share one grid (``n_fft`` defaults to the widest window's
    default) and the field is valid on the intersection of the masks.
    """
    sigmas = list(sigmas)
    if not sigmas:
        raise ValueError("h_multires needs at least one sigma")
    specs = [WindowSpec(sg, trunc_radius) for sg in sigmas]
    if n_fft is None:
        n_fft = max(default_nfft(sp, s.fs) for sp in specs)
    log_sum = None
    joint = None
    lams = []
    for sp in specs:
        b = stft_bundle(s, sp, n_fft, kinds=(G, TG))
        mask, lam = _mask(b, gamma)
        lams.append(lam)
        with np.errstate(divide="ignore"):
            term = np.log(np.abs(_ratio(b[TG], b[G], mask)))
        log_sum = term if log_sum is None else log_sum + term
        joint = mask if joint is None else joint & mask
    if not joint.any():
        warnings.warn("empty joint mask in h_multires", RuntimeWarning, stacklevel=2)
    vals = np.exp(log_sum / len(specs))
    meta = {
        "gamma": gamma,
        "lam": lams,
        "sigma": max(sigmas),
        "sigmas": sigmas,
        "fs": s.fs,
        "d_omega": 2 * np.pi * s.fs / n_fft,
        "n_fft": n_fft,
    }
    return EstimatorField(vals, joint, FieldKind.H_MULTIRES, meta)


def h_domega(b: TFBundle, h: EstimatorField) -> np.ndarray:
    """Analytic frequency derivative of a signed residual field.

    Uses ``d/dw S^{tg} = j sigma^2 S^{tdg}`` (since ``t^2 g = -sigma^2 t g'``
    for the Gaussian) and ``d/dw (dS/dt) = -j d/dt S^{tg}``.
    """
    mask = h.valid
    S = b[G]
    if h.kind is FieldKind.H_RE:
        b.require(G, TG, TDG)
        sig2 = b.window.sigma**2
        num = 1j * sig2 * b[TDG] * S + 1j * b[TG] * b[TG]
        d = np.imag(_ratio(num, S * S, mask))
    elif h.kind is FieldKind.H_SET:
        b.require(G, DG, TG, TDG)
        dtw = 1j * S + 1j * b[TDG] + _omega_grid(b) * b[TG]
        d_omega1 = np.real(_ratio(dtw * S - dt_stft(b) * dw_stft(b), 1j * S * S, mask))
        d = 1.0 - d_omega1
    else:
        raise ValueError(f"no analytic derivative for {h.kind.value}")
    return np.where(mask, d, np.nan)
