"""Modified STFT with Gaussian window family.

The transform follows the frame-centred convention

    S(t, w) = int f(t + u) g(u) exp(-j w u) du,

discretised as a Riemann sum with hop 1 sample and scaled by ``1/fs`` so
magnitudes converge to the continuous closed forms. Partial derivatives in
``t`` and ``w`` come from extra windows of the same family instead of finite
differences:

    dS/dw = -j S^{tg}
    dS/dt = -S^{g'} + j w S^{g}

Matrices are laid out ``[frequency_bin, time_frame]``.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.fft

from .signals import Signal


class WindowKind(str, Enum):
    G = "g"
    DG = "dg"
    DDG = "ddg"
    TG = "tg"
    TDG = "tdg"


ALL_KINDS = tuple(WindowKind)


@dataclass(frozen=True)
class WindowSpec:
    sigma: float
    trunc_radius: float = 5.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"window sigma must be positive, got {self.sigma}")
        if not self.trunc_radius >= 3:
            raise ValueError(f"trunc_radius must be >= 3, got {self.trunc_radius}")

    def half_length(self, fs) -> int:
        return int(np.floor(self.trunc_radius * self.sigma * fs + 1e-9))

    def length(self, fs) -> int:
        return 2 * self.half_length(fs) + 1


def window_values(sigma, kind: WindowKind, t):
    """Closed-form Gaussian-family window evaluated at times ``t`` (seconds)."""
    t = np.asarray(t, dtype=float)
    g = np.exp(-0.5 * (t / sigma) ** 2) / (np.sqrt(2 * np.pi) * sigma)
    if kind is WindowKind.G:
        return g
    if kind is WindowKind.DG:
        return -t / sigma**2 * g
    if kind is WindowKind.DDG:
        return (t**2 / sigma**4 - 1 / sigma**2) * g
    if kind is WindowKind.TG:
        return t * g
    if kind is WindowKind.TDG:
        return -(t**2) / sigma**2 * g
    raise ValueError(f"unknown window kind {kind!r}")


def sample_window(spec: WindowSpec, kind: WindowKind, fs) -> np.ndarray:
    """Window samples at ``n/fs`` for ``|n/fs| <= trunc_radius * sigma``."""
    L = spec.half_length(fs)
    return window_values(spec.sigma, WindowKind(kind), np.arange(-L, L + 1) / fs)


def default_nfft(spec: WindowSpec, fs) -> int:
    """Next power of two >= 4x the sampled window length."""
    return int(2 ** np.ceil(np.log2(4 * spec.length(fs))))


def _workers():
    n = int(os.environ.get("IFEQ_THREADS", "0") or 0)
    return None if n <= 0 else n


@dataclass
class TFBundle:
    """Per-kind STFT matrices on one shared grid.

    ``grids[kind]`` has shape ``(n_freq, n_time)`` with ``n_freq = n_fft // 2``
    bins covering ``[0, pi*fs)``.
    """

    grids: dict
    t_axis: np.ndarray
    omega_axis: np.ndarray
    fs: float
    window: WindowSpec
    n_fft: int
    meta: dict = field(default_factory=dict)

    def __getitem__(self, kind) -> np.ndarray:
        return self.grids[WindowKind(kind)]

    def has(self, *kinds) -> bool:
        return all(WindowKind(k) in self.grids for k in kinds)

    def require(self, *kinds):
        missing = [WindowKind(k).name for k in kinds if WindowKind(k) not in self.grids]
        if missing:
            raise ValueError(f"bundle is missing window kinds: {', '.join(missing)}")

    @property
    def shape(self):
        return (self.omega_axis.size, self.t_axis.size)

    @property
    def d_omega(self) -> float:
        return 2 * np.pi * self.fs / self.n_fft

    @property
    def margin(self) -> int:
        """Frames at each edge whose window runs off the signal."""
        return self.window.half_length(self.fs)

    def interior(self) -> slice:
        m = self.margin
        return slice(m, self.t_axis.size - m)


def _frames(x, L):
    padded = np.concatenate([np.zeros(L, complex), x, np.zeros(L, complex)])
    return np.lib.stride_tricks.sliding_window_view(padded, 2 * L + 1)


def _transform(frames, win, L, n_fft, fs):
    # u >= 0 goes to bins 0..L, u < 0 wraps to the end: phase is referenced
    # to the frame centre without any extra modulation.
    buf = np.zeros((frames.shape[0], n_fft), dtype=complex)
    prod = frames * win
    buf[:, : L + 1] = prod[:, L:]
    if L:
        buf[:, n_fft - L :] = prod[:, :L]
    spec = scipy.fft.fft(buf, axis=1, workers=_workers())
    return np.ascontiguousarray(spec[:, : n_fft // 2].T) / fs


def _check(s: Signal, spec: WindowSpec, n_fft):
    if n_fft is None:
        n_fft = default_nfft(spec, s.fs)
    n_fft = int(n_fft)
    if n_fft < spec.length(s.fs):
        raise ValueError(
            f"n_fft={n_fft} is shorter than the window ({spec.length(s.fs)} samples)"
        )
    return n_fft


def stft(s: Signal, spec: WindowSpec, kind=WindowKind.G, n_fft=None) -> np.ndarray:
    """One window kind of the modified STFT, shape ``(n_fft // 2, len(s))``."""
    n_fft = _check(s, spec, n_fft)
    L = spec.half_length(s.fs)
    return _transform(_frames(s.samples, L), sample_window(spec, kind, s.fs), L, n_fft, s.fs)


def stft_bundle(s: Signal, spec: WindowSpec, n_fft=None, kinds=ALL_KINDS) -> TFBundle:
    """Compute several window kinds from a single framing pass."""
    n_fft = _check(s, spec, n_fft)
    L = spec.half_length(s.fs)
    frames = _frames(s.samples, L)
    grids = {}
    for kind in kinds:
        kind = WindowKind(kind)
        grids[kind] = _transform(frames, sample_window(spec, kind, s.fs), L, n_fft, s.fs)
    omega = np.arange(n_fft // 2) * (2 * np.pi * s.fs / n_fft)
    return TFBundle(grids, s.t.copy(), omega, float(s.fs), spec, n_fft)


def threshold_mask(SG, gamma):
    """Cells with ``|S^g| > gamma * max|S^g|``.

    Returns
    -------
    mask : ndarray of bool
    lam : float
        The absolute threshold actually applied.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    mag = np.abs(SG)
    peak = float(mag.max()) if mag.size else 0.0
    if peak == 0:
        warnings.warn("all-zero TF matrix: threshold mask is empty", RuntimeWarning, stacklevel=2)
        return np.zeros(mag.shape, bool), 0.0
    lam = gamma * peak
    return mag > lam, lam
