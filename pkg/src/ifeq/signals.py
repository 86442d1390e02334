"""Analytic test signals with exact instantaneous descriptors.

Every generator returns a :class:`Signal` whose ``components`` list carries
one :class:`ComponentDescriptor` per mixed-in mode, so downstream scoring can
compare a time-frequency representation against the true IF / GD curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np


class ComponentKind(str, Enum):
    LFM = "LFM"
    COS_FM = "COS_FM"
    IMPULSE = "IMPULSE"
    LGD = "LGD"


@dataclass(frozen=True)
class ComponentDescriptor:
    """Ground truth for one mode of a synthetic signal.

    ``params`` holds the kind-specific real parameters. The IF curve is
    rebuilt from them on demand so the descriptor stays serialisable.
    """

    kind: ComponentKind
    params: dict

    def if_curve(self, t):
        """Instantaneous frequency phi'(t) in rad/s (LFM and COS_FM only)."""
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind is ComponentKind.LFM:
            return p["b"] + p["c"] * t
        if self.kind is ComponentKind.COS_FM:
            return 2 * np.pi * (p["f_carrier"] + p["depth"] * np.cos(2 * np.pi * p["f_mod"] * t))
        raise ValueError(f"{self.kind.value} component has no IF curve")

    def gd_curve(self, omega):
        """Group delay t = b + c*omega in seconds (LGD only)."""
        if self.kind is not ComponentKind.LGD:
            raise ValueError(f"{self.kind.value} component has no group-delay curve")
        return self.params["b"] + self.params["c"] * np.asarray(omega, dtype=float)

    @property
    def time(self) -> float:
        """Placed time of an impulse (index / fs)."""
        if self.kind is not ComponentKind.IMPULSE:
            raise ValueError(f"{self.kind.value} component has no time location")
        return self.params["t_placed"]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "ComponentDescriptor":
        return cls(ComponentKind(d["kind"]), dict(d["params"]))


@dataclass
class Signal:
    samples: np.ndarray
    fs: float
    t0: float = 0.0
    components: list = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("signal samples must be a non-empty 1-D sequence")
        if not self.fs > 0:
            raise ValueError(f"sample rate must be positive, got {self.fs}")

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return len(self) / self.fs

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.fs

    def energy(self) -> float:
        """Riemann-sum energy, sum |x|^2 / fs."""
        return float(np.sum(np.abs(self.samples) ** 2) / self.fs)


def _positive(**kw):
    for name, value in kw.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


def _time_axis(fs, duration):
    n = int(round(duration * fs))
    if n < 1:
        raise ValueError("duration * fs must give at least one sample")
    return np.arange(n) / fs


def gen_lfm(A, a, b, c, fs, duration) -> Signal:
    """Constant-amplitude linear chirp ``A exp(j(a + b t + c t^2 / 2))``.

    Parameters
    ----------
    A : float
        Amplitude.
    a, b, c : float
        Phase offset [rad], initial IF [rad/s] and chirp rate [rad/s^2].
    fs : float
        Sample rate in Hz.
    duration : float
        Length in seconds.
    """
    _positive(A=A, fs=fs, duration=duration)
    t = _time_axis(fs, duration)
    x = A * np.exp(1j * (a + b * t + 0.5 * c * t * t))
    desc = ComponentDescriptor(ComponentKind.LFM, {"A": A, "a": a, "b": b, "c": c})
    return Signal(x, fs, components=[desc])


def gen_impulse(A, t_imp, fs, duration) -> Signal:
    """Unit-area discrete Dirac: one sample of height ``A * fs``."""
    _positive(A=A, fs=fs, duration=duration)
    t = _time_axis(fs, duration)
    if not 0 <= t_imp < duration:
        raise ValueError(f"impulse time {t_imp} outside [0, {duration})")
    idx = int(math.floor(t_imp * fs + 0.5))
    if idx >= t.size:
        raise ValueError(f"impulse time {t_imp} rounds past the last sample")
    x = np.zeros(t.size, dtype=complex)
    x[idx] = A * fs
    desc = ComponentDescriptor(
        ComponentKind.IMPULSE, {"A": A, "t_imp": t_imp, "index": idx, "t_placed": idx / fs}
    )
    return Signal(x, fs, components=[desc])


def gen_cosfm(A, f_carrier, f_mod, depth, fs, duration) -> Signal:
    """Sinusoidally frequency-modulated tone.

    IF is ``f_carrier + depth * cos(2 pi f_mod t)`` in Hz. ``depth = 0`` gives a
    pure tone identical to ``gen_lfm(A, 0, 2 pi f_carrier, 0, ...)``.
    """
    _positive(A=A, fs=fs, duration=duration)
    if f_carrier + abs(depth) >= fs / 2:
        raise ValueError("f_carrier + depth must stay below fs/2")
    t = _time_axis(fs, duration)
    phase = 2 * np.pi * f_carrier * t
    if depth != 0:
        _positive(f_mod=f_mod)
        phase = phase + (depth / f_mod) * np.sin(2 * np.pi * f_mod * t)
    desc = ComponentDescriptor(
        ComponentKind.COS_FM,
        {"A": A, "f_carrier": f_carrier, "f_mod": f_mod, "depth": depth},
    )
    return Signal(A * np.exp(1j * phase), fs, components=[desc])


def gen_lgd(A, a, b, c, band, fs, duration) -> Signal:
    """Linear group-delay signal built in the discrete frequency domain.

    The spectrum ``A exp(-j(a + b w + c w^2 / 2))`` is gated to ``band``
    (rad/s) and inverted with an inverse DFT scaled by ``fs`` so samples
    approximate the continuous inverse Fourier integral.
    """
    _positive(A=A, fs=fs, duration=duration)
    w_lo, w_hi = band
    if not 0 < w_lo < w_hi < np.pi * fs:
        raise ValueError(f"band {band} must lie inside (0, pi*fs)")
    gd = (b + c * w_lo, b + c * w_hi)
    if min(gd) < 0 or max(gd) >= duration:
        raise ValueError("group delay b + c*w leaves the time window")
    n = int(round(duration * fs))
    w = 2 * np.pi * np.fft.fftfreq(n, d=1.0 / fs)
    gate = (w >= w_lo) & (w <= w_hi)
    spec = np.zeros(n, dtype=complex)
    spec[gate] = A * np.exp(-1j * (a + b * w[gate] + 0.5 * c * w[gate] ** 2))
    x = fs * np.fft.ifft(spec)
    desc = ComponentDescriptor(
        ComponentKind.LGD, {"A": A, "a": a, "b": b, "c": c, "w_lo": w_lo, "w_hi": w_hi}
    )
    return Signal(x, fs, components=[desc])


def mix(components: Sequence[Signal]) -> Signal:
    """Element-wise sum of signals sharing one sampling grid."""
    if not components:
        raise ValueError("nothing to mix")
    first = components[0]
    for s in components[1:]:
        if s.fs != first.fs or len(s) != len(first) or s.t0 != first.t0:
            raise ValueError("cannot mix signals on different sampling grids")
    x = np.sum([s.samples for s in components], axis=0)
    descs = [d for s in components for d in s.components]
    return Signal(x, first.fs, first.t0, descs)


def add_awgn(s: Signal, snr_db, seed) -> Signal:
    """Add complex circular white Gaussian noise at ``snr_db``.

    ``snr_db`` of ``None`` or ``+inf`` returns an unchanged copy.
    """
    if snr_db is None or snr_db == math.inf:
        return Signal(s.samples.copy(), s.fs, s.t0, list(s.components))
    p_sig = np.mean(np.abs(s.samples) ** 2)
    if p_sig == 0:
        raise ValueError("cannot set an SNR on a zero-energy signal")
    p_noise = p_sig / 10 ** (snr_db / 10)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(s)) + 1j * rng.standard_normal(len(s))
    noise *= math.sqrt(p_noise / 2)
    return Signal(s.samples + noise, s.fs, s.t0, list(s.components))


def analytic(real_samples, fs) -> Signal:
    """Analytic signal of a real sequence via the one-sided spectrum."""
    x = np.asarray(real_samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("analytic() needs a non-empty 1-D real sequence")
    n = x.size
    X = np.fft.fft(x)
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1 : n // 2] = 2.0
    else:
        h[1 : (n + 1) // 2] = 2.0
    return Signal(np.fft.ifft(X * h), fs)


# Default testbed: TF-separable two impulses, a chirp and a cosine-FM tone.
FIGURE1_DEFAULTS = {
    "impulse_fractions": (0.2, 0.8),
    "impulse_amp": 0.1,
    "lfm_f0": 50.0,
    "lfm_f1": 350.0,
    "cos_carrier": 400.0,
    "cos_mod": 2.0,
    "cos_depth": 40.0,
}


def figure1_testbed(fs=1024.0, duration=1.0, **overrides):
    """Two impulses, a 50->350 Hz chirp and a 400 Hz cosine-FM tone.

    Impulses sit at fixed fractions of ``duration``; the chirp sweeps its
    band over the whole record.

    Returns
    -------
    signal : Signal
    descriptors : list of ComponentDescriptor
        In the order IMPULSE, IMPULSE, LFM, COS_FM.
    """
    _positive(fs=fs, duration=duration)
    p = {**FIGURE1_DEFAULTS, **overrides}
    t1, t2 = (f * duration for f in p["impulse_fractions"])
    rate = 2 * np.pi * (p["lfm_f1"] - p["lfm_f0"]) / duration
    parts = [
        gen_impulse(p["impulse_amp"], t1, fs, duration),
        gen_impulse(p["impulse_amp"], t2, fs, duration),
        gen_lfm(1.0, 0.0, 2 * np.pi * p["lfm_f0"], rate, fs, duration),
        gen_cosfm(1.0, p["cos_carrier"], p["cos_mod"], p["cos_depth"], fs, duration),
    ]
    s = mix(parts)
    return s, list(s.components)


PRESETS = ("figure1", "figure1-noisy", "chirp", "impulse", "lgd", "tones")


def preset(name, fs=1024.0, duration=1.0, snr_db=2.0, seed=42, **kw) -> Signal:
    """Named signal presets used by the CLI and the acceptance suite."""
    if name == "figure1":
        return figure1_testbed(fs, duration)[0]
    if name == "figure1-noisy":
        return add_awgn(figure1_testbed(fs, duration)[0], snr_db, seed)
    if name == "chirp":
        b = 2 * np.pi * kw.get("b", 50.0)
        c = 2 * np.pi * kw.get("c", 300.0)
        return gen_lfm(kw.get("A", 1.0), kw.get("a", 0.0), b, c, fs, duration)
    if name == "impulse":
        return gen_impulse(kw.get("A", 1.0), kw.get("t_imp", duration / 2), fs, duration)
    if name == "lgd":
        band = (2 * np.pi * 50.0, 2 * np.pi * 400.0)
        return gen_lgd(1.0, 0.0, kw.get("b", 0.2), kw.get("c", 2e-4), band, fs, duration)
    if name == "tones":
        return mix([
            gen_lfm(1.0, 0.0, 2 * np.pi * 100.0, 0.0, fs, duration),
            gen_lfm(1.0, 0.0, 2 * np.pi * 250.0, 0.0, fs, duration),
        ])
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")

