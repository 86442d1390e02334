"""Randomised invariants over small signals."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ifeq.estimators import group_delay, h_mag, omega1
from ifeq.metrics import renyi_entropy
from ifeq.sharpen import extract, squeeze_freq, squeeze_time, time_phase_stft
from ifeq.signals import Signal, gen_impulse, gen_lfm
from ifeq.stft import WindowKind, WindowSpec, stft, stft_bundle, threshold_mask

FS = 256.0
SPEC = WindowSpec(0.04)
G = WindowKind.G

complex_signal = st.builds(
    lambda seed: np.random.default_rng(seed).standard_normal((256, 2)) @ np.array([1, 1j]),
    st.integers(0, 2**32 - 1),
)


@settings(max_examples=25, deadline=None)
@given(x=complex_signal, a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_stft_linear(x, a):
    s1 = Signal(x, FS)
    s2 = Signal(a * x, FS)
    np.testing.assert_allclose(stft(s2, SPEC), a * stft(s1, SPEC), atol=1e-9 * (1 + abs(a)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_squeezes_preserve_marginals(seed):
    x = np.random.default_rng(seed).standard_normal(256) + 0j
    b = stft_bundle(Signal(x, FS), SPEC, kinds=(G, WindowKind.DG, WindowKind.TG))
    mask = threshold_mask(b[G], 0.01)[0]
    f = squeeze_freq(b, omega1(b))
    src = np.where(mask, b[G], 0).sum(axis=0)
    assert np.max(np.abs(f.values.sum(axis=0) - src)) <= 1e-9 * np.abs(src).max()
    t = squeeze_time(b, group_delay(b))
    src = np.where(mask, time_phase_stft(b), 0).sum(axis=1)
    assert np.max(np.abs(t.values.sum(axis=1) - src)) <= 1e-9 * np.abs(src).max()


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_extraction_never_adds_energy(seed):
    x = np.random.default_rng(seed).standard_normal(256) + 0j
    b = stft_bundle(Signal(x, FS), SPEC, kinds=(G, WindowKind.TG))
    out = extract(b, h_mag(b))
    kept = out.values != 0
    assert np.all(np.abs(out.values) <= np.abs(b[G]))
    np.testing.assert_array_equal(out.values[kept], b[G][kept])


@settings(max_examples=30, deadline=None)
@given(
    shape=st.tuples(st.integers(1, 12), st.integers(1, 12)),
    seed=st.integers(0, 2**32 - 1),
)
def test_entropy_bounds(shape, seed):
    m = np.random.default_rng(seed).standard_normal(shape)
    m[0, 0] = 1.0  # never all zero
    h = renyi_entropy(m)
    assert -1e-12 <= h <= np.log2(m.size) + 1e-12


@settings(max_examples=20, deadline=None)
@given(t_frac=st.floats(0.3, 0.7), amp=st.floats(0.1, 10))
def test_impulse_group_delay_anywhere(t_frac, amp):
    s = gen_impulse(amp, t_frac, FS, 1)
    b = stft_bundle(s, SPEC, kinds=(G, WindowKind.TG))
    gd = group_delay(b)
    assert np.max(np.abs(gd.values[gd.valid] - s.components[0].time)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(f0=st.floats(30, 90), rate=st.floats(-40, 40))
def test_first_order_if_near_ridge(f0, rate):
    s = gen_lfm(1, 0, 2 * np.pi * f0, 2 * np.pi * rate, FS, 1)
    b = stft_bundle(s, SPEC, kinds=(G, WindowKind.DG))
    w1 = omega1(b)
    j = 128
    ridge = 2 * np.pi * (f0 + rate * b.t_axis[j])
    i = int(np.floor(ridge / b.d_omega + 0.5))
    # at the nearest bin the estimate is within half a bin of the ridge
    assert abs(w1.values[i, j] - ridge) <= b.d_omega / 2
