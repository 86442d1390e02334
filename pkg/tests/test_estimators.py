import numpy as np
import pytest
from conftest import CHIRP_B, CHIRP_C, FS, SIGMA, interior_mask

from ifeq.estimators import (
    FieldKind,
    group_delay,
    h_domega,
    h_mag,
    h_multires,
    h_re,
    h_set,
    omega1,
    omega2,
)
from ifeq.sharpen import ExtractRule, central_difference, extract
from ifeq.signals import gen_impulse, gen_lfm, gen_lgd, mix
from ifeq.stft import ALL_KINDS, WindowKind, WindowSpec, stft_bundle

D_CHIRP = 1 + SIGMA**4 * CHIRP_C**2
# window sampling and truncation bias, well under a bin (2 pi fs / n_fft)
TONE_TOL = 0.01


def _grids(b):
    return b.omega_axis[:, None], b.t_axis[None, :]


def _interior_valid(b, f):
    return interior_mask(b, f.valid)


@pytest.fixture(scope="module")
def tone_bundle():
    return stft_bundle(gen_lfm(1, 0.3, 2 * np.pi * 200, 0, FS, 1), WindowSpec(SIGMA))


@pytest.fixture(scope="module")
def impulse_bundle():
    return stft_bundle(gen_impulse(1, 0.5, FS, 1), WindowSpec(SIGMA))


# ---- first and second order IF estimates ----------------------------------


def test_omega1_exact_on_tone(tone_bundle):
    f = omega1(tone_bundle)
    m = _interior_valid(tone_bundle, f)
    assert m.sum() > 1000
    np.testing.assert_allclose(f.values[m], 2 * np.pi * 200, atol=TONE_TOL)


def test_omega1_chirp_closed_form(chirp_bundle):
    # biased towards the bin frequency by sigma^4 c^2 / D for a Gaussian window
    b = chirp_bundle
    f = omega1(b)
    w, t = _grids(b)
    ridge = CHIRP_B + CHIRP_C * t
    expected = ridge + SIGMA**4 * CHIRP_C**2 * (w - ridge) / D_CHIRP
    m = _interior_valid(b, f)
    np.testing.assert_allclose(f.values[m], np.broadcast_to(expected, m.shape)[m], atol=0.05)


def test_omega2_exact_on_chirp(chirp_bundle):
    b = chirp_bundle
    f = omega2(b)
    _, t = _grids(b)
    m = _interior_valid(b, f)
    err = np.abs(f.values - (CHIRP_B + CHIRP_C * t))[m]
    assert err.max() <= b.d_omega
    assert f.meta["degenerate"] == 0


def test_omega2_beats_omega1_on_chirp(chirp_bundle):
    b = chirp_bundle
    _, t = _grids(b)
    ridge = CHIRP_B + CHIRP_C * t
    e1 = np.abs(omega1(b).values - ridge)
    e2 = np.abs(omega2(b).values - ridge)
    m = _interior_valid(b, omega1(b))
    assert e2[m].mean() < e1[m].mean()


def test_omega2_on_tone():
    b = stft_bundle(gen_lfm(1, 0, 2 * np.pi * 120, 0, FS, 1), WindowSpec(SIGMA), kinds=ALL_KINDS)
    f2 = omega2(b)
    m = _interior_valid(b, f2)
    # second-order terms amplify the window discretisation bias, still << 1 bin
    np.testing.assert_allclose(f2.values[m], 2 * np.pi * 120, atol=0.02 * b.d_omega)


def test_omega2_degenerate_falls_back():
    b = stft_bundle(gen_impulse(1, 0.5, FS, 1), WindowSpec(SIGMA), kinds=ALL_KINDS)
    f1, f2 = omega1(b), omega2(b)
    assert f2.meta["degenerate"] > 0.9 * f2.valid.sum()
    np.testing.assert_array_equal(np.isnan(f1.values), np.isnan(f2.values))
    assert np.allclose(f2.values[f2.valid], f1.values[f1.valid], atol=1e-6)


def test_fields_are_nan_off_mask(chirp_bundle):
    for f in (omega1(chirp_bundle), h_mag(chirp_bundle), h_re(chirp_bundle)):
        assert np.all(np.isnan(f.values[~f.valid]))
        assert np.all(np.isfinite(f.values[f.valid]))


# ---- group delay -------------------------------------------------------


def test_group_delay_on_impulse(impulse_bundle):
    f = group_delay(impulse_bundle)
    m = f.valid
    assert m.any()
    assert np.max(np.abs(f.values[m] - 0.5)) < 1 / FS


def test_group_delay_on_tone_is_frame_time(tone_bundle):
    f = group_delay(tone_bundle)
    m = _interior_valid(tone_bundle, f)
    _, t = _grids(tone_bundle)
    np.testing.assert_allclose(f.values[m], np.broadcast_to(t, m.shape)[m], atol=1e-9)


def _lgd_case(c):
    s = gen_lgd(1, 0, 0.2, c, (2 * np.pi * 50, 2 * np.pi * 400), FS, 1)
    b = stft_bundle(s, WindowSpec(SIGMA))
    f = group_delay(b)
    # keep away from the band edges, where the hard spectral cut rings
    rows = (b.omega_axis >= 2 * np.pi * 100) & (b.omega_axis <= 2 * np.pi * 350)
    m = _interior_valid(b, f) & rows[:, None]
    expected = 0.2 + c * b.omega_axis[:, None]
    return np.abs(f.values - expected)[m] * FS


@pytest.mark.parametrize("c,frames", [(0.0, 1e-3), (2e-5, 0.5)])
def test_group_delay_linear_gd(c, frames):
    err = _lgd_case(c)
    assert err.size > 1000
    assert err.max() < frames


def test_group_delay_spread_grows_with_curvature():
    # exact only for c = 0; the off-curve bias grows with (c / sigma^2)^2
    assert _lgd_case(2e-4).max() > 10 * _lgd_case(2e-5).max()


# ---- residual fields ----------------------------------------------------


def test_h_mag_impulse_distance(impulse_bundle):
    f = h_mag(impulse_bundle)
    _, t = _grids(impulse_bundle)
    expected = np.abs(np.broadcast_to(t, f.values.shape) - 0.5)
    assert np.max(np.abs(f.values - expected)[f.valid]) <= 1e-2 * 1.0


def test_h_mag_small_on_chirp_ridge(chirp_bundle):
    b = chirp_bundle
    f = h_mag(b)
    _, t = _grids(b)
    ridge_rows = np.floor((CHIRP_B + CHIRP_C * b.t_axis) / b.d_omega + 0.5).astype(int)
    cols = np.arange(b.t_axis.size)[b.interior()]
    vals = f.values[ridge_rows[cols], cols]
    # half a bin off the ridge gives sigma^2 (dw/2) sqrt(1 + sigma^4 c^2) / D
    bound = SIGMA**2 * (b.d_omega / 2) * np.sqrt(1 + SIGMA**4 * CHIRP_C**2) / D_CHIRP
    assert np.all(vals <= bound * 1.01)


def test_h_re_closed_form(chirp_bundle):
    b = chirp_bundle
    f = h_re(b)
    w, t = _grids(b)
    expected = np.broadcast_to(-(SIGMA**2) * (w - CHIRP_B - CHIRP_C * t) / D_CHIRP, f.values.shape)
    m = _interior_valid(b, f)
    big = m & (np.abs(expected) > SIGMA**2 * b.d_omega)
    np.testing.assert_allclose(f.values[big], expected[big], rtol=0.02)
    assert np.max(np.abs(f.values - expected)[m]) < 0.02 * SIGMA**2 * b.d_omega


def test_h_re_sign_and_antisymmetry(chirp_bundle):
    b = chirp_bundle
    f = h_re(b)
    col = 512
    ridge = (CHIRP_B + CHIRP_C * b.t_axis[col]) / b.d_omega
    r0 = int(round(ridge))
    below = f.values[r0 - 20 : r0 - 1, col]
    above = f.values[r0 + 2 : r0 + 21, col]
    assert np.all(below > 0) and np.all(above < 0)
    k = np.arange(1, 15)
    np.testing.assert_allclose(f.values[r0 + k, col], -f.values[r0 - k, col], rtol=1e-3)


def test_h_set_on_tone(tone_bundle):
    f = h_set(omega1(tone_bundle), tone_bundle.omega_axis)
    m = _interior_valid(tone_bundle, f)
    w, _ = _grids(tone_bundle)
    np.testing.assert_allclose(f.values[m], np.broadcast_to(w - 2 * np.pi * 200, m.shape)[m], atol=TONE_TOL)
    assert f.kind is FieldKind.H_SET


def test_h_set_requires_omega1(chirp_bundle):
    with pytest.raises(ValueError):
        h_set(h_mag(chirp_bundle), chirp_bundle.omega_axis)


def test_h_multires_single_width_is_h_mag(chirp):
    b = stft_bundle(chirp, WindowSpec(SIGMA))
    a = h_multires(chirp, [SIGMA])
    ref = h_mag(b)
    np.testing.assert_array_equal(a.valid, ref.valid)
    np.testing.assert_allclose(a.values[a.valid], ref.values[ref.valid], rtol=1e-12)


def test_h_multires_impulse():
    s = gen_impulse(1, 0.5, FS, 1)
    f = h_multires(s, [0.01, 0.02])
    t = np.arange(len(s)) / FS
    expected = np.broadcast_to(np.abs(t - 0.5)[None, :], f.values.shape)
    assert np.max(np.abs(f.values - expected)[f.valid]) <= 1e-2


def _two_tone_hits(field, lo, hi):
    b_rows = field.values.shape[0]
    d_omega = field.meta["d_omega"]
    fs = field.meta["fs"]
    tol = max(field.meta["sigma"] ** 2 * d_omega / 2, 1 / (2 * fs))
    mins = np.zeros(field.values.shape, bool)
    v = np.where(np.isnan(field.values), np.inf, field.values)
    mins[1:-1] = (v[1:-1] < v[:-2]) & (v[1:-1] < v[2:]) & (v[1:-1] < tol)
    margin = int(5 * max(field.meta["sigmas"]) * fs)
    cols = np.arange(margin, field.values.shape[1] - margin)
    hit = []
    for f0 in (lo, hi):
        r = int(round(2 * np.pi * f0 / d_omega))
        assert r < b_rows
        hit.append(mins[r - 1 : r + 2][:, cols].any(axis=0))
    return np.mean(hit[0] & hit[1])


def test_h_multires_resolves_close_tones():
    s = mix([gen_lfm(1, 0, 2 * np.pi * 200, 0, FS, 1), gen_lfm(1, 0, 2 * np.pi * 220, 0, FS, 1)])
    short = h_multires(s, [0.01], n_fft=4096)
    joint = h_multires(s, [0.01, 0.05])
    assert _two_tone_hits(short, 200, 220) < 0.05
    assert _two_tone_hits(joint, 200, 220) > 0.95


def test_h_multires_rejects_empty():
    with pytest.raises(ValueError):
        h_multires(gen_impulse(1, 0.5, FS, 1), [])


# ---- harmonic plus pulse ---------------------------------------------------


def test_mixture_roots_on_both_curves():
    s = mix([gen_lfm(1, 0, 2 * np.pi * 200, 0, FS, 1), gen_impulse(1, 0.5, FS, 1)])
    b = stft_bundle(s, WindowSpec(SIGMA))
    et = extract(b, h_mag(b), ExtractRule())
    kept = np.abs(et.values) > 0
    tone_row = int(round(2 * np.pi * 200 / b.d_omega))
    cols = np.arange(b.t_axis.size)[b.interior()]
    far = cols[np.abs(b.t_axis[cols] - 0.5) > 4 * SIGMA]
    assert kept[tone_row - 1 : tone_row + 2][:, far].any(axis=0).all()
    rows = np.arange(b.omega_axis.size)
    far_rows = rows[np.abs(rows - tone_row) > 40]
    assert kept[far_rows][:, 511:514].any(axis=1).mean() > 0.95


# ---- derivatives and input checks -------------------------------------------


@pytest.mark.parametrize("residual", [h_re, lambda b: h_set(omega1(b), b.omega_axis)])
def test_h_domega_matches_central_difference(chirp_bundle, residual):
    b = chirp_bundle
    h = residual(b)
    a = h_domega(b, h)
    cd = central_difference(h, b.d_omega)
    m = _interior_valid(b, h)
    m[:-1] &= h.valid[1:]
    m[1:] &= h.valid[:-1]
    scale = np.nanmax(np.abs(a[m]))
    assert np.max(np.abs(a[m] - cd[m])) <= 1e-3 * scale


def test_h_domega_rejects_magnitude(chirp_bundle):
    with pytest.raises(ValueError):
        h_domega(chirp_bundle, h_mag(chirp_bundle))


def test_missing_window_kinds_raise(chirp):
    b = stft_bundle(chirp, WindowSpec(SIGMA), kinds=(WindowKind.G,))
    for fn in (omega1, omega2, group_delay, h_mag, h_re):
        with pytest.raises((KeyError, ValueError)):
            fn(b)


def test_units():
    assert FieldKind.H_MAG.value == "H_MAG"
    b = stft_bundle(gen_impulse(1, 0.5, 256, 1), WindowSpec(0.05))
    assert h_mag(b).units == "s" and omega1(b).units == "rad/s"
