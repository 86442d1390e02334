"""Matplotlib renderings of TF representations for the compare report."""

from __future__ import annotations

import math

import numpy as np
from matplotlib.figure import Figure

from .signals import Signal


def _db(values, floor_db):
    mag = np.abs(values)
    peak = mag.max()
    if not peak > 0:
        return np.full(mag.shape, floor_db)
    with np.errstate(divide="ignore"):
        return np.clip(20 * np.log10(mag / peak), floor_db, 0)


def max_pool(mag, max_shape=(160, 200)):
    """Block maximum so thin ridges survive downsampling to screen size."""
    fy = max(1, -(-mag.shape[0] // max_shape[0]))
    fx = max(1, -(-mag.shape[1] // max_shape[1]))
    if fy == fx == 1:
        return mag
    ny, nx = -(-mag.shape[0] // fy), -(-mag.shape[1] // fx)
    padded = np.zeros((ny * fy, nx * fx))
    padded[: mag.shape[0], : mag.shape[1]] = mag
    return padded.reshape(ny, fy, nx, fx).max(axis=(1, 3))


def tf_panel(ax, tfr, title=None, floor_db=-60.0, cmap="magma"):
    """Draw one magnitude image (dB re max) on ``ax``; returns the image."""
    t = tfr.t_axis
    f = tfr.omega_axis / (2 * np.pi)
    extent = (t[0], t[-1], f[0], f[-1])
    im = ax.imshow(
        _db(max_pool(np.abs(tfr.values)), floor_db),
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap=cmap,
        vmin=floor_db,
        vmax=0,
        interpolation="nearest",
    )
    ax.set_title(title or tfr.method.value, fontsize=9)
    return im


def compare_figure(tfrs, labels=None, signal: Signal | None = None, floor_db=-60.0, ncols=3):
    """Grid of magnitude images, optionally preceded by the waveform.

    Parameters
    ----------
    tfrs : sequence of SharpenedTFR
    labels : sequence of str, optional
    signal : Signal, optional
        Real part drawn in the first panel.
    """
    labels = list(labels) if labels is not None else [r.method.value for r in tfrs]
    n = len(tfrs) + (signal is not None)
    nrows = max(1, math.ceil(n / ncols))
    fig = Figure(figsize=(3.6 * ncols, 2.8 * nrows), constrained_layout=True)
    axes = fig.subplots(nrows, ncols, squeeze=False).ravel()
    k = 0
    if signal is not None:
        ax = axes[0]
        ax.plot(signal.t, signal.samples.real, lw=0.6, color="k")
        ax.set_title("waveform (real part)", fontsize=9)
        ax.set_xlabel("time [s]")
        k = 1
    im = None
    for tfr, label in zip(tfrs, labels):
        ax = axes[k]
        im = tf_panel(ax, tfr, label, floor_db)
        ax.set_xlabel("time [s]")
        ax.set_ylabel("frequency [Hz]")
        k += 1
    for ax in axes[k:]:
        ax.set_visible(False)
    if im is not None:
        fig.colorbar(im, ax=list(axes[:k]), shrink=0.6, label="dB re max")
    return fig


def save_compare_figure(path, tfrs, labels=None, signal=None, dpi=110):
    fig = compare_figure(tfrs, labels, signal)
    fig.savefig(path, dpi=dpi)
    return path
