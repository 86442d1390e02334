"""End-to-end pipelines from a signal to one TF representation, by name."""

from __future__ import annotations

from .config import RunConfig
from .estimators import group_delay, h_mag, h_multires, h_re, h_set, omega1, omega2
from .sharpen import (
    ExtractRule,
    Method,
    SharpenedTFR,
    SolverConfig,
    extract,
    msst,
    reassign_iterative,
    squeeze_freq,
    squeeze_time,
)
from .stft import WindowKind, WindowSpec, default_nfft, stft_bundle, threshold_mask

G, DG, DDG, TG, TDG = tuple(WindowKind)

# Window kinds each pipeline needs; only these are computed.
KINDS = {
    "stft": (G,),
    "fsst": (G, DG),
    "fsst2": (G, DG, DDG, TG, TDG),
    "tsst": (G, TG),
    "set": (G, DG),
    "et-if-mag": (G, TG),
    "et-if-re": (G, TG),
    "et-multires": (G,),
    "rm-if-fp": (G, TG),
    "rm-if-newton": (G, TG),
    "rm-if-lm": (G, TG),
    "msst": (G, DG),
}

# Names used in reports and on the comparison figure.
LABELS = {
    "stft": "STFT",
    "fsst": "FSST",
    "fsst2": "FSST2",
    "tsst": "TSST",
    "set": "SET",
    "et-if-mag": "ET_IF",
    "et-if-re": "ET_IF_RE",
    "et-multires": "ET_MRIF",
    "rm-if-fp": "RM_IF",
    "rm-if-newton": "RM_IF_NEWTON",
    "rm-if-lm": "RM_IF_LM",
    "msst": "MSST",
}

COMPARE_METHODS = ("stft", "fsst", "fsst2", "tsst", "et-if-mag", "rm-if-fp")


def window_spec(cfg: RunConfig) -> WindowSpec:
    return WindowSpec(cfg.sigma, cfg.trunc_radius)


def resolved_nfft(cfg: RunConfig, fs) -> int:
    if cfg.n_fft is not None:
        return cfg.n_fft
    if cfg.method == "et-multires":
        sigmas = [cfg.sigma, *cfg.multires_sigmas]
        return max(default_nfft(WindowSpec(s, cfg.trunc_radius), fs) for s in sigmas)
    return default_nfft(window_spec(cfg), fs)


def solver_config(cfg: RunConfig) -> SolverConfig:
    return SolverConfig(cfg.tau, cfg.rho, cfg.max_iter, cfg.tol, cfg.derivative)


def run_method(name, s, cfg: RunConfig | None = None) -> SharpenedTFR:
    """Compute method ``name`` on signal ``s`` from scratch."""
    cfg = cfg or RunConfig()
    if name not in KINDS:
        raise ValueError(f"unknown method {name!r}")
    if name == "et-multires" and cfg.method != name:
        cfg = RunConfig(**{**cfg.__dict__, "method": name})
    kinds = KINDS[name]
    if name in ("rm-if-newton", "rm-if-lm") and cfg.derivative == "window-identity":
        kinds = kinds + (TDG,)
    b = stft_bundle(s, window_spec(cfg), resolved_nfft(cfg, s.fs), kinds=kinds)
    gamma = cfg.gamma
    rule = ExtractRule(cfg.abs_tol, cfg.set_tol)
    if name == "stft":
        mask, lam = threshold_mask(b[G], gamma)
        return SharpenedTFR(b[G].copy(), Method.STFT, b.t_axis, b.omega_axis, b.fs,
                            {"gamma": gamma, "lam": lam}, {"masked": int(mask.sum())})
    if name == "fsst":
        return squeeze_freq(b, omega1(b, gamma))
    if name == "fsst2":
        return squeeze_freq(b, omega2(b, gamma))
    if name == "tsst":
        return squeeze_time(b, group_delay(b, gamma))
    if name == "set":
        return extract(b, h_set(omega1(b, gamma), b.omega_axis), rule)
    if name == "et-if-mag":
        return extract(b, h_mag(b, gamma), rule)
    if name == "et-if-re":
        return extract(b, h_re(b, gamma), rule)
    if name == "et-multires":
        h = h_multires(s, cfg.multires_sigmas, gamma, b.n_fft, cfg.trunc_radius)
        return extract(b, h, rule)
    if name == "msst":
        return msst(b, cfg.msst_iters, gamma)
    solver = {"rm-if-fp": "FP", "rm-if-newton": "NEWTON", "rm-if-lm": "LM"}[name]
    return reassign_iterative(b, h_re(b, gamma), solver_config(cfg), solver)
