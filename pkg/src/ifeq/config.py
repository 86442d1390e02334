"""Run configuration and its JSON round trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

METHOD_NAMES = (
    "stft",
    "fsst",
    "fsst2",
    "tsst",
    "set",
    "et-if-mag",
    "et-if-re",
    "et-multires",
    "rm-if-fp",
    "rm-if-newton",
    "rm-if-lm",
    "msst",
)


@dataclass
class RunConfig:
    sigma: float = 0.02
    trunc_radius: float = 5.0
    n_fft: int | None = None
    gamma: float = 0.01
    method: str = "et-if-mag"
    tau: float | None = None
    rho: float | None = None
    max_iter: int = 50
    tol: float | None = None
    derivative: str = "central-difference"
    abs_tol: float | None = None
    set_tol: float | None = None
    msst_iters: int = 3
    multires_sigmas: list = field(default_factory=lambda: [0.01, 0.05])
    seed: int = 42
    snr_db: float | None = None
    input: str | None = None
    output: str | None = None

    def __post_init__(self):
        if self.method not in METHOD_NAMES:
            raise ValueError(f"unknown method {self.method!r}")
        positive = {
            "sigma": self.sigma,
            "trunc_radius": self.trunc_radius,
            "gamma": self.gamma,
            "max_iter": self.max_iter,
            "msst_iters": self.msst_iters,
        }
        for key in ("n_fft", "rho", "tol", "abs_tol", "set_tol"):
            if getattr(self, key) is not None:
                positive[key] = getattr(self, key)
        for key, value in positive.items():
            if not value > 0:
                raise ValueError(f"{key} must be positive, got {value}")
        if not self.gamma < 1:
            raise ValueError("gamma must be below 1")
        if self.tau == 0:
            raise ValueError("tau must be non-zero")
        if not all(s > 0 for s in self.multires_sigmas):
            raise ValueError("multires sigmas must be positive")
        self.multires_sigmas = [float(s) for s in self.multires_sigmas]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def save(self, path):
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())
