"""Time-frequency sharpening driven by instantaneous-frequency equations.

The pipeline is: synthesise or load a :class:`Signal`, compute a
:class:`TFBundle` of Gaussian-family STFTs, derive estimator or residual
fields, then squeeze, extract or iteratively reassign.
"""

from .config import METHOD_NAMES, RunConfig
from .estimators import (
    EstimatorField,
    FieldKind,
    group_delay,
    h_mag,
    h_multires,
    h_re,
    h_set,
    omega1,
    omega2,
)
from .methods import run_method
from .metrics import bench, renyi_entropy, ridge_error
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
from .signals import (
    ComponentDescriptor,
    ComponentKind,
    Signal,
    add_awgn,
    figure1_testbed,
    gen_cosfm,
    gen_impulse,
    gen_lfm,
    gen_lgd,
    mix,
    preset,
)
from .stft import TFBundle, WindowKind, WindowSpec, stft, stft_bundle, threshold_mask

__version__ = "0.1.0"
