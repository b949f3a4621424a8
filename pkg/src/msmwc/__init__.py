"""Multi-scale multiplicative weights with correction, its unknown-range
wrappers, and universal online-learning ensembles built on it."""

from .numerics import (
    ConfigurationError,
    ConvexDomain,
    DomainError,
    NumericalError,
    entropic_omd_solve,
    euclidean_omd_step,
    kl_divergence,
    matrix_omd_step,
    weighted_entropy_bregman,
)
from .pea_core import LearningRateGrid, MsMwC, ProtocolError, RangeError
from .pea_adaptive import DoublingRunner, RestartWrapper, doubling_run
from .environments import OcoStream, PeaStream
from .uol_ensemble import FullInfoEnsemble, SingleGradientEnsemble, run_ensemble
from .baselines import HedgeFixedEta, hedge_fixed_eta

__version__ = "0.1.0"
