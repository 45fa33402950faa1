"""Noisy one-bit compressed sensing by GAMP, with optional side information."""

from .benchmark import ExperimentConfig, ResultTable, run_experiment, run_sequential_experiment
from .channel import ChannelParams, f_update, posterior_z_moments
from .gamp import GampConfig, GampResult, run_noisy1bg, run_with_si
from .priors import (
    AmplitudeGaussian,
    AmplitudeLaplacian,
    NoSI,
    SignalPrior,
    Support,
    bg_denoise,
    gaussian_si_denoise,
    laplacian_si_denoise,
    support_si_denoise,
)
from .sim import (
    NoisyAmplitude,
    NoisySupport,
    NoneSI,
    ScenarioConfig,
    SlowVarying,
    make_trial,
    nmse,
)

__version__ = "0.1.0"
