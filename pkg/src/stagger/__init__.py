"""Bayesian optimization with the Stagger Thompson Sampler."""

from .acquisitions import AcqSpec, expected_improvement, propose_arm, ucb
from .domain import InvalidDimensionError, make_rng, sobol_points, uniform_point
from .gp import (Dataset, GPError, GpModel, KernelParams, PosteriorGaussian, argmax_mean, conditional_variance, fit,
                 joint_sample, posterior)
from .mtv import BatchDesign, MtvConfig, design_batch, mtv_objective, pstar_samples
from .samplers import (PssConfig, StsConfig, TsConfig, perturb, pss_sample, stagger_length, sts_sample, sts_samples,
                       ts_sample)
from .testbed import Distortion, TestFunction, distort, evaluate_unit, get_function

__all__ = [
    "AcqSpec", "BatchDesign", "Dataset", "Distortion", "GPError", "GpModel", "InvalidDimensionError", "KernelParams",
    "MtvConfig", "PosteriorGaussian", "PssConfig", "StsConfig", "TestFunction", "TsConfig", "argmax_mean",
    "conditional_variance", "design_batch", "distort", "evaluate_unit", "expected_improvement", "fit",
    "get_function", "joint_sample", "make_rng", "mtv_objective", "perturb", "posterior", "propose_arm",
    "pss_sample", "pstar_samples", "sobol_points", "stagger_length", "sts_sample", "sts_samples", "ts_sample",
    "ucb", "uniform_point",
]

__version__ = "0.1.0"
