"""
Spectral ranking from pairwise comparisons with item covariates.

The rankers live in :mod:`covrank.rankers`, kernel dependence tools in
:mod:`covrank.kernels`, the synthetic generator in :mod:`covrank.synth` and
the experiment protocols in :mod:`covrank.harness`.
"""

from .core import (CARDINAL, ORDINAL, ComparisonGraph, DataError, FeatureTable, RankResult,
                   count_upsets, kendall_tau, orient_ranking)
from .harness import CvPlan, ExperimentReport, cross_validate, fit, run_noise_sweep, \
    run_prediction_experiment
from .kernels import KernelSpec, bahsic_select, hsic, hsic_test, kernel_matrix
from .numlin import ConvergenceError, NumericalError
from .predict import PredictionResult, predict_scores, predict_unseen
from .rankers import (FairnessConfig, FittedModel, c_serial_rank, kcca_rank, probability_proxy,
                      rank_centrality, rc_rank, serial_rank, svd_rank, svdcov_rank,
                      svdkcov_rank, svdkfair_rank)
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "CARDINAL", "ORDINAL", "ComparisonGraph", "DataError", "FeatureTable", "RankResult",
    "count_upsets", "kendall_tau", "orient_ranking",
    "CvPlan", "ExperimentReport", "cross_validate", "fit", "run_noise_sweep",
    "run_prediction_experiment",
    "KernelSpec", "bahsic_select", "hsic", "hsic_test", "kernel_matrix",
    "ConvergenceError", "NumericalError",
    "PredictionResult", "predict_scores", "predict_unseen",
    "FairnessConfig", "FittedModel", "c_serial_rank", "kcca_rank", "probability_proxy",
    "rank_centrality", "rc_rank", "serial_rank", "svd_rank", "svdcov_rank", "svdkcov_rank",
    "svdkfair_rank",
    "SynthConfig", "generate",
]
