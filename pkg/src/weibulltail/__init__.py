"""Estimation of the Weibull tail-coefficient from upper order statistics."""

__version__ = "0.1.0"

from .asymptotics import LimitLaw, condition_diagnostics, confidence_interval, limit_law
from .errors import WeibullTailError
from .estimator import (QqPoint, k_rho, qq_pairs, tau_n, theta_general, theta_hill, theta_zipf,
                        zeta_n, zipf_weights)
from .sample import SortedSample, check_intermediate, ingest, read_sample, top_log_spacings
from .scorefn import HILL, ZIPF, ScoreFunction, WeightSequence, check_envelope, mu, sigma2, weights_from_score
from .tailmodels import TailModel, make_model, parse_model, predicted_bias, quantile, sample

__all__ = [
    "HILL", "ZIPF", "LimitLaw", "QqPoint", "ScoreFunction", "SortedSample", "TailModel",
    "WeibullTailError", "WeightSequence", "check_envelope", "check_intermediate",
    "condition_diagnostics", "confidence_interval", "ingest", "k_rho", "limit_law",
    "make_model", "mu", "parse_model", "predicted_bias", "qq_pairs", "quantile", "read_sample",
    "sample", "sigma2", "tau_n", "theta_general", "theta_hill", "theta_zipf",
    "top_log_spacings", "weights_from_score", "zeta_n", "zipf_weights",
]
