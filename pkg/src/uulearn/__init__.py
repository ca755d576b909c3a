"""Binary classifiers trained from two unlabeled sets with known class priors."""

from .bounds import BoundInputs, empirical_rademacher_linear, estimation_error_bound, uniform_deviation_bound
from .config import ExperimentConfig, load_config, parse_config
from .datagen import SamplePlan, load_csv, make_u_pair, mixture_u_pair, perturb_priors, sample_mixture, save_csv
from .errors import (
    AbortedRunError,
    ConfigError,
    DataExhaustedError,
    DegeneratePriorsError,
    DomainError,
    EmptySampleError,
    ParseError,
    ShapeError,
    SingleClassError,
    UULearnError,
    UnsupportedLossError,
    UnsupportedModelError,
)
from .estimators import (
    GaussianMixtureSpec,
    LabeledSet,
    RiskEstimate,
    UnlabeledSet,
    empirical_balanced_risk,
    empirical_risk_pn,
    empirical_risk_pu,
    empirical_risk_uu,
    empirical_risk_uu_sym,
    true_risk_gaussian,
    zero_one_test_error,
)
from .losses import LOGISTIC, RAMP, SIGMOID, ZERO_ONE, get_loss, loss_constants, loss_value
from .models import LinearModel, MlpModel, init_model, load_model, save_model
from .optim import TrainConfig, TrainHistory, train
from .rewrite import (
    PriorTriple,
    ccn_backward_coefficients,
    classify_reduction,
    correction_coefficients,
    cost_weights,
    single_set_witness,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInputs",
    "empirical_rademacher_linear",
    "estimation_error_bound",
    "uniform_deviation_bound",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "SamplePlan",
    "load_csv",
    "make_u_pair",
    "mixture_u_pair",
    "perturb_priors",
    "sample_mixture",
    "save_csv",
    "AbortedRunError",
    "ConfigError",
    "DataExhaustedError",
    "DegeneratePriorsError",
    "DomainError",
    "EmptySampleError",
    "ParseError",
    "ShapeError",
    "SingleClassError",
    "UULearnError",
    "UnsupportedLossError",
    "UnsupportedModelError",
    "GaussianMixtureSpec",
    "LabeledSet",
    "RiskEstimate",
    "UnlabeledSet",
    "empirical_balanced_risk",
    "empirical_risk_pn",
    "empirical_risk_pu",
    "empirical_risk_uu",
    "empirical_risk_uu_sym",
    "true_risk_gaussian",
    "zero_one_test_error",
    "LOGISTIC",
    "RAMP",
    "SIGMOID",
    "ZERO_ONE",
    "get_loss",
    "loss_constants",
    "loss_value",
    "LinearModel",
    "MlpModel",
    "init_model",
    "load_model",
    "save_model",
    "TrainConfig",
    "TrainHistory",
    "train",
    "PriorTriple",
    "ccn_backward_coefficients",
    "classify_reduction",
    "correction_coefficients",
    "cost_weights",
    "single_set_witness",
]
