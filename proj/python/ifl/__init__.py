"""Feature-learning framework: closed forms, Monte-Carlo checks, sweeps and
interaction tensors. Exact results come back as fractions.Fraction."""
from fractions import Fraction

from . import _core
from ._core import (
    AgreementFn,
    FormatError,
    FrameworkParams,
    ResourceError,
    ValidationError,
    build_interaction_tensor,
    coverage_bound,
    data_model_csv,
    ensemble_confidence,
    expected_accuracy,
    expected_agreement,
    feature_frequency,
    feature_frequency_csv,
    feature_similarity,
    fit_pca,
    mc_accuracy,
    mc_agreement,
    nearest_neighbors,
    parse_grid,
    q_components,
    read_activations,
    read_predictions,
    read_tensor,
    shared_error_csv,
    sweep,
    write_activations,
    write_predictions,
    write_tensor,
)

__version__ = "0.1.0"


def exact_accuracy(params):
    return Fraction(_core.exact_accuracy(params))


def exact_agreement(params, zeta):
    return Fraction(_core.exact_agreement(params, zeta))


def enum_accuracy(params):
    return Fraction(_core.enum_accuracy(params))


def enum_agreement(params, zeta):
    return Fraction(_core.enum_agreement(params, zeta))
