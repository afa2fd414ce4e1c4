"""Sequential sparse multi-response regression under corrupted covariates."""

from .errors import NumericalError, ValidationError
from .factors import (LatentFactorSet, RankSelection, extract_latent_factors,
                      right_singular_vector, select_rank)
from .lasso import (BicTracePoint, LassoSolution, QuadraticLassoProblem,
                    kkt_residual, objective_value, solve_corrected_lasso,
                    tune_lambda_bic)
from .metrics import (AggregateCell, AggregateTable, ReplicateMetrics, aggregate,
                      nee, npe, rank_error)
from .pipeline import CossFit, FitOptions, UnitRankLayer, fit_coss, fit_naive, predict
from .psd import (AdmmSettings, PsdProjectionResult, nearest_psd_maxnorm,
                  project_l1_ball, project_psd_cone)
from .simulate import (ScenarioConfig, ScenarioDataset, ar1_covariance,
                       corrupt_design, generate_coefficient_matrix,
                       generate_scenario, replicate_config, sample_gaussian_rows)
from .surrogates import CorruptionModel, SurrogatePair, cross_surrogate, gram_surrogate

__version__ = "0.1.0"

__all__ = [
    "AdmmSettings", "AggregateCell", "AggregateTable", "BicTracePoint",
    "CorruptionModel", "CossFit", "FitOptions", "LassoSolution",
    "LatentFactorSet", "NumericalError", "PsdProjectionResult",
    "QuadraticLassoProblem", "RankSelection", "ReplicateMetrics",
    "ScenarioConfig", "ScenarioDataset", "SurrogatePair", "UnitRankLayer",
    "ValidationError", "aggregate", "ar1_covariance", "corrupt_design",
    "cross_surrogate", "extract_latent_factors", "fit_coss", "fit_naive",
    "generate_coefficient_matrix", "generate_scenario", "gram_surrogate",
    "kkt_residual", "nearest_psd_maxnorm", "nee", "npe", "objective_value",
    "predict", "project_l1_ball", "project_psd_cone", "rank_error",
    "replicate_config", "right_singular_vector", "sample_gaussian_rows",
    "select_rank", "solve_corrected_lasso", "tune_lambda_bic",
]
