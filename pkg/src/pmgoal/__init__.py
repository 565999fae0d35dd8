"""Goal recognition from continuous sensor traces via process mining."""
from .align import Alignment, CostFunction, Move, brute_force_alignment, optimal_alignment
from .data import (ContinuousTrace, CsvSchema, Dataset, FoldPlan, load_dataset, save_dataset,
                   split_folds, synth_dataset, truncate_prefix)
from .discover import GoalModel, accepts, build_model
from .evaluation import (EvalReport, PipelineConfig, cross_validate, f1, instance_metrics, mean_ci,
                         probability_gap, sidak_alpha, welch_t_test)
from .featsel import FeatureSelection, cluster_features, correlation_matrix, fit_selection, select_medoids
from .lda import LdaModel, fit_lda, lda_classify, lda_recognize
from .quantize import Codebook, EventTrace, assign_event, discretize, fit_codebook, fit_normalizer
from .recognize import (Artifacts, GoalPosterior, WeightParams, alignment_weight, goal_posterior,
                        infer_goals, recognize, train_artifacts)

__version__ = "0.1.0"
