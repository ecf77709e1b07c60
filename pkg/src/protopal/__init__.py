"""Prototype-based disease risk: cohorts, training, risk, twins, plans, serving."""

from .autoencoder import AutoencoderConfig, DenoisingAutoencoder, fit_autoencoder
from .bundle import (BUNDLE_FORMAT_VERSION, ModelBundle, bundle_from_json,
                     bundle_from_models, bundle_to_json, load_bundle, save_bundle)
from .cox import CoxModel, cox_log_partial_likelihood, fit_cox
from .distances import (TangentBasis, euclidean_sq, orthonormalize,
                        relevance_dist_sq, tangent_dist_sq, tangent_residual_sq)
from .errors import (BundleError, CohortValidationError, ConvergenceError,
                     DegenerateBasisError, DimensionMismatchError,
                     GeneratorConfigError, InterventionError, MetricError,
                     ProtoPalError, SchemaError, TrainingError)
from .evaluation import (ComparisonRow, ComparisonTable, EvaluationResult,
                         TrendExport, compare, comparison_to_csv, evaluate_cohort,
                         export_prototype_trends, fit_cox_for_disease,
                         train_disease_models, train_test_split, trends_to_csv)
from .lvq import (Prototype, PrototypeSet, TrainedDiseaseModel, TrainingConfig,
                  classify, glvq_mu, glvq_mu_gradients, init_prototypes, train)
from .metrics import auc, c_index
from .planner import HealthPlan, Move, PlanConfig, PlanStep, candidate_moves, plan
from .risk import (Neighborhood, RiskEntry, RiskReport, neighborhood, risk_report,
                   risk_score, risk_scores_batch, score_disease)
from .schema import (BinaryDomain, CohortDataset, ContinuousDomain, FeatureSchema,
                     FeatureSpec, Individual, OrdinalDomain, Standardizer,
                     fit_standardizer, load_cohort, write_cohort)
from .synthetic import (ClusterBump, GeneratorConfig, PlantedDisease, demo_config,
                        default_schema, generate_synthetic_cohort, planted_logits)
from .twins import (DigitalTwin, fit_autoencoders, make_full_twins,
                    prototype_lifestyle, simulate)

__version__ = "1.0.0"
