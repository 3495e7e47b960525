"""Zero-inflated quantile single-index regression.

Two-part conditional quantile modeling for non-negative, zero-inflated,
overdispersed outcomes: a logistic model for the zero mass and a B-spline
single-index quantile regression for the positive part, assembled into a
full quantile curve with a stabilizing interpolation band around the
change point.  Ships with two published baselines and a reproducible
Monte Carlo benchmark harness.
"""

from .curve import (QuantilePrediction, ZiqsiModel, default_grid, fit_ziqsi,
                    predict_curve, predict_quantile)
from .baselines import (QsiModel, ZiqLinearModel, fit_qsi, fit_ziq_linear,
                        predict_model, predict_qsi, predict_ziq_linear)
from .data import Dataset, ingest_csv
from .effects import AqeResult, bootstrap_aqe, compute_aqe
from .numerics import (QrSolution, SphereResult, check_loss,
                       fit_linear_quantile, minimize_on_sphere)
from .simulation import (McReport, SimConfig, TrueQuantileOracle,
                         evaluate_metrics, generate_dataset, run_study)
from .single_index import (KnotSelection, SingleIndexFit, default_knot_count,
                           fit_single_index, fit_theta_given_beta,
                           profile_objective, select_knots)
from .splines import SplineBasis, build_basis, design_matrix, eval_basis
from .store import load_model, model_from_dict, model_to_dict, save_model
from .zero import ZeroModel, fit_logistic, gamma_map, positive_probability

__version__ = "0.1.0"
