"""Hard-thresholded graph selection for Gaussian graphical models with latent confounders.

Estimators (graphical lasso, neighborhood selection, CLIME and the latent
variable graphical lasso), a thresholding and tuning layer, a latent-variable
simulation engine and an experiment runner.
"""
from .core import (
    EdgeSet,
    NotPositiveDefiniteError,
    edge_set,
    log_det,
    sample_covariance,
    spd_inverse,
    sym_eigen,
    to_correlation,
)
from .glasso import PrecisionEstimate, SolverOptions, fit_glasso, fit_glasso_path, kkt_residual
from .neighborhood import fit_neighborhood, lasso_cd
from .clime import fit_clime
from .lvglasso import ADMMOptions, LatentDecomposition, fit_lvglasso, lv_edge_set
from .select import (
    default_lambda0,
    ebic_score,
    hard_threshold,
    kfold_cv,
    select_by_ebic,
    threshold_for_edge_count,
)
from .simulate import (
    GraphSpec,
    chain_precision,
    eta,
    latent_spec,
    marginal_precision,
    sample_mvn,
    small_world_precision,
)
from .metrics import confusion, f1, f1_score, sign_consistency, tuning_share

__version__ = "0.1.0"
