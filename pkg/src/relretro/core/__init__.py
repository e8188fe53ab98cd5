from relretro.core.convexity import ConvexityReport, check_convexity, repulsion_mass
from relretro.core.objective import (
    RelationalOperator,
    assemble_hessian,
    compute_centroids,
    compute_loss,
    loss_gradient,
)
from relretro.core.params import ParamSet, RetrofitConfig, derive_params, directed_groups
from relretro.core.solvers import (
    RetrofitResult,
    SolverError,
    faruqui_loss,
    retrofit_mf,
    retrofit_ro,
    retrofit_rn,
    sequential_update_ro,
    symmetric_edges,
)

__all__ = [
    "ConvexityReport", "ParamSet", "RelationalOperator", "RetrofitConfig", "RetrofitResult", "SolverError",
    "assemble_hessian", "check_convexity", "compute_centroids", "compute_loss", "derive_params",
    "directed_groups", "faruqui_loss", "loss_gradient", "repulsion_mass", "retrofit_mf", "retrofit_ro",
    "retrofit_rn", "sequential_update_ro", "symmetric_edges",
]
