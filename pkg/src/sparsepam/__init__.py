"""Sparse, asymmetric k-medoids / facility location with dynamic k."""

from .core import (
    Assignment,
    LossPair,
    SparseCostMatrix,
    build_matrix,
    evaluate_loss,
    from_dense,
    loss_compare,
    read_matrix,
    write_matrix,
)
from .initialize import InfeasibleError, dyn_build, random_init, sparse_pp
from .swap import SwapConfig, SwapState, dyn_swap, refresh_caches, removal_losses

__all__ = [
    "Assignment",
    "InfeasibleError",
    "LossPair",
    "SparseCostMatrix",
    "SwapConfig",
    "SwapState",
    "build_matrix",
    "dyn_build",
    "dyn_swap",
    "evaluate_loss",
    "from_dense",
    "loss_compare",
    "random_init",
    "read_matrix",
    "refresh_caches",
    "removal_losses",
    "sparse_pp",
    "write_matrix",
]
