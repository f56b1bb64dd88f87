"""ashlab: a numerical workbench for percentile-adaptive activations.

Layers of the stack, bottom up:

  tensor       immutable float64 arrays, deterministic kernels, seeded RNG
  autodiff     reverse-mode tape engine plus the finite-difference oracle
  stats        threshold statistics, normal quantiles, exact top-k selection
  activations  the baseline zoo and the threshold-adaptive gating family
  nn           dense/conv layers, losses, SGD/Adam, the training loop
  harness      datasets, configs, journals, comparison runs, benchmarks, CLI
"""

from . import activations, autodiff, nn, stats, tensor
from .autodiff import GradCheckReport, Tape, TapeMixError, Variable, backward, fd_check
from .stats import InputStats, SelectionMask, compute_stats, exact_topk_mask, \
    gaussian_topk_mask, percentile_from_z, z_from_percentile, zscore
from .tensor import RngState, ShapeError, Tensor, ewise, full, matmul, randn, reduce

__version__ = "0.1.0"

__all__ = [
    "activations", "autodiff", "nn", "stats", "tensor",
    "Tensor", "ShapeError", "RngState", "full", "randn", "ewise", "matmul", "reduce",
    "Tape", "Variable", "TapeMixError", "backward", "fd_check", "GradCheckReport",
    "InputStats", "SelectionMask", "compute_stats", "z_from_percentile",
    "percentile_from_z", "zscore", "exact_topk_mask", "gaussian_topk_mask",
    "__version__",
]
