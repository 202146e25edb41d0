"""Robust low-rank decomposition by spherically normalized SVD."""
from .baselines import HuberConfig, elsvd_decompose, svd_decompose
from .errors import (ConvergenceError, DegenerateInputError, EnumerationBudgetError,
                     MatrixFormatError, ParameterError)
from .matcore import (Subspace, SvdFactorization, SvdTriple, col_normalize, f1_norm,
                      principal_angle, read_matrix_csv, row_normalize, truncated_svd,
                      write_matrix_csv)
from .robustness import (BlockOrder, BlockSize, BoundResult, ProbeReport, block_cmp,
                         breakdown_probe, lower_bound_nR, lower_bound_pR)
from .simgen import SimConfig, accuracy_study, gen_instance, run_sweep
from .spsvd import SpsvdResult, extract_candidates, select_pair, spsvd_decompose
from .wmedian import WeightedSample, weighted_median

__version__ = "0.1.0"

__all__ = [
    "HuberConfig", "elsvd_decompose", "svd_decompose",
    "ConvergenceError", "DegenerateInputError", "EnumerationBudgetError",
    "MatrixFormatError", "ParameterError",
    "Subspace", "SvdFactorization", "SvdTriple", "col_normalize", "f1_norm",
    "principal_angle", "read_matrix_csv", "row_normalize", "truncated_svd", "write_matrix_csv",
    "BlockOrder", "BlockSize", "BoundResult", "ProbeReport", "block_cmp",
    "breakdown_probe", "lower_bound_nR", "lower_bound_pR",
    "SimConfig", "accuracy_study", "gen_instance", "run_sweep",
    "SpsvdResult", "extract_candidates", "select_pair", "spsvd_decompose",
    "WeightedSample", "weighted_median",
]
