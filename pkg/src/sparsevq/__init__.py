"""Vector quantization as sparse least squares over a step basis."""
from .clustering import ClusterAssignment, assignment_segments, kmeans_1d
from .core import (QuantizedVector, SortedDistinctVector, SparseCoefficients, StepBasis,
                   apply_basis, build_step_basis, extract_distinct, flatten_matrix,
                   restore_matrix, scatter_to_original)
from .estimators import (ClusterLSQuantizer, IterativeL1Quantizer, KMeansQuantizer, L0Quantizer,
                         L1L2Quantizer, L1Quantizer, UniformQuantizer)
from .metrics import hard_sigmoid, l2_loss
from .quantizers import (METHODS, IterationLimitError, QuantizeRequest, quantize,
                         quantize_cluster_ls, quantize_kmeans, quantize_l0, quantize_l1,
                         quantize_l1_iterative, quantize_l1_l2, quantize_uniform)
from .solvers import (SolverConfig, SolveTrace, lasso_cd, lasso_neg_l2_cd, post_ls_refit,
                      soft_threshold, solve_l0_dp)

__version__ = "0.1.0"
