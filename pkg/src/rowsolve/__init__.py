"""Randomized block row-action solvers for least-squares problems.

The extended method interleaves a column-space step (driving y toward the
right-hand side's null-space component) with a row-space step (driving x
toward the minimum-norm least-squares solution), so it converges on
inconsistent systems where plain row-action methods stall.
"""

from .errors import DataError, DegenerateRatesError, ParseError, UsageError
from .harness import (RunTrace, TrialEnsemble, aggregate, read_ensemble,
                      read_trace, read_vector, run_trials, write_ensemble,
                      write_pgm, write_trace, write_vector)
from .matrix import (MatrixStore, SvdFactor, as_store, frobenius_norm_sq,
                     matvec, mm_read, mm_write, thin_svd)
from .partition import (Partition, RngStream, attach_norms,
                        contiguous_partition, sample_block)
from .problems import (ProblemInstance, example1, load_instance, noisy_rhs,
                       save_instance, synthetic_udv, tomo_instance,
                       tomo_line_matrix, tomo_noisy_rhs)
from .solvers import (METHODS, BlockCache, SolverConfig, SolverState,
                      adaptive_step_sizes, ermr_step, gek_step, init_state,
                      reabk_step, rek_step, rmr_homogeneous_step, rmr_step,
                      run)
from .theory import (LemmaReport, RateReport, convergence_rates,
                     iteration_bound, lemma_checks, min_norm_lsq,
                     omega_constant, range_null_split)

__version__ = "0.1.0"

__all__ = [
    "DataError", "DegenerateRatesError", "ParseError", "UsageError",
    "RunTrace", "TrialEnsemble", "aggregate", "read_ensemble", "read_trace",
    "read_vector", "run_trials", "write_ensemble", "write_pgm", "write_trace",
    "write_vector",
    "MatrixStore", "SvdFactor", "as_store", "frobenius_norm_sq", "matvec",
    "mm_read", "mm_write", "thin_svd",
    "Partition", "RngStream", "attach_norms", "contiguous_partition",
    "sample_block",
    "ProblemInstance", "example1", "load_instance", "noisy_rhs",
    "save_instance", "synthetic_udv", "tomo_instance", "tomo_line_matrix",
    "tomo_noisy_rhs",
    "METHODS", "BlockCache", "SolverConfig", "SolverState",
    "adaptive_step_sizes", "ermr_step", "gek_step", "init_state", "reabk_step",
    "rek_step", "rmr_homogeneous_step", "rmr_step", "run",
    "LemmaReport", "RateReport", "convergence_rates", "iteration_bound",
    "lemma_checks", "min_norm_lsq", "omega_constant", "range_null_split",
    "__version__",
]
