"""Convergence-rate constants, bound evaluators, and the SVD-based oracles.

The two per-partition rates have the shape

    rho = 1 - (1/beta_max) * (sigma_min(A)^2 / ||A||_F^2)

where beta_max is the worst block's sigma_max^2 / ||block||_F^2 ratio and
sigma_min is the smallest retained (nonzero) singular value. The combined
inconsistent-case bound multiplies rho^k by a constant omega that blows up
as the two rates approach each other, hence the explicit degenerate flag.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError, DegenerateRatesError, UsageError
from .matrix import SvdFactor, as_store, thin_svd
from .partition import Partition

_EPS = float(np.finfo(np.float64).eps)

POWER_ITER_TOL = 1e-10
POWER_ITER_CAP = 10_000

# |rho1 - rho2| at or below this relative gap counts as degenerate.
DEGENERACY_RTOL = 1e-12


@dataclass
class RateReport:
    """Rate constants for one (matrix, row partition, column partition) triple."""

    rho1: float
    rho2: float
    beta_max_rows: float
    beta_max_cols: float
    beta_min_rows: float
    sigma_min_sq: float
    frob_sq: float
    num_row_blocks: int
    num_col_blocks: int
    degenerate: bool

    @property
    def rho(self) -> float:
        return max(self.rho1, self.rho2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rho"] = self.rho
        return d


def _power_iteration_sigma_max_sq(block: np.ndarray) -> float:
    """Largest squared singular value via power iteration on B^T B."""
    n = block.shape[1]
    # deterministic, generic start: a ramp is never orthogonal to everything
    v = 1.0 + np.arange(n) / n
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(POWER_ITER_CAP):
        w = block @ v
        v_next = block.T @ w
        norm = np.linalg.norm(v_next)
        if norm == 0.0:
            return 0.0
        lam_next = float(w @ w)  # Rayleigh quotient, v is unit
        v = v_next / norm
        if abs(lam_next - lam) <= POWER_ITER_TOL * max(lam_next, 1e-300):
            return lam_next
        lam = lam_next
    return lam


def _block_sigma_sq_extremes(block: np.ndarray) -> tuple[float, float]:
    """(sigma_max^2, smallest nonzero sigma^2) of a block.

    Dense SVD when the short dimension is small; otherwise power iteration
    for sigma_max and an eigendecomposition of the short-side Gram matrix
    for the smallest nonzero value.
    """
    m, n = block.shape
    if min(m, n) <= 64:
        s = np.linalg.svd(block, compute_uv=False)
        if s[0] == 0.0:
            return 0.0, 0.0
        cut = max(m, n) * _EPS * s[0]
        kept = s[s >= cut]
        return float(s[0] ** 2), float(kept[-1] ** 2)
    smax_sq = _power_iteration_sigma_max_sq(block)
    gram = block @ block.T if m <= n else block.T @ block
    eig = np.linalg.eigvalsh(gram)
    eig = eig[::-1]  # descending
    if eig[0] <= 0.0:
        return smax_sq, 0.0
    cut_sq = (max(m, n) * _EPS) ** 2 * eig[0]
    kept = eig[eig >= cut_sq]
    return smax_sq, float(kept[-1])


def _blocks_dense(store, P: Partition, axis: str):
    for i in range(P.num_blocks):
        if P.block_norms_sq is not None and P.block_norms_sq[i] == 0.0:
            continue  # zero block: never sampled, excluded from the rates
        sel = P.slices[i] if P.slices is not None and P.slices[i] is not None \
            else np.asarray(P.blocks[i])
        blk = store.row_block(sel) if axis == "rows" else store.col_block(sel)
        if hasattr(blk, "toarray"):
            blk = blk.toarray()
        yield i, np.asarray(blk, dtype=np.float64)


def convergence_rates(A, p_rows: Partition, p_cols: Partition) -> RateReport:
    """Assemble rho1 (row side), rho2 (column side), and the beta constants.

    Both partitions must have norms attached. Zero matrix is rejected.
    """
    store = as_store(A)
    if p_rows.block_norms_sq is None or p_cols.block_norms_sq is None:
        raise UsageError("convergence_rates requires partitions with attached norms")
    frob_sq = store.frobenius_norm_sq()
    if frob_sq == 0.0:
        raise DataError("convergence_rates: zero matrix")

    svd = thin_svd(store)
    sigma_min_sq = float(svd.s[-1] ** 2)

    beta_max_rows = 0.0
    beta_min_rows = math.inf
    for i, blk in _blocks_dense(store, p_rows, "rows"):
        smax_sq, smin_sq = _block_sigma_sq_extremes(blk)
        norm_sq = float(p_rows.block_norms_sq[i])
        beta_max_rows = max(beta_max_rows, smax_sq / norm_sq)
        beta_min_rows = min(beta_min_rows, smin_sq / norm_sq)

    beta_max_cols = 0.0
    for j, blk in _blocks_dense(store, p_cols, "cols"):
        smax_sq, _ = _block_sigma_sq_extremes(blk)
        beta_max_cols = max(beta_max_cols, smax_sq / float(p_cols.block_norms_sq[j]))

    ratio = sigma_min_sq / frob_sq
    rho1 = max(0.0, 1.0 - ratio / beta_max_rows)  # clamp fp noise on exact-zero cases
    rho2 = max(0.0, 1.0 - ratio / beta_max_cols)
    degenerate = abs(rho1 - rho2) <= DEGENERACY_RTOL * max(rho1, rho2)

    return RateReport(
        rho1=rho1, rho2=rho2,
        beta_max_rows=beta_max_rows, beta_max_cols=beta_max_cols,
        beta_min_rows=beta_min_rows,
        sigma_min_sq=sigma_min_sq, frob_sq=frob_sq,
        num_row_blocks=p_rows.num_blocks, num_col_blocks=p_cols.num_blocks,
        degenerate=degenerate)


def omega_constant(report: RateReport, x0_err_sq: float, y0_err_sq: float,
                   num_row_blocks: int | None = None,
                   frob_sq: float | None = None) -> float:
    """Constant in the combined bound E||x_k - x*||^2 <= omega * rho^k.

    omega = x0_err_sq + (s / |rho1 - rho2|) * y0_err_sq / (||A||_F^2 * beta_min_rows)

    with s the row-block count. Undefined when rho1 == rho2. Note omega
    grows linearly in s; that is the bound as proved, not an artifact.
    """
    if report.degenerate:
        raise DegenerateRatesError(
            "rho1 == rho2 within tolerance; the combined bound is undefined")
    if x0_err_sq < 0 or y0_err_sq < 0:
        raise UsageError("squared errors must be nonnegative")
    s = report.num_row_blocks if num_row_blocks is None else num_row_blocks
    f_sq = report.frob_sq if frob_sq is None else frob_sq
    gap = abs(report.rho1 - report.rho2)
    return x0_err_sq + (s / gap) * y0_err_sq / (f_sq * report.beta_min_rows)


def iteration_bound(rho: float, omega: float, epsilon: float, beta: float) -> int:
    """Iterations after which P[||x_k - x*||^2 < epsilon] >= beta.

    ceil((1-rho)^-1 * ln(omega / (epsilon*(1-beta)))), floored at zero.
    """
    if not (0.0 <= rho < 1.0):
        raise UsageError(f"rho must be in [0,1), got {rho}")
    if not (0.0 < epsilon < 1.0):
        raise UsageError(f"epsilon must be in (0,1), got {epsilon}")
    if not (0.0 < beta < 1.0):
        raise UsageError(f"beta must be in (0,1), got {beta}")
    if omega <= 0.0:
        raise UsageError(f"omega must be positive, got {omega}")
    arg = omega / (epsilon * (1.0 - beta))
    if arg <= 1.0:
        return 0
    return max(0, math.ceil(math.log(arg) / (1.0 - rho)))


def min_norm_lsq(A, b) -> np.ndarray:
    """Minimum-norm least-squares solution via the thin SVD."""
    store = as_store(A)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (store.shape[0],):
        raise UsageError(f"rhs shape {b.shape} does not match matrix {store.shape}")
    svd = thin_svd(store)
    if svd.rank == 0:
        warnings.warn("min_norm_lsq: zero matrix, returning the zero solution")
        return np.zeros(store.shape[1])
    return svd.V @ ((svd.U.T @ b) / svd.s)


def range_null_split(A, b) -> tuple[np.ndarray, np.ndarray]:
    """Split b into its component in R(A) and the remainder in N(A^T)."""
    store = as_store(A)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (store.shape[0],):
        raise UsageError(f"rhs shape {b.shape} does not match matrix {store.shape}")
    svd = thin_svd(store)
    if svd.rank == 0:
        return np.zeros_like(b), b.copy()
    b_range = svd.U @ (svd.U.T @ b)
    return b_range, b - b_range


@dataclass
class LemmaReport:
    """Monte Carlo check of the two singular-value inequalities.

    range_lemma:  ||A^T u|| >= sigma_min ||u||   for u in R(A)
    norm_lemma:   ||A A^T u|| <= sigma_max ||A^T u||   for any u

    Margins are relative; negative margin below the slack counts as a
    violation.
    """

    trials: int
    violations_range: int
    violations_norm: int
    worst_margin_range: float
    worst_margin_norm: float
    sigma_min: float
    sigma_max: float

    @property
    def passed(self) -> bool:
        return self.violations_range == 0 and self.violations_norm == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


LEMMA_SLACK = 1e-10


def lemma_checks(A, trials: int, rng) -> LemmaReport:
    store = as_store(A)
    m, n = store.shape
    svd = thin_svd(store)
    if svd.rank == 0:
        raise DataError("lemma_checks: zero matrix")
    sigma_min = float(svd.s[-1])
    sigma_max = float(svd.s[0])

    viol_range = viol_norm = 0
    worst_range = math.inf
    worst_norm = math.inf
    for _ in range(trials):
        u = store.matvec(rng.normal(size=n))  # u = Av lies in R(A)
        norm_u = np.linalg.norm(u)
        if norm_u > 0.0:
            lhs = np.linalg.norm(store.matvec(u, transposed=True))
            ref = sigma_min * norm_u
            margin = (lhs - ref) / ref
            worst_range = min(worst_range, margin)
            if margin < -LEMMA_SLACK:
                viol_range += 1

        u2 = rng.normal(size=m)
        atu = store.matvec(u2, transposed=True)
        norm_atu = np.linalg.norm(atu)
        if norm_atu > 0.0:
            lhs = np.linalg.norm(store.matvec(atu))
            ref = sigma_max * norm_atu
            margin = (ref - lhs) / ref
            worst_norm = min(worst_norm, margin)
            if margin < -LEMMA_SLACK:
                viol_norm += 1

    return LemmaReport(trials=trials,
                       violations_range=viol_range, violations_norm=viol_norm,
                       worst_margin_range=worst_range, worst_margin_norm=worst_norm,
                       sigma_min=sigma_min, sigma_max=sigma_max)
