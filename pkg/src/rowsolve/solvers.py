"""Randomized multiple-row solvers and the comparison baselines.

Methods
-------
rmr               block row-action iteration for A x = b (consistent target)
rmr_homogeneous   block column-action iteration driving A^T y = 0
ermr              the extended method: one homogeneous y half-step, then one
                  row half-step against b - y; converges to the minimum-norm
                  least-squares solution on inconsistent systems
cyclic_extended   single row/column extended iteration, cyclic index rule
rek               same updates with norm-weighted random indices
gek               Gaussian sketches instead of index picks (touches every
                  row/column per iteration)
reabk             extended block iteration with a fixed relaxation step

The rmr family maintains two residual recursions between iterations,
r_hat = -A^T y and r_tilde = b - y - A x, so a step touches only one block
of A (plus one full product in matvec mode). Because the y half-step runs
first, r_tilde absorbs the y displacement before the x half-step reads it.
All block updates guard against tiny denominators: the step is skipped and
counted rather than amplified into a huge jump.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .harness import RunTrace
from .matrix import as_store, thin_svd
from .partition import (Partition, RngStream, attach_norms,
                        contiguous_partition, sample_block)
from .theory import convergence_rates

GUARD_ABS = 1e-30
_EPS = float(np.finfo(np.float64).eps)

METHODS = ("rmr", "rmr_homogeneous", "ermr", "cyclic_extended", "rek", "gek",
           "reabk")
# methods that keep the r_hat / r_tilde recursions live
RECURSIVE = ("rmr", "rmr_homogeneous", "ermr")

REABK_STEP_NUMERATOR = 1.75  # empirical relaxation: alpha = 1.75 / beta_max


@dataclass
class SolverConfig:
    method: str = "ermr"
    tau_rows: int = 1
    tau_cols: int = 1
    max_iters: int = 100_000
    rse_tol: float | None = None
    residual_tol: float | None = None
    seed: int = 0
    rng_stream: int = 0  # trial substream; harness sets this per trial
    exec_mode: str = "auto"  # cached | matvec | auto (cached when m <= 4000)
    reabk_alpha: float | None = None  # None -> 1.75 / beta_max
    consistent_mode: bool = False  # ermr only: pin y = 0, skip the y half
    recompute_every: int = 10_000
    trace_stride: int = 100

    def validate(self) -> None:
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.tau_rows < 1 or self.tau_cols < 1:
            raise UsageError("block sizes must be >= 1")
        if self.max_iters < 1:
            raise UsageError("max_iters must be >= 1")
        for name in ("rse_tol", "residual_tol"):
            val = getattr(self, name)
            if val is not None and not val > 0.0:
                raise UsageError(f"{name} must be positive, got {val}")
        if self.exec_mode not in ("auto", "cached", "matvec"):
            raise UsageError(f"exec_mode must be auto/cached/matvec, got {self.exec_mode!r}")
        if self.reabk_alpha is not None and not self.reabk_alpha > 0.0:
            raise UsageError(f"reabk_alpha must be positive, got {self.reabk_alpha}")
        if self.consistent_mode and self.method != "ermr":
            raise UsageError("consistent_mode applies to the ermr method only")
        if self.recompute_every < 1 or self.trace_stride < 1:
            raise UsageError("recompute_every and trace_stride must be >= 1")


@dataclass
class SolverState:
    """Iterates plus the residual recursions; advanced in place by one owner.

    r_hat and r_tilde are kept exact (to rounding) by the rmr/ermr family
    only; the baseline steps leave them untouched and compute residuals
    directly.
    """

    x: np.ndarray
    y: np.ndarray
    r_hat: np.ndarray  # -A^T y
    r_tilde: np.ndarray  # b - y - A x
    rng: RngStream
    k: int = 0
    skips: int = 0

    def recompute_residuals(self, A, b) -> tuple[float, float]:
        """Replace both recursions with exact values; return the drifts."""
        store = as_store(A)
        b = np.asarray(b, dtype=np.float64)
        exact_hat = -store.matvec(self.y, transposed=True)
        exact_tilde = b - self.y - store.matvec(self.x)
        drift_hat = float(np.linalg.norm(self.r_hat - exact_hat)
                          / (1.0 + np.linalg.norm(exact_hat)))
        drift_tilde = float(np.linalg.norm(self.r_tilde - exact_tilde)
                            / (1.0 + np.linalg.norm(b)))
        self.r_hat = exact_hat
        self.r_tilde = exact_tilde
        return drift_hat, drift_tilde


def init_state(A, b, rng: RngStream, x0=None, y0=None) -> SolverState:
    """State with x0 = 0 and y0 = b unless overridden."""
    store = as_store(A)
    m, n = store.shape
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (m,):
        raise UsageError(f"rhs shape {b.shape} does not match matrix {store.shape}")
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    y = b.copy() if y0 is None else np.array(y0, dtype=np.float64)
    if x.shape != (n,) or y.shape != (m,):
        raise UsageError("x0/y0 shape mismatch")
    r_hat = -store.matvec(y, transposed=True)
    r_tilde = b - y - store.matvec(x)
    return SolverState(x=x, y=y, r_hat=r_hat, r_tilde=r_tilde, rng=rng)


@dataclass
class BlockCache:
    """Execution-mode handle; cached mode materializes both Gram matrices."""

    mode: str
    a_hat: object = None  # A^T A (n x n)
    a_tilde: object = None  # A A^T (m x m)

    @classmethod
    def build(cls, A, mode: str = "auto") -> "BlockCache":
        store = as_store(A)
        if mode == "auto":
            mode = "cached" if store.shape[0] <= 4000 else "matvec"
        if mode == "matvec":
            return cls(mode="matvec")
        if mode != "cached":
            raise UsageError(f"unknown exec mode {mode!r}")
        return cls(mode="cached", a_hat=store.gram_columns(),
                   a_tilde=store.gram_rows())


def _selector(P: Partition, i: int):
    if P.slices is not None and P.slices[i] is not None:
        return P.slices[i]
    return np.asarray(P.blocks[i])


def _guarded(denom: float, numer: float) -> bool:
    return denom <= GUARD_ABS or denom <= _EPS * abs(numer)


def _y_half(state: SolverState, sel, colb, ahat_cols, rmv) -> float | None:
    """Homogeneous column half-step on block J given by sel.

    colb is A[:, J]; ahat_cols is (A^T A)[:, J] in cached mode, else None and
    rmv must map v -> A^T v. Returns the step factor, or None when guarded.
    """
    rj = np.array(state.r_hat[sel])  # copy: the in-place updates below overlap
    g1 = float(rj @ rj)
    if ahat_cols is not None:
        w = ahat_cols @ rj  # (A^T A)[:, J] r_J
        g2 = float(rj @ w[sel])
    else:
        gy = colb @ rj  # A[:, J] r_J
        g2 = float(gy @ gy)
    if _guarded(g2, g1):
        state.skips += 1
        return None
    g3 = g1 / g2
    if ahat_cols is not None:
        gy = colb @ rj
        state.r_hat -= g3 * w
    else:
        state.r_hat -= g3 * rmv(gy)
    state.y += g3 * gy
    state.r_tilde -= g3 * gy  # y moved, so b - y - A x moved the other way
    return g3


def _x_half(state: SolverState, sel, rowb, atilde_cols, mv) -> float | None:
    """Row half-step on block I given by sel.

    rowb is A[I, :]; atilde_cols is (A A^T)[:, I] in cached mode, else None
    and mv must map v -> A v.
    """
    ri = np.array(state.r_tilde[sel])
    g4 = float(ri @ ri)
    u = rowb.T @ ri  # A[I, :]^T r_I, the update direction
    if atilde_cols is not None:
        w = atilde_cols @ ri  # (A A^T)[:, I] r_I
        g5 = float(ri @ w[sel])
    else:
        g5 = float(u @ u)
    if _guarded(g5, g4):
        state.skips += 1
        return None
    g6 = g4 / g5
    if atilde_cols is not None:
        state.r_tilde -= g6 * w
    else:
        state.r_tilde -= g6 * mv(u)
    state.x += g6 * u
    return g6


def _col_pieces(store, cache, p_cols, j):
    sel = _selector(p_cols, j)
    colb = store.col_block(sel)
    if cache is not None and cache.mode == "cached":
        return sel, colb, cache.a_hat[:, sel], None
    return sel, colb, None, lambda v: store.matvec(v, transposed=True)


def _row_pieces(store, cache, p_rows, i):
    sel = _selector(p_rows, i)
    rowb = store.row_block(sel)
    if cache is not None and cache.mode == "cached":
        return sel, rowb, cache.a_tilde[:, sel], None
    return sel, rowb, None, lambda v: store.matvec(v)


def _require_attached(P: Partition, axis: str) -> None:
    if P is None or P.cumulative is None or P.axis != axis:
        raise UsageError(f"partition with attached {axis} norms required")


def rmr_step(state: SolverState, A, b, p_rows: Partition, cache=None,
             block=None) -> SolverState:
    """One row-block step: project x onto the sampled block's residual.

    b enters through state.r_tilde (= b - A x when y = 0); the argument is
    part of the signature for symmetry with the extended steps.
    """
    _require_attached(p_rows, "rows")
    store = as_store(A)
    i = sample_block(p_rows, state.rng) if block is None else int(block)
    sel, rowb, atilde_cols, mv = _row_pieces(store, cache, p_rows, i)
    _x_half(state, sel, rowb, atilde_cols, mv)
    state.k += 1
    return state


def rmr_homogeneous_step(state: SolverState, A, p_cols: Partition, cache=None,
                         block=None) -> SolverState:
    """One column-block step of the homogeneous iteration toward A^T y = 0."""
    _require_attached(p_cols, "cols")
    store = as_store(A)
    j = sample_block(p_cols, state.rng) if block is None else int(block)
    sel, colb, ahat_cols, rmv = _col_pieces(store, cache, p_cols, j)
    _y_half(state, sel, colb, ahat_cols, rmv)
    state.k += 1
    return state


def ermr_step(state: SolverState, A, b, p_rows: Partition, p_cols: Partition,
              cache=None, consistent_mode: bool = False, col_block=None,
              row_block=None) -> SolverState:
    """One extended step: column half (updates y), then row half (updates x).

    The row half reads r_tilde after the column half subtracted the y
    displacement, i.e. it sees b - y_new - A x as required. With
    consistent_mode the y iterate is pinned at 0 and the step reduces to
    rmr_step exactly (same draws, same arithmetic).
    """
    if consistent_mode:
        return rmr_step(state, A, b, p_rows, cache=cache, block=row_block)
    _require_attached(p_cols, "cols")
    _require_attached(p_rows, "rows")
    store = as_store(A)
    j = sample_block(p_cols, state.rng) if col_block is None else int(col_block)
    sel, colb, ahat_cols, rmv = _col_pieces(store, cache, p_cols, j)
    _y_half(state, sel, colb, ahat_cols, rmv)
    i = sample_block(p_rows, state.rng) if row_block is None else int(row_block)
    sel, rowb, atilde_cols, mv = _row_pieces(store, cache, p_rows, i)
    _x_half(state, sel, rowb, atilde_cols, mv)
    state.k += 1
    return state


def adaptive_step_sizes(state: SolverState, A, p_rows: Partition,
                        p_cols: Partition, row_block: int,
                        col_block: int) -> tuple[float, float]:
    """Step sizes of the averaged-block view of the two half-steps.

    alpha_hat scales the y half written as y + alpha_hat * A[:,J] r_J /
    ||A[:,J]||_F^2, and alpha_tilde likewise for the x half; both equal the
    projection factors the half-steps use, which the tests verify to 1e-12.
    """
    _require_attached(p_rows, "rows")
    _require_attached(p_cols, "cols")
    store = as_store(A)

    selj = _selector(p_cols, col_block)
    rj = np.array(state.r_hat[selj])
    g1 = float(rj @ rj)
    gy = store.col_block(selj) @ rj
    g2 = float(gy @ gy)
    if _guarded(g2, g1):
        raise UsageError("adaptive_step_sizes: column denominator below guard")
    alpha_hat = g1 * float(p_cols.block_norms_sq[col_block]) / g2

    seli = _selector(p_rows, row_block)
    ri = np.array(state.r_tilde[seli])
    g4 = float(ri @ ri)
    u = store.row_block(seli).T @ ri
    g5 = float(u @ u)
    if _guarded(g5, g4):
        raise UsageError("adaptive_step_sizes: row denominator below guard")
    alpha_tilde = g4 * float(p_rows.block_norms_sq[row_block]) / g5
    return alpha_hat, alpha_tilde


def rek_step(state: SolverState, A, b, index_rule: str = "weighted",
             p_rows: Partition | None = None,
             p_cols: Partition | None = None) -> SolverState:
    """Single row + single column extended step, as printed: both sub-updates
    read the pre-step state (the x update uses y^(k)).

    index_rule "cyclic" walks i through the rows and j through the columns in
    natural order, both advancing every step; zero-norm picks are skipped and
    counted. "weighted" samples i and j by squared norm (zero norms are then
    never drawn). Partitions must be single-index (tau = 1); they are built
    on the fly when omitted.
    """
    if index_rule not in ("cyclic", "weighted"):
        raise UsageError(f"index_rule must be cyclic or weighted, got {index_rule!r}")
    store = as_store(A)
    m, n = store.shape
    b = np.asarray(b, dtype=np.float64)
    if p_rows is None:
        p_rows = attach_norms(contiguous_partition(m, 1), store, "rows")
    if p_cols is None:
        p_cols = attach_norms(contiguous_partition(n, 1), store, "cols")
    if p_rows.num_blocks != m or p_cols.num_blocks != n:
        raise UsageError("rek_step requires single-index (tau = 1) partitions")
    _require_attached(p_rows, "rows")
    _require_attached(p_cols, "cols")

    if index_rule == "cyclic":
        i = state.k % m
        j = state.k % n
    else:
        i = sample_block(p_rows, state.rng)
        j = sample_block(p_cols, state.rng)

    row_sq = float(p_rows.block_norms_sq[i])
    col_sq = float(p_cols.block_norms_sq[j])

    delta_x = None
    if row_sq > 0.0:
        a_row = _dense_row(store, i)
        val = (b[i] - state.y[i] - float(a_row @ state.x)) / row_sq
        delta_x = val * a_row
    else:
        state.skips += 1

    delta_y = None
    if col_sq > 0.0:
        a_col = _dense_col(store, j)
        cval = float(a_col @ state.y) / col_sq
        delta_y = cval * a_col
    else:
        state.skips += 1

    if delta_x is not None:
        state.x += delta_x
    if delta_y is not None:
        state.y -= delta_y
    state.k += 1
    return state


def _dense_row(store, i: int) -> np.ndarray:
    blk = store.row_block(slice(i, i + 1))
    if hasattr(blk, "toarray"):
        blk = blk.toarray()
    return np.asarray(blk).ravel()


def _dense_col(store, j: int) -> np.ndarray:
    blk = store.col_block(slice(j, j + 1))
    if hasattr(blk, "toarray"):
        blk = blk.toarray()
    return np.asarray(blk).ravel()


def gek_step(state: SolverState, A, b, rng: RngStream | None = None) -> SolverState:
    """Gaussian-sketch extended step: y moves along A zeta, x along A^T eta.

    The x sub-update uses the freshly updated y. Both Gaussian vectors are
    drawn even when a guard skips the corresponding sub-update, keeping the
    draw sequence independent of the data.
    """
    store = as_store(A)
    m, n = store.shape
    b = np.asarray(b, dtype=np.float64)
    rng = state.rng if rng is None else rng
    zeta = rng.normal(size=n)
    eta = rng.normal(size=m)

    az = store.matvec(zeta)
    den_y = float(az @ az)
    num_y = float(zeta @ store.matvec(state.y, transposed=True))
    if _guarded(den_y, num_y):
        state.skips += 1
    else:
        state.y -= (num_y / den_y) * az

    at_eta = store.matvec(eta, transposed=True)
    den_x = float(at_eta @ at_eta)
    residual = b - state.y - store.matvec(state.x)
    num_x = float(eta @ residual)
    if _guarded(den_x, num_x):
        state.skips += 1
    else:
        state.x += (num_x / den_x) * at_eta
    state.k += 1
    return state


def reabk_step(state: SolverState, A, b, p_rows: Partition, p_cols: Partition,
               alpha: float) -> SolverState:
    """Relaxed extended block step with fixed step size alpha.

    Both sub-updates read the pre-step state (the x update sees y^(k)), as
    the scheme is printed.
    """
    if not alpha > 0.0:
        raise UsageError(f"alpha must be positive, got {alpha}")
    _require_attached(p_rows, "rows")
    _require_attached(p_cols, "cols")
    store = as_store(A)
    b = np.asarray(b, dtype=np.float64)

    j = sample_block(p_cols, state.rng)
    i = sample_block(p_rows, state.rng)

    selj = _selector(p_cols, j)
    colb = store.col_block(selj)
    w = colb.T @ state.y
    delta_y = (alpha / float(p_cols.block_norms_sq[j])) * (colb @ w)

    seli = _selector(p_rows, i)
    rowb = store.row_block(seli)
    r_i = b[seli] - state.y[seli] - rowb @ state.x  # pre-step y
    delta_x = (alpha / float(p_rows.block_norms_sq[i])) * (rowb.T @ r_i)

    state.y -= delta_y
    state.x += delta_x
    state.k += 1
    return state


def reabk_auto_alpha(A, p_rows: Partition, p_cols: Partition) -> float:
    """Empirical default relaxation 1.75 / max(beta_max_rows, beta_max_cols)."""
    report = convergence_rates(A, p_rows, p_cols)
    return REABK_STEP_NUMERATOR / max(report.beta_max_rows, report.beta_max_cols)


# -- outer loop ---------------------------------------------------------------


def _subspace_warnings(store, b, x0, y0) -> None:
    """Custom starts outside the theory's subspaces get a warning, not an error."""
    svd = thin_svd(store)
    if x0 is not None:
        x0 = np.asarray(x0, dtype=np.float64)
        dist = np.linalg.norm(x0 - svd.V @ (svd.V.T @ x0))
        if dist > 1e-8 * max(1.0, np.linalg.norm(x0)):
            warnings.warn("x0 is not in the row space of A; the minimum-norm "
                          "guarantee does not apply")
    if y0 is not None:
        y0 = np.asarray(y0, dtype=np.float64)
        shift = y0 - b
        dist = np.linalg.norm(shift - svd.U @ (svd.U.T @ shift))
        if dist > 1e-8 * max(1.0, np.linalg.norm(shift)):
            warnings.warn("y0 - b is not in the column space of A; convergence "
                          "of y to the null-space component is not guaranteed")


def run(config: SolverConfig, A, b, oracle=None, x0=None, y0=None) -> RunTrace:
    """Drive one method until a stopping rule fires; return the trace.

    oracle is the reference vector for the RSE column: the least-squares
    solution for the x-methods, or the null-space component b_N when the
    method is rmr_homogeneous (its iterate is y). rse_tol requires it.
    Rows are recorded at k = 0, every trace_stride iterations, and at the
    final iterate. Timing covers the step loop only.
    """
    config.validate()
    store = as_store(A)
    m, n = store.shape
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (m,):
        raise UsageError(f"rhs shape {b.shape} does not match matrix {store.shape}")
    method = config.method
    if config.rse_tol is not None and oracle is None:
        raise UsageError("rse_tol requires an oracle vector")

    single_index = method in ("rek", "cyclic_extended")
    tau_rows = 1 if single_index else config.tau_rows
    tau_cols = 1 if single_index else config.tau_cols

    p_rows = p_cols = None
    if method != "rmr_homogeneous" and method != "gek":
        p_rows = attach_norms(contiguous_partition(m, tau_rows), store, "rows")
    if method not in ("rmr", "gek"):
        p_cols = attach_norms(contiguous_partition(n, tau_cols), store, "cols")

    recursive = method in RECURSIVE
    resolved_mode = None
    cache = None
    if recursive:
        cache = BlockCache.build(store, config.exec_mode)
        resolved_mode = cache.mode
        if cache.mode == "matvec":
            cache = None

    alpha = None
    if method == "reabk":
        alpha = config.reabk_alpha
        if alpha is None:
            alpha = reabk_auto_alpha(store, p_rows, p_cols)

    # y is pinned at zero when the method never iterates it
    pin_y = method == "rmr" or (method == "ermr" and config.consistent_mode)
    if pin_y and y0 is not None:
        raise UsageError("custom y0 is meaningless when the method pins y at zero")
    if x0 is not None or y0 is not None:
        _subspace_warnings(store, b, x0, y0)
    rng = RngStream(config.seed, config.rng_stream)
    state = init_state(store, b, rng, x0=x0,
                       y0=np.zeros(m) if pin_y else y0)

    # oracle bookkeeping: rmr_homogeneous measures its y iterate
    target_is_y = method == "rmr_homogeneous"
    oracle_vec = None
    oracle_scale = 1.0
    oracle_absolute = False
    if oracle is not None:
        oracle_vec = np.asarray(oracle, dtype=np.float64)
        expect = m if target_is_y else n
        if oracle_vec.shape != (expect,):
            raise UsageError(f"oracle shape {oracle_vec.shape}, expected ({expect},)")
        oracle_scale = float(np.linalg.norm(oracle_vec))
        # a numerically-zero oracle cannot serve as a relative scale;
        # fall back to absolute error (the norm of a computed null
        # component is never exactly zero)
        if oracle_scale <= 1e-12 * (1.0 + float(np.linalg.norm(b))):
            oracle_absolute = True
            oracle_scale = 1.0

    mv = lambda v: store.matvec(v)

    def current_rse():
        if oracle_vec is None:
            return None
        vec = state.y if target_is_y else state.x
        return float(np.linalg.norm(vec - oracle_vec)) / oracle_scale

    def current_residual():
        if method == "rmr_homogeneous":
            return float(np.linalg.norm(state.r_hat))  # = ||A^T y||
        if recursive:
            return float(np.linalg.norm(state.r_tilde))
        return float(np.linalg.norm(b - state.y - mv(state.x)))

    # one step closure per method keeps the loop body tight
    if method == "rmr" or (method == "ermr" and config.consistent_mode):
        def do_step():
            rmr_step(state, store, b, p_rows, cache=cache)
    elif method == "rmr_homogeneous":
        def do_step():
            rmr_homogeneous_step(state, store, p_cols, cache=cache)
    elif method == "ermr":
        def do_step():
            ermr_step(state, store, b, p_rows, p_cols, cache=cache)
    elif method in ("rek", "cyclic_extended"):
        rule = "cyclic" if method == "cyclic_extended" else "weighted"
        def do_step():
            rek_step(state, store, b, index_rule=rule, p_rows=p_rows, p_cols=p_cols)
    elif method == "gek":
        def do_step():
            gek_step(state, store, b)
    else:  # reabk
        def do_step():
            reabk_step(state, store, b, p_rows, p_cols, alpha)

    trace = RunTrace()
    drift_hat_max = 0.0
    drift_tilde_max = 0.0
    stopped_by = "max_iters"
    stride = config.trace_stride

    t0 = time.perf_counter_ns()

    def record():
        trace.append_row(state.k, time.perf_counter_ns() - t0, current_rse(),
                         current_residual(), state.skips)

    record()  # k = 0
    for it in range(1, config.max_iters + 1):
        do_step()
        if config.rse_tol is not None and current_rse() <= config.rse_tol:
            stopped_by = "rse_tol"
        elif config.residual_tol is not None \
                and current_residual() <= config.residual_tol:
            stopped_by = "residual_tol"
        if recursive and it % config.recompute_every == 0:
            dh, dt = state.recompute_residuals(store, b)
            drift_hat_max = max(drift_hat_max, dh)
            drift_tilde_max = max(drift_tilde_max, dt)
        if stopped_by != "max_iters":
            break
        if it % stride == 0:
            record()
    if trace.k[-1] != state.k:
        record()  # final row

    trace.metadata = {
        "method": method,
        "m": m, "n": n,
        "seed": config.seed,
        "rng_stream": config.rng_stream,
        "tau_rows": tau_rows, "tau_cols": tau_cols,
        "max_iters": config.max_iters,
        "rse_tol": config.rse_tol,
        "residual_tol": config.residual_tol,
        "exec_mode": resolved_mode,
        "consistent_mode": config.consistent_mode,
        "reabk_alpha": alpha,
        "trace_stride": stride,
        "recompute_every": config.recompute_every,
        "stopped_by": stopped_by,
        "iterations": state.k,
        "skips": state.skips,
        "oracle_absolute": oracle_absolute if oracle_vec is not None else None,
        "drift_r_hat_max": drift_hat_max,
        "drift_r_tilde_max": drift_tilde_max,
    }
    return trace
