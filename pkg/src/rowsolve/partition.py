"""Index partitions, weighted block sampling, and seeded RNG streams."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, UsageError
from .matrix import as_store


class RngStream:
    """Counter-based generator with per-trial substreams keyed by (seed, stream).

    Philox is counter-based, so every (seed, stream) pair yields an
    independent, reproducible sequence; trial t of an experiment uses
    RngStream(seed, stream=t).
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def spawn(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        if size is None:
            return float(self._gen.uniform(low, high))
        return self._gen.uniform(low, high, size=size)

    def normal(self, size=None):
        return self._gen.normal(size=size)

    def integers(self, low, high=None):
        return int(self._gen.integers(low, high))


@dataclass(frozen=True)
class Partition:
    """Disjoint index blocks covering range(universe_size), 0-based.

    After attach_norms the partition also carries per-block squared
    Frobenius norms plus the cumulative weight table used for sampling;
    blocks with zero norm are excluded from the sampling support. Frozen:
    attach returns a new object, so a partition can be shared across
    threads once built.
    """

    universe_size: int
    blocks: tuple
    slices: tuple = None  # per-block slice when contiguous, else None entries
    axis: str = None  # "rows" | "cols", set by attach_norms
    block_norms_sq: np.ndarray = None
    cumulative: np.ndarray = None  # prefix sums over sampleable blocks only
    sampleable: np.ndarray = None  # block ids with positive weight

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def validate(self) -> None:
        concat = np.concatenate([np.asarray(b) for b in self.blocks])
        if len(concat) != self.universe_size or not np.array_equal(
                np.sort(concat), np.arange(self.universe_size)):
            raise UsageError("blocks must partition range(universe_size)")
        if any(len(b) == 0 for b in self.blocks):
            raise UsageError("empty block")


def contiguous_partition(universe_size: int, tau: int) -> Partition:
    """Split range(universe_size) into ceil(universe/tau) runs of tau indices.

    The final block holds whatever remains (1..tau indices), mirroring the
    usual row-block convention. tau >= universe gives a single block.
    """
    if universe_size < 1:
        raise UsageError(f"universe_size must be >= 1, got {universe_size}")
    if tau < 1 or tau > universe_size:
        raise UsageError(f"need 1 <= tau <= {universe_size}, got {tau}")
    blocks = []
    slices = []
    start = 0
    while start < universe_size:
        stop = min(start + tau, universe_size)
        blocks.append(np.arange(start, stop, dtype=np.int64))
        slices.append(slice(start, stop))
        start = stop
    return Partition(universe_size=universe_size, blocks=tuple(blocks),
                     slices=tuple(slices))


def attach_norms(P: Partition, A, axis: str) -> Partition:
    """Return a copy of P carrying block norms and the sampling table.

    axis "rows" weighs block i by ||A[block,:]||_F^2, axis "cols" by
    ||A[:,block]||_F^2. An all-zero matrix cannot be sampled from.
    """
    if axis not in ("rows", "cols"):
        raise UsageError(f"axis must be 'rows' or 'cols', got {axis!r}")
    store = as_store(A)
    n_expect = store.shape[0] if axis == "rows" else store.shape[1]
    if P.universe_size != n_expect:
        raise UsageError(
            f"partition over {P.universe_size} indices does not match "
            f"matrix {axis} count {n_expect}")
    per_index = store.row_norms_sq() if axis == "rows" else store.col_norms_sq()
    norms = np.array([float(np.sum(per_index[np.asarray(b)])) for b in P.blocks])
    sampleable = np.flatnonzero(norms > 0.0)
    cumulative = np.cumsum(norms[sampleable])
    return replace(P, axis=axis, block_norms_sq=norms,
                   cumulative=cumulative, sampleable=sampleable)


def sample_block(P: Partition, rng: RngStream) -> int:
    """Draw a block id with probability proportional to its squared norm.

    Inversion sampling: one uniform in [0, total) followed by binary search
    on the cumulative table. Zero-weight blocks are never returned.
    """
    if P.cumulative is None:
        raise UsageError("sample_block requires attach_norms first")
    if len(P.sampleable) == 0:
        raise DataError("all blocks have zero norm; the matrix is zero")
    total = P.cumulative[-1]
    u = rng.uniform(0.0, total)
    pos = int(np.searchsorted(P.cumulative, u, side="right"))
    pos = min(pos, len(P.sampleable) - 1)  # u == total cannot occur, belt and braces
    return int(P.sampleable[pos])
