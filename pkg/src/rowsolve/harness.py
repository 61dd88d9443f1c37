"""Run traces, ensemble statistics, and the multi-trial experiment runner.

File formats, all plain text:
  - trace CSV: header ``k,elapsed_ns,rse,residual,skips``; one row per
    recorded iteration; missing RSE is an empty field, never 0.
  - trace metadata: JSON sidecar at ``<path>.meta.json``.
  - ensemble CSV: header ``k,elapsed_ns_median,rse_min,rse_median,rse_max``.
  - vectors: single-column CSV, one value per line, no header.
Floats are written with repr so read-back is bit-exact; repeated runs with
the same seed therefore produce byte-identical CSVs apart from the elapsed
column.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, ParseError, UsageError

TRACE_HEADER = "k,elapsed_ns,rse,residual,skips"
ENSEMBLE_HEADER = "k,elapsed_ns_median,rse_min,rse_median,rse_max"


@dataclass
class RunTrace:
    """One solver run: metadata plus parallel per-row arrays.

    Rows appear at the trace stride plus the final iteration; k is strictly
    increasing and elapsed_ns nondecreasing. rse entries are None when no
    oracle was supplied.
    """

    metadata: dict = field(default_factory=dict)
    k: list = field(default_factory=list)
    elapsed_ns: list = field(default_factory=list)
    rse: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    skips: list = field(default_factory=list)

    @property
    def num_rows(self) -> int:
        return len(self.k)

    def append_row(self, k, elapsed_ns, rse, residual, skips) -> None:
        if self.k and k <= self.k[-1]:
            raise UsageError(f"trace rows must have increasing k, got {k} after {self.k[-1]}")
        self.k.append(int(k))
        self.elapsed_ns.append(int(elapsed_ns))
        self.rse.append(None if rse is None else float(rse))
        self.residual.append(float(residual))
        self.skips.append(int(skips))

    def final_rse(self):
        return self.rse[-1] if self.rse else None


def _fmt(value) -> str:
    return repr(float(value))


def write_trace(trace: RunTrace, path) -> None:
    """CSV plus a JSON metadata sidecar at <path>.meta.json."""
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(TRACE_HEADER + "\n")
            for i in range(trace.num_rows):
                rse = "" if trace.rse[i] is None else _fmt(trace.rse[i])
                fh.write(f"{trace.k[i]},{trace.elapsed_ns[i]},{rse},"
                         f"{_fmt(trace.residual[i])},{trace.skips[i]}\n")
        with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
            json.dump(trace.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as err:
        raise DataError(f"{path}: {err}") from err


def read_trace(path) -> RunTrace:
    trace = RunTrace()
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise DataError(f"{path}: {err}") from err
    if not lines or lines[0] != TRACE_HEADER:
        raise ParseError(f"expected header {TRACE_HEADER!r}", path, 1)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ParseError("expected 5 fields", path, lineno)
        try:
            trace.append_row(int(parts[0]), int(parts[1]),
                             None if parts[2] == "" else float(parts[2]),
                             float(parts[3]), int(parts[4]))
        except ValueError:
            raise ParseError("bad numeric field", path, lineno) from None
    meta_path = f"{path}.meta.json"
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            trace.metadata = json.load(fh)
    return trace


@dataclass
class TrialEnsemble:
    """Per-iteration order statistics of RSE across trials.

    Trials are aligned on the union grid of recorded iteration indices;
    shorter traces carry their final value forward (and their first value
    backward, though run() always records k=0).
    """

    traces: list
    k: np.ndarray
    elapsed_ns_median: np.ndarray
    rse_min: np.ndarray
    rse_median: np.ndarray
    rse_max: np.ndarray


def _sample_at(grid, ks, values):
    """values carried forward onto grid (both strictly increasing in k)."""
    idx = np.searchsorted(ks, grid, side="right") - 1
    idx = np.clip(idx, 0, len(ks) - 1)
    return values[idx]


def aggregate(traces) -> TrialEnsemble:
    if not traces:
        raise UsageError("aggregate needs at least one trace")
    strides = {t.metadata.get("trace_stride") for t in traces}
    if len(strides) > 1:
        raise UsageError(f"trace stride mismatch: {sorted(map(str, strides))}")
    for t in traces:
        if t.num_rows == 0:
            raise UsageError("cannot aggregate an empty trace")
        if any(v is None for v in t.rse):
            raise UsageError("aggregate requires traces with RSE recorded")

    grid = np.unique(np.concatenate([np.asarray(t.k) for t in traces]))
    rse_rows = np.stack([
        _sample_at(grid, np.asarray(t.k), np.asarray(t.rse, dtype=np.float64))
        for t in traces])
    elapsed_rows = np.stack([
        _sample_at(grid, np.asarray(t.k), np.asarray(t.elapsed_ns, dtype=np.float64))
        for t in traces])
    return TrialEnsemble(
        traces=list(traces),
        k=grid,
        elapsed_ns_median=np.median(elapsed_rows, axis=0),
        rse_min=np.min(rse_rows, axis=0),
        rse_median=np.median(rse_rows, axis=0),
        rse_max=np.max(rse_rows, axis=0))


def write_ensemble(ensemble: TrialEnsemble, path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(ENSEMBLE_HEADER + "\n")
            for i in range(len(ensemble.k)):
                fh.write(f"{int(ensemble.k[i])},{_fmt(ensemble.elapsed_ns_median[i])},"
                         f"{_fmt(ensemble.rse_min[i])},{_fmt(ensemble.rse_median[i])},"
                         f"{_fmt(ensemble.rse_max[i])}\n")
    except OSError as err:
        raise DataError(f"{path}: {err}") from err


def read_ensemble(path) -> dict:
    """Ensemble CSV back as a dict of numpy arrays keyed by column name."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise DataError(f"{path}: {err}") from err
    if not lines or lines[0] != ENSEMBLE_HEADER:
        raise ParseError(f"expected header {ENSEMBLE_HEADER!r}", path, 1)
    cols = ENSEMBLE_HEADER.split(",")
    data = {c: [] for c in cols}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(cols):
            raise ParseError(f"expected {len(cols)} fields", path, lineno)
        try:
            for c, p in zip(cols, parts):
                data[c].append(float(p))
        except ValueError:
            raise ParseError("bad numeric field", path, lineno) from None
    return {c: np.asarray(v) for c, v in data.items()}


# -- vectors ------------------------------------------------------------------


def write_vector(v, path) -> None:
    v = np.asarray(v, dtype=np.float64)
    try:
        with open(path, "w", encoding="ascii") as fh:
            for entry in v:
                fh.write(_fmt(entry) + "\n")
    except OSError as err:
        raise DataError(f"{path}: {err}") from err


def read_vector(path) -> np.ndarray:
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise DataError(f"{path}: {err}") from err
    values = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise ParseError(f"bad numeric value {text!r}", path, lineno) from None
    return np.asarray(values, dtype=np.float64)


def write_pgm(image, path, maxval: int = 255) -> None:
    """Plain (P2) PGM of a 2-D image, scaled so the image max maps to maxval."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise UsageError(f"expected a 2-D image, got shape {image.shape}")
    top = image.max()
    scaled = np.zeros_like(image) if top <= 0 else np.clip(image, 0.0, None) / top * maxval
    pixels = np.rint(scaled).astype(int)
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"P2\n{image.shape[1]} {image.shape[0]}\n{maxval}\n")
            for row in pixels:
                fh.write(" ".join(str(p) for p in row) + "\n")
    except OSError as err:
        raise DataError(f"{path}: {err}") from err


# -- multi-trial runner -------------------------------------------------------


def worker_count() -> int:
    """Worker cap from ROWSOLVE_THREADS (default 1)."""
    raw = os.environ.get("ROWSOLVE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"ROWSOLVE_THREADS must be an integer, got {raw!r}") from None


def run_trials(config, A, b, oracle=None, trials: int = 10,
               descriptor: dict | None = None) -> list:
    """Run `trials` independent repeats of one configuration.

    Trial t draws from the (config.seed, t) substream, so the set of trials
    is reproducible regardless of worker count. Results come back in trial
    order.
    """
    from .solvers import run  # deferred: solvers imports RunTrace from here

    if trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")

    def one(t: int) -> RunTrace:
        trace = run(replace(config, rng_stream=t), A, b, oracle=oracle)
        trace.metadata["trial"] = t
        if descriptor is not None:
            trace.metadata["instance"] = descriptor
        return trace

    workers = worker_count()
    if workers == 1:
        return [one(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(trials)))
