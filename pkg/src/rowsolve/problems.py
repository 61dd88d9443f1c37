"""Test-problem generators.

Two families: a dense low-rank UDV^T construction with controlled spectrum
and noise injected along the left null space, and a small 2-D line-integral
tomography operator (parallel-beam, Siddon traversal) with a disk phantom.
Both are deterministic given their parameters and seed.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass

import numpy as np

from .errors import DataError, UsageError
from .harness import read_vector, write_vector
from .matrix import MatrixStore, as_store, mm_read, mm_write, thin_svd
from .partition import RngStream

# generator substreams: independent draws even when one seed feeds several ops
_STREAM_MATRIX = 0
_STREAM_RHS = 1
_STREAM_TOMO_RHS = 2

_NULL_DIR_TOL = 1e-6  # residual norm below this -> basis vector is in range(U)


@dataclass
class ProblemInstance:
    """A matrix, right-hand side, and (when known) the reference solution."""

    A: MatrixStore
    b: np.ndarray
    x_star: np.ndarray | None
    b_N_norm: float
    descriptor: dict


def synthetic_udv(m: int, n: int, r: int, kappa: float, seed: int) -> MatrixStore:
    """Dense rank-r matrix with singular values uniform in [1, kappa].

    Left and right factors are thin-QR orthonormalizations of Gaussian
    matrices, so A = U diag(d) V^T has exactly the prescribed spectrum.
    """
    if m < 1 or n < 1 or r < 1 or r > min(m, n):
        raise UsageError(f"need 1 <= r <= min(m, n), got m={m} n={n} r={r}")
    if not kappa > 1.0:
        raise UsageError(f"kappa must exceed 1, got {kappa}")
    rng = RngStream(seed, _STREAM_MATRIX)
    u_raw = rng.normal(size=(m, r))
    u_basis, _ = np.linalg.qr(u_raw)
    v_raw = rng.normal(size=(n, r))
    v_basis, _ = np.linalg.qr(v_raw)
    d = 1.0 + (kappa - 1.0) * rng.uniform(size=r)
    return MatrixStore.from_dense((u_basis * d) @ v_basis.T)


def _null_direction_from_basis(u_basis: np.ndarray) -> np.ndarray:
    """First standard basis vector with a usable component outside range(U),
    Gram-Schmidted against U and normalized. Deterministic given the SVD."""
    m = u_basis.shape[0]
    for i in range(m):
        w = -u_basis @ u_basis[i, :]
        w[i] += 1.0
        norm = float(np.linalg.norm(w))
        if norm > _NULL_DIR_TOL:
            w /= norm
            w -= u_basis @ (u_basis.T @ w)  # second pass scrubs rounding
            return w / np.linalg.norm(w)
    raise DataError("left null space of the matrix is trivial")


def noisy_rhs(A, delta: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side b = A x* + delta * b_hat with unit b_hat in N(A^T).

    x* is the minimum-norm least-squares solution for a Gaussian draw, so the
    consistent part of b is exactly representable. ||b - A x*|| = delta.
    """
    if delta < 0.0:
        raise UsageError(f"delta must be >= 0, got {delta}")
    store = as_store(A)
    m, _ = store.shape
    rng = RngStream(seed, _STREAM_RHS)
    b_raw = rng.normal(size=m)
    svd = thin_svd(store)
    if svd.rank == 0:
        raise DataError("zero matrix has no usable range")
    x_star = svd.V @ ((svd.U.T @ b_raw) / svd.s)
    b = store.matvec(x_star)
    if delta > 0.0:
        if svd.rank >= m:
            raise DataError("delta > 0 requires a nontrivial left null space")
        b = b + delta * _null_direction_from_basis(svd.U)
    return b, x_star


def example1(n: int = 50, delta: float = 0.1, seed: int = 0) -> ProblemInstance:
    """The standard dense family at one size: m = 30n, r = n/2, kappa = n/10."""
    if n < 20 or n % 2:
        raise UsageError(f"n must be even and >= 20, got {n}")
    m, r, kappa = 30 * n, n // 2, n / 10.0
    A = synthetic_udv(m, n, r, kappa, seed)
    b, x_star = noisy_rhs(A, delta, seed)
    return ProblemInstance(
        A=A, b=b, x_star=x_star, b_N_norm=delta,
        descriptor={"generator": "example1",
                    "params": {"n": n, "m": m, "r": r, "kappa": kappa,
                               "delta": delta},
                    "seed": seed})


# -- tomography ---------------------------------------------------------------


def _ray_grid_span(origin, direction, N: int) -> tuple[float, float] | None:
    """Parameter interval where the ray is inside [0, N]^2, or None."""
    s_in, s_out = -np.inf, np.inf
    for o, d in zip(origin, direction):
        if abs(d) < 1e-12:
            if o <= 0.0 or o >= N:
                return None
            continue
        lo, hi = -o / d, (N - o) / d
        if lo > hi:
            lo, hi = hi, lo
        s_in = max(s_in, lo)
        s_out = min(s_out, hi)
    if not s_in < s_out - 1e-12:
        return None
    return s_in, s_out


def tomo_line_matrix(N: int, num_angles: int,
                     rays_per_angle: int) -> tuple[MatrixStore, np.ndarray]:
    """Parallel-beam line-integral matrix on an N x N pixel grid.

    Angles are uniform in [0, pi); each angle carries rays_per_angle parallel
    rays with offsets centered on the grid, spaced to hit pixel-row centers
    when the angle is axis-aligned and rays_per_angle = N. Entry (ray, pixel)
    is the intersection length (Siddon-style plane walk). Rays that miss the
    grid leave an all-zero row. The phantom is a centered disk of value 1,
    radius N/4, flattened row-major.
    """
    if N < 4:
        raise UsageError(f"grid size must be >= 4, got {N}")
    if num_angles < 1 or rays_per_angle < 1:
        raise UsageError("need at least one angle and one ray per angle")

    center = np.array([N / 2.0, N / 2.0])
    offsets = (np.arange(rays_per_angle) + 0.5) * N / rays_per_angle - N / 2.0

    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    planes = np.arange(N + 1, dtype=np.float64)
    for a in range(num_angles):
        theta = np.pi * a / num_angles
        direction = np.array([np.cos(theta), np.sin(theta)])
        normal = np.array([-direction[1], direction[0]])
        for t in offsets:
            origin = center + t * normal
            span = _ray_grid_span(origin, direction, N)
            if span is None:
                indptr.append(len(data))
                continue
            s_in, s_out = span
            crossings = [np.array([s_in, s_out])]
            for axis in range(2):
                d = direction[axis]
                if abs(d) < 1e-12:
                    continue
                s = (planes - origin[axis]) / d
                crossings.append(s[(s > s_in) & (s < s_out)])
            s_all = np.unique(np.concatenate(crossings))
            lengths = np.diff(s_all)
            mids = origin[None, :] + 0.5 * (s_all[:-1] + s_all[1:])[:, None] \
                * direction[None, :]
            keep = lengths > 1e-12
            cols_x = np.clip(np.floor(mids[keep, 0]).astype(np.int64), 0, N - 1)
            rows_y = np.clip(np.floor(mids[keep, 1]).astype(np.int64), 0, N - 1)
            pixel = rows_y * N + cols_x
            # merge segments that share a pixel (corner-degenerate rays)
            uniq, inv = np.unique(pixel, return_inverse=True)
            data.extend(np.bincount(inv, weights=lengths[keep]))
            indices.extend(uniq)
            indptr.append(len(data))

    A = MatrixStore.from_csr(
        np.asarray(data, dtype=np.float64),
        np.asarray(indices, dtype=np.int64),
        np.asarray(indptr, dtype=np.int64),
        shape=(num_angles * rays_per_angle, N * N))

    jj, ii = np.meshgrid(np.arange(N) + 0.5, np.arange(N) + 0.5)
    disk = (jj - N / 2.0) ** 2 + (ii - N / 2.0) ** 2 <= (N / 4.0) ** 2
    phantom = disk.astype(np.float64).ravel()
    return A, phantom


def tomo_noisy_rhs(A, x_star, seed: int) -> np.ndarray:
    """b = A x* + b_hat with unit b_hat in N(A^T), drawn from a seeded
    Gaussian projected off the left singular basis (noise level fixed at 1)."""
    store = as_store(A)
    m, _ = store.shape
    svd = thin_svd(store)
    if svd.rank >= m:
        raise DataError("matrix has a trivial left null space")
    rng = RngStream(seed, _STREAM_TOMO_RHS)
    g = rng.normal(size=m)
    w = g - svd.U @ (svd.U.T @ g)
    norm = float(np.linalg.norm(w))
    if norm <= 1e-8 * float(np.linalg.norm(g)):
        raise DataError("could not extract a null-space direction")
    w /= norm
    w -= svd.U @ (svd.U.T @ w)
    w /= np.linalg.norm(w)
    return store.matvec(np.asarray(x_star, dtype=np.float64)) + w


def tomo_instance(N: int = 16, num_angles: int = 24, rays_per_angle: int = 24,
                  seed: int = 0) -> ProblemInstance:
    """Tomography preset: operator, disk phantom, unit null-space noise."""
    A, phantom = tomo_line_matrix(N, num_angles, rays_per_angle)
    b = tomo_noisy_rhs(A, phantom, seed)
    return ProblemInstance(
        A=A, b=b, x_star=phantom, b_N_norm=1.0,
        descriptor={"generator": "tomo",
                    "params": {"N": N, "num_angles": num_angles,
                               "rays_per_angle": rays_per_angle},
                    "seed": seed})


# -- disk layout --------------------------------------------------------------


def save_instance(inst: ProblemInstance, outdir) -> dict:
    """Write A.mtx, b.csv, xstar.csv (when known) and instance.json."""
    outdir = pathlib.Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    mm_write(inst.A, outdir / "A.mtx")
    write_vector(inst.b, outdir / "b.csv")
    files = {"matrix": "A.mtx", "rhs": "b.csv"}
    if inst.x_star is not None:
        write_vector(inst.x_star, outdir / "xstar.csv")
        files["x_star"] = "xstar.csv"
    m, n = inst.A.shape
    doc = {"descriptor": inst.descriptor, "b_N_norm": inst.b_N_norm,
           "m": m, "n": n, "files": files}
    with open(outdir / "instance.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc


def load_instance(indir) -> ProblemInstance:
    indir = pathlib.Path(indir)
    try:
        with open(indir / "instance.json", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read instance: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed instance.json: {exc}") from exc
    files = doc.get("files", {})
    A = mm_read(indir / files.get("matrix", "A.mtx"))
    b = read_vector(indir / files.get("rhs", "b.csv"))
    x_star = None
    if "x_star" in files:
        x_star = read_vector(indir / files["x_star"])
    return ProblemInstance(A=A, b=b, x_star=x_star,
                           b_N_norm=float(doc.get("b_N_norm", 0.0)),
                           descriptor=doc.get("descriptor", {}))
