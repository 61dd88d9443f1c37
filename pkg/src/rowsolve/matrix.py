"""Matrix storage and the small set of kernels the solvers are built on.

A MatrixStore wraps either a dense (column-major) array or a CSR sparse
matrix and exposes exactly what the row-action methods need: matvec with
either orientation, squared Frobenius norms, and row/column block
extraction. Reductions delegate to numpy/scipy, which keep a fixed
evaluation order for identical inputs, so repeated runs with the same seed
reproduce traces byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError, ParseError, UsageError

_EPS = float(np.finfo(np.float64).eps)


class MatrixStore:
    """Dense or CSR real matrix with block access.

    Use the ``from_dense`` / ``from_csr`` constructors; the raw constructor
    is internal. Indices are 0-based everywhere in memory (Matrix Market
    files are 1-based on disk only).
    """

    def __init__(self, dense=None, csr=None):
        if (dense is None) == (csr is None):
            raise UsageError("exactly one of dense/csr must be given")
        if dense is not None:
            self.layout = "dense"
            self._dense = dense  # (m, n) fortran order
            self._csr = None
            self.shape = dense.shape
        else:
            self.layout = "csr"
            self._dense = None
            self._csr = csr
            self.shape = csr.shape
        self._csc = None  # lazy companion for column slicing

    @classmethod
    def from_dense(cls, arr) -> "MatrixStore":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"expected a 2-d matrix, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise DataError("matrix contains non-finite entries")
        return cls(dense=np.asfortranarray(arr))

    @classmethod
    def from_csr(cls, data, indices, indptr, shape) -> "MatrixStore":
        """Build from raw CSR triplets, validating the structure."""
        m, n = shape
        data = np.asarray(data, dtype=np.float64)
        indices = np.asarray(indices, dtype=np.int64)
        indptr = np.asarray(indptr, dtype=np.int64)
        if m < 1 or n < 1:
            raise DataError(f"invalid shape {shape}")
        if indptr.shape != (m + 1,) or indptr[0] != 0 or indptr[-1] != len(data):
            raise DataError("CSR indptr does not match data length")
        if np.any(np.diff(indptr) < 0):
            raise DataError("CSR indptr must be non-decreasing")
        if len(indices) != len(data):
            raise DataError("CSR indices/data length mismatch")
        if len(indices) and (indices.min() < 0 or indices.max() >= n):
            raise DataError("CSR column index out of range")
        for i in range(m):  # strictly increasing inside each row: sorted, no duplicates
            row = indices[indptr[i]:indptr[i + 1]]
            if row.size > 1 and np.any(np.diff(row) <= 0):
                raise DataError(f"CSR row {i} has unsorted or duplicate column indices")
        if not np.isfinite(data).all():
            raise DataError("matrix contains non-finite entries")
        csr = sp.csr_matrix((data, indices, indptr), shape=(m, n))
        return cls(csr=csr)

    @classmethod
    def from_scipy(cls, mat) -> "MatrixStore":
        mat = mat.tocsr()
        mat.sort_indices()
        mat.sum_duplicates()
        return cls.from_csr(mat.data, mat.indices, mat.indptr, mat.shape)

    # -- accessors ---------------------------------------------------------

    def toarray(self) -> np.ndarray:
        if self.layout == "dense":
            return np.array(self._dense)
        return self._csr.toarray()

    def scipy_csr(self) -> sp.csr_matrix:
        if self.layout == "csr":
            return self._csr
        return sp.csr_matrix(self._dense)

    def _companion_csc(self):
        if self._csc is None:
            self._csc = self._csr.tocsc()
        return self._csc

    @property
    def nnz(self) -> int:
        if self.layout == "dense":
            return int(np.count_nonzero(self._dense))
        return int(self._csr.nnz)

    # -- kernels -----------------------------------------------------------

    def matvec(self, v, transposed: bool = False) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        expect = self.shape[0] if transposed else self.shape[1]
        if v.shape != (expect,):
            raise UsageError(f"matvec: vector shape {v.shape}, expected ({expect},)")
        if self.layout == "dense":
            return self._dense.T @ v if transposed else self._dense @ v
        if transposed:
            return self._companion_csc().T @ v
        return self._csr @ v

    def frobenius_norm_sq(self) -> float:
        if self.layout == "dense":
            return float(np.sum(self._dense * self._dense))
        return float(np.sum(self._csr.data * self._csr.data))

    def row_norms_sq(self) -> np.ndarray:
        if self.layout == "dense":
            return np.sum(self._dense * self._dense, axis=1)
        sq = self._csr.copy()
        sq.data = sq.data * sq.data
        return np.asarray(sq.sum(axis=1)).ravel()

    def col_norms_sq(self) -> np.ndarray:
        if self.layout == "dense":
            return np.sum(self._dense * self._dense, axis=0)
        sq = self._csr.copy()
        sq.data = sq.data * sq.data
        return np.asarray(sq.sum(axis=0)).ravel()

    def row_block(self, rows):
        """Submatrix A[rows, :]; dense stays a view for slice arguments."""
        if self.layout == "dense":
            return self._dense[rows, :]
        return self._csr[rows, :]

    def col_block(self, cols):
        if self.layout == "dense":
            return self._dense[:, cols]
        return self._companion_csc()[:, cols]

    def gram_columns(self):
        """A^T A, densified when small enough to pay off."""
        if self.layout == "dense":
            return self._dense.T @ self._dense
        g = (self._csr.T @ self._csr).tocsc()
        return g.toarray() if self.shape[1] <= 4000 else g

    def gram_rows(self):
        """A A^T."""
        if self.layout == "dense":
            return self._dense @ self._dense.T
        g = (self._csr @ self._csr.T).tocsr()
        return g.toarray() if self.shape[0] <= 4000 else g


def as_store(A) -> MatrixStore:
    if isinstance(A, MatrixStore):
        return A
    if sp.issparse(A):
        return MatrixStore.from_scipy(A)
    return MatrixStore.from_dense(A)


def matvec(A, v, transposed: bool = False) -> np.ndarray:
    return as_store(A).matvec(v, transposed=transposed)


def frobenius_norm_sq(A) -> float:
    return as_store(A).frobenius_norm_sq()


# -- thin SVD ---------------------------------------------------------------


@dataclass
class SvdFactor:
    """Thin SVD A = U diag(s) V^T with only the retained singular triplets.

    U is (m, r), s is (r,) in non-increasing order, V is (n, r).
    """

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.s.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.s) @ self.V.T


def thin_svd(A, rank_tol: float | None = None) -> SvdFactor:
    """Thin SVD with small singular values dropped.

    Singular values below ``rank_tol * s_max`` are treated as zero;
    the default rank_tol is max(m, n) * machine epsilon.
    """
    store = as_store(A)
    arr = store.toarray() if store.layout == "csr" else store._dense
    if not np.isfinite(arr).all():
        raise DataError("thin_svd: matrix contains non-finite entries")
    m, n = arr.shape
    U, s, Vt = np.linalg.svd(arr, full_matrices=False)
    if rank_tol is None:
        rank_tol = max(m, n) * _EPS
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.sum(s >= rank_tol * s[0]))
    return SvdFactor(U=U[:, :r].copy(), s=s[:r].copy(), V=Vt[:r, :].T.copy())


# -- Matrix Market I/O --------------------------------------------------------
#
# Hand-rolled on purpose: the reader must reject duplicate coordinate entries
# and report line numbers, which scipy.io.mmread does not do (it sums dupes).

_MM_BANNER = "%%matrixmarket"


def _parse_float(tok: str, path, lineno: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(f"bad numeric value {tok!r}", path, lineno) from None
    if not np.isfinite(val):
        raise ParseError(f"non-finite value {tok!r}", path, lineno)
    return val


def mm_read(path) -> MatrixStore:
    """Read a Matrix Market file (coordinate or array, real general)."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", path, 1)
    header = lines[0].strip().lower().split()
    if len(header) != 5 or header[0] != _MM_BANNER or header[1] != "matrix":
        raise ParseError("malformed MatrixMarket header", path, 1)
    fmt, field, symmetry = header[2], header[3], header[4]
    if fmt not in ("coordinate", "array"):
        raise ParseError(f"unsupported format {fmt!r}", path, 1)
    if field != "real" or symmetry != "general":
        raise ParseError(f"only 'real general' matrices are supported", path, 1)

    # skip comments, locate the size line
    idx = 1
    while idx < len(lines) and (lines[idx].startswith("%") or not lines[idx].strip()):
        idx += 1
    if idx >= len(lines):
        raise ParseError("missing size line", path, len(lines))
    size_tokens = lines[idx].split()
    size_line = idx + 1  # 1-based for messages

    if fmt == "coordinate":
        if len(size_tokens) != 3:
            raise ParseError("coordinate size line must be 'm n nnz'", path, size_line)
        try:
            m, n, nnz = (int(t) for t in size_tokens)
        except ValueError:
            raise ParseError("bad size line", path, size_line) from None
        if m < 1 or n < 1 or nnz < 0:
            raise ParseError("invalid dimensions", path, size_line)
        seen: dict[tuple[int, int], int] = {}
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        count = 0
        for off, raw in enumerate(lines[idx + 1:]):
            lineno = size_line + 1 + off
            text = raw.strip()
            if not text or text.startswith("%"):
                continue
            toks = text.split()
            if len(toks) != 3:
                raise ParseError("entry line must be 'i j value'", path, lineno)
            try:
                i, j = int(toks[0]), int(toks[1])
            except ValueError:
                raise ParseError("bad entry indices", path, lineno) from None
            if not (1 <= i <= m) or not (1 <= j <= n):
                raise ParseError(f"index ({i}, {j}) out of range for {m}x{n}", path, lineno)
            if count >= nnz:
                raise ParseError(f"more than {nnz} entries", path, lineno)
            key = (i, j)
            if key in seen:
                raise ParseError(
                    f"duplicate entry ({i}, {j}), first seen on line {seen[key]}",
                    path, lineno)
            seen[key] = lineno
            rows[count] = i - 1
            cols[count] = j - 1
            vals[count] = _parse_float(toks[2], path, lineno)
            count += 1
        if count != nnz:
            raise ParseError(f"expected {nnz} entries, found {count}", path, len(lines))
        order = np.lexsort((cols[:count], rows[:count]))
        coo = sp.coo_matrix((vals[order], (rows[order], cols[order])), shape=(m, n))
        csr = coo.tocsr()
        csr.sort_indices()
        return MatrixStore.from_csr(csr.data, csr.indices, csr.indptr, (m, n))

    # array format: dense, values in column-major order
    if len(size_tokens) != 2:
        raise ParseError("array size line must be 'm n'", path, size_line)
    try:
        m, n = (int(t) for t in size_tokens)
    except ValueError:
        raise ParseError("bad size line", path, size_line) from None
    if m < 1 or n < 1:
        raise ParseError("invalid dimensions", path, size_line)
    vals = np.empty(m * n, dtype=np.float64)
    count = 0
    for off, raw in enumerate(lines[idx + 1:]):
        lineno = size_line + 1 + off
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        if count >= m * n:
            raise ParseError(f"more than {m * n} values", path, lineno)
        vals[count] = _parse_float(text, path, lineno)
        count += 1
    if count != m * n:
        raise ParseError(f"expected {m * n} values, found {count}", path, len(lines))
    dense = vals.reshape((m, n), order="F")
    return MatrixStore.from_dense(dense)


def mm_write(A, path) -> None:
    """Write a MatrixStore; CSR goes to coordinate format, dense to array.

    Values are written with repr so a read-back is bit-exact.
    """
    store = as_store(A)
    m, n = store.shape
    with open(path, "w", encoding="ascii") as fh:
        if store.layout == "csr":
            csr = store.scipy_csr()
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write(f"{m} {n} {csr.nnz}\n")
            indptr, indices, data = csr.indptr, csr.indices, csr.data
            for i in range(m):
                for p in range(indptr[i], indptr[i + 1]):
                    fh.write(f"{i + 1} {indices[p] + 1} {float(data[p])!r}\n")
        else:
            fh.write("%%MatrixMarket matrix array real general\n")
            fh.write(f"{m} {n}\n")
            arr = store._dense
            for j in range(n):
                for i in range(m):
                    fh.write(f"{float(arr[i, j])!r}\n")
