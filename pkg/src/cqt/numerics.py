"""Dense complex linear algebra used by every other module.

Vectors are 1-D complex arrays, bases are 2-D arrays whose *columns* are the
basis vectors, operators are square 2-D complex arrays.  Nothing here keeps
state; all functions return fresh arrays.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian

TOL_RANK = 1e-9
TOL_HERM = 1e-9
TOL_NORM = 1e-9
TOL_GRAM = 1e-10
TOL_EIG = 1e-9
TOL_UNITARY = 1e-9


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Coerce ``data`` to a finite 2-D complex array."""
    m = np.array(data, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_square(data, name: str = "matrix") -> np.ndarray:
    m = as_matrix(data, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    return m


def as_ket(data, name: str = "ket") -> np.ndarray:
    v = np.array(data, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"{name} must be a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def normalize(v) -> np.ndarray:
    v = as_ket(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def max_abs(m) -> float:
    """Max-norm ``‖m‖_max``; 0.0 for empty input."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermiticity_residual(m: np.ndarray) -> float:
    return max_abs(m - dagger(m))


def is_hermitian(m, tol: float = TOL_HERM) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and hermiticity_residual(m) <= tol


def require_hermitian(m, tol: float = TOL_HERM, name: str = "matrix") -> np.ndarray:
    m = as_square(m, name)
    r = hermiticity_residual(m)
    if r > tol:
        raise NotHermitian(f"{name} is not Hermitian (‖M − M†‖_max = {r:.3e} > {tol:.1e})")
    return m


def fix_phase(v: np.ndarray, tol: float = TOL_RANK) -> np.ndarray:
    """Rotate ``v`` so that its first non-negligible component is positive real."""
    scale = max(float(np.max(np.abs(v))), 1.0) if v.size else 1.0
    for c in v:
        if abs(c) > tol * scale:
            return v * (abs(c) / c)
    return v


def _stack_columns(vectors: Iterable, dim: int | None) -> np.ndarray:
    cols = [as_ket(v, "vector") for v in vectors]
    if not cols:
        return np.zeros((dim or 0, 0), dtype=complex)
    d = cols[0].size
    for v in cols:
        if v.size != d:
            raise DimensionMismatch(f"vectors of dimension {d} and {v.size} mixed")
    if dim is not None and d != dim:
        raise DimensionMismatch(f"expected vectors of dimension {dim}, got {d}")
    return np.stack(cols, axis=1)


def matrix_rank(m: np.ndarray, tol: float = TOL_RANK) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def orthonormal_basis(
    vectors: Sequence | np.ndarray, tol: float = TOL_RANK, dim: int | None = None
) -> np.ndarray:
    """Orthonormal basis for the span of ``vectors``.

    Parameters
    ----------
    vectors : sequence of 1-D arrays, or a 2-D array whose columns are vectors
    tol : float
        Relative rank cutoff: a direction counts when its singular value
        exceeds ``tol * sigma_max``.
    dim : int, optional
        Ambient dimension; only needed to shape the result for empty input.

    Returns
    -------
    basis : ndarray, shape (dim, rank)
        Columns are orthonormal.  Built by modified Gram-Schmidt in input
        order, each column phase-fixed so its first nonzero entry is
        positive real, so the result is reproducible for a given input.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        a = np.array(vectors, dtype=complex)
        if dim is not None and a.shape[0] != dim:
            raise DimensionMismatch(f"expected vectors of dimension {dim}, got {a.shape[0]}")
    else:
        a = _stack_columns(vectors, dim)
    d = a.shape[0]
    if a.shape[1] == 0:
        return np.zeros((d, 0), dtype=complex)
    s = np.linalg.svd(a, compute_uv=False)
    smax = s[0]
    if smax == 0:
        return np.zeros((d, 0), dtype=complex)
    rank = int(np.sum(s > tol * smax))
    cutoff = tol * smax

    out: list[np.ndarray] = []
    for k in range(a.shape[1]):
        w = a[:, k].copy()
        # two passes of MGS keep the result orthogonal to ~machine precision
        for _ in range(2):
            for q in out:
                w -= (q.conj() @ w) * q
        n = np.linalg.norm(w)
        if n > cutoff and len(out) < rank:
            out.append(fix_phase(w / n))
    if len(out) != rank:
        # borderline singular values: fall back on the SVD range
        u, _, _ = np.linalg.svd(a, full_matrices=False)
        out = [fix_phase(u[:, i]) for i in range(rank)]
    return np.stack(out, axis=1)


def projector_from_basis(basis: np.ndarray) -> np.ndarray:
    return basis @ dagger(basis)


def null_space(m: np.ndarray, tol: float = TOL_RANK) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of ``m``.

    Singular values are compared against ``tol`` times the largest one, with
    a floor of ``tol`` so that an all-zero matrix has a full kernel.
    """
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    cutoff = tol * max(float(s[0]) if s.size else 0.0, 1.0)
    rank = int(np.sum(s > cutoff))
    return dagger(vh[rank:, :])


def hermitian_eig(m, tol: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real, in descending order.
    eigenvectors : ndarray
        Orthonormal columns matching ``eigenvalues``.

    Raises
    ------
    NotHermitian
        If ``‖m − m†‖_max`` exceeds ``tol``.
    """
    m = require_hermitian(m, tol)
    h = (m + dagger(m)) / 2
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def spectral_projectors(m, tol: float = TOL_EIG) -> list[tuple[float, np.ndarray]]:
    """Group the spectrum of Hermitian ``m`` into clusters.

    Eigenvalues closer than ``tol`` (relative to ``max(1, ‖m‖)``) to the
    running cluster are merged; each cluster yields its mean eigenvalue and
    the projector onto the sum of its eigenspaces.  Descending order.
    """
    w, v = hermitian_eig(m)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    clusters: list[list[int]] = []
    for i, lam in enumerate(w):
        if clusters and abs(w[clusters[-1][0]] - lam) <= tol * scale:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    out = []
    for idx in clusters:
        vecs = v[:, idx]
        out.append((float(np.mean(w[idx])), vecs @ dagger(vecs)))
    return out


def propagator(h, t: float, t0: float = 0.0, tol: float = TOL_HERM) -> np.ndarray:
    """Unitary propagator ``exp[-i H (t - t0)]`` for Hermitian ``h``.

    Computed from the eigen-decomposition of ``h``, which is exact up to
    rounding for Hermitian generators.
    """
    if not (np.isfinite(t) and np.isfinite(t0)):
        raise ValueError("times must be finite")
    w, v = hermitian_eig(h, tol)
    phases = np.exp(-1j * w * (float(t) - float(t0)))
    return (v * phases) @ dagger(v)


def unitarity_residual(u: np.ndarray) -> float:
    return max_abs(dagger(u) @ u - np.eye(u.shape[0]))


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out
