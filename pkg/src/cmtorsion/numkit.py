"""Dense complex linear algebra used by every other module.

Everything here works on complex128 numpy arrays. The eigenstructure
routines are built on the complex Schur form with eigenvalue reordering,
followed by a Sylvester solve that decouples the reordered blocks. This
gives generalized eigenspaces and oblique spectral projectors that stay
well defined when the matrix is not normal or not diagonalizable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConvergenceError,
    DegeneracyError,
    ShapeError,
    SingularityError,
    SpectraOverlapError,
)

RANK_TOL = 1e-9
CLUSTER_TOL = 1e-7


def as_cmatrix(a, name="matrix") -> np.ndarray:
    """Coerce to a finite 2-d complex128 array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ShapeError(f"{name} contains non-finite entries")
    return m


def _square(a, name="matrix"):
    m = as_cmatrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got {m.shape}")
    return m


def norm2(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def schur(a):
    """Complex Schur factorization ``a = Q T Q^H``."""
    a = _square(a)
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0), complex), np.zeros((0, 0), complex)
    try:
        t, q = sla.schur(a, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        # LAPACK zhseqr gives up after 30*n iterations per eigenvalue
        raise ConvergenceError(f"Schur QR iteration failed: {exc}", iterations=30 * n) from exc
    return q, t


def sylvester(a, b, c, sep_tol=1e-12):
    """Solve ``a @ x - x @ b = c``.

    Raises SpectraOverlapError when the spectra of ``a`` and ``b`` come
    closer than ``sep_tol`` relative to the larger of their norms.
    """
    a = _square(a, "a")
    b = _square(b, "b")
    c = as_cmatrix(c, "c")
    if c.shape != (a.shape[0], b.shape[0]):
        raise ShapeError(f"c has shape {c.shape}, expected {(a.shape[0], b.shape[0])}")
    if c.size == 0:
        return np.zeros(c.shape, complex)
    ea = np.linalg.eigvals(a)
    eb = np.linalg.eigvals(b)
    gap = np.min(np.abs(ea[:, None] - eb[None, :]))
    scale = max(norm2(a), norm2(b), 1e-300)
    if gap <= sep_tol * scale:
        raise SpectraOverlapError(f"spectra of a and b overlap (gap {gap:.3e})")
    # scipy solves a x + x b = c
    return sla.solve_sylvester(a, -b, c)


def det(a) -> complex:
    """Determinant through LU with partial pivoting."""
    a = _square(a)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    lu, piv = sla.lu_factor(a, check_finite=False)
    sign = -1.0 if np.count_nonzero(piv != np.arange(n)) % 2 else 1.0
    return complex(sign * np.prod(np.diag(lu)))


def solve(a, b, rank_tol=RANK_TOL):
    a = _square(a)
    vec = np.ndim(b) == 1
    b = as_cmatrix(np.reshape(b, (-1, 1)) if vec else b, "b")
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"rhs has {b.shape[0]} rows, expected {a.shape[0]}")
    if a.shape[0] == 0:
        return np.zeros(b.shape, complex)
    s = np.linalg.svd(a, compute_uv=False)
    cond = s[0] / s[-1] if s[-1] > 0 else np.inf
    if s[-1] <= rank_tol * s[0]:
        raise SingularityError(f"matrix is singular to tolerance (cond ~ {cond:.3e})", condition=cond)
    x = sla.solve(a, b)
    return x[:, 0] if vec else x


def rank_basis(a, rank_tol=RANK_TOL, scale=0.0):
    """Rank, orthonormal image basis and orthonormal kernel basis.

    Singular values at or below ``rank_tol * max(sigma_max, scale)`` count
    as zero. ``scale`` lets a caller judge a block against the size of the
    operator it was cut from.
    """
    a = as_cmatrix(a)
    m, n = a.shape
    if a.size == 0:
        return 0, np.zeros((m, 0), complex), np.eye(n, dtype=complex)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    ref = max(s[0] if s.size else 0.0, scale)
    r = int(np.count_nonzero(s > rank_tol * ref)) if ref > 0 else 0
    return r, u[:, :r], vh[r:].conj().T


def rank_is_ambiguous(a, rank_tol=RANK_TOL, scale=0.0) -> bool:
    """True when a singular value sits within a decade of the rank cut."""
    a = as_cmatrix(a)
    if a.size == 0:
        return False
    s = np.linalg.svd(a, compute_uv=False)
    ref = max(s[0], scale)
    if ref == 0:
        return False
    rel = s / ref
    return bool(np.any((rel > 0.1 * rank_tol) & (rel <= 10 * rank_tol)))


def orth(basis) -> np.ndarray:
    """Orthonormal basis with the same column span (full column rank assumed)."""
    basis = as_cmatrix(basis)
    if basis.shape[1] == 0:
        return basis.copy()
    q, _ = np.linalg.qr(basis)
    return q


def complement(basis, n=None, rank_tol=RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(basis)."""
    basis = as_cmatrix(basis)
    n = basis.shape[0] if n is None else n
    if basis.shape[1] == 0:
        return np.eye(n, dtype=complex)
    _, _, null = rank_basis(basis.conj().T, rank_tol)
    return null


def coords(basis, vectors, tol=1e-8):
    """Coordinates of ``vectors`` in ``basis``; the vectors must lie in its span."""
    basis = as_cmatrix(basis)
    vectors = as_cmatrix(vectors)
    if basis.shape[1] == 0:
        if vectors.size and norm2(vectors) > tol:
            raise DegeneracyError("vectors are not in the (zero) span")
        return np.zeros((0, vectors.shape[1]), complex)
    x, *_ = np.linalg.lstsq(basis, vectors, rcond=None)
    resid = norm2(basis @ x - vectors)
    scale = max(norm2(vectors), 1.0)
    if resid > tol * scale:
        raise DegeneracyError(f"vectors leave the span (residual {resid:.3e})")
    return x


def restrict(op, basis, tol=1e-8):
    """Matrix of ``op`` restricted to the invariant subspace span(basis)."""
    op = _square(op, "op")
    basis = as_cmatrix(basis, "basis")
    return coords(basis, op @ basis, tol=tol)


@dataclass(frozen=True)
class SpectralCluster:
    center: complex
    alg_mult: int
    basis: np.ndarray
    projector: np.ndarray
    eigenvalues: tuple = ()


class Clusters(list):
    """List of SpectralCluster with a flag for near-merge ambiguity."""

    ambiguous: bool = False


def invariant_split(a, select):
    """Split C^n into the generalized eigenspace of the selected eigenvalues
    and the complementary one.

    ``select`` is called on each eigenvalue. Returns ``(inside, outside,
    projector)`` where ``inside``/``outside`` hold column bases (inside is
    orthonormal) and ``projector`` projects onto ``inside`` along ``outside``.
    """
    a = _square(a)
    n = a.shape[0]
    if n == 0:
        z = np.zeros((0, 0), complex)
        return z, z, z
    try:
        t, q, sdim = sla.schur(a, output="complex", sort=lambda x: bool(select(x)))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"reordered Schur failed: {exc}", iterations=30 * n) from exc
    expected = sum(bool(select(x)) for x in np.diag(t))
    if expected != sdim:
        raise DegeneracyError("eigenvalue selection changed under reordering; cut too close to spectrum")
    s = sdim
    if s == 0:
        return np.zeros((n, 0), complex), q, np.zeros((n, n), complex)
    if s == n:
        return q, np.zeros((n, 0), complex), np.eye(n, dtype=complex)
    t11, t12, t22 = t[:s, :s], t[:s, s:], t[s:, s:]
    y = sylvester(t11, t22, -t12)
    inside = q[:, :s]
    outside = q @ np.vstack([y, np.eye(n - s)])
    pt = np.zeros((n, n), complex)
    pt[:s, :s] = np.eye(s)
    pt[:s, s:] = -y
    proj = q @ pt @ q.conj().T
    return inside, outside, proj


def eig_clusters(a, cluster_tol=CLUSTER_TOL) -> Clusters:
    """Group eigenvalues into clusters and return their generalized eigenspaces.

    Eigenvalues closer than ``cluster_tol * ||a||`` are merged (single
    linkage). ``result.ambiguous`` is set when two distinct clusters are
    separated by less than ten times that threshold.
    """
    a = _square(a)
    n = a.shape[0]
    out = Clusters()
    if n == 0:
        return out
    _, t = schur(a)
    ev = np.diag(t).copy()
    scale = norm2(a) or 1.0
    thr = cluster_tol * scale
    # single-linkage via union-find
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(ev[:, None] - ev[None, :])
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= thr:
                parent[find(i)] = find(j)
    labels = np.array([find(i) for i in range(n)])
    roots = sorted(set(labels), key=lambda r: (-abs(ev[labels == r].mean()), ev[labels == r].mean().real, ev[labels == r].mean().imag))
    for i in range(n):
        for j in range(i + 1, n):
            if labels[i] != labels[j] and dist[i, j] <= 10 * thr:
                out.ambiguous = True

    def nearest_label(x):
        return labels[int(np.argmin(np.abs(ev - x)))]

    for r in roots:
        members = ev[labels == r]
        if len(roots) == 1:
            basis, proj = np.eye(n, dtype=complex), np.eye(n, dtype=complex)
        else:
            basis, _, proj = invariant_split(a, lambda x, r=r: nearest_label(x) == r)
        out.append(
            SpectralCluster(
                center=complex(members.mean()),
                alg_mult=int(members.size),
                basis=basis,
                projector=proj,
                eigenvalues=tuple(complex(x) for x in members),
            )
        )
    return out
