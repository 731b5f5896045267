"""Z2-graded bi-graded complexes (C, d, d*).

The space is C = C^0 + C^1 (even + odd). ``d`` and ``d*`` both flip parity;
they are stored as four blocks::

    d_eo  : C^0 -> C^1      d_oe  : C^1 -> C^0
    ds_eo : C^0 -> C^1      ds_oe : C^1 -> C^0

Parity arithmetic is mod 2, so "k+1" and "k-1" name the same parity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numkit
from .errors import CutCollisionError, DegeneracyError, ShapeError

VALIDATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BiComplex:
    d_eo: np.ndarray
    d_oe: np.ndarray
    ds_eo: np.ndarray
    ds_oe: np.ndarray
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("d_eo", "d_oe", "ds_eo", "ds_oe"):
            object.__setattr__(self, name, numkit.as_cmatrix(getattr(self, name), name))
        n1, n0 = self.d_eo.shape
        want = {"d_eo": (n1, n0), "d_oe": (n0, n1), "ds_eo": (n1, n0), "ds_oe": (n0, n1)}
        for name, shape in want.items():
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @classmethod
    def zero(cls, n0, n1, **labels):
        z10, z01 = np.zeros((n1, n0), complex), np.zeros((n0, n1), complex)
        return cls(z10, z01, z10.copy(), z01.copy(), dict(labels))

    @classmethod
    def from_full(cls, n0, d, ds, labels=None):
        """Build from operators on C^0 + C^1 given as (n0+n1) square matrices."""
        d, ds = np.asarray(d, complex), np.asarray(ds, complex)
        return cls(d[n0:, :n0], d[:n0, n0:], ds[n0:, :n0], ds[:n0, n0:], dict(labels or {}))

    @property
    def n0(self) -> int:
        return self.d_eo.shape[1]

    @property
    def n1(self) -> int:
        return self.d_eo.shape[0]

    @property
    def dims(self):
        return (self.n0, self.n1)

    def dim(self, k) -> int:
        return self.n0 if k % 2 == 0 else self.n1

    def d(self, k):
        """Block of d leaving parity k."""
        return self.d_eo if k % 2 == 0 else self.d_oe

    def ds(self, k):
        """Block of d* leaving parity k."""
        return self.ds_eo if k % 2 == 0 else self.ds_oe

    def full(self, which="d"):
        n0, n = self.n0, self.n0 + self.n1
        m = np.zeros((n, n), complex)
        lo, hi = (self.d_oe, self.d_eo) if which == "d" else (self.ds_oe, self.ds_eo)
        m[:n0, n0:] = lo
        m[n0:, :n0] = hi
        return m

    def scale(self) -> float:
        """Operator size used for absolute rank decisions (parent size for subcomplexes)."""
        if "parent_scale" in self.labels:
            return float(self.labels["parent_scale"])
        s = max(numkit.norm2(self.full("d")), numkit.norm2(self.full("ds")))
        return s if s > 0 else 1.0

    def with_labels(self, **labels):
        return BiComplex(self.d_eo, self.d_oe, self.ds_eo, self.ds_oe, {**self.labels, **labels})

    def direct_sum(self, other: "BiComplex") -> "BiComplex":
        """Block sum; each parity lists self's basis before other's."""
        from scipy.linalg import block_diag

        return BiComplex(
            block_diag(self.d_eo, other.d_eo),
            block_diag(self.d_oe, other.d_oe),
            block_diag(self.ds_eo, other.ds_eo),
            block_diag(self.ds_oe, other.ds_oe),
        )

    def restrict(self, bases) -> "BiComplex":
        """Subcomplex on span(bases[0]) + span(bases[1]); bases must be
        orthonormal and invariant under d and d*."""
        v0, v1 = bases
        return BiComplex(
            v1.conj().T @ self.d_eo @ v0,
            v0.conj().T @ self.d_oe @ v1,
            v1.conj().T @ self.ds_eo @ v0,
            v0.conj().T @ self.ds_oe @ v1,
            {**self.labels, "parent_scale": self.scale()},
        )


@dataclass
class ValidationReport:
    residuals: dict
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        return all(r <= self.tol * self.scale for r in self.residuals.values())

    def failures(self):
        return [k for k, r in self.residuals.items() if r > self.tol * self.scale]


def validate(c: BiComplex, tol=VALIDATION_TOL) -> ValidationReport:
    """Residual norms of the four square-zero identities."""
    nd = max(numkit.norm2(c.d_eo), numkit.norm2(c.d_oe))
    ns = max(numkit.norm2(c.ds_eo), numkit.norm2(c.ds_oe))
    res = {
        "d_oe*d_eo": numkit.norm2(c.d_oe @ c.d_eo),
        "d_eo*d_oe": numkit.norm2(c.d_eo @ c.d_oe),
        "ds_oe*ds_eo": numkit.norm2(c.ds_oe @ c.ds_eo),
        "ds_eo*ds_oe": numkit.norm2(c.ds_eo @ c.ds_oe),
    }
    return ValidationReport(res, max(nd * nd, ns * ns, 1.0), tol)


def laplacian(c: BiComplex):
    """(Delta_even, Delta_odd) with Delta = d*d + dd*."""
    even = c.ds_oe @ c.d_eo + c.d_oe @ c.ds_eo
    odd = c.ds_eo @ c.d_oe + c.d_eo @ c.ds_oe
    return even, odd


@dataclass(frozen=True, eq=False)
class ParitySplit:
    """C^k = B + H + A for one parity and one differential.

    ``B`` holds the images of the *next-lower* A basis under the
    differential, so that the same vectors serve both degrees.
    """

    B: np.ndarray
    H: np.ndarray
    A: np.ndarray

    @property
    def dims(self):
        return self.B.shape[1], self.H.shape[1], self.A.shape[1]


@dataclass(frozen=True, eq=False)
class SplitData:
    cohom: tuple  # ParitySplit for d, parities 0 and 1
    hom: tuple  # ParitySplit for d*, parities 0 and 1
    ambiguous: bool = False

    def betti(self):
        return tuple(s.H.shape[1] for s in self.cohom)

    def hom_betti(self):
        return tuple(s.H.shape[1] for s in self.hom)


def _split_for(c: BiComplex, op, rank_tol):
    """B/H/A decomposition for the parity-flipping operator ``op(k)``."""
    ranks, kers, coims, ambiguous = {}, {}, {}, False
    scale = c.scale()
    for k in (0, 1):
        m = op(k)
        r, img, ker = numkit.rank_basis(m, rank_tol, scale)
        ambiguous |= numkit.rank_is_ambiguous(m, rank_tol, scale)
        ranks[k], kers[k] = r, ker
        coims[k] = numkit.complement(ker, c.dim(k))
    out = []
    for k in (0, 1):
        j = 1 - k
        b = op(j) @ coims[j]
        _, bo, _ = numkit.rank_basis(b, rank_tol, scale)
        ker = kers[k]
        resid = ker - bo @ (bo.conj().T @ ker)
        h_dim = ker.shape[1] - ranks[j]
        if h_dim < 0:
            raise DegeneracyError("image larger than kernel: complex fails d^2=0 at this tolerance")
        if h_dim == 0:
            h = np.zeros((c.dim(k), 0), complex)
        else:
            u, _, _ = np.linalg.svd(resid, full_matrices=False)
            h = u[:, :h_dim]
        out.append(ParitySplit(B=b, H=h, A=coims[k]))
    return tuple(out), ambiguous


def cohomology(c: BiComplex, rank_tol=numkit.RANK_TOL):
    """Split data for d: B^k = d(A^{k-1}), H^k orthogonal lift, A^k = (Ker d)^perp."""
    return _split_for(c, c.d, rank_tol)


def homology(c: BiComplex, rank_tol=numkit.RANK_TOL):
    """Split data for d*: B_k = d*(A_{k+1}), H_k orthogonal lift, A_k = (Ker d*)^perp."""
    return _split_for(c, c.ds, rank_tol)


def split(c: BiComplex, rank_tol=numkit.RANK_TOL) -> SplitData:
    co, a1 = cohomology(c, rank_tol)
    ho, a2 = homology(c, rank_tol)
    return SplitData(co, ho, a1 or a2)


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    lambda_cut: float
    low: tuple  # orthonormal bases of C_[0,lambda] per parity
    high: tuple  # orthonormal bases of C_(lambda,inf) per parity
    projectors: tuple  # onto low along high, per parity
    eigenvalues: tuple  # spectrum of Delta per parity

    @property
    def low_dims(self):
        return tuple(b.shape[1] for b in self.low)

    @property
    def high_dims(self):
        return tuple(b.shape[1] for b in self.high)


def _cut_scale(lap):
    return max(numkit.norm2(lap), 1.0)


def zero_threshold(lap, cluster_tol=numkit.CLUSTER_TOL):
    return cluster_tol * _cut_scale(lap)


def spectral_truncate(c: BiComplex, lam: float, cluster_tol=numkit.CLUSTER_TOL) -> SpectralSplit:
    """Split C into generalized eigenspaces of Delta with |eigenvalue| <= lam
    and > lam.

    Eigenvalues within ``cluster_tol * ||Delta||`` of zero are treated as
    zero. A cut within that distance of any other |eigenvalue| raises
    CutCollisionError.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    laps = laplacian(c)
    low, high, projs, eigs = [], [], [], []
    for k, lap in enumerate(laps):
        n = lap.shape[0]
        _, t = numkit.schur(lap)
        ev = np.diag(t).copy()
        thr = zero_threshold(lap, cluster_tol)
        for x in ev:
            if abs(x) > thr and abs(abs(x) - lam) <= thr:
                raise CutCollisionError(
                    f"cut lambda={lam} collides with eigenvalue {x:.6g} (parity {k})", eigenvalue=complex(x)
                )

        def select(x, thr=thr):
            return abs(x) <= lam or abs(x) <= thr

        if n == 0:
            z = np.zeros((0, 0), complex)
            lo, hi, p = z, z, z
        else:
            lo, hi, p = numkit.invariant_split(lap, select)
            hi = numkit.orth(hi)
        low.append(lo)
        high.append(hi)
        projs.append(p)
        eigs.append(ev)
    return SpectralSplit(float(lam), tuple(low), tuple(high), tuple(projs), tuple(eigs))


def valid_cuts(c: BiComplex, count=4, cluster_tol=numkit.CLUSTER_TOL, min_gap=1e-3):
    """Cuts placed in the widest gaps of the |spectrum| of Delta.

    Returns up to ``count`` values, always including one below every
    nonzero |eigenvalue| and one above the spectral radius. Gaps narrower
    than ``min_gap`` (relative) are skipped.
    """
    laps = laplacian(c)
    mags = []
    thr = 0.0
    for lap in laps:
        if lap.size:
            mags.extend(np.abs(np.linalg.eigvals(lap)))
            thr = max(thr, zero_threshold(lap, cluster_tol))
    mags = sorted(m for m in mags if m > thr)
    if not mags:
        return [0.0, 1.0][:count]
    pts = [0.0] + mags
    gaps = []
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a > min_gap * max(b, 1.0):
            gaps.append(((b - a) / max(b, 1.0), 0.5 * (a + b)))
    top = mags[-1] * 1.5 + 1.0
    interior = [mid for _, mid in sorted(gaps, reverse=True)]
    cuts = [top] + interior
    return sorted(set(cuts[:count]))


def plus_minus_split(c: BiComplex, s: SpectralSplit, k: int, rank_tol=numkit.RANK_TOL):
    """(C+ basis, C- basis) of the (lambda, inf) part of parity k.

    C+ = Ker d* and C- = Ker d, intersected with C_(lambda,inf); returned as
    ambient column vectors.
    """
    w = s.high[k]
    wn = s.high[1 - k]
    if w.shape[1] == 0:
        z = np.zeros((c.dim(k), 0), complex)
        return z, z.copy()
    ds_t = wn.conj().T @ c.ds(k) @ w
    d_t = wn.conj().T @ c.d(k) @ w
    scale = c.scale()
    _, _, kp = numkit.rank_basis(ds_t, rank_tol, scale)
    _, _, km = numkit.rank_basis(d_t, rank_tol, scale)
    plus, minus = w @ kp, w @ km
    if plus.shape[1] + minus.shape[1] != w.shape[1]:
        raise DegeneracyError(
            f"C+ ({plus.shape[1]}) + C- ({minus.shape[1]}) != dim C_(lambda,inf) ({w.shape[1]}) at parity {k}"
        )
    both = np.hstack([plus, minus])
    r, _, _ = numkit.rank_basis(both, rank_tol, 1.0)
    if r != w.shape[1]:
        raise DegeneracyError(f"C+ and C- are not complementary at parity {k}")
    return plus, minus
