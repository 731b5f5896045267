"""Cappell-Miller torsion of a finite-dimensional bi-graded complex.

Three routes to the same number:

* ``torsion_definition``: the canonical maps phi (for d) and phi' (for d*)
  evaluated on a reference element c of Det(C), with the sign S(C).
* ``torsion_acyclic``: det(d*d | C+^0) / det(d*d | C+^1), valid when the
  Laplacian is invertible.
* ``torsion_truncated``: product formula over a spectral cut lambda,
  combining the acyclic formula on C_(lambda,inf) with the definitional
  route on C_[0,lambda].

For non-acyclic complexes the torsion is a coordinate against reference
bases of H(d) and H(d*); these are given as cocycle (resp. d*-cycle)
vectors in C and named by an id.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import numkit
from .bicomplex import BiComplex, SplitData, laplacian, plus_minus_split, spectral_truncate, split
from .detline import DetElement
from .errors import CutCollisionError, NotAcyclicError, SplitError


@dataclass(frozen=True, eq=False)
class RefBases:
    """Reference bases of H(d) and H(d*), as representative vectors per parity."""

    cohom: tuple
    hom: tuple
    coh_id: str = "lift"
    hom_id: str = "lift"

    def rebased(self, coh=None, hom=None, coh_id=None, hom_id=None):
        """Change bases by transition matrices; ``old = new @ T`` per parity."""
        def apply(zs, ts):
            if ts is None:
                return zs
            return tuple(z @ np.linalg.inv(t) if z.shape[1] else z for z, t in zip(zs, ts))

        return RefBases(
            apply(self.cohom, coh),
            apply(self.hom, hom),
            coh_id or self.coh_id,
            hom_id or self.hom_id,
        )


@dataclass(frozen=True)
class TorsionValue:
    coord: complex
    coh_basis_id: str
    hom_basis_id: str
    lambda_used: float | None = None
    tail_factor: complex = 1.0 + 0.0j
    low_coord: complex | None = None

    def __post_init__(self):
        if self.coord == 0:
            raise SplitError("torsion coordinate vanished")

    @property
    def log_abs(self) -> float:
        return math.log(abs(self.coord))

    @property
    def phase(self) -> float:
        return cmath.phase(self.coord)

    def comparable(self, other: "TorsionValue") -> bool:
        return self.coh_basis_id == other.coh_basis_id and self.hom_basis_id == other.hom_basis_id


def default_bases(c: BiComplex, sd: SplitData | None = None, coh_id="lift", hom_id="lift") -> RefBases:
    sd = sd or split(c)
    return RefBases(tuple(s.H for s in sd.cohom), tuple(s.H for s in sd.hom), coh_id, hom_id)


def _h_coords(parts, lifts, c_coords):
    h = []
    for k in (0, 1):
        p = parts[k]
        m = np.hstack([p.B, lifts[k], p.A])
        if m.shape[0] != m.shape[1]:
            raise SplitError(f"parity {k}: B+H+A has {m.shape[1]} vectors in a {m.shape[0]}-dim space")
        dm = numkit.det(m)
        cond = np.linalg.cond(m) if m.size else 1.0
        if dm == 0 or not np.isfinite(cond) or cond > 1e12:
            raise SplitError(f"parity {k}: B+H+A is not a basis (cond {cond:.3e})")
        h.append(c_coords[k] / dm)
    return h


def phi(c: BiComplex, sd: SplitData, c_coords=(1.0, 1.0), lifts=None, basis_id="lift") -> DetElement:
    """h_0 (x) h_1^{-1} with c_k = mu_{B,H,A}(d x_{k-1} (x) h_k (x) x_k).

    The x_k are the wedges of the A^k bases stored in ``sd``; ``lifts``
    overrides the H^k vectors (the reference cohomology basis).
    """
    lifts = lifts if lifts is not None else tuple(s.H for s in sd.cohom)
    h0, h1 = _h_coords(sd.cohom, lifts, c_coords)
    return DetElement(lifts[0].shape[1] + lifts[1].shape[1], basis_id, h0 / h1)


def phi_prime(c: BiComplex, sd: SplitData, c_coords=(1.0, 1.0), lifts=None, basis_id="lift") -> DetElement:
    """Homological variant of phi, built from d* and the B_k/H_k/A_k split."""
    lifts = lifts if lifts is not None else tuple(s.H for s in sd.hom)
    h0, h1 = _h_coords(sd.hom, lifts, c_coords)
    return DetElement(lifts[0].shape[1] + lifts[1].shape[1], basis_id, h0 / h1)


def sign_S(sd: SplitData) -> int:
    """S(C) mod 2."""
    bu = [s.dims[0] for s in sd.cohom]  # dim B^k
    hu = [s.dims[1] for s in sd.cohom]  # dim H^k
    bl = [s.dims[0] for s in sd.hom]  # dim B_k
    hl = [s.dims[1] for s in sd.hom]  # dim H_k
    total = 0
    for k in (0, 1):
        j = 1 - k
        total += bl[j] * bu[j] + bu[j] * hl[k] + bl[j] * hu[k]
    return total % 2


def torsion_definition(c: BiComplex, bases: RefBases | None = None, sd: SplitData | None = None,
                       c_coords=(1.0, 1.0), rank_tol=numkit.RANK_TOL) -> TorsionValue:
    sd = sd or split(c, rank_tol)
    bases = bases or default_bases(c, sd)
    for k in (0, 1):
        if bases.cohom[k].shape[1] != sd.cohom[k].H.shape[1]:
            raise SplitError(f"cohomology basis at parity {k} has wrong size")
        if bases.hom[k].shape[1] != sd.hom[k].H.shape[1]:
            raise SplitError(f"homology basis at parity {k} has wrong size")
    f = phi(c, sd, c_coords, bases.cohom, bases.coh_id)
    fp = phi_prime(c, sd, c_coords, bases.hom, bases.hom_id)
    sgn = -1 if sign_S(sd) else 1
    val = sgn * f.coord / fp.coord
    return TorsionValue(complex(val), bases.coh_id, bases.hom_id, None, 1.0 + 0.0j, complex(val))


def is_acyclic(c: BiComplex, rank_tol=numkit.RANK_TOL) -> bool:
    """Both (co)homologies vanish, by the same rank decisions as ``split``.

    Testing the Laplacian directly would square the conditioning of d and
    d*, so it can disagree with the split used by the definition.
    """
    sd = split(c, rank_tol)
    return sd.betti() == (0, 0) and sd.hom_betti() == (0, 0)


def _dsd(c: BiComplex, k):
    """d*d acting on parity k."""
    return c.ds(1 - k) @ c.d(k)


def torsion_acyclic(c: BiComplex, rank_tol=numkit.RANK_TOL) -> complex:
    """det(d*d | C+^0) / det(d*d | C+^1) with C+ = Ker d*.

    With V an orthonormal basis of C+^k and d V = Q R (thin QR), the
    restriction factors as (V^H d* Q)(R), so d*d is never formed and the
    conditioning of d and d* is not squared.
    """
    if not is_acyclic(c, rank_tol):
        raise NotAcyclicError("Laplacian has a zero eigenvalue")
    dets = []
    for k in (0, 1):
        _, _, plus = numkit.rank_basis(c.ds(k), rank_tol)
        if plus.shape[1] == 0:
            dets.append(1.0)
            continue
        q, r = np.linalg.qr(c.d(k) @ plus)
        dets.append(numkit.det(plus.conj().T @ c.ds(1 - k) @ q) * numkit.det(r))
    return complex(dets[0] / dets[1])


def _arg_theta(z: complex, theta: float, ray_tol=1e-12) -> float:
    """Argument of z in (theta - 2pi, theta]."""
    a = cmath.phase(z)
    off = (theta - a) % (2 * math.pi)
    if off < ray_tol or 2 * math.pi - off < ray_tol:
        raise CutCollisionError(f"eigenvalue {z:.6g} lies on the Agmon ray theta={theta}", eigenvalue=z)
    return theta - off


def agmon_log_det(a, theta: float = math.pi, zero_tol=numkit.CLUSTER_TOL) -> complex:
    """Sum of log_theta over nonzero eigenvalues (with multiplicity).

    The branch of log has its cut along the ray at angle theta; eigenvalues
    with modulus at most ``zero_tol * max(||a||, 1)`` count as zero.
    """
    if not (0 < theta < 2 * math.pi):
        raise ValueError("theta must lie in (0, 2pi)")
    a = numkit.as_cmatrix(a)
    if a.size == 0:
        return 0j
    _, t = numkit.schur(a)
    thr = zero_tol * max(numkit.norm2(a), 1.0)
    total = 0j
    for z in np.diag(t):
        if abs(z) <= thr:
            continue
        total += complex(math.log(abs(z)), _arg_theta(complex(z), theta))
    return total


def det_prime(a, theta: float = math.pi, zero_tol=numkit.CLUSTER_TOL) -> complex:
    return cmath.exp(agmon_log_det(a, theta, zero_tol))


def tail_log_det(c: BiComplex, s, theta=math.pi, rank_tol=numkit.RANK_TOL) -> complex:
    """sum_k (-1)^k LDet_theta(d*d | C+^k on the (lambda, inf) part)."""
    total = 0j
    for k in (0, 1):
        plus, _ = plus_minus_split(c, s, k, rank_tol)
        if plus.shape[1] == 0:
            continue
        r = numkit.restrict(_dsd(c, k), plus)
        total += (-1) ** k * agmon_log_det(r, theta, zero_tol=0.0)
    return total


def project_bases(bases: RefBases, s) -> RefBases:
    """Reference bases pushed into C_[0,lambda] (coordinates of the low basis).

    The spectral projector commutes with d and d*, and the discarded part is
    exact in the acyclic tail, so projected vectors represent the same
    classes.
    """
    def push(zs):
        return tuple(v.conj().T @ (p @ z) for z, v, p in zip(zs, s.low, s.projectors))

    return RefBases(push(bases.cohom), push(bases.hom), bases.coh_id, bases.hom_id)


def low_torsion(c: BiComplex, s, bases: RefBases, rank_tol=numkit.RANK_TOL) -> TorsionValue:
    """Torsion of C_[0,lambda], expressed against the full-complex bases."""
    sub = c.restrict(s.low)
    return torsion_definition(sub, project_bases(bases, s), rank_tol=rank_tol)


def torsion_truncated(c: BiComplex, lam: float, bases: RefBases | None = None, theta: float = math.pi,
                      cluster_tol=numkit.CLUSTER_TOL, rank_tol=numkit.RANK_TOL) -> TorsionValue:
    """tau = prod_k det(d*d | C+^k_(lambda,inf))^{(-1)^k} * tau(C_[0,lambda])."""
    bases = bases or default_bases(c, split(c, rank_tol))
    s = spectral_truncate(c, lam, cluster_tol)
    tail = cmath.exp(tail_log_det(c, s, theta, rank_tol))
    low = low_torsion(c, s, bases, rank_tol)
    return TorsionValue(tail * low.coord, bases.coh_id, bases.hom_id, float(lam), tail, low.coord)
