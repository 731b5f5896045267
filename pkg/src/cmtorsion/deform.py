"""One-parameter deformation families and finite-difference variation checks.

A conjugation family moves the two differentials by

    d(t)  = e^{t g_d} d e^{-t g_d}
    d*(t) = e^{-t g_s} d* e^{t g_s}

with fixed even generators g_d and g_s. The metric family has g_d = 0,
g_s = alpha; the flux family has g_d = g_s = beta (both sides move). Both
square-zero identities survive any conjugation.

Reference (co)homology bases are carried along by the conjugators: a
d-cocycle z goes to e^{t g_d} z and a d*-cycle w to e^{-t g_s} w. This is
the identification of determinant lines under which rates are measured.

For such a family the first-order rate of log tau on C_[0,lambda] is
exactly -str(g_d) - str(g_s) restricted to C_[0,lambda].
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import models, numkit
from .bicomplex import BiComplex, laplacian, spectral_truncate, split
from .errors import CMTorsionError, RestrictionError, StencilError
from .torsion import RefBases, default_bases, torsion_truncated

STENCIL_JUMP = math.pi / 2


def supertrace(op, projector=None, n0=None, tol=1e-8, compress=False) -> complex:
    """sum_k (-1)^k Tr(op on the parity-k part of range(projector)).

    ``op`` is either a pair (op_even, op_odd) of square blocks or a full
    matrix with ``n0`` even coordinates first. ``projector`` (same layout)
    must commute with op, unless ``compress`` is set: then the trace of the
    compression P op P is taken, which is what a generator that does not
    preserve the subspace contributes to first order.
    """
    blocks = _blocks(op, n0)
    if projector is None:
        return complex(np.trace(blocks[0]) - np.trace(blocks[1]))
    projs = _blocks(projector, n0)
    total = 0j
    for k, (a, p) in enumerate(zip(blocks, projs)):
        if a.shape != p.shape:
            raise RestrictionError(f"parity {k}: op {a.shape} and projector {p.shape} differ")
        if a.size == 0:
            continue
        comm = numkit.norm2(a @ p - p @ a)
        if not compress and comm > tol * max(numkit.norm2(a) * numkit.norm2(p), 1.0):
            raise RestrictionError(f"projector does not commute with op at parity {k} (residual {comm:.3e})")
        total += (-1) ** k * np.trace(p @ a)
    return complex(total)


def _blocks(op, n0):
    if isinstance(op, (tuple, list)):
        return tuple(numkit.as_cmatrix(b) for b in op)
    full = numkit.as_cmatrix(op)
    if n0 is None:
        raise ValueError("n0 is needed to split a full matrix by parity")
    if np.any(full[:n0, n0:]) or np.any(full[n0:, :n0]):
        off = max(numkit.norm2(full[:n0, n0:]), numkit.norm2(full[n0:, :n0]))
        if off > 1e-12 * max(numkit.norm2(full), 1.0):
            raise RestrictionError("operator is not even (it mixes parities)")
    return full[:n0, :n0], full[n0:, n0:]


def _even(n0, n, gen):
    if gen is None:
        return np.zeros((n, n), complex)
    g = numkit.as_cmatrix(gen, "generator")
    if g.shape != (n, n):
        raise ValueError(f"generator has shape {g.shape}, expected {(n, n)}")
    _blocks(g, n0)
    return g


@dataclass(frozen=True, eq=False)
class ConjugationFamily:
    base: BiComplex
    gen_d: np.ndarray
    gen_ds: np.ndarray
    kind: str = "conjugation"
    lemma_gen: np.ndarray | None = None  # operator named in the variation lemma

    def at(self, t: float) -> BiComplex:
        d, ds = self.base.full("d"), self.base.full("ds")
        if np.any(self.gen_d):
            d = sla.expm(t * self.gen_d) @ d @ sla.expm(-t * self.gen_d)
        if np.any(self.gen_ds):
            ds = sla.expm(-t * self.gen_ds) @ ds @ sla.expm(t * self.gen_ds)
        return BiComplex.from_full(self.base.n0, d, ds, {**self.base.labels, "family": self.kind, "t": float(t)})

    def generators(self, t: float):
        return self.gen_d, self.gen_ds

    def transport(self, bases: RefBases, t0: float, t: float) -> RefBases:
        n0 = self.base.n0
        fd = sla.expm((t - t0) * self.gen_d)
        fs = sla.expm(-(t - t0) * self.gen_ds)
        coh = (fd[:n0, :n0] @ bases.cohom[0], fd[n0:, n0:] @ bases.cohom[1])
        hom = (fs[:n0, :n0] @ bases.hom[0], fs[n0:, n0:] @ bases.hom[1])
        return RefBases(coh, hom, bases.coh_id, bases.hom_id)

    def lemma_generator(self, t: float):
        return self.lemma_gen if self.lemma_gen is not None else self.gen_d + self.gen_ds

    transport_name = "conjugators: cohomology by exp(t g_d), homology by exp(-t g_s)"


def metric_family(base: BiComplex, alpha) -> ConjugationFamily:
    """d fixed, d*(u) = exp(-u alpha) d* exp(u alpha)."""
    n = base.n0 + base.n1
    a = _even(base.n0, n, alpha)
    return ConjugationFamily(base, np.zeros((n, n), complex), a, "metric", a)


def flux_family(base: BiComplex, beta, sides: str = "both") -> ConjugationFamily:
    """d(v) = exp(v beta) d exp(-v beta) and, with sides="both",
    d*(v) = exp(-v beta) d* exp(v beta). sides="d" keeps d* fixed."""
    n = base.n0 + base.n1
    b = _even(base.n0, n, beta)
    if sides not in ("both", "d"):
        raise ValueError("sides must be 'both' or 'd'")
    gs = b if sides == "both" else np.zeros((n, n), complex)
    return ConjugationFamily(base, b, gs, "flux" if sides == "both" else "flux-d", b)


@dataclass(frozen=True, eq=False)
class TorusMetricFamily:
    """Torus model along a path of metrics g(u) = g0 + u * gdot.

    d = H^ is fixed and d*(u) = Gamma(u) d Gamma(u). Locally this is a
    metric family with generator alpha(u) = Gamma(u)^{-1} dGamma/du.
    The homology reference basis is Gamma(u) applied to the cohomology
    basis.
    """

    m: int
    flux: dict
    g0: np.ndarray
    gdot: np.ndarray
    orientation: int = 1
    kind: str = "torus-metric"
    h: float = 1e-3
    _base: BiComplex | None = field(default=None, repr=False)

    def metric(self, u: float) -> np.ndarray:
        return models.check_metric(self.g0 + u * self.gdot, self.m)

    def gamma(self, u: float) -> np.ndarray:
        return models.chirality(self.m, self.metric(u), self.orientation)

    def at(self, u: float) -> BiComplex:
        return models.torus_model(self.m, self.metric(u), self.flux, self.orientation).with_labels(
            family=self.kind, t=float(u)
        )

    @property
    def base(self) -> BiComplex:
        return self.at(0.0)

    def alpha(self, u: float) -> np.ndarray:
        """Gamma(u)^{-1} Gamma'(u), with a five-point derivative."""
        h = self.h
        gp = (
            -self.gamma(u + 2 * h) + 8 * self.gamma(u + h) - 8 * self.gamma(u - h) + self.gamma(u - 2 * h)
        ) / (12 * h)
        return self.gamma(u) @ gp

    def generators(self, u: float):
        n = 2 ** self.m
        return np.zeros((n, n), complex), self.alpha(u)

    def lemma_generator(self, u: float):
        return self.alpha(u)

    def reference_bases(self, u: float) -> RefBases:
        c = models.torus_model(self.m, None, self.flux)
        z = tuple(s.H for s in split(c).cohom)
        n0 = models.even_dim(self.m)
        zfull = np.zeros((2 ** self.m, z[0].shape[1] + z[1].shape[1]), complex)
        zfull[:n0, : z[0].shape[1]] = z[0]
        zfull[n0:, z[0].shape[1]:] = z[1]
        w = self.gamma(u) @ zfull
        # Gamma shifts parity by m: split the images by where they land
        cols0 = [j for j in range(w.shape[1]) if np.linalg.norm(w[:n0, j]) > 0]
        cols1 = [j for j in range(w.shape[1]) if np.linalg.norm(w[n0:, j]) > 0]
        hom = (w[:n0, cols0], w[n0:, cols1])
        return RefBases(z, hom, "torus-lift", "gamma-lift")

    def transport(self, bases: RefBases, t0: float, t: float) -> RefBases:
        n0 = models.even_dim(self.m)
        g = self.gamma(t) @ self.gamma(t0)
        hom = (g[:n0, :n0] @ bases.hom[0], g[n0:, n0:] @ bases.hom[1])
        return RefBases(bases.cohom, hom, bases.coh_id, bases.hom_id)

    transport_name = "cohomology fixed, homology by Gamma(u) Gamma(u0)"


def torus_metric_family(m, flux, g0=None, gdot=None, orientation=1) -> TorusMetricFamily:
    g0 = np.eye(m) if g0 is None else np.asarray(g0, float)
    gdot = np.zeros((m, m)) if gdot is None else np.asarray(gdot, float)
    return TorusMetricFamily(m, models.parse_form(flux, m), g0, gdot, orientation)


def top_cut(c: BiComplex) -> float:
    mags = [np.abs(np.linalg.eigvals(lap)).max() for lap in laplacian(c) if lap.size]
    return 1.5 * max(mags, default=0.0) + 1.0


def predicted_rate(family, t0: float, lam: float | None = None, exact: bool = False) -> complex:
    """The variation coefficient -str(gen | C_[0,lambda]) at t0.

    With exact=False the lemma's operator is used (alpha for metric
    families, beta for flux families). With exact=True the generator sum
    g_d + g_s of the conjugation law is used, which is the true first-order
    rate; the two differ by a factor 2 for the two-sided flux law.
    """
    c = family.at(t0)
    lam = top_cut(c) if lam is None else lam
    s = spectral_truncate(c, lam)
    if exact:
        gd, gs = family.generators(t0)
        gen = gd + gs
    else:
        gen = family.lemma_generator(t0)
    return -supertrace(_blocks(gen, c.n0), s.projectors, compress=True)


@dataclass(frozen=True)
class Rates:
    low: complex
    full: complex
    tail: complex


def _stencil_log(a: complex, b: complex) -> complex:
    """log(a / b) on the principal branch; refuse big phase jumps."""
    r = a / b
    if abs(cmath.phase(r)) > STENCIL_JUMP:
        raise StencilError(f"phase jumps by {cmath.phase(r):.3f} rad across the stencil; refine eps")
    return cmath.log(r)


def fd_rates(family, t0: float, eps: float, lam: float | None = None, bases: RefBases | None = None,
             theta: float = math.pi) -> Rates:
    """Centered differences of log tau (low part, full assembly, tail factor)."""
    c0 = family.at(t0)
    lam = top_cut(c0) if lam is None else lam
    if bases is None:
        bases = family.reference_bases(t0) if hasattr(family, "reference_bases") else default_bases(c0)
    vals = {}
    for t in (t0 - eps, t0, t0 + eps):
        b = family.transport(bases, t0, t)
        vals[t] = torsion_truncated(family.at(t), lam, b, theta)
    out = []
    for attr in ("low_coord", "coord", "tail_factor"):
        lo, mid, hi = (getattr(vals[t], attr) for t in (t0 - eps, t0, t0 + eps))
        out.append((_stencil_log(hi, mid) + _stencil_log(mid, lo)) / (2 * eps))
    return Rates(*out)


def fd_rate(family, t0: float, eps: float, lam: float | None = None, part: str = "low",
            bases: RefBases | None = None, theta: float = math.pi) -> complex:
    """Centered finite difference of log tau along the family."""
    r = fd_rates(family, t0, eps, lam, bases, theta)
    return {"low": r.low, "full": r.full, "tail": r.tail}[part]


def _row(family, t, lam, eps, theta):
    row = {"t": float(t), "transport": family.transport_name}
    try:
        pred = predicted_rate(family, t, lam)
        exact = predicted_rate(family, t, lam, exact=True)
        r = fd_rates(family, t, eps, lam, None, theta)
        mis = abs(r.low - pred)
        row.update(
            predicted=pred,
            exact_rate=exact,
            fd=r.low,
            abs_mismatch=mis,
            rel_mismatch=mis / max(abs(pred), 1.0),
            exact_mismatch=abs(r.low - exact),
            full_rate=r.full,
            local_residual=r.full - r.low,
            error=None,
        )
    except CMTorsionError as exc:
        row.update(error=f"{type(exc).__name__}: {exc}")
    return row


def variation_report(family, grid, lam=None, eps=1e-3, theta=math.pi, threads=1) -> list:
    """One row per grid point, in grid order; failures are reported inline."""
    grid = [float(t) for t in grid]
    if not grid:
        return []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda t: _row(family, t, lam, eps, theta), grid))
    return [_row(family, t, lam, eps, theta) for t in grid]
