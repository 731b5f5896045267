"""Concrete bi-complexes.

* The translation-invariant torus model: constant forms Lambda(C^m) with
  the untwisted differential identically zero, twisted by a constant odd
  flux H, with d = H^ and d* = Gamma d Gamma for the metric chirality.
* Flux twisting, sharp-conjugation and the e^B intertwiner.
* Wrappers for user supplied Dolbeault-type blocks.
* Seeded random complexes with prescribed cohomology.

Wedge monomials are index tuples (0-based, increasing). The basis order is
fixed: even-degree monomials first, then odd; inside a parity by degree,
then lexicographically. With this order every operator on Lambda(C^m)
splits directly into the four blocks of a BiComplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import numkit
from .bicomplex import BiComplex, split, validate
from .errors import (
    ClosednessError,
    FeasibilityError,
    FluxDegreeError,
    InvolutionError,
    MetricError,
    ParityError,
    ShapeError,
    ValidationError,
)

FLUX_TOL = 1e-11


# -- wedge algebra ---------------------------------------------------------

@lru_cache(maxsize=None)
def monomials(m: int) -> tuple:
    """All 2^m monomials in the fixed (parity, degree, lex) order."""
    out = []
    for parity in (0, 1):
        for q in range(parity, m + 1, 2):
            out.extend(combinations(range(m), q))
    return tuple(out)


@lru_cache(maxsize=None)
def _index(m: int) -> dict:
    return {mono: i for i, mono in enumerate(monomials(m))}


def even_dim(m: int) -> int:
    return 2 ** (m - 1) if m > 0 else 1


def _perm_sign(seq) -> int:
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def wedge_product(a: tuple, b: tuple):
    """e^a ^ e^b as (sign, monomial); sign 0 when they overlap."""
    if set(a) & set(b):
        return 0, ()
    cat = a + b
    return _perm_sign(cat), tuple(sorted(cat))


def parse_form(spec, m: int | None = None) -> dict:
    """Parse "123:2.0,145:1.0" (1-based digit indices) into {(0,1,2): 2.0, ...}.

    A dict is passed through after normalizing keys. Indices are single
    digits, so this string syntax covers m <= 9.
    """
    if isinstance(spec, dict):
        out = {tuple(sorted(k)): complex(v) for k, v in spec.items()}
    else:
        out = {}
        spec = str(spec).strip()
        for item in filter(None, (s.strip() for s in spec.split(","))):
            try:
                key, val = item.split(":")
                idx = [int(ch) - 1 for ch in key.strip()]
                coeff = complex(val.strip().replace("i", "j"))
            except ValueError as exc:
                raise ValueError(f"cannot parse form term {item!r}") from exc
            if len(set(idx)) != len(idx) or min(idx, default=0) < 0:
                raise ValueError(f"bad index set in {item!r}")
            sign = _perm_sign(idx)
            k = tuple(sorted(idx))
            out[k] = out.get(k, 0) + sign * coeff
    if m is not None:
        for k in out:
            if k and max(k) >= m:
                raise ValueError(f"form term {k} needs dimension > {m}")
    return out


def wedge_matrix(m: int, form: dict) -> np.ndarray:
    """Matrix of left multiplication w -> form ^ w on Lambda(C^m)."""
    idx = _index(m)
    mons = monomials(m)
    n = len(mons)
    out = np.zeros((n, n), complex)
    for key, coeff in form.items():
        if coeff == 0:
            continue
        for j, mono in enumerate(mons):
            s, res = wedge_product(key, mono)
            if s:
                out[idx[res], j] += s * coeff
    return out


def form_degrees(form: dict) -> set:
    return {len(k) for k, v in form.items() if v != 0}


# -- metric and chirality --------------------------------------------------

def check_metric(g, m: int) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (m, m):
        raise MetricError(f"metric must be {m}x{m}, got {g.shape}")
    if not np.allclose(g, g.T, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise MetricError("metric is not symmetric")
    if m and np.linalg.eigvalsh(g).min() <= 0:
        raise MetricError("metric is not positive definite")
    return g


def parse_symmetric(spec, m: int) -> np.ndarray:
    """"I", a diagonal "1,2,1" (or "diag(1,2,1)"), or rows "2,0,0;0,1,0;0,0,1"."""
    if not isinstance(spec, str):
        g = np.asarray(spec, dtype=float)
    else:
        s = spec.strip()
        if s.upper() in ("I", "ID", "EUCLIDEAN", ""):
            return np.eye(m)
        if s.lower().startswith("diag(") and s.endswith(")"):
            s = s[5:-1]
        try:
            if ";" in s:
                g = np.array([[float(x) for x in row.split(",")] for row in s.split(";")])
            else:
                g = np.diag([float(x) for x in s.split(",")])
        except ValueError as exc:
            raise MetricError(f"cannot parse matrix {spec!r}") from exc
    if g.shape != (m, m) or not np.allclose(g, g.T):
        raise MetricError(f"expected a symmetric {m}x{m} matrix, got {spec!r}")
    return g


def parse_metric(spec, m: int) -> np.ndarray:
    return check_metric(parse_symmetric(spec, m), m)


def hodge_star(m: int, g, orientation: int = 1) -> np.ndarray:
    """Hodge star on Lambda(C^m) for the metric g.

    Determined by a ^ *b = <a, b> vol with the inner product induced by
    g^{-1} on forms and vol = orientation * sqrt(det g) e^{1..m}.
    """
    g = check_metric(g, m)
    if orientation not in (1, -1):
        raise MetricError("orientation must be +1 or -1")
    ginv = np.linalg.inv(g) if m else np.zeros((0, 0))
    vol = orientation * math.sqrt(np.linalg.det(g)) if m else 1.0
    idx = _index(m)
    full = tuple(range(m))
    n = 2 ** m
    star = np.zeros((n, n), complex)
    for q in range(m + 1):
        deg = list(combinations(range(m), q))
        for a in deg:
            comp = tuple(i for i in full if i not in a)
            eps, _ = wedge_product(a, comp)
            for b in deg:
                minor = np.linalg.det(ginv[np.ix_(a, b)]) if q else 1.0
                star[idx[comp], idx[b]] += eps * vol * minor
    return star


def chirality_rq(m: int):
    r = (m + 1) // 2 if m % 2 else m // 2
    return r


def chirality(m: int, g=None, orientation: int = 1) -> np.ndarray:
    """Gamma w = i^r (-1)^{q(q+1)/2} * w on degree-q forms; Gamma^2 = Id."""
    g = np.eye(m) if g is None else g
    star = hodge_star(m, g, orientation)
    r = chirality_rq(m)
    scale = np.array([(1j ** r) * (-1) ** (len(mono) * (len(mono) + 1) // 2) for mono in monomials(m)])
    return star * scale[None, :]


# -- flux ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FluxOperator:
    h: np.ndarray
    degrees: tuple
    source: str = "matrix"
    form: dict = field(default_factory=dict)

    @property
    def degree(self):
        return max(self.degrees) if self.degrees else 0


def flux_operator(m: int, form) -> FluxOperator:
    """Wedge by a constant odd form of degree >= 3."""
    form = parse_form(form, m)
    degs = form_degrees(form)
    bad = sorted(q for q in degs if q % 2 == 0 or q < 3)
    if bad:
        raise FluxDegreeError(f"flux must be odd of degree >= 3; got degree(s) {bad}")
    return FluxOperator(wedge_matrix(m, form), tuple(sorted(degs)), "wedge", form)


def collapse_graded(blocks):
    """Z-graded differential [d_0: C^0->C^1, d_1: C^1->C^2, ...] as one
    operator on C^even + C^odd (even degrees first, each in degree order).

    Returns (n0, full matrix).
    """
    blocks = [numkit.as_cmatrix(b, f"d_{q}") for q, b in enumerate(blocks)]
    dims = [blocks[0].shape[1]] if blocks else [0]
    for q, b in enumerate(blocks):
        if b.shape[1] != dims[q]:
            raise ShapeError(f"d_{q} has {b.shape[1]} columns, expected {dims[q]}")
        dims.append(b.shape[0])
    order = [q for q in range(len(dims)) if q % 2 == 0] + [q for q in range(len(dims)) if q % 2]
    offs, pos = {}, 0
    for q in order:
        offs[q] = pos
        pos += dims[q]
    full = np.zeros((pos, pos), complex)
    for q, b in enumerate(blocks):
        full[offs[q + 1]:offs[q + 1] + dims[q + 1], offs[q]:offs[q] + dims[q]] = b
    n0 = sum(dims[q] for q in order if q % 2 == 0)
    return n0, full


def flux_twist(base, h, ds=None, tol=FLUX_TOL) -> BiComplex:
    """The complex with differential d + h.

    ``base`` is a BiComplex (its d* is kept unless ``ds`` is given) or a
    list of Z-graded blocks (collapsed to Z2; d* defaults to zero). ``h`` is
    a FluxOperator or a full matrix on the collapsed space.
    """
    if isinstance(base, BiComplex):
        n0, d = base.n0, base.full("d")
        ds_full = base.full("ds") if ds is None else numkit.as_cmatrix(ds, "ds")
        labels = dict(base.labels)
    else:
        n0, d = collapse_graded(base)
        ds_full = np.zeros_like(d) if ds is None else numkit.as_cmatrix(ds, "ds")
        labels = {}
    hm = h.h if isinstance(h, FluxOperator) else numkit.as_cmatrix(h, "h")
    if hm.shape != d.shape:
        raise ShapeError(f"flux has shape {hm.shape}, complex has {d.shape}")
    if np.any(hm[:n0, :n0]) or np.any(hm[n0:, n0:]):
        raise ParityError("flux operator must flip parity")
    scale = max(numkit.norm2(d), numkit.norm2(hm), 1.0) ** 2
    sq = numkit.norm2(hm @ hm)
    anti = numkit.norm2(d @ hm + hm @ d)
    if sq > tol * scale:
        raise ClosednessError(f"flux does not square to zero (residual {sq:.3e})")
    if anti > tol * scale:
        raise ClosednessError(f"flux is not closed: |dh + hd| = {anti:.3e}")
    return BiComplex.from_full(n0, d + hm, ds_full, {**labels, "flux": "twisted"})


def sharp_conjugate(gamma, op, tol=1e-12) -> np.ndarray:
    """Gamma op Gamma, for an involution Gamma."""
    gamma = numkit.as_cmatrix(gamma, "gamma")
    op = numkit.as_cmatrix(op, "op")
    n = gamma.shape[0]
    if gamma.shape != (n, n) or op.shape != (n, n):
        raise ShapeError(f"gamma {gamma.shape} and op {op.shape} must be square and equal")
    res = numkit.norm2(gamma @ gamma - np.eye(n))
    if res > tol * max(1.0, numkit.norm2(gamma) ** 2):
        raise InvolutionError(f"Gamma^2 != Id (residual {res:.3e})")
    return gamma @ op @ gamma


def eps_b(m: int, form) -> np.ndarray:
    """Matrix of w -> e^B ^ w for an even form B."""
    form = parse_form(form, m)
    odd = sorted(q for q in form_degrees(form) if q % 2)
    if odd:
        raise ParityError(f"B must be even; got degree(s) {odd}")
    b0 = form.pop((), 0)
    nil = wedge_matrix(m, form)
    n = 2 ** m
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    # nil is nilpotent of order <= m/2 + 1, so the series is finite
    for k in range(1, m // 2 + 2):
        term = term @ nil / k
        if not np.any(term):
            break
        out = out + term
    return np.exp(b0) * out


# -- torus model -----------------------------------------------------------

def torus_model(m: int, g=None, flux=None, orientation: int = 1) -> BiComplex:
    """Translation-invariant forms on the m-torus twisted by a constant flux.

    d = H^ and d* = Gamma d Gamma; dims are (2^{m-1}, 2^{m-1}).
    """
    g = np.eye(m) if g is None else parse_metric(g, m)
    form = parse_form(flux or {}, m)
    if any(v != 0 for v in form.values()):
        h = flux_operator(m, form).h
    else:
        h = np.zeros((2 ** m, 2 ** m), complex)
    gam = chirality(m, g, orientation)
    ds = sharp_conjugate(gam, h)
    labels = {"model": "torus", "m": m, "flux": _form_label(form), "orientation": orientation}
    return BiComplex.from_full(even_dim(m), h, ds, labels)


def _form_label(form: dict) -> str:
    parts = []
    for k in sorted(form, key=lambda k: (len(k), k)):
        v = complex(form[k])
        val = repr(v.real) if v.imag == 0 else f"{v.real!r}{v.imag:+}i"
        parts.append("".join(str(i + 1) for i in k) + ":" + val)
    return ",".join(parts)


def torus_cohomology_basis(m: int, flux) -> tuple:
    """Orthonormal representatives of H(H^) per parity (ambient vectors)."""
    c = torus_model(m, None, flux)
    sd = split(c)
    return tuple(s.H for s in sd.cohom)


# -- wrappers and generators -----------------------------------------------

def dolbeault_wrap(p: int, dbar, dbar_star, tol=1e-10) -> BiComplex:
    """Label user blocks (d_eo, d_oe), (ds_eo, ds_oe) as the p-th Dolbeault-type complex."""
    (d_eo, d_oe), (ds_eo, ds_oe) = dbar, dbar_star
    c = BiComplex(d_eo, d_oe, ds_eo, ds_oe, {"model": "dolbeault", "p": int(p)})
    rep = validate(c, tol)
    if not rep.passed:
        raise ValidationError(f"blocks fail square-zero checks: {rep.failures()}")
    return c


PROFILES = ("generic", "well", "spread")


def _rnd(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _block(rng, r, profile):
    if r == 0:
        return np.zeros((0, 0), complex)
    if profile == "generic":
        return _rnd(rng, r, r)
    u, _ = np.linalg.qr(_rnd(rng, r, r))
    v, _ = np.linalg.qr(_rnd(rng, r, r))
    if profile == "well":
        s = rng.uniform(1.0, 2.0, r)
    else:
        s = 10.0 ** rng.uniform(-2, 2, r)
    return (u * s) @ v.conj().T


def _change(rng, n, profile):
    if n == 0:
        return np.zeros((0, 0), complex), np.zeros((0, 0), complex)
    if profile == "well":
        p, _ = np.linalg.qr(_rnd(rng, n, n))
        p = p @ np.diag(rng.uniform(1.0, 1.5, n))
    else:
        p = _rnd(rng, n, n) + 2 * np.eye(n)
    return p, np.linalg.inv(p)


def _differential(rng, n0, n1, r0, r1, profile):
    """Square-zero Z2 differential with rank r0 on C^0 -> C^1 and r1 back.

    In an adapted basis C^0 = A0(r0) + B0(r1) + H0 and C^1 = A1(r1) +
    B1(r0) + H1, each map sends A bijectively onto the B of the other
    parity; random changes of basis hide the structure.
    """
    p0, p0i = _change(rng, n0, profile)
    p1, p1i = _change(rng, n1, profile)
    eo = np.zeros((n1, n0), complex)
    oe = np.zeros((n0, n1), complex)
    eo[r1:r1 + r0, :r0] = _block(rng, r0, profile)
    oe[r0:r0 + r1, :r1] = _block(rng, r1, profile)
    return p1 @ eo @ p0i, p0 @ oe @ p1i


def random_bicomplex(dims, target_betti=(0, 0), spectral_profile="generic", seed=0) -> BiComplex:
    """Seeded random complex whose d has cohomology dims ``target_betti``.

    d* is an independent random square-zero differential with the ranks
    swapped, which keeps the Laplacian generically invertible off the
    cohomology.
    """
    n0, n1 = (int(x) for x in dims)
    b0, b1 = (int(x) for x in target_betti)
    if spectral_profile not in PROFILES:
        raise FeasibilityError(f"unknown spectral profile {spectral_profile!r}; use one of {PROFILES}")
    if min(n0, n1, b0, b1) < 0 or b0 > n0 or b1 > n1:
        raise FeasibilityError(f"betti {target_betti} impossible for dims {dims}")
    if n0 - b0 != n1 - b1:
        raise FeasibilityError(f"betti {target_betti} violates b0 - b1 = n0 - n1 for dims {dims}")
    rng = np.random.default_rng(seed)
    total = n0 - b0
    r0 = int(rng.integers(0, total + 1))
    r1 = total - r0
    d_eo, d_oe = _differential(rng, n0, n1, r0, r1, spectral_profile)
    ds_eo, ds_oe = _differential(rng, n0, n1, r1, r0, spectral_profile)
    labels = {"model": "random", "seed": int(seed), "profile": spectral_profile, "betti": [b0, b1]}
    c = BiComplex(d_eo, d_oe, ds_eo, ds_oe, labels)
    got = split(c).betti()
    if got != (b0, b1):
        raise FeasibilityError(f"generator produced betti {got}, wanted {(b0, b1)} (seed {seed})")
    return c
