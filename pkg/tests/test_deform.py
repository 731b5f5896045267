import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmtorsion import models
from cmtorsion.deform import (
    flux_family,
    fd_rate,
    metric_family,
    predicted_rate,
    supertrace,
    torus_metric_family,
    variation_report,
)
from cmtorsion.errors import RestrictionError, StencilError
from cmtorsion.torsion import default_bases

from conftest import crandn

EPS = 1e-3


def even_gen(rng, n0, n1, size=0.3):
    n = n0 + n1
    g = np.zeros((n, n), complex)
    g[:n0, :n0] = size * crandn(rng, n0, n0)
    g[n0:, n0:] = size * crandn(rng, n1, n1)
    return g


def acyclic(seed, nmax=5):
    n = 1 + seed % nmax
    return models.random_bicomplex((n, n), (0, 0), "well", seed)


# supertrace

def test_supertrace_examples():
    assert supertrace((np.eye(3), np.eye(2))) == 1
    assert supertrace((np.array([[2.0]]), np.array([[5.0]]))) == -3
    assert supertrace(np.diag([2.0, 5.0]), n0=1) == -3


def test_supertrace_rank_one_projector():
    rng = np.random.default_rng(0)
    lam = np.diag([1.0, 2.0, 3.0])
    alpha = lam + 0j
    p = np.zeros((3, 3))
    p[1, 1] = 1
    assert supertrace((alpha, np.zeros((0, 0))), (p, np.zeros((0, 0)))) == pytest.approx(2.0)
    with pytest.raises(RestrictionError):
        supertrace((crandn(rng, 3, 3), np.zeros((0, 0))), (p, np.zeros((0, 0))))


def test_supertrace_rejects_odd_operator():
    with pytest.raises(RestrictionError):
        supertrace(np.ones((2, 2)), n0=1)


# predicted_rate

def test_predicted_rate_examples():
    base = acyclic(3)
    rng = np.random.default_rng(1)
    beta = even_gen(rng, base.n0, base.n1)
    f = flux_family(base, beta)
    assert predicted_rate(f, 0.0) == pytest.approx(-supertrace(beta, n0=base.n0))
    assert predicted_rate(flux_family(base, None), 0.0) == 0
    n = base.n0
    m = metric_family(base, 0.7 * np.eye(2 * n))
    assert abs(predicted_rate(m, 0.0)) < 1e-12


def test_exact_rate_is_twice_lemma_for_two_sided_flux():
    base = acyclic(4)
    beta = even_gen(np.random.default_rng(2), base.n0, base.n1)
    f = flux_family(base, beta)
    assert predicted_rate(f, 0.0, exact=True) == pytest.approx(2 * predicted_rate(f, 0.0))


# families

@given(st.integers(0, 10 ** 6), st.floats(-1, 1))
def test_conjugation_preserves_square_zero(seed, t):
    base = acyclic(seed)
    beta = even_gen(np.random.default_rng(seed), base.n0, base.n1)
    c = flux_family(base, beta).at(t)
    d, ds = c.full("d"), c.full("ds")
    scale = max(np.linalg.norm(d, 2), np.linalg.norm(ds, 2), 1.0) ** 2
    assert np.linalg.norm(d @ d, 2) <= 1e-11 * scale
    assert np.linalg.norm(ds @ ds, 2) <= 1e-11 * scale


def test_flux_first_order_law():
    base = acyclic(2)
    beta = even_gen(np.random.default_rng(5), base.n0, base.n1)
    f = flux_family(base, beta)
    h = 1e-5
    dd = (f.at(h).full("d") - f.at(-h).full("d")) / (2 * h)
    d = base.full("d")
    assert np.abs(dd - (beta @ d - d @ beta)).max() <= 1e-6 * max(1.0, np.abs(d).max())


def test_constant_family_rate_zero():
    f = flux_family(acyclic(1), None)
    assert fd_rate(f, 0.0, EPS) == 0


@pytest.mark.parametrize("seed", range(20))
def test_metric_lemma(seed):
    base = acyclic(seed)
    f = metric_family(base, even_gen(np.random.default_rng(seed), base.n0, base.n1))
    pred = predicted_rate(f, 0.0)
    assert abs(fd_rate(f, 0.0, EPS) - pred) <= 10 * EPS ** 2 * max(1.0, abs(pred))


@pytest.mark.parametrize("seed", range(20))
def test_flux_exact_rate(seed):
    base = acyclic(seed)
    f = flux_family(base, even_gen(np.random.default_rng(seed + 50), base.n0, base.n1))
    pred = predicted_rate(f, 0.0, exact=True)
    assert abs(fd_rate(f, 0.0, EPS) - pred) <= 10 * EPS ** 2 * max(1.0, abs(pred))


@pytest.mark.parametrize("seed", range(10))
def test_one_sided_flux_matches_lemma(seed):
    base = acyclic(seed)
    f = flux_family(base, even_gen(np.random.default_rng(seed + 99), base.n0, base.n1), sides="d")
    pred = predicted_rate(f, 0.0)
    assert abs(fd_rate(f, 0.0, EPS) - pred) <= 10 * EPS ** 2 * max(1.0, abs(pred))


def test_flux_dims22_seed3_richardson():
    base = models.random_bicomplex((2, 2), (0, 0), "well", 3)
    f = flux_family(base, even_gen(np.random.default_rng(3), 2, 2))
    pred = predicted_rate(f, 0.0, exact=True)
    # on the whole acyclic complex log tau is linear in v, so both steps are exact up to roundoff
    for eps in (1e-2, 5e-3):
        assert abs(fd_rate(f, 0.0, eps) - pred) <= 10 * eps ** 2 * max(1.0, abs(pred))


def test_metric_fd_error_is_second_order():
    c = models.random_bicomplex((4, 4), (1, 1), "well", 11)
    f = metric_family(c, even_gen(np.random.default_rng(12), 4, 4))
    lam = _gap_cut(c)
    pred = predicted_rate(f, 0.0, lam)
    e1 = abs(fd_rate(f, 0.0, 1e-2, lam) - pred)
    e2 = abs(fd_rate(f, 0.0, 5e-3, lam) - pred)
    assert 3.0 < e1 / e2 < 5.0


def _gap_cut(c):
    ev = sorted(abs(np.linalg.eigvals(c.full("d") @ c.full("ds") + c.full("ds") @ c.full("d"))))
    return next(0.5 * (a + b) for a, b in zip(ev, ev[1:]) if b - a > 0.1 * b and a > 1e-8)


def test_lemma_on_truncated_part_non_acyclic():
    c = models.random_bicomplex((4, 4), (1, 1), "well", 11)
    rng = np.random.default_rng(11)
    f = metric_family(c, even_gen(rng, 4, 4))
    cut = _gap_cut(c)
    pred = predicted_rate(f, 0.0, cut)
    assert abs(fd_rate(f, 0.0, EPS, cut) - pred) <= 10 * EPS ** 2 * max(1.0, abs(pred))


def test_stencil_error_on_coarse_eps():
    base = models.random_bicomplex((2, 2), (0, 0), "well", 2)
    beta = np.zeros((4, 4), complex)
    beta[:2, :2] = 40j * np.eye(2)
    f = metric_family(base, beta)
    with pytest.raises(StencilError):
        fd_rate(f, 0.0, 0.1)


def test_transport_keeps_cycles():
    base = models.random_bicomplex((3, 3), (1, 1), "well", 8)
    f = flux_family(base, even_gen(np.random.default_rng(8), 3, 3))
    b = f.transport(default_bases(base), 0.0, 0.4)
    c = f.at(0.4)
    assert np.abs(c.d_eo @ b.cohom[0]).max() < 1e-10
    assert np.abs(c.ds_eo @ b.hom[0]).max() < 1e-10


# torus metric paths

def test_torus_alpha_matches_star():
    f = torus_metric_family(3, "123:2.0", np.eye(3), np.diag([1.0, 0, 0]))
    u, h = 0.2, 1e-5
    star = lambda s: models.hodge_star(3, f.metric(s))
    dstar = (star(u + h) - star(u - h)) / (2 * h)
    ref = np.linalg.solve(star(u), dstar)
    assert np.abs(f.alpha(u) - ref).max() < 1e-8


@pytest.mark.parametrize("m", [3, 5])
def test_torus_full_rate_zero(m):
    f = torus_metric_family(m, "123:2.0", np.eye(m), np.diag([1.0] + [0.0] * (m - 1)))
    for u in (0.0, 0.25, 0.5):
        assert abs(fd_rate(f, u, EPS, part="full")) <= 1e-6


def test_torus_homology_basis_is_cycle():
    f = torus_metric_family(3, "123:2.0", np.eye(3), np.diag([1.0, 0.5, 0]))
    c = f.at(0.3)
    b = f.reference_bases(0.3)
    assert np.abs(c.ds_eo @ b.hom[0]).max() < 1e-12
    assert np.abs(c.ds_oe @ b.hom[1]).max() < 1e-12


def test_variation_report_rows():
    f = torus_metric_family(3, "123:2.0", np.eye(3), np.diag([1.0, 0, 0]))
    assert variation_report(f, []) == []
    rows = variation_report(f, [0.0, 0.25, 0.5], threads=2)
    assert [r["t"] for r in rows] == [0.0, 0.25, 0.5]
    for r in rows:
        assert r["error"] is None
        assert abs(r["full_rate"]) <= 1e-6
        assert "transport" in r
    assert rows == variation_report(f, [0.0, 0.25, 0.5], threads=1)


def test_variation_report_inlines_errors():
    base = models.random_bicomplex((2, 2), (0, 0), "well", 2)
    f = metric_family(base, np.zeros((4, 4)))
    lap_ev = np.abs(np.linalg.eigvals(base.full("d") @ base.full("ds") + base.full("ds") @ base.full("d")))
    rows = variation_report(f, [0.0], lam=float(lap_ev[0]))
    assert rows[0]["error"].startswith("CutCollisionError")
