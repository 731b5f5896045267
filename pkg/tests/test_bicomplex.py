import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmtorsion import numkit
from cmtorsion.bicomplex import (
    BiComplex,
    cohomology,
    homology,
    laplacian,
    plus_minus_split,
    spectral_truncate,
    split,
    valid_cuts,
    validate,
)
from cmtorsion.errors import CutCollisionError, ShapeError
from cmtorsion.models import random_bicomplex, torus_model

from conftest import random_general


def mrank(a):
    return 0 if a.size == 0 else int(np.linalg.matrix_rank(a))


def test_validate_examples(e1):
    assert validate(e1).passed
    bad = BiComplex([[1]], [[1]], [[0]], [[0]])
    rep = validate(bad)
    assert not rep.passed and set(rep.failures()) == {"d_oe*d_eo", "d_eo*d_oe"}
    assert validate(BiComplex.zero(2, 3)).passed


def test_shape_checks():
    with pytest.raises(ShapeError):
        BiComplex(np.zeros((1, 2)), np.zeros((1, 1)), np.zeros((1, 2)), np.zeros((2, 1)))


def test_laplacian_examples(e1, diag_example):
    de, do = laplacian(e1)
    assert de[0, 0] == 6 and do[0, 0] == 6
    de, do = laplacian(BiComplex.zero(2, 1))
    assert not de.any() and not do.any()
    de, _ = laplacian(diag_example)
    assert np.allclose(de, np.diag([6, 1]))


def test_cohomology_examples(e1):
    sd = split(BiComplex.zero(2, 1))
    assert sd.betti() == (2, 1) and sd.hom_betti() == (2, 1)
    sd = split(e1)
    assert sd.betti() == (0, 0) and sd.hom_betti() == (0, 0)
    sd = split(torus_model(3, None, "123:2.0"))
    assert sd.betti() == (3, 3)


@given(st.integers(0, 5000))
def test_split_invariants(seed):
    c = random_general(seed)
    for parts, op in ((cohomology(c)[0], c.d), (homology(c)[0], c.ds)):
        for k in (0, 1):
            p = parts[k]
            m = np.hstack([p.B, p.H, p.A])
            assert m.shape[0] == m.shape[1] == c.dim(k)
            assert mrank(m) == c.dim(k)
            # B + H lies in the kernel, A maps injectively onto the next B
            assert numkit.norm2(op(k) @ np.hstack([p.B, p.H])) <= 1e-9 * c.scale()
            nxt = parts[1 - k]
            assert mrank(op(k) @ p.A) == p.A.shape[1] == nxt.B.shape[1]


@given(st.integers(0, 5000))
def test_betti_rank_nullity(seed):
    c = random_general(seed)
    sd = split(c)
    r_eo, r_oe = mrank(c.d_eo), mrank(c.d_oe)
    assert sd.betti() == (c.n0 - r_eo - r_oe, c.n1 - r_oe - r_eo)


@given(st.integers(0, 5000))
def test_differentials_commute_with_laplacian(seed):
    c = random_general(seed)
    de, do = laplacian(c)
    scale = max(numkit.norm2(de), 1.0) * c.scale()
    for a, b, x in ((c.d_eo, c.d_eo, None), (c.ds_eo, c.ds_eo, None)):
        assert numkit.norm2(a @ de - do @ b) <= 1e-10 * scale
    assert numkit.norm2(c.d_oe @ do - de @ c.d_oe) <= 1e-10 * scale
    assert numkit.norm2(c.ds_oe @ do - de @ c.ds_oe) <= 1e-10 * scale


def test_truncate_examples(e1, diag_example):
    s = spectral_truncate(e1, 1.0)
    assert s.low_dims == (0, 0) and s.high_dims == (1, 1)
    s = spectral_truncate(diag_example, 2.0)
    assert s.low_dims == (1, 1) and s.high_dims == (1, 1)
    s = spectral_truncate(diag_example, 100.0)
    assert s.high_dims == (0, 0)


def test_truncate_collision(e1):
    with pytest.raises(CutCollisionError) as info:
        spectral_truncate(e1, 6.0)
    assert info.value.eigenvalue == pytest.approx(6)


@given(st.integers(0, 5000))
def test_truncation_invariance_and_nesting(seed):
    c = random_general(seed)
    cuts = valid_cuts(c, 4)
    splits = [spectral_truncate(c, lam) for lam in cuts]
    scale = c.scale()
    for s in splits:
        for k in (0, 1):
            p, pn = s.projectors[k], s.projectors[1 - k]
            assert numkit.norm2(pn @ c.d(k) - c.d(k) @ p) <= 1e-8 * scale * max(numkit.norm2(p), 1)
            assert numkit.norm2(pn @ c.ds(k) - c.ds(k) @ p) <= 1e-8 * scale * max(numkit.norm2(p), 1)
    for fine, coarse in zip(splits, splits[1:]):
        for k in (0, 1):
            prod = coarse.projectors[k] @ fine.projectors[k]
            assert numkit.norm2(prod - fine.projectors[k]) <= 1e-8 * max(numkit.norm2(coarse.projectors[k]), 1)


def test_plus_minus_examples(e1, diag_example):
    s = spectral_truncate(e1, 1.0)
    p, m = plus_minus_split(e1, s, 0)
    assert p.shape[1] == 1 and m.shape[1] == 0
    p, m = plus_minus_split(e1, s, 1)
    assert p.shape[1] == 0 and m.shape[1] == 1
    s = spectral_truncate(diag_example, 0.0)
    assert plus_minus_split(diag_example, s, 0)[0].shape[1] == 2
    assert plus_minus_split(diag_example, s, 1)[0].shape[1] == 0
    s = spectral_truncate(diag_example, 100.0)
    p, m = plus_minus_split(diag_example, s, 0)
    assert p.shape[1] == m.shape[1] == 0


@given(st.integers(1, 7), st.integers(0, 5000))
def test_acyclic_plus_minus_dims(n, seed):
    c = random_bicomplex((n, n), (0, 0), "well", seed)
    s = spectral_truncate(c, 0.0)
    sd = split(c)
    for k in (0, 1):
        p, m = plus_minus_split(c, s, k)
        assert p.shape[1] + m.shape[1] == c.dim(k)
        # dim B^k = dim B_{k-1}
        assert sd.cohom[k].B.shape[1] == sd.hom[1 - k].B.shape[1]
