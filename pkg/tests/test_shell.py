import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmtorsion import cli, config, io, selftest
from cmtorsion.bicomplex import BiComplex
from cmtorsion.torsion import RefBases

from conftest import random_general


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr().out


@pytest.fixture
def e1_doc(tmp_path, e1):
    p = tmp_path / "e1.json"
    io.write_complex(p, e1)
    return p


# documents

@given(st.integers(0, 10 ** 6))
def test_roundtrip_bit_exact(seed):
    c = random_general(seed, 6, "spread")
    back, _ = io.doc_to_complex(json.loads(io.dumps(io.complex_to_doc(c))))
    for k in io.BLOCKS:
        assert np.array_equal(getattr(c, k), getattr(back, k))


def test_roundtrip_awkward_floats():
    vals = np.array([[0.1 + 1e-300j, complex(-0.0, 5e-324)], [1 / 3 - 2 ** -52 * 1j, 1.7976931348623157e308]])
    c = BiComplex(vals, np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))
    back, _ = io.doc_to_complex(json.loads(io.dumps(io.complex_to_doc(c))))
    assert np.array_equal(back.d_eo, vals)
    assert np.signbit(back.d_eo[0, 1].real)


def test_bases_registry_roundtrip(tmp_path):
    c = BiComplex(np.zeros((1, 2)), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((2, 1)))
    b = RefBases((2 * np.eye(2), np.eye(1)), (np.eye(2), 3 * np.eye(1)), "mine", "mine")
    p = tmp_path / "z.json"
    io.write_complex(p, c, {"mine": b})
    _, reg = io.read_complex(p)
    assert np.array_equal(reg["mine"].cohom[0], 2 * np.eye(2))
    assert np.array_equal(reg["mine"].hom[1], 3 * np.eye(1))


def test_document_errors():
    with pytest.raises(io.DocumentError):
        io.doc_to_complex({"schema_version": "other/9"})
    with pytest.raises(io.DocumentError):
        io.doc_to_complex({"schema_version": io.SCHEMA_VERSION, "dims": [1, 1], "blocks": {}})
    doc = io.complex_to_doc(BiComplex([[1]], [[0]], [[0]], [[1]]))
    doc["blocks"]["d_eo"] = [[[1.0, 0.0], [2.0, 0.0]]]
    with pytest.raises(io.DocumentError):
        io.doc_to_complex(doc)


# config

def test_config_precedence(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"rank_tol": 1e-8, "threads": 3, "seed": 5}))
    cfg = config.load(p, rank_tol=1e-9, seed=None)
    assert cfg.rank_tol == 1e-9 and cfg.threads == 3 and cfg.seed == 5


def test_config_rejects_bad_values(tmp_path):
    with pytest.raises(io.DocumentError):
        config.load(None, theta=0.0)
    with pytest.raises(io.DocumentError):
        config.load(None, rank_tol=-1.0)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(io.DocumentError):
        config.load(p)


# validate

def test_validate_exit_codes(tmp_path, e1_doc, capsys):
    assert run(["validate", e1_doc], capsys)[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run(["validate", bad], capsys)[0] == 2
    nonzero = tmp_path / "nz.json"
    io.write_complex(nonzero, BiComplex([[1]], [[1]], [[0]], [[0]]))
    assert run(["validate", nonzero], capsys)[0] == 1


# torsion

def test_torsion_e1(e1_doc, capsys):
    code, out = run(["torsion", e1_doc, "--lambda", 0, "--lambda", 1, "--lambda", 7, "--format", "json"], capsys)
    assert code == 0
    vals = json.loads(out)["result"]["values"]
    assert vals[0]["coord"] == pytest.approx([6.0, 0.0])
    assert vals[1]["coord"] == pytest.approx([6.0, 0.0])
    # spectrum of Delta is {6}: below it everything sits in the tail, above it nothing does
    assert vals[0]["tail_factor"] == pytest.approx([6.0, 0.0])
    assert vals[2]["coord"] == pytest.approx([6.0, 0.0])
    assert vals[2]["tail_factor"] == pytest.approx([1.0, 0.0])


def test_torsion_cut_collision(e1_doc, capsys):
    code, _ = run(["torsion", e1_doc, "--lambda", 6], capsys)
    assert code == 3


def test_torsion_named_basis_zero_complex(tmp_path, capsys):
    z = BiComplex(np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((2, 1)), np.zeros((1, 2)))
    b = RefBases((np.eye(1), np.eye(2)), (np.eye(1), np.eye(2)), "std", "std")
    p = tmp_path / "zero.json"
    io.write_complex(p, z, {"std": b})
    code, out = run(["torsion", p, "--basis", "std", "--format", "json"], capsys)
    assert code == 0
    v = json.loads(out)["result"]["values"][0]
    assert v["coord"] == pytest.approx([1.0, 0.0])
    assert v["coh_basis_id"] == "std"
    assert run(["torsion", p, "--basis", "nope"], capsys)[0] == 2


# generate

def test_generate_torus(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert run(["generate", "torus", "--m", 3, "--flux", "123:2.0", "--metric", "I", "--out", out], capsys)[0] == 0
    doc = json.loads(out.read_text())
    assert doc["dims"] == [4, 4]
    assert doc["labels"]["model"] == "torus"
    assert run(["validate", out], capsys)[0] == 0


def test_generate_random_and_infeasible(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["generate", "random", "--dims", "4,4", "--betti", "1,1", "--seed", 9, "--out", out], capsys)[0] == 0
    assert run(["validate", out], capsys)[0] == 0
    assert run(["generate", "torus", "--m", 3, "--flux", "12:1.0"], capsys)[0] == 4
    assert run(["generate", "random", "--dims", "2,2", "--betti", "2,0"], capsys)[0] == 4


def test_generate_dolbeault_wrap(tmp_path, capsys):
    src = tmp_path / "t.json"
    run(["generate", "torus", "--m", 3, "--flux", "123:2.0", "--out", src], capsys)
    out = tmp_path / "w.json"
    assert run(["generate", "dolbeault-wrap", "--p", 0, "--from", src, "--out", out], capsys)[0] == 0
    assert json.loads(out.read_text())["labels"]["p"] == 0


def test_generate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(["generate", "random", "--dims", "5,3", "--betti", "2,0", "--seed", 4, "--out", p], capsys)
    assert a.read_bytes() == b.read_bytes()


# sweep

def test_sweep_torus_metric(capsys):
    code, out = run(["sweep", "torus", "--m", 3, "--flux", "123:2.0", "--param", "0:0.5:3"], capsys)
    assert code == 0, out
    assert "PASS" in out


def test_sweep_flux_on_acyclic_document(tmp_path, capsys):
    p = tmp_path / "a.json"
    run(["generate", "random", "--dims", "3,3", "--betti", "0,0", "--seed", 2, "--profile", "well", "--out", p], capsys)
    assert run(["sweep", p, "--family", "flux", "--param", "0:0.2:3", "--rate", "exact"], capsys)[0] == 0
    assert run(["sweep", p, "--family", "flux-d", "--param", "0:0.2:3"], capsys)[0] == 0
    assert run(["sweep", p, "--family", "metric", "--param", "0:0.2:3"], capsys)[0] == 0


def test_sweep_coarse_eps_reports_stencil(tmp_path, capsys):
    p = tmp_path / "a.json"
    run(["generate", "random", "--dims", "3,3", "--betti", "0,0", "--seed", 2, "--out", p], capsys)
    code, out = run(["sweep", p, "--family", "metric", "--param", "0:0.2:2", "--fd-eps", 5.0, "--seed", 1], capsys)
    assert code == 1
    assert "StencilError" in out


def test_sweep_json_deterministic(tmp_path, capsys):
    p = tmp_path / "a.json"
    run(["generate", "random", "--dims", "3,3", "--betti", "1,1", "--seed", 3, "--out", p], capsys)
    argv = ["sweep", p, "--family", "metric", "--param", "0:0.2:3", "--seed", 7, "--format", "json"]
    _, first = run(argv, capsys)
    _, second = run(argv + ["--threads", 3], capsys)
    doc1, doc2 = json.loads(first), json.loads(second)
    assert doc1["result"] == doc2["result"]
    _, third = run(argv, capsys)
    assert first == third


# selftest

def test_selftest_default(capsys):
    code, out = run(["selftest", "--seeds", 2], capsys)
    assert code == 0
    for name in selftest.SUITES:
        assert name in out


def test_selftest_forced_failure(capsys):
    code, out = run(["selftest", "--suite", "numkit", "--tol", 1e-30, "--seeds", 2], capsys)
    assert code == 1
    assert "reproduce:" in out


def test_selftest_single_suite(capsys):
    code, out = run(["selftest", "--suite", "detline"], capsys)
    assert code == 0
    assert out.split()[0] == "detline" and "numkit" not in out
    assert run(["selftest", "--suite", "nonsense"], capsys)[0] == 2
