"""Versioned JSON documents for complexes and reports.

Complex entries are written as [re, im] pairs with 17 significant digits,
which round-trips every binary64 value exactly. Keys are sorted and the
layout is fixed, so equal inputs give byte-identical files.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .bicomplex import BiComplex
from .errors import CMTorsionError
from .torsion import RefBases

SCHEMA_VERSION = "cmtorsion-complex/1"
REPORT_VERSION = "cmtorsion-report/1"
BLOCKS = ("d_eo", "d_oe", "ds_eo", "ds_oe")


class DocumentError(CMTorsionError, ValueError):
    """Malformed or unrecognized document."""


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise DocumentError(f"cannot serialize non-finite value {x}")
    if x == 0:
        return "-0.0" if math.copysign(1.0, x) < 0 else "0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def dumps(obj, indent=0) -> str:
    """JSON text with sorted keys and 17-digit floats."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {dumps(obj[k], indent + 1)}' for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj) or _is_pair_row(obj):
            return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
        items = [pad + "  " + dumps(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps(cpair(obj), indent)
    return json.dumps(str(obj))


def _is_pair_row(obj):
    return all(isinstance(v, (list, tuple)) and len(v) == 2 and not isinstance(v[0], (list, tuple)) for v in obj)


def cpair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(a) -> list:
    a = np.asarray(a, complex)
    return [[cpair(z) for z in row] for row in a]


def decode_matrix(rows, shape, name) -> np.ndarray:
    if not isinstance(rows, list):
        raise DocumentError(f"{name}: expected a list of rows")
    r, c = shape
    if len(rows) != r:
        raise DocumentError(f"{name}: expected {r} rows, got {len(rows)}")
    out = np.zeros(shape, complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != c:
            raise DocumentError(f"{name}: row {i} should have {c} entries")
        for j, z in enumerate(row):
            if not (isinstance(z, list) and len(z) == 2):
                raise DocumentError(f"{name}[{i}][{j}]: expected an [re, im] pair")
            try:
                out[i, j] = complex(float(z[0]), float(z[1]))
            except (TypeError, ValueError) as exc:
                raise DocumentError(f"{name}[{i}][{j}]: not a number") from exc
    if not np.all(np.isfinite(out)):
        raise DocumentError(f"{name}: non-finite entries")
    return out


def complex_to_doc(c: BiComplex, bases: dict | None = None) -> dict:
    """``bases`` maps an id to a RefBases (stored under that id)."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "dims": [c.n0, c.n1],
        "blocks": {name: encode_matrix(getattr(c, name)) for name in BLOCKS},
        "labels": {k: v for k, v in c.labels.items() if k != "parent_scale"},
    }
    if bases:
        doc["bases"] = {
            bid: {
                "cohomology": {"even": encode_matrix(b.cohom[0]), "odd": encode_matrix(b.cohom[1])},
                "homology": {"even": encode_matrix(b.hom[0]), "odd": encode_matrix(b.hom[1])},
            }
            for bid, b in bases.items()
        }
    return doc


def doc_to_complex(doc) -> tuple:
    """Returns (BiComplex, {basis id: RefBases})."""
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    ver = doc.get("schema_version")
    if ver != SCHEMA_VERSION:
        raise DocumentError(f"unrecognized schema_version {ver!r} (expected {SCHEMA_VERSION!r})")
    try:
        n0, n1 = (int(x) for x in doc["dims"])
        blocks = doc["blocks"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"missing or bad dims/blocks: {exc}") from exc
    if n0 < 0 or n1 < 0:
        raise DocumentError("dims must be nonnegative")
    shapes = {"d_eo": (n1, n0), "d_oe": (n0, n1), "ds_eo": (n1, n0), "ds_oe": (n0, n1)}
    mats = {}
    for name, shape in shapes.items():
        if name not in blocks:
            raise DocumentError(f"missing block {name}")
        mats[name] = decode_matrix(blocks[name], shape, name)
    labels = doc.get("labels", {}) or {}
    if not isinstance(labels, dict):
        raise DocumentError("labels must be an object")
    c = BiComplex(mats["d_eo"], mats["d_oe"], mats["ds_eo"], mats["ds_oe"], dict(labels))
    bases = {}
    for bid, entry in (doc.get("bases") or {}).items():
        try:
            parts = {}
            for kind in ("cohomology", "homology"):
                pe, po = entry[kind]["even"], entry[kind]["odd"]
                ke = len(pe[0]) if pe else 0
                ko = len(po[0]) if po else 0
                parts[kind] = (
                    decode_matrix(pe, (n0, ke), f"bases.{bid}.{kind}.even"),
                    decode_matrix(po, (n1, ko), f"bases.{bid}.{kind}.odd"),
                )
        except (KeyError, TypeError, IndexError) as exc:
            raise DocumentError(f"basis {bid!r} is malformed: {exc}") from exc
        bases[bid] = RefBases(parts["cohomology"], parts["homology"], bid, bid)
    return c, bases


def write_complex(path, c: BiComplex, bases: dict | None = None) -> str:
    text = dumps(complex_to_doc(c, bases)) + "\n"
    if path in (None, "-"):
        return text
    with open(path, "w") as fh:
        fh.write(text)
    return text


def read_complex(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return doc_to_complex(doc)


def report_text(kind: str, payload: dict, config: dict | None = None) -> str:
    doc = {"report_version": REPORT_VERSION, "kind": kind, "result": payload}
    if config is not None:
        doc["config"] = config
    return dumps(doc) + "\n"
