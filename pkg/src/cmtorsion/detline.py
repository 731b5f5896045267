"""Determinant lines as scalars against declared reference bases.

An element of Det(V) is stored as the coordinate ``coord`` relative to the
wedge of a named reference basis of V; an element of Det(V)^{-1} is stored
with ``power=-1`` and pairs with an element of Det(V) by multiplying
coordinates. Det(0) is the ground field with generator 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import numkit
from .errors import ContractError, ShapeError


@dataclass(frozen=True)
class DetElement:
    space_dim: int
    ref_basis_id: str
    coord: complex
    power: int = 1

    def __post_init__(self):
        if self.power not in (1, -1):
            raise ContractError("power must be +1 or -1")

    def dual(self) -> "DetElement":
        """The element of the dual line that pairs with self to 1."""
        return DetElement(self.space_dim, self.ref_basis_id, 1.0 / self.coord, -self.power)

    def pair(self, other: "DetElement") -> complex:
        if self.power == other.power:
            raise ContractError("pairing needs one element of Det(V) and one of Det(V)^-1")
        if self.ref_basis_id != other.ref_basis_id:
            raise ContractError(f"reference bases differ: {self.ref_basis_id!r} vs {other.ref_basis_id!r}")
        return self.coord * other.coord


def wedge_coord(vectors, ref_basis) -> complex:
    """Coordinate of v_1 ^ ... ^ v_n against the wedge of ``ref_basis``.

    ``vectors`` is a matrix whose columns are the v_j (or a list of 1-d
    vectors). The result is det(M) where column j of M expresses v_j in the
    reference basis.
    """
    ref = numkit.as_cmatrix(ref_basis, "ref_basis")
    if isinstance(vectors, (list, tuple)):
        vecs = np.column_stack(vectors) if len(vectors) else np.zeros((ref.shape[0], 0), complex)
    else:
        vecs = numkit.as_cmatrix(vectors, "vectors")
    if ref.shape[0] != ref.shape[1] or vecs.shape != ref.shape:
        raise ShapeError(f"need n vectors in an n-dim space: vectors {vecs.shape}, ref {ref.shape}")
    return numkit.det(numkit.solve(ref, vecs))


def fusion_sign(dim_v: int, dim_w: int) -> int:
    """Sign relating mu_{V,W}(v x w) and mu_{W,V}(w x v)."""
    return -1 if (dim_v * dim_w) % 2 else 1


def graded_fusion_sign(dims_c, dims_ct) -> int:
    """Sign (-1)^{dim C^odd * dim C~^even} of the graded fusion map."""
    return -1 if (dims_c[1] * dims_ct[0]) % 2 else 1


def multi_fusion(elements) -> DetElement:
    """mu_{V_1,...,V_r}: the reference basis of the sum is the concatenation
    of the factor bases in the given order, so coordinates multiply."""
    elements = list(elements)
    if any(e.power != 1 for e in elements):
        raise ContractError("multi_fusion takes elements of Det(V_i), not of their duals")
    coord = complex(1.0)
    for e in elements:
        coord *= e.coord
    return DetElement(
        space_dim=sum(e.space_dim for e in elements),
        ref_basis_id="(" + "+".join(e.ref_basis_id for e in elements) + ")",
        coord=coord,
    )


def block_permutation_sign(dims, order) -> int:
    """Sign of the permutation of basis vectors that lists the blocks of
    sizes ``dims`` in ``order`` instead of their natural order.

    Computed by counting inversions of the induced index permutation.
    """
    offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    perm = [i for b in order for i in range(offsets[b], offsets[b] + dims[b])]
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def fused_in_order(elements, order) -> complex:
    """Coordinate of mu applied to the factors listed in ``order``, measured
    against the concatenation of the factor bases in their natural order."""
    elements = list(elements)
    fused = multi_fusion([elements[i] for i in order])
    return block_permutation_sign([e.space_dim for e in elements], order) * fused.coord


def graded_fuse(coord_c, coord_ct, dims_c, dims_ct) -> complex:
    """Coordinate of mu_{C,C~}(c x c~) in Det(C + C~), bases concatenated per parity."""
    return graded_fusion_sign(dims_c, dims_ct) * coord_c * coord_ct


def all_orders(r):
    return permutations(range(r))
