"""Local Brouwer degree for the map classes the certifier needs.

Only four cases are implemented, because the certification inequalities
only ever invoke these: affine maps in any dimension, piecewise-affine maps
on the line, products of independent factors, and composition with an
invertible affine map.  A target value hit exactly on the domain boundary
is a hard error: the degree is undefined there and silently nudging the
target would fabricate certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DET_TOL, GeometryError, PiecewiseAffineMap, _as_matrix, _as_vector

BOUNDARY_TOL = 1e-12


class DegreeUndefinedError(ValueError):
    """Target value lies on the image of the domain boundary."""


@dataclass(frozen=True)
class DegreeValue:
    """Signed degree plus the rule that produced it."""

    value: int
    method: str  # affine-determinant | one-d-crossing | product | composition

    def __bool__(self) -> bool:
        return self.value != 0


def degree_affine(linear, offset, target) -> DegreeValue:
    """Degree of x -> linear @ x + offset over the open unit box at ``target``.

    sgn(det linear) when the unique preimage is interior, 0 when it is
    outside; a preimage on the boundary is an error.
    """
    lin = _as_matrix(linear)
    off = _as_vector(offset, lin.shape[0])
    tgt = _as_vector(target, lin.shape[0])
    det = np.linalg.det(lin)
    if abs(det) < DET_TOL:
        raise GeometryError("degree of a singular affine map is undefined")
    pre = np.linalg.solve(lin, tgt - off)
    extent = float(np.max(np.abs(pre)))
    if abs(extent - 1.0) <= BOUNDARY_TOL:
        raise DegreeUndefinedError(f"preimage {pre.tolist()} lies on the box boundary")
    value = int(np.sign(det)) if extent < 1.0 else 0
    return DegreeValue(value, "affine-determinant")


def degree_1d(U: PiecewiseAffineMap, target: float) -> DegreeValue:
    """Degree of a scalar map over (-1, 1): half the endpoint sign change."""
    if U.dim_in != 1 or U.dim_out != 1:
        raise GeometryError("degree_1d needs a scalar map on the line")
    q = float(target)
    left = float(U.apply([-1.0])[0]) - q
    right = float(U.apply([1.0])[0]) - q
    if abs(left) <= BOUNDARY_TOL or abs(right) <= BOUNDARY_TOL:
        raise DegreeUndefinedError(f"target {q} equals a boundary value of the map")
    value = (int(np.sign(right)) - int(np.sign(left))) // 2
    return DegreeValue(value, "one-d-crossing")


def degree_product(parts: list[DegreeValue] | tuple[DegreeValue, ...]) -> DegreeValue:
    """Degree of the product map: the product of the factor degrees."""
    value = 1
    for p in parts:
        value *= p.value
    return DegreeValue(value, "product")


def degree_compose_affine(psi_linear, inner: DegreeValue) -> DegreeValue:
    """Degree after post-composing with an invertible affine map.

    Valid when the inner target lies in a bounded component of the
    complement of the inner boundary image; callers certify that with a
    strictly positive minimum stretch.
    """
    lin = _as_matrix(psi_linear)
    det = np.linalg.det(lin)
    if abs(det) < DET_TOL:
        raise GeometryError("composition with a singular affine map is undefined")
    return DegreeValue(int(np.sign(det)) * inner.value, "composition")


def degree_for_map(U: PiecewiseAffineMap, target) -> DegreeValue:
    """Dispatch: 1-d crossing count, or the affine determinant rule.

    Genuinely piecewise maps in two or more unstable dimensions are outside
    the supported classes and raise.
    """
    if U.dim_in == 1 and U.dim_out == 1:
        return degree_1d(U, float(np.atleast_1d(target)[0]))
    if U.is_affine:
        piece = U.pieces[0]
        return degree_affine(piece.matrix, piece.offset, target)
    raise GeometryError("degree is only computed for 1-d piecewise or affine maps")
