"""Feasible-set descriptions for the nearness solvers.

A constraint is a small frozen dataclass; the solver dispatch in
:mod:`nearkit.frobsolve` decides which (constraint, B, C) combinations admit
an exact Frobenius solution and raises :class:`CapabilityError` for the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matlin import BlockShape, STRUCTURE_KINDS, as_matrix, svd, vec

__all__ = [
    "CapabilityError",
    "Unconstrained",
    "RankAtMost",
    "KronRankAtMost",
    "PrescribedEigenvalue",
    "PrescribedPartialTrace",
    "AffineSubspace",
    "ProductConstraint",
    "Structural",
    "FrobeniusBall",
    "PsdCone",
    "Intersection",
    "LeftRankOne",
    "RightRankOne",
    "transpose_constraint",
]


class CapabilityError(Exception):
    """Raised when a (constraint, B, C) combination has no exact solver."""


@dataclass(frozen=True)
class Unconstrained:
    pass


@dataclass(frozen=True)
class RankAtMost:
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("rank bound must be >= 1")


@dataclass(frozen=True)
class KronRankAtMost:
    """Kronecker rank of X (rank of its rearrangement) at most r.

    xshape partitions X into p1 x q1 blocks of size p2 x q2.  bshape/cshape,
    when given, tell the dispatch how the multipliers B and C factor as
    Kronecker products (B = B1 x B2 with B1 of shape bshape.m1 x bshape.n1).
    """

    r: int
    xshape: BlockShape
    bshape: BlockShape | None = None
    cshape: BlockShape | None = None

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("Kronecker rank bound must be >= 1")


@dataclass(frozen=True)
class PrescribedEigenvalue:
    lam: float


@dataclass(frozen=True)
class PrescribedPartialTrace:
    """partial_trace(X (W kron I)) = lam * W for some nonzero witness W."""

    lam: float
    p: int
    bshape: BlockShape | None = None
    cshape: BlockShape | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("partial-trace block size must be >= 1")


@dataclass(frozen=True)
class AffineSubspace:
    """X = offset + span(basis); basis matrices must be linearly independent."""

    basis: tuple
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "basis",
                           tuple(as_matrix(E, "basis element") for E in self.basis))
        object.__setattr__(self, "offset", as_matrix(self.offset, "offset"))
        if self.basis:
            stack = np.hstack([vec(E) for E in self.basis])
            if svd(stack).numerical_rank < len(self.basis):
                raise ValueError("affine subspace basis is linearly dependent")


@dataclass(frozen=True)
class ProductConstraint:
    """F X G = H."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class Structural:
    kind: str

    def __post_init__(self):
        if self.kind not in STRUCTURE_KINDS:
            raise ValueError(f"unknown structure kind {self.kind!r}")


@dataclass(frozen=True)
class FrobeniusBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_matrix(self.center, "center"))
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")


@dataclass(frozen=True)
class PsdCone:
    pass


@dataclass(frozen=True)
class Intersection:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("intersection needs at least one member")


@dataclass(frozen=True)
class LeftRankOne:
    """Affine term + D x e^T with nonsingular D and e != 0."""

    D: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "D", as_matrix(self.D, "D"))
        object.__setattr__(self, "e", as_matrix(self.e, "e"))
        fD = svd(self.D)
        if self.D.shape[0] != self.D.shape[1] or fD.numerical_rank < self.D.shape[0]:
            raise ValueError("D must be square nonsingular")
        if np.linalg.norm(self.e) == 0:
            raise ValueError("e must be nonzero")


@dataclass(frozen=True)
class RightRankOne:
    """Affine term + d x^T E with nonsingular E and d != 0."""

    d: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", as_matrix(self.d, "d"))
        object.__setattr__(self, "E", as_matrix(self.E, "E"))
        fE = svd(self.E)
        if self.E.shape[0] != self.E.shape[1] or fE.numerical_rank < self.E.shape[0]:
            raise ValueError("E must be square nonsingular")
        if np.linalg.norm(self.d) == 0:
            raise ValueError("d must be nonzero")


def transpose_constraint(c):
    """Constraint on X^T equivalent to the given constraint on X."""
    if isinstance(c, (Unconstrained, RankAtMost, PrescribedEigenvalue,
                      PsdCone)):
        return c
    if isinstance(c, Structural):
        # all supported structure classes are closed under transposition
        return c
    if isinstance(c, FrobeniusBall):
        return FrobeniusBall(center=c.center.T, radius=c.radius)
    if isinstance(c, AffineSubspace):
        return AffineSubspace(basis=tuple(E.T for E in c.basis),
                              offset=c.offset.T)
    if isinstance(c, ProductConstraint):
        return ProductConstraint(F=c.G.T, G=c.F.T, H=c.H.T)
    if isinstance(c, Intersection):
        return Intersection(tuple(transpose_constraint(m) for m in c.members))
    raise CapabilityError(f"cannot transpose constraint {type(c).__name__}")
