"""Subspaces of a finite-dimensional Hilbert space and their q-operations.

A :class:`Subspace` is a property of the quantum system.  The q-operations
are intersection (``&``, :func:`q_meet`), span (``|``, :func:`q_join`) and
orthogonal complement (``~``, :func:`q_not`).  Two subspaces are the same
property when their projectors agree to ``TOL_PROJ`` in the max-norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from . import numerics as nm
from .errors import DimensionMismatch

TOL_PROJ = 1e-9
TOL_COMM = 1e-9

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A closed linear subspace, stored as an orthonormal basis plus its projector.

    Use the constructors :meth:`span`, :meth:`from_projector`, :meth:`zero`
    and :meth:`full` rather than calling the class directly.
    """

    ambient_dim: int
    basis: np.ndarray
    projector: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.basis.setflags(write=False)
        self.projector.setflags(write=False)

    @classmethod
    def span(cls, vectors, dim: int | None = None, tol: float = nm.TOL_RANK) -> "Subspace":
        b = nm.orthonormal_basis(vectors, tol=tol, dim=dim)
        d = b.shape[0]
        if d == 0:
            raise DimensionMismatch("ambient dimension unknown for an empty span; pass dim")
        return cls(d, b, nm.projector_from_basis(b))

    @classmethod
    def from_projector(cls, p, tol: float = TOL_PROJ) -> "Subspace":
        """Subspace equal to the range of projector ``p`` (validated)."""
        p = nm.as_square(p, "projector")
        check_projector(p, tol)
        w, v = nm.hermitian_eig(p, tol)
        b = nm.orthonormal_basis(v[:, w > 0.5], dim=p.shape[0])
        return cls(p.shape[0], b, nm.projector_from_basis(b))

    @classmethod
    def zero(cls, dim: int) -> "Subspace":
        b = np.zeros((dim, 0), dtype=complex)
        return cls(dim, b, np.zeros((dim, dim), dtype=complex))

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        b = np.eye(dim, dtype=complex)
        return cls(dim, b, np.eye(dim, dtype=complex))

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def is_zero(self) -> bool:
        return self.rank == 0

    def distance(self, other: "Subspace") -> float:
        _same_dim(self, other)
        return nm.max_abs(self.projector - other.projector)

    def same_as(self, other: "Subspace", tol: float = TOL_PROJ) -> bool:
        return self.distance(other) <= tol

    def contains(self, v, tol: float = nm.TOL_NORM) -> bool:
        v = nm.as_ket(v)
        return float(np.linalg.norm(self.projector @ v - v)) <= tol * max(1.0, float(np.linalg.norm(v)))

    def __and__(self, other):
        return q_meet(self, other)

    def __or__(self, other):
        return q_join(self, other)

    def __invert__(self):
        return q_not(self)

    def __le__(self, other):
        return is_leq(self, other)

    def __repr__(self):
        return f"Subspace(dim={self.ambient_dim}, rank={self.rank})"


def check_projector(p: np.ndarray, tol: float = TOL_PROJ) -> None:
    if nm.hermiticity_residual(p) > tol:
        raise ValueError(f"not a projector: ‖P − P†‖_max = {nm.hermiticity_residual(p):.3e}")
    r = nm.max_abs(p @ p - p)
    if r > tol:
        raise ValueError(f"not a projector: ‖P² − P‖_max = {r:.3e}")


def _same_dim(a: Subspace, b: Subspace) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(f"subspaces live in dimensions {a.ambient_dim} and {b.ambient_dim}")


def q_meet(a: Subspace, b: Subspace, tol: float = nm.TOL_RANK) -> Subspace:
    """Intersection: the kernel of ``(I - [A])`` stacked over ``(I - [B])``."""
    _same_dim(a, b)
    eye = np.eye(a.ambient_dim)
    stacked = np.vstack([eye - a.projector, eye - b.projector])
    ker = nm.null_space(stacked, tol)
    if ker.shape[1] == 0:
        return Subspace.zero(a.ambient_dim)
    return Subspace.span(ker, tol=tol)


def q_join(a: Subspace, b: Subspace, tol: float = nm.TOL_RANK) -> Subspace:
    """Span of the union of both bases."""
    _same_dim(a, b)
    cols = np.hstack([a.basis, b.basis])
    if cols.shape[1] == 0:
        return Subspace.zero(a.ambient_dim)
    return Subspace.span(cols, tol=tol)


def q_not(a: Subspace, tol: float = nm.TOL_RANK) -> Subspace:
    """Orthogonal complement, so that ``[¬A] = I − [A]``."""
    if a.rank == 0:
        return Subspace.full(a.ambient_dim)
    ker = nm.null_space(a.projector, tol)
    if ker.shape[1] == 0:
        return Subspace.zero(a.ambient_dim)
    return Subspace.span(ker, tol=tol)


def q_meet_all(subspaces: Sequence[Subspace]) -> Subspace:
    out = subspaces[0]
    for s in subspaces[1:]:
        out = q_meet(out, s)
    return out


def q_join_all(subspaces: Sequence[Subspace], dim: int | None = None) -> Subspace:
    if not subspaces:
        if dim is None:
            raise ValueError("dim required for an empty join")
        return Subspace.zero(dim)
    out = subspaces[0]
    for s in subspaces[1:]:
        out = q_join(out, s)
    return out


def commutator_norm(a: Subspace, b: Subspace) -> float:
    _same_dim(a, b)
    pa, pb = a.projector, b.projector
    return nm.max_abs(pa @ pb - pb @ pa)


def is_compatible(a: Subspace, b: Subspace, tol: float = TOL_COMM) -> bool:
    """True iff the projectors of ``a`` and ``b`` commute."""
    return commutator_norm(a, b) <= tol


def is_leq(a: Subspace, b: Subspace, tol: float = TOL_COMM) -> bool:
    """``a ≤ b`` decided as ``[B][A] = [A]``."""
    _same_dim(a, b)
    return nm.max_abs(b.projector @ a.projector - a.projector) <= tol


def is_orthogonal(a: Subspace, b: Subspace, tol: float = TOL_COMM) -> bool:
    _same_dim(a, b)
    return nm.max_abs(a.projector @ b.projector) <= tol


def spin_half_ray(direction, sign: int = +1) -> Subspace:
    """Ray in ℂ² of spin-½ along unit ``direction`` with component ``sign``·½.

    The projector is ``(I + sign n·σ) / 2``.
    """
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    p = (np.eye(2) + sign * sum(c * s for c, s in zip(n, PAULI))) / 2
    return Subspace.from_projector(p)


# --- ortholattice axiom suite -------------------------------------------------

AXIOMS = (
    "meet_commutative",
    "join_commutative",
    "meet_associative",
    "join_associative",
    "meet_identity",
    "join_identity",
    "complement_meet",
    "complement_join",
    "involution",
    "de_morgan",
    "distributive_meet_over_join",
    "distributive_join_over_meet",
)


@dataclass
class AxiomReport:
    """Largest projector distance between the two sides of each law."""

    residuals: dict[str, float]
    counterexamples: dict[str, tuple] = field(default_factory=dict)

    def holds(self, axiom: str, tol: float = TOL_PROJ) -> bool:
        return self.residuals[axiom] <= tol

    def failures(self, tol: float = TOL_PROJ) -> list[str]:
        return [k for k, v in self.residuals.items() if v > tol]


def check_ortholattice_axioms(sample: Sequence[Subspace]) -> AxiomReport:
    """Evaluate the lattice laws on all pairs and triples drawn from ``sample``.

    Both sides of each identity are computed with the q-operations and
    compared by projector distance.  Distributivity is included so that the
    report exposes where the subspace lattice stops being Boolean.
    """
    if not sample:
        raise ValueError("empty sample")
    d = sample[0].ambient_dim
    for s in sample:
        _same_dim(sample[0], s)
    zero, full = Subspace.zero(d), Subspace.full(d)
    res = {k: 0.0 for k in AXIOMS}
    witness: dict[str, tuple] = {}

    def record(name, lhs, rhs, args):
        r = lhs.distance(rhs)
        if r > res[name]:
            res[name] = r
            witness[name] = args

    for i, a in enumerate(sample):
        na = ~a
        record("meet_identity", a & full, a, (i,))
        record("join_identity", a | zero, a, (i,))
        record("complement_meet", a & na, zero, (i,))
        record("complement_join", a | na, full, (i,))
        record("involution", ~na, a, (i,))
    for (i, a), (j, b) in product(enumerate(sample), repeat=2):
        record("meet_commutative", a & b, b & a, (i, j))
        record("join_commutative", a | b, b | a, (i, j))
        record("de_morgan", ~(a | b), (~a) & (~b), (i, j))
    for (i, a), (j, b), (k, c) in product(enumerate(sample), repeat=3):
        record("meet_associative", a & (b & c), (a & b) & c, (i, j, k))
        record("join_associative", a | (b | c), (a | b) | c, (i, j, k))
        record("distributive_meet_over_join", a & (b | c), (a & b) | (a & c), (i, j, k))
        record("distributive_join_over_meet", a | (b & c), (a | b) & (a | c), (i, j, k))
    return AxiomReport(res, witness)
