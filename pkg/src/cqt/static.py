"""Single-time quantum description: sample spaces, frameworks and the Born rule.

A :class:`SampleSpace` is an orthogonal decomposition of the identity into
nonzero subspaces.  The framework it generates has one event per subset of
its members; events are addressed by bit masks (bit ``i`` set means member
``i`` is included, 0-based) and their projectors are the sums of the member
projectors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import numerics as nm
from .errors import CapExceeded, DimensionMismatch, InvalidSampleSpace, InvalidState
from .lattice import TOL_COMM, TOL_PROJ, Subspace

TOL_PSD = 1e-9
TOL_TRACE = 1e-9
TOL_PROB = 1e-10
ENUMERATION_CAP = 20


# --- states -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateDensity:
    """Density operator: Hermitian, positive semidefinite, unit trace."""

    matrix: np.ndarray

    def __post_init__(self):
        m = nm.require_hermitian(self.matrix, name="density matrix")
        m = (m + nm.dagger(m)) / 2
        tr = np.trace(m).real
        if abs(tr - 1) > TOL_TRACE:
            raise InvalidState(f"density matrix has trace {tr:.12g}, expected 1")
        lmin = float(np.linalg.eigvalsh(m)[0])
        if lmin < -TOL_PSD:
            raise InvalidState(f"density matrix has negative eigenvalue {lmin:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, psi, normalize: bool = False) -> "StateDensity":
        psi = nm.as_ket(psi, "state vector")
        n = float(np.linalg.norm(psi))
        if normalize:
            psi = psi / n
        elif abs(n - 1) > nm.TOL_NORM:
            raise InvalidState(f"state vector has norm {n:.12g}, expected 1")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "StateDensity":
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, op: np.ndarray) -> complex:
        """``Tr(ρ J)`` for an arbitrary operator ``J``."""
        return complex(np.trace(self.matrix @ op))

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.purity() - 1) <= tol

    def state_vector(self) -> np.ndarray:
        """Principal eigenvector, phase-fixed; only meaningful for pure states."""
        w, v = nm.hermitian_eig(self.matrix)
        return nm.fix_phase(v[:, 0])

    def evolved(self, u: np.ndarray) -> "StateDensity":
        return StateDensity(u @ self.matrix @ nm.dagger(u))


def as_state(state) -> StateDensity:
    """Accept a :class:`StateDensity`, a normalized ket or a density matrix."""
    if isinstance(state, StateDensity):
        return state
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return StateDensity.pure(arr)
    return StateDensity(arr)


# --- sample spaces ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleSpace:
    """Validated orthogonal decomposition of the identity.

    Build through :func:`validate_sample_space`; the constructor itself does
    not check the invariants.
    """

    members: tuple[Subspace, ...]

    @property
    def ambient_dim(self) -> int:
        return self.members[0].ambient_dim

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(m.rank for m in self.members)

    @cached_property
    def projectors(self) -> np.ndarray:
        """Stacked member projectors, shape ``(m, d, d)``."""
        out = np.stack([m.projector for m in self.members])
        out.setflags(write=False)
        return out

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(self.members)


def validate_sample_space(
    members: Sequence[Subspace], tol_comm: float = TOL_COMM, tol_proj: float = TOL_PROJ
) -> SampleSpace:
    """Check that ``members`` are nonzero, pairwise orthogonal and complete.

    Raises
    ------
    InvalidSampleSpace
        With ``violation`` set to ``"zero_member"``, ``"orthogonality"``
        (``detail`` = offending index pair and overlap) or ``"completeness"``
        (``detail`` = residual ``‖Σ[D_i] − I‖_max``).
    """
    members = tuple(members)
    if not members:
        raise InvalidSampleSpace("sample space has no members", "zero_member")
    d = members[0].ambient_dim
    for i, s in enumerate(members):
        if s.ambient_dim != d:
            raise DimensionMismatch(f"member {i} has dimension {s.ambient_dim}, expected {d}")
        if s.is_zero():
            raise InvalidSampleSpace(f"member {i} is the zero subspace", "zero_member", i)
    for i, j in combinations(range(len(members)), 2):
        r = nm.max_abs(members[i].projector @ members[j].projector)
        if r > tol_comm:
            raise InvalidSampleSpace(
                f"members {i} and {j} are not orthogonal (‖[D_i][D_j]‖_max = {r:.3e})",
                "orthogonality",
                (i, j, r),
            )
    total = sum(m.projector for m in members)
    r = nm.max_abs(total - np.eye(d))
    if r > tol_proj:
        raise InvalidSampleSpace(
            f"members do not sum to the identity (residual {r:.3e})", "completeness", r
        )
    return SampleSpace(members)


def basis_sample_space(basis=None, dim: int | None = None) -> SampleSpace:
    """Sample space of rays along the columns of ``basis`` (default: standard basis)."""
    if basis is None:
        basis = np.eye(dim, dtype=complex)
    basis = nm.as_square(basis, "basis")
    return validate_sample_space([Subspace.span([basis[:, k]]) for k in range(basis.shape[1])])


# --- events -------------------------------------------------------------------


def mask_indices(mask, size: int) -> tuple[int, ...]:
    """Normalize an event mask to a sorted tuple of 0-based member indices.

    ``mask`` may be an ``int`` bit mask or an iterable of indices.
    """
    if isinstance(mask, (int, np.integer)):
        mask = int(mask)
        if mask < 0 or mask >> size:
            raise IndexError(f"mask {mask:#b} has bits outside {size} members")
        return tuple(i for i in range(size) if mask >> i & 1)
    idx = tuple(sorted(set(int(i) for i in mask)))
    for i in idx:
        if not 0 <= i < size:
            raise IndexError(f"member index {i} out of range for {size} members")
    return idx


def to_bitmask(indices: Iterable[int]) -> int:
    out = 0
    for i in indices:
        out |= 1 << int(i)
    return out


def event_projector(space: SampleSpace, mask) -> np.ndarray:
    """Sum of the member projectors selected by ``mask``."""
    idx = mask_indices(mask, space.size)
    d = space.ambient_dim
    if not idx:
        return np.zeros((d, d), dtype=complex)
    return space.projectors[list(idx)].sum(axis=0)


@dataclass(frozen=True, eq=False)
class FrameworkStatic:
    """Boolean event algebra generated by a sample space."""

    base: SampleSpace

    @property
    def size(self) -> int:
        return self.base.size

    @property
    def ambient_dim(self) -> int:
        return self.base.ambient_dim

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def masks(self) -> range:
        if self.size > ENUMERATION_CAP:
            raise CapExceeded(
                f"{self.size} atoms give 2^{self.size} events; enumeration is capped at "
                f"{ENUMERATION_CAP} atoms"
            )
        return range(1 << self.size)

    def projector(self, mask) -> np.ndarray:
        return event_projector(self.base, mask)

    def subspace(self, mask) -> Subspace:
        idx = mask_indices(mask, self.size)
        if not idx:
            return Subspace.zero(self.ambient_dim)
        return Subspace.span(np.hstack([self.base.members[i].basis for i in idx]))

    def events(self) -> Iterator[tuple[int, np.ndarray]]:
        for m in self.masks():
            yield m, self.projector(m)

    def atoms(self, tol: float = TOL_COMM) -> list[int]:
        """Masks of the minimal nonzero events, found from projectors alone.

        An event is an atom when no other nonzero event lies strictly below
        it.  For a framework these are exactly the single-member masks.
        """
        evs = [(m, p, int(round(np.trace(p).real))) for m, p in self.events() if m]
        out = []
        for m, p, r in evs:
            below = any(
                r2 < r and nm.max_abs(p @ p2 - p2) <= tol for m2, p2, r2 in evs if m2 != m
            )
            if not below:
                out.append(m)
        return out


# --- probabilities ------------------------------------------------------------


def _clamp(x: float, tol: float = TOL_PROB) -> float:
    if x < -tol or x > 1 + tol:
        raise ValueError(f"probability {x:.3e} outside [0, 1] beyond tolerance")
    return min(max(x, 0.0), 1.0)


def lattice_measure(rho, a) -> float:
    """Born weight ``Tr(ρ [A])`` of a subspace or projector, clamped to [0, 1]."""
    rho = as_state(rho)
    p = a.projector if isinstance(a, Subspace) else np.asarray(a, dtype=complex)
    if p.shape != rho.matrix.shape:
        raise DimensionMismatch(f"state of dimension {rho.dim} vs operator of shape {p.shape}")
    return _clamp(rho.expectation(p).real, 1e-9)


def probability_function(rho, fw: FrameworkStatic) -> dict[int, float]:
    """Probability of every event of ``fw``, keyed by bit mask."""
    rho = as_state(rho)
    if rho.dim != fw.ambient_dim:
        raise DimensionMismatch(f"state of dimension {rho.dim} vs framework of {fw.ambient_dim}")
    out = {}
    for m in fw.masks():
        # Born weight of the event projector directly, not a sum of atoms
        out[m] = _clamp(rho.expectation(fw.projector(m)).real, 1e-9) if m else 0.0
    return out


@dataclass
class KolmogorovReport:
    nonnegativity: float
    normalization: float
    additivity: float
    overlap: float

    def max_residual(self) -> float:
        return max(self.nonnegativity, self.normalization, self.additivity, self.overlap)

    def holds(self, tol: float = TOL_PROB) -> bool:
        return self.max_residual() <= tol


def kolmogorov_residuals(probs: dict[int, float], size: int) -> KolmogorovReport:
    """Check a mask-keyed probability map against the Kolmogorov conditions.

    Additivity is tested on every disjoint pair of events, the overlap
    equation ``P(A∨B) = P(A) + P(B) − P(A∧B)`` on every pair.
    """
    full = (1 << size) - 1
    neg = max((max(0.0, -p) for p in probs.values()), default=0.0)
    norm = abs(probs[full] - 1.0)
    add = 0.0
    ovl = 0.0
    keys = sorted(probs)
    for a in keys:
        for b in keys:
            if a & b == 0:
                add = max(add, abs(probs[a | b] - probs[a] - probs[b]))
            ovl = max(ovl, abs(probs[a | b] - probs[a] - probs[b] + probs[a & b]))
    add = max(add, abs(probs.get(0, 0.0)))
    return KolmogorovReport(neg, norm, add, ovl)


@dataclass
class NoncontextualityReport:
    shared: list[tuple[int, int]]
    max_deviation: float
    exhaustive: bool = True
    deviations: list[float] = field(default_factory=list)


def shared_events(
    fw1: FrameworkStatic, fw2: FrameworkStatic, tol: float = TOL_PROJ
) -> list[tuple[int, int]]:
    """Pairs ``(mask1, mask2)`` whose event projectors coincide."""
    if fw1.ambient_dim != fw2.ambient_dim:
        raise DimensionMismatch("frameworks live in different dimensions")
    by_rank: dict[int, list[tuple[int, np.ndarray]]] = {}
    for m, p in fw2.events():
        by_rank.setdefault(int(round(np.trace(p).real)), []).append((m, p))
    out = []
    for m1, p1 in fw1.events():
        r = int(round(np.trace(p1).real))
        for m2, p2 in by_rank.get(r, ()):
            if nm.max_abs(p1 - p2) <= tol:
                out.append((m1, m2))
    return out


def noncontextuality_check(
    rho, fw1: FrameworkStatic, fw2: FrameworkStatic, tol: float = TOL_PROJ
) -> NoncontextualityReport:
    """Compare the probability each framework assigns to every shared event."""
    rho = as_state(rho)
    p1 = probability_function(rho, fw1)
    p2 = probability_function(rho, fw2)
    pairs = shared_events(fw1, fw2, tol)
    devs = [abs(p1[a] - p2[b]) for a, b in pairs]
    return NoncontextualityReport(pairs, max(devs, default=0.0), True, devs)


class Truth(enum.Enum):
    TRUE = "T"
    FALSE = "F"
    INDETERMINATE = "?"


def pure_truth_values(psi, fw: FrameworkStatic, tol: float = TOL_PROB) -> dict[int, Truth]:
    """Truth value of every event for a pure state: probability 1 or 0, else indeterminate."""
    rho = StateDensity.pure(psi)
    out = {}
    for m, p in probability_function(rho, fw).items():
        if abs(p - 1) <= tol:
            out[m] = Truth.TRUE
        elif abs(p) <= tol:
            out[m] = Truth.FALSE
        else:
            out[m] = Truth.INDETERMINATE
    return out
