"""Families of histories, chain operators and the decoherence functional.

A :class:`Family` fixes an initial state at ``t0``, a Hamiltonian and one
sample space per projection time ``t1 < ... < tN``.  Elementary histories
are tuples of 0-based member indices, one per time.  All quantities are
computed in the Heisenberg picture:

    Ā_n = U(t_n, t0)† [A_n] U(t_n, t0),    C = Ā_N ··· Ā_1,
    D(h, h') = Tr(ρ0 C_{h'}† C_h).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import numerics as nm
from .errors import (
    CapExceeded,
    DimensionMismatch,
    InconsistentFamily,
    ZeroProbabilityPrehistory,
)
from .lattice import Subspace
from .static import SampleSpace, StateDensity, as_state, mask_indices, validate_sample_space

TOL_DEC = 1e-9
TOL_ZERO = 1e-12
MAX_HISTORIES = 64

History = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Family:
    """State, dynamics and per-time sample spaces.  Build with :meth:`build`."""

    state: StateDensity
    hamiltonian: np.ndarray
    t0: float
    times: tuple[float, ...]
    spaces: tuple[SampleSpace, ...]
    heisenberg: tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def build(
        cls,
        state,
        spaces: Sequence[SampleSpace | Sequence[Subspace]],
        times: Sequence[float] | None = None,
        hamiltonian=None,
        t0: float = 0.0,
    ) -> "Family":
        """Validate inputs and precompute the Heisenberg projectors.

        ``times`` defaults to ``t0 + 1, t0 + 2, ...`` and ``hamiltonian`` to
        zero.  Plain member lists are validated into sample spaces.
        """
        state = as_state(state)
        d = state.dim
        spaces = tuple(s if isinstance(s, SampleSpace) else validate_sample_space(s) for s in spaces)
        if not spaces:
            raise ValueError("a family needs at least one projection time")
        for n, s in enumerate(spaces):
            if s.ambient_dim != d:
                raise DimensionMismatch(f"sample space {n} has dimension {s.ambient_dim}, state has {d}")
        if times is None:
            times = [t0 + k + 1 for k in range(len(spaces))]
        times = tuple(float(t) for t in times)
        if len(times) != len(spaces):
            raise ValueError(f"{len(times)} times for {len(spaces)} sample spaces")
        prev = float(t0)
        for t in times:
            if not t > prev:
                raise ValueError(f"projection times must increase strictly from t0={t0}: got {times}")
            prev = t
        h = np.zeros((d, d), dtype=complex) if hamiltonian is None else nm.require_hermitian(
            hamiltonian, name="hamiltonian"
        )
        if h.shape != (d, d):
            raise DimensionMismatch(f"hamiltonian shape {h.shape}, state dimension {d}")
        heis = []
        for t, s in zip(times, spaces):
            u = nm.propagator(h, t, t0)
            bars = nm.dagger(u)[None, :, :] @ s.projectors @ u[None, :, :]
            bars.setflags(write=False)
            heis.append(bars)
        h = np.array(h)
        h.setflags(write=False)
        return cls(state, h, float(t0), times, spaces, tuple(heis))

    @property
    def dim(self) -> int:
        return self.state.dim

    @property
    def n_times(self) -> int:
        return len(self.times)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.size for s in self.spaces)

    @property
    def n_histories(self) -> int:
        return int(np.prod(self.shape))

    def histories(self) -> list[History]:
        """All elementary histories in lexicographic order."""
        return list(itertools.product(*(range(m) for m in self.shape)))

    def check_history(self, h: Sequence[int], partial: bool = False) -> History:
        h = tuple(int(j) for j in h)
        if len(h) != self.n_times and not (partial and len(h) <= self.n_times):
            raise IndexError(f"history {h} has length {len(h)}, family has {self.n_times} times")
        for n, j in enumerate(h):
            if not 0 <= j < self.shape[n]:
                raise IndexError(f"index {j} at time {n} out of range for {self.shape[n]} members")
        return h

    def coarsened(self, groups: Sequence[Sequence[Sequence[int]] | None]) -> "Family":
        """Family whose member at each time is a union of old members.

        ``groups[n]`` partitions the member indices of time ``n`` (``None``
        keeps that time unchanged).  Merged members get the summed projector.
        """
        if len(groups) != self.n_times:
            raise ValueError("one grouping per time required")
        spaces = []
        for s, g in zip(self.spaces, groups):
            if g is None:
                spaces.append(s)
                continue
            flat = sorted(i for part in g for i in part)
            if flat != list(range(s.size)):
                raise ValueError(f"groups {g} do not partition {s.size} members")
            spaces.append(
                validate_sample_space(
                    [Subspace.span(np.hstack([s.members[i].basis for i in part])) for part in g]
                )
            )
        return Family.build(self.state, spaces, self.times, self.hamiltonian, self.t0)


def heisenberg_projector(fam: Family, n: int, j: int) -> np.ndarray:
    """``U(t_n,t0)⁻¹ [A_n^j] U(t_n,t0)`` (0-based time and member index)."""
    if not 0 <= n < fam.n_times:
        raise IndexError(f"time index {n} out of range")
    if not 0 <= j < fam.shape[n]:
        raise IndexError(f"member index {j} out of range at time {n}")
    return fam.heisenberg[n][j]


def chain_operator(fam: Family, h: Sequence[int]) -> np.ndarray:
    """Ordered product of Heisenberg projectors, latest time leftmost.

    ``h`` may be a prefix of a full history; the empty prefix gives the
    identity.
    """
    h = fam.check_history(h, partial=True)
    c = np.eye(fam.dim, dtype=complex)
    for n, j in enumerate(h):
        c = fam.heisenberg[n][j] @ c
    return c


def homogeneous_chain_operator(fam: Family, masks: Sequence) -> np.ndarray:
    """Chain operator of a homogeneous event with per-time member sets ``masks``."""
    if len(masks) != fam.n_times:
        raise ValueError("one mask per time required")
    c = np.eye(fam.dim, dtype=complex)
    for n, m in enumerate(masks):
        idx = mask_indices(m, fam.shape[n])
        b = fam.heisenberg[n][list(idx)].sum(axis=0) if idx else np.zeros_like(c)
        c = b @ c
    return c


def _functional(rho: StateDensity, c1: np.ndarray, c2: np.ndarray) -> complex:
    return complex(np.trace(rho.matrix @ nm.dagger(c2) @ c1))


def decoherence_functional(fam: Family, h1: Sequence[int], h2: Sequence[int]) -> complex:
    """``D(h1, h2) = Tr(ρ0 C_{h2}† C_{h1})``."""
    return _functional(fam.state, chain_operator(fam, h1), chain_operator(fam, h2))


def _clamp_prob(p: float) -> float:
    if p < -1e-9 or p > 1 + 1e-9:
        raise ValueError(f"history weight {p:.3e} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def born_probability(fam: Family, h: Sequence[int]) -> float:
    """Probability ``Tr(ρ0 C† C)`` of an elementary history."""
    c = chain_operator(fam, fam.check_history(h))
    return _clamp_prob(_functional(fam.state, c, c).real)


def homogeneous_chain_probability(fam: Family, masks: Sequence) -> float:
    """Chain formula applied directly to a homogeneous compound event.

    Equals the summed elementary probabilities only when the family is
    consistent; the difference is twice the real interference terms.
    """
    c = homogeneous_chain_operator(fam, masks)
    return _clamp_prob(_functional(fam.state, c, c).real)


# --- dynamic events -----------------------------------------------------------


@dataclass(frozen=True)
class DynamicEvent:
    """Set of elementary histories of a family (the empty set is the null event)."""

    histories: frozenset

    @classmethod
    def of(cls, fam: Family, histories: Iterable[Sequence[int]]) -> "DynamicEvent":
        return cls(frozenset(fam.check_history(h) for h in histories))

    @classmethod
    def homogeneous(cls, fam: Family, masks: Sequence) -> "DynamicEvent":
        sets = [mask_indices(m, fam.shape[n]) for n, m in enumerate(masks)]
        return cls(frozenset(itertools.product(*sets)))

    def __len__(self):
        return len(self.histories)

    def __or__(self, other: "DynamicEvent") -> "DynamicEvent":
        return DynamicEvent(self.histories | other.histories)

    def __and__(self, other: "DynamicEvent") -> "DynamicEvent":
        return DynamicEvent(self.histories & other.histories)


def is_homogeneous(e: DynamicEvent) -> list[tuple[int, ...]] | None:
    """Per-time index sets if ``e`` is their Cartesian product, else ``None``."""
    if not e.histories:
        raise ValueError("the null event has no per-time factorization")
    hs = list(e.histories)
    n_times = len(hs[0])
    proj = [tuple(sorted({h[n] for h in hs})) for n in range(n_times)]
    size = int(np.prod([len(p) for p in proj]))
    if size != len(hs):
        return None
    return proj


# --- consistency --------------------------------------------------------------


class Verdict(enum.Enum):
    MEDIUM_CONSISTENT = "MediumConsistent"
    WEAK_ONLY = "WeakOnly"
    INCONSISTENT = "Inconsistent"

    def __str__(self):
        return self.value


@dataclass
class DecoherenceReport:
    """Decoherence matrix over all elementary histories plus the verdict.

    ``D[a, b] = D(histories[a], histories[b])``.  ``worst_pair`` holds the
    off-diagonal pair deciding the verdict and ``worst_value`` its D entry.
    """

    histories: list[History]
    D: np.ndarray
    verdict: Verdict
    worst_pair: tuple[History, History] | None
    worst_value: complex
    tol: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.clip(self.D.diagonal().real, 0.0, 1.0)

    @property
    def offdiag_max(self) -> float:
        m = len(self.histories)
        if m < 2:
            return 0.0
        return float(np.max(np.abs(self.D[~np.eye(m, dtype=bool)])))

    def index(self, h: Sequence[int]) -> int:
        return self.histories.index(tuple(h))

    def probability(self, h: Sequence[int]) -> float:
        return float(self.probabilities[self.index(h)])


def decoherence_matrix(fam: Family, histories: Sequence[History] | None = None) -> np.ndarray:
    hs = fam.histories() if histories is None else list(histories)
    chains = np.stack([chain_operator(fam, h) for h in hs])
    m, d = len(hs), fam.dim
    left = (chains @ fam.state.matrix).reshape(m, d * d)
    right = chains.reshape(m, d * d)
    # D[a, b] = Σ_ij conj(C_b)_ij (C_a ρ)_ij = Tr(ρ C_b† C_a)
    return left @ right.conj().T


def _first_max(vals: np.ndarray, mask: np.ndarray) -> tuple[int, int]:
    v = np.where(mask, vals, -1.0)
    top = v.max()
    hits = np.argwhere(v >= top - 1e-12)
    return int(hits[0][0]), int(hits[0][1])


def classify(fam: Family, tol: float = TOL_DEC, max_histories: int = MAX_HISTORIES) -> DecoherenceReport:
    """Build the decoherence matrix and decide medium / weak consistency.

    Raises
    ------
    CapExceeded
        If the family has more than ``max_histories`` elementary histories.
    """
    m = fam.n_histories
    if m > max_histories:
        raise CapExceeded(
            f"family has {m} elementary histories (> {max_histories}); use a coarser family"
        )
    hs = fam.histories()
    D = decoherence_matrix(fam, hs)
    upper = np.triu(np.ones((m, m), dtype=bool), 1)
    if m < 2:
        return DecoherenceReport(hs, D, Verdict.MEDIUM_CONSISTENT, None, 0j, tol)
    re, ab = np.abs(D.real), np.abs(D)
    if np.max(re[upper]) > tol:
        verdict, score = Verdict.INCONSISTENT, re
    elif np.max(ab[upper]) > tol:
        verdict, score = Verdict.WEAK_ONLY, ab
    else:
        verdict, score = Verdict.MEDIUM_CONSISTENT, ab
    a, b = _first_max(score, upper)
    return DecoherenceReport(hs, D, verdict, (hs[a], hs[b]), complex(D[a, b]), tol)


def event_probability(fam: Family, e: DynamicEvent, report: DecoherenceReport | None = None) -> float:
    """Probability of a dynamic event as the sum over its elementary histories.

    Compound events are only assigned probabilities in a medium-consistent
    family; a single elementary history always has one.

    Raises
    ------
    InconsistentFamily
        For a compound event when the family is not medium-consistent.
    """
    if not e.histories:
        return 0.0
    if len(e.histories) == 1:
        return born_probability(fam, next(iter(e.histories)))
    report = classify(fam) if report is None else report
    if report.verdict is not Verdict.MEDIUM_CONSISTENT:
        raise InconsistentFamily(
            f"family is not a framework (verdict {report.verdict}); compound-event "
            "probabilities require the consistency condition"
        )
    return float(sum(report.probability(h) for h in e.histories))


# --- conditional measures -----------------------------------------------------


def conditional_measure(fam: Family, prehistory: Sequence[int], b, tol_zero: float = TOL_ZERO) -> float:
    """Projector measure conditioned on a prehistory.

    ``Z(B) = Tr(ρ0 C_n† B C_n) / Tr(ρ0 C_n† C_n)`` with ``C_n`` the chain
    operator of ``prehistory`` (length ``n``, possibly zero).

    Raises
    ------
    ZeroProbabilityPrehistory
        If the denominator does not exceed ``tol_zero``.
    """
    c = chain_operator(fam, prehistory)
    b = np.asarray(b, dtype=complex)
    den = _functional(fam.state, c, c).real
    if den <= tol_zero:
        raise ZeroProbabilityPrehistory(
            f"prehistory {tuple(prehistory)} has probability {den:.3e}; conditional undefined"
        )
    num = complex(np.trace(fam.state.matrix @ nm.dagger(c) @ b @ c)).real
    return num / den


@dataclass
class RecursionReport:
    recursion_residual: float
    telescoping_residual: float
    checked: int
    skipped: list[str] = field(default_factory=list)

    def holds(self, tol_rec: float = 1e-9, tol_tel: float = 1e-10) -> bool:
        return self.recursion_residual <= tol_rec and self.telescoping_residual <= tol_tel


def telescoped_probability(fam: Family, h: Sequence[int], tol_zero: float = TOL_ZERO) -> float:
    """History probability as ``P1 · Π Z_{C_n}(Ā_{n+1})``.

    Returns 0 as soon as a prefix has zero probability.
    """
    h = fam.check_history(h)
    p = fam.state.expectation(fam.heisenberg[0][h[0]]).real
    for n in range(1, fam.n_times):
        try:
            p *= conditional_measure(fam, h[:n], fam.heisenberg[n][h[n]], tol_zero)
        except ZeroProbabilityPrehistory:
            return 0.0
    return p


def verify_recursion(
    fam: Family,
    h: Sequence[int],
    trials: int,
    rng: np.random.Generator,
    min_prob: float = TOL_ZERO,
) -> RecursionReport:
    """Check the conditional-measure recursion and the telescoping product.

    For each time ``n`` and ``trials`` random projectors ``B ≤ Ā_n``,
    compares ``Z_{C_n}(B)`` with ``Z_{C_{n-1}}(B) / Z_{C_{n-1}}(Ā_n)``.
    Prefixes whose probability is not above ``min_prob`` are skipped and
    listed in ``skipped``.
    """
    from .sampling import random_subprojector

    h = fam.check_history(h)
    worst, checked, skipped = 0.0, 0, []
    for n in range(1, fam.n_times + 1):
        a_n = fam.heisenberg[n - 1][h[n - 1]]
        c_prev = chain_operator(fam, h[: n - 1])
        c_n = a_n @ c_prev
        p_prev = _functional(fam.state, c_prev, c_prev).real
        p_n = _functional(fam.state, c_n, c_n).real
        if p_prev <= min_prob or p_n <= min_prob:
            skipped.append(f"prefix {h[:n]} has probability {p_n:.3e}; recursion skipped")
            continue
        for _ in range(trials):
            b = random_subprojector(a_n, rng)
            lhs = conditional_measure(fam, h[:n], b)
            rhs = conditional_measure(fam, h[: n - 1], b) / conditional_measure(fam, h[: n - 1], a_n)
            worst = max(worst, abs(lhs - rhs))
            checked += 1
    tel = abs(telescoped_probability(fam, h) - born_probability(fam, h))
    return RecursionReport(worst, tel, checked, skipped)
