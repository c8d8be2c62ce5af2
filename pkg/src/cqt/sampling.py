"""Seeded random instances: unitaries, states, sample spaces and families.

Every function takes an explicit ``numpy.random.Generator`` so that callers
own their seeds; nothing here touches global RNG state.
"""

from __future__ import annotations

import numpy as np

from . import numerics as nm
from .lattice import Subspace
from .static import SampleSpace, StateDensity, validate_sample_space


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    q, r = np.linalg.qr(gaussian_matrix(d, d, rng))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = gaussian_matrix(d, d, rng)
    return scale * (g + nm.dagger(g)) / 2


def random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = gaussian_matrix(d, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> StateDensity:
    rank = d if rank is None else rank
    g = gaussian_matrix(d, rank, rng)
    m = g @ nm.dagger(g)
    return StateDensity(m / np.trace(m).real)


def random_partition(d: int, m: int, rng: np.random.Generator) -> list[int]:
    """Random composition of ``d`` into ``m`` positive parts."""
    if not 1 <= m <= d:
        raise ValueError(f"cannot split dimension {d} into {m} nonzero parts")
    cuts = np.sort(rng.choice(np.arange(1, d), size=m - 1, replace=False)) if m > 1 else []
    edges = [0, *map(int, cuts), d]
    return [b - a for a, b in zip(edges, edges[1:])]


def random_sample_space(
    d: int, m: int | None, rng: np.random.Generator, unitary: np.ndarray | None = None
) -> SampleSpace:
    """Split the columns of a random unitary into ``m`` groups of random sizes."""
    if m is None:
        m = int(rng.integers(1, d + 1))
    u = random_unitary(d, rng) if unitary is None else unitary
    parts = random_partition(d, m, rng)
    members, start = [], 0
    for k in parts:
        members.append(Subspace.span(u[:, start : start + k]))
        start += k
    return validate_sample_space(members)


def random_subspace(d: int, k: int, rng: np.random.Generator) -> Subspace:
    if k == 0:
        return Subspace.zero(d)
    return Subspace.span(gaussian_matrix(d, k, rng))


def random_subprojector(p: np.ndarray, rng: np.random.Generator, k: int | None = None) -> np.ndarray:
    """Projector onto a random subspace of the range of projector ``p``.

    ``k`` defaults to a random rank between 1 and ``rank(p)``.
    """
    w, v = nm.hermitian_eig(p)
    rng_basis = v[:, w > 0.5]
    r = rng_basis.shape[1]
    if r == 0:
        return np.zeros_like(p)
    k = int(rng.integers(1, r + 1)) if k is None else k
    q = rng_basis @ random_unitary(r, rng)[:, :k]
    return q @ nm.dagger(q)


def random_family(
    rng: np.random.Generator,
    dim: int,
    n_times: int,
    max_members: int | None = None,
    mixed: bool = False,
    hamiltonian_scale: float = 1.0,
):
    """Random family with a random Hamiltonian and random sample spaces."""
    from .histories import Family

    times = np.cumsum(rng.uniform(0.2, 1.5, size=n_times))
    spaces = []
    for _ in range(n_times):
        top = dim if max_members is None else min(dim, max_members)
        m = int(rng.integers(2 if dim > 1 else 1, top + 1)) if top >= 2 else 1
        spaces.append(random_sample_space(dim, m, rng))
    state = random_density(dim, rng) if mixed else StateDensity.pure(random_ket(dim, rng))
    h = random_hermitian(dim, rng, hamiltonian_scale)
    return Family.build(state, spaces, times=list(times), hamiltonian=h, t0=0.0)


def random_sharing_pair(d: int, rng: np.random.Generator) -> tuple[SampleSpace, SampleSpace]:
    """Two sample spaces with at least one member in common.

    The second keeps a random nonempty subset of the first's members and
    splits the orthogonal complement of that subset afresh.
    """
    first = random_sample_space(d, int(rng.integers(2, d + 1)), rng)
    m = first.size
    keep = sorted(rng.choice(m, size=int(rng.integers(1, m)), replace=False).tolist())
    kept = [first.members[i] for i in keep]
    rest = np.hstack([first.members[i].basis for i in range(m) if i not in keep])
    r = rest.shape[1]
    rotated = rest @ random_unitary(r, rng)
    parts = random_partition(r, int(rng.integers(1, r + 1)), rng)
    new, start = [], 0
    for k in parts:
        new.append(Subspace.span(rotated[:, start : start + k]))
        start += k
    return first, validate_sample_space(kept + new)
