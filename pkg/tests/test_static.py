import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqt import numerics as nm
from cqt.errors import DimensionMismatch, InvalidSampleSpace, InvalidState
from cqt.lattice import Subspace, check_ortholattice_axioms, q_join_all
from cqt.sampling import (
    random_density,
    random_ket,
    random_sample_space,
    random_sharing_pair,
    random_subspace,
)
from cqt.static import (
    FrameworkStatic,
    StateDensity,
    Truth,
    basis_sample_space,
    event_projector,
    kolmogorov_residuals,
    lattice_measure,
    mask_indices,
    noncontextuality_check,
    probability_function,
    pure_truth_values,
    validate_sample_space,
)

from conftest import S, ray

seeds = st.integers(0, 2**32 - 1)


class TestStateDensity:
    def test_pure_requires_normalization(self):
        with pytest.raises(InvalidState):
            StateDensity.pure([1, 1])
        assert StateDensity.pure([1, 1], normalize=True).is_pure()

    def test_rejects_bad_trace_and_negative(self):
        with pytest.raises(InvalidState):
            StateDensity(np.eye(2))
        with pytest.raises(InvalidState):
            StateDensity(np.diag([1.5, -0.5]))

    def test_mixed_is_not_pure(self):
        assert not StateDensity.maximally_mixed(3).is_pure()


class TestSampleSpace:
    def test_basis_rays_valid(self):
        s = validate_sample_space([ray(1, 0), ray(0, 1)])
        assert s.size == 2

    def test_non_orthogonal_rejected(self):
        with pytest.raises(InvalidSampleSpace) as exc:
            validate_sample_space([ray(1, 0), ray(S, S)])
        assert exc.value.violation == "orthogonality"
        i, j, overlap = exc.value.detail
        assert (i, j) == (0, 1) and overlap == pytest.approx(0.5)

    def test_block_decomposition(self):
        e = np.eye(3)
        s = validate_sample_space([Subspace.span([e[0], e[1]]), Subspace.span([e[2]])])
        assert s.ranks == (2, 1)

    def test_incomplete_and_zero(self):
        with pytest.raises(InvalidSampleSpace) as exc:
            validate_sample_space([ray(1, 0, 0), ray(0, 1, 0)])
        assert exc.value.violation == "completeness"
        with pytest.raises(InvalidSampleSpace) as exc:
            validate_sample_space([Subspace.zero(2), Subspace.full(2)])
        assert exc.value.violation == "zero_member"


class TestEvents:
    def test_empty_and_full(self, rng):
        s = random_sample_space(4, 3, rng)
        assert nm.max_abs(event_projector(s, 0)) == 0
        assert nm.max_abs(event_projector(s, 0b111) - np.eye(4)) <= 1e-12

    def test_rank_additivity(self, rng):
        s = random_sample_space(6, 3, rng)
        p = event_projector(s, [0, 1])
        eig = np.linalg.eigvalsh(p)
        assert int(np.sum(eig > 0.5)) == s.ranks[0] + s.ranks[1]
        assert nm.max_abs(p @ p - p) <= 1e-12

    def test_out_of_range(self, rng):
        s = random_sample_space(3, 2, rng)
        with pytest.raises(IndexError):
            event_projector(s, [2])
        with pytest.raises(IndexError):
            mask_indices(0b100, 2)

    def test_atoms_recovered(self, rng):
        for _ in range(5):
            s = random_sample_space(6, int(rng.integers(1, 5)), rng)
            fw = FrameworkStatic(s)
            assert sorted(fw.atoms()) == [1 << i for i in range(s.size)]
            for m in fw.atoms():
                assert fw.subspace(m).same_as(s.members[m.bit_length() - 1])


class TestMeasure:
    def test_eigenproperty(self):
        assert lattice_measure(StateDensity.pure([1, 0]), ray(1, 0)) == 1.0

    def test_half(self):
        psi0, plus = np.array([1, 0]), np.array([S, S])
        assert lattice_measure(StateDensity.pure(psi0), ray(S, S)) == pytest.approx(abs(np.vdot(plus, psi0)) ** 2, abs=1e-15)

    def test_maximally_mixed(self, rng):
        a = random_subspace(5, 3, rng)
        assert lattice_measure(StateDensity.maximally_mixed(5), a) == pytest.approx(3 / 5, abs=1e-14)

    def test_extremes_and_dims(self, rng):
        rho = random_density(4, rng)
        assert lattice_measure(rho, Subspace.full(4)) == pytest.approx(1, abs=1e-14)
        assert lattice_measure(rho, Subspace.zero(4)) == 0
        with pytest.raises(DimensionMismatch):
            lattice_measure(rho, Subspace.full(3))

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_additive_over_orthogonal_subspaces(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 8))
        s = random_sample_space(d, int(rng.integers(2, d + 1)), rng)
        rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        pick = [m for m in s.members if rng.random() < 0.6] or [s.members[0]]
        joined = q_join_all(pick)
        assert abs(lattice_measure(rho, joined) - sum(lattice_measure(rho, m) for m in pick)) <= 1e-12
        # normalized lattice measure on the whole decomposition
        assert abs(sum(lattice_measure(rho, m) for m in s.members) - 1) <= 1e-12


class TestProbabilityFunction:
    def test_atoms_of_superposition(self):
        fw = FrameworkStatic(basis_sample_space(dim=2))
        p = probability_function(StateDensity.pure([S, S]), fw)
        assert p[0b01] == pytest.approx(0.5, abs=1e-15) and p[0b10] == pytest.approx(0.5, abs=1e-15)
        assert p[0b11] == pytest.approx(p[0b01] + p[0b10], abs=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_kolmogorov(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 7))
        fw = FrameworkStatic(random_sample_space(d, int(rng.integers(1, min(d, 4) + 1)), rng))
        p = probability_function(random_density(d, rng), fw)
        assert kolmogorov_residuals(p, fw.size).holds(1e-10)

    def test_overlap_equation_with_subspace_ops(self, rng):
        fw = FrameworkStatic(random_sample_space(5, 4, rng))
        rho = random_density(5, rng)
        for a in fw.masks():
            for b in fw.masks():
                join = fw.subspace(a) | fw.subspace(b)
                meet = fw.subspace(a) & fw.subspace(b)
                lhs = lattice_measure(rho, join)
                rhs = lattice_measure(rho, fw.subspace(a)) + lattice_measure(rho, fw.subspace(b)) - lattice_measure(rho, meet)
                assert abs(lhs - rhs) <= 1e-10

    def test_boolean_closure(self, rng):
        for _ in range(4):
            d = int(rng.integers(2, 9))
            fw = FrameworkStatic(random_sample_space(d, int(rng.integers(1, min(d, 4) + 1)), rng))
            events = [fw.subspace(m) for m in fw.masks()]
            rep = check_ortholattice_axioms(events)
            assert rep.holds("distributive_meet_over_join") and rep.holds("distributive_join_over_meet")
            # q-operations stay inside the event set
            for a in fw.masks():
                for b in fw.masks():
                    assert (fw.subspace(a) & fw.subspace(b)).same_as(fw.subspace(a & b))
                    assert (fw.subspace(a) | fw.subspace(b)).same_as(fw.subspace(a | b))
                assert (~fw.subspace(a)).same_as(fw.subspace(fw.full_mask ^ a))


class TestNoncontextuality:
    def test_same_framework(self, rng):
        fw = FrameworkStatic(random_sample_space(4, 3, rng))
        rep = noncontextuality_check(random_density(4, rng), fw, fw)
        assert rep.max_deviation == 0 and len(rep.shared) == 8

    def test_coarsened_basis_shares_plane(self, rng):
        e = np.eye(3)
        fw1 = FrameworkStatic(basis_sample_space(dim=3))
        fw2 = FrameworkStatic(validate_sample_space([ray(1, 0, 0), Subspace.span([e[1], e[2]])]))
        rho = random_density(3, rng)
        rep = noncontextuality_check(rho, fw1, fw2)
        assert (0b110, 0b10) in rep.shared
        plane = np.diag([0, 1, 1])
        direct = np.trace(rho.matrix @ plane).real
        i = rep.shared.index((0b110, 0b10))
        assert rep.deviations[i] <= 1e-15
        assert probability_function(rho, fw2)[0b10] == pytest.approx(direct, abs=1e-15)

    def test_incompatible_share_trivial_events(self, rng):
        fw1 = FrameworkStatic(basis_sample_space(dim=2))
        fw2 = FrameworkStatic(validate_sample_space([ray(S, S), ray(S, -S)]))
        rep = noncontextuality_check(random_density(2, rng), fw1, fw2)
        assert sorted(rep.shared) == [(0, 0), (3, 3)]
        assert rep.max_deviation <= 1e-15

    def test_random_pairs(self, rng):
        for _ in range(10):
            d = int(rng.integers(3, 7))
            s1, s2 = random_sharing_pair(d, rng)
            rep = noncontextuality_check(random_density(d, rng), FrameworkStatic(s1), FrameworkStatic(s2))
            assert len(rep.shared) >= 3
            assert rep.max_deviation <= 1e-12


class TestTruthValues:
    def test_eigenstate(self):
        tv = pure_truth_values([1, 0], FrameworkStatic(basis_sample_space(dim=2)))
        assert tv[0b01] is Truth.TRUE and tv[0b10] is Truth.FALSE and tv[0b11] is Truth.TRUE

    def test_superposition_indeterminate(self):
        tv = pure_truth_values([S, S], FrameworkStatic(basis_sample_space(dim=2)))
        assert tv[0b01] is Truth.INDETERMINATE and tv[0b10] is Truth.INDETERMINATE

    def test_true_iff_eigenvector(self, rng):
        for _ in range(5):
            d = int(rng.integers(2, 6))
            s = random_sample_space(d, int(rng.integers(2, d + 1)), rng)
            # a state inside one member makes several events true
            psi = s.members[0].basis @ random_ket(s.members[0].rank, rng)
            fw = FrameworkStatic(s)
            tv = pure_truth_values(psi, fw)
            for m, v in tv.items():
                p = fw.projector(m)
                assert (v is Truth.TRUE) == (np.linalg.norm(p @ psi - psi) <= 1e-9)
            assert tv[fw.full_mask] is Truth.TRUE
