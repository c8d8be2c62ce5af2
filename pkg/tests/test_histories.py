import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqt import numerics as nm
from cqt.errors import CapExceeded, DimensionMismatch, InconsistentFamily, ZeroProbabilityPrehistory
from cqt.histories import (
    DynamicEvent,
    Family,
    Verdict,
    born_probability,
    chain_operator,
    classify,
    conditional_measure,
    decoherence_functional,
    decoherence_matrix,
    event_probability,
    heisenberg_projector,
    homogeneous_chain_probability,
    is_homogeneous,
    telescoped_probability,
    verify_recursion,
)
from cqt.lattice import Subspace
from cqt.oracles import build_two_slit, schrodinger_chain_operator, two_slit_merged, weak_only_qubit
from cqt.sampling import random_family, random_subprojector
from cqt.static import basis_sample_space, validate_sample_space

from conftest import S, ray

seeds = st.integers(0, 2**32 - 1)
SZ = np.diag([1.0, -1.0]).astype(complex)


def spin_family(omega=1.3):
    """|0> under H = ω σz / 2, asked about σx at t = π/ω."""
    xs = [ray(S, S), ray(S, -S)]
    return Family.build([1, 0], [xs], times=[np.pi / omega], hamiltonian=omega * SZ / 2)


class TestFamily:
    def test_defaults_and_shape(self):
        fam = build_two_slit()
        assert fam.shape == (2, 2) and fam.n_histories == 4
        assert fam.histories() == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_times_must_increase(self):
        sp = basis_sample_space(dim=2)
        with pytest.raises(ValueError):
            Family.build([1, 0], [sp, sp], times=[1.0, 1.0])
        with pytest.raises(ValueError):
            Family.build([1, 0], [sp], times=[0.0], t0=0.0)

    def test_dimension_checks(self):
        with pytest.raises(DimensionMismatch):
            Family.build([1, 0], [basis_sample_space(dim=3)])
        with pytest.raises(DimensionMismatch):
            Family.build([1, 0], [basis_sample_space(dim=2)], hamiltonian=np.eye(3))

    def test_history_index_checks(self):
        fam = build_two_slit()
        with pytest.raises(IndexError):
            born_probability(fam, (0,))
        with pytest.raises(IndexError):
            born_probability(fam, (0, 2))


class TestHeisenberg:
    def test_half_period_flips_sx(self):
        fam = spin_family()
        minus = ray(S, -S).projector
        assert nm.max_abs(heisenberg_projector(fam, 0, 0) - minus) <= 1e-12

    def test_still_dynamics_is_identity_map(self, rng):
        fam = build_two_slit()
        assert nm.max_abs(heisenberg_projector(fam, 1, 0) - fam.spaces[1].projectors[0]) == 0

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_heisenberg_members_stay_a_decomposition(self, seed):
        fam = random_family(np.random.default_rng(seed), 4, 3)
        for bars in fam.heisenberg:
            assert nm.max_abs(bars.sum(axis=0) - np.eye(4)) <= 1e-12
            for p in bars:
                assert nm.max_abs(p @ p - p) <= 1e-12

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_matches_schrodinger_picture(self, seed):
        rng = np.random.default_rng(seed)
        fam = random_family(rng, int(rng.integers(2, 6)), int(rng.integers(1, 4)))
        for h in fam.histories()[:6]:
            assert nm.max_abs(chain_operator(fam, h) - schrodinger_chain_operator(fam, h)) <= 1e-10


class TestTwoSlit:
    def test_interference_term(self):
        fam = build_two_slit()
        d = decoherence_functional(fam, (0, 0), (1, 0))
        assert abs(d - 0.25) <= 1e-12

    def test_elementary_probabilities_quarter(self):
        fam = build_two_slit()
        for h in fam.histories():
            assert born_probability(fam, h) == pytest.approx(0.25, abs=1e-12)

    def test_verdict_and_worst_pair(self):
        rep = classify(build_two_slit())
        assert rep.verdict is Verdict.INCONSISTENT
        assert rep.worst_pair == ((0, 0), (1, 0))
        assert abs(rep.worst_value - 0.25) <= 1e-12

    def test_merged_slits_versus_sum(self):
        fam = build_two_slit()
        merged = two_slit_merged(fam)
        compound = born_probability(merged, (0, 0))
        summed = born_probability(fam, (0, 0)) + born_probability(fam, (1, 0))
        assert compound == pytest.approx(1.0, abs=1e-12)
        assert summed == pytest.approx(0.5, abs=1e-12)
        assert compound - summed == pytest.approx(2 * decoherence_functional(fam, (0, 0), (1, 0)).real, abs=1e-12)
        assert homogeneous_chain_probability(fam, [0b11, 0b01]) == pytest.approx(compound, abs=1e-12)

    def test_compound_refused(self):
        fam = build_two_slit()
        with pytest.raises(InconsistentFamily, match="not a framework"):
            event_probability(fam, DynamicEvent.of(fam, [(0, 0), (1, 0)]))

    def test_marker_decoheres(self):
        fam = build_two_slit(with_marker=True)
        rep = classify(fam)
        assert rep.verdict is Verdict.MEDIUM_CONSISTENT
        assert rep.offdiag_max <= 1e-12
        e = DynamicEvent.of(fam, [(0, 0), (1, 0)])
        assert event_probability(fam, e, rep) == pytest.approx(0.5, abs=1e-12)
        assert homogeneous_chain_probability(fam, [0b11, 0b01]) == pytest.approx(0.5, abs=1e-12)


class TestClassify:
    def test_weak_only(self):
        rep = classify(weak_only_qubit())
        assert rep.verdict is Verdict.WEAK_ONLY
        assert abs(abs(rep.worst_value) - 0.25) <= 1e-12 and abs(rep.worst_value.real) <= 1e-12

    def test_single_history_is_trivially_consistent(self):
        fam = Family.build([1, 0], [[Subspace.full(2)]])
        rep = classify(fam)
        assert rep.verdict is Verdict.MEDIUM_CONSISTENT and rep.worst_pair is None

    def test_cap(self):
        sp = basis_sample_space(dim=2)
        fam = Family.build([1, 0], [sp] * 7)
        with pytest.raises(CapExceeded):
            classify(fam)
        assert classify(fam, max_histories=128).verdict is Verdict.MEDIUM_CONSISTENT

    def test_tolerance_moves_verdict(self):
        fam = build_two_slit()
        assert classify(fam, tol=0.3).verdict is Verdict.MEDIUM_CONSISTENT

    def test_single_time_always_consistent(self, rng):
        for _ in range(10):
            fam = random_family(rng, 5, 1, mixed=True)
            assert classify(fam).offdiag_max <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_matrix_invariants(self, seed):
        rng = np.random.default_rng(seed)
        fam = random_family(rng, int(rng.integers(2, 5)), int(rng.integers(1, 4)), mixed=bool(rng.integers(2)))
        D = decoherence_matrix(fam)
        assert abs(D.sum() - 1) <= 1e-10
        assert nm.max_abs(D - D.conj().T) <= 1e-12
        assert np.all(D.diagonal().real >= -1e-12)
        rep = classify(fam)
        if rep.verdict is Verdict.MEDIUM_CONSISTENT:
            assert rep.offdiag_max <= rep.tol
        # medium consistency implies weak consistency
        re_off = np.abs(D.real - np.diag(D.diagonal().real)).max()
        if rep.verdict is not Verdict.INCONSISTENT:
            assert re_off <= rep.tol

    def test_matrix_matches_pairwise_definition(self, rng):
        fam = random_family(rng, 3, 2, mixed=True)
        D = decoherence_matrix(fam)
        hs = fam.histories()
        for a, h1 in enumerate(hs):
            for b, h2 in enumerate(hs):
                assert abs(D[a, b] - decoherence_functional(fam, h1, h2)) <= 1e-12


class TestProbabilities:
    def test_quadratic_rule_not_linear(self):
        """The expectation of the chain operator itself is not a probability."""
        fam = build_two_slit()
        psi = fam.state.state_vector()
        lin = {h: np.vdot(psi, chain_operator(fam, h) @ psi).real for h in fam.histories()}
        assert lin[(0, 0)] == pytest.approx(0.5) and lin[(0, 1)] == pytest.approx(0.0, abs=1e-15)
        assert born_probability(fam, (0, 0)) == pytest.approx(0.25)
        assert born_probability(fam, (0, 1)) == pytest.approx(0.25)

    def test_single_time_reduces_to_static_born(self, rng):
        for _ in range(10):
            fam = random_family(rng, 4, 1, mixed=True)
            u = nm.propagator(fam.hamiltonian, fam.times[0], fam.t0)
            evolved = fam.state.evolved(u)
            for (j,) in fam.histories():
                static = evolved.expectation(fam.spaces[0].projectors[j]).real
                assert abs(born_probability(fam, (j,)) - static) <= 1e-12

    def test_redundant_inserted_time(self, rng):
        fam = random_family(rng, 3, 2)
        t1, t2 = fam.times
        mid = (t1 + t2) / 2
        u = nm.propagator(fam.hamiltonian, mid, t1)
        carried = validate_sample_space(
            [Subspace.from_projector(u @ p @ nm.dagger(u)) for p in fam.spaces[0].projectors]
        )
        longer = Family.build(fam.state, [fam.spaces[0], carried, fam.spaces[1]], [t1, mid, t2], fam.hamiltonian)
        for a, b in fam.histories():
            assert abs(born_probability(longer, (a, a, b)) - born_probability(fam, (a, b))) <= 1e-12
            for c in range(fam.shape[0]):
                if c != a:
                    assert born_probability(longer, (a, c, b)) <= 1e-12

    def test_trivial_inserted_time(self, rng):
        fam = random_family(rng, 3, 2, mixed=True)
        t1, t2 = fam.times
        spaces = [fam.spaces[0], validate_sample_space([Subspace.full(3)]), fam.spaces[1]]
        longer = Family.build(fam.state, spaces, [t1, (t1 + t2) / 2, t2], fam.hamiltonian)
        for h1 in fam.histories():
            for h2 in fam.histories():
                lhs = decoherence_functional(longer, (h1[0], 0, h1[1]), (h2[0], 0, h2[1]))
                assert abs(lhs - decoherence_functional(fam, h1, h2)) <= 1e-12

    def test_event_sum_matches_homogeneous_chain_when_consistent(self):
        fam = build_two_slit(with_marker=True)
        for masks in ([0b11, 0b10], [0b01, 0b11], [0b11, 0b11]):
            e = DynamicEvent.homogeneous(fam, masks)
            assert abs(event_probability(fam, e) - homogeneous_chain_probability(fam, masks)) <= 1e-12


class TestEvents:
    def test_homogeneous_factorization(self):
        sp3, sp2 = basis_sample_space(dim=3), validate_sample_space([ray(1, 0, 0), Subspace.span(np.eye(3)[:, 1:])])
        fam = Family.build([1, 0, 0], [sp3, sp2])
        assert fam.shape == (3, 2)
        assert is_homogeneous(DynamicEvent.of(fam, [(1, 0), (2, 0)])) == [(1, 2), (0,)]
        assert is_homogeneous(DynamicEvent.of(fam, [(1, 0), (2, 1)])) is None

    def test_set_operations(self):
        fam = build_two_slit()
        a = DynamicEvent.of(fam, [(0, 0)])
        b = DynamicEvent.of(fam, [(0, 0), (1, 1)])
        assert len(a | b) == 2 and (a & b) == a
        assert event_probability(fam, DynamicEvent(frozenset())) == 0.0

    def test_homogeneous_constructor(self):
        fam = build_two_slit()
        e = DynamicEvent.homogeneous(fam, [0b11, 0b01])
        assert e.histories == {(0, 0), (1, 0)}


class TestConditional:
    def test_two_slit_prefix(self):
        fam = build_two_slit()
        plus = fam.heisenberg[1][0]
        assert conditional_measure(fam, (0,), plus) == pytest.approx(0.5, abs=1e-12)
        assert conditional_measure(fam, (), fam.heisenberg[0][0]) == pytest.approx(0.5, abs=1e-12)

    def test_zero_prefix(self):
        fam = Family.build([1, 0], [basis_sample_space(dim=2)] * 2)
        with pytest.raises(ZeroProbabilityPrehistory):
            conditional_measure(fam, (1,), np.eye(2))
        assert telescoped_probability(fam, (1, 0)) == 0.0

    def test_normalized_on_prefix_member(self, rng):
        fam = random_family(rng, 4, 3)
        h = (0, 0, 0)
        for n in range(1, 4):
            if born_probability(fam, h) > 1e-6:
                assert conditional_measure(fam, h[:n], fam.heisenberg[n - 1][h[n - 1]]) == pytest.approx(1, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_recursion_and_telescoping(self, seed):
        rng = np.random.default_rng(seed)
        fam = random_family(rng, int(rng.integers(2, 6)), int(rng.integers(1, 5)), mixed=bool(rng.integers(2)))
        h = fam.histories()[int(rng.integers(fam.n_histories))]
        rep = verify_recursion(fam, h, trials=2, rng=rng, min_prob=1e-6)
        assert rep.holds()

    def test_conditional_below_member(self, rng):
        fam = random_family(rng, 5, 2)
        a2 = fam.heisenberg[1][0]
        b = random_subprojector(a2, rng)
        z_b, z_a = conditional_measure(fam, (0,), b), conditional_measure(fam, (0,), a2)
        assert -1e-12 <= z_b <= z_a + 1e-12
