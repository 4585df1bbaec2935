"""Joint atom-photon evolution, heralding and conditional states."""

import numpy as np
import pytest

from memamp.dicke import basis_state, fidelity, weak_coherent_atomic_state
from memamp.errors import (
    MixedConditionalError,
    ResourceGuardError,
    TruncationLeakageError,
    TruncationOverflowError,
)
from memamp.joint import (
    EvolutionOrder,
    HeraldPattern,
    JointState,
    ModeTruncation,
    apply_read,
    apply_write,
    build_joint,
    conditional_on_counts,
    herald,
    joint_density_traced,
    outcome_probabilities,
    reduced_conditional_density,
)

TOL = 1e-12
LOSSLESS = ModeTruncation(fock_a_max=3, fock_b_max=3, fock_c_max=0)


def evolve(atomic, p_w, p_r, order, beta_w=1.0, beta_r=1.0, trunc=LOSSLESS):
    state = build_joint(atomic, trunc)
    state = apply_write(state, p_w, beta_w, order)
    return apply_read(state, p_r, beta_r, order)


class TestModeTruncation:
    def test_defaults_resolve(self):
        trunc = ModeTruncation().resolve(100)
        assert trunc.shape() == (9, 4, 4, 3)

    def test_small_ensemble_clamps_atomic_axis(self):
        assert ModeTruncation().resolve(3).atomic_k_max == 3

    def test_minimum_bounds(self):
        with pytest.raises(ValueError):
            ModeTruncation(fock_a_max=0)
        with pytest.raises(ValueError):
            ModeTruncation(fock_c_max=-1)

    def test_dimension_cap(self):
        with pytest.raises(ResourceGuardError):
            ModeTruncation(
                fock_a_max=200, fock_b_max=200, fock_c_max=200, atomic_k_max=200
            )


class TestBuildJoint:
    def test_ground_state_embedding(self):
        state = build_joint(basis_state(0, 10, k_alloc=2), LOSSLESS)
        assert state.amplitudes[0, 0, 0, 0] == 1.0
        assert state.total_probability() == pytest.approx(1.0, abs=TOL)

    def test_two_component_embedding(self):
        atomic = weak_coherent_atomic_state(0.2, 50)
        state = build_joint(atomic, ModeTruncation())
        nonzero = np.argwhere(state.amplitudes != 0)
        assert nonzero.tolist() == [[0, 0, 0, 0], [1, 0, 0, 0]]

    def test_norm_preserved(self):
        atomic = weak_coherent_atomic_state(0.3j, 40)
        state = build_joint(atomic, ModeTruncation())
        assert state.norm() == pytest.approx(atomic.norm(), abs=TOL)

    def test_rejects_support_beyond_truncation(self):
        atomic = basis_state(5, 100, k_alloc=5)
        with pytest.raises(ValueError):
            build_joint(atomic, ModeTruncation(atomic_k_max=3))


class TestApplyWrite:
    def test_zero_coupling_is_identity(self):
        state = build_joint(weak_coherent_atomic_state(0.1, 20), LOSSLESS)
        out = apply_write(state, 0.0, 1.0, EvolutionOrder.FIRST_ORDER)
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_first_order_on_ground(self):
        p_w = 4e-3
        state = build_joint(basis_state(0, 30, k_alloc=2), LOSSLESS)
        out = apply_write(state, p_w, 1.0, EvolutionOrder.FIRST_ORDER)
        assert out.amplitudes[0, 0, 0, 0] == pytest.approx(1.0, abs=TOL)
        assert out.amplitudes[1, 1, 0, 0] == pytest.approx(np.sqrt(p_w), abs=TOL)
        assert np.count_nonzero(out.amplitudes) == 2

    def test_exact_close_to_first_order(self):
        atomic = weak_coherent_atomic_state(0.1, 1000)
        p = 1e-4
        first = evolve(atomic, p, p, EvolutionOrder.FIRST_ORDER)
        exact = evolve(atomic, p, p, EvolutionOrder.EXACT)
        diff = np.linalg.norm(first.amplitudes - exact.amplitudes)
        assert diff <= 2e-4

    def test_exact_preserves_norm(self):
        atomic = weak_coherent_atomic_state(0.2, 100)
        out = evolve(atomic, 1e-3, 1e-3, EvolutionOrder.EXACT)
        assert abs(out.norm() - 1.0) <= 1e-10

    def test_exact_leak_guard(self):
        atomic = weak_coherent_atomic_state(0.1, 1000)
        state = build_joint(atomic, ModeTruncation(fock_a_max=1, fock_b_max=1,
                                                   fock_c_max=0))
        with pytest.raises(TruncationLeakageError):
            apply_write(state, 1e-2, 1.0, EvolutionOrder.EXACT)

    def test_first_order_overflow_guard(self):
        atomic = basis_state(2, 20, k_alloc=2)
        state = build_joint(atomic, ModeTruncation(atomic_k_max=2, fock_c_max=0))
        with pytest.raises(TruncationOverflowError):
            apply_write(state, 1e-3, 1.0, EvolutionOrder.FIRST_ORDER)

    def test_write_at_physical_top_annihilates(self):
        # k = N is a physical boundary, not a truncation: no guard, no flow
        atomic = basis_state(3, 3)
        state = build_joint(atomic, ModeTruncation(fock_c_max=0))
        out = apply_write(state, 1e-3, 1.0, EvolutionOrder.FIRST_ORDER)
        assert out.amplitudes[3, 0, 0, 0] == pytest.approx(1.0, abs=TOL)
        assert np.count_nonzero(out.amplitudes) == 1

    def test_beta_below_one_needs_loss_mode(self):
        state = build_joint(basis_state(0, 5, k_alloc=2), LOSSLESS)
        with pytest.raises(ValueError):
            apply_write(state, 1e-3, 0.5, EvolutionOrder.FIRST_ORDER)

    def test_coupling_range_validated(self):
        state = build_joint(basis_state(0, 5, k_alloc=2), LOSSLESS)
        with pytest.raises(ValueError):
            apply_write(state, 1.5, 1.0, EvolutionOrder.FIRST_ORDER)
        with pytest.raises(ValueError):
            apply_write(state, 0.5, 0.0, EvolutionOrder.FIRST_ORDER)


class TestApplyRead:
    def test_zero_coupling_is_identity(self):
        state = build_joint(weak_coherent_atomic_state(0.1, 20), LOSSLESS)
        out = apply_read(state, 0.0, 1.0, EvolutionOrder.FIRST_ORDER)
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_ground_state_unchanged_at_first_order(self):
        state = build_joint(basis_state(0, 12, k_alloc=2), LOSSLESS)
        out = apply_read(state, 1e-3, 1.0, EvolutionOrder.FIRST_ORDER)
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_first_order_on_single_excitation(self):
        p_r = 9e-4
        state = build_joint(basis_state(1, 25, k_alloc=2), LOSSLESS)
        out = apply_read(state, p_r, 1.0, EvolutionOrder.FIRST_ORDER)
        assert out.amplitudes[1, 0, 0, 0] == pytest.approx(1.0, abs=TOL)
        assert out.amplitudes[0, 0, 1, 0] == pytest.approx(np.sqrt(p_r), abs=TOL)
        assert np.count_nonzero(out.amplitudes) == 2


class TestHerald:
    def test_eq15_amplitude_ratio(self):
        alpha = 0.1
        out = evolve(
            weak_coherent_atomic_state(alpha, 1000),
            1e-3,
            1e-3,
            EvolutionOrder.FIRST_ORDER,
        )
        conditional, prob = herald(out, HeraldPattern(1, 1))
        ratio = conditional.amplitudes[1] / conditional.amplitudes[0]
        assert ratio == pytest.approx(2 * alpha * (1 - 1 / 1000), abs=TOL)
        assert prob == pytest.approx(1e-6 * (1 + (0.1998) ** 2) / 1.01, rel=1e-9)

    def test_complex_alpha_phases_preserved(self):
        alpha = 0.05 + 0.02j
        out = evolve(
            weak_coherent_atomic_state(alpha, 500),
            1e-3,
            1e-3,
            EvolutionOrder.FIRST_ORDER,
        )
        conditional, _ = herald(out, HeraldPattern(1, 1))
        ratio = complex(conditional.amplitudes[1] / conditional.amplitudes[0])
        assert ratio == pytest.approx(2 * alpha * (1 - 1 / 500), abs=1e-12)

    def test_vacuum_pattern_returns_input(self):
        atomic = weak_coherent_atomic_state(0.1, 200)
        out = evolve(atomic, 1e-3, 1e-3, EvolutionOrder.FIRST_ORDER)
        conditional, prob = herald(out, HeraldPattern(0, 0))
        assert fidelity(conditional, atomic) == pytest.approx(1.0, abs=TOL)
        assert prob == pytest.approx(1.0, rel=1e-6)

    def test_no_photons_without_evolution(self):
        state = build_joint(basis_state(0, 9, k_alloc=2), LOSSLESS)
        conditional, prob = herald(state, HeraldPattern(1, 1))
        assert prob == 0.0
        assert conditional.norm() == 0.0

    def test_eq14_on_dicke_level(self):
        k, n_atoms, p = 3, 100, 1e-3
        out = evolve(
            basis_state(k, n_atoms, k_alloc=5), p, p, EvolutionOrder.FIRST_ORDER
        )
        conditional, prob = herald(out, HeraldPattern(1, 1))
        factor = np.sqrt(prob) / p
        assert factor == pytest.approx((k + 1) * (1 - k / n_atoms), rel=1e-12)
        assert fidelity(conditional, basis_state(k, n_atoms)) == pytest.approx(
            1.0, abs=TOL
        )

    def test_order_consistency(self):
        atomic = weak_coherent_atomic_state(0.15, 300)
        p = 1e-2
        trunc = ModeTruncation(fock_a_max=5, fock_b_max=5, fock_c_max=0)
        first, _ = herald(
            evolve(atomic, p, p, EvolutionOrder.FIRST_ORDER, trunc=trunc),
            HeraldPattern(1, 1),
        )
        exact, _ = herald(
            evolve(atomic, p, p, EvolutionOrder.EXACT, trunc=trunc),
            HeraldPattern(1, 1),
        )
        assert fidelity(first, exact) >= 1 - 10 * p

    def test_beta_scaling_of_pair_probability(self):
        atomic = weak_coherent_atomic_state(0.1, 100)
        p = 1e-3
        trunc = ModeTruncation()
        _, p_full = herald(
            evolve(atomic, p, p, EvolutionOrder.FIRST_ORDER, trunc=trunc),
            HeraldPattern(1, 1),
        )
        for beta_w, beta_r in ((0.5, 1.0), (0.8, 0.6), (0.25, 0.25)):
            _, p_lossy = herald(
                evolve(
                    atomic,
                    p,
                    p,
                    EvolutionOrder.FIRST_ORDER,
                    beta_w=beta_w,
                    beta_r=beta_r,
                    trunc=trunc,
                ),
                HeraldPattern(1, 1),
            )
            assert p_lossy / p_full == pytest.approx(beta_w * beta_r, rel=1e-12)

    def test_pattern_probabilities_sum_to_total(self):
        atomic = weak_coherent_atomic_state(0.2, 60)
        out = evolve(
            atomic,
            2e-3,
            3e-3,
            EvolutionOrder.FIRST_ORDER,
            beta_w=0.7,
            beta_r=0.9,
            trunc=ModeTruncation(),
        )
        total = 0.0
        for n_a in range(4):
            for n_b in range(4):
                # the density route reports probabilities for mixed sectors too
                _, prob = reduced_conditional_density(out, HeraldPattern(n_a, n_b))
                total += prob
        assert total == pytest.approx(out.total_probability(), abs=1e-10)

    def test_mixed_conditional_raises(self):
        # two non-parallel undetected-mode sectors at the heralded pattern
        trunc = ModeTruncation(
            fock_a_max=1, fock_b_max=1, fock_c_max=1, atomic_k_max=1
        )
        amps = np.zeros((2, 2, 2, 2), dtype=complex)
        amps[0, 1, 1, 0] = 0.6
        amps[1, 1, 1, 1] = 0.8
        state = JointState(5, trunc, amps)
        with pytest.raises(MixedConditionalError):
            herald(state, HeraldPattern(1, 1))
        rho, prob = reduced_conditional_density(state, HeraldPattern(1, 1))
        assert prob == pytest.approx(1.0, abs=TOL)
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=TOL)

    def test_parallel_sectors_stay_pure(self):
        trunc = ModeTruncation(
            fock_a_max=1, fock_b_max=1, fock_c_max=1, atomic_k_max=1
        )
        amps = np.zeros((2, 2, 2, 2), dtype=complex)
        amps[0, 1, 1, 0] = 0.3
        amps[1, 1, 1, 0] = 0.4
        amps[0, 1, 1, 1] = 0.6
        amps[1, 1, 1, 1] = 0.8
        state = JointState(5, trunc, amps)
        conditional, prob = herald(state, HeraldPattern(1, 1))
        assert prob == pytest.approx(1.25, abs=TOL)
        ratio = conditional.amplitudes[1] / conditional.amplitudes[0]
        assert ratio == pytest.approx(4.0 / 3.0, abs=TOL)


class TestReducedConditionalDensity:
    def test_lossless_matches_herald_projector(self):
        atomic = weak_coherent_atomic_state(0.1, 80)
        out = evolve(atomic, 1e-3, 1e-3, EvolutionOrder.FIRST_ORDER)
        conditional, prob_pure = herald(out, HeraldPattern(1, 1))
        rho, prob_rho = reduced_conditional_density(out, HeraldPattern(1, 1))
        assert prob_rho == pytest.approx(prob_pure, rel=1e-12)
        vec = conditional.amplitudes
        projector = np.outer(vec, vec.conj())
        assert np.allclose(rho.matrix, projector, atol=1e-12)
        eigs = np.linalg.eigvalsh(rho.matrix)
        assert eigs[-1] == pytest.approx(1.0, abs=1e-12)

    def test_lossy_single_path_rank_one(self):
        p = 1e-2
        out = evolve(
            basis_state(0, 50, k_alloc=3),
            p,
            p,
            EvolutionOrder.FIRST_ORDER,
            beta_w=0.5,
            beta_r=0.5,
            trunc=ModeTruncation(),
        )
        rho, prob = reduced_conditional_density(out, HeraldPattern(1, 1))
        assert prob == pytest.approx(p * p * 0.25, rel=1e-12)
        eigs = np.linalg.eigvalsh(rho.matrix)
        assert eigs[-1] == pytest.approx(1.0, abs=1e-12)

    def test_zero_probability(self):
        state = build_joint(basis_state(0, 9, k_alloc=2), LOSSLESS)
        rho, prob = reduced_conditional_density(state, HeraldPattern(1, 1))
        assert prob == 0.0
        assert np.all(rho.matrix == 0)


class TestHelpers:
    def test_outcome_probabilities_shape_and_sum(self):
        atomic = weak_coherent_atomic_state(0.1, 40)
        out = evolve(atomic, 1e-3, 1e-3, EvolutionOrder.FIRST_ORDER)
        probs = outcome_probabilities(out)
        assert probs.shape == (4, 4, 1)
        assert probs.sum() == pytest.approx(out.total_probability(), abs=1e-12)

    def test_conditional_on_counts_pure(self):
        atomic = weak_coherent_atomic_state(0.1, 40)
        out = evolve(
            atomic,
            1e-3,
            1e-3,
            EvolutionOrder.FIRST_ORDER,
            beta_w=0.8,
            beta_r=0.8,
            trunc=ModeTruncation(),
        )
        state, prob = conditional_on_counts(out, 1, 1, 0)
        assert prob > 0
        assert state.normalized

    def test_dump_amplitudes(self, tmp_path):
        from memamp.joint import dump_amplitudes

        atomic = weak_coherent_atomic_state(0.1, 40)
        out = evolve(atomic, 1e-3, 1e-3, EvolutionOrder.FIRST_ORDER)
        path = tmp_path / "state.txt"
        dump_amplitudes(out, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith("#")
        entries = [line.split() for line in lines[1:]]
        assert len(entries) == np.count_nonzero(out.amplitudes)
        k, n_a, n_b, n_c, re, im = entries[0]
        value = out.amplitudes[int(k), int(n_a), int(n_b), int(n_c)]
        assert complex(float(re), float(im)) == value

    def test_joint_density_traced(self):
        atomic = weak_coherent_atomic_state(0.1, 40)
        out = evolve(
            atomic,
            1e-3,
            1e-3,
            EvolutionOrder.FIRST_ORDER,
            beta_w=0.8,
            beta_r=0.8,
            trunc=ModeTruncation(),
        )
        rho, trace = joint_density_traced(out)
        assert rho.dims == (9, 4, 4)
        assert trace == pytest.approx(out.total_probability(), rel=1e-12)
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)
