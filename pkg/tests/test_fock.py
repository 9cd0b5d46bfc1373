import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from coupled_cavities.errors import CutoffTooSmall, NotAState
from coupled_cavities.fock import (
    check_density_matrix,
    coherent_state_vector,
    default_cutoff,
    displacement_elements,
    displacement_matrix,
    fock_ket,
    infer_cutoff,
    ket_to_dm,
    linear_entropy,
    mode_operator,
    partial_trace,
)


def random_density(dim, rng, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


class TestModeOperators:
    def test_annihilate_one_photon(self):
        a = mode_operator("annihilate", "A", 3)
        np.testing.assert_allclose(a @ fock_ket(1, 0, 3), fock_ket(0, 0, 3), atol=1e-15)

    def test_annihilate_vacuum(self):
        for mode in "AB":
            a = mode_operator("annihilate", mode, 3)
            assert np.allclose(a @ fock_ket(0, 0, 3), 0.0)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_ladder_element(self, n):
        n_max = 5
        a = mode_operator("annihilate", "B", n_max)
        assert a @ fock_ket(0, n, n_max) == pytest.approx(math.sqrt(n) * fock_ket(0, n - 1, n_max))

    def test_create_is_adjoint(self):
        a = mode_operator("annihilate", "A", 4)
        assert np.array_equal(mode_operator("create", "A", 4), a.conj().T)

    def test_number_operator(self):
        n = mode_operator("number", "A", 3) + mode_operator("number", "B", 3)
        assert (fock_ket(2, 1, 3).conj() @ n @ fock_ket(2, 1, 3)).real == pytest.approx(3.0)

    def test_canonical_commutator_below_cutoff(self):
        n_max = 6
        a = mode_operator("annihilate", "A", n_max)
        comm = a @ a.conj().T - a.conj().T @ a
        # drop every basis state with n_A = n_max (truncation artifact)
        keep = [i for i in range((n_max + 1) ** 2) if i // (n_max + 1) < n_max]
        np.testing.assert_allclose(comm[np.ix_(keep, keep)], np.eye(len(keep)), atol=1e-13)

    def test_total_number_commutes_with_hopping(self):
        n_max = 5
        a = mode_operator("annihilate", "A", n_max)
        b = mode_operator("annihilate", "B", n_max)
        n_tot = a.conj().T @ a + b.conj().T @ b
        hop = a.conj().T @ b + b.conj().T @ a
        # zero up to floating-point rounding of the products
        assert np.max(np.abs(n_tot @ hop - hop @ n_tot)) < 1e-12

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            mode_operator("squeeze", "A", 2)

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmall):
            mode_operator("number", "A", 0)

    def test_dimension(self):
        assert mode_operator("number", "A", 4).shape == (25, 25)
        assert infer_cutoff(np.zeros((25, 25))) == 4


class TestCoherentState:
    def test_vacuum(self):
        v = coherent_state_vector(0.0, 5)
        assert v[0] == 1.0 and np.all(v[1:] == 0)

    def test_overlap_with_opposite(self):
        # series evaluated at n_max = 40; closed form exp(-2|alpha|^2)
        alpha = 1.0
        ov = np.vdot(coherent_state_vector(alpha, 40), coherent_state_vector(-alpha, 40))
        assert abs(ov) == pytest.approx(math.exp(-2.0), abs=1e-12)
        assert abs(ov) == pytest.approx(0.135335283236613, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.3, 1.0 + 0.5j, -1.5j, 2.0])
    def test_mean_photon_number(self, alpha):
        v = coherent_state_vector(alpha, default_cutoff(abs(alpha)) + 10)
        mean = float(np.sum(np.arange(v.size) * np.abs(v) ** 2))
        assert mean == pytest.approx(abs(alpha) ** 2, abs=1e-8)

    def test_deficit_reported(self):
        v, deficit = coherent_state_vector(1.5, 6, full_output=True)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)
        assert 0 < deficit < 0.05

    def test_guard(self):
        with pytest.raises(CutoffTooSmall):
            coherent_state_vector(2.0, 6)

    def test_default_cutoff(self):
        assert default_cutoff(2.0) == 26
        assert default_cutoff(0.0) == 10


class TestPartialTrace:
    def test_product_state(self):
        rng = np.random.default_rng(3)
        ra, rb = random_density(4, rng), random_density(4, rng)
        np.testing.assert_allclose(partial_trace(np.kron(ra, rb), "A"), ra, atol=1e-12)
        np.testing.assert_allclose(partial_trace(np.kron(ra, rb), "B"), rb, atol=1e-12)

    def test_symmetric_superposition(self):
        psi = (fock_ket(1, 0, 2) - 1j * fock_ket(0, 1, 2)) / math.sqrt(2)
        red = partial_trace(ket_to_dm(psi), "A")
        expected = np.zeros((3, 3))
        expected[0, 0] = expected[1, 1] = 0.5
        np.testing.assert_allclose(red, expected, atol=1e-15)

    def test_trace_preserved(self):
        rho = random_density(16, np.random.default_rng(7))
        assert np.trace(partial_trace(rho, "B")).real == pytest.approx(np.trace(rho).real, abs=1e-12)


class TestLinearEntropy:
    def test_pure_state(self):
        psi = coherent_state_vector(0.7 - 0.2j, 12)
        assert linear_entropy(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-10)

    def test_two_outcome_mixture(self):
        assert linear_entropy(np.diag([0.5, 0.5, 0.0, 0.0])) == pytest.approx(0.5)

    def test_single_photon_reduced_state_at_quarter_swap(self):
        from coupled_cavities.evolution import ModelParams, closed_form_single_photon

        rho = closed_form_single_photon(ModelParams(k=0.0, gamma=1.0), math.pi / 4, n_max=1)
        assert linear_entropy(partial_trace(rho, "A")) == pytest.approx(0.5, abs=1e-12)


class TestDisplacement:
    def test_identity(self):
        np.testing.assert_allclose(displacement_matrix(0.0, 8), np.eye(9), atol=0)

    @pytest.mark.parametrize("alpha", [0.5, 1.0 - 0.4j, -0.8j])
    def test_displaced_vacuum_is_coherent(self, alpha):
        n_max = 30
        d = displacement_matrix(alpha, n_max)
        np.testing.assert_allclose(d[:, 0], coherent_state_vector(alpha, n_max), atol=1e-8)

    @pytest.mark.parametrize("alpha", [0.3, 1.0, 0.6 + 0.8j])
    def test_unitary_on_low_levels(self, alpha):
        n_max = 40
        d = displacement_matrix(alpha, n_max)
        low = n_max // 2 + 1
        prod = d[:low, :] @ d[:low, :].conj().T
        assert np.max(np.abs(prod - np.eye(low))) < 1e-8

    def test_matches_exponential_of_large_generator(self):
        # matrix exponential on a much larger space, cropped, approximates the exact elements
        alpha, big, n_max = 0.9 - 0.3j, 120, 15
        a = np.diag(np.sqrt(np.arange(1, big + 1)), 1)
        ref = expm(alpha * a.T - np.conj(alpha) * a)[: n_max + 1, : n_max + 1]
        np.testing.assert_allclose(displacement_matrix(alpha, n_max), ref, atol=1e-12)

    def test_batched_shape(self):
        out = displacement_elements(np.array([[0.1, 0.2], [0.3, 0.4j]]), 3)
        assert out.shape == (2, 2, 4, 4)
        np.testing.assert_allclose(out[1, 1], displacement_elements(0.4j, 3))

    def test_guard(self):
        with pytest.raises(CutoffTooSmall):
            displacement_matrix(2.0, 8)


class TestDensityMatrixCheck:
    def test_accepts_valid(self):
        check_density_matrix(random_density(9, np.random.default_rng(0)))

    @pytest.mark.parametrize(
        "matrix",
        [
            np.array([[1.0, 0.5], [0.0, 0.0]]),
            np.diag([0.6, 0.6]),
            np.diag([1.1, -0.1]),
        ],
    )
    def test_rejects_invalid(self, matrix):
        with pytest.raises(NotAState):
            check_density_matrix(matrix)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.integers(min_value=1, max_value=4),
)
def test_partial_trace_of_product_property(seed, n_max):
    rng = np.random.default_rng(seed)
    d = n_max + 1
    ra, rb = random_density(d, rng), random_density(d, rng)
    assert np.max(np.abs(partial_trace(np.kron(ra, rb), "A") - ra)) < 1e-12
    assert linear_entropy(ra) >= -1e-12
