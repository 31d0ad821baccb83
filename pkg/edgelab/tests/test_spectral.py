"""
Tests for frequency responses, spectral reconstruction, misalignment and
integral-Lipschitz constants.

Run with:
    cd edgelab && pytest tests/test_spectral.py -v
"""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from conftest import random_orthonormal, relative_error
from errors import InvalidInputError
from filters import (
    apply,
    build_si_basis,
    make_convolutional,
    make_edge_from_eigenbases,
    make_es_params,
    make_general,
    make_node_varying,
    make_si_params,
)
from graphcore import build_sbm
from spectral import (
    FrequencyResponse,
    ResponseKind,
    certify,
    disjoint_planes,
    filter_response,
    graph_frequency_pairs,
    lipschitz_constant_graph_specific,
    lipschitz_constant_multivariate,
    lipschitz_constant_univariate,
    lipschitz_gradient,
    misalignment,
    pair_form,
    response_bound,
    rotate_basis,
    sample_frequency_pairs,
    scaled_frequencies,
    spectral_apply_edge,
    spectral_apply_es,
    spectral_apply_scaled,
    spectral_apply_si,
)

ORACLE_TOLERANCE = 1e-7


def random_instance(seed: int, n: int = 12):
    rng = np.random.default_rng(seed)
    operator = build_sbm(n, 3, 0.8, 0.3, seed=seed)
    return rng, operator, rng.normal(size=n)


class TestFrequencyResponse:
    """Polynomial evaluation of univariate and multivariate responses."""

    def test_univariate_evaluation(self):
        response = FrequencyResponse(np.array([[1.0, 2.0, 3.0], [0.0, 1.0, 0.0]]))
        table = response.evaluate([0.0, 0.5])
        assert table.shape == (2, 2)
        assert table[0].tolist() == pytest.approx([1.0, 1.0 + 1.0 + 0.75])
        assert table[1].tolist() == pytest.approx([0.0, 0.5])

    def test_at_eigenvalues_reads_the_diagonal(self, rng):
        response = FrequencyResponse(rng.normal(size=(4, 3)))
        lam = rng.uniform(-1, 1, size=4)
        assert np.allclose(response.at_eigenvalues(lam), np.diag(response.evaluate(lam)))

    def test_derivative(self):
        response = FrequencyResponse(np.array([[0.0, 1.0, 1.0]]))
        assert response.derivative([0.5])[0, 0] == pytest.approx(2.0)

    def test_multivariate_collapses_on_diagonal(self, rng):
        coefficients = rng.normal(size=(3, 4))
        multivariate = FrequencyResponse(coefficients, ResponseKind.MULTIVARIATE)
        lam = rng.uniform(-1, 1, size=5)
        points = np.repeat(lam[:, None], 3, axis=1)
        expected = FrequencyResponse(coefficients).evaluate(lam).T
        assert np.allclose(multivariate.evaluate_multivariate(points), expected)

    def test_multivariate_rejects_wrong_point_size(self, rng):
        multivariate = FrequencyResponse(rng.normal(size=(3, 4)), ResponseKind.MULTIVARIATE)
        with pytest.raises(InvalidInputError):
            multivariate.evaluate_multivariate(np.zeros((2, 2)))

    def test_convolutional_response_is_tiled(self, sbm20):
        response = filter_response(make_convolutional([0.5, 0.25], sbm20.n), sbm20)
        assert response.coefficients.shape == (sbm20.n, 2)
        assert np.all(response.coefficients == [0.5, 0.25])

    def test_si_response_matches_basis_eigenvalues(self, sbm20, rng):
        basis = build_si_basis(sbm20)
        params = make_si_params(basis, rng.normal(size=(3, basis.dimension)))
        response = filter_response(params, sbm20)
        for k in range(3):
            assert np.allclose(response.coefficients[:, k], params.eigenpair(k).values, atol=1e-10)

    def test_general_response_needs_symmetric_filter(self, rng):
        params = make_general(rng.normal(size=(2, 4, 4)))
        operator = build_sbm(4, 1, 1.0, 0.0)
        with pytest.raises(InvalidInputError):
            filter_response(params, operator)


class TestSpectralOracles:
    """Spectral-domain reconstruction agrees with node-domain application."""

    @pytest.mark.parametrize("seed", range(20))
    def test_shift_invariant(self, seed):
        rng, operator, x = random_instance(seed)
        basis = build_si_basis(operator)
        params = make_si_params(basis, rng.normal(size=(4, basis.dimension)))
        expected = apply(params, operator, x).values
        actual = spectral_apply_si(filter_response(params, operator), operator, x).values
        assert relative_error(actual, expected) <= ORACLE_TOLERANCE

    @pytest.mark.parametrize("seed", range(20))
    def test_convolutional(self, seed):
        rng, operator, x = random_instance(seed)
        params = make_convolutional(rng.normal(size=4), operator.n)
        expected = apply(params, operator, x).values
        actual = spectral_apply_si(filter_response(params, operator), operator, x).values
        assert relative_error(actual, expected) <= ORACLE_TOLERANCE

    @pytest.mark.parametrize("seed", range(20))
    def test_eigenvector_sharing(self, seed):
        rng, operator, x = random_instance(seed)
        params = make_es_params(random_orthonormal(rng, operator.n), rng.normal(size=(4, operator.n)))
        expected = apply(params, operator, x).values
        assert relative_error(spectral_apply_es(params, operator, x).values, expected) <= ORACLE_TOLERANCE

    @pytest.mark.parametrize("seed", range(5))
    def test_node_varying_through_identity_basis(self, seed):
        rng, operator, x = random_instance(seed)
        params = make_node_varying(rng.normal(size=(3, operator.n)))
        expected = apply(params, operator, x).values
        assert relative_error(spectral_apply_es(params, operator, x).values, expected) <= ORACLE_TOLERANCE

    @pytest.mark.parametrize("seed", range(20))
    def test_general(self, seed):
        rng, operator, x = random_instance(seed)
        bases = [random_orthonormal(rng, operator.n) for _ in range(4)]
        params = make_edge_from_eigenbases(bases, rng.normal(size=(4, operator.n)))
        expected = apply(params, operator, x).values
        assert relative_error(spectral_apply_edge(params, operator, x).values, expected) <= ORACLE_TOLERANCE

    @pytest.mark.parametrize("seed", range(10))
    def test_general_from_dense_symmetric_matrices(self, seed):
        rng, operator, x = random_instance(seed)
        matrices = rng.normal(size=(3, operator.n, operator.n))
        params = make_general(matrices + np.swapaxes(matrices, 1, 2))
        expected = apply(params, operator, x).values
        assert relative_error(spectral_apply_edge(params, operator, x).values, expected) <= ORACLE_TOLERANCE

    @pytest.mark.parametrize("seed", range(10))
    def test_scaled_form_matches_direct_form(self, seed):
        rng = np.random.default_rng(seed)
        operator = build_sbm(8, 2, 0.9, 0.3, seed=seed)
        x = rng.normal(size=8)
        bases = [random_orthonormal(rng, 8) for _ in range(4)]
        params = make_edge_from_eigenbases(bases, rng.normal(size=(4, 8)))
        direct = spectral_apply_edge(params, operator, x).values
        assert relative_error(spectral_apply_scaled(params, operator, x).values, direct) <= 1e-8

    @pytest.mark.parametrize("seed", range(5))
    def test_general_with_graph_eigenbases_collapses_to_univariate(self, seed):
        rng, operator, x = random_instance(seed)
        phi = rng.normal(size=(4, operator.n))
        params = make_edge_from_eigenbases([operator.eigenvectors] * 4, phi)
        expected = spectral_apply_si(FrequencyResponse(phi.T), operator, x).values
        assert relative_error(spectral_apply_edge(params, operator, x).values, expected) <= 1e-12

    def test_rejects_batched_signal(self, sbm20):
        params = make_convolutional([1.0], sbm20.n)
        with pytest.raises(InvalidInputError):
            spectral_apply_si(filter_response(params, sbm20), sbm20, np.ones((2, sbm20.n)))


class TestScaledFrequencies:
    """Graph-induced multivariate frequencies."""

    def test_aligned_basis_gives_diagonal_frequencies(self, sbm20, rng):
        params = make_es_params(sbm20.eigenvectors, rng.normal(size=(4, sbm20.n)))
        frequency = scaled_frequencies(params, sbm20, 3, 3, 3)
        assert np.allclose(frequency.values, sbm20.eigenvalues[3])
        assert np.allclose(frequency.scale_factors, 1.0)

    def test_vanishing_denominator_keeps_numerator(self, sbm20, rng):
        # <v_0, v_1> is zero up to rounding, so c^(0) vanishes for (i, j, l) = (0, 1, 1)
        rotated = random_orthonormal(rng, sbm20.n)
        params = make_edge_from_eigenbases([sbm20.eigenvectors, rotated], rng.normal(size=(2, sbm20.n)))
        cross = sbm20.eigenvectors.T @ rotated
        numerator = cross[0, 1] * cross[1, 1]
        frequency = scaled_frequencies(params, sbm20, 0, 1, 1)
        assert frequency.scale_factors[0] == pytest.approx(numerator, abs=1e-12)
        assert frequency.values[0] == pytest.approx(numerator * sbm20.eigenvalues[0], abs=1e-12)

    def test_ratio_of_consecutive_products(self, sbm20, rng):
        bases = [random_orthonormal(rng, sbm20.n) for _ in range(3)]
        params = make_edge_from_eigenbases(bases, rng.normal(size=(3, sbm20.n)))
        products = [(sbm20.eigenvectors.T @ u)[2, 5] * (sbm20.eigenvectors.T @ u)[4, 5] for u in bases]
        frequency = scaled_frequencies(params, sbm20, 2, 5, 4)
        assert np.allclose(frequency.scale_factors, [products[1] / products[0], products[2] / products[1]])
        assert np.allclose(frequency.values, frequency.scale_factors * sbm20.eigenvalues[2])

    def test_all_triples_when_small(self, rng):
        operator = build_sbm(4, 2, 1.0, 0.5, seed=1)
        bases = [random_orthonormal(rng, 4) for _ in range(3)]
        params = make_edge_from_eigenbases(bases, rng.normal(size=(3, 4)))
        assert graph_frequency_pairs(params, operator).shape == (64, 2)

    def test_subsampled_when_large(self, sbm20, rng):
        bases = [random_orthonormal(rng, sbm20.n) for _ in range(3)]
        params = make_edge_from_eigenbases(bases, rng.normal(size=(3, sbm20.n)))
        assert graph_frequency_pairs(params, sbm20, rng, max_points=500).shape == (500, 2)


class TestMisalignment:
    """Cross inner products of orthonormal bases."""

    def test_identical_bases(self, sbm20):
        report = misalignment(sbm20.eigenvectors, sbm20.eigenvectors)
        assert report.epsilon == pytest.approx(0.0, abs=1e-12)
        assert report.diag_min == pytest.approx(1.0)

    @pytest.mark.parametrize("theta", np.round(np.arange(0.0, 1.51, 0.1), 1))
    def test_givens_rotation_gives_sine(self, sbm20, theta):
        rotated = rotate_basis(sbm20.eigenvectors, theta)
        assert misalignment(sbm20.eigenvectors, rotated).epsilon == pytest.approx(abs(np.sin(theta)), abs=1e-12)

    def test_matching_undoes_column_permutation_and_signs(self, sbm20, rng):
        permutation = rng.permutation(sbm20.n)
        signs = rng.choice([-1.0, 1.0], size=sbm20.n)
        shuffled = sbm20.eigenvectors[:, permutation] * signs
        assert misalignment(sbm20.eigenvectors, shuffled).epsilon > 0.5
        report = misalignment(sbm20.eigenvectors, shuffled, match=True)
        assert report.epsilon == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.diag(report.cross_matrix) > 0)

    def test_disjoint_planes_keep_misalignment(self, sbm20):
        planes = disjoint_planes(sbm20.n, 5)
        assert planes == [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]
        rotated = rotate_basis(sbm20.eigenvectors, 0.3, planes)
        assert misalignment(sbm20.eigenvectors, rotated, match=True).epsilon == pytest.approx(np.sin(0.3), abs=1e-12)

    def test_rotation_keeps_orthonormality(self, sbm20):
        rotated = rotate_basis(sbm20.eigenvectors, 0.7, disjoint_planes(sbm20.n, 10))
        assert np.allclose(rotated.T @ rotated, np.eye(sbm20.n), atol=1e-12)

    def test_invalid_plane(self, sbm20):
        with pytest.raises(InvalidInputError):
            rotate_basis(sbm20.eigenvectors, 0.1, [(0, sbm20.n)])

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            misalignment(np.eye(3), np.eye(4))


class TestUnivariateLipschitz:
    """Grid estimates of the integral-Lipschitz constant."""

    def test_linear_response(self):
        response = FrequencyResponse(np.array([[0.3, 1.0]]))
        assert lipschitz_constant_univariate(response, grid=201) == pytest.approx(1.0)

    def test_quadratic_response(self):
        response = FrequencyResponse(np.array([[0.0, 0.0, 1.0]]))
        assert lipschitz_constant_univariate(response, grid=201) == pytest.approx(2.0)

    def test_constant_response(self):
        response = FrequencyResponse(np.array([[0.8]]))
        assert lipschitz_constant_univariate(response) == 0.0

    def test_nested_grids_do_not_decrease(self, rng):
        response = FrequencyResponse(rng.normal(size=(3, 4)))
        coarse = lipschitz_constant_univariate(response, grid=101)
        fine = lipschitz_constant_univariate(response, grid=201)
        assert fine >= coarse - 1e-12

    @pytest.mark.parametrize("max_elements", [1, 5000, 10 ** 9])
    def test_pair_form_independent_of_block_size(self, rng, max_elements):
        response = FrequencyResponse(rng.normal(size=(6, 4)))
        reference = pair_form(response, grid=301)
        assert pair_form(response, grid=301, max_elements=max_elements) == reference

    def test_graph_specific_within_grid_value(self, sbm20, rng):
        response = FrequencyResponse(rng.normal(size=(sbm20.n, 4)) / 4)
        grid_value = lipschitz_constant_univariate(response, grid=2001)
        specific = lipschitz_constant_graph_specific(response, sbm20.eigenvalues)
        assert specific <= grid_value * 1.01

    def test_grid_too_small(self):
        with pytest.raises(InvalidInputError):
            lipschitz_constant_univariate(FrequencyResponse(np.ones((1, 2))), grid=1)

    def test_rejects_multivariate(self):
        with pytest.raises(InvalidInputError):
            lipschitz_constant_univariate(FrequencyResponse(np.ones((1, 3)), ResponseKind.MULTIVARIATE))


class TestMultivariateLipschitz:
    """Telescoping gradients and sampled multivariate constants."""

    def test_telescoping_identity(self, rng):
        response = FrequencyResponse(rng.normal(size=(5, 4)), ResponseKind.MULTIVARIATE)
        first = rng.uniform(-1, 1, size=(50, 3))
        second = rng.uniform(-1, 1, size=(50, 3))
        gradient = lipschitz_gradient(response, first, second)
        predicted = np.einsum("pnk,pk->pn", gradient, first - second)
        actual = response.evaluate_multivariate(first) - response.evaluate_multivariate(second)
        assert np.allclose(predicted, actual, atol=1e-12)

    @staticmethod
    def central_difference(response: FrequencyResponse, point: np.ndarray, m: int, step: float = 1e-5) -> np.ndarray:
        offset = np.zeros_like(point)
        offset[m] = step
        upper = response.evaluate_multivariate(point + offset)
        lower = response.evaluate_multivariate(point - offset)
        return (upper - lower) / (2 * step)

    def test_equal_points_match_finite_differences(self, rng):
        response = FrequencyResponse(rng.normal(size=(4, 4)), ResponseKind.MULTIVARIATE)
        point = rng.uniform(-1, 1, size=3)
        gradient = lipschitz_gradient(response, point, point)
        assert gradient.shape == (4, 3)
        for m in range(3):
            assert np.allclose(gradient[:, m], self.central_difference(response, point, m), atol=1e-6)

    def test_entries_are_partials_at_mixed_points(self, rng):
        response = FrequencyResponse(rng.normal(size=(4, 4)), ResponseKind.MULTIVARIATE)
        first = rng.uniform(-1, 1, size=3)
        second = rng.uniform(-1, 1, size=3)
        gradient = lipschitz_gradient(response, first, second)
        for m in range(3):
            mixed = np.where(np.arange(3) < m, first, second)
            assert np.allclose(gradient[:, m], self.central_difference(response, mixed, m), atol=1e-6)

    def test_first_order_gradient_is_linear_coefficient(self, rng):
        response = FrequencyResponse(np.array([[0.3, 0.7]]), ResponseKind.MULTIVARIATE)
        gradient = lipschitz_gradient(response, rng.uniform(-1, 1, size=(6, 1)), rng.uniform(-1, 1, size=(6, 1)))
        assert gradient.shape == (6, 1, 1)
        assert np.allclose(gradient, 0.7)

    def test_second_order_gradient_by_hand(self):
        phi = np.array([[0.5, -1.0, 2.0], [0.0, 0.25, -0.75]])
        response = FrequencyResponse(phi, ResponseKind.MULTIVARIATE)
        point = np.array([0.4, -0.6])
        expected = np.stack([phi[:, 1] + phi[:, 2] * point[1], phi[:, 2] * point[0]], axis=1)
        assert np.allclose(lipschitz_gradient(response, point, point), expected, atol=1e-14)

    def test_first_order_multivariate_matches_linear_bound(self, rng):
        response = FrequencyResponse(np.array([[0.2, 0.5]]), ResponseKind.MULTIVARIATE)
        first, second = sample_frequency_pairs(1, rng, 500)
        constant = lipschitz_constant_multivariate(response, first, second)
        assert 0.4 < constant <= 0.5 + 1e-12

    def test_constant_response_has_zero_constant(self, rng):
        response = FrequencyResponse(np.array([[1.0]]), ResponseKind.MULTIVARIATE)
        assert lipschitz_constant_multivariate(response, np.zeros((1, 0)), np.zeros((1, 0))) == 0.0

    def test_sampled_pairs_include_graph_points_inside_box(self, rng):
        graph_points = np.array([[0.1, 0.2], [0.3, -0.4], [3.0, 0.0]])
        first, second = sample_frequency_pairs(2, rng, 10, graph_points)
        assert first.shape == second.shape == (10 + 101 + 2, 2)
        assert np.all(np.abs(first) <= 1.0)


class TestCertify:
    """Rescaling filters to max |h| <= 1."""

    def test_large_filter_is_rescaled(self, sbm20):
        params = make_convolutional([2.0, 0.0], sbm20.n)
        certified, factor = certify(params, sbm20)
        assert factor == pytest.approx(0.5)
        assert response_bound(filter_response(certified, sbm20)) == pytest.approx(1.0)

    def test_small_filter_untouched(self, sbm20):
        params = make_convolutional([0.5, 0.25], sbm20.n)
        certified, factor = certify(params, sbm20)
        assert factor == 1.0
        assert certified is params

    def test_multivariate_bound_needs_points(self, rng):
        response = FrequencyResponse(np.ones((2, 3)), ResponseKind.MULTIVARIATE)
        with pytest.raises(InvalidInputError):
            response_bound(response)
