"""
Test suite for the two-layer ReLU network
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntklab.domain.errors import DimensionMismatchError, InvalidWidthError
from ntklab.domain.models.kernel import gram_matrix, kappa_empirical
from ntklab.domain.models.network import (
    NetworkState,
    adjoint_gradient,
    apply_gradient,
    forward,
    forward_batch,
    gradient,
    gradient_drift,
    gradient_matrix,
    init_antisymmetric,
    jacobian,
)
from ntklab.domain.models.sphere import sample_sphere
from ntklab.domain.models.streams import as_generator, named_stream


def _perturbed(state: NetworkState, scale: float, seed: int) -> NetworkState:
    return state.evolve(state.W + scale * as_generator(seed).standard_normal(state.W.shape))


class TestInitialization:
    """
    Test cases for antisymmetric initialization
    """

    def test_network_is_zero_at_initialization(self):
        """
        GIVEN an antisymmetric initialization
        WHEN the network is evaluated at 10^4 probes
        THEN every output vanishes
        """
        state = init_antisymmetric(256, 6, named_stream(0, "init"))
        probes = sample_sphere(6, 10_000, named_stream(0, "probe"))

        assert np.max(np.abs(forward_batch(state, probes))) <= 1e-12

    def test_pairing_of_weights_and_signs(self, state):
        """
        GIVEN an antisymmetric initialization
        WHEN its halves are compared
        THEN the weights repeat and the signs flip
        """
        half = state.m // 2

        np.testing.assert_array_equal(state.W[:half], state.W[half:])
        np.testing.assert_array_equal(state.a[:half], -state.a[half:])

    def test_odd_width_is_rejected(self):
        """
        GIVEN an odd width
        WHEN the network is initialized
        THEN an InvalidWidthError is raised
        """
        with pytest.raises(InvalidWidthError):
            init_antisymmetric(7, 4, 0)

    def test_broken_sign_pairing_is_rejected(self):
        """
        GIVEN signs that do not flip between the halves
        WHEN a state is built
        THEN a ValueError is raised
        """
        with pytest.raises(ValueError):
            NetworkState(W=np.ones((4, 3)), a=np.ones(4))

    def test_states_are_frozen(self, state):
        """
        GIVEN a network state
        WHEN its weights are written in place
        THEN numpy refuses
        """
        with pytest.raises(ValueError):
            state.W[0, 0] = 1.0


class TestForwardAndGradient:
    """
    Test cases for outputs and gradients
    """

    def test_forward_matches_definition(self, state, points):
        """
        GIVEN a perturbed network
        WHEN it is evaluated at one point
        THEN the output is (1/sqrt(m)) sum_j a_j relu(w_j . x)
        """
        moved = _perturbed(state, 0.1, 1)
        x = points[0]

        expected = np.sum(moved.a * np.maximum(moved.W @ x, 0.0)) / math.sqrt(moved.m)

        assert forward(moved, x) == pytest.approx(expected, abs=1e-14)

    @settings(max_examples=20, derandomize=True, deadline=None)
    @given(seed=st.integers(0, 10_000), scale=st.floats(1e-3, 2.0), d=st.integers(3, 8))
    def test_output_is_lipschitz_in_each_neuron(self, seed, scale, d):
        """
        GIVEN random perturbations W' of a random state W
        WHEN both networks are evaluated on the sphere
        THEN |f_W(x) - f_W'(x)| <= (1/sqrt(m)) sum_j |w_j - w'_j|
        """
        state = init_antisymmetric(32, d, named_stream(seed, "init"))
        moved = _perturbed(state, scale, seed)
        X = sample_sphere(d, 50, named_stream(seed, "data"))

        bound = float(np.sum(np.linalg.norm(moved.W - state.W, axis=1))) / math.sqrt(state.m)

        assert np.max(np.abs(forward_batch(moved, X) - forward_batch(state, X))) <= bound + 1e-12

    def test_gradient_rows_follow_activation(self, state, points):
        """
        GIVEN a point x
        WHEN the gradient is computed
        THEN row j is a_j 1{w_j . x > 0} x / sqrt(m)
        """
        x = points[0]
        grad = gradient(state, x)
        active = (state.W @ x) > 0

        np.testing.assert_allclose(grad, (state.a * active)[:, None] * x[None, :] / math.sqrt(state.m))

    def test_inputs_must_match_dimension(self, state):
        """
        GIVEN inputs of the wrong dimension
        WHEN the network is evaluated
        THEN a DimensionMismatchError is raised
        """
        with pytest.raises(DimensionMismatchError):
            forward_batch(state, np.eye(3))

    def test_inputs_must_lie_on_the_sphere(self, state):
        """
        GIVEN an input of norm 2
        WHEN the network is evaluated
        THEN a ValueError is raised
        """
        with pytest.raises(ValueError):
            forward_batch(state, np.array([[2.0, 0.0, 0.0, 0.0]]))


class TestGradientMatrix:
    """
    Test cases for the Khatri-Rao gradient matrix and its matrix-free products
    """

    @settings(max_examples=20, derandomize=True, deadline=None)
    @given(seed=st.integers(0, 10_000), half=st.integers(1, 12), n=st.integers(2, 12), d=st.integers(3, 6))
    def test_gram_identity(self, seed, half, n, d):
        """
        GIVEN random small instances
        WHEN G^T G is compared with the empirical Gram matrix
        THEN they agree within 1e-10
        """
        state = _perturbed(init_antisymmetric(2 * half, d, named_stream(seed, "init")), 0.3, seed)
        X = sample_sphere(d, n, named_stream(seed, "data"))

        G = gradient_matrix(state, X)

        assert np.max(np.abs(G.gram() - gram_matrix(state, X).H)) <= 1e-10

    def test_columns_are_vectorized_gradients(self, state, points):
        """
        GIVEN the gradient matrix
        WHEN column i is reshaped row-major
        THEN it equals the gradient at x_i
        """
        G = gradient_matrix(state, points)

        for i in (0, 5, 19):
            np.testing.assert_allclose(G.G[:, i].reshape(state.m, state.d), gradient(state, points[i]), atol=1e-15)

    def test_matrix_free_products(self, state, points):
        """
        GIVEN a vector v and a matrix M
        WHEN G v and G^T vec(M) are computed without forming G
        THEN they match the dense products
        """
        moved = _perturbed(state, 0.2, 3)
        rng = as_generator(5)
        v = rng.standard_normal(points.shape[0])
        M = rng.standard_normal((moved.m, moved.d))
        G = gradient_matrix(moved, points).G

        np.testing.assert_allclose(apply_gradient(moved, points, v).ravel(), G @ v, atol=1e-12)
        np.testing.assert_allclose(adjoint_gradient(moved, points, M), G.T @ M.ravel(), atol=1e-12)

    def test_kernel_is_frobenius_product_of_gradients(self, state, points):
        """
        GIVEN two points
        WHEN the empirical kernel is compared with the product of their gradients
        THEN they agree within 1e-12
        """
        x, x_prime = points[0], points[1]

        expected = float(np.sum(gradient(state, x) * gradient(state, x_prime)))

        assert kappa_empirical(state, x, x_prime) == pytest.approx(expected, abs=1e-12)

    def test_spectral_norm_and_column_norms(self, state, points):
        """
        GIVEN the gradient matrix
        WHEN its column norms are computed
        THEN they equal sqrt(active fraction) since inputs have unit norm
        """
        G = gradient_matrix(state, points)
        active = np.mean(jacobian(state, points) != 0.0, axis=0)

        np.testing.assert_allclose(G.column_norms(), np.sqrt(active), atol=1e-12)
        assert G.spectral_norm() >= np.max(G.column_norms()) - 1e-12


class TestGradientDrift:
    """
    Test cases for the drift of the gradient matrix
    """

    def test_no_drift_without_movement(self, state, points):
        """
        GIVEN the same state twice
        WHEN the drift is computed
        THEN it is zero
        """
        assert gradient_drift(state, state, points) == 0.0

    def test_drift_matches_dense_spectral_norm(self, state, points):
        """
        GIVEN an initial and a moved state
        WHEN the drift is computed through the Gram identity
        THEN it matches |G_0 - G_t|_2 computed densely
        """
        moved = _perturbed(state, 0.3, 9)

        dense = np.linalg.norm(gradient_matrix(state, points).G - gradient_matrix(moved, points).G, ord=2)

        assert gradient_drift(state, moved, points) == pytest.approx(dense, abs=1e-8)
