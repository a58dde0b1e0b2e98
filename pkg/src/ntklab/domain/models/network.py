"""Two-layer ReLU network with frozen output signs and antisymmetric initialization."""

import hashlib
import logging
import math
from typing import Optional

import numpy as np
from numpy.linalg import LinAlgError
from pydantic import field_validator, model_validator
from scipy.linalg import eigh, khatri_rao

from ntklab.domain.errors import DimensionMismatchError, InvalidWidthError, NumericalError
from ntklab.domain.models.sphere import check_dimension
from ntklab.domain.models.streams import Seed, as_generator, child_streams
from ntklab.domain.schema_model import ArrayModel, frozen_array

log = logging.getLogger(__name__)

INPUT_NORM_TOLERANCE = 1e-9
EVALUATION_CHUNK = 2048


class NetworkState(ArrayModel):
    """Hidden weights ``W`` (m x d) and output signs ``a``; the signs pair neuron j with neuron j + m/2."""

    W: np.ndarray
    a: np.ndarray

    @field_validator("W", mode="before")
    @classmethod
    def _freeze_weights(cls, value):
        return frozen_array(value, 2, "W")

    @field_validator("a", mode="before")
    @classmethod
    def _freeze_signs(cls, value):
        return frozen_array(value, 1, "a")

    @model_validator(mode="after")
    def _check_pairing(self) -> "NetworkState":
        m = self.W.shape[0]
        if m < 2 or m % 2:
            raise ValueError(f"width m must be even and at least 2, got {m}")
        if self.a.shape != (m,):
            raise ValueError(f"a must have shape ({m},), got {self.a.shape}")
        if not np.all(np.abs(self.a) == 1.0):
            raise ValueError("output signs must be +1 or -1")
        if not np.array_equal(self.a[m // 2 :], -self.a[: m // 2]):
            raise ValueError("output signs must satisfy a[j + m/2] = -a[j]")
        return self

    @property
    def m(self) -> int:
        return int(self.W.shape[0])

    @property
    def d(self) -> int:
        return int(self.W.shape[1])

    def evolve(self, W: np.ndarray) -> "NetworkState":
        """A new state with updated hidden weights and the same output signs."""
        return NetworkState(W=W, a=self.a)

    def fingerprint(self) -> str:
        digest = hashlib.sha256(self.W.tobytes())
        digest.update(self.a.tobytes())
        return digest.hexdigest()[:16]


def init_antisymmetric(m: int, d: int, seed: Seed) -> NetworkState:
    """Gaussian first half, mirrored second half with flipped signs, so the network is exactly zero."""
    if m < 2 or m % 2:
        raise InvalidWidthError(f"width m must be even and at least 2, got {m}")
    check_dimension(d)
    weight_stream, sign_stream = child_streams(seed, 2)
    half = as_generator(weight_stream).standard_normal((m // 2, d))
    signs = as_generator(sign_stream).choice(np.array([-1.0, 1.0]), size=m // 2)
    return NetworkState(W=np.vstack([half, half]), a=np.concatenate([signs, -signs]))


def check_inputs(state: NetworkState, X: np.ndarray) -> np.ndarray:
    """Returns ``X`` as an (n, d) array after checking dimension and unit norms."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.ndim != 2 or X.shape[1] != state.d:
        raise DimensionMismatchError(f"network has d={state.d}, inputs have shape {X.shape}")
    if np.max(np.abs(np.linalg.norm(X, axis=1) - 1.0)) > INPUT_NORM_TOLERANCE:
        raise ValueError("network inputs must lie on the unit sphere")
    return X


def forward_batch(state: NetworkState, X: np.ndarray) -> np.ndarray:
    """Network outputs (1/sqrt(m)) sum_j a_j relu(w_j . x) at every row of ``X``."""
    X = check_inputs(state, X)
    out = np.empty(X.shape[0])
    scale = 1.0 / math.sqrt(state.m)
    for start in range(0, X.shape[0], EVALUATION_CHUNK):
        block = X[start : start + EVALUATION_CHUNK]
        out[start : start + block.shape[0]] = scale * (state.a @ np.maximum(state.W @ block.T, 0.0))
    return out


def forward(state: NetworkState, x: np.ndarray) -> float:
    return float(forward_batch(state, x)[0])


def activation_pattern(state: NetworkState, X: np.ndarray) -> np.ndarray:
    """Boolean m x n matrix of phi'(w_j . x_i) with phi'(0) = 0."""
    X = check_inputs(state, X)
    return (state.W @ X.T) > 0.0


def jacobian(state: NetworkState, X: np.ndarray) -> np.ndarray:
    """The m x n matrix (1/sqrt(m)) a_j phi'(w_j . x_i)."""
    return activation_pattern(state, X) * (state.a[:, None] / math.sqrt(state.m))


def gradient(state: NetworkState, x: np.ndarray) -> np.ndarray:
    """Gradient of the output at ``x`` with respect to W, an m x d matrix."""
    x = check_inputs(state, x)
    return jacobian(state, x)[:, 0:1] * x[0][None, :]


def apply_gradient(state: NetworkState, X: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-free ``reshape(G v)``: sum_i v_i * gradient(x_i), an m x d matrix."""
    X = check_inputs(state, X)
    return (jacobian(state, X) * np.asarray(v, dtype=np.float64)[None, :]) @ X


def adjoint_gradient(state: NetworkState, X: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Matrix-free ``G^T vec(M)``: the Frobenius products <gradient(x_i), M>."""
    X = check_inputs(state, X)
    return np.sum(jacobian(state, X) * (np.asarray(M) @ X.T), axis=0)


class GradientMatrix(ArrayModel):
    """The md x n matrix whose column i is the row-major vectorization of gradient(x_i)."""

    G: np.ndarray

    @field_validator("G", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, 2, "G")

    @property
    def n(self) -> int:
        return int(self.G.shape[1])

    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.G, axis=0)

    def gram(self) -> np.ndarray:
        return self.G.T @ self.G

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.G, ord=2))


def gradient_matrix(state: NetworkState, X: np.ndarray) -> GradientMatrix:
    """Khatri-Rao product of the Jacobian and X^T."""
    X = check_inputs(state, X)
    return GradientMatrix(G=khatri_rao(jacobian(state, X), X.T))


def gradient_drift(state_0: NetworkState, state_t: NetworkState, X: np.ndarray) -> float:
    """Spectral norm of G_0 - G_t at the data points, through the identity |dG|^2 = |(XX^T) o (dJ^T dJ)|."""
    if state_0.W.shape != state_t.W.shape:
        raise DimensionMismatchError("states must share width and dimension")
    X = check_inputs(state_0, X)
    delta = jacobian(state_0, X) - jacobian(state_t, X)
    gram = (X @ X.T) * (delta.T @ delta)
    gram = 0.5 * (gram + gram.T)
    n = gram.shape[0]
    top = symmetric_eigenvalues(gram, subset_by_index=[n - 1, n - 1])[0]
    return math.sqrt(max(float(top), 0.0))


def symmetric_eigenvalues(H: np.ndarray, subset_by_index: Optional[list[int]] = None) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix; a failing solver raises NumericalError."""
    try:
        return eigh(H, eigvals_only=True, subset_by_index=subset_by_index)
    except LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver failed: {exc}") from exc
