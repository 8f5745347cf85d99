"""Echo state network construction, training, and autoregressive forecasting.

The reservoir is a tanh ESN without a leak term: r' = tanh(A r + B u).
Only the linear readout C is trained, by closed-form ridge regression on
the nonlinearly transformed state history.  Forecasts renormalize each
predicted phase-component pair back to the unit circle before feeding it
back in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

__all__ = [
    "ReservoirConfig",
    "ReservoirMatrices",
    "StateHistory",
    "Readout",
    "ReadoutTrainingError",
    "ForecastAbort",
    "CollectionError",
    "spectral_radius_of",
    "build_internal_matrix",
    "build_input_matrix",
    "build_matrices",
    "update_state",
    "nonlinear_transform",
    "collect_states",
    "train_readout",
    "forecast",
]

from .dynamics import normalize_components


class ReadoutTrainingError(RuntimeError):
    """Ridge solve failed (rank-deficient Gram matrix with beta = 0)."""


class CollectionError(RuntimeError):
    """Non-finite reservoir activation while collecting training states."""

    def __init__(self, step: int):
        super().__init__(f"non-finite reservoir activation at training step {step}")
        self.step = step


class ForecastAbort(RuntimeError):
    """Autoregressive forecast hit a non-finite or unnormalizable prediction.

    Carries the surviving prediction prefix so callers can score the failure
    rather than drop it.
    """

    def __init__(self, partial: np.ndarray, step: int, reason: str):
        super().__init__(f"forecast aborted at step {step}: {reason}")
        self.partial = partial
        self.step = step


@dataclass(frozen=True)
class ReservoirConfig:
    """ESN hyperparameters; defaults are the parameter-error-task baselines."""

    size: int = 300
    spectral_radius: float = 0.4
    input_scaling: float = 0.15
    mean_degree: float = 3.0
    regularization: float = 1e-6
    knowledge_ratio: float = 0.5

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("reservoir size must be >= 1")
        if self.spectral_radius <= 0:
            raise ValueError("spectral radius must be positive")
        if self.input_scaling <= 0:
            raise ValueError("input scaling must be positive")
        if not (0 < self.mean_degree <= self.size):
            raise ValueError("mean degree must be in (0, size]")
        if self.regularization < 0:
            raise ValueError("regularization must be >= 0")
        if not (0.0 <= self.knowledge_ratio <= 1.0):
            raise ValueError("knowledge ratio must be in [0, 1]")


@dataclass(frozen=True)
class ReservoirMatrices:
    """The fixed random matrices: sparse internal A and one-hot-row input B."""

    internal: scipy.sparse.csr_matrix
    input: np.ndarray

    @property
    def d_r(self) -> int:
        return self.internal.shape[0]

    @property
    def d_in(self) -> int:
        return self.input.shape[1]


@dataclass(frozen=True)
class StateHistory:
    """Transformed (and, for hybrid, expert-augmented) states as columns."""

    features: np.ndarray  # D_feat x n_T

    @property
    def feature_dim(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class Readout:
    """Trained output matrix C mapping features to next-step predictions."""

    weights: np.ndarray  # D_u x D_feat


def spectral_radius_of(a) -> float:
    """Magnitude of the largest eigenvalue of a (sparse) square matrix.

    Dense solve for modest sizes; ARPACK for larger sparse matrices (the
    dominant eigenvalue of a random non-symmetric matrix is often a complex
    pair, which plain real power iteration cannot track).
    """
    n = a.shape[0]
    if n <= 2048:
        dense = a.toarray() if scipy.sparse.issparse(a) else np.asarray(a)
        return float(np.max(np.abs(np.linalg.eigvals(dense))))
    try:
        # ask for several eigenvalues: sparse random matrices have tightly
        # clustered leading spectra and small-k ARPACK can miss the maximum
        vals = scipy.sparse.linalg.eigs(
            a.astype(float), k=8, which="LM", return_eigenvectors=False,
            maxiter=10_000, tol=1e-10,
        )
        return float(np.max(np.abs(vals)))
    except (scipy.sparse.linalg.ArpackNoConvergence, RuntimeError):
        dense = a.toarray() if scipy.sparse.issparse(a) else np.asarray(a)
        return float(np.max(np.abs(np.linalg.eigvals(dense))))


def build_internal_matrix(cfg: ReservoirConfig, seed) -> scipy.sparse.csr_matrix:
    """Erdos-Renyi internal matrix A, rescaled to the target spectral radius.

    Each directed entry is present with probability mean_degree/size, with
    Uniform(-1, 1) weights.  A draw whose spectral radius is zero (e.g. an
    empty graph) is resampled from the same stream, up to 16 attempts.
    """
    rng = np.random.default_rng(seed)
    n = cfg.size
    p = cfg.mean_degree / n
    for _ in range(16):
        mask = rng.random((n, n)) < p
        weights = rng.uniform(-1.0, 1.0, (n, n))
        a = scipy.sparse.csr_matrix(np.where(mask, weights, 0.0))
        rho = spectral_radius_of(a)
        if rho > 0:
            return a * (cfg.spectral_radius / rho)
    raise RuntimeError(
        "could not sample an internal matrix with non-zero spectral radius "
        "after 16 attempts; increase mean_degree or size"
    )


def build_input_matrix(cfg: ReservoirConfig, d_in: int, hybrid: bool, seed) -> np.ndarray:
    """Input matrix B with exactly one non-zero per row.

    Standard: the column is uniform over all d_in input dimensions.  Hybrid
    (d_in = 2*D_u, ordered [expert prediction; current state]): each row
    lands in the expert block with probability knowledge_ratio, else in the
    state block.  Weights ~ Uniform(-input_scaling, input_scaling).
    """
    rng = np.random.default_rng(seed)
    n = cfg.size
    if hybrid:
        if d_in % 2 != 0:
            raise ValueError("hybrid input dimension must be even")
        d_u = d_in // 2
        to_expert = rng.random(n) < cfg.knowledge_ratio
        within = rng.integers(0, d_u, n)
        cols = np.where(to_expert, within, d_u + within)
    else:
        cols = rng.integers(0, d_in, n)
    weights = rng.uniform(-cfg.input_scaling, cfg.input_scaling, n)
    b = np.zeros((n, d_in))
    b[np.arange(n), cols] = weights
    return b


def build_matrices(cfg: ReservoirConfig, d_u: int, hybrid: bool, internal_seed, input_seed) -> ReservoirMatrices:
    """Convenience constructor for the (A, B) pair of one instantiation."""
    a = build_internal_matrix(cfg, internal_seed)
    b = build_input_matrix(cfg, 2 * d_u if hybrid else d_u, hybrid, input_seed)
    return ReservoirMatrices(internal=a, input=b)


def update_state(r: np.ndarray, u: np.ndarray, m: ReservoirMatrices) -> np.ndarray:
    """r' = tanh(A r + B u)."""
    if r.shape[0] != m.d_r or u.shape[0] != m.d_in:
        raise ValueError("state/input dimensions do not match the matrices")
    return np.tanh(m.internal @ r + m.input @ u)


def nonlinear_transform(r: np.ndarray) -> np.ndarray:
    """Odd (1-based) entries pass through; even entries are squared."""
    out = np.array(r, dtype=float, copy=True)
    out[1::2] **= 2
    return out


def collect_states(training: np.ndarray, m: ReservoirMatrices, cfg: ReservoirConfig, expert=None):
    """Drive the reservoir through a training span in feed-forward mode.

    `training` is D_u x (n_T + 1); column t of the returned history holds
    g(r_{t+1}) (standard) or [u_tilde_{t+1}; g(r_{t+1})] (hybrid), and the
    target matrix holds the ground-truth next states.
    """
    if training.ndim != 2 or training.shape[1] < 2:
        raise ValueError("need at least 2 training samples")
    d_u, n_cols = training.shape
    n_t = n_cols - 1
    d_feat = m.d_r + (d_u if expert is not None else 0)
    features = np.empty((d_feat, n_t))
    r = np.zeros(m.d_r)
    for t in range(n_t):
        u = training[:, t]
        if expert is not None:
            u_tilde = expert.step(u)
            r = update_state(r, np.concatenate([u_tilde, u]), m)
        else:
            r = update_state(r, u, m)
        if not np.all(np.isfinite(r)):
            raise CollectionError(t)
        g = nonlinear_transform(r)
        features[:, t] = np.concatenate([u_tilde, g]) if expert is not None else g
    return StateHistory(features=features), training[:, 1:]


def train_readout(history, targets: np.ndarray, beta: float) -> Readout:
    """Closed-form ridge regression: C = Y Phi^T (Phi Phi^T + beta I)^-1.

    Solved through a symmetric positive-definite factorization; no explicit
    inverse is formed.
    """
    if beta < 0:
        raise ValueError("regularization must be >= 0")
    phi = history.features if isinstance(history, StateHistory) else np.asarray(history)
    y = np.asarray(targets)
    if phi.shape[1] != y.shape[1]:
        raise ValueError("history and targets disagree on sample count")
    gram = phi @ phi.T
    gram[np.diag_indices_from(gram)] += beta
    try:
        factor = scipy.linalg.cho_factor(gram)
        c = scipy.linalg.cho_solve(factor, phi @ y.T).T
    except scipy.linalg.LinAlgError as exc:
        raise ReadoutTrainingError(
            "ridge solve failed: Gram matrix is rank deficient; use beta > 0"
        ) from exc
    if not np.all(np.isfinite(c)):
        raise ReadoutTrainingError(
            "ridge solve produced non-finite weights; use beta > 0"
        )
    return Readout(weights=c)


def forecast(warmup: np.ndarray, horizon: int, m: ReservoirMatrices, readout: Readout,
             cfg: ReservoirConfig, expert=None) -> np.ndarray:
    """Warm up on a span, then forecast autoregressively for `horizon` steps.

    The reservoir starts from r = 0, consumes the warm-up span feed-forward,
    and then feeds its own (renormalized) output back in; prediction step 1
    corresponds to the first ground-truth test sample.  Returns D_u x horizon.
    """
    if warmup.ndim != 2 or warmup.shape[1] < 1:
        raise ValueError("warm-up span must contain at least one sample")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    d_u = warmup.shape[0]
    r = np.zeros(m.d_r)
    u_tilde = None
    for t in range(warmup.shape[1]):
        u = warmup[:, t]
        if expert is not None:
            u_tilde = expert.step(u)
            r = update_state(r, np.concatenate([u_tilde, u]), m)
        else:
            r = update_state(r, u, m)
    preds = np.empty((d_u, horizon))
    for k in range(horizon):
        g = nonlinear_transform(r)
        feat = np.concatenate([u_tilde, g]) if expert is not None else g
        u_hat = readout.weights @ feat
        if not np.all(np.isfinite(u_hat)):
            raise ForecastAbort(preds[:, :k].copy(), k, "non-finite prediction")
        try:
            u_hat = normalize_components(u_hat)
        except ValueError as exc:
            raise ForecastAbort(preds[:, :k].copy(), k, str(exc)) from exc
        preds[:, k] = u_hat
        if k < horizon - 1:
            if expert is not None:
                u_tilde = expert.step(u_hat)
                r = update_state(r, np.concatenate([u_tilde, u_hat]), m)
            else:
                r = update_state(r, u_hat, m)
    return preds
