"""Anisotropically dampened positional encoding and its input Jacobian.

A coordinate x maps to interleaved pairs (w_i cos(2 pi b_i.x),
w_i sin(2 pi b_i.x)) over the bank frequencies b_i. The dampening weights
w_i = exp(-sqrt(b_i^T C_hat b_i)) shrink features along directions the
pseudo-covariance C_hat penalizes, which is what steers the learned
filtering at inference time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .freqgen import FrequencyBank

__all__ = [
    "PseudoCovariance",
    "dampening_weights",
    "encode",
    "encode_batch",
    "encode_jacobian_x",
]


@dataclass(frozen=True)
class PseudoCovariance:
    """Positive semi-definite d x d matrix steering feature dampening."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"pseudo-covariance must be square, got shape {m.shape}")
        if np.abs(m - m.T).max() > 1e-9:
            raise ValueError("pseudo-covariance must be symmetric (tol 1e-9)")
        if m.shape[0] > 0 and np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValueError("pseudo-covariance must be PSD (tol 1e-9)")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def zero(cls, dim: int) -> "PseudoCovariance":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def isotropic(cls, variance: float, dim: int) -> "PseudoCovariance":
        return cls(variance * np.eye(dim))


def _as_matrix(pseudo_cov) -> np.ndarray:
    if isinstance(pseudo_cov, PseudoCovariance):
        return pseudo_cov.matrix
    return np.asarray(pseudo_cov, dtype=np.float64)


def dampening_weights(bank: FrequencyBank, pseudo_cov) -> np.ndarray:
    """w_i = exp(-sqrt(b_i^T C_hat b_i)) for every bank frequency.

    The radicand is clamped at zero: a PSD matrix can produce quadratic
    forms of order -1e-17 through round-off, and sqrt of those must not NaN.
    """
    c = _as_matrix(pseudo_cov)
    if c.shape != (bank.dim, bank.dim):
        raise ValueError(f"pseudo-covariance shape {c.shape} != ({bank.dim}, {bank.dim})")
    quad = np.einsum("id,de,ie->i", bank.freqs, c, bank.freqs)
    return np.exp(-np.sqrt(np.maximum(quad, 0.0)))


def dampening_weights_batch(bank: FrequencyBank, pseudo_covs: np.ndarray) -> np.ndarray:
    """Per-sample weights for a stack of pseudo-covariances, shape (B, m)."""
    quad = np.einsum("id,bde,ie->bi", bank.freqs, pseudo_covs, bank.freqs)
    return np.exp(-np.sqrt(np.maximum(quad, 0.0)))


def encode(bank: FrequencyBank, weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Encoded vector of length 2m, layout [w1 cos, w1 sin, w2 cos, ...]."""
    return encode_batch(bank, np.atleast_2d(weights), np.atleast_2d(x))[0]


def encode_batch(bank: FrequencyBank, weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Encode a batch of coordinates, shape (B, 2m).

    ``weights`` may be (m,) shared across the batch or (B, m) per sample.
    """
    x = np.asarray(x, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if x.shape[-1] != bank.dim:
        raise ValueError(f"coordinate dim {x.shape[-1]} != bank dim {bank.dim}")
    if weights.shape[-1] != bank.count:
        raise ValueError(f"weight count {weights.shape[-1]} != bank count {bank.count}")
    phase = 2.0 * np.pi * (x @ bank.freqs.T)  # (B, m)
    out = np.empty((x.shape[0], 2 * bank.count), dtype=np.float64)
    out[:, 0::2] = weights * np.cos(phase)
    out[:, 1::2] = weights * np.sin(phase)
    return out


def encode_jacobian_x(bank: FrequencyBank, weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Jacobian of the encoding w.r.t. x, shape (2m, d).

    Row pairs are (-2 pi w_i sin(phase_i) b_i, 2 pi w_i cos(phase_i) b_i),
    matching the interleaved encoding layout.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if x.shape[0] != bank.dim:
        raise ValueError(f"coordinate dim {x.shape[0]} != bank dim {bank.dim}")
    if weights.shape[0] != bank.count:
        raise ValueError(f"weight count {weights.shape[0]} != bank count {bank.count}")
    phase = 2.0 * np.pi * (bank.freqs @ x)  # (m,)
    jac = np.empty((2 * bank.count, bank.dim), dtype=np.float64)
    jac[0::2] = (-2.0 * np.pi * weights * np.sin(phase))[:, None] * bank.freqs
    jac[1::2] = (2.0 * np.pi * weights * np.cos(phase))[:, None] * bank.freqs
    return jac
