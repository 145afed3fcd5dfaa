"""Matrix-exponential machinery for orthogonal weight parameterizations.

Skew-symmetric packing, the scaling-and-squaring matrix exponential with a
degree-13 Pade approximant, its Frechet derivative and adjoint (the pieces
reverse-mode differentiation of exp(A) needs), Haar-distributed orthogonal
sampling, and a power-iteration spectral-norm estimate.

Everything here runs in float64 regardless of the caller's precision policy:
repeated squaring amplifies round-off, and downstream code relies on
``exp(A)`` being orthogonal to ~1e-10.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

__all__ = [
    "skew_from_params",
    "skew_to_params",
    "matexp",
    "matexp_with_cache",
    "matexp_frechet",
    "matexp_frechet_from_cache",
    "matexp_adjoint_grad",
    "haar_orthonormal",
    "spectral_norm",
]

# Degree-13 Pade coefficients b_0..b_13 for the matrix exponential.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)

# Largest 1-norm for which the degree-13 approximant meets double precision
# without squaring.
_THETA13 = 5.371920351148152


def skew_from_params(params, n: int) -> np.ndarray:
    """Unpack n(n-1)/2 reals (strict upper triangle, row-major) into A = -A^T."""
    params = np.asarray(params, dtype=np.float64)
    expected = n * (n - 1) // 2
    if params.shape != (expected,):
        raise ValueError(
            f"skew parameter vector for side {n} must have length {expected}, "
            f"got shape {params.shape}"
        )
    a = np.zeros((n, n), dtype=np.float64)
    iu = np.triu_indices(n, k=1)
    a[iu] = params
    a[(iu[1], iu[0])] = -params
    return a


def skew_to_params(a: np.ndarray) -> np.ndarray:
    """Read the strict upper triangle back out, row-major."""
    a = np.asarray(a)
    iu = np.triu_indices(a.shape[0], k=1)
    return np.ascontiguousarray(a[iu], dtype=np.float64)


class _ExpmCache:
    """Intermediates of one matexp call, kept so the backward pass can reuse
    the A-powers, the Pade polynomial pieces, and the LU factorization."""

    __slots__ = ("a", "a2", "a4", "a6", "w1", "w", "z1", "lu", "r0", "chain", "nsq")

    def __init__(self, a, a2, a4, a6, w1, w, z1, lu, r0, chain, nsq):
        self.a = a
        self.a2 = a2
        self.a4 = a4
        self.a6 = a6
        self.w1 = w1
        self.w = w
        self.z1 = z1
        self.lu = lu
        self.r0 = r0
        self.chain = chain  # pre-squaring results [r0, r0^2, ...], len nsq
        self.nsq = nsq


def matexp_with_cache(a: np.ndarray) -> tuple[np.ndarray, _ExpmCache]:
    """exp(a) via scaling-and-squaring with the degree-13 Pade approximant.

    Returns the exponential together with the intermediates needed by
    :func:`matexp_frechet_from_cache`. Input is promoted to float64.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matexp expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matexp input contains non-finite entries")
    n = a.shape[0]
    ident = np.eye(n)

    norm = np.linalg.norm(a, 1)
    if norm == 0.0:
        # Exact identity; the cache still supports Frechet calls at A = 0.
        lu = lu_factor(_PADE13[0] * ident, check_finite=False)
        zero = np.zeros_like(a)
        return ident.copy(), _ExpmCache(
            a, zero, zero, zero, zero, _PADE13[1] * ident, zero, lu,
            ident.copy(), [], 0,
        )
    nsq = 0
    if norm > _THETA13:
        nsq = int(np.ceil(np.log2(norm / _THETA13)))
        a = a / (2.0**nsq)

    b = _PADE13
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    w1 = b[13] * a6 + b[11] * a4 + b[9] * a2
    w2 = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident
    w = a6 @ w1 + w2
    u = a @ w
    z1 = b[12] * a6 + b[10] * a4 + b[8] * a2
    v = a6 @ z1 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident

    lu = lu_factor(v - u, check_finite=False)
    r0 = lu_solve(lu, v + u, check_finite=False)

    chain = []
    r = r0
    for _ in range(nsq):
        chain.append(r)
        r = r @ r
    return r, _ExpmCache(a, a2, a4, a6, w1, w, z1, lu, r0, chain, nsq)


def matexp(a: np.ndarray) -> np.ndarray:
    """exp(a) for a square real matrix (float64 internally)."""
    return matexp_with_cache(a)[0]


def _frechet_pade13(cache: _ExpmCache, e: np.ndarray, transpose: bool) -> np.ndarray:
    """Frechet derivative of the pre-squaring Pade approximant.

    With ``transpose`` the derivative is taken at A^T instead of A. Because
    every polynomial piece is a polynomial in powers of A, its value at A^T
    is the transpose of the cached one, and the LU of (V - U) solves the
    transposed system directly.
    """
    b = _PADE13
    if transpose:
        a, a2, a4, a6 = cache.a.T, cache.a2.T, cache.a4.T, cache.a6.T
        w1, w, z1, r0 = cache.w1.T, cache.w.T, cache.z1.T, cache.r0.T
    else:
        a, a2, a4, a6 = cache.a, cache.a2, cache.a4, cache.a6
        w1, w, z1, r0 = cache.w1, cache.w, cache.z1, cache.r0

    m2 = a @ e + e @ a
    m4 = a2 @ m2 + m2 @ a2
    m6 = a2 @ m4 + m2 @ a4
    dw1 = b[13] * m6 + b[11] * m4 + b[9] * m2
    dw2 = b[7] * m6 + b[5] * m4 + b[3] * m2
    dw = a6 @ dw1 + m6 @ w1 + dw2
    lu_ = e @ w + a @ dw
    dz1 = b[12] * m6 + b[10] * m4 + b[8] * m2
    lv = a6 @ dz1 + m6 @ z1 + b[6] * m6 + b[4] * m4 + b[2] * m2
    rhs = lu_ + lv + (lu_ - lv) @ r0
    return lu_solve(cache.lu, rhs, trans=1 if transpose else 0, check_finite=False)


def matexp_frechet_from_cache(
    cache: _ExpmCache, e: np.ndarray, transpose: bool = False
) -> np.ndarray:
    """Frechet derivative L(A, E) (or L(A^T, E)) reusing a matexp cache.

    The scaling applied to A carries over to E; the squaring phase applies
    the product rule along the cached squaring chain.
    """
    e = np.asarray(e, dtype=np.float64)
    if e.shape != cache.a.shape:
        raise ValueError(f"direction shape {e.shape} != matrix shape {cache.a.shape}")
    if cache.nsq:
        e = e / (2.0**cache.nsq)
    l = _frechet_pade13(cache, e, transpose)
    for x in cache.chain:
        xr = x.T if transpose else x
        l = xr @ l + l @ xr
    return l


def matexp_frechet(a: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Frechet derivative of the matrix exponential at ``a`` in direction ``e``."""
    _, cache = matexp_with_cache(np.asarray(a, dtype=np.float64))
    return matexp_frechet_from_cache(cache, e)


def matexp_adjoint_grad(a: np.ndarray, gbar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Backprop through exp(A) for skew-parameterized A.

    ``gbar`` is the upstream gradient w.r.t. exp(A). Returns the gradient
    w.r.t. the full matrix A, which is L(A^T, gbar), together with the
    gradient w.r.t. the packed strict-upper-triangle parameters, read off
    (G - G^T).
    """
    a = np.asarray(a, dtype=np.float64)
    gbar = np.asarray(gbar, dtype=np.float64)
    if gbar.shape != a.shape:
        raise ValueError(f"gradient shape {gbar.shape} != matrix shape {a.shape}")
    _, cache = matexp_with_cache(a)
    g = matexp_frechet_from_cache(cache, gbar, transpose=True)
    return g, skew_to_params(g - g.T)


def haar_orthonormal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an orthogonal matrix from the Haar measure on O(n).

    QR of an i.i.d. standard-normal matrix with the signs of R's diagonal
    absorbed into Q, which removes the sign convention bias of raw QR.
    """
    if n < 1:
        raise ValueError("matrix side must be >= 1")
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def haar_orthonormal_batch(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Stacked Haar draws, shape (count, n, n); one QR call over the batch."""
    q, r = np.linalg.qr(rng.standard_normal((count, n, n)))
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs = np.where(signs == 0, 1.0, signs)
    return q * signs[:, None, :]


def spectral_norm(m: np.ndarray, iterations: int = 100) -> float:
    """Largest singular value of ``m`` by power iteration on M^T M.

    The start vector comes from a fixed seed so repeated calls agree
    bit-for-bit.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    v = np.random.default_rng(0x5EED).standard_normal(m.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iterations):
        w = m.T @ (m @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return float(np.linalg.norm(m @ v))
