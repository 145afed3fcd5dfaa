"""Deterministic generation of Fourier frequency banks.

The pipeline is Sobol points in the unit cube, a measure-preserving map onto
the unit ball, and a radial warp that reshapes the radial density into that
of a zero-mean Gaussian with variance ``sigma_f``. Stratification survives
each stage, so the resulting frequency set covers all orientations without
the clusters and holes of i.i.d. normal sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc

__all__ = [
    "FrequencyBank",
    "sobol_sequence",
    "cube_to_ball",
    "radial_warp",
    "build_frequency_bank",
]

_SOBOL_BITS = 32

# Joe-Kuo direction-number table (new-joe-kuo-6.21201) for dimensions 2-4;
# dimension 1 is the base-2 van der Corput sequence. Entries: (s, a, m_i).
_JOE_KUO = {
    2: (1, 0, (1,)),
    3: (2, 1, (1, 3)),
    4: (3, 1, (1, 3, 1)),
}


def _direction_integers(dim_index: int) -> np.ndarray:
    """Direction integers v_1..v_BITS for one Sobol dimension, as fixed-point
    values scaled by 2**_SOBOL_BITS."""
    v = np.zeros(_SOBOL_BITS + 1, dtype=np.uint64)
    if dim_index == 1:
        for i in range(1, _SOBOL_BITS + 1):
            v[i] = np.uint64(1) << np.uint64(_SOBOL_BITS - i)
        return v
    s, a, m_init = _JOE_KUO[dim_index]
    m = list(m_init)
    for k in range(s, _SOBOL_BITS):
        new = m[k - s] ^ (m[k - s] << s)
        for j in range(1, s):
            if (a >> (s - 1 - j)) & 1:
                new ^= m[k - j] << j
        m.append(new)
    for i in range(1, _SOBOL_BITS + 1):
        v[i] = np.uint64(m[i - 1]) << np.uint64(_SOBOL_BITS - i)
    return v


def sobol_sequence(count: int, dim: int, shift: np.ndarray | None = None) -> np.ndarray:
    """First ``count`` points of the unscrambled Sobol sequence in [0,1)^dim.

    Emission starts at sequence index 1 (the all-zeros point at index 0 is
    skipped), in Gray-code order with Joe-Kuo direction numbers. ``shift``
    optionally applies a digital (XOR) shift per dimension.
    """
    if dim not in (1, 2, 3, 4):
        raise ValueError(f"sobol_sequence supports dim in 1..4, got {dim}")
    if count < 0:
        raise ValueError("count must be >= 0")
    v = np.stack([_direction_integers(j + 1) for j in range(dim)])  # (dim, BITS+1)
    x = np.zeros(dim, dtype=np.uint64)
    out = np.empty((count, dim), dtype=np.uint64)
    for i in range(1, count + 1):
        # Rightmost zero bit of i-1 selects the direction integer.
        c = 1
        val = i - 1
        while val & 1:
            val >>= 1
            c += 1
        x ^= v[:, c]
        out[i - 1] = x
    if shift is not None:
        out ^= np.asarray(shift, dtype=np.uint64)[None, :]
    return out.astype(np.float64) / float(1 << _SOBOL_BITS)


def cube_to_ball(points: np.ndarray) -> np.ndarray:
    """Measure-preserving map from [0,1)^d onto the closed unit ball.

    d=1 is the affine map onto [-1,1); d=2 the concentric square-to-disk map;
    d>=3 sends a centered cube point c to the direction c/|c| at radius
    equal to the max-norm shell coordinate, which preserves the radial
    measure (cube fraction t^d maps to ball fraction t^d).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.size and (points.min() < 0.0 or points.max() >= 1.0):
        raise ValueError("cube points must lie in [0,1)")
    d = points.shape[1]
    c = 2.0 * points - 1.0
    if d == 1:
        return c
    if d == 2:
        return _concentric_square_to_disk(c)
    t = np.abs(c).max(axis=1)
    norm = np.linalg.norm(c, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = c * (t / norm)[:, None]
    out[norm == 0.0] = 0.0
    return out


def _concentric_square_to_disk(c: np.ndarray) -> np.ndarray:
    """Shirley-Chiu concentric map on centered coordinates in [-1,1)^2."""
    a, b = c[:, 0], c[:, 1]
    r = np.empty_like(a)
    phi = np.empty_like(a)
    wedge_a = np.abs(a) > np.abs(b)
    with np.errstate(invalid="ignore", divide="ignore"):
        r[wedge_a] = a[wedge_a]
        phi[wedge_a] = (np.pi / 4.0) * (b[wedge_a] / a[wedge_a])
        r[~wedge_a] = b[~wedge_a]
        phi[~wedge_a] = np.pi / 2.0 - (np.pi / 4.0) * (a[~wedge_a] / b[~wedge_a])
    center = (a == 0.0) & (b == 0.0)
    r[center] = 0.0
    phi[center] = 0.0
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


def _radial_cdf(r: np.ndarray, d: int, sigma_f: float) -> np.ndarray:
    """CDF of the radius of a d-dim zero-mean Gaussian with variance sigma_f
    (a chi distribution with d degrees of freedom scaled by sqrt(sigma_f))."""
    return gammainc(d / 2.0, np.square(r) / (2.0 * sigma_f))


def _invert_radial_cdf(q: np.ndarray, d: int, sigma_f: float, tol: float = 1e-9) -> np.ndarray:
    """Bracketed bisection of the radial CDF, absolute tolerance ``tol``."""
    q = np.asarray(q, dtype=np.float64)
    # Quantiles of exactly 1 would invert to infinity; the generator never
    # produces them, but guard against adversarial shifts.
    q = np.clip(q, 0.0, 1.0 - 1e-15)
    hi = np.full_like(q, np.sqrt(sigma_f * (d + 4.0)))
    for _ in range(200):
        mask = _radial_cdf(hi, d, sigma_f) < q
        if not mask.any():
            break
        hi[mask] *= 2.0
    lo = np.zeros_like(q)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = _radial_cdf(mid, d, sigma_f) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if (hi - lo).max() <= tol:
            break
    return 0.5 * (lo + hi)


def radial_warp(points: np.ndarray, sigma_f: float) -> np.ndarray:
    """Rescale unit-ball points so their radial density is Gaussian.

    A point at radius r (uniform-ball quantile r^d) moves to the matching
    quantile of the target radial law; directions are untouched.
    """
    if sigma_f <= 0.0:
        raise ValueError(f"sigma_f must be positive, got {sigma_f}")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = points.shape[1]
    r = np.linalg.norm(points, axis=1)
    if r.size and r.max() > 1.0 + 1e-12:
        raise ValueError("radial_warp inputs must lie in the unit ball")
    r_new = _invert_radial_cdf(r**d, d, sigma_f)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = points * (r_new / r)[:, None]
    out[r == 0.0] = 0.0
    return out


@dataclass(frozen=True)
class FrequencyBank:
    """The spectral skeleton of a field: m frequency vectors in cycles per
    unit of the [-1,1]^d domain, plus the warp metadata that produced them."""

    dim: int
    count: int
    freqs: np.ndarray  # (count, dim) float64
    warp_variance: float
    seed: int = 0

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        if freqs.shape != (self.count, self.dim):
            raise ValueError(
                f"freqs shape {freqs.shape} != (count={self.count}, dim={self.dim})"
            )
        if not np.all(np.isfinite(freqs)):
            raise ValueError("frequency bank contains non-finite entries")
        object.__setattr__(self, "freqs", freqs)

    def __eq__(self, other):
        if not isinstance(other, FrequencyBank):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.count == other.count
            and self.warp_variance == other.warp_variance
            and self.seed == other.seed
            and np.array_equal(self.freqs, other.freqs)
        )


def build_frequency_bank(dim: int, count: int, sigma_f: float, seed: int = 0) -> FrequencyBank:
    """Sobol -> ball -> radial warp, packaged with its generation metadata.

    ``seed`` selects a digital shift of the Sobol points (0 = unshifted), so
    distinct seeds give distinct but equally stratified banks.
    """
    if count < 1:
        raise ValueError("frequency count must be >= 1")
    shift = None
    if seed != 0:
        shift_rng = np.random.default_rng(seed)
        shift = shift_rng.integers(0, 1 << _SOBOL_BITS, size=dim, dtype=np.uint64)
    cube = sobol_sequence(count, dim, shift=shift)
    freqs = radial_warp(cube_to_ball(cube), sigma_f)
    return FrequencyBank(dim=dim, count=count, freqs=freqs,
                         warp_variance=float(sigma_f), seed=seed)
