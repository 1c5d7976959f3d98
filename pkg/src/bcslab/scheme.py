"""The encryption side of the scheme.

A key is a secret complex m x n matrix Q shared by sender and receiver.
Each transmission draws a fresh filter h from a public distribution and
sends y = h * (Q x), circular convolution of length m. The filter is never
communicated; the receiver solves the blind deconvolution problem instead.

All three filter distributions here are phase-symmetric (theta*h has the
same law as h for every unit scalar theta), which is the property the
security analysis leans on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    as_cmat,
    as_cvec,
    circ_conv,
    matvec,
    sample_complex_gaussian,
    sample_complex_gaussian_matrix,
)

DENSE_GAUSSIAN = "dense"
SPARSE_GAUSSIAN = "sparse"
UNIT_PHASE_IDENTITY = "unitphase"


@dataclass(frozen=True)
class FilterDistribution:
    """Public filter law for length-m filters.

    kind:
      "dense"     - i.i.d. CN(0,1) entries (full support, illustrative case)
      "sparse"    - uniform random support of size sigma, CN(0,1) on it
      "unitphase" - e^{i phi} e_0 with phi uniform; the minimal confounder
    """

    kind: str
    m: int
    sigma: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("filter length must be >= 1")
        if self.kind not in (DENSE_GAUSSIAN, SPARSE_GAUSSIAN, UNIT_PHASE_IDENTITY):
            raise ValueError(f"unknown filter distribution kind {self.kind!r}")
        if self.kind == SPARSE_GAUSSIAN:
            if self.sigma is None or not (1 <= self.sigma <= self.m):
                raise ValueError("sparse filter needs 1 <= sigma <= m")
        elif self.sigma is not None:
            raise ValueError("sigma only applies to the sparse variant")


def dense_gaussian(m: int) -> FilterDistribution:
    return FilterDistribution(DENSE_GAUSSIAN, m)


def sparse_gaussian(m: int, sigma: int) -> FilterDistribution:
    return FilterDistribution(SPARSE_GAUSSIAN, m, sigma)


def unit_phase_identity(m: int) -> FilterDistribution:
    return FilterDistribution(UNIT_PHASE_IDENTITY, m)


@dataclass(frozen=True)
class SparseVector:
    """A length-n vector with an explicit support of s non-zero values.

    Supports are stored explicitly because s << n in the experiments and the
    certificate machinery works on supports directly.
    """

    n: int
    support: np.ndarray  # sorted, distinct indices in [0, n)
    values: np.ndarray  # non-zero complex values, aligned with support

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.complex128)
        if support.ndim != 1 or values.shape != support.shape:
            raise ValueError("support and values must be 1-d arrays of equal length")
        if support.size < 1:
            raise ValueError("support must have size >= 1")
        if np.any(support < 0) or np.any(support >= self.n):
            raise ValueError("support indices out of range")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be sorted and distinct")
        if np.any(values == 0):
            raise ValueError("values on the support must be non-zero")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @property
    def s(self) -> int:
        return int(self.support.size)

    def dense(self) -> np.ndarray:
        x = np.zeros(self.n, dtype=np.complex128)
        x[self.support] = self.values
        return x

    @staticmethod
    def from_dense(x) -> "SparseVector":
        x = as_cvec(x, "plaintext")
        support = np.flatnonzero(x)
        if support.size == 0:
            raise ValueError("plaintext is identically zero")
        return SparseVector(x.shape[0], support, x[support])


def keygen(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Secret key: m x n matrix with i.i.d. CN(0,1) entries."""
    if m < 1 or n < 1:
        raise ValueError("key dimensions must be >= 1")
    return sample_complex_gaussian_matrix(rng, m, n)


def sample_filter(d: FilterDistribution, rng: np.random.Generator) -> np.ndarray:
    if d.kind == DENSE_GAUSSIAN:
        return sample_complex_gaussian(rng, d.m)
    if d.kind == SPARSE_GAUSSIAN:
        h = np.zeros(d.m, dtype=np.complex128)
        support = np.sort(rng.choice(d.m, size=d.sigma, replace=False))
        h[support] = _nonzero_gaussian(rng, d.sigma)
        return h
    # unit-phase identity: e^{i phi} on the first coordinate
    h = np.zeros(d.m, dtype=np.complex128)
    h[0] = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
    return h


def _nonzero_gaussian(rng: np.random.Generator, k: int) -> np.ndarray:
    # Resample exact zeros (probability-zero event, handled for robustness).
    z = sample_complex_gaussian(rng, k)
    while np.any(z == 0):
        bad = z == 0
        z[bad] = sample_complex_gaussian(rng, int(bad.sum()))
    return z


def sample_plaintext(n: int, s: int, rng: np.random.Generator) -> SparseVector:
    """Support uniform over s-subsets of [0,n), values i.i.d. CN(0,1)."""
    if not (1 <= s <= n):
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    support = np.sort(rng.choice(n, size=s, replace=False))
    return SparseVector(n, support, _nonzero_gaussian(rng, s))


def encrypt(
    key: np.ndarray,
    x: SparseVector,
    d: FilterDistribution,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (y, h) with y = h * (Q x).

    The filter is returned only so that decryption tests can compare against
    ground truth; protocol-level callers discard it and the attack module
    never sees it.
    """
    Q = as_cmat(key, "key")
    if x.n != Q.shape[1]:
        raise ValueError(f"plaintext length {x.n} != key columns {Q.shape[1]}")
    if d.m != Q.shape[0]:
        raise ValueError(f"filter length {d.m} != key rows {Q.shape[0]}")
    h = sample_filter(d, rng)
    y = circ_conv(h, matvec(Q, x.dense()))
    return y, h
