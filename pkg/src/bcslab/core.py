"""Complex vector/matrix kernels shared by every other module.

Conventions, fixed once here:
  * DFT is unitary (1/sqrt(m) scaling), so ||dft(v)|| = ||v||.
  * Convolution is circular modulo the common length m, which makes the
    diagonal convolution theorem hold:
        dft(circ_conv(h, v)) = sqrt(m) * dft(h) * dft(v)
    (the sqrt(m) is forced by the unitary normalization).
  * A complex standard Gaussian CN(0,1) has independent N(0, 1/2) real and
    imaginary parts, so E|z|^2 = 1.
  * Randomness is seeded: identical 64-bit seeds give identical streams, and
    parallel work derives child seeds via hash64(parent_seed, *path).
"""

from __future__ import annotations

import hashlib

import numpy as np

_SQRT_HALF = np.sqrt(0.5)


def as_cvec(v, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-d complex array and validate it is non-empty and finite."""
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {v.shape}")
    if v.size == 0:
        raise ValueError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_cmat(Q, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-d complex array and validate finiteness."""
    Q = np.asarray(Q, dtype=np.complex128)
    if Q.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {Q.shape}")
    if Q.shape[0] < 1 or Q.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions")
    if not np.all(np.isfinite(Q.real)) or not np.all(np.isfinite(Q.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return Q


def dft(v) -> np.ndarray:
    """Unitary discrete Fourier transform of a length-m complex vector."""
    v = as_cvec(v)
    return np.fft.fft(v, norm="ortho")


def idft(v) -> np.ndarray:
    """Inverse of dft; idft(dft(v)) == v to machine precision."""
    v = as_cvec(v)
    return np.fft.ifft(v, norm="ortho")


def circ_conv(h, v) -> np.ndarray:
    """Circular convolution y_j = sum_i h_i v_{(j-i) mod m}.

    Both inputs must share the same length m. Computed in the Fourier
    domain, which is exact for circular boundary conditions.
    """
    h = as_cvec(h, "h")
    v = as_cvec(v, "v")
    if h.shape != v.shape:
        raise ValueError(f"length mismatch: {h.shape[0]} vs {v.shape[0]}")
    return np.fft.ifft(np.fft.fft(h) * np.fft.fft(v))


def matvec(Q, x) -> np.ndarray:
    """Matrix-vector product with an explicit dimension check."""
    Q = as_cmat(Q)
    x = as_cvec(x, "x")
    if x.shape[0] != Q.shape[1]:
        raise ValueError(f"dimension mismatch: matrix is {Q.shape}, vector has length {x.shape[0]}")
    return Q @ x


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator; identical seeds produce identical sample streams."""
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def hash64(*parts) -> int:
    """Stable 64-bit hash of a tuple of integers/strings.

    Used to derive independent child seeds: hash64(parent_seed, task_index).
    blake2b keeps this reproducible across platforms and Python versions
    (unlike the builtin hash).
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, str):
            h.update(b"s" + p.encode("utf-8") + b"\x00")
        else:
            h.update(b"i" + int(p).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


def child_rng(seed: int, *path) -> np.random.Generator:
    """Generator for a subtask, derived from a parent seed and a task path."""
    return make_rng(hash64(seed, *path))


def sample_complex_gaussian(rng: np.random.Generator, length: int) -> np.ndarray:
    """i.i.d. CN(0,1) entries: real and imaginary parts are N(0, 1/2)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return _SQRT_HALF * (rng.standard_normal(length) + 1j * rng.standard_normal(length))


def sample_complex_gaussian_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Matrix with i.i.d. CN(0,1) entries."""
    if rows < 1 or cols < 1:
        raise ValueError("dimensions must be >= 1")
    return _SQRT_HALF * (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    )
