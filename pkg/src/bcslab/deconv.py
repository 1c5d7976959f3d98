"""Blind deconvolution decryptor.

The bilinear equation y = h * (Q x) is linearized by lifting: the rank-1
matrix X = h x^T satisfies

    A(X)_j = sum_{i,l} X_{i,l} Q_{(j-i) mod m, l},   A(h x^T) = h * (Q x),

so decryption becomes recovery of a bisparse rank-1 matrix (sigma non-zero
rows, s non-zero entries per row) from m linear measurements. The solver is
hierarchical hard thresholding pursuit: gradient step on ||y - A(X)||^2,
hierarchical (row-then-entry) thresholding, least-squares refit on the
selected support, stopping once the support repeats. The final iterate is
projected to rank 1 to split X back into (h, x) up to the inherent scaling
ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_cmat, as_cvec, sample_complex_gaussian_matrix


def lifted_apply(Q, X) -> np.ndarray:
    """A(X) = sum_l circ_conv(X[:, l], Q[:, l]); maps m x n matrices to C^m."""
    Q = as_cmat(Q, "Q")
    X = np.asarray(X, dtype=np.complex128)
    if X.shape != Q.shape:
        raise ValueError(f"X has shape {X.shape}, expected {Q.shape}")
    return np.fft.ifft(np.sum(np.fft.fft(X, axis=0) * np.fft.fft(Q, axis=0), axis=1))


def lifted_adjoint(Q, z) -> np.ndarray:
    """(A*(z))_{i,l} = sum_j z_j conj(Q_{(j-i) mod m, l}).

    Satisfies <A(X), z> = <X, A*(z)> with the conjugate-linear-in-first-slot
    inner product.
    """
    Q = as_cmat(Q, "Q")
    z = as_cvec(z, "z")
    if z.shape[0] != Q.shape[0]:
        raise ValueError(f"z has length {z.shape[0]}, expected {Q.shape[0]}")
    zf = np.fft.fft(z)
    return np.fft.ifft(zf[:, None] * np.conj(np.fft.fft(Q, axis=0)), axis=0)


def operator_norm_sq(
    Q, iters: int = 20, seed: int = 0, pattern: tuple[int, int] | None = None
) -> float:
    """Largest eigenvalue of A*A, estimated by power iteration on matrices.

    With pattern=(sigma, s) each iterate is projected onto the bisparse cone
    (hierarchical thresholding), estimating the restricted norm instead. The
    full-space norm is a gross overestimate of the operator's scale on
    bisparse matrices (factors of ~m*n/(sigma*s)), which would freeze the
    pursuit's gradient step.
    """
    Q = as_cmat(Q)
    rng = np.random.default_rng(seed)
    X = sample_complex_gaussian_matrix(rng, *Q.shape)
    if pattern is not None:
        _, X = hierarchical_threshold(X, *pattern)
    lam = 1.0
    for _ in range(iters):
        Y = lifted_adjoint(Q, lifted_apply(Q, X))
        if pattern is not None:
            _, Y = hierarchical_threshold(Y, *pattern)
        lam = float(np.linalg.norm(Y))
        if lam == 0.0:
            return 1.0
        X = Y / lam
    return lam


def hierarchical_threshold(X, sigma: int, s: int) -> tuple[set[tuple[int, int]], np.ndarray]:
    """Keep the sigma best rows (by the l2 norm of their s largest entries),
    and within each kept row the s largest-magnitude entries.

    Returns (support as a set of (row, col) pairs, thresholded copy of X).
    """
    X = np.asarray(X, dtype=np.complex128)
    m, n = X.shape
    sigma = min(sigma, m)
    s = min(s, n)
    mag = np.abs(X)
    # per-row l2 energy of the s largest entries
    if s < n:
        part = np.partition(mag, n - s, axis=1)[:, n - s :]
    else:
        part = mag
    scores = np.einsum("ij,ij->i", part, part)
    rows = np.sort(np.argpartition(scores, m - sigma)[m - sigma :]) if sigma < m else np.arange(m)
    out = np.zeros_like(X)
    support: set[tuple[int, int]] = set()
    for i in rows:
        cols = np.argpartition(mag[i], n - s)[n - s :] if s < n else np.arange(n)
        out[i, cols] = X[i, cols]
        support.update((int(i), int(c)) for c in cols)
    return support, out


@dataclass(frozen=True)
class DeconvResult:
    h_hat: np.ndarray  # unit norm, largest-magnitude entry real-positive
    x_hat: np.ndarray  # carries the scale
    residual: float  # ||y - h_hat * (Q x_hat)||
    iterations: int
    converged: bool  # support stabilized before the iteration cap


def _rank1_split(X, power_iters: int = 50, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Project X to its top singular pair and return (h, x) with X ~= h x^T,
    ||h|| = 1 and the largest-magnitude entry of h real-positive."""
    m, n = X.shape
    # deterministic start: the dominant column
    col = X[:, int(np.argmax(np.linalg.norm(X, axis=0)))]
    if np.linalg.norm(col) == 0.0:
        h = np.zeros(m, dtype=np.complex128)
        h[0] = 1.0
        return h, np.zeros(n, dtype=np.complex128)
    u = col / np.linalg.norm(col)
    prev = np.inf
    for _ in range(power_iters):
        v = X.conj().T @ u
        w = X @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        u_new = w / nw
        change = float(np.linalg.norm(u_new - u))
        u = u_new
        if abs(prev - change) < tol and change < np.sqrt(tol):
            break
        prev = change
    # phase convention: largest-magnitude entry of h real-positive, ties by
    # lowest index (argmax returns the first maximizer)
    p = int(np.argmax(np.abs(u)))
    phase = u[p] / abs(u[p])
    h = u * np.conj(phase)
    x = np.asarray(h.conj() @ X)  # the scale-carrying factor: h x^T ~= X
    return h, x


def _refit_on_support(Q, y, support) -> np.ndarray:
    """Least squares for X restricted to the given support.

    The columns of the restricted operator are A(e_i e_l^T) = roll(Q[:, l], i),
    and the support is tiny (sigma*s unknowns), so a dense solve is exact and
    cheap.
    """
    pairs = sorted(support)
    cols = np.stack([np.roll(Q[:, l], i) for (i, l) in pairs], axis=1)
    coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
    X = np.zeros_like(Q)
    for (i, l), c in zip(pairs, coef):
        X[i, l] = c
    return X


def hihtp_decrypt(
    y,
    key,
    sigma: int,
    s: int,
    max_iters: int = 200,
    step: float | None = None,
) -> DeconvResult:
    """Recover (h, x) with sigma-sparse h and s-sparse x from y = h * (Q x).

    Non-convergence is reported via converged=False on the best iterate, not
    as an exception. Inputs with m < sigma*s are accepted but are
    information-theoretically hopeless; expect converged=False there.
    """
    Q = as_cmat(key, "key")
    y = as_cvec(y, "y")
    m, n = Q.shape
    if y.shape[0] != m:
        raise ValueError(f"cyphertext length {y.shape[0]} != key rows {m}")
    if not (1 <= sigma <= m and 1 <= s <= n):
        raise ValueError("need 1 <= sigma <= m and 1 <= s <= n")

    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        h = np.zeros(m, dtype=np.complex128)
        h[0] = 1.0
        return DeconvResult(h, np.zeros(n, dtype=np.complex128), 0.0, 0, True)

    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    mu = 1.0 / operator_norm_sq(Q, iters=30, pattern=(sigma, s)) if step is None else step
    X = np.zeros((m, n), dtype=np.complex128)
    residual_vec = y.copy()
    best_X, best_res = X, ynorm
    prev_support: set[tuple[int, int]] | None = None
    converged = False
    iterations = 0

    for iterations in range(1, max_iters + 1):
        grad = lifted_adjoint(Q, residual_vec)
        support, X_th = hierarchical_threshold(X + mu * grad, sigma, s)
        pre_res = float(np.linalg.norm(y - lifted_apply(Q, X_th)))
        X = _refit_on_support(Q, y, support)
        residual_vec = y - lifted_apply(Q, X)
        res = float(np.linalg.norm(residual_vec))
        # the exact least-squares refit cannot increase the residual on the
        # selected support
        assert res <= pre_res + 1e-9 * (1.0 + pre_res), "refit increased the residual"
        if res < best_res:
            best_X, best_res = X, res
        if support == prev_support:
            converged = True
            break
        prev_support = support

    h, x = _rank1_split(best_X)
    final_res = float(np.linalg.norm(y - lifted_apply(Q, np.outer(h, x))))
    return DeconvResult(h, x, final_res, iterations, converged)


def rel_error_mod_scale(v, v_hat) -> float:
    """Distance between the complex lines spanned by v and v_hat:
    min over alpha of ||v - alpha v_hat|| / ||v||."""
    v = np.asarray(v, dtype=np.complex128).ravel()
    v_hat = np.asarray(v_hat, dtype=np.complex128).ravel()
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("ground truth has zero norm")
    nh = np.linalg.norm(v_hat)
    if nh == 0.0:
        return 1.0
    cos2 = abs(np.vdot(v_hat, v)) ** 2 / (nh**2 * nv**2)
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, cos2))))
