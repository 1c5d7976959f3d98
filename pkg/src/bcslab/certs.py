"""Security certificates and bounds.

Two constructive witness families show that a plaintext set cannot do phase
retrieval (and hence cannot retrieve the key, for phase-symmetric filters):

  * all plaintexts 1-sparse: every x_k x_k^* is diagonal, so any zero-diagonal
    self-adjoint rank-2 matrix H = e_i e_j^* + e_j e_i^* is orthogonal to all
    of them;
  * a pair (i, j) that never co-occurs in a support: the same H works, since
    <x_k x_k^*, e_i e_j^*> = conj(x_k[i]) x_k[j] = 0 for every k.

A counting argument guarantees such a pair whenever M s(s-1) < n(n-1); on
top of that, sets with M <= 4n - 3 - 2 log2(n-1) can never do phase
retrieval regardless of sparsity. The retrieval bound combines both.

The module also hosts the Gaussian-filter indistinguishability test: for
dense Gaussian filters, the cyphertext law depends on Q x only through the
amplitudes of its Fourier transform, so multiplying the rows of F(Q) by unit
phases yields a key with identical cyphertext statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_cmat, as_cvec, sample_complex_gaussian_matrix
from .scheme import SparseVector

HERMITIAN_TOL = 1e-12
RANK_TOL = 1e-10
ORTHO_TOL = 1e-10


def retrieval_bound(n: int, s: int) -> float:
    """max(n(n-1)/(s(s-1)), 4n - 3 - 2 log2(n-1)).

    Below this many plaintexts, no set of s-sparse vectors can retrieve the
    key. Defined for s >= 2; 1-sparse sets can never retrieve it.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if s < 2:
        raise ValueError("s must be >= 2 (1-sparse sets never retrieve the key)")
    return max(n * (n - 1) / (s * (s - 1)), 4 * n - 3 - 2 * np.log2(n - 1))


def pr_dimension_bound(n: int) -> float:
    """4n - 3 - 2 log2(n-1): below this, no vector set does phase retrieval."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return 4 * n - 3 - 2 * np.log2(n - 1)


@dataclass(frozen=True)
class PairSet:
    """Symmetric set of off-diagonal index pairs (i, j), i != j."""

    n: int
    pairs: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.pairs:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"bad pair ({i}, {j}) for n={self.n}")
            if (j, i) not in self.pairs:
                raise ValueError(f"pair set is not symmetric: ({i},{j}) without ({j},{i})")

    def __len__(self):
        return len(self.pairs)

    def first(self) -> tuple[int, int] | None:
        """Lexicographically smallest pair, or None if empty."""
        return min(self.pairs) if self.pairs else None


def build_E_set(plaintexts: list[SparseVector]) -> PairSet:
    """Pairs (i, j), i != j, such that no plaintext support contains both.

    For generically filled supports this is exactly the set of pairs with
    <x_k x_k^*, e_i e_j^*> = 0 for all k (exact-zero value collisions inside
    a support are a measure-zero event and are ignored).
    """
    if not plaintexts:
        raise ValueError("need at least one plaintext")
    n = plaintexts[0].n
    if any(x.n != n for x in plaintexts):
        raise ValueError("plaintexts have inconsistent lengths")
    covered = np.zeros((n, n), dtype=bool)
    for x in plaintexts:
        covered[np.ix_(x.support, x.support)] = True
    np.fill_diagonal(covered, True)
    free = np.argwhere(~covered)
    return PairSet(n, frozenset((int(i), int(j)) for i, j in free))


@dataclass(frozen=True)
class HermitianCertificate:
    """Non-zero self-adjoint H of rank <= 2 with <x_k x_k^*, H> = 0 for all k,
    witnessing that the plaintext set cannot do phase retrieval."""

    H: np.ndarray
    pair: tuple[int, int]  # the generating (i, j)


def _pair_certificate(n: int, i: int, j: int) -> HermitianCertificate:
    H = np.zeros((n, n), dtype=np.complex128)
    H[i, j] = 1.0
    H[j, i] = 1.0
    return HermitianCertificate(H, (i, j))


def noninjectivity_certificate(plaintexts: list[SparseVector]) -> HermitianCertificate | None:
    """Constructive witness, or None when this certificate family is empty.

    All plaintexts 1-sparse: the first off-diagonal pair works (the matrices
    x_k x_k^* are all diagonal). Otherwise the first pair of the E-set, if
    any. None means only that THIS family has no member, not that the set
    can do phase retrieval.
    """
    if not plaintexts:
        raise ValueError("need at least one plaintext")
    n = plaintexts[0].n
    if all(x.s == 1 for x in plaintexts):
        if n < 2:
            return None
        return _pair_certificate(n, 0, 1)
    E = build_E_set(plaintexts)
    p = E.first()
    return _pair_certificate(n, *p) if p is not None else None


def validate_certificate(cert: HermitianCertificate, plaintexts: list[SparseVector]) -> bool:
    """Checks the certificate invariants against the plaintext set:
    Hermitian within 1e-12, rank <= 2, non-zero, and orthogonal to every
    x_k x_k^* within 1e-10 * ||H|| * max_k ||x_k||^2."""
    H = as_cmat(cert.H, "H")
    Hnorm = float(np.linalg.norm(H))
    if Hnorm == 0.0:
        return False
    if float(np.max(np.abs(H - H.conj().T))) > HERMITIAN_TOL * max(1.0, Hnorm):
        return False
    sv = np.linalg.svd(H, compute_uv=False)
    if sv.size > 2 and sv[2] > RANK_TOL * Hnorm:
        return False
    xnorm2 = max(float(np.linalg.norm(x.values) ** 2) for x in plaintexts)
    bound = ORTHO_TOL * Hnorm * xnorm2
    for x in plaintexts:
        # <x x^*, H> = x^H H x, restricted to the support
        sub = H[np.ix_(x.support, x.support)]
        val = np.vdot(x.values, sub @ x.values)
        if abs(val) > bound:
            return False
    return True


def fourier_row_phase_twin(key: np.ndarray, phases) -> np.ndarray:
    """Q' = F^{-1}(diag(phases) F(Q)) with F the column-wise unitary DFT.

    For dense Gaussian filters, Q and Q' produce identically distributed
    cyphertexts for every plaintext.
    """
    Q = as_cmat(key, "key")
    phases = as_cvec(phases, "phases")
    if phases.shape[0] != Q.shape[0]:
        raise ValueError("need one phase per key row")
    if np.any(np.abs(np.abs(phases) - 1.0) > 1e-12):
        raise ValueError("phases must be unit scalars")
    FQ = np.fft.fft(Q, axis=0, norm="ortho")
    return np.fft.ifft(phases[:, None] * FQ, axis=0, norm="ortho")


@dataclass(frozen=True)
class IndistReport:
    n_samples: int
    threshold: float
    max_mean_diff: float
    max_cov_diff: float
    passed: bool


def _cyphertext_moments(v: np.ndarray, N: int, rng: np.random.Generator):
    """Empirical mean and covariance of the 2m real coordinates of
    y = h * v over N dense-Gaussian filters, with y standardized by ||v||
    so that moment fluctuations are O(1/sqrt(N))."""
    m = v.shape[0]
    scale = float(np.linalg.norm(v))
    if scale == 0.0:
        raise ValueError("Q x is zero; moments are degenerate")
    H = np.sqrt(0.5) * (rng.standard_normal((N, m)) + 1j * rng.standard_normal((N, m)))
    Y = np.fft.ifft(np.fft.fft(H, axis=1) * np.fft.fft(v)[None, :], axis=1) / scale
    Z = np.concatenate([Y.real, Y.imag], axis=1)  # N x 2m
    mean = Z.mean(axis=0)
    Zc = Z - mean[None, :]
    cov = (Zc.T @ Zc) / N
    return mean, cov


def moment_comparison(
    key_a: np.ndarray,
    key_b: np.ndarray,
    x: SparseVector,
    N: int,
    rng: np.random.Generator,
    threshold: float | None = None,
) -> IndistReport:
    """Two-sample first/second-moment comparison of the cyphertext laws of
    two keys on one plaintext, under dense Gaussian filters.

    For Gaussian filters the cyphertext is conditionally Gaussian, so first
    and second moments characterize the law; the default threshold 6/sqrt(N)
    is a ~6 sigma bound on the empirical moment fluctuation of the
    standardized samples.
    """
    Qa = as_cmat(key_a)
    Qb = as_cmat(key_b)
    if Qa.shape != Qb.shape:
        raise ValueError("keys must share dimensions")
    if N < 2:
        raise ValueError("need N >= 2 samples")
    va = Qa[:, x.support] @ x.values
    vb = Qb[:, x.support] @ x.values
    mean_a, cov_a = _cyphertext_moments(va, N, rng)
    mean_b, cov_b = _cyphertext_moments(vb, N, rng)
    thr = 6.0 / np.sqrt(N) if threshold is None else threshold
    dmean = float(np.max(np.abs(mean_a - mean_b)))
    dcov = float(np.max(np.abs(cov_a - cov_b)))
    return IndistReport(N, thr, dmean, dcov, dmean < thr and dcov < thr)


def gaussian_indistinguishability_test(
    key: np.ndarray,
    x: SparseVector,
    phases,
    N: int,
    rng: np.random.Generator,
) -> IndistReport:
    """Moment test between a key and its Fourier-row-phase twin.

    Passing corroborates that, under dense Gaussian filters, no plaintext
    set can distinguish the two keys (and hence cannot retrieve the key).
    """
    twin = fourier_row_phase_twin(key, phases)
    return moment_comparison(key, twin, x, N, rng)


@dataclass(frozen=True)
class CertifyReport:
    n: int
    s: int
    M: int
    bound: float | None  # retrieval_bound(n, s); None for s = 1
    dimension_bound: float  # 4n - 3 - 2 log2(n-1)
    all_one_sparse: bool
    certificate: HermitianCertificate | None
    certificate_valid: bool
    verdict: str  # "provably non-retrievable" | "no certificate found"

    def text(self) -> str:
        lines = [
            f"plaintexts: M={self.M}, n={self.n}, s={self.s}",
            f"retrieval bound: {self.bound:.2f}" if self.bound is not None else "retrieval bound: n/a (s=1)",
            f"dimension bound (4n-3-2log2(n-1)): {self.dimension_bound:.2f}",
            f"all plaintexts 1-sparse: {'yes' if self.all_one_sparse else 'no'}",
        ]
        if self.certificate is not None:
            i, j = self.certificate.pair
            lines.append(f"certificate: H = e_{i} e_{j}^* + e_{j} e_{i}^*  (valid: {'yes' if self.certificate_valid else 'NO'})")
        else:
            lines.append("certificate: none in this family")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def certify_instance(plaintexts: list[SparseVector], n: int, s: int) -> CertifyReport:
    """Composite report: bound arithmetic, certificate construction and the
    verdict. "provably non-retrievable" when a certificate validates or when
    M is at most the dimension bound; otherwise "no certificate found"
    (absence of this certificate family, not proof of retrievability)."""
    if not plaintexts:
        raise ValueError("need at least one plaintext")
    if any(x.n != n for x in plaintexts):
        raise ValueError("plaintext length disagrees with n")
    M = len(plaintexts)
    all_one = all(x.s == 1 for x in plaintexts)
    bound = retrieval_bound(n, s) if s >= 2 else None
    dim_bound = pr_dimension_bound(n)
    cert = noninjectivity_certificate(plaintexts)
    valid = cert is not None and validate_certificate(cert, plaintexts)
    provable = valid or M <= dim_bound
    return CertifyReport(
        n=n,
        s=s,
        M=M,
        bound=bound,
        dimension_bound=dim_bound,
        all_one_sparse=all_one,
        certificate=cert,
        certificate_valid=valid,
        verdict="provably non-retrievable" if provable else "no certificate found",
    )
