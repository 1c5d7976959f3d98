"""Bilinear compressive security lab.

Encryption y = h * (Q x) with a secret key Q and a per-message random
filter h, decryption by bisparse blind deconvolution, the known-plaintext
key-recovery attack, constructive non-retrievability certificates, and the
Monte-Carlo experiments locating the empirical recovery threshold.
"""

from .attack import (
    AttackInstance,
    AttackResult,
    LbfgsOptions,
    EXPERIMENT_BUDGET,
    loss,
    loss_gradient,
    lbfgs_minimize,
    make_instance,
    recover_key,
    rel_error_mod_phase,
)
from .certs import (
    build_E_set,
    certify_instance,
    gaussian_indistinguishability_test,
    noninjectivity_certificate,
    retrieval_bound,
    validate_certificate,
)
from .core import circ_conv, child_rng, dft, hash64, idft, make_rng, matvec, sample_complex_gaussian
from .deconv import DeconvResult, hierarchical_threshold, hihtp_decrypt, lifted_adjoint, lifted_apply
from .harness import ExperimentGrid, GridSummary, PRESETS, SentinelError, TrialRecord, run_grid, run_trial, summarize
from .scheme import FilterDistribution, SparseVector, encrypt, keygen, sample_filter, sample_plaintext

__all__ = [
    "AttackInstance",
    "AttackResult",
    "DeconvResult",
    "ExperimentGrid",
    "FilterDistribution",
    "GridSummary",
    "LbfgsOptions",
    "EXPERIMENT_BUDGET",
    "PRESETS",
    "SentinelError",
    "SparseVector",
    "TrialRecord",
    "build_E_set",
    "certify_instance",
    "child_rng",
    "circ_conv",
    "dft",
    "encrypt",
    "gaussian_indistinguishability_test",
    "hash64",
    "hierarchical_threshold",
    "hihtp_decrypt",
    "idft",
    "keygen",
    "lbfgs_minimize",
    "lifted_adjoint",
    "lifted_apply",
    "loss",
    "loss_gradient",
    "make_instance",
    "make_rng",
    "matvec",
    "noninjectivity_certificate",
    "recover_key",
    "rel_error_mod_phase",
    "retrieval_bound",
    "run_grid",
    "run_trial",
    "sample_complex_gaussian",
    "sample_filter",
    "sample_plaintext",
    "summarize",
    "validate_certificate",
]
