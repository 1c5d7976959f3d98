"""Command-line interface.

Subcommands mirror the protocol roles: keygen/encrypt (sender), decrypt
(receiver), make-instance/attack (eavesdropper), certify/indist (security
certificates), experiment (Monte-Carlo grids). Vectors, matrices and
instances use the text formats from textio.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import attack, certs, deconv, harness, scheme, textio
from .core import make_rng


def _parse_dist(spec: str, m: int) -> scheme.FilterDistribution:
    if spec == "dense":
        return scheme.dense_gaussian(m)
    if spec == "unitphase":
        return scheme.unit_phase_identity(m)
    if spec.startswith("sparse:"):
        return scheme.sparse_gaussian(m, int(spec.split(":", 1)[1]))
    raise SystemExit(f"bad --dist {spec!r}: expected dense, sparse:<sigma>, or unitphase")


def _cmd_keygen(args) -> int:
    Q = scheme.keygen(args.m, args.n, make_rng(args.seed))
    textio.save_cmat(args.out, Q)
    print(f"wrote {args.m}x{args.n} key to {args.out}")
    return 0


def _cmd_encrypt(args) -> int:
    Q = textio.load_cmat(args.key)
    x = scheme.SparseVector.from_dense(textio.load_cvec(args.plaintext))
    d = _parse_dist(args.dist, Q.shape[0])
    y, _h = scheme.encrypt(Q, x, d, make_rng(args.seed))
    textio.save_cvec(args.out, y)
    print(f"wrote cyphertext (m={y.shape[0]}) to {args.out}")
    return 0


def _cmd_decrypt(args) -> int:
    Q = textio.load_cmat(args.key)
    y = textio.load_cvec(args.cyphertext)
    res = deconv.hihtp_decrypt(y, Q, args.sigma, args.s, max_iters=args.max_iters)
    print(f"converged: {res.converged}")
    print(f"iterations: {res.iterations}")
    print(f"residual: {res.residual:.6e}")
    if args.out:
        with open(args.out, "w") as f:
            textio.write_cvec(f, res.h_hat)
            textio.write_cvec(f, res.x_hat)
        print(f"wrote h_hat and x_hat to {args.out}")
    return 0 if res.converged else 1


def _cmd_make_instance(args) -> int:
    Q = textio.load_cmat(args.key)
    rng = make_rng(args.seed)
    xs = [scheme.sample_plaintext(Q.shape[1], args.s, rng) for _ in range(args.M)]
    inst = attack.make_instance(Q, xs, rng)
    textio.save_instance(args.out, [x.dense() for x in xs], [inst.B[:, k] for k in range(inst.M)])
    print(f"wrote instance (M={args.M}, n={Q.shape[1]}, m={Q.shape[0]}) to {args.out}")
    return 0


def _cmd_attack(args) -> int:
    plaintexts, observations = textio.load_instance(args.instance)
    inst = attack.instance_from_dense(plaintexts, observations)
    if (inst.m, inst.n) != (args.m, args.n):
        raise SystemExit(f"instance is {inst.m}x{inst.n}, but --m {args.m} --n {args.n} given")
    truth = textio.load_cmat(args.truth) if args.truth else None
    opts = attack.EXPERIMENT_BUDGET if args.experiment_budget else attack.LbfgsOptions()
    res = attack.recover_key(
        inst, args.m, args.n, restarts=args.restarts, rng=make_rng(args.seed),
        truth=truth, opts=opts,
    )
    print(f"final loss: {res.final_loss:.6e}")
    print(f"optimizer iterations (all restarts): {res.iterations}")
    if truth is not None:
        print(f"relative error mod phase: {res.rel_error_mod_phase:.6f}")
        print(f"success (< {attack.SUCCESS_THRESHOLD}): {res.success}")
    if args.out:
        textio.save_cmat(args.out, res.Q_hat)
        print(f"wrote recovered key to {args.out}")
    return 0


def _cmd_certify(args) -> int:
    dense = textio.load_cvecs(args.plaintexts)
    xs = [scheme.SparseVector.from_dense(v) for v in dense]
    report = certs.certify_instance(xs, args.n, args.s)
    print(report.text())
    return 0


def _cmd_indist(args) -> int:
    Q = textio.load_cmat(args.key)
    x = scheme.SparseVector.from_dense(textio.load_cvec(args.plaintext))
    rng = make_rng(args.seed)
    phases = np.exp(2j * np.pi * rng.uniform(size=Q.shape[0]))
    rep = certs.gaussian_indistinguishability_test(Q, x, phases, args.n_samples, rng)
    print(f"samples: {rep.n_samples}")
    print(f"threshold (6/sqrt(N)): {rep.threshold:.6f}")
    print(f"max mean discrepancy: {rep.max_mean_diff:.6f}")
    print(f"max covariance discrepancy: {rep.max_cov_diff:.6f}")
    print(f"passed: {rep.passed}")
    return 0 if rep.passed else 1


def _cmd_experiment(args) -> int:
    if args.preset:
        grid = harness.PRESETS[args.preset]
        if args.trials:
            from dataclasses import replace

            grid = replace(grid, trials=args.trials)
    else:
        if not (args.n and args.m and args.M_list and args.s_list):
            raise SystemExit("either --preset or all of --n --m --M-list --s-list are required")
        grid = harness.ExperimentGrid(
            n=args.n,
            m=args.m,
            M_values=tuple(int(v) for v in args.M_list.split(",")),
            s_values=tuple(int(v) for v in args.s_list.split(",")),
            trials=args.trials or 100,
            seed=args.seed,
            restarts=args.restarts,
        )
    try:
        summary, _records = harness.run_grid(grid, parallelism=args.jobs, out_csv=args.out, verbose=args.verbose)
    except harness.SentinelError as exc:
        print(f"SENTINEL: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    for (M, s), cell in sorted(summary.cells.items()):
        print(f"  M={M} s={s}: rate={cell.success_rate:.2f} mean_rel={cell.mean_rel_error:.3f} trials={cell.trials}")
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="bcs", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    q = sub.add_parser("keygen", help="generate a Gaussian key")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_keygen)

    q = sub.add_parser("encrypt", help="y = h * Q x with a fresh filter")
    q.add_argument("--key", required=True)
    q.add_argument("--plaintext", required=True)
    q.add_argument("--dist", required=True, help="dense | sparse:<sigma> | unitphase")
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_encrypt)

    q = sub.add_parser("decrypt", help="blind deconvolution of a cyphertext")
    q.add_argument("--key", required=True)
    q.add_argument("--cyphertext", required=True)
    q.add_argument("--sigma", type=int, required=True)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--max-iters", type=int, default=200)
    q.add_argument("--out")
    q.set_defaults(func=_cmd_decrypt)

    q = sub.add_parser("make-instance", help="sample plaintexts and projective observations")
    q.add_argument("--key", required=True)
    q.add_argument("--M", type=int, required=True)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_make_instance)

    q = sub.add_parser("attack", help="key recovery from an instance file")
    q.add_argument("--instance", required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--restarts", type=int, default=3)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--truth", help="key file; enables the error metric")
    q.add_argument("--experiment-budget", action="store_true", help="numeric-gradient evaluation budget used by the experiments")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_attack)

    q = sub.add_parser("certify", help="non-retrievability certificates for a plaintext set")
    q.add_argument("--plaintexts", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--s", type=int, required=True)
    q.set_defaults(func=_cmd_certify)

    q = sub.add_parser("indist", help="Gaussian-filter indistinguishability moment test")
    q.add_argument("--key", required=True)
    q.add_argument("--plaintext", required=True)
    q.add_argument("--n-samples", type=int, default=100000)
    q.add_argument("--seed", type=int, required=True)
    q.set_defaults(func=_cmd_indist)

    q = sub.add_parser("experiment", help="Monte-Carlo success-rate grid")
    q.add_argument("--preset", choices=sorted(harness.PRESETS))
    q.add_argument("--n", type=int)
    q.add_argument("--m", type=int)
    q.add_argument("--M-list", help="comma-separated M values")
    q.add_argument("--s-list", help="comma-separated s values")
    q.add_argument("--trials", type=int)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--restarts", type=int, default=1)
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--out", required=True)
    q.add_argument("--verbose", action="store_true")
    q.set_defaults(func=_cmd_experiment)

    args = p.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
