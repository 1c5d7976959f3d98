"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Criteria 1, 2, 3 and 5 read the desk-scale preset results from results/
(small50.csv, small100.csv). Complete CSVs ship with the repository; if they
are missing or partial, the fixtures resume the runs in place, which takes a
few hours of single-core time (delete the CSVs to regenerate from scratch).
Run with `pytest tests/test_acceptance.py -s` to see the PASS/FAIL lines.
"""

import numpy as np
import pytest

from bcslab import attack, certs, core, deconv, harness, scheme

RESULTS = __import__("pathlib").Path(__file__).resolve().parent.parent / "results"


def _criterion(num: int, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def _preset_records(name: str):
    grid = harness.PRESETS[name]
    out = RESULTS / f"{name}.csv"
    RESULTS.mkdir(exist_ok=True)
    try:
        _summary, records = harness.run_grid(grid, parallelism=1, out_csv=out)
        return records, []
    except harness.SentinelError:
        records = harness.load_records(out)
        wanted = {(M, s, t) for M in grid.M_values for s in grid.s_values for t in range(grid.trials)}
        records = [r for r in records if (r.M, r.s, r.trial) in wanted]
        return records, harness.sentinel_check(records)


@pytest.fixture(scope="session")
def small50():
    return _preset_records("small50")


@pytest.fixture(scope="session")
def small100():
    return _preset_records("small100")


def _rates(records):
    return {k: c.success_rate for k, c in harness.summarize(records).cells.items()}


def test_criterion_1_s1_impossibility(small50):
    """s = 1 never succeeds: rate exactly 0 at M = 100 and M = 500."""
    rates = _rates(small50[0])
    r100, r500 = rates[(100, 1)], rates[(500, 1)]
    _criterion(1, r100 == 0.0 and r500 == 0.0, f"s=1 success rates: M=100 -> {r100}, M=500 -> {r500}")


def test_criterion_2_threshold_scaling(small100):
    """0.5-rate thresholds: within factor 3 of (n/s)^2 for s in {2,3,4} and
    of 4n for s >= 8."""
    n = 100
    rates = _rates(small100[0])
    grid = harness.PRESETS["small100"]
    details = []
    ok = True
    for s in (2, 3, 4):
        target = (n / s) ** 2
        crossing = next((M for M in grid.M_values if rates[(M, s)] >= 0.5), None)
        good = crossing is not None and target / 3 <= crossing <= target * 3
        ok &= good
        details.append(f"s={s}: crossing={crossing} target={target:.0f}")
    for s in (8, 12, 24, 48):
        target = 4 * n
        crossing = next((M for M in grid.M_values if rates[(M, s)] >= 0.5), None)
        good = crossing is not None and target / 3 <= crossing <= target * 3
        ok &= good
        details.append(f"s={s}: crossing={crossing} target={target}")
    _criterion(2, ok, "; ".join(details))


def test_criterion_3_monotone_plateau(small50):
    """At M = 500 the success rate rises (within a 0.15 band) to a plateau
    whose onset (first s reaching the plateau band) lies in s in [4, 10]."""
    rates = _rates(small50[0])
    grid = harness.PRESETS["small50"]
    prof = [rates[(500, s)] for s in grid.s_values]
    peak = max(prof)
    onset = next((s for s, r in zip(grid.s_values, prof) if r >= peak - 0.15), None)
    upto = [i for i, s in enumerate(grid.s_values) if s <= (onset or grid.s_values[-1])]
    monotone = all(prof[i + 1] >= prof[i] - 0.15 for i in upto[:-1])
    ok = onset is not None and 4 <= onset <= 10 and monotone
    detail = f"profile {dict(zip(grid.s_values, prof))}, plateau onset s={onset}, monotone={monotone}"
    _criterion(3, ok, detail)


def test_criterion_4_certificate_soundness():
    """200 random plaintext sets inside the counting zone: certificate found
    and validated in all 200."""
    rng = core.make_rng(440)
    found = 0
    total = 200
    for k in range(total):
        n = int(rng.integers(4, 101))
        s = int(rng.integers(2, min(n - 1, 8) + 1))
        cap = (n * (n - 1)) // (s * (s - 1))
        if cap < 1:
            total -= 1
            continue
        M = int(rng.integers(1, cap + 1))
        while M * s * (s - 1) >= n * (n - 1):
            M -= 1
        xs = [scheme.sample_plaintext(n, s, core.child_rng(441, k, i)) for i in range(max(M, 1))]
        cert = certs.noninjectivity_certificate(xs)
        if cert is not None and certs.validate_certificate(cert, xs):
            found += 1
    _criterion(4, found == total, f"{found}/{total} certificated and validated")


def test_criterion_5_certificate_consistency_sentinel(small50, small100):
    """No grid cell with a validated certificate has success rate > 0.05."""
    violations = small50[1] + small100[1]
    detail = (
        "no certificated cell exceeds 0.05"
        if not violations
        else "violations: " + ", ".join(f"(M={M}, s={s}, rate={r:.2f})" for M, s, r in violations)
    )
    _criterion(5, not violations, detail)


def test_criterion_6_gaussian_indistinguishability():
    """m=4, n=8, N=1e5: the moment test passes for Fourier-row-phase twins
    and fails for independent keys, 10/10 seeded repetitions each."""
    N = 100_000
    ok_twin = ok_control = 0
    for rep in range(10):
        rng = core.child_rng(660, rep)
        Q = scheme.keygen(4, 8, rng)
        x = scheme.sample_plaintext(8, 3, rng)
        phases = np.exp(2j * np.pi * rng.uniform(size=4))
        if certs.gaussian_indistinguishability_test(Q, x, phases, N, rng).passed:
            ok_twin += 1
        fresh = scheme.keygen(4, 8, rng)
        if not certs.moment_comparison(Q, fresh, x, N, rng).passed:
            ok_control += 1
    _criterion(6, ok_twin == 10 and ok_control == 10, f"twin passes {ok_twin}/10, control fails {ok_control}/10")


def test_criterion_7_decryption_correctness():
    """m=128, n=100, s=3, sigma=3: relative error mod scale < 1e-4 in at
    least 90/100 trials."""
    ok = 0
    for t in range(100):
        rng = core.child_rng(770, t)
        Q = scheme.keygen(128, 100, rng)
        x = scheme.sample_plaintext(100, 3, rng)
        y, h = scheme.encrypt(Q, x, scheme.sparse_gaussian(128, 3), rng)
        res = deconv.hihtp_decrypt(y, Q, 3, 3)
        err = max(
            deconv.rel_error_mod_scale(x.dense(), res.x_hat),
            deconv.rel_error_mod_scale(h, res.h_hat),
        )
        ok += err < 1e-4
    _criterion(7, ok >= 90, f"{ok}/100 trials below 1e-4")


def test_criterion_8_numerical_kernels():
    """Convolution theorem (1e-10), adjoint identity (1e-10), analytic vs
    finite-difference gradient (1e-5 away from the nonsmooth set), DFT
    unitarity (1e-12); 100 randomized instances each."""
    rng = core.make_rng(880)
    conv_ok = unit_ok = adj_ok = grad_ok = 0

    for _ in range(100):
        m = int(rng.integers(2, 65))
        h = core.sample_complex_gaussian(rng, m)
        v = core.sample_complex_gaussian(rng, m)
        lhs = core.dft(core.circ_conv(h, v))
        rhs = np.sqrt(m) * core.dft(h) * core.dft(v)
        conv_ok += np.max(np.abs(lhs - rhs)) <= 1e-10
        unit_ok += abs(np.linalg.norm(core.dft(v)) - np.linalg.norm(v)) <= 1e-12 * np.linalg.norm(v)

    for _ in range(100):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(2, 11))
        Q = core.sample_complex_gaussian_matrix(rng, m, n)
        X = core.sample_complex_gaussian_matrix(rng, m, n)
        z = core.sample_complex_gaussian(rng, m)
        ip1 = np.vdot(deconv.lifted_apply(Q, X), z)
        ip2 = np.vdot(X, deconv.lifted_adjoint(Q, z))
        adj_ok += abs(ip1 - ip2) <= 1e-10 * max(1.0, abs(ip1))

    grad_total = 0
    while grad_total < 100:
        m = int(rng.integers(2, 6))
        n = int(rng.integers(3, 11))
        M = int(rng.integers(4, 21))
        s = int(rng.integers(1, min(n, 4) + 1))
        Q = scheme.keygen(m, n, rng)
        xs = [scheme.sample_plaintext(n, s, rng) for _ in range(M)]
        inst = attack.make_instance(Q, xs, rng)
        Qr = core.sample_complex_gaussian_matrix(rng, m, n)
        P = inst.apply(Qr)
        if np.min(np.abs(np.sum(np.conj(inst.B) * P, axis=0))) < 1e-3:
            continue  # nonsmooth set
        grad_total += 1
        Ga = attack.loss_gradient(Qr, inst)
        Gf = np.zeros_like(Ga)
        eps = 1e-6
        for i in range(m):
            for j in range(n):
                for part in (1.0, 1j):
                    E = np.zeros_like(Qr)
                    E[i, j] = part * eps
                    d = (attack.loss(Qr + E, inst) - attack.loss(Qr - E, inst)) / (2 * eps)
                    Gf[i, j] += part * d / 2
        grad_ok += np.max(np.abs(Ga - Gf)) <= 1e-5 * max(1.0, np.max(np.abs(Ga)))

    ok = conv_ok == 100 and unit_ok == 100 and adj_ok == 100 and grad_ok == 100
    _criterion(8, ok, f"conv {conv_ok}/100, unitarity {unit_ok}/100, adjoint {adj_ok}/100, gradient {grad_ok}/100")
