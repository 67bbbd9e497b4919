"""Acceptance gate: every headline guarantee at its stated tolerance.

Each criterion prints one PASS/FAIL line (run with `pytest -s` to see them
on success) and asserts its stated tolerance; the Monte Carlo criteria run
at full scale, so this module carries most of the suite's wall time.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_training_set
from stability_lab import (
    ConstructionParams,
    certify_boundedness,
    certify_stability_exhaustive,
    certify_stability_random,
    distinct_index_probability,
    estimate_probabilities,
    population_risk_bruteforce,
    population_risk_closed,
    rademacher_moment_check,
    rademacher_tail_exact,
    random_distribution,
    run_trial,
    trial_rng,
    verify_paley_zygmund,
)
from stability_lab.cli import main
from stability_lab.risk import gap_threshold

SEED = 20250809
THEOREM_NS = (16, 64, 256)
THEOREM_TRIALS = 100_000


def _criterion(number: int, ok: bool, detail: str) -> None:
    print(f"CRITERION {number:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {number}: {detail}"


@pytest.fixture(scope="module")
def theorem_reports():
    reports = {}
    start = time.perf_counter()
    for n in THEOREM_NS:
        params = ConstructionParams.from_targets(n, 1.0 / math.sqrt(n), 1.0)
        reports[n] = estimate_probabilities(params, THEOREM_TRIALS, master_seed=SEED)
    elapsed = time.perf_counter() - start
    return reports, elapsed


def test_criterion_01_exact_population_risk():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in (1, 2, 3):
        params = ConstructionParams.from_targets(n, 1.0, 4.0)
        closed = population_risk_closed(params)
        for _ in range(100):
            train = random_training_set(params, rng)
            brute = population_risk_bruteforce(train, params)
            worst = max(worst, abs(brute - closed) / closed)
    elapsed = time.perf_counter() - start
    _criterion(
        1,
        worst <= 1e-9 and elapsed < 1.0,
        f"brute-force population risk matches 3*lmax/2, max rel err {worst:.2e}, "
        f"{elapsed:.2f}s",
    )


def test_criterion_02_stability_certificates():
    start = time.perf_counter()
    details = []
    ok = True
    for n, gamma, l in [(1, 4.0, 16.0), (2, 2.0, 8.0)]:
        params = ConstructionParams.from_targets(n, gamma, l)
        certificate = certify_stability_exhaustive(params)
        attained = abs(certificate.supremum_found - gamma) <= 1e-12
        below = certificate.supremum_found <= gamma + 1e-12
        ok = ok and attained and below
        details.append(f"exhaustive n={n}: {certificate.supremum_found:g}")
    rng = np.random.default_rng(SEED)
    for n in (10, 100):
        params = ConstructionParams.from_targets(n, 4.0, 16.0)
        certificate = certify_stability_random(params, 100_000, rng)
        below = certificate.supremum_found <= 4.0 + 1e-12
        attained = abs(certificate.supremum_found - 4.0) <= 1e-12
        ok = ok and below and attained
        details.append(f"randomized n={n}: {certificate.supremum_found:g}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 30.0
    _criterion(2, ok, f"{'; '.join(details)}; {elapsed:.1f}s")


def test_criterion_03_boundedness():
    pairs = [(gamma, l) for gamma in (0.25, 0.5, 1.0, 2.0) for l in (2.0, 4.0, 6.0, 8.0)]
    pairs += [(l, l) for l in (1.0, 3.0, 5.0, 7.0)]
    assert len(pairs) == 20
    ok = True
    for gamma, l in pairs:
        params = ConstructionParams.from_targets(3, gamma, l)
        maximum = certify_boundedness(params)
        ok = ok and maximum == 2.0 * (params.lmax + params.g)
        ok = ok and maximum <= 4.0 * params.lmax
        if gamma == l:
            ok = ok and maximum == 4.0 * params.lmax
        else:
            ok = ok and maximum < 4.0 * params.lmax
    _criterion(3, ok, "loss maximum 2*(lmax+g) <= 4*lmax on 20 pairs, tight iff gamma = l")


def test_criterion_04_tail_floor_pointwise():
    start = time.perf_counter()
    min_tail, min_n = 1.0, None
    all_satisfied = True
    for n in range(1, 10_001):
        report = rademacher_tail_exact(n)
        all_satisfied = all_satisfied and report.satisfied
        if report.exact_tail < min_tail:
            min_tail, min_n = report.exact_tail, n
    enumeration_ok = True
    for n in range(1, 21):
        patterns = np.arange(2**n, dtype=np.uint32)
        bits = np.unpackbits(patterns.view(np.uint8).reshape(-1, 4), axis=1)
        sums = 2 * bits.sum(axis=1).astype(np.int64) - n
        enumerated = int((sums > math.sqrt(n) / 2.0).sum()) / 2**n
        enumeration_ok = enumeration_ok and rademacher_tail_exact(n).exact_tail == enumerated
    elapsed = time.perf_counter() - start
    ok = all_satisfied and min_tail >= float(Fraction(3, 32)) and enumeration_ok and elapsed < 60.0
    _criterion(
        4,
        ok,
        f"exact tail >= 3/32 for all n in [1, 10^4] (min {min_tail:.6f} at n={min_n}); "
        f"matches 2^n enumeration for n <= 20; {elapsed:.1f}s",
    )


def test_criterion_05_moment_identities():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_z = 0.0
    for n in (1, 10, 100):
        check = rademacher_moment_check(n, 10**6, rng)
        worst_z = max(worst_z, abs(check.z_square), abs(check.z_fourth))
    elapsed = time.perf_counter() - start
    ok = worst_z <= 5.0 and elapsed < 30.0
    _criterion(
        5,
        ok,
        f"E[S^2], E[S^4] within 5 standard errors of n and 3n^2-2n at "
        f"n in {{1,10,100}}, 10^6 trials (worst |z| {worst_z:.2f}); {elapsed:.1f}s",
    )


def test_criterion_06_second_moment_inequality_property():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    failures = 0
    for _ in range(1000):
        dist = random_distribution(rng)
        for theta in (0.0, 0.25, 0.5, 0.9, 1.0):
            if not verify_paley_zygmund(dist, theta).holds:
                failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 5.0
    _criterion(
        6,
        ok,
        f"tail >= (1-theta)^2 E[Z]^2/E[Z^2] on 1000 random distributions x 5 thetas "
        f"({failures} failures); {elapsed:.1f}s",
    )


def test_criterion_07_gap_probability_floors(theorem_reports):
    reports, elapsed = theorem_reports
    ok = elapsed < 120.0
    details = []
    for n, report in reports.items():
        gap = report.gap_event
        e2 = report.e2
        cond = report.e1_given_e2
        ok = ok and gap.freq >= 3.0 / 64.0 - 5.0 * gap.stderr
        ok = ok and e2.freq >= 3.0 / 32.0 - 5.0 * e2.stderr
        ok = ok and cond.freq >= 0.5 - 5.0 * cond.stderr
        details.append(f"n={n}: gap {gap.freq:.4f}, e2 {e2.freq:.4f}, e1|e2 {cond.freq:.4f}")
    _criterion(7, ok, f"floors 3/64, 3/32, 1/2 cleared ({'; '.join(details)}); {elapsed:.1f}s")


def test_criterion_08_deterministic_core(theorem_reports):
    # Completing the full estimates already proves the implication held on
    # every one of the 3x10^5 trials (a violation raises inside run_trial);
    # the counter inequality plus an explicit re-verification of a slice
    # make the assertion independent of that code path.
    reports, _ = theorem_reports
    ok = True
    rechecked = 0
    for n, report in reports.items():
        ok = ok and report.gap_event.count >= report.e1_and_e2.count
        params = report.params
        threshold = gap_threshold(params)
        for k in range(2000):
            result = run_trial(params, trial_rng(SEED, k), trial_seed=(SEED, k))
            if result.e1 and result.e2:
                rechecked += 1
                ok = ok and result.gap >= threshold - 1e-12
    _criterion(
        8,
        ok,
        f"zero violations of (E1 and E2) => gap >= gamma/4 + l/(32*sqrt(n)) across "
        f"{len(reports) * THEOREM_TRIALS} trials; {rechecked} cases re-verified explicitly",
    )


def test_criterion_09_e1_frequency_oracle(theorem_reports):
    reports, _ = theorem_reports
    ok = True
    details = []
    for n in (16, 64):
        report = reports[n]
        expected = distinct_index_probability(report.params)
        deviation = abs(report.e1.freq - expected)
        ok = ok and deviation <= 5.0 * report.e1.stderr
        details.append(f"n={n}: freq {report.e1.freq:.4f} vs product {expected:.4f}")
    _criterion(9, ok, f"E1 frequency within 5 standard errors of the birthday product ({'; '.join(details)})")


def test_criterion_10_reproducibility(tmp_path):
    argv = [
        "sweep", "--n", "4,9,16", "--gamma-rule", "L/sqrt(n)", "--l", "1",
        "--trials", "2000", "--seed", "11",
    ]
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    code_a = main(argv + ["--output", str(out_a)])
    code_b = main(argv + ["--output", str(out_b)])
    bytes_equal = out_a.read_bytes() == out_b.read_bytes()
    params = ConstructionParams.from_targets(16, 0.25, 1.0)
    serial = estimate_probabilities(params, 5000, master_seed=SEED, workers=1)
    threaded = estimate_probabilities(params, 5000, master_seed=SEED, workers=8)
    counters_equal = (
        serial.gap_event.count == threaded.gap_event.count
        and serial.e1.count == threaded.e1.count
        and serial.e2.count == threaded.e2.count
        and serial.e1_and_e2.count == threaded.e1_and_e2.count
        and serial.mean_gap == threaded.mean_gap
    )
    ok = code_a == 0 and code_b == 0 and bytes_equal and counters_equal
    _criterion(
        10,
        ok,
        "sweep CSV byte-identical across runs; counters and mean gap identical "
        "for 1 vs 8 workers",
    )
