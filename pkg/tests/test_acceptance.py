"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
report.  Every tolerance is pinned here; the timing budgets are asserted
against wall-clock measurements of the computational core of each criterion.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.integrate import solve_ivp

from conftest import random_lattice_grid, random_log_concave_bound
from sgbounds import (
    MuSegment,
    OmegaRPair,
    OmegaSet,
    PiecewiseLogAffineBound,
    ResolventProfile,
    crossing_candidate,
    first_crossing_time,
    iterate,
    log_concavity,
    normalized_crossing_time,
    propagate,
    state_at,
    subadditive_envelope,
    update_bound,
)
from sgbounds.cli import jordan_figure_bounds
from sgbounds.models import (
    JordanBlockModel,
    diffop_rate,
    diffop_semigroup_norm,
    jordan_semigroup_norm,
    rate_for_crossing_time,
)

ONE = PiecewiseLogAffineBound.constant()


def report(num: int, desc: str, ok: bool, detail: str = "") -> None:
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {desc}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_wei_reference_case():
    first_crossing_time(ONE, OmegaRPair(0.0, 1.0))  # warm up
    t0 = time.perf_counter()
    crossing = first_crossing_time(ONE, OmegaRPair(0.0, 1.0))
    updated = update_bound(ONE, OmegaRPair(0.0, 1.0))
    elapsed = time.perf_counter() - t0
    ok = (
        abs(crossing - math.pi / 4) <= 1e-12
        and abs(updated.breakpoints[-1] - math.pi / 2) <= 1e-12
        and updated.slopes[-1] == -1.0
        and elapsed < 1e-3
    )
    report(1, "reference sharpening of the trivial bound at (0, 1)", ok,
           f"crossing={crossing!r}, runtime={elapsed * 1e3:.3f} ms")


def test_criterion_02_worked_example_two_pairs():
    pair = OmegaRPair(-1.0, 0.05)
    wei = update_bound(ONE, OmegaRPair(0.0, 1.0))
    t0 = time.perf_counter()
    a_slow = first_crossing_time(ONE, pair)
    phi_half_pi = state_at(wei, pair, math.pi / 2)
    a_chain = first_crossing_time(wei, pair)
    chained = update_bound(wei, pair)
    slow = update_bound(ONE, pair)
    elapsed = time.perf_counter() - t0
    tail_start = next(t for t, a in zip(slow.breakpoints, slow.slopes) if a == -1.05)
    crossing_min = (1.05 * tail_start - math.pi / 2) / 0.05  # where the two tails meet
    checks = {
        "a_slow": abs(a_slow - 1.8464) <= 5e-4,
        "phi": abs(phi_half_pi - 0.5597) <= 5e-4,
        "a_chain": abs(a_chain - 7.0741) <= 5e-4,
        "tail_intercept": chained.slopes[-1] == -1.05
        and abs(chained.intercepts[-1] - 3.8490) <= 5e-4,
        "crossings": abs(crossing_min - 46.1344) <= 5e-3
        and abs(chained.breakpoints[-1] - 45.5641) <= 5e-3,
        "runtime": elapsed < 1e-2,
    }
    report(2, "two-pair worked example, all five reported numbers", all(checks.values()),
           ", ".join(f"{k}={'ok' if v else 'BAD'}" for k, v in checks.items()))


def test_criterion_03_diffop_rate_profile():
    diffop_rate(0.0)  # warm up
    t0 = time.perf_counter()
    r0 = diffop_rate(0.0)
    r_minus1 = diffop_rate(-1.0)
    r_minus20 = diffop_rate(-20.0)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(r0 - math.pi / 2) <= 1e-10
        and abs(r_minus1 - 1.0) <= 1e-10
        and abs(r_minus20 / (2.0 * 20.0 * math.exp(-20.0)) - 1.0) <= 1e-6
        and elapsed < 1e-2
    )
    report(3, "shift-model resolvent rate at 0, -1, -20", ok,
           f"r(0)={r0!r}, r(-20)={r_minus20:.6e}, runtime={elapsed * 1e3:.3f} ms")


def test_criterion_04_constant_crossing_time():
    t0 = time.perf_counter()
    worst = 0.0
    for w in range(-20, 21):
        crossing = first_crossing_time(ONE, OmegaRPair(float(w), diffop_rate(float(w))))
        worst = max(worst, abs(crossing - 0.5))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 0.1
    report(4, "crossing time 1/2 across all three branch formulas", ok,
           f"worst |a*-1/2|={worst:.2e}, runtime={elapsed * 1e3:.1f} ms")


def test_criterion_05_matched_rates():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (math.pi / 8, math.pi / 4, math.pi / 2):
        for w in rng.uniform(-5.0, 5.0, size=20):
            rate = rate_for_crossing_time(alpha, float(w))
            crossing = first_crossing_time(ONE, OmegaRPair(float(w), rate))
            worst = max(worst, abs(crossing - alpha))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 0.1
    report(5, "matched rates reproduce their crossing times", ok,
           f"worst |a*-alpha|={worst:.2e}, runtime={elapsed * 1e3:.1f} ms")


def _brute_force_envelope(values):
    def compositions(k):
        if k == 0:
            yield ()
            return
        for first in range(1, k + 1):
            for rest in compositions(k - first):
                yield (first, *rest)

    out = [values[0]]
    for k in range(1, len(values)):
        out.append(min(sum(values[p] for p in parts) for parts in compositions(k)))
    return out


def test_criterion_06_envelope_oracle_equivalence():
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    ok = True
    for _ in range(100):
        g = random_lattice_grid(rng, max_len=12)
        enveloped = subadditive_envelope(g)
        if list(enveloped.values) != _brute_force_envelope(g.values):
            ok = False
            break
        if subadditive_envelope(enveloped).values != enveloped.values:
            ok = False
            break
    elapsed = time.perf_counter() - t0
    report(6, "envelope equals brute-force composition minimum, idempotently", ok and elapsed < 1.0,
           f"runtime={elapsed * 1e3:.0f} ms")


def _random_profile(rng, count):
    omegas = np.sort(rng.uniform(-2.0, 2.0, size=count))
    while np.min(np.diff(omegas), initial=1.0) < 1e-3:
        omegas = np.sort(rng.uniform(-2.0, 2.0, size=count))
    rates = [float(rng.uniform(0.1, 1.0))]
    for gap in np.diff(omegas):
        rates.append(rates[-1] + float(rng.uniform(0.0, 0.9)) * float(gap))
    return ResolventProfile.tabulated(list(zip(map(float, omegas), rates)))


def test_criterion_07_stationarity():
    rng = np.random.default_rng(107)
    t0 = time.perf_counter()
    ok = True
    detail = ""
    for trial in range(20):
        m = random_log_concave_bound(rng)
        profile = _random_profile(rng, 1)
        omegas = OmegaSet.of([profile.table[0][0]])
        trace = iterate(m, omegas, profile, 2, (0.5, 40))
        if trace.stationary_at is None or trace.stationary_at > 1:
            ok, detail = False, f"single-abscissa trial {trial} not stationary after step 1"
            break
        if trace.stationary_at == 1 and trace.steps[2].grid.values != trace.steps[1].grid.values:
            ok, detail = False, f"single-abscissa trial {trial} steps 1, 2 differ exactly"
            break
        count = int(rng.integers(2, 4))
        profile = _random_profile(rng, count)
        omegas = OmegaSet.of([w for w, _ in profile.table])
        trace = iterate(m, omegas, profile, count + 1, (0.5, 40))
        if trace.stationary_at is None or trace.stationary_at > count:
            ok, detail = False, f"{count}-abscissa trial {trial} not stationary by step {count}"
            break
    elapsed = time.perf_counter() - t0
    report(7, "iteration stationarity after one step / set-size steps", ok and elapsed < 1.0,
           detail or f"runtime={elapsed * 1e3:.0f} ms")


def test_criterion_08_closed_form_vs_integrator():
    rng = np.random.default_rng(109)
    cases = []
    for _ in range(200):
        if rng.random() < 0.7:
            mu = float(rng.uniform(-3.0, 3.0))
        else:  # exercise the far hyperbolic branches as well
            mu = float(rng.uniform(3.0, 25.0)) * (1 if rng.random() < 0.5 else -1)
        cases.append((mu, float(rng.uniform(0.0, 0.999))))
    t0 = time.perf_counter()
    worst = 0.0
    for mu, start in cases:
        horizon = min(crossing_candidate(MuSegment(0.0, math.inf, mu), start, 1.0), 5.0)
        ts = np.linspace(0.0, horizon, 8)[1:]
        sol = solve_ivp(
            lambda _, y: y * y + 2.0 * mu * y + 1.0,
            (0.0, horizon),
            [start],
            method="DOP853",
            rtol=1e-12,
            atol=1e-12,
            t_eval=ts,
        )
        assert sol.success
        for b, reference in zip(ts, sol.y[0]):
            worst = max(worst, abs(propagate(float(b), mu, start) - float(reference)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 1.0
    report(8, "closed forms track the adaptive integrator", ok,
           f"worst deviation={worst:.2e}, runtime={elapsed * 1e3:.0f} ms")


def test_criterion_09_monotonicity_suites():
    rng = np.random.default_rng(113)
    t0 = time.perf_counter()
    violations = []

    for _ in range(100):  # crossing decreasing in the rate
        m = random_log_concave_bound(rng)
        omega = float(rng.uniform(-2.0, 1.0))
        r1, r2 = np.sort(rng.uniform(0.05, 3.0, size=2))
        a1 = first_crossing_time(m, OmegaRPair(omega, float(r1)))
        a2 = first_crossing_time(m, OmegaRPair(omega, float(r2)))
        if a1 < a2 - 1e-12 or (
            math.isfinite(a1) and math.isfinite(a2) and r2 - r1 > 1e-9 and not a1 > a2
        ):
            violations.append("rate")

    for _ in range(100):  # crossing increasing in the abscissa
        m = random_log_concave_bound(rng)
        rate = float(rng.uniform(0.1, 3.0))
        w1, w2 = np.sort(rng.uniform(-3.0, 2.0, size=2))
        if first_crossing_time(m, OmegaRPair(float(w1), rate)) > first_crossing_time(
            m, OmegaRPair(float(w2), rate)
        ) + 1e-12:
            violations.append("omega")

    for _ in range(100):  # normalized crossing non-increasing under upward shifts
        mu = float(rng.uniform(-0.99, 3.0))
        theta1, theta2 = np.sort(rng.uniform(0.0, 2.0, size=2))
        if normalized_crossing_time(mu + float(theta2)) > normalized_crossing_time(
            mu + float(theta1)
        ) + 1e-12:
            violations.append("shift")

    step = 1e-5
    for _ in range(100):  # state increasing in the rate, by central differences
        m = random_log_concave_bound(rng)
        omega = float(rng.uniform(-2.0, 0.5))
        rate = float(rng.uniform(0.2, 2.0))
        horizon = min(first_crossing_time(m, OmegaRPair(omega, rate)), 10.0)
        for frac in (0.3, 1.0):
            t = frac * horizon
            if t <= 0.0:
                continue
            hi = state_at(m, OmegaRPair(omega, rate + step), t)
            lo = state_at(m, OmegaRPair(omega, rate - step), t)
            if (hi - lo) / (2 * step) <= -1e-8:
                violations.append("derivative")

    elapsed = time.perf_counter() - t0
    ok = not violations and elapsed < 1.0
    report(9, "monotonicity in rate, abscissa, shift, and the rate derivative", ok,
           f"violations={violations or 'none'}, runtime={elapsed * 1e3:.0f} ms")


def test_criterion_10_jordan_figure_ordering():
    model = JordanBlockModel(3)
    t0 = time.perf_counter()
    numrange, bound_3, bound_101 = jordan_figure_bounds()
    ts = [0.1 * k for k in range(201)]
    slack = 1e-9
    ordered = True
    strict_gaps = [0.0, 0.0, 0.0]
    for t in ts:
        true_log = math.log(jordan_semigroup_norm(model, t))
        l101 = bound_101.log_at(t)
        l3 = bound_3.log_at(t)
        lnr = numrange.log_at(t)
        if true_log > l101 + slack or l101 > l3 + slack or l3 > lnr + slack:
            ordered = False
            break
        strict_gaps[0] = max(strict_gaps[0], l101 - true_log)
        strict_gaps[1] = max(strict_gaps[1], l3 - l101)
        strict_gaps[2] = max(strict_gaps[2], lnr - l3)
    elapsed = time.perf_counter() - t0
    ok = ordered and all(g > 0.0 for g in strict_gaps) and elapsed < 30.0
    report(10, "Jordan block: true norm <= 101-stage <= 3-stage <= numerical range", ok,
           f"strict gaps={[f'{g:.3f}' for g in strict_gaps]}, runtime={elapsed:.1f} s")


def test_criterion_11_wei_optimality_on_shift_model():
    r0 = math.pi / 2
    t0 = time.perf_counter()
    sup = max(
        math.exp(r0 * t) * diffop_semigroup_norm(t)
        for t in (0.5, 0.9, 0.999, 1.0 - 1e-9)
    )
    valid = all(
        diffop_semigroup_norm(float(t)) <= math.exp(r0 - r0 * float(t)) + 1e-12
        for t in np.linspace(0.0, 3.0, 601)
    )
    elapsed = time.perf_counter() - t0
    ok = sup >= math.exp(r0) - 1e-6 and valid and elapsed < 1e-2
    report(11, "the classical constant is optimal on the shift model", ok,
           f"sup={sup!r} vs e^(pi/2)={math.exp(r0)!r}, runtime={elapsed * 1e3:.2f} ms")


def test_criterion_12_log_concavity_preservation():
    rng = np.random.default_rng(127)
    t0 = time.perf_counter()
    ok = True
    for _ in range(200):
        m = random_log_concave_bound(rng)
        pair = OmegaRPair(float(rng.uniform(-3.0, 2.0)), float(rng.uniform(0.05, 3.0)))
        if not log_concavity(update_bound(m, pair)).is_concave:
            ok = False
            break
    elapsed = time.perf_counter() - t0
    report(12, "updates preserve log-concavity", ok and elapsed < 1.0,
           f"runtime={elapsed * 1e3:.0f} ms")
