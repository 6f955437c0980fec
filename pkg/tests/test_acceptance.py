"""Acceptance checks at contract scale, one test (and one PASS/FAIL line) each.

These run the full budgets: ~3 minutes total, dominated by the two
thousand-bundle certificate suites.  Every tolerance here is a hard
contract; do not loosen without changing the package's stated guarantees.
"""

import math
import time

import numpy as np
import pytest

from ellgreen.core import Ellipsoid, ball_value_batch, evaluate, evaluate_batch
from ellgreen.gap import (
    ObstructionWindow,
    candidate_family_search,
    exclusion_demo,
    pole_slope_diagnostics,
    pole_slope_quadratic,
    shifted_pole_certificate,
    stationary_pole,
)
from ellgreen.oracle import sample_cube_rejection_moduli, transition_segments
from ellgreen.verify import (
    suite_green,
    suite_mobius,
    suite_polydisc,
    suite_shifted_pole,
)

_BALL_CACHE: dict = {}


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")


def _ball_data():
    """One shared sample per (n, k): moduli rows, batch result, ball values."""
    if _BALL_CACHE:
        return _BALL_CACHE
    points = 100_000
    for n in (2, 3, 4, 5):
        for k in range(1, n + 1):
            rng = np.random.default_rng(1000 * n + k)
            ell = Ellipsoid(p=(1.0,) * n, k=k)
            rows = sample_cube_rejection_moduli(ell, points, rng)
            batch = evaluate_batch(ell, rows)
            want = ball_value_batch(rows, k)
            _BALL_CACHE[(n, k)] = (rows, batch, want)
    return _BALL_CACHE


def test_criterion_01_ball_consistency():
    t0 = time.monotonic()
    data = _ball_data()
    worst = 0.0
    for (n, k), (rows, batch, want) in data.items():
        assert batch.inside.all()
        worst = max(worst, float(np.abs(batch.value - want).max()))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-12 and elapsed <= 10.0
    _report(
        "criterion-01-ball-consistency", ok,
        f"max |general - ball| = {worst:.3e} over 14x1e5 points, {elapsed:.1f}s"
    )
    assert worst <= 1e-12
    assert elapsed <= 10.0


def test_criterion_02_branch_selection_soundness():
    # same sample as criterion 1; the selection inequality is recomputed
    # from scratch: in the ball frame, s is admissible iff
    # s*m_(s)^2 + sum_{j>s} m_j^2 <= 1 with the first k moduli sorted
    failures = 0
    total = 0
    for (n, k), (rows, batch, _) in _ball_data().items():
        xs = np.sort(rows[:, :k], axis=1)
        sq = xs * xs
        total_mass = (rows * rows).sum(axis=1)
        prefix = np.cumsum(sq, axis=1)
        d = batch.d
        total += rows.shape[0]
        assert (d >= 1).all()
        gather = (d - 1)[:, None]
        m_d = np.take_along_axis(sq, gather, axis=1)[:, 0]
        pre_d = np.take_along_axis(prefix, gather, axis=1)[:, 0]
        holds_at_d = d * m_d + (total_mass - pre_d) <= 1.0
        failures += int((~holds_at_d).sum())
        room = d < k
        if room.any():
            d1 = d[room]
            sq_r = sq[room]
            pre_r = prefix[room]
            m_next = np.take_along_axis(sq_r, d1[:, None], axis=1)[:, 0]
            pre_next = np.take_along_axis(pre_r, d1[:, None], axis=1)[:, 0]
            fails_past = (d1 + 1) * m_next + (total_mass[room] - pre_next) > 1.0
            failures += int((~fails_past).sum())
    ok = failures == 0
    _report(
        "criterion-02-branch-soundness", ok,
        f"{failures} violations over {total} shared sample points"
    )
    assert failures == 0


def test_criterion_03_piecewise_continuity():
    rng = np.random.default_rng(300)
    ell = Ellipsoid(p=(1.0, 1.7, 0.8), k=3)
    worst_jump = 0.0
    mismatched = 0
    made = 0
    for a, b, _, _ in transition_segments(ell, 100, rng):
        ts = np.linspace(0.0, 1.0, 10_000)
        rows = a[None, :] + ts[:, None] * (b - a)[None, :]
        batch = evaluate_batch(ell, rows)
        worst_jump = max(worst_jump, float(np.abs(np.diff(batch.value)).max()))
        d_change = np.diff(batch.d) != 0
        r_change = (np.diff(batch.region.astype(int), axis=0) != 0).any(axis=1)
        assert d_change.any()
        if not np.array_equal(d_change, r_change):
            mismatched += 1
        made += 1
    ok = worst_jump <= 1e-6 and mismatched == 0 and made == 100
    _report(
        "criterion-03-piecewise-continuity", ok,
        f"worst jump {worst_jump:.3e} over {made} crossing segments, "
        f"{mismatched} region/branch mismatches"
    )
    assert made == 100
    assert worst_jump <= 1e-6
    assert mismatched == 0


def test_criterion_04_green_certificates():
    t0 = time.monotonic()
    reports = suite_green(bundles=1000, seed=20260823)
    elapsed = time.monotonic() - t0
    bad = [r for r in reports if not r.passed]
    ok = not bad and elapsed <= 120.0
    _report(
        "criterion-04-green-certificates", ok,
        f"1000 bundles, {elapsed:.0f}s; "
        + "; ".join(f"{r.check}={r.measured:.3g}" for r in reports)
    )
    assert not bad, [(r.check, r.measured, r.details.get("failures")) for r in bad]
    assert elapsed <= 120.0


def test_criterion_05_mobius_certificates():
    reports = suite_mobius(bundles=1000, seed=20260824)
    bad = [r for r in reports if not r.passed]
    _report(
        "criterion-05-mobius-certificates", not bad,
        "1000 bundles; "
        + "; ".join(f"{r.check}={r.measured:.3g}" for r in reports)
    )
    assert not bad, [(r.check, r.measured, r.details.get("failures")) for r in bad]


def test_criterion_06_polydisc_limit():
    reports = suite_polydisc(points=100, seed=0)
    bad = [r for r in reports if not r.passed]
    _report(
        "criterion-06-polydisc-limit", not bad,
        "; ".join(f"{r.check}={r.measured:.3g}" for r in reports)
    )
    assert not bad, [(r.check, r.measured) for r in bad]


def test_criterion_07_obstruction_windows():
    t0 = time.monotonic()
    violations = 0
    pairs = 0
    for i, p in enumerate([round(0.1 * v, 1) for v in range(1, 10)]):
        for j, q in enumerate((0.25, 0.5, 1.0, 2.0, 5.0)):
            window = ObstructionWindow.find(p, q)
            assert window.margin > 0.0
            rep = exclusion_demo(
                p, q, window, trials=200, samples=10_000, seed=1000 + 10 * i + j
            )
            violations += int(rep.measured)
            pairs += 1
    elapsed = time.monotonic() - t0
    ok = violations == 0 and pairs == 45 and elapsed <= 60.0
    _report(
        "criterion-07-obstruction-windows", ok,
        f"{pairs} (p, q) pairs, {violations} argmax violations, {elapsed:.1f}s"
    )
    assert pairs == 45
    assert violations == 0
    assert elapsed <= 60.0


def test_criterion_08_shifted_pole_certificates():
    reports = suite_shifted_pole(count=100, seed=61)
    bad = [r for r in reports if not r.passed]
    frozen = shifted_pole_certificate(1.0, 0.5, 0.8)
    assert frozen.pole is not None
    r_err = abs(frozen.pole.r - 1.2)
    ok = not bad and r_err <= 1e-12
    _report(
        "criterion-08-shifted-pole", ok,
        f"100 certificates pass all bundle checks; |r - 1.2| = {r_err:.2e} "
        "at a=2, c=1, b=1, t0=0.8"
    )
    assert not bad, [(r.check, r.measured) for r in bad]
    assert r_err <= 1e-12


def test_criterion_09_slope_quadratic_identities():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        a = float(rng.uniform(0.05, 5.0))
        c = float(rng.uniform(0.05, 5.0))
        tau = a / (a + c)
        scale = max(1.0, a + c) * max(1.0, c * c)
        worst = max(
            worst,
            abs(pole_slope_quadratic(a, c, tau) + a * c * c / (a + c)) / scale,
            abs(pole_slope_quadratic(a, c, 1.0) + c * c) / scale,
            abs(pole_slope_diagnostics(a, c).identity_residual) / scale,
        )
        r_near_one = stationary_pole(a, c, 1.0, 1.0 - 1e-6)
        assert r_near_one - 1.0 <= 1e-4
    ok = worst <= 1e-12
    _report(
        "criterion-09-slope-identities", ok,
        f"worst scaled residual {worst:.3e} over 1000 (a, c) draws; "
        "r(1 - 1e-6) stays within 1e-4 of 1"
    )
    assert worst <= 1e-12


_CONVEX_SUITE = (
    ((1.0, 1.0), 1, (0.3, 0.5)),
    ((0.5, 2.0), 1, (0.4, 0.6)),
    ((2.0, 0.8), 1, (0.2, 0.5)),
    ((1.0, 1.5, 0.9), 2, (0.2, 0.3, 0.4)),
    ((0.6, 0.6), 2, (0.5, 0.1)),
)


def test_criterion_10_family_lower_bounds():
    worst_excess = -math.inf
    worst_convex_gap = 0.0
    for p, k, moduli in _CONVEX_SUITE:
        ell = Ellipsoid(p=p, k=k)
        z = tuple(complex(m) for m in moduli)
        res = candidate_family_search(ell, z)
        assert res.complete
        worst_excess = max(worst_excess, res.lower_bound - res.reference)
        worst_convex_gap = max(worst_convex_gap, res.gap)
    # the nonconvex demonstration point also must never exceed the value
    ell = Ellipsoid(p=(1.0, 0.3), k=1)
    res = candidate_family_search(ell, (0.05 + 0j, 0.1 + 0j))
    worst_excess = max(worst_excess, res.lower_bound - res.reference)
    ok = worst_excess <= 1e-9 and worst_convex_gap <= 1e-6
    _report(
        "criterion-10-family-lower-bounds", ok,
        f"worst excess {worst_excess:.3e}, worst convex gap {worst_convex_gap:.3e}; "
        f"nonconvex demo gap {res.gap:.3e}"
    )
    assert worst_excess <= 1e-9
    assert worst_convex_gap <= 1e-6
