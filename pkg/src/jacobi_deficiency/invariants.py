"""Randomised property suites: identities that must hold for every sequence.

Each suite returns a :class:`SuiteResult` with the worst residual seen, so
the same code backs ``check-invariants`` and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import CoefficientError, CoefficientSequence, random_blocks
from .criteria import verify_qq_inequality
from .kernel import christoffel_darboux_residual, k_closed_form, k_direct, k_recursive
from .polys import first_kind, recurrence_residuals
from .powers import brute_force_power, power_coeffs


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    n_checks: int
    failures: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{self.name}: {status} worst={self.worst:.3e} tol={self.tolerance:.0e} checks={self.n_checks}"
        if self.failures:
            out += f" first_failure={self.failures[0]}"
        return out


def coefficient_suite(seq: CoefficientSequence, depth: int) -> SuiteResult:
    """Evaluate blocks 0..depth and report the first invariant violation."""
    if seq.length is not None:
        depth = min(depth, seq.length - 1)
    try:
        seq.check(depth)
    except CoefficientError as exc:
        return SuiteResult("coefficients", False, float("nan"), 0.0, depth + 1, [str(exc)])
    return SuiteResult("coefficients", True, 0.0, 0.0, depth + 1)


def recurrence_suite(seq: CoefficientSequence, depth: int, z=1j, tol: float = 1e-10) -> SuiteResult:
    """Scaled recurrence residuals of P(z) on the configured sequence."""
    P = first_kind(seq, z, depth)
    res = recurrence_residuals(seq, P)
    worst = float(res.max()) if len(res) else 0.0
    return SuiteResult("recurrence", worst <= tol, worst, tol, len(res))


def christoffel_darboux_suite(rng: np.random.Generator, n_instances: int = 20, n_max: int = 50,
                              tol: float = 1e-9, real_tol: float = 1e-10,
                              points=(1j, 2 + 3j), real_points=(0.0, 0.7)) -> SuiteResult:
    """CD residual at complex points and the Wronskian form at real points."""
    worst, checks, failures = 0.0, 0, []
    for inst in range(n_instances):
        m = 1 + inst % 4
        seq = random_blocks(m, n_max + 2, rng)
        for z, limit in [(p, tol) for p in points] + [(p, real_tol) for p in real_points]:
            P = first_kind(seq, z, n_max + 1)
            for n in range(n_max + 1):
                r = christoffel_darboux_residual(seq, z, n, P)
                checks += 1
                worst = max(worst, r)
                if r > limit:
                    failures.append(f"instance {inst} m={m} z={z} n={n} residual={r:.2e}")
    return SuiteResult("christoffel_darboux", not failures, worst, tol, checks, failures)


def kernel_route_suite(rng: np.random.Generator, n_instances: int = 20, depth: int = 30,
                       tol: float = 1e-8) -> SuiteResult:
    """Direct vs recursive kernel table, relative to the largest entry."""
    worst, failures = 0.0, []
    for inst in range(n_instances):
        m = 1 + inst % 4
        seq = random_blocks(m, depth + 6, rng)
        d, r = k_direct(seq, depth), k_recursive(seq, depth)
        diff = float(np.abs(d.entries - r.entries).max() / max(np.abs(d.entries).max(), 1e-300))
        worst = max(worst, diff)
        if diff > tol:
            failures.append(f"instance {inst} m={m} route difference {diff:.2e}")
    return SuiteResult("kernel_routes", not failures, worst, tol, n_instances, failures)


def closed_form_suite(rng: np.random.Generator, n_instances: int = 20, depth: int = 30,
                      tol: float = 1e-9, routes=("direct", "recursive")) -> SuiteResult:
    """Closed forms K_{n+j,n}, j = 1..4, against the kernel tables, entrywise relative.

    The direct table carries the cancellation error of Q P* - P Q* (1e-10 to
    a few 1e-9 here, the same order as the route tolerance), the recursive
    one agrees to rounding.  ``routes`` picks the tables checked.
    """
    build = {"direct": k_direct, "recursive": k_recursive}
    worst, checks, failures = 0.0, 0, []
    for inst in range(n_instances):
        m = 1 + inst % 4
        seq = random_blocks(m, depth + 6, rng)
        for table in (build[r](seq, depth) for r in routes):
            for j in range(1, 5):
                for n in range(depth - j + 1):
                    ref = table[n + j, n]
                    err = float(np.abs(k_closed_form(seq, n, j) - ref).max() / max(np.abs(ref).max(), 1e-300))
                    checks += 1
                    worst = max(worst, err)
                    if err > tol:
                        failures.append(f"instance {inst} m={m} {table.route} j={j} n={n} error {err:.2e}")
    name = "closed_forms" if len(routes) > 1 else f"closed_forms_{routes[0]}"
    return SuiteResult(name, not failures, worst, tol, checks, failures)


def inequality_suite(rng: np.random.Generator, n_samples: int = 200, rtol: float = 1e-9) -> SuiteResult:
    """Lower bounds at z = i: the Christoffel-Darboux bound and the q = 0, 1, 2 bounds."""
    checks, failures, worst = 0, [], 0.0
    for s in range(n_samples):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(2, 40))
        seq = random_blocks(m, n + 4, rng)
        x = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        P = first_kind(seq, 1j, n + 3)
        for q in (0, 1, 2):
            rep = verify_qq_inequality(seq, q, n, x, rtol=rtol, P=P)
            entries = [("main", rep.left, rep.right, rep.holds)] + [(k, *v) for k, v in rep.chain.items()]
            for name, left, right, holds in entries:
                checks += 1
                worst = max(worst, left / right if right > 0 else np.inf)
                if not holds:
                    failures.append(f"sample {s} q={q} n={n} {name}: {left:.6e} > {right:.6e}")
    return SuiteResult("inequalities", not failures, worst, 1.0 + rtol, checks, failures)


def power_truncation_suite(rng: np.random.Generator, ks=(2, 3, 4), depth: int = 60,
                           float_tol: float = 1e-12) -> SuiteResult:
    """PowerBand corner against the brute-force truncated product."""
    checks, failures, worst = 0, [], 0.0
    for k in ks:
        a = rng.integers(-5, 6, depth + k)
        b = rng.integers(1, 6, depth + k)
        band = power_coeffs(a, b, k, depth)
        exact = bool(np.array_equal(band.corner(depth), brute_force_power(a, b, k, depth)))
        checks += 1
        if not exact:
            failures.append(f"k={k} integer corner differs")
        a = rng.normal(size=depth + k)
        b = rng.uniform(0.5, 2.0, depth + k)
        ref = brute_force_power(a, b, k, depth)
        err = float(np.abs(power_coeffs(a, b, k, depth).corner(depth) - ref).max() / np.abs(ref).max())
        checks += 1
        worst = max(worst, err)
        if err > float_tol:
            failures.append(f"k={k} float corner error {err:.2e}")
    return SuiteResult("power_truncation", not failures, worst, float_tol, checks, failures)
