"""Acceptance checks, one test per numbered criterion (5 is split by family).

Each test prints a single ``ACCEPTANCE <id> PASS|FAIL`` line to the terminal
so the outcome is visible even without ``-s``.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from jacobi_deficiency import invariants as inv
from jacobi_deficiency.cli import RunConfig, classify, load_config, main
from jacobi_deficiency.coeffs import make_family
from jacobi_deficiency.criteria import MAXIMAL, NOT_MAXIMAL, SELF_ADJOINT
from jacobi_deficiency.powers import k2_limsup, power_consistency_probe

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SCALAR_DEPTH = 10_000
BLOCK_DEPTH = 1_000


@pytest.fixture
def announce(capsys):
    def _announce(cid: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nACCEPTANCE {cid} {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _announce


def test_1_alternating_limit(announce):
    seq = make_family("alternating_power", {"a": 1, "b": 1, "alpha": 2})
    t0 = time.perf_counter()
    v = k2_limsup(seq, None, SCALAR_DEPTH)
    elapsed = time.perf_counter() - t0
    ok = abs(v.partial_value - 2 / 3) <= 1e-3 and v.verdict == SELF_ADJOINT and elapsed < 5
    announce("1", ok, f"estimate={v.partial_value:.6f} verdict={v.verdict} time={elapsed:.2f}s")
    assert ok


def test_2_christoffel_darboux(announce):
    t0 = time.perf_counter()
    res = inv.christoffel_darboux_suite(np.random.default_rng(2), n_instances=20, n_max=50,
                                        tol=1e-9, real_tol=1e-10)
    elapsed = time.perf_counter() - t0
    ok = res.passed and elapsed < 10
    announce("2", ok, f"worst={res.worst:.2e} checks={res.n_checks} time={elapsed:.2f}s")
    assert ok, res.failures[:3]


def test_3_kernel_routes(announce):
    routes = inv.kernel_route_suite(np.random.default_rng(3), n_instances=20, depth=30, tol=1e-8)
    # closed forms are compared with the recursive table; the direct table is
    # reported too, its cancellation error is bounded only by the route tolerance
    closed = inv.closed_form_suite(np.random.default_rng(3), n_instances=20, depth=30, tol=1e-9,
                                   routes=("recursive",))
    direct = inv.closed_form_suite(np.random.default_rng(3), n_instances=20, depth=30, tol=1e-9,
                                   routes=("direct",))
    ok = routes.passed and closed.passed
    announce("3", ok, f"route_diff={routes.worst:.2e} closed_form_err={closed.worst:.2e} "
                      f"(vs direct table {direct.worst:.2e})")
    assert ok, (routes.failures + closed.failures)[:3]


def test_4_power_correctness(announce):
    res = inv.power_truncation_suite(np.random.default_rng(4), ks=(2, 3, 4), depth=60, float_tol=1e-12)
    announce("4", res.passed, f"integer exact, float worst={res.worst:.2e}")
    assert res.passed, res.failures


# --- 5: battery concordance --------------------------------------------------

BATTERY = {
    "a": RunConfig(family="power", params={"a": 0, "b": 1, "alpha": 1}),
    "b": RunConfig(family="power", params={"a": 0, "b": 1, "alpha": 2}),
    "c": RunConfig(family="constant", params={"a": 1, "b": 1}),
    "d": RunConfig(kind="band", family="example1", params={"p": 1, "m": 2}),
    "e": RunConfig(family="alternating_power", params={"a": 1, "b": 1, "alpha": 2}),
    "f": RunConfig(family="power", params={"a": 0, "b": 1, "alpha": 1.05}),
}


@pytest.fixture(scope="module")
def battery_reports():
    """Full criteria battery plus oracle on every family, timed as one run."""
    t0 = time.perf_counter()
    reports = {}
    for key, cfg in BATTERY.items():
        depth = BLOCK_DEPTH if cfg.family == "example1" else SCALAR_DEPTH
        reports[key] = classify(RunConfig(**{**cfg.__dict__, "depth": depth}))
    return reports, time.perf_counter() - t0


def _verdict(report, cid):
    return next(v for v in report.verdicts if v.criterion_id == cid)


def _check_family(announce, battery_reports, key, cid=None, expected=None, n_plus=None, complete=None):
    reports, _ = battery_reports
    rep = reports[key]
    parts, ok = [], not rep.contradictions
    parts.append(f"contradictions={len(rep.contradictions)}")
    if cid is not None:
        v = _verdict(rep, cid)
        ok &= v.verdict == expected
        parts.append(f"{cid}={v.verdict} (value {v.partial_value:.6g}, trend {v.trend})")
    if n_plus is not None:
        ok &= rep.oracle["n_plus_estimate"] == n_plus and not rep.oracle["inconclusive"]
        parts.append(f"oracle={rep.oracle['n_plus_estimate']}")
    if complete is not None:
        ok &= rep.oracle["complete_indeterminacy"] == complete
        parts.append(f"complete={rep.oracle['complete_indeterminacy']}")
    parts.append(f"final={rep.final}")
    announce(f"5({key})", ok, " ".join(parts))
    return ok, rep


def test_5a_linear(announce, battery_reports):
    ok, _ = _check_family(announce, battery_reports, "a", "velazquez_q0", SELF_ADJOINT, n_plus=0)
    assert ok


def test_5b_quadratic(announce, battery_reports):
    # sum ||K_ji|| grows like (ln N)^2 for this family; see the decisions log
    ok, _ = _check_family(announce, battery_reports, "b", "kernel_total", MAXIMAL, n_plus=1,
                          complete="completely_indeterminate")
    assert ok


def test_5c_constant(announce, battery_reports):
    ok, _ = _check_family(announce, battery_reports, "c", "dennis_wall_b", NOT_MAXIMAL, n_plus=0)
    assert ok


def test_5d_band_example(announce, battery_reports):
    ok, _ = _check_family(announce, battery_reports, "d", n_plus=1, complete="not_completely")
    assert ok


def test_5e_alternating(announce, battery_reports):
    ok, _ = _check_family(announce, battery_reports, "e", "k2_limsup", SELF_ADJOINT, n_plus=0)
    assert ok


def test_5f_slow_growth(announce, battery_reports):
    ok, _ = _check_family(announce, battery_reports, "f")
    assert ok


def test_5_runtime(announce, battery_reports):
    _, elapsed = battery_reports
    ok = elapsed < 60
    announce("5(runtime)", ok, f"battery={elapsed:.1f}s")
    assert ok


def test_5_supplement_cubic(announce):
    """Not a numbered criterion: the kernel route does reach maximal deficiency at b_n = (n+1)^3."""
    rep = classify(load_config(CONFIGS / "b3_cubic.ini"))
    v = _verdict(rep, "kernel_total")
    ok = v.verdict == MAXIMAL and rep.oracle["n_plus_estimate"] == 1 and not rep.contradictions
    announce("5(b3, supplementary)", ok, f"kernel_total={v.verdict} value={v.partial_value:.6g} "
                                         f"oracle={rep.oracle['n_plus_estimate']}")
    assert ok


# --- 6..8 ----------------------------------------------------------------------

def test_6_inequalities(announce):
    res = inv.inequality_suite(np.random.default_rng(6), n_samples=200, rtol=1e-9)
    violations = len(res.failures)
    announce("6", res.passed, f"violations={violations} checks={res.n_checks} max_left/right={res.worst:.3f}")
    assert violations == 0, res.failures[:3]


def test_7_power_consistency(announce):
    n = np.arange(SCALAR_DEPTH + 10)
    t0 = time.perf_counter()
    reports = {
        "a": power_consistency_probe(np.zeros(len(n)), n + 1.0, 2, SCALAR_DEPTH),
        "b": power_consistency_probe(np.zeros(len(n)), (n + 1.0) ** 2, 2, SCALAR_DEPTH),
    }
    elapsed = time.perf_counter() - t0
    ok = all(r.status == "consistent" for r in reports.values()) and elapsed < 30
    detail = " ".join(f"{k}:{r.scalar}/{r.power_block}={r.status}" for k, r in reports.items())
    announce("7", ok, f"{detail} time={elapsed:.1f}s")
    assert ok


def test_8_determinism(announce, tmp_path):
    out = tmp_path / "report.json"
    docs = []
    for _ in range(2):
        assert main(["classify", "--config", str(CONFIGS / "e_alternating.ini"), "--report", str(out)]) == 0
        docs.append(json.loads(out.read_text()))
    for d in docs:
        d.pop("timing")
    stripped = [json.dumps(d, indent=2, sort_keys=True).encode() for d in docs]
    cfg = load_config(CONFIGS / "e_alternating.ini")
    direct = [classify(cfg).to_json(timing=False).encode() for _ in range(2)]
    ok = stripped[0] == stripped[1] and direct[0] == direct[1]
    announce("8", ok, f"report bytes={len(stripped[0])}")
    assert ok
