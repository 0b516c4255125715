"""Command line front end: config parsing, criteria battery, oracle, reports.

Subcommands
-----------
classify          run the selected criteria (and the oracle) and aggregate
probe             oracle only
power             print the leading corner of J^k for a scalar operator
check-invariants  run the property suites

Exit status: 0 success, 1 invalid config, 2 contradiction between verdicts,
3 failed invariant suite.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import criteria as cr
from . import invariants as inv
from .coeffs import CoefficientError, CoefficientSequence, block_to_band, make_family, read_block_table
from .criteria import CRITERION_IDS, MAXIMAL, NO_CONCLUSION, NOT_MAXIMAL, SELF_ADJOINT, CriterionVerdict
from .kernel import NORMS, k_direct
from .oracle import (MAX_DPS, complete_indeterminacy_probe, deficiency_estimate, scalar_indeterminacy)
from .powers import k2_limsup, power_coeffs, power_limsup_criterion
from .trend import TrendClassifier

EXIT_OK, EXIT_CONFIG, EXIT_CONTRADICTION, EXIT_INVARIANT = 0, 1, 2, 3

KINDS = ("scalar", "block", "band")
CONFIG_FAMILIES = ("constant", "power", "alternating_power", "table", "example1")
FAMILY_KEYS = {
    "constant": {"a", "b"},
    "power": {"a", "b", "alpha", "beta"},
    "alternating_power": {"a", "b", "alpha"},
    "table": set(),
    "example1": {"p", "m"},
}
INT_KEYS = {"p", "m"}
CLASSIFIER_KEYS = {
    "window": int, "min_depth": int, "ratio_threshold_div": float, "ratio_threshold_conv": float,
    "tail_tol": float, "max_misfit": float, "limsup_margin": float,
}
SECTION_KEYS = {
    "operator": {"kind", "family", "path"},
    "coeffs": None,  # depends on the family
    "criteria": {"select", "depth", "kernel_depth", "norm", "power_k"} | set(CLASSIFIER_KEYS),
    "oracle": {"enabled", "depth", "max_dps"},
    "output": {"report"},
}
# the segment diagnostic holds the full O(N^2) kernel table
KERNEL_DEPTH_CAP = {1: 2000, 4: 300}


class ConfigError(ValueError):
    """Invalid run configuration (exit status 1)."""


@dataclass(frozen=True)
class RunConfig:
    kind: str = "scalar"
    family: str = "power"
    params: dict = field(default_factory=dict)
    path: str | None = None
    select: tuple = CRITERION_IDS
    depth: int | None = None
    kernel_depth: int | None = None
    norm: str = "spectral"
    power_k: int = 2
    classifier: TrendClassifier = TrendClassifier()
    oracle: bool = True
    oracle_depth: int | None = None
    max_dps: int = MAX_DPS
    report: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"operator kind must be one of {KINDS}, got {self.kind!r}")
        if self.family not in CONFIG_FAMILIES:
            raise ConfigError(f"family must be one of {CONFIG_FAMILIES}, got {self.family!r}")
        extra = set(self.params) - FAMILY_KEYS[self.family]
        if extra:
            raise ConfigError(f"unknown [coeffs] keys for {self.family}: {sorted(extra)}")
        if self.family == "table" and not self.path:
            raise ConfigError("table family needs [operator] path")
        unknown = [c for c in self.select if c not in CRITERION_IDS]
        if unknown:
            raise ConfigError(f"unknown criteria {unknown}; known: {list(CRITERION_IDS)}")
        for name in ("depth", "kernel_depth", "oracle_depth"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.norm not in NORMS:
            raise ConfigError(f"norm must be one of {NORMS}")
        if self.power_k < 1 or self.max_dps < 15:
            raise ConfigError("power_k must be >= 1 and max_dps >= 15")

    def build(self) -> CoefficientSequence:
        params = dict(self.params)
        if self.family == "table":
            params = {"blocks": read_block_table(self.path), "path": self.path}
        seq = make_family(self.family, params)
        if self.kind == "scalar" and seq.block_size != 1:
            raise ConfigError(f"kind 'scalar' needs 1x1 blocks, {self.family} gives {seq.block_size}")
        return seq

    def resolved_depth(self, m: int) -> int:
        return self.depth if self.depth is not None else (10000 if m == 1 else 1000)

    def resolved_kernel_depth(self, m: int) -> int:
        cap = KERNEL_DEPTH_CAP[1] if m == 1 else KERNEL_DEPTH_CAP[4] if m <= 4 else 100
        want = self.kernel_depth if self.kernel_depth is not None else cap
        return min(want, self.resolved_depth(m))

    def as_dict(self) -> dict:
        return {
            "operator": {"kind": self.kind, "family": self.family, "path": self.path},
            "coeffs": dict(sorted(self.params.items())),
            "criteria": {"select": list(self.select), "depth": self.depth, "kernel_depth": self.kernel_depth,
                         "norm": self.norm, "power_k": self.power_k, **self.classifier.as_dict()},
            "oracle": {"enabled": self.oracle, "depth": self.oracle_depth, "max_dps": self.max_dps},
            "output": {"report": self.report},
        }


def _number(key: str, raw: str):
    try:
        return int(raw) if key in INT_KEYS else float(raw)
    except ValueError:
        raise ConfigError(f"[coeffs] {key} = {raw!r} is not a number") from None


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {raw!r}")


def load_config(path=None, text: str | None = None) -> RunConfig:
    """Read an INI config with sections [operator] [coeffs] [criteria] [oracle] [output]."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        if text is not None:
            parser.read_string(text)
        elif path is not None:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
    except (configparser.Error, OSError) as exc:
        raise ConfigError(str(exc)) from None
    for section in parser.sections():
        if section not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        allowed = SECTION_KEYS[section]
        if allowed is not None:
            extra = set(parser[section]) - allowed
            if extra:
                raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")
    get = lambda s, k, d=None: parser.get(s, k, fallback=d)  # noqa: E731
    kw = {}
    try:
        if parser.has_section("operator"):
            kw["kind"] = get("operator", "kind", "scalar")
            kw["family"] = get("operator", "family", "power")
            kw["path"] = get("operator", "path")
        if parser.has_section("coeffs"):
            kw["params"] = {k: _number(k, v) for k, v in parser["coeffs"].items()}
        if parser.has_section("criteria"):
            c = parser["criteria"]
            if "select" in c:
                sel = [s.strip() for s in c["select"].split(",") if s.strip()]
                kw["select"] = CRITERION_IDS if sel == ["all"] else tuple(sel)
            for key in ("depth", "kernel_depth", "power_k"):
                if key in c:
                    kw[key] = int(c[key])
            if "norm" in c:
                kw["norm"] = c["norm"]
            thresholds = {k: CLASSIFIER_KEYS[k](c[k]) for k in CLASSIFIER_KEYS if k in c}
            if thresholds:
                kw["classifier"] = TrendClassifier(**thresholds)
        if parser.has_section("oracle"):
            o = parser["oracle"]
            if "enabled" in o:
                kw["oracle"] = _bool(o["enabled"])
            if "depth" in o:
                kw["oracle_depth"] = int(o["depth"])
            if "max_dps" in o:
                kw["max_dps"] = int(o["max_dps"])
        if parser.has_section("output"):
            kw["report"] = get("output", "report")
        return RunConfig(**kw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

@dataclass
class ClassificationReport:
    config: dict
    verdicts: list
    oracle: dict | None
    final: str
    contradictions: list
    timing: dict = field(default_factory=dict)

    @property
    def exit_status(self) -> int:
        return EXIT_CONTRADICTION if self.contradictions else EXIT_OK

    def as_dict(self, timing: bool = True) -> dict:
        out = {
            "config": self.config,
            "criteria": [v.as_dict() for v in self.verdicts],
            "oracle": self.oracle,
            "final_classification": self.final,
            "contradictions": self.contradictions,
        }
        if timing:
            out["timing"] = self.timing
        return out

    def to_json(self, timing: bool = True) -> str:
        return dump_json(self.as_dict(timing))


def _finite(obj):
    """Replace non-finite floats by the strings "inf", "-inf", "nan" (strict JSON)."""
    if isinstance(obj, float) and not np.isfinite(obj):
        return "nan" if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _run_criterion(cid: str, seq: CoefficientSequence, cfg: RunConfig) -> CriterionVerdict:
    m = seq.block_size
    depth = cfg.resolved_depth(m)
    cls, norm = cfg.classifier, cfg.norm
    if cid in cr.DIAGONAL_IDS.values():
        j = {v: k for k, v in cr.DIAGONAL_IDS.items()}[cid]
        return cr.kernel_diagonal_sum(seq, j, depth, cls, norm)
    if cid == "corollary2":
        return cr.corollary2_check(seq, depth, cls, norm)
    if cid == "corollary3":
        return cr.corollary3_check(seq, depth, cls, norm)
    if cid == "kernel_total":
        return cr.kernel_total_streamed(seq, depth, cls, norm)
    if cid == "segment_sum":
        return cr.segment_sum_verdict(k_direct(seq, cfg.resolved_kernel_depth(m)), cls, norm)
    if cid == "band_limsup":
        return cr.band_limsup(block_to_band(seq), depth, cls)
    if cid.startswith("velazquez_q"):
        return cr.velazquez_series(seq, int(cid[-1]), depth, cls, norm)
    if m != 1:
        return cr.inapplicable(cid, depth, "needs a scalar Jacobi matrix", norm)
    if cid == "k2_limsup":
        return k2_limsup(seq, None, depth, cls)
    if cid == "power_limsup":
        return power_limsup_criterion(seq, None, cfg.power_k, depth, cls)
    raise ConfigError(f"unknown criterion {cid}")


def run_oracle(seq: CoefficientSequence, cfg: RunConfig) -> dict:
    m = seq.block_size
    depth = cfg.oracle_depth or cfg.resolved_depth(m)
    est = deficiency_estimate(seq, depth, cfg.classifier, cfg.max_dps)
    out = est.as_dict()
    out["m"] = m
    out["complete_indeterminacy"] = complete_indeterminacy_probe(seq, depth, cfg.classifier)
    if m == 1:
        out["scalar_moment_problem"] = scalar_indeterminacy(seq, depth, cfg.classifier)
    else:
        out["note"] = (out["note"] + "; " if out["note"] else "") + "n_- assumed equal to n_+"
    return out


_INCOMPATIBLE = {frozenset((SELF_ADJOINT, MAXIMAL)), frozenset((MAXIMAL, NOT_MAXIMAL))}


def find_contradictions(verdicts, oracle: dict | None, m: int) -> list:
    """Pairs of criteria with incompatible conclusions, and conclusions the oracle refutes."""
    out = []
    concl = [v for v in verdicts if v.verdict != NO_CONCLUSION]
    for i, v in enumerate(concl):
        for w in concl[i + 1:]:
            if frozenset((v.verdict, w.verdict)) in _INCOMPATIBLE:
                out.append({"criteria": [v.criterion_id, w.criterion_id],
                            "reason": f"{v.verdict} vs {w.verdict}"})
    if oracle is not None and not oracle["inconclusive"]:
        est = oracle["n_plus_estimate"]
        refuted = {SELF_ADJOINT: est != 0, MAXIMAL: est != m, NOT_MAXIMAL: est == m}
        for v in concl:
            if refuted[v.verdict]:
                out.append({"criteria": [v.criterion_id, "oracle"],
                            "reason": f"{v.verdict} but oracle estimate n_+ = {est} (m = {m})"})
    return out


def final_classification(verdicts, oracle: dict | None, m: int) -> str:
    """self_adjoint > maximal_deficiency > not_maximal; the oracle alone only names the scalar indeterminate case."""
    found = {v.verdict for v in verdicts}
    for name in (SELF_ADJOINT, MAXIMAL, NOT_MAXIMAL):
        if name in found:
            return name
    if m == 1 and oracle is not None and not oracle["inconclusive"] and oracle["n_plus_estimate"] == 1:
        return "indeterminate_scalar"
    return "inconclusive"


def classify(cfg: RunConfig) -> ClassificationReport:
    """Run the selected criteria and the oracle, then aggregate."""
    t_all = time.perf_counter()
    seq = cfg.build()
    m = seq.block_size
    timing, verdicts = {}, []
    for cid in cfg.select:
        t0 = time.perf_counter()
        try:
            v = _run_criterion(cid, seq, cfg)
        except (ArithmeticError, CoefficientError, IndexError, np.linalg.LinAlgError) as exc:
            v = cr.inapplicable(cid, cfg.resolved_depth(m), f"{type(exc).__name__}: {exc}", cfg.norm)
        verdicts.append(v)
        timing[cid] = round(time.perf_counter() - t0, 4)
    oracle = None
    if cfg.oracle:
        t0 = time.perf_counter()
        oracle = run_oracle(seq, cfg)
        timing["oracle"] = round(time.perf_counter() - t0, 4)
    contradictions = find_contradictions(verdicts, oracle, m)
    final = final_classification(verdicts, oracle, m)
    timing["total"] = round(time.perf_counter() - t_all, 4)
    echo = cfg.as_dict()
    echo["resolved"] = {"m": m, "depth": cfg.resolved_depth(m), "kernel_depth": cfg.resolved_kernel_depth(m)}
    return ClassificationReport(echo, verdicts, oracle, final, contradictions, timing)


# ---------------------------------------------------------------------------
# other subcommands
# ---------------------------------------------------------------------------

def check_invariants(cfg: RunConfig, seed: int = 0, out=None) -> int:
    """Run every property suite; print one line per suite."""
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    results = []
    try:
        seq = cfg.build()
    except CoefficientError as exc:
        results.append(inv.SuiteResult("coefficients", False, float("nan"), 0.0, 0, [str(exc)]))
        seq = None
    if seq is not None:
        depth = min(cfg.resolved_depth(seq.block_size), 200)
        results.append(inv.coefficient_suite(seq, depth))
        if results[-1].passed:
            results.append(inv.recurrence_suite(seq, depth))
    results += [
        inv.christoffel_darboux_suite(rng),
        inv.kernel_route_suite(rng),
        inv.closed_form_suite(rng, routes=("recursive",)),
        # the direct table is only as good as the route tolerance
        inv.closed_form_suite(rng, tol=1e-8, routes=("direct",)),
        inv.inequality_suite(rng),
        inv.power_truncation_suite(rng),
    ]
    for r in results:
        print(r.line(), file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def power_corner(cfg: RunConfig, k: int, n: int) -> dict:
    seq = cfg.build()
    if seq.block_size != 1:
        raise ConfigError("power needs a scalar operator")
    band = power_coeffs(seq, None, k, n)
    corner = band.corner(n).astype(float)
    return {"k": k, "n": n, "corner": corner.tolist()}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jacobi-deficiency",
                                description="Deficiency-index criteria for (block) Jacobi matrices")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [("classify", "run criteria and oracle"), ("probe", "oracle only"),
                           ("power", "print a corner of J^k"), ("check-invariants", "run the property suites")]:
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="INI file")
        s.add_argument("--depth", type=int, help="series / oracle depth")
        s.add_argument("--norm", choices=NORMS)
        s.add_argument("--report", help="write the report here instead of stdout")
        s.add_argument("--seed", type=int, default=0, help="seed for the randomised suites")
        if name == "power":
            s.add_argument("--k", type=int, default=2)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        over = {}
        if args.depth is not None:
            over.update(depth=args.depth, oracle_depth=args.depth)
        if args.norm:
            over["norm"] = args.norm
        if args.report:
            over["report"] = args.report
        cfg = replace(cfg, **over)
        if args.command == "classify":
            report = classify(cfg)
            _emit(report.to_json(), cfg.report)
            return report.exit_status
        if args.command == "probe":
            seq = cfg.build()
            _emit(dump_json(run_oracle(seq, cfg)), cfg.report)
            return EXIT_OK
        if args.command == "power":
            n = args.depth if args.depth is not None else 10
            _emit(json.dumps(power_corner(cfg, args.k, n)) + "\n", cfg.report)
            return EXIT_OK
        return check_invariants(cfg, args.seed)
    except (ConfigError, CoefficientError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
