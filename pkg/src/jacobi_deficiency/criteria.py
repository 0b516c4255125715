"""Series and limsup criteria for deficiency indices, evaluated at finite depth.

Every criterion returns a :class:`CriterionVerdict`.  A criterion only ever
emits the single conclusion its underlying result licenses; when the finite-depth
evidence does not settle the hypothesis the verdict is ``no_conclusion``.

=================  =====================================  ==================
criterion id       series / quantity                      conclusion
=================  =====================================  ==================
carleman_a         sum ||K_{n+1,n}|| = sum ||B_n^-1||      diverges: not_maximal
dennis_wall_b      sum ||K_{n+2,n}||                      diverges: not_maximal
k_diag_j3, _j4     sum ||K_{n+j,n}||                      diverges: not_maximal
corollary2         sum ||B^-1 B* B^-1|| (conv.) and        not_maximal
                   sum ||B^-1 A B^-1 A B^-1|| (div.)
corollary3         two K_{n+4,n} groups, one conv/one div  not_maximal
kernel_total       sum_{1<=i<j} ||K_ji||                  converges: maximal_deficiency
segment_sum        dyadic segment sums (report only)      none
band_limsup        band row ratio limsup                  < 1: self_adjoint
velazquez_q{0,1,2} sum 1/(||B_n|| F_{q,n})                diverges: self_adjoint
k2_limsup          squared-matrix ratio limsup            < 1: self_adjoint
power_limsup       band row ratio of J^k                  < 1: self_adjoint
=================  =====================================  ==================
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import BandSpec, CoefficientSequence
from .kernel import InconclusiveError, KernelTable, block_norm, diagonal_terms, kernel_row_sums_streamed
from .polys import first_kind
from .trend import CONVERGENT, DEFAULT_CLASSIFIER, DIVERGENT, INCONCLUSIVE, TrendClassifier

SELF_ADJOINT = "self_adjoint"
MAXIMAL = "maximal_deficiency"
NOT_MAXIMAL = "not_maximal"
NO_CONCLUSION = "no_conclusion"

# The one conclusion each criterion may draw.
LICENSED = {
    "carleman_a": NOT_MAXIMAL,
    "dennis_wall_b": NOT_MAXIMAL,
    "k_diag_j3": NOT_MAXIMAL,
    "k_diag_j4": NOT_MAXIMAL,
    "corollary2": NOT_MAXIMAL,
    "corollary3": NOT_MAXIMAL,
    "kernel_total": MAXIMAL,
    "segment_sum": None,
    "band_limsup": SELF_ADJOINT,
    "velazquez_q0": SELF_ADJOINT,
    "velazquez_q1": SELF_ADJOINT,
    "velazquez_q2": SELF_ADJOINT,
    "k2_limsup": SELF_ADJOINT,
    "power_limsup": SELF_ADJOINT,
}
CRITERION_IDS = tuple(LICENSED)
DIAGONAL_IDS = {1: "carleman_a", 2: "dennis_wall_b", 3: "k_diag_j3", 4: "k_diag_j4"}


class SingularDiagonalError(ArithmeticError):
    def __init__(self, index: int):
        super().__init__(f"A_{index} is singular; the criterion is inapplicable")
        self.index = index


@dataclass(frozen=True)
class CriterionVerdict:
    """One criterion's finite-depth diagnostic.

    For series criteria ``trend`` is the convergence trend of the relevant
    series and ``partial_value`` its partial sum.  For limsup criteria
    ``partial_value`` is the trailing maximum and ``trend`` is ``convergent``
    when it lies below ``1 - margin``, ``divergent`` when it is >= 1.
    """

    criterion_id: str
    partial_value: float
    trend: str
    verdict: str
    depth: int
    norm_used: str = "spectral"
    details: dict = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if self.criterion_id not in LICENSED:
            raise ValueError(f"unknown criterion {self.criterion_id!r}")
        if self.trend == INCONCLUSIVE and self.verdict != NO_CONCLUSION:
            raise ValueError("an inconclusive trend cannot carry a verdict")
        if self.verdict != NO_CONCLUSION and self.verdict != LICENSED[self.criterion_id]:
            raise ValueError(f"{self.criterion_id} cannot conclude {self.verdict}")

    def as_dict(self) -> dict:
        return {
            "criterion_id": self.criterion_id,
            "partial_value": _clean(self.partial_value),
            "trend": self.trend,
            "verdict": self.verdict,
            "depth": self.depth,
            "norm_used": self.norm_used,
            "details": {k: _clean(v) for k, v in self.details.items()},
            "note": self.note,
        }


def _clean(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            return str(v)
        return float(f"{v:.12g}")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def inapplicable(criterion_id: str, depth: int, note: str, norm: str = "spectral") -> CriterionVerdict:
    return CriterionVerdict(criterion_id, float("nan"), INCONCLUSIVE, NO_CONCLUSION, depth, norm, note=note)


def _series_verdict(cid, terms, start, depth, classifier, norm, on_divergent=None, on_convergent=None, **details):
    res = classifier.classify(terms, start)
    verdict = NO_CONCLUSION
    if res.trend == DIVERGENT and on_divergent:
        verdict = on_divergent
    elif res.trend == CONVERGENT and on_convergent:
        verdict = on_convergent
    details = {"block_ratio": res.ratio, "tail_estimate": res.tail_estimate, "overflow": res.overflow, **details}
    return CriterionVerdict(cid, res.partial_sum, res.trend, verdict, depth, norm, details)


# ---------------------------------------------------------------------------
# kernel-based criteria
# ---------------------------------------------------------------------------

def kernel_row_sums(table: KernelTable, norm: str = "spectral") -> np.ndarray:
    """r_j = sum_{1 <= i < j} ||K_ji|| for j = 0..depth."""
    dense = table.dense_norms(norm)
    dense[:, 0] = 0.0
    return np.tril(dense, -1).sum(axis=1)


def kernel_total_sum(table: KernelTable, classifier: TrendClassifier = DEFAULT_CLASSIFIER,
                     norm: str = "spectral") -> CriterionVerdict:
    """Total kernel sum over 1 <= i < j <= N; convergence gives maximal deficiency.

    The trend is read from the row sums r_j, so the partial value is the sum
    over the stored triangle.
    """
    rows = kernel_row_sums(table, norm)
    v = _series_verdict("kernel_total", rows[2:], 2, table.depth, classifier, norm,
                        on_convergent=MAXIMAL, route=table.route)
    if table.note:
        v = CriterionVerdict(**{**v.__dict__, "note": table.note})
    return v


def kernel_total_streamed(seq: CoefficientSequence, depth: int, classifier: TrendClassifier = DEFAULT_CLASSIFIER,
                          norm: str = "spectral") -> CriterionVerdict:
    """Same criterion as :func:`kernel_total_sum` without holding the O(N^2) table."""
    rows, note = kernel_row_sums_streamed(seq, depth, norm)
    v = _series_verdict("kernel_total", rows[2:], 2, len(rows) - 1, classifier, norm,
                        on_convergent=MAXIMAL, route="direct_streamed")
    return CriterionVerdict(**{**v.__dict__, "note": note}) if note else v


def diagonal_series_terms(seq: CoefficientSequence, j: int, depth: int, norm: str = "spectral") -> np.ndarray:
    """||K_{n+j,n}|| for n = 1..depth from the closed forms."""
    parts = diagonal_terms(seq, j, depth)
    signs = {1: (1,), 2: (-1,), 3: (-1, 1), 4: (1, -1)}[j]
    total = sum(s * p for s, p in zip(signs, parts))
    return block_norm(total, norm)[1:]


def kernel_diagonal_sum(seq: CoefficientSequence, j: int, depth: int,
                        classifier: TrendClassifier = DEFAULT_CLASSIFIER, norm: str = "spectral") -> CriterionVerdict:
    """sum_{n>=1} ||K_{n+j,n}||; divergence means the deficiency is not maximal."""
    if j not in DIAGONAL_IDS:
        raise ValueError(f"j must be in 1..4, got {j}")
    with np.errstate(over="ignore", invalid="ignore"):
        terms = diagonal_series_terms(seq, j, depth, norm)
    return _series_verdict(DIAGONAL_IDS[j], terms, 1, depth, classifier, norm, on_divergent=NOT_MAXIMAL)


def _pair_check(cid, first, second, depth, classifier, norm, rule):
    r1 = classifier.classify(first, 1)
    r2 = classifier.classify(second, 1)
    trend, verdict = rule(r1.trend, r2.trend)
    details = {
        "first_sum": r1.partial_sum, "first_trend": r1.trend, "first_ratio": r1.ratio,
        "second_sum": r2.partial_sum, "second_trend": r2.trend, "second_ratio": r2.ratio,
    }
    return CriterionVerdict(cid, r2.partial_sum, trend, verdict, depth, norm, details)


def corollary2_check(seq: CoefficientSequence, depth: int, classifier: TrendClassifier = DEFAULT_CLASSIFIER,
                     norm: str = "spectral") -> CriterionVerdict:
    """sum ||B_{n+2}^-1 B*_{n+1} B_n^-1|| < inf with sum ||B^-1 A B^-1 A B^-1|| = inf."""
    if depth < 3:
        raise ValueError("depth must be >= 3")
    with np.errstate(over="ignore", invalid="ignore"):
        t1, t2 = (block_norm(p, norm)[1:] for p in diagonal_terms(seq, 3, depth))

    def rule(a, b):
        if a == CONVERGENT and b == DIVERGENT:
            return DIVERGENT, NOT_MAXIMAL
        if INCONCLUSIVE in (a, b):
            return INCONCLUSIVE, NO_CONCLUSION
        return (CONVERGENT if b == CONVERGENT else DIVERGENT), NO_CONCLUSION

    return _pair_check("corollary2", t1, t2, depth, classifier, norm, rule)


def corollary3_check(seq: CoefficientSequence, depth: int, classifier: TrendClassifier = DEFAULT_CLASSIFIER,
                     norm: str = "spectral") -> CriterionVerdict:
    """The two groups of K_{n+4,n}: one series converging and the other diverging."""
    if depth < 3:
        raise ValueError("depth must be >= 3")
    with np.errstate(over="ignore", invalid="ignore"):
        s1, s2 = (block_norm(p, norm)[1:] for p in diagonal_terms(seq, 4, depth))

    def rule(a, b):
        if {a, b} == {CONVERGENT, DIVERGENT}:
            return DIVERGENT, NOT_MAXIMAL
        if a == b and a != INCONCLUSIVE:
            return a, NO_CONCLUSION
        return INCONCLUSIVE, NO_CONCLUSION

    return _pair_check("corollary3", s1, s2, depth, classifier, norm, rule)


def validate_segments(segments) -> list[tuple[int, int]]:
    segs = [(int(a), int(b)) for a, b in segments]
    for k, (n, m) in enumerate(segs):
        if n > m or n < 0:
            raise ValueError(f"segment {k} = [{n}, {m}] is not an interval of naturals")
        if k > 0:
            prev_m = segs[k - 1][1]
            if not prev_m <= n < m:
                raise ValueError(f"segments {k - 1} and {k} overlap or are out of order")
    return segs


def dyadic_segments(depth: int) -> list[tuple[int, int]]:
    """[1, 2], [2, 4], [4, 8], ... up to ``depth``."""
    out, k = [], 0
    while 2 ** (k + 1) <= depth:
        out.append((2 ** k, 2 ** (k + 1)))
        k += 1
    return out


def segment_values(table: KernelTable, segments, norm: str = "spectral") -> np.ndarray:
    """(sum_{j=n_k}^{m_k} sum_{i=n_k}^{j} ||K_ji||^2)^(1/2) for each segment."""
    segs = validate_segments(segments)
    if segs and segs[-1][1] > table.depth:
        raise ValueError(f"segment end {segs[-1][1]} exceeds table depth {table.depth}")
    with np.errstate(over="ignore"):
        sq = table.dense_norms(norm) ** 2
    out = np.empty(len(segs))
    for k, (n, m) in enumerate(segs):
        out[k] = np.sqrt(np.tril(sq[n: m + 1, n: m + 1]).sum())
    return out


def segment_sum_diagnostic(table: KernelTable, segments, norm: str = "spectral") -> float:
    """Finite value of the segment sum over the given segments."""
    return float(segment_values(table, segments, norm).sum())


def segment_sum_verdict(table: KernelTable, classifier: TrendClassifier = DEFAULT_CLASSIFIER,
                        norm: str = "spectral", segments=None) -> CriterionVerdict:
    """Report-only wrapper: a finite family of segments cannot settle the criterion."""
    segs = dyadic_segments(table.depth) if segments is None else segments
    vals = segment_values(table, segs, norm)
    trend = INCONCLUSIVE
    tail = vals[-classifier.window - 1:]
    if len(tail) >= 2 and np.all(tail > 0):
        ratios = tail[1:] / tail[:-1]
        if np.all(ratios <= classifier.ratio_threshold_conv):
            trend = CONVERGENT
        elif np.all(ratios >= classifier.ratio_threshold_div):
            trend = DIVERGENT
    return CriterionVerdict("segment_sum", float(vals.sum()), trend, NO_CONCLUSION, table.depth, norm,
                            {"segments": [list(s) for s in segs], "values": vals.tolist()},
                            note="report only: the criterion quantifies over all segment sequences")


# ---------------------------------------------------------------------------
# limsup criteria
# ---------------------------------------------------------------------------

def band_quantities(spec: BandSpec, depth: int) -> np.ndarray:
    """(|c_jj|^2 + 1)^(-1/2) sum_{k=1}^m (|c_{j,j-k}| + |c_{j,j+k}|) for j = 0..depth."""
    m = spec.bandwidth
    out = np.empty(depth + 1)
    for j in range(depth + 1):
        off = sum(abs(spec(j, j - k)) + abs(spec(j, j + k)) for k in range(1, m + 1))
        out[j] = off / np.sqrt(abs(spec(j, j)) ** 2 + 1.0)
    return out


def limsup_verdict(cid: str, values: np.ndarray, depth: int, classifier: TrendClassifier,
                   **details) -> CriterionVerdict:
    """Trailing-half maximum compared with 1 - margin."""
    tail = np.asarray(values)[len(values) // 2:]
    est = float(np.max(tail))
    if est < 1.0 - classifier.limsup_margin:
        trend, verdict = CONVERGENT, SELF_ADJOINT
    elif est >= 1.0:
        trend, verdict = DIVERGENT, NO_CONCLUSION
    else:
        trend, verdict = INCONCLUSIVE, NO_CONCLUSION
    details = {"last_value": float(tail[-1]), "margin": classifier.limsup_margin, **details}
    return CriterionVerdict(cid, est, trend, verdict, depth, "n/a", details)


def band_limsup(spec: BandSpec, depth: int, classifier: TrendClassifier = DEFAULT_CLASSIFIER,
                criterion_id: str = "band_limsup") -> CriterionVerdict:
    """limsup of the band row ratio below 1 gives self-adjointness."""
    if depth < spec.bandwidth:
        raise ValueError("depth must be >= bandwidth")
    return limsup_verdict(criterion_id, band_quantities(spec, depth), depth, classifier,
                          bandwidth=spec.bandwidth)


# ---------------------------------------------------------------------------
# series in 1 / (||B_n|| F_{q,n})
# ---------------------------------------------------------------------------

def _is_singular(a: np.ndarray) -> bool:
    if a.shape[0] == 1:
        return a[0, 0] == 0
    s = np.linalg.svd(a, compute_uv=False)
    return not s[-1] > 1e-12 * s[0]


def _step_norms(seq: CoefficientSequence, n_lo: int, n_hi: int, norm: str):
    """alpha_plus[n] = ||A_n^-1 B_n||, alpha_minus[n] = ||A_n^-1 B*_{n-1}|| on n_lo..n_hi."""
    idx = list(range(n_lo, n_hi + 1))
    for n in idx:
        if _is_singular(seq.a(n)):
            raise SingularDiagonalError(n)
    A = np.stack([seq.a(n) for n in idx])
    B = np.stack([seq.b(n) for n in idx])
    Bm = np.stack([seq.b(n - 1).conj().T for n in idx])
    plus = block_norm(np.linalg.solve(A, B), norm)
    minus = block_norm(np.linalg.solve(A, Bm), norm)
    return dict(zip(idx, plus)), dict(zip(idx, minus))


def f_factor(seq: CoefficientSequence, q: int, n: int, norm: str = "spectral") -> float:
    """F_{q,n} for q in 0..2 (F_0 = 1)."""
    if q == 0:
        return 1.0
    if q not in (1, 2):
        raise ValueError("F_{q,n} is available for q = 0, 1, 2 only")
    lo, hi = (n, n) if q == 1 else (max(n - 1, 0), n + 1)
    plus, minus = _step_norms(seq, lo, hi, norm)
    if q == 1:
        return float(plus[n] + minus[n])
    before = plus.get(n - 1, 0.0) + minus.get(n - 1, 0.0) if n >= 1 else 0.0
    return float(minus[n] * before + plus[n] * (minus[n + 1] + plus[n + 1]))


def f_factors(seq: CoefficientSequence, q: int, n_lo: int, n_hi: int, norm: str = "spectral") -> np.ndarray:
    """F_{q,n} for n = n_lo..n_hi, vectorised."""
    if q == 0:
        return np.ones(n_hi - n_lo + 1)
    if q not in (1, 2):
        raise ValueError("F_{q,n} is available for q = 0, 1, 2 only")
    lo = max(n_lo - 1, 0) if q == 2 else n_lo
    hi = n_hi + 1 if q == 2 else n_hi
    plus, minus = _step_norms(seq, lo, hi, norm)
    ns = range(n_lo, n_hi + 1)
    if q == 1:
        return np.array([plus[n] + minus[n] for n in ns])
    return np.array([minus[n] * (plus.get(n - 1, 0.0) + minus.get(n - 1, 0.0))
                     + plus[n] * (minus[n + 1] + plus[n + 1]) for n in ns])


def velazquez_series(seq: CoefficientSequence, q: int, depth: int,
                     classifier: TrendClassifier = DEFAULT_CLASSIFIER, norm: str = "spectral") -> CriterionVerdict:
    """sum_{n=q+1}^{depth} 1/(||B_n|| F_{q,n}); divergence gives self-adjointness.

    For q = 0 this is the block Carleman series sum 1/||B_n||.
    """
    cid = f"velazquez_q{q}"
    if q not in (0, 1, 2):
        raise ValueError("q must be 0, 1 or 2")
    try:
        F = f_factors(seq, q, q + 1, depth, norm)
    except SingularDiagonalError as exc:
        return inapplicable(cid, depth, str(exc), norm)
    _, B = seq.arrays(depth + 1)
    bn = block_norm(B[q + 1:], norm)
    with np.errstate(divide="ignore"):
        terms = 1.0 / (bn * F)
    return _series_verdict(cid, terms, q + 1, depth, classifier, norm, on_divergent=SELF_ADJOINT)


@dataclass(frozen=True)
class InequalityReport:
    """Left and right sides of the chain of lower bounds at z = i."""

    q: int
    n: int
    left: float
    right: float
    holds: bool
    chain: dict


def verify_qq_inequality(seq: CoefficientSequence, q: int, n: int, x, rtol: float = 1e-9,
                         norm: str = "spectral", P=None) -> InequalityReport:
    """Check 1/(||B_n|| F_{q,n}) <= ||x||^-2 ||P_{n+1}(i)x|| sum_{k=0}^q ||P_{n-q+2k}(i)x||.

    ``chain`` also holds the intermediate bounds (left, right, holds):
    ``cd_bound``     1/||B_n|| <= C ||P_{n+1}x|| ||P_n x||
    ``step_bound``   ||P_n x|| <= ||A_n^-1 B_n|| ||P_{n+1}x|| + ||A_n^-1 B*_{n-1}|| ||P_{n-1}x||
    ``f1_bound``     ||P_n x|| <= F_1 (||P_{n+1}x|| + ||P_{n-1}x||)
    ``f2_bound``     ||P_n x|| <= F_2 (||P_{n-2}x|| + ||P_n x|| + ||P_{n+2}x||)
    ``q1_bound``, ``q2_bound``  the combined bounds for q = 1, 2.
    The A-dependent members appear only when the needed A_k are invertible.
    """
    if q not in (0, 1, 2):
        raise ValueError("q must be 0, 1 or 2")
    if n < max(q, 1):
        raise ValueError("need n >= max(q, 1)")
    x = np.asarray(x, dtype=complex).reshape(seq.block_size, -1)
    if not np.any(x):
        raise ValueError("x must be nonzero")
    if P is None:
        P = first_kind(seq, 1j, n + 3)
    if len(P.blocks) < n + 3:
        raise InconclusiveError("P(i) overflowed before the needed index")
    v = {k: float(np.linalg.norm(P.blocks[k] @ x)) for k in range(max(n - 2, 0), n + 3)}
    C = 1.0 / float(np.linalg.norm(x)) ** 2
    bn = float(block_norm(seq.b(n), norm))
    slack = 1.0 + rtol

    def entry(left, right):
        return (left, right, bool(left <= right * slack))

    chain = {"cd_bound": entry(1.0 / bn, C * v[n + 1] * v[n])}
    try:
        plus, minus = _step_norms(seq, max(n - 1, 0), n + 1, norm)
    except SingularDiagonalError:
        plus = minus = None
    if plus is not None:
        chain["step_bound"] = entry(v[n], plus[n] * v[n + 1] + minus[n] * v[n - 1])
        F1 = plus[n] + minus[n]
        chain["f1_bound"] = entry(v[n], F1 * (v[n + 1] + v[n - 1]))
        chain["q1_bound"] = entry(1.0 / (bn * F1), C * v[n + 1] * (v[n + 1] + v[n - 1]))
        if n >= 2:
            F2 = minus[n] * (plus[n - 1] + minus[n - 1]) + plus[n] * (minus[n + 1] + plus[n + 1])
            chain["f2_bound"] = entry(v[n], F2 * (v[n - 2] + v[n] + v[n + 2]))
            chain["q2_bound"] = entry(1.0 / (bn * F2), C * v[n + 1] * (v[n - 2] + v[n] + v[n + 2]))
    if q > 0 and plus is None:
        raise SingularDiagonalError(n)
    F = f_factor(seq, q, n, norm)
    left = 1.0 / (bn * F)
    right = C * v[n + 1] * sum(v[n - q + 2 * k] for k in range(q + 1))
    return InequalityReport(q, n, left, right, bool(left <= right * slack), chain)
