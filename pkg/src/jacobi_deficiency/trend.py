"""Finite-depth convergence diagnostics for series of nonnegative terms.

The terms are grouped into trailing dyadic blocks ``[N/2^(k+1), N/2^k)``
(Cauchy condensation).  For terms ~ n^(-p) consecutive block sums have ratio
~ 2^(1-p): a ratio near or above 1 means divergence, a ratio clearly below 1
means convergence, and anything in between is reported as inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIVERGENT = "divergent"
CONVERGENT = "convergent"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TrendResult:
    trend: str
    partial_sum: float
    ratio: float
    tail_estimate: float
    n_terms: int
    overflow: bool = False
    block_sums: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class TrendClassifier:
    """Thresholds for the dyadic block-ratio test.

    window
        Number of trailing dyadic blocks that enter the fit.
    ratio_threshold_div
        Block ratios at or above this count as divergence (2^-0.02 keeps the
        harmonic series divergent and n^-1.05 inconclusive).
    ratio_threshold_conv
        Block ratios at or below this count as convergence (terms decaying at
        least like n^-1.1).
    tail_tol
        Convergence also needs the extrapolated tail and the last block to be
        below this fraction of the partial sum.
    min_depth
        Fewer terms than this is always inconclusive.
    max_misfit
        Largest log2 spread between individual block ratios and their mean
        before a mixed pattern is called inconclusive.
    limsup_margin
        A limsup estimate must be below ``1 - limsup_margin`` to count as < 1.
    """

    window: int = 3
    ratio_threshold_div: float = 2.0 ** -0.02
    ratio_threshold_conv: float = 2.0 ** -0.1
    tail_tol: float = 0.1
    min_depth: int = 64
    max_misfit: float = 0.5
    limsup_margin: float = 0.05

    def __post_init__(self):
        if not 0 < self.ratio_threshold_conv < self.ratio_threshold_div:
            raise ValueError("need 0 < ratio_threshold_conv < ratio_threshold_div")
        if self.window < 1 or self.min_depth < 2 ** self.window:
            raise ValueError("min_depth must cover the dyadic window")
        if not 0 <= self.limsup_margin < 1:
            raise ValueError("limsup_margin must lie in [0, 1)")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def classify(self, terms, start: int = 1) -> TrendResult:
        """Classify ``sum terms[k]`` where ``terms[k]`` is the term of index ``start + k``."""
        terms = np.asarray(terms, dtype=float)
        n = len(terms)
        if not np.all(np.isfinite(terms)):
            return TrendResult(DIVERGENT, float("inf"), float("inf"), float("inf"), n, overflow=True)
        if np.any(terms < 0):
            raise ValueError("terms must be nonnegative")
        total = float(terms.sum())
        if n < self.min_depth:
            return TrendResult(INCONCLUSIVE, total, float("nan"), float("nan"), n)
        offset = max(start, 1)
        end = offset + n  # exclusive, in shifted index units
        edges = [end]
        for _ in range(self.window + 1):
            edges.append(-(-edges[-1] // 2))
        edges = [e - offset for e in reversed(edges)]
        blocks = np.array([terms[lo:hi].sum() for lo, hi in zip(edges[:-1], edges[1:])])
        return self.classify_blocks(blocks, total, n)

    def classify_blocks(self, blocks, total: float, n_terms: int = 0) -> TrendResult:
        """Classify from chronologically ordered block sums of doubling length."""
        blocks = np.asarray(blocks, dtype=float)
        if not np.all(np.isfinite(blocks)) or not np.isfinite(total):
            return TrendResult(DIVERGENT, float("inf"), float("inf"), float("inf"), n_terms, True, tuple(blocks))
        with np.errstate(divide="ignore"):
            log_blocks = np.log2(blocks)
            log_total = np.log2(total) if total > 0 else -np.inf
        res = self.classify_log_blocks(log_blocks, log_total, n_terms)
        tail = res.tail_estimate * total if total > 0 else res.tail_estimate
        return TrendResult(res.trend, float(total), res.ratio, tail, n_terms, False, tuple(blocks))

    def classify_log_blocks(self, log_blocks, log_total: float, n_terms: int = 0) -> TrendResult:
        """Same test on log2 block sums (``-inf`` for an empty block).

        Used when the block sums span more range than a double can hold.  The
        returned ``partial_sum`` and ``tail_estimate`` are relative to the
        total (partial_sum = 1).
        """
        lb = np.asarray(log_blocks, dtype=float)
        last = lb[-1]
        if last == -np.inf:
            # the terms vanish on the trailing block: nothing left to add
            return TrendResult(CONVERGENT, 1.0, 0.0, 0.0, n_terms)
        if np.any(lb == -np.inf):
            return TrendResult(INCONCLUSIVE, 1.0, float("nan"), float("nan"), n_terms)
        log_ratios = np.diff(lb)
        g = float(np.mean(log_ratios))
        rho = _exp2(g)
        lo_div = np.log2(self.ratio_threshold_div)
        hi_conv = np.log2(self.ratio_threshold_conv)
        rel_last = 2.0 ** min(last - log_total, 0.0)

        def rel_tail(r):
            return rel_last * r / (1.0 - r) if r < 1 else float("inf")

        small = rel_last <= self.tail_tol
        if np.all(log_ratios >= lo_div):
            trend = DIVERGENT
        elif np.all(log_ratios <= hi_conv):
            worst = _exp2(float(np.max(log_ratios)))
            trend = CONVERGENT if small and rel_tail(worst) <= self.tail_tol else INCONCLUSIVE
        elif np.max(np.abs(log_ratios - g)) > self.max_misfit:
            trend = INCONCLUSIVE
        elif g >= lo_div:
            trend = DIVERGENT
        elif g <= hi_conv and small and rel_tail(rho) <= self.tail_tol:
            trend = CONVERGENT
        else:
            trend = INCONCLUSIVE
        return TrendResult(trend, 1.0, rho, rel_tail(rho), n_terms)


def _exp2(x: float) -> float:
    return float(np.exp2(min(x, 1023.0)))


DEFAULT_CLASSIFIER = TrendClassifier()
