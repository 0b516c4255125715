"""Finite-section probe of deficiency structure.

Two independent numerical checks used to validate the criteria:

* square-summability of solution columns (at z = i for the scalar
  moment-problem test, at z = 0 for complete indeterminacy);
* an estimate of n_+ = dim{x : P(i)x in l^2} from the Gram matrices
  G_N = sum_{j<=N} P_j(i)* P_j(i), counting eigenvalue trajectories that
  stabilise.

For block operators with a fast-growing mode, the small Gram eigenvalues are
below double-precision resolution after a few steps.  The Gram route then
re-runs the recurrence in mpmath with enough digits to resolve them (digits
chosen from a rescaled double pass).  Everything here is an estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .coeffs import CoefficientSequence
from .polys import first_kind, second_kind
from .trend import CONVERGENT, DEFAULT_CLASSIFIER, DIVERGENT, TrendClassifier

SUMMABLE = "summable"
NON_SUMMABLE = "non_summable"
INCONCLUSIVE = "inconclusive"
_TREND_TO_SUM = {CONVERGENT: SUMMABLE, DIVERGENT: NON_SUMMABLE}

MAX_DPS = 40000
# double-precision Gram route is trusted while ||P_j|| stays below 10**this
DOUBLE_LOG10_LIMIT = 4.0


@dataclass(frozen=True)
class SummabilityEstimate:
    column: int
    checkpoints: tuple
    partial_sums: tuple
    trend: str
    last_index: int
    overflow_flag: bool = False
    block_ratio: float = float("nan")


@dataclass(frozen=True)
class DeficiencyEstimate:
    """Estimate of n_+ with the Gram eigenvalue trajectories behind it.

    ``gram_eigenvalues`` are log10 of the final eigenvalues, ascending.
    ``inconclusive`` is set when some trajectory neither stabilised nor
    clearly grew; the count then covers only the stabilised ones.
    """

    n_plus_estimate: int
    gram_eigenvalues: tuple
    direction_trends: tuple
    threshold: dict
    depth_used: int
    precision: str
    inconclusive: bool = False
    note: str = ""
    checkpoints: tuple = ()
    trajectories: tuple = field(default=(), repr=False)

    def as_dict(self) -> dict:
        return {
            "n_plus_estimate": self.n_plus_estimate,
            "log10_gram_eigenvalues": [round(v, 9) for v in self.gram_eigenvalues],
            "direction_trends": list(self.direction_trends),
            "inconclusive": self.inconclusive,
            "depth_used": self.depth_used,
            "precision": self.precision,
            "classifier": self.threshold,
            "note": self.note,
        }


def checkpoint_grid(depth: int, first: int = 16) -> list[int]:
    out, c = [], first
    while c < depth:
        out.append(c)
        c *= 2
    out.append(depth)
    return out


def summability_probe(seq: CoefficientSequence, z: complex, kind: str, depth: int,
                      classifier: TrendClassifier = DEFAULT_CLASSIFIER) -> list[SummabilityEstimate]:
    """Partial sums of ||u_j e_r||^2 per column r of the first- or second-kind solution."""
    if kind not in ("first", "second"):
        raise ValueError("kind must be 'first' or 'second'")
    if depth < 16:
        raise ValueError("depth must be >= 16")
    sol = (first_kind if kind == "first" else second_kind)(seq, z, depth)
    return _column_estimates(sol, classifier)


def _column_estimates(sol, classifier, column_offset: int = 0) -> list[SummabilityEstimate]:
    blocks = sol.blocks
    last = len(blocks) - 1
    with np.errstate(over="ignore"):
        terms = np.sum(np.abs(blocks) ** 2, axis=1)  # (N+1, columns)
    out = []
    for r in range(terms.shape[1]):
        with np.errstate(over="ignore"):
            cums = np.cumsum(terms[:, r])
        grid = [c for c in checkpoint_grid(last) if c <= last]
        sums = tuple(float(cums[c]) for c in grid)
        if sol.truncated_at is not None:
            out.append(SummabilityEstimate(r + column_offset, tuple(grid), sums, NON_SUMMABLE, last, True))
            continue
        res = classifier.classify(terms[:, r], start=0)
        out.append(SummabilityEstimate(r + column_offset, tuple(grid), sums,
                                       _TREND_TO_SUM.get(res.trend, INCONCLUSIVE), last, False, res.ratio))
    return out


def complete_indeterminacy_probe(seq: CoefficientSequence, depth: int,
                                 classifier: TrendClassifier = DEFAULT_CLASSIFIER) -> str:
    """Whether every solution of the z = 0 recurrence (rows j >= 1) looks square-summable.

    The 2m columns of P(0) and Q(0) span that solution space.  One
    non-summable column is enough for ``not_completely``.
    """
    cols = summability_probe(seq, 0.0, "first", depth, classifier)
    cols += summability_probe(seq, 0.0, "second", depth, classifier)
    trends = {c.trend for c in cols}
    if NON_SUMMABLE in trends:
        return "not_completely"
    if trends == {SUMMABLE}:
        return "completely_indeterminate"
    return INCONCLUSIVE


def scalar_indeterminacy(seq: CoefficientSequence, depth: int,
                         classifier: TrendClassifier = DEFAULT_CLASSIFIER) -> str:
    """Scalar moment problem: indeterminate iff P(i) and Q(i) are both square-summable."""
    cols = summability_probe(seq, 1j, "first", depth, classifier)
    cols += summability_probe(seq, 1j, "second", depth, classifier)
    trends = {c.trend for c in cols}
    if NON_SUMMABLE in trends:
        return "determinate"
    if trends == {SUMMABLE}:
        return "indeterminate"
    return INCONCLUSIVE


# ---------------------------------------------------------------------------
# Gram estimate of n_+
# ---------------------------------------------------------------------------

def log10_growth(seq: CoefficientSequence, z: complex, depth: int) -> np.ndarray:
    """log10 ||P_j(z)|| for j = 0..depth from a rescaled double-precision pass."""
    m = seq.block_size
    eye = np.eye(m, dtype=complex)
    prev, cur = eye, np.linalg.solve(seq.b(0), z * eye - seq.a(0))
    out = np.empty(depth + 1)
    out[0] = 0.0
    out[1] = math.log10(max(np.linalg.norm(cur, 2), 1e-300))
    shift = 0.0
    for j in range(1, depth):
        nxt = np.linalg.solve(seq.b(j), (z * eye - seq.a(j)) @ cur - seq.b(j - 1).conj().T @ prev)
        s = max(np.abs(nxt).max(), np.abs(cur).max())
        prev, cur = cur / s, nxt / s
        shift += math.log10(s)
        out[j + 1] = shift + math.log10(max(np.linalg.norm(cur, 2), 1e-300))
    return out


def _classify_trajectories(log_eigs: np.ndarray, classifier: TrendClassifier):
    """log_eigs: (n_checkpoints, m) log2 eigenvalues, ascending per row."""
    trends = []
    n_blocks = classifier.window + 1
    for r in range(log_eigs.shape[1]):
        traj = log_eigs[:, r]
        # increments between consecutive checkpoints, in log2
        incs = []
        for k in range(1, len(traj)):
            hi, lo = traj[k], traj[k - 1]
            if hi <= lo:
                incs.append(-np.inf)
            else:
                incs.append(hi + math.log2(-math.expm1((lo - hi) * math.log(2))))
        incs = np.array(incs[-n_blocks:])
        res = classifier.classify_log_blocks(incs, traj[-1])
        trends.append(_TREND_TO_SUM.get(res.trend, INCONCLUSIVE))
    return trends


def _gram_double(P_blocks, grid):
    m = P_blocks.shape[1]
    G = np.zeros((m, m), dtype=complex)
    rows, k = [], 0
    for j, Pj in enumerate(P_blocks):
        G += Pj.conj().T @ Pj
        if k < len(grid) and j == grid[k]:
            w = np.linalg.eigvalsh(G)
            rows.append(np.log2(np.maximum(w, 1e-300)))
            k += 1
    return np.array(rows)


def _gram_mp(seq: CoefficientSequence, depth: int, grid, dps: int):
    m = seq.block_size
    with mpmath.workdps(dps):
        to_mp = lambda x: mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in x])  # noqa: E731
        z = mpmath.mpc(0, 1)
        eye = mpmath.eye(m)
        prev = eye
        cur = mpmath.inverse(to_mp(seq.b(0))) * (z * eye - to_mp(seq.a(0)))
        G = prev.H * prev + cur.H * cur
        rows, k = [], 0
        grid = list(grid)
        for j in range(1, depth + 1):
            if k < len(grid) and j == grid[k]:
                w = sorted(mpmath.eigh(G, eigvals_only=True))
                rows.append([float(mpmath.log(max(v, mpmath.mpf(2) ** -1000), 2)) for v in w])
                k += 1
            if j == depth:
                break
            b_prev_h = to_mp(seq.b(j - 1)).H
            rhs = (z * eye - to_mp(seq.a(j))) * cur - b_prev_h * prev
            nxt = _mp_solve(to_mp(seq.b(j)), rhs)
            prev, cur = cur, nxt
            G += cur.H * cur
    return np.array(rows)


def _mp_solve(B, rhs):
    cols = [mpmath.lu_solve(B, rhs.column(c)) for c in range(rhs.cols)]
    out = mpmath.matrix(rhs.rows, rhs.cols)
    for c, col in enumerate(cols):
        for r in range(rhs.rows):
            out[r, c] = col[r]
    return out


def deficiency_estimate(seq: CoefficientSequence, depth: int,
                        classifier: TrendClassifier = DEFAULT_CLASSIFIER, max_dps: int = MAX_DPS) -> DeficiencyEstimate:
    """Estimate n_+ from the growth of the Gram matrices of P(i).

    Deficiency vectors must satisfy every row including j = 0, so only
    first-kind combinations P(i)x qualify.  n_- is not estimated (equal to
    n_+ for real symmetric data).
    """
    if depth < 64:
        raise ValueError("depth must be >= 64")
    m = seq.block_size
    grid = checkpoint_grid(depth, first=8)
    P = first_kind(seq, 1j, depth)
    cls = classifier.as_dict()

    if m == 1:
        col = _column_estimates(P, classifier)[0]
        last_log = math.log10(col.partial_sums[-1]) if np.isfinite(col.partial_sums[-1]) else float("inf")
        n_plus = 1 if col.trend == SUMMABLE else 0
        note = "overflow: P(i) grows past the guard, certified non-summable" if col.overflow_flag else ""
        return DeficiencyEstimate(n_plus, (last_log,), (col.trend,), cls, col.last_index, "double",
                                  col.trend == INCONCLUSIVE, note, col.checkpoints)

    growth = None
    if P.truncated_at is None:
        peak = float(np.log10(max(np.abs(P.blocks).max(), 1e-300)))
    else:
        growth = log10_growth(seq, 1j, depth)
        peak = float(growth.max())

    note = ""
    depth_used = depth
    if peak <= DOUBLE_LOG10_LIMIT:
        traj = _gram_double(P.blocks, grid)
        precision = "double"
    else:
        if growth is None:
            growth = log10_growth(seq, 1j, depth)
        need = 2.0 * growth + 30.0 + math.log10(depth)
        if need.max() > max_dps:
            depth_used = int(np.nonzero(need <= max_dps)[0].max())
            grid = checkpoint_grid(depth_used, first=8)
            note = f"precision cap {max_dps} digits reached; depth reduced to {depth_used}"
        dps = int(math.ceil(need[: depth_used + 1].max()))
        traj = _gram_mp(seq, depth_used, grid, dps)
        precision = f"mpmath:{dps}"

    trends = _classify_trajectories(traj, classifier)
    n_plus = sum(t == SUMMABLE for t in trends)
    final = tuple(float(v * math.log10(2)) for v in traj[-1])
    return DeficiencyEstimate(n_plus, final, tuple(trends), cls, depth_used, precision,
                              INCONCLUSIVE in trends, note, tuple(grid), tuple(map(tuple, traj)))
