"""Formal powers J^k of a scalar Jacobi matrix and the power-based criteria.

J^k is a Hermitian band matrix of bandwidth k.  Its entries satisfy

    c^{(k+1)}_{n,n+s} = b_{n-1} c^{(k)}_{n-1,n+s} + a_n c^{(k)}_{n,n+s} + b_n c^{(k)}_{n+1,n+s}

with c^{(1)}_{n,n} = a_n, c^{(1)}_{n,n+1} = b_n and c^{(k)}_{ij} = 0 outside the
band or at negative indices.  Entries are kept per diagonal, so integer input
stays exact (Python integers) and float input stays in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import BandSpec, CoefficientError, CoefficientSequence, band_to_block, scalar_sequence
from .criteria import band_limsup, limsup_verdict, CriterionVerdict
from .oracle import INCONCLUSIVE, complete_indeterminacy_probe, scalar_indeterminacy
from .trend import DEFAULT_CLASSIFIER, TrendClassifier

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"


def _scalar_inputs(a, b, n: int):
    """(a_0..a_{n-1}, b_0..b_{n-1}) from arrays or an m = 1 coefficient sequence.

    Integer input becomes an object array of Python ints (exact arithmetic).
    """
    if isinstance(a, CoefficientSequence):
        if b is not None:
            raise ValueError("pass either a CoefficientSequence or the two arrays a, b")
        ca, cb = a.scalar_arrays(n)
        if np.any(ca.imag != 0) or np.any(cb.imag != 0):
            raise CoefficientError("powers need real coefficients")
        return ca.real, cb.real
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("a and b must be one-dimensional")
    if len(a) < n or len(b) < n:
        raise ValueError(f"need at least {n} coefficients, got {len(a)} and {len(b)}")
    a, b = a[:n], b[:n]
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        raise CoefficientError("powers need real coefficients")
    if a.dtype.kind in "iu" and b.dtype.kind in "iu":
        a = np.array([int(v) for v in a], dtype=object)
        b = np.array([int(v) for v in b], dtype=object)
    else:
        a = a.astype(float)
        b = b.astype(float)
    bad = np.nonzero(~(b > 0))[0]
    if len(bad):
        raise CoefficientError(f"b_{bad[0]} = {b[bad[0]]} is not positive", int(bad[0]))
    return a, b


@dataclass(frozen=True)
class PowerBand:
    """Band entries of J^k: ``diags[s][n] = c^{(k)}_{n,n+s}`` for rows n = 0..depth."""

    k: int
    diags: tuple

    @property
    def depth(self) -> int:
        return len(self.diags[0]) - 1

    def entry(self, i: int, j: int):
        if i > j:
            i, j = j, i
        s = j - i
        if i < 0 or s > self.k:
            return 0
        if i > self.depth:
            raise IndexError(f"row {i} beyond the computed depth {self.depth}")
        return self.diags[s][i]

    def corner(self, n: int) -> np.ndarray:
        """Dense n x n leading block (needs n <= depth + 1)."""
        if n > self.depth + 1:
            raise IndexError(f"corner {n} larger than depth + 1 = {self.depth + 1}")
        out = np.zeros((n, n), dtype=self.diags[0].dtype)
        for s in range(self.k + 1):
            idx = np.arange(n - s)
            out[idx, idx + s] = self.diags[s][: n - s]
            out[idx + s, idx] = self.diags[s][: n - s]
        return out

    def to_band_spec(self) -> BandSpec:
        return BandSpec(self.k, lambda i, j: complex(self.entry(i, j)))


def _next_level(diags, a, b):
    """One recurrence step; the result has one row fewer than its input."""
    k = len(diags) - 1
    rows = len(diags[0]) - 1
    zero = diags[0][:rows] * 0
    new = []
    for s in range(k + 2):
        # b_{n-1} c_{n-1,n+s}: offset s + 1 on the previous row
        left = zero.copy()
        if s + 1 <= k and rows > 1:
            left[1:] = b[: rows - 1] * diags[s + 1][: rows - 1]
        # a_n c_{n,n+s}
        mid = a[:rows] * diags[s][:rows] if s <= k else zero.copy()
        # b_n c_{n+1,n+s}: offset s - 1 on the next row, c_{n+1,n} = c_{n,n+1} for s = 0
        if s == 0:
            right = b[:rows] * diags[1][:rows]
        else:
            right = b[:rows] * diags[s - 1][1: rows + 1]
        new.append(left + mid + right)
    return tuple(new)


def power_coeffs(a, b=None, k: int = 2, depth: int = 100) -> PowerBand:
    """Entries of J^k for rows 0..depth.

    ``a``, ``b`` are coefficient arrays with at least ``depth + k`` entries, or
    ``a`` is a scalar :class:`CoefficientSequence` and ``b`` is None.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    n = depth + k
    a, b = _scalar_inputs(a, b, n)
    diags = (a.copy(), b.copy())
    for _ in range(k - 1):
        diags = _next_level(diags, a, b)
    diags = tuple(d[: depth + 1] for d in diags)
    for d in diags:
        d.setflags(write=False)
    return PowerBand(k, diags)


def brute_force_power(a, b=None, k: int = 2, n: int = 10) -> np.ndarray:
    """n x n corner of the (n + k) x (n + k) truncation of J raised to the k-th power."""
    size = n + k
    a, b = _scalar_inputs(a, b, size)
    J = np.zeros((size, size), dtype=a.dtype)
    idx = np.arange(size)
    J[idx, idx] = a
    J[idx[:-1], idx[:-1] + 1] = b[:-1]
    J[idx[:-1] + 1, idx[:-1]] = b[:-1]
    out = J.copy()
    for _ in range(k - 1):
        out = out @ J
    return out[:n, :n]


def power_limsup_criterion(a, b=None, k: int = 2, depth: int = 1000,
                           classifier: TrendClassifier = DEFAULT_CLASSIFIER) -> CriterionVerdict:
    """Band limsup criterion applied to J^k; a value below 1 makes L self-adjoint."""
    band = power_coeffs(a, b, k, depth + k)
    return band_limsup(band.to_band_spec(), depth, classifier, criterion_id="power_limsup")


def k2_ratios(a, b=None, depth: int = 1000) -> np.ndarray:
    """(b_{n-1}b_{n-2} + |a_{n-1}+a_n| b_{n-1} + |a_n+a_{n+1}| b_n + b_n b_{n+1}) / (b_{n-1}^2 + a_n^2 + b_n^2).

    n = 0..depth, with b_{-1} = b_{-2} = a_{-1} = 0.
    """
    a, b = _scalar_inputs(a, b, depth + 2)
    a = np.concatenate([[0.0], np.asarray(a, dtype=float)])
    b = np.concatenate([[0.0, 0.0], np.asarray(b, dtype=float)])
    n = np.arange(depth + 1)
    an, an_m1, an_p1 = a[n + 1], a[n], a[n + 2]
    bn, bn_m1, bn_m2, bn_p1 = b[n + 2], b[n + 1], b[n], b[n + 3]
    num = bn_m1 * bn_m2 + np.abs(an_m1 + an) * bn_m1 + np.abs(an + an_p1) * bn + bn * bn_p1
    return num / (bn_m1 ** 2 + an ** 2 + bn ** 2)


def k2_limsup(a, b=None, depth: int = 1000, classifier: TrendClassifier = DEFAULT_CLASSIFIER) -> CriterionVerdict:
    """limsup of :func:`k2_ratios` below 1 makes L self-adjoint."""
    if depth < 4:
        raise ValueError("depth must be >= 4")
    return limsup_verdict("k2_limsup", k2_ratios(a, b, depth), depth, classifier)


@dataclass(frozen=True)
class ConsistencyReport:
    """Scalar oracle on J against the complete-indeterminacy oracle on J^k."""

    k: int
    depth: int
    scalar: str
    power_block: str
    status: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def power_consistency_probe(a, b=None, k: int = 2, depth: int = 10000,
                            classifier: TrendClassifier = DEFAULT_CLASSIFIER) -> ConsistencyReport:
    """Check "J indeterminate iff J^k completely indeterminate" on both oracles.

    J is probed to ``depth``; J^k as a block matrix of size k to ``depth // k``
    blocks, which covers the same rows.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n_rows = depth + 2 * k + 2
    a_arr, b_arr = _scalar_inputs(a, b, n_rows + k)
    seq = scalar_sequence(np.asarray(a_arr, dtype=float), np.asarray(b_arr, dtype=float))
    scalar = scalar_indeterminacy(seq, depth, classifier)
    band = power_coeffs(a_arr, b_arr, k, n_rows)
    block = complete_indeterminacy_probe(band_to_block(band.to_band_spec()), depth // k, classifier)
    if INCONCLUSIVE in (scalar, block):
        status = INCONCLUSIVE
    elif (scalar == "indeterminate") == (block == "completely_indeterminate"):
        status = CONSISTENT
    else:
        status = INCONSISTENT
    return ConsistencyReport(k, depth, scalar, block, status)
