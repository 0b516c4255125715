"""Matrix three-term recurrence: polynomials of the first and second kind.

Solutions of ``B*_{j-1} u_{j-1} + A_j u_j + B_j u_{j+1} = z u_j`` for
``j >= 1``.  The row ``j = 0`` is *not* imposed by the recurrence; whether a
solution also satisfies it is checked separately with :func:`apply_l`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import CoefficientSequence

OVERFLOW = 1e250


class SingularBlockError(ArithmeticError):
    def __init__(self, index: int):
        super().__init__(f"B_{index} is numerically singular")
        self.index = index


@dataclass(frozen=True)
class SolutionSequence:
    """Blocks u_0..u_N of a solution at spectral point ``z``.

    ``truncated_at`` is the last valid index when the growth guard stopped
    the computation early, otherwise ``None``.
    """

    z: complex
    blocks: np.ndarray
    kind: str = "custom"
    truncated_at: int | None = None

    @property
    def depth(self) -> int:
        return len(self.blocks) - 1

    def __getitem__(self, j):
        return self.blocks[j]

    def __len__(self) -> int:
        return len(self.blocks)


def _scalar_path(seq, z, u0, u1, depth, overflow):
    a, b = seq.scalar_arrays(depth)
    out = [u0, u1]
    prev, cur = u0, u1
    truncated = None
    for j in range(1, depth):
        if b[j] == 0:
            raise SingularBlockError(j)
        nxt = ((z - a[j]) * cur - b[j - 1].conjugate() * prev) / b[j]
        if not abs(nxt) <= overflow:
            truncated = j
            break
        out.append(nxt)
        prev, cur = cur, nxt
    return np.array(out, dtype=complex).reshape(-1, 1, 1), truncated


def solve_recurrence(seq: CoefficientSequence, z: complex, u0, u1, depth: int, kind: str = "custom",
                     overflow: float = OVERFLOW) -> SolutionSequence:
    """Run the recurrence from ``(u0, u1)`` up to index ``depth``.

    ``u0`` and ``u1`` are m x c matrices (c columns solved simultaneously).
    Each step solves a linear system with B_j instead of forming its inverse.
    If a block norm exceeds ``overflow`` the sequence stops there and
    ``truncated_at`` records the last valid index.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    m = seq.block_size
    z = complex(z)
    u0 = np.asarray(u0, dtype=complex).reshape(m, -1)
    u1 = np.asarray(u1, dtype=complex).reshape(m, -1)
    if u0.shape != u1.shape:
        raise ValueError("u0 and u1 must have the same shape")

    if m == 1 and u0.shape[1] == 1:
        blocks, truncated = _scalar_path(seq, z, u0[0, 0], u1[0, 0], depth, overflow)
        return SolutionSequence(z, blocks, kind, truncated)

    eye = np.eye(m)
    out = np.empty((depth + 1,) + u0.shape, dtype=complex)
    out[0], out[1] = u0, u1
    truncated = None
    for j in range(1, depth):
        rhs = (z * eye - seq.a(j)) @ out[j] - seq.b(j - 1).conj().T @ out[j - 1]
        try:
            nxt = np.linalg.solve(seq.b(j), rhs)
        except np.linalg.LinAlgError:
            raise SingularBlockError(j) from None
        if not np.abs(nxt).max() <= overflow:
            truncated = j
            break
        out[j + 1] = nxt
    if truncated is not None:
        out = out[: truncated + 1]
    return SolutionSequence(z, out, kind, truncated)


def first_kind(seq: CoefficientSequence, z: complex, depth: int, **kw) -> SolutionSequence:
    """P_0 = I, P_1 = B_0^{-1}(zI - A_0)."""
    m = seq.block_size
    eye = np.eye(m, dtype=complex)
    u1 = np.linalg.solve(seq.b(0), complex(z) * eye - seq.a(0))
    return solve_recurrence(seq, z, eye, u1, depth, kind="first", **kw)


def second_kind(seq: CoefficientSequence, z: complex, depth: int, **kw) -> SolutionSequence:
    """Q_0 = O, Q_1 = B_0^{-1}."""
    m = seq.block_size
    u1 = np.linalg.solve(seq.b(0), np.eye(m, dtype=complex))
    return solve_recurrence(seq, z, np.zeros((m, m), dtype=complex), u1, depth, kind="second", **kw)


def apply_l(seq: CoefficientSequence, u) -> np.ndarray:
    """``(lu)_0 .. (lu)_{N-1}`` for a sequence of N + 1 blocks, row 0 included."""
    blocks = u.blocks if isinstance(u, SolutionSequence) else np.asarray(u, dtype=complex)
    if len(blocks) < 2:
        raise ValueError("need at least two blocks")
    n = len(blocks) - 1
    out = np.empty((n,) + blocks.shape[1:], dtype=complex)
    for j in range(n):
        row = seq.a(j) @ blocks[j] + seq.b(j) @ blocks[j + 1]
        if j > 0:
            row += seq.b(j - 1).conj().T @ blocks[j - 1]
        out[j] = row
    return out


def recurrence_residuals(seq: CoefficientSequence, u: SolutionSequence) -> np.ndarray:
    """Scaled residuals of rows 1..N-1; the invariant is ``<= 1e-10``."""
    lu = apply_l(seq, u)
    blocks = u.blocks
    res = np.zeros(max(len(blocks) - 2, 0))
    for j in range(1, len(blocks) - 1):
        scale = 1.0 + sum(np.linalg.norm(blocks[k], 2) for k in (j - 1, j, j + 1))
        scale *= 1.0 + max(np.linalg.norm(seq.a(j), 2), np.linalg.norm(seq.b(j), 2),
                           np.linalg.norm(seq.b(j - 1), 2), abs(u.z))
        res[j - 1] = np.linalg.norm(lu[j] - u.z * blocks[j], 2) / scale
    return res
