"""Kernel table K_ji = Q_j(0) P_i(0)* - P_j(0) Q_i(0)* and Christoffel-Darboux checks.

Two independent routes fill the lower triangle 0 <= i <= j <= N:

* ``direct`` evaluates the defining formula from the first- and second-kind
  solutions at z = 0;
* ``recursive`` uses K_ji = K0_ji - sum_{k=i}^{j} K0_jk A_k K_ki, where K0 is
  the kernel of the same matrix with all A_j = 0 (closed-form products of B's).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import CoefficientSequence
from .polys import first_kind, second_kind

NORMS = ("spectral", "frobenius")
# entries are products of two solution blocks; keep each factor below sqrt of the double range
PRODUCT_GUARD = 1e150


class InconclusiveError(ArithmeticError):
    """The computation hit the overflow guard before the requested index."""


def block_norm(x: np.ndarray, norm: str = "spectral") -> np.ndarray:
    """Spectral or Frobenius norm over the last two axes."""
    x = np.asarray(x)
    if x.shape[-1] == 1 and x.shape[-2] == 1:
        return np.abs(x[..., 0, 0])
    if norm == "spectral":
        return np.linalg.norm(x, ord=2, axis=(-2, -1))
    if norm == "frobenius":
        return np.linalg.norm(x, ord="fro", axis=(-2, -1))
    raise ValueError(f"unknown norm {norm!r}; expected one of {NORMS}")


def _tri(j: int) -> int:
    return j * (j + 1) // 2


@dataclass
class KernelTable:
    """Packed lower triangle of m x m blocks K_ji, 0 <= i <= j <= depth."""

    depth: int
    entries: np.ndarray
    route: str
    note: str = ""

    @classmethod
    def empty(cls, depth: int, m: int, route: str) -> "KernelTable":
        return cls(depth, np.zeros((_tri(depth + 1), m, m), dtype=complex), route)

    @property
    def m(self) -> int:
        return self.entries.shape[-1]

    def __getitem__(self, key) -> np.ndarray:
        j, i = key
        if not 0 <= i <= j <= self.depth:
            raise IndexError(f"K[{j},{i}] outside the stored triangle (depth {self.depth})")
        return self.entries[_tri(j) + i]

    def __setitem__(self, key, value) -> None:
        j, i = key
        self.entries[_tri(j) + i] = value

    def row(self, j: int) -> np.ndarray:
        """K_j0 .. K_jj."""
        return self.entries[_tri(j): _tri(j) + j + 1]

    def column(self, i: int) -> np.ndarray:
        """K_ii .. K_Ni."""
        return np.stack([self[j, i] for j in range(i, self.depth + 1)])

    def norms(self, norm: str = "spectral") -> np.ndarray:
        return block_norm(self.entries, norm)

    def dense_norms(self, norm: str = "spectral") -> np.ndarray:
        """(depth+1) x (depth+1) array with ||K_ji|| below the diagonal, zeros above."""
        out = np.zeros((self.depth + 1, self.depth + 1))
        flat = self.norms(norm)
        for j in range(self.depth + 1):
            out[j, : j + 1] = flat[_tri(j): _tri(j) + j + 1]
        return out


def k_direct(seq: CoefficientSequence, depth: int) -> KernelTable:
    """Kernel table from K_ji = Q_j(0) P_i(0)* - P_j(0) Q_i(0)*.

    If a solution block exceeds ``PRODUCT_GUARD`` the table is cut at the last
    index below it and the reason is kept in ``note``.  The diagonal is set to
    the initial condition K_ii = O.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    P = first_kind(seq, 0.0, depth, overflow=PRODUCT_GUARD)
    Q = second_kind(seq, 0.0, depth, overflow=PRODUCT_GUARD)
    n = min(P.depth, Q.depth)
    table = KernelTable.empty(n, seq.block_size, "direct")
    if n < depth:
        table.note = f"truncated at {n} by the overflow guard"
    Pc = P.blocks[: n + 1].conj()
    Qc = Q.blocks[: n + 1].conj()
    for j in range(1, n + 1):
        row = (np.einsum("ab,icb->iac", Q.blocks[j], Pc[:j])
               - np.einsum("ab,icb->iac", P.blocks[j], Qc[:j]))
        table.entries[_tri(j): _tri(j) + j] = row
    return table


def kernel_row_sums_streamed(seq: CoefficientSequence, depth: int, norm: str = "spectral",
                             first_column: int = 1, budget: int = 2 ** 22):
    """r_j = sum_{first_column <= i < j} ||K_ji|| for j = 0..n without storing the table.

    Rows are formed in chunks of about ``budget`` block entries.  Returns
    ``(row_sums, note)``; ``n`` < ``depth`` when the product guard cut the
    solutions short (explained in ``note``).
    """
    P = first_kind(seq, 0.0, depth, overflow=PRODUCT_GUARD).blocks
    Q = second_kind(seq, 0.0, depth, overflow=PRODUCT_GUARD).blocks
    n = min(len(P), len(Q)) - 1
    note = f"truncated at {n} by the overflow guard" if n < depth else ""
    m = seq.block_size
    Pc, Qc = P[: n + 1].conj(), Q[: n + 1].conj()
    rows = np.zeros(n + 1)
    j0 = first_column + 1
    while j0 <= n:
        chunk = max(1, budget // max(j0 * m * m, 1))
        js = np.arange(j0, min(j0 + chunk, n + 1))
        width = js[-1]
        cols = slice(first_column, width)
        if m == 1:
            norms = np.abs(np.outer(Q[js, 0, 0], Pc[cols, 0, 0]) - np.outer(P[js, 0, 0], Qc[cols, 0, 0]))
        else:
            K = np.einsum("jab,icb->jiac", Q[js], Pc[cols]) - np.einsum("jab,icb->jiac", P[js], Qc[cols])
            norms = block_norm(K, norm)
        mask = np.arange(first_column, width)[None, :] < js[:, None]
        rows[js] = np.where(mask, norms, 0.0).sum(axis=1)
        j0 = js[-1] + 1
    return rows, note


def k_direct_entry(seq: CoefficientSequence, j: int, i: int, P=None, Q=None) -> np.ndarray:
    """The defining formula for any index order (used for the antisymmetry check)."""
    n = max(i, j, 1)
    P = P if P is not None else first_kind(seq, 0.0, n).blocks
    Q = Q if Q is not None else second_kind(seq, 0.0, n).blocks
    return Q[j] @ P[i].conj().T - P[j] @ Q[i].conj().T


def k0_table(seq: CoefficientSequence, depth: int) -> KernelTable:
    """K0_{i+2s,i} = O and K0_{i+2s+1,i} = (-1)^s B_{i+2s}^{-1} B*_{i+2s-1} ... B*_{i+1} B_i^{-1}."""
    m = seq.block_size
    table = KernelTable.empty(depth, m, "closed_form")
    eye = np.eye(m)
    for i in range(depth):
        cur = np.linalg.solve(seq.b(i), eye)
        table[i + 1, i] = cur
        for j in range(i + 3, depth + 1, 2):
            # K0_{j,i} = -B_{j-1}^{-1} B*_{j-2} K0_{j-2,i}
            cur = -np.linalg.solve(seq.b(j - 1), seq.b(j - 2).conj().T @ cur)
            table[j, i] = cur
    return table


def k_recursive(seq: CoefficientSequence, depth: int) -> KernelTable:
    """Kernel table from the K0 closed forms and the A-correction sum.

    Column i is filled with j ascending, so every K_ki with k < j is available
    when K_ji is formed.  Cost is O(depth^3) block products.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    k0 = k0_table(seq, depth)
    A, _ = seq.arrays(depth + 1)
    table = KernelTable.empty(depth, seq.block_size, "recursive")
    for i in range(depth):
        for j in range(i + 1, depth + 1):
            # K0_jk = 0 unless j - k is odd; K_ii = 0 and K0_jj = 0.
            ks = np.arange(j - 1, i, -2)
            value = k0[j, i].copy()
            if len(ks):
                k0_jk = k0.entries[_tri(j) + ks]
                k_ki = table.entries[_tri(ks) + i]
                value -= np.einsum("kab,kbc,kcd->ad", k0_jk, A[ks], k_ki)
            table[j, i] = value
    return table


def _inv_stack(seq: CoefficientSequence, n: int):
    A, B = seq.arrays(n)
    return A, B, np.linalg.inv(B)


def diagonal_terms(seq: CoefficientSequence, j: int, n_max: int) -> list[np.ndarray]:
    """Component products of K_{n+j,n} for n = 0..n_max as stacks.

    j = 1, 2 return one stack.  j = 3 returns the two products named in the
    second corollary (B^{-1}B*B^{-1} and B^{-1}AB^{-1}AB^{-1}); j = 4 returns
    the two groups of the third corollary.  ``sum`` with the right signs gives
    the kernel entry (see :func:`k_closed_form`).
    """
    if j not in (1, 2, 3, 4):
        raise ValueError(f"closed forms exist for j in 1..4, got {j}")
    A, B, Bi = _inv_stack(seq, n_max + j + 1)
    Bh = np.conj(np.swapaxes(B, -1, -2))
    n = np.arange(n_max + 1)
    mm = np.matmul
    if j == 1:
        return [Bi[n]]
    if j == 2:
        return [mm(Bi[n + 1], mm(A[n + 1], Bi[n]))]
    if j == 3:
        t1 = mm(Bi[n + 2], mm(Bh[n + 1], Bi[n]))
        t2 = mm(Bi[n + 2], mm(A[n + 2], mm(Bi[n + 1], mm(A[n + 1], Bi[n]))))
        return [t1, t2]
    s1 = (mm(Bi[n + 3], mm(Bh[n + 2], mm(Bi[n + 1], mm(A[n + 1], Bi[n]))))
          + mm(Bi[n + 3], mm(A[n + 3], mm(Bi[n + 2], mm(Bh[n + 1], Bi[n])))))
    s2 = mm(Bi[n + 3], mm(A[n + 3], mm(Bi[n + 2], mm(A[n + 2], mm(Bi[n + 1], mm(A[n + 1], Bi[n]))))))
    return [s1, s2]


_SIGNS = {1: (1,), 2: (-1,), 3: (-1, 1), 4: (1, -1)}


def k_closed_form(seq: CoefficientSequence, n: int, j: int) -> np.ndarray:
    """Explicit product formula for K_{n+j,n}, j in 1..4.

    K_{n+2,n} carries a minus sign: -B_{n+1}^{-1} A_{n+1} B_n^{-1}.
    """
    if j not in (1, 2, 3, 4):
        raise ValueError(f"closed forms exist for j in 1..4, got {j}")
    m = seq.block_size
    eye = np.eye(m)

    def inv(k, x=eye):
        return np.linalg.solve(seq.b(k), x)

    a = seq.a
    bh = lambda k: seq.b(k).conj().T  # noqa: E731
    if j == 1:
        return inv(n)
    if j == 2:
        return -inv(n + 1, a(n + 1) @ inv(n))
    if j == 3:
        return (-inv(n + 2, bh(n + 1) @ inv(n))
                + inv(n + 2, a(n + 2) @ inv(n + 1, a(n + 1) @ inv(n))))
    return (inv(n + 3, bh(n + 2) @ inv(n + 1, a(n + 1) @ inv(n)))
            + inv(n + 3, a(n + 3) @ inv(n + 2, bh(n + 1) @ inv(n)))
            - inv(n + 3, a(n + 3) @ inv(n + 2, a(n + 2) @ inv(n + 1, a(n + 1) @ inv(n)))))


def christoffel_darboux_residual(seq: CoefficientSequence, z: complex, n: int, P=None) -> float:
    """Relative residual of the Christoffel-Darboux identity at order n.

    (conj(z) - z) sum_{j<=n} P_j* P_j  =  P_{n+1}* B_n* P_n - P_n* B_n P_{n+1}

    The difference is divided by ``|z - conj(z)| sum ||P_j||^2 +
    2 ||P_{n+1}|| ||B_n|| ||P_n||``.  For real z this is the relative size of
    the Wronskian form alone.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if P is None:
        P = first_kind(seq, z, n + 1)
    blocks = P.blocks
    if len(blocks) < n + 2:
        raise InconclusiveError(f"P(z) overflowed before index {n + 1}")
    z = complex(z)
    Pn, Pn1, Bn = blocks[n], blocks[n + 1], seq.b(n)
    gram = np.einsum("jba,jbc->ac", blocks[: n + 1].conj(), blocks[: n + 1])
    lhs = (z.conjugate() - z) * gram
    rhs = Pn1.conj().T @ Bn.conj().T @ Pn - Pn.conj().T @ Bn @ Pn1
    spec = lambda x: np.linalg.norm(x, 2)  # noqa: E731
    scale = (abs(z - z.conjugate()) * sum(spec(b) ** 2 for b in blocks[: n + 1])
             + 2 * spec(Pn1) * spec(Bn) * spec(Pn))
    return float(spec(lhs - rhs) / scale)
