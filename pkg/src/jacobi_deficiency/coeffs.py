"""Coefficient sequences of scalar, block and band Jacobi matrices.

A block Jacobi matrix is described by the pairs ``(A_j, B_j)`` of m x m
blocks, ``A_j`` self-adjoint and ``B_j`` invertible::

    | A_0   B_0   0    ... |
    | B_0*  A_1   B_1  ... |
    | 0     B_1*  A_2  ... |

Sequences are closed-form generators ``j -> BlockPair`` so their depth is
unbounded; the ``table`` family is the exception and stops at its length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

HERMITIAN_RTOL = 1e-12
INVERTIBLE_RTOL = 1e-10

FAMILIES = ("constant", "power", "alternating_power", "table", "example1", "band_wrap")


class CoefficientError(ValueError):
    """Raised when a block violates the Jacobi-matrix invariants."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def _as_block(x, m: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise CoefficientError(f"block must be square, got shape {arr.shape}")
    if m is not None and arr.shape[0] != m:
        raise CoefficientError(f"expected {m}x{m} block, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class BlockPair:
    """Diagonal block ``a`` = A_j and superdiagonal block ``b`` = B_j."""

    a: np.ndarray
    b: np.ndarray
    index: int
    hermitian_rtol: float = field(default=HERMITIAN_RTOL, repr=False, compare=False)
    invertible_rtol: float = field(default=INVERTIBLE_RTOL, repr=False, compare=False)

    def __post_init__(self):
        a = _as_block(self.a)
        b = _as_block(self.b, a.shape[0])
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        j = self.index
        if np.max(np.abs(a - a.conj().T)) > self.hermitian_rtol * (1.0 + np.max(np.abs(a))):
            raise CoefficientError(f"A_{j} is not self-adjoint", j)
        if a.shape[0] == 1:
            ok = b[0, 0] != 0 and np.isfinite(b[0, 0])
        else:
            s = np.linalg.svd(b, compute_uv=False)
            ok = s[-1] > self.invertible_rtol * s[0] and np.isfinite(s[0])
        if not ok:
            raise CoefficientError(f"B_{j} is numerically singular", j)

    @property
    def m(self) -> int:
        return self.a.shape[0]


@dataclass
class CoefficientSequence:
    """Lazily evaluated map ``j -> BlockPair``.

    Blocks are memoised after the first evaluation, so repeated queries
    return identical arrays.
    """

    block_size: int
    generator: Callable[[int], BlockPair]
    family_tag: tuple = ("custom",)
    length: int | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __call__(self, j: int) -> BlockPair:
        return self.block(j)

    def block(self, j: int) -> BlockPair:
        j = int(j)
        if j < 0:
            raise IndexError("negative block index")
        if self.length is not None and j >= self.length:
            raise IndexError(f"{self.family_tag[0]} sequence has only {self.length} blocks (asked for {j})")
        pair = self._cache.get(j)
        if pair is None:
            pair = self.generator(j)
            if pair.m != self.block_size:
                raise CoefficientError(f"block {j} has size {pair.m}, expected {self.block_size}", j)
            self._cache[j] = pair
        return pair

    def a(self, j: int) -> np.ndarray:
        return self.block(j).a

    def b(self, j: int) -> np.ndarray:
        """B_j, with the convention B_{-1} = O."""
        if j < 0:
            return np.zeros((self.block_size, self.block_size), dtype=complex)
        return self.block(j).b

    def arrays(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Stacks ``(A_0..A_{n-1}, B_0..B_{n-1})`` with shape (n, m, m)."""
        m = self.block_size
        A = np.empty((n, m, m), dtype=complex)
        B = np.empty((n, m, m), dtype=complex)
        for j in range(n):
            pair = self.block(j)
            A[j] = pair.a
            B[j] = pair.b
        return A, B

    def scalar_arrays(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Scalar ``(a_j, b_j)`` arrays for an m = 1 sequence."""
        if self.block_size != 1:
            raise ValueError("scalar_arrays needs block size 1")
        A, B = self.arrays(n)
        return A[:, 0, 0], B[:, 0, 0]

    def check(self, depth: int) -> None:
        """Evaluate blocks 0..depth, raising on the first invariant violation."""
        for j in range(depth + 1):
            self.block(j)

    def expand(self, n_blocks: int) -> np.ndarray:
        """Dense (n m) x (n m) leading section of the matrix."""
        m = self.block_size
        out = np.zeros((n_blocks * m, n_blocks * m), dtype=complex)
        for j in range(n_blocks):
            s = slice(j * m, (j + 1) * m)
            out[s, s] = self.a(j)
            if j + 1 < n_blocks:
                t = slice((j + 1) * m, (j + 2) * m)
                out[s, t] = self.b(j)
                out[t, s] = self.b(j).conj().T
        return out


@dataclass(frozen=True)
class BandSpec:
    """Hermitian band matrix ``c_ij`` with bandwidth m (c_ij = 0 for |i - j| > m)."""

    bandwidth: int
    entry: Callable[[int, int], complex]

    def __call__(self, i: int, j: int) -> complex:
        if i < 0 or j < 0 or abs(i - j) > self.bandwidth:
            return 0j
        return complex(self.entry(i, j))

    def check(self, depth: int, rtol: float = HERMITIAN_RTOL) -> None:
        m = self.bandwidth
        for i in range(depth + 1):
            for j in range(i, i + m + 1):
                cij, cji = self(i, j), self(j, i)
                if abs(cij - np.conj(cji)) > rtol * (1.0 + abs(cij)):
                    raise CoefficientError(f"band entry ({i},{j}) breaks Hermitian symmetry", i)
            if self(i, i + m) == 0:
                raise CoefficientError(f"outer band entry c[{i},{i + m}] is zero", i)

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(max(0, i - self.bandwidth), min(n, i + self.bandwidth + 1)):
                out[i, j] = self(i, j)
        return out


def band_to_block(spec: BandSpec, **tolerances) -> CoefficientSequence:
    """Reinterpret a band matrix of bandwidth m as a block Jacobi matrix.

    A_j is the j-th diagonal m x m block and B_j the block right of it; B_j
    is lower triangular with diagonal c[km + r, km + r + m].

    A nonzero diagonal already makes such a B_j invertible, so the
    singular-value ratio test is off unless ``invertible_rtol`` is passed:
    for growing bands like (j+1)^2 that ratio falls below 1e-10 after a few
    hundred blocks while the blocks stay exactly invertible.
    """
    m = spec.bandwidth
    tolerances.setdefault("invertible_rtol", 0.0)

    def gen(j: int) -> BlockPair:
        base = j * m
        a = np.array([[spec(base + r, base + s) for s in range(m)] for r in range(m)])
        b = np.array([[spec(base + r, base + m + s) for s in range(m)] for r in range(m)])
        for r in range(m):
            if b[r, r] == 0:
                raise CoefficientError(f"outer band entry c[{base + r},{base + r + m}] is zero", j)
        return BlockPair(a, b, j, **tolerances)

    return CoefficientSequence(m, gen, ("band_wrap", m))


def block_to_band(seq: CoefficientSequence) -> BandSpec:
    """Inverse of :func:`band_to_block` (entries read back from the blocks)."""
    m = seq.block_size

    def entry(i: int, j: int) -> complex:
        if i > j:
            return np.conj(entry(j, i))
        bi, r = divmod(i, m)
        bj, s = divmod(j, m)
        if bi == bj:
            return seq.a(bi)[r, s]
        if bj == bi + 1:
            return seq.b(bi)[r, s]
        return 0j

    return BandSpec(m, entry)


def _positive_scalar(name: str, value: float) -> float:
    value = float(value)
    if not value > 0:
        raise CoefficientError(f"{name} must be positive for scalar families, got {value}")
    return value


def _constant(params: Mapping) -> CoefficientSequence:
    a = _as_block(params.get("a", 0.0))
    b = _as_block(params.get("b", 1.0), a.shape[0])
    if a.shape[0] == 1:
        if b[0, 0].imag != 0:
            raise CoefficientError("scalar constant family needs a real b")
        _positive_scalar("b", b[0, 0].real)
    return CoefficientSequence(a.shape[0], lambda j: BlockPair(a, b, j), ("constant", dict(params)))


def _power(params: Mapping) -> CoefficientSequence:
    a = float(params.get("a", 0.0))
    b = _positive_scalar("b", params.get("b", 1.0))
    alpha = float(params.get("alpha", 1.0))
    beta = float(params.get("beta", 0.0))

    def gen(j: int) -> BlockPair:
        return BlockPair(a * (j + 1.0) ** beta, b * (j + 1.0) ** alpha, j)

    return CoefficientSequence(1, gen, ("power", dict(a=a, b=b, alpha=alpha, beta=beta)))


def _alternating_power(params: Mapping) -> CoefficientSequence:
    a = float(params.get("a", 1.0))
    b = _positive_scalar("b", params.get("b", 1.0))
    alpha = float(params.get("alpha", 2.0))

    def gen(j: int) -> BlockPair:
        scale = (j + 1.0) ** alpha
        return BlockPair((-1) ** j * a * scale, b * scale, j)

    return CoefficientSequence(1, gen, ("alternating_power", dict(a=a, b=b, alpha=alpha)))


def _parse_complex(token: str, lineno: int) -> complex:
    try:
        return complex(token.replace("i", "j"))
    except ValueError:
        raise CoefficientError(f"line {lineno}: cannot read {token!r} as a complex number") from None


def read_block_table(path) -> list[tuple[np.ndarray, np.ndarray]]:
    """Read blocks A_0, B_0, A_1, B_1, ... from a text file.

    Entries are whitespace-separated literals such as ``1``, ``-2.5e3``,
    ``1+2i`` or ``-i``; one block row per line, blocks separated by blank
    lines, ``#`` starts a comment.
    """
    blocks, rows, start = [], [], 0
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines() + [""]
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            # a comment-only line does not end a block
            if rows and not raw.strip():
                blocks.append((start, rows))
                rows = []
            continue
        if not rows:
            start = lineno
        rows.append([_parse_complex(t, lineno) for t in line.split()])
    if not blocks:
        raise CoefficientError(f"{path}: no blocks found")
    mats = []
    for lineno, rows in blocks:
        m = len(rows)
        if any(len(r) != m for r in rows):
            raise CoefficientError(f"{path}: block starting at line {lineno} is not square")
        mats.append(np.array(rows, dtype=complex))
    if len(mats) % 2:
        raise CoefficientError(f"{path}: odd number of blocks; expected pairs A_j, B_j")
    if len({x.shape for x in mats}) != 1:
        raise CoefficientError(f"{path}: blocks have different sizes")
    return [(mats[2 * j], mats[2 * j + 1]) for j in range(len(mats) // 2)]


def _table(params: Mapping) -> CoefficientSequence:
    blocks = params.get("blocks")
    if blocks is None and "path" in params:
        blocks = read_block_table(params["path"])
    if not blocks:
        raise CoefficientError("table family needs a non-empty list of (A, B) pairs")
    pairs = [(_as_block(a), _as_block(b)) for a, b in blocks]
    m = pairs[0][0].shape[0]
    for j, (a, b) in enumerate(pairs):
        if a.shape[0] != m or b.shape[0] != m:
            raise CoefficientError(f"table block {j} has inconsistent size", j)
    tag = ("table", {"length": len(pairs), **({"path": str(params["path"])} if "path" in params else {})})
    return CoefficientSequence(m, lambda j: BlockPair(*pairs[j], j), tag, length=len(pairs))


def example1_band(p: int, m: int) -> BandSpec:
    """Band matrix J_p + J_m: c[j, j+p] = (j+1)^2 and c[j, j+m] = 1."""

    def entry(i: int, j: int) -> complex:
        lo, d = min(i, j), abs(i - j)
        value = 0.0
        if d == p:
            value += (lo + 1.0) ** 2
        if d == m:
            value += 1.0
        return value

    return BandSpec(m, entry)


def _example1(params: Mapping) -> CoefficientSequence:
    p = int(params.get("p", 1))
    m = int(params.get("m", 2))
    if not 1 <= p <= m - 1:
        raise CoefficientError(f"example1 needs 1 <= p <= m - 1, got p={p}, m={m}")
    seq = band_to_block(example1_band(p, m))
    seq.family_tag = ("example1", {"p": p, "m": m})
    return seq


def make_family(family_tag: str, parameters: Mapping | None = None) -> CoefficientSequence:
    """Build a named coefficient family.

    ``constant``: A_j = a, B_j = b (scalars or square matrices).
    ``power``: a_n = a (n+1)^beta, b_n = b (n+1)^alpha.
    ``alternating_power``: a_n = (-1)^n a (n+1)^alpha, b_n = b (n+1)^alpha.
    ``table``: explicit ``blocks=[(A_0, B_0), ...]`` or a block file ``path``.
    ``example1``: blocks of J_p + J_m with parameters ``p``, ``m``.
    ``band_wrap``: a :class:`BandSpec` given as ``spec``.
    """
    params = dict(parameters or {})
    builders = {
        "constant": _constant,
        "power": _power,
        "alternating_power": _alternating_power,
        "table": _table,
        "example1": _example1,
        "band_wrap": lambda p: band_to_block(p["spec"]),
    }
    try:
        builder = builders[family_tag]
    except KeyError:
        raise CoefficientError(f"unknown family {family_tag!r}; expected one of {FAMILIES}") from None
    return builder(params)


def scalar_sequence(a: Sequence[float], b: Sequence[float]) -> CoefficientSequence:
    """Table-backed scalar sequence from explicit ``a_j``, ``b_j`` values."""
    return make_family("table", {"blocks": list(zip(a, b))})


def random_blocks(m: int, depth: int, rng: np.random.Generator, *, sv_range=(0.5, 2.0), a_scale=0.5,
                  real=False) -> CoefficientSequence:
    """Random well-conditioned block sequence (table family).

    B_j = U diag(s) V with s uniform in ``sv_range`` and U, V Haar unitary;
    A_j is Hermitian with spectral norm ``a_scale``.
    """

    def unitary():
        z = rng.standard_normal((m, m)) + (0 if real else 1j) * rng.standard_normal((m, m))
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    blocks = []
    for _ in range(depth):
        s = rng.uniform(*sv_range, size=m)
        b = unitary() @ np.diag(s) @ unitary()
        h = rng.standard_normal((m, m)) + (0 if real else 1j) * rng.standard_normal((m, m))
        h = h + h.conj().T
        h *= a_scale / max(np.linalg.norm(h, 2), 1e-300)
        blocks.append((h, b))
    return make_family("table", {"blocks": blocks})
