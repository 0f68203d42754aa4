"""Bit-packed ±1 vectors, permutations and candidate matrices.

Packing convention: entry ``j`` of an order-``m`` vector lives in bit
``m - 1 - j`` and a set bit means the entry is -1.  Entry 0 is the most
significant bit, so ascending ``bits`` is the lexicographic order of the
``+``/``-`` strings with ``+`` sorting first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, MatrixParseError, PreconditionError

MAX_ORDER = 128

_SIGN_CHARS = {"+": 1, "-": -1, "−": -1}


@dataclass(frozen=True, eq=False)
class SignVector:
    """A general ±1 vector of length ``order``."""

    order: int
    bits: int

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise DimensionError(f"vector order {self.order} outside 1..{MAX_ORDER}")
        if not 0 <= self.bits < (1 << self.order):
            raise ValueError(f"bits {self.bits:#x} do not fit order {self.order}")

    @classmethod
    def from_entries(cls, entries: Iterable[int]):
        entries = list(entries)
        bits = 0
        for e in entries:
            if e not in (1, -1):
                raise ValueError(f"entry {e!r} is not +1 or -1")
            bits = (bits << 1) | (e == -1)
        return cls(len(entries), bits)

    @classmethod
    def from_string(cls, text: str):
        try:
            return cls.from_entries(_SIGN_CHARS[c] for c in text.strip())
        except KeyError as exc:
            raise ValueError(f"bad sign character {exc.args[0]!r} in {text!r}") from None

    @property
    def negatives(self) -> int:
        """Number of -1 entries."""
        return self.bits.bit_count()

    def entries(self) -> tuple[int, ...]:
        m = self.order
        return tuple(-1 if (self.bits >> (m - 1 - j)) & 1 else 1 for j in range(m))

    def to_array(self) -> np.ndarray:
        return np.array(self.entries(), dtype=np.int8)

    def __getitem__(self, j: int) -> int:
        if not -self.order <= j < self.order:
            raise IndexError(j)
        j %= self.order
        return -1 if (self.bits >> (self.order - 1 - j)) & 1 else 1

    def __len__(self) -> int:
        return self.order

    def __neg__(self):
        flipped = self.bits ^ ((1 << self.order) - 1)
        if isinstance(self, ShVector):
            return ShVector(self.order, flipped)
        return SignVector(self.order, flipped)

    def __eq__(self, other):
        if not isinstance(other, SignVector):
            return NotImplemented
        return self.order == other.order and self.bits == other.bits

    def __hash__(self):
        return hash((self.order, self.bits))

    def __str__(self) -> str:
        return "".join("-" if e < 0 else "+" for e in self.entries())

    def __repr__(self) -> str:
        return f"{type(self).__name__}('{self}')"


@dataclass(frozen=True, eq=False, repr=False)
class ShVector(SignVector):
    """Balanced ±1 vector of order 4k: exactly 2k entries are -1."""

    def __post_init__(self):
        super().__post_init__()
        if self.order % 4:
            raise DimensionError(f"SH vector order must be a multiple of 4, got {self.order}")
        if self.bits.bit_count() != self.order // 2:
            raise ValueError(
                f"SH vector must have {self.order // 2} negative entries, "
                f"got {self.bits.bit_count()}"
            )


@dataclass(frozen=True, eq=False, repr=False)
class UnityVector(SignVector):
    """The all-ones vector; unchanged by every permutation."""

    bits: int = 0

    def __post_init__(self):
        super().__post_init__()
        if self.bits:
            raise ValueError("unity vector has no negative entries")


def _check_orders(a: SignVector, b: SignVector) -> None:
    if a.order != b.order:
        raise DimensionError(f"order mismatch: {a.order} vs {b.order}")


def inner_product(a: SignVector, b: SignVector) -> int:
    """Exact integer inner product via ``m - 2 * popcount(a ^ b)``."""
    _check_orders(a, b)
    return a.order - 2 * (a.bits ^ b.bits).bit_count()


def is_orthogonal(a: SignVector, b: SignVector) -> bool:
    return inner_product(a, b) == 0


@dataclass(frozen=True)
class Permutation:
    """A bijection on positions ``0..n-1``.

    Applying it to ``v`` gives ``out[j] = v[mapping[j]]``: output position
    ``j`` pulls its entry from position ``mapping[j]``.
    """

    mapping: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(int(i) for i in self.mapping))
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError(f"mapping {self.mapping} is not a bijection")

    @property
    def order(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_two_row(cls, top: Sequence[int], bottom: Sequence[int]) -> "Permutation":
        """Build from 1-based two-row notation where the entry at ``top[i]`` moves to ``bottom[i]``."""
        if len(top) != len(bottom):
            raise DimensionError("two-row notation needs rows of equal length")
        mapping = [0] * len(top)
        for src, dst in zip(top, bottom):
            mapping[dst - 1] = src - 1
        return cls(tuple(mapping))

    def inverse(self) -> "Permutation":
        inv = [0] * self.order
        for j, src in enumerate(self.mapping):
            inv[src] = j
        return Permutation(tuple(inv))

    def __call__(self, v):
        return apply_permutation(self, v)


def apply_permutation(sigma: Permutation, v):
    """Rearrange ``v`` by ``sigma``; sign vectors keep their class, sequences become tuples."""
    if len(v) != sigma.order:
        raise DimensionError(f"permutation order {sigma.order} vs vector order {len(v)}")
    if isinstance(v, SignVector):
        m = v.order
        bits = 0
        for j, src in enumerate(sigma.mapping):
            bits |= ((v.bits >> (m - 1 - src)) & 1) << (m - 1 - j)
        if isinstance(v, UnityVector):
            return v
        return type(v)(m, bits)
    return tuple(v[src] for src in sigma.mapping)


@dataclass(frozen=True)
class QshMatrix:
    """Candidate matrix: unity first column, then ``m - 1`` distinct SH vectors."""

    columns: tuple[SignVector, ...]

    def __post_init__(self):
        cols = tuple(self.columns)
        m = len(cols)
        if m == 0 or m % 4:
            raise DimensionError(f"QSH order must be a positive multiple of 4, got {m}")
        if m > MAX_ORDER:
            raise CapacityError(f"order {m} exceeds cap {MAX_ORDER}", required=m, limit=MAX_ORDER)
        if any(c.order != m for c in cols):
            raise DimensionError("every column must have the matrix order")
        if cols[0].bits != 0:
            raise ValueError("first column must be the unity vector")
        rest = tuple(c if isinstance(c, ShVector) else ShVector(c.order, c.bits) for c in cols[1:])
        if len({c.bits for c in rest}) != len(rest):
            raise ValueError("SH columns must be pairwise distinct")
        object.__setattr__(self, "columns", (UnityVector(m),) + rest)

    @classmethod
    def from_sh_columns(cls, vectors: Iterable[SignVector]) -> "QshMatrix":
        vectors = list(vectors)
        return cls((UnityVector(len(vectors) + 1),) + tuple(vectors))

    @classmethod
    def from_array(cls, arr) -> "QshMatrix":
        arr = np.asarray(arr)
        return cls(tuple(SignVector.from_entries(int(x) for x in arr[:, j]) for j in range(arr.shape[1])))

    @property
    def order(self) -> int:
        return len(self.columns)

    def to_array(self) -> np.ndarray:
        return np.column_stack([c.to_array() for c in self.columns])


@dataclass(frozen=True)
class ShMatrix:
    """A QSH matrix whose Gram matrix is exactly ``4k * I``."""

    inner: QshMatrix

    def __post_init__(self):
        if not is_hadamard(self.inner):
            raise PreconditionError("columns are not pairwise orthogonal")

    @classmethod
    def from_array(cls, arr) -> "ShMatrix":
        return cls(QshMatrix.from_array(arr))

    @classmethod
    def from_sh_columns(cls, vectors: Iterable[SignVector]) -> "ShMatrix":
        return cls(QshMatrix.from_sh_columns(vectors))

    @property
    def order(self) -> int:
        return self.inner.order

    @property
    def columns(self) -> tuple[SignVector, ...]:
        return self.inner.columns

    def to_array(self) -> np.ndarray:
        return self.inner.to_array()


def _as_array(Q) -> np.ndarray:
    if isinstance(Q, ShMatrix):
        Q = Q.inner
    if isinstance(Q, QshMatrix):
        return Q.to_array()
    return np.asarray(Q)


def gram_matrix(Q) -> np.ndarray:
    """``Q^T Q`` as an int64 array; accepts QSH/SH matrices or raw ±1 arrays."""
    if isinstance(Q, ShMatrix):
        Q = Q.inner
    if isinstance(Q, QshMatrix):
        cols = Q.columns
        m = Q.order
        D = np.empty((m, m), dtype=np.int64)
        for i, a in enumerate(cols):
            D[i, i] = m
            for j in range(i + 1, m):
                D[i, j] = D[j, i] = m - 2 * (a.bits ^ cols[j].bits).bit_count()
        return D
    A = np.asarray(Q, dtype=np.int64)
    return A.T @ A


def is_hadamard(Q) -> bool:
    """True iff ``Q^T Q == m I``."""
    if isinstance(Q, ShMatrix):
        return True
    if isinstance(Q, QshMatrix):
        cols = Q.columns
        half = Q.order // 2
        return all(
            (cols[i].bits ^ cols[j].bits).bit_count() == half
            for i in range(len(cols))
            for j in range(i + 1, len(cols))
        )
    A = np.asarray(Q)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    m = A.shape[0]
    return bool(np.array_equal(gram_matrix(A), m * np.eye(m, dtype=np.int64)))


def sylvester(power: int) -> np.ndarray:
    """Kronecker-doubled Hadamard matrix of order ``2**power`` as an int8 array.

    Rows and columns start with all ones, so for ``power >= 2`` the result
    wraps directly with :meth:`ShMatrix.from_array`.
    """
    if power < 1:
        raise ValueError("power must be >= 1")
    if 2**power > MAX_ORDER:
        raise CapacityError(f"order 2**{power} exceeds cap {MAX_ORDER}", required=2**power, limit=MAX_ORDER)
    H = np.array([[1, 1], [1, -1]], dtype=np.int8)
    base = H
    for _ in range(power - 1):
        H = np.kron(H, base)
    return H


def format_matrix(Q) -> str:
    """Text form: ``order m`` then ``m`` rows of ``+``/``-``."""
    A = _as_array(Q)
    lines = [f"order {A.shape[0]}"]
    lines.extend("".join("+" if x > 0 else "-" for x in row) for row in A)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    """Parse the text form back into a square int8 ±1 array."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MatrixParseError("empty input", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "order":
        raise MatrixParseError("expected header 'order m'", 1, 1)
    try:
        m = int(head[1])
    except ValueError:
        raise MatrixParseError(f"bad order {head[1]!r}", 1, len(head[0]) + 2) from None
    if m < 1:
        raise MatrixParseError(f"order must be positive, got {m}", 1)
    body = lines[1:]
    if len(body) != m:
        raise MatrixParseError(f"expected {m} rows, found {len(body)}", len(lines) + 1 if len(body) < m else m + 2)
    A = np.empty((m, m), dtype=np.int8)
    for r, line in enumerate(body):
        row = line.rstrip()
        for c, ch in enumerate(row):
            if ch not in _SIGN_CHARS:
                raise MatrixParseError(f"unexpected character {ch!r}", r + 2, c + 1)
        if len(row) != m:
            raise MatrixParseError(f"expected {m} entries, found {len(row)}", r + 2, min(len(row), m) + 1)
        A[r] = [_SIGN_CHARS[ch] for ch in row]
    return A
