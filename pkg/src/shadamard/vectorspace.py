"""Families of balanced ±1 vectors and the orthogonal set of an SH vector."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations, product
from math import comb
from typing import Iterator

import numpy as np

from .core import Permutation, ShVector, SignVector, UnityVector
from .errors import CapacityError

ENUMERATION_CAP = 10**7


class FamilyKind(enum.Enum):
    UNITY = "unity"
    OHH = "ohh"
    HSH = "hsh"
    OSH = "osh"
    PSH = "psh"
    SH = "sh"


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")


def _check_cap(count: int, cap: int, what: str) -> None:
    if count > cap:
        raise CapacityError(
            f"enumerating {what} needs {count} vectors, cap is {cap}", required=count, limit=cap
        )


def _balanced_bits(n: int) -> Iterator[int]:
    """All n-bit words with n/2 bits set, ascending (lexicographic in entries)."""
    half = n // 2
    full = (1 << n) - 1
    for plus in combinations(range(n), half):
        word = full
        for j in plus:
            word ^= 1 << (n - 1 - j)
        yield word


def ohh_vector(k: int) -> SignVector:
    """Order-2k vector: k entries of -1 followed by k of +1."""
    _check_k(k)
    return SignVector(2 * k, ((1 << k) - 1) << k)


def osh_vector(k: int) -> ShVector:
    """Order-4k vector: 2k entries of -1 followed by 2k of +1."""
    _check_k(k)
    return ShVector(4 * k, ((1 << 2 * k) - 1) << 2 * k)


def enumerate_hsh_vectors(k: int, cap: int = ENUMERATION_CAP) -> Iterator[SignVector]:
    """Balanced vectors of order 2k, lexicographic."""
    _check_k(k)
    _check_cap(comb(2 * k, k), cap, f"HSH vectors for k={k}")
    n = 2 * k
    return (SignVector(n, b) for b in _balanced_bits(n))


def enumerate_sh_vectors(k: int, cap: int = ENUMERATION_CAP) -> Iterator[ShVector]:
    """All C(4k, 2k) SH vectors of order 4k, lexicographic."""
    _check_k(k)
    _check_cap(comb(4 * k, 2 * k), cap, f"SH vectors for k={k}")
    n = 4 * k
    return (ShVector(n, b) for b in _balanced_bits(n))


def enumerate_psh_vectors(k: int, cap: int = ENUMERATION_CAP) -> Iterator[ShVector]:
    """Order-4k vectors balanced separately on each half, lexicographic."""
    _check_k(k)
    _check_cap(comb(2 * k, k) ** 2, cap, f"PSH vectors for k={k}")
    n = 2 * k
    halves = list(_balanced_bits(n))
    return (ShVector(2 * n, (left << n) | right) for left, right in product(halves, halves))


@dataclass(frozen=True)
class VectorFamily:
    """A lazily enumerated family of vectors for a given k."""

    kind: FamilyKind
    k: int

    def __len__(self) -> int:
        k = self.k
        return {
            FamilyKind.UNITY: 1,
            FamilyKind.OHH: 1,
            FamilyKind.OSH: 1,
            FamilyKind.HSH: comb(2 * k, k),
            FamilyKind.PSH: comb(2 * k, k) ** 2,
            FamilyKind.SH: comb(4 * k, 2 * k),
        }[self.kind]

    def members(self, cap: int = ENUMERATION_CAP) -> Iterator[SignVector]:
        k = self.k
        if self.kind is FamilyKind.UNITY:
            return iter([UnityVector(4 * k)])
        if self.kind is FamilyKind.OHH:
            return iter([ohh_vector(k)])
        if self.kind is FamilyKind.OSH:
            return iter([osh_vector(k)])
        if self.kind is FamilyKind.HSH:
            return enumerate_hsh_vectors(k, cap)
        if self.kind is FamilyKind.PSH:
            return enumerate_psh_vectors(k, cap)
        return enumerate_sh_vectors(k, cap)

    def __iter__(self):
        return self.members()


def osh_to(v: ShVector) -> Permutation:
    """The canonical permutation taking the OSH vector onto ``v``.

    The -1 block of the OSH vector fills the -1 positions of ``v`` in
    increasing order, and the +1 block fills the +1 positions likewise.
    """
    m = v.order
    half = m // 2
    mapping = [0] * m
    neg = pos = 0
    for j, e in enumerate(v.entries()):
        if e < 0:
            mapping[j] = neg
            neg += 1
        else:
            mapping[j] = half + pos
            pos += 1
    return Permutation(tuple(mapping))


def _scatter_table(n: int, targets: list[int], m: int) -> dict[int, int]:
    # Map each balanced n-bit half onto the chosen positions of an m-bit word.
    table = {}
    for word in _balanced_bits(n):
        out = 0
        for i, dst in enumerate(targets):
            if (word >> (n - 1 - i)) & 1:
                out |= 1 << (m - 1 - dst)
        table[word] = out
    return table


def orthogonal_set(v: ShVector, cap: int = ENUMERATION_CAP) -> list[ShVector]:
    """The C(2k,k)^2 SH vectors orthogonal to ``v``, as images of the PSH family.

    Equivalent to applying :func:`osh_to` to every PSH vector, but done with
    per-half lookup tables instead of one permutation per member.
    """
    m = v.order
    k = m // 4
    _check_cap(comb(2 * k, k) ** 2, cap, f"orthogonal set for k={k}")
    entries = v.entries()
    neg_positions = [j for j, e in enumerate(entries) if e < 0]
    pos_positions = [j for j, e in enumerate(entries) if e > 0]
    left = _scatter_table(2 * k, neg_positions, m)
    right = _scatter_table(2 * k, pos_positions, m)
    out = sorted(a | b for a in left.values() for b in right.values())
    return [ShVector(m, b) for b in out]


def random_sh_vector(k: int, rng: np.random.Generator) -> ShVector:
    """Uniform SH vector: choose 2k of the 4k positions for -1 by partial shuffle."""
    _check_k(k)
    m = 4 * k
    bits = 0
    for j in rng.choice(m, size=2 * k, replace=False):
        bits |= 1 << (m - 1 - int(j))
    return ShVector(m, bits)


def random_sh_words(k: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Up to ``size`` uniform SH vectors of order <= 64 as packed uint64 words.

    Draws uniform m-bit words and keeps those with exactly 2k bits set, which
    is uniform over SH vectors.  The number returned varies with the
    rejection rate; callers loop until they have enough.
    """
    m = 4 * k
    if m > 64:
        raise CapacityError(f"packed sampling supports order <= 64, got {m}", required=m, limit=64)
    words = rng.integers(0, (1 << m) - 1, size=size, dtype=np.uint64, endpoint=True)
    return words[np.bitwise_count(words) == 2 * k]
