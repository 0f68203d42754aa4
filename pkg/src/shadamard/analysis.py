"""Exact counts and log-space probability estimates for SH matrices of order 4k.

Counts are exact Python integers.  Probabilities and expectations are
reported as base-2 logarithms because ``p_perp ** ((4k-1)(4k-2)/2)``
underflows doubles well before k = 8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np

from .core import ShMatrix, is_hadamard
from .errors import DimensionError, PreconditionError
from .vectorspace import random_sh_words

# Number of Hadamard matrices of orders 4..32 up to equivalence (Hall 1961/1965,
# Ito, Kimura, Spence 1995, Kharaghani and Tayfeh-Rezaie 2010).
KNOWN_NH_COUNTS: dict[int, int] = {
    4: 1,
    8: 1,
    12: 1,
    16: 5,
    20: 3,
    24: 60,
    28: 487,
    32: 13710027,
}

LOG2_E = math.log2(math.e)


class Bounds(NamedTuple):
    lower: float
    upper: float

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def binomial(n: int, r: int) -> int:
    if n < 0 or r < 0 or r > n:
        raise ValueError(f"C({n}, {r}) is undefined; need 0 <= r <= n")
    return math.comb(n, r)


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")


def _pairs(k: int) -> int:
    return (4 * k - 1) * (4 * k - 2) // 2


@dataclass(frozen=True)
class CountReport:
    k: int
    n_v: int
    n_o: int
    n_q: int
    n_qu: int
    n_d: int
    n_nh: int | None = None
    n_sh: int | None = None

    @property
    def order(self) -> int:
        return 4 * self.k


def count_report(k: int) -> CountReport:
    _check_k(k)
    m = 4 * k
    n_v = binomial(m, 2 * k)
    n_nh = KNOWN_NH_COUNTS.get(m)
    n_d = 2 ** (m - 1)
    return CountReport(
        k=k,
        n_v=n_v,
        n_o=binomial(2 * k, k) ** 2,
        n_q=math.perm(n_v, m - 1),
        n_qu=binomial(n_v, m - 1),
        n_d=n_d,
        n_nh=n_nh,
        n_sh=None if n_nh is None else n_nh * n_d,
    )


def p_perp(k: int) -> Fraction:
    """Probability that two distinct uniform SH vectors are orthogonal."""
    _check_k(k)
    return Fraction(binomial(2 * k, k) ** 2, binomial(4 * k, 2 * k) - 1)


def p_perp_bounds(k: int) -> Bounds:
    _check_k(k)
    return Bounds(1 / (2 * math.sqrt(k)), math.sqrt(2 / k))


def log2_fraction(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


def n_o_log2_bounds(k: int) -> Bounds:
    """Squared central-binomial estimate: 2^4k/(4k) <= N_O <= 2^4k/(2k)."""
    _check_k(k)
    return Bounds(4 * k - math.log2(4 * k), 4 * k - math.log2(2 * k))


def n_v_log2_bounds(k: int) -> Bounds:
    """Central-binomial estimate: 2^4k/(2 sqrt(2k)) <= N_V <= 2^4k/sqrt(4k)."""
    _check_k(k)
    return Bounds(4 * k - math.log2(2 * math.sqrt(2 * k)), 4 * k - 0.5 * math.log2(4 * k))


def p_h_given_q_log2(k: int) -> float:
    """log2 of p_perp raised to the number of column pairs (4k-1)(4k-2)/2."""
    return _pairs(k) * log2_fraction(p_perp(k))


def p_h_given_q_log2_bounds(k: int, simplified: bool = True) -> Bounds:
    """Bounds on log2 p_{H|Q}.

    ``simplified`` gives ``(4k)^(-4k^2) .. (k/2)^(-4k^2)``; otherwise the
    per-pair probability bounds are raised to the exact pair count.
    """
    _check_k(k)
    if simplified:
        return Bounds(-4 * k * k * math.log2(4 * k), -4 * k * k * math.log2(k / 2))
    lo, hi = p_perp_bounds(k)
    e = _pairs(k)
    return Bounds(e * math.log2(lo), e * math.log2(hi))


def n_qu_log2(k: int) -> float:
    n_v = binomial(4 * k, 2 * k)
    return math.log2(binomial(n_v, 4 * k - 1))


def n_qu_log2_bounds(k: int, form: str = "standard") -> Bounds:
    """Bounds on log2 C(N_V, 4k-1).

    ``standard`` raises ``N_V_bound / (4k-1)`` to ``4k-1`` on both sides;
    ``simplified`` is its large-k form with exponent 4k; ``rigorous`` keeps
    the lower side and uses ``C(p,q) <= (e p / q)^q`` for the upper side.
    The first two undershoot the exact count at small k.
    """
    _check_k(k)
    q = 4 * k - 1
    nv = n_v_log2_bounds(k)
    if form == "standard":
        return Bounds(q * (nv.lower - math.log2(q)), q * (nv.upper - math.log2(q)))
    if form == "simplified":
        lo = 4 * k * (4 * k - math.log2(8 * math.sqrt(2)) - 1.5 * math.log2(k))
        hi = 4 * k * (4 * k - 3 - 1.5 * math.log2(k))
        return Bounds(lo, hi)
    if form == "rigorous":
        return Bounds(q * (nv.lower - math.log2(q)), q * (LOG2_E + nv.upper - math.log2(q)))
    raise ValueError(f"unknown form {form!r}")


def expected_h_log2(k: int) -> float:
    """log2 E[H] along the exact path: p_{H|Q} times C(N_V, 4k-1)."""
    return p_h_given_q_log2(k) + n_qu_log2(k)


def expected_h_log2_bounds(k: int, simplified: bool = True) -> Bounds:
    """Bounds on log2 E[H].

    ``simplified`` is ``2^(8k^2-14k)/k^(4k^2+6k) .. 2^(20k^2-12k)/k^(4k^2+6k)``;
    otherwise the unsimplified probability and count bounds are multiplied.
    """
    _check_k(k)
    if simplified:
        lk = math.log2(k)
        return Bounds(8 * k * k - 14 * k - (4 * k * k + 6 * k) * lk, 20 * k * k - 12 * k - (4 * k * k + 6 * k) * lk)
    p = p_h_given_q_log2_bounds(k, simplified=False)
    n = n_qu_log2_bounds(k, "standard")
    return Bounds(p.lower + n.lower, p.upper + n.upper)


@dataclass(frozen=True)
class ProbabilityReport:
    k: int
    p_perp: Fraction
    p_perp_log2: float
    p_perp_bounds: Bounds
    p_h_given_q_log2: float
    p_h_given_q_bounds_log2: Bounds
    p_h_given_q_bounds_log2_unsimplified: Bounds
    expected_h_log2: float
    expected_h_log2_bounds: Bounds
    expected_h_log2_bounds_unsimplified: Bounds


def probability_report(k: int) -> ProbabilityReport:
    p = p_perp(k)
    return ProbabilityReport(
        k=k,
        p_perp=p,
        p_perp_log2=log2_fraction(p),
        p_perp_bounds=p_perp_bounds(k),
        p_h_given_q_log2=p_h_given_q_log2(k),
        p_h_given_q_bounds_log2=p_h_given_q_log2_bounds(k),
        p_h_given_q_bounds_log2_unsimplified=p_h_given_q_log2_bounds(k, simplified=False),
        expected_h_log2=expected_h_log2(k),
        expected_h_log2_bounds=expected_h_log2_bounds(k),
        expected_h_log2_bounds_unsimplified=expected_h_log2_bounds(k, simplified=False),
    )


def orthogonal_frequency(k: int, pairs: int, rng: np.random.Generator) -> int:
    """Monte Carlo: how many of ``pairs`` random distinct SH-vector pairs are orthogonal."""
    _check_k(k)
    half = np.uint64(2 * k)
    hits = 0
    done = 0
    while done < pairs:
        a = random_sh_words(k, rng, 2 * (pairs - done) + 64)
        b = random_sh_words(k, rng, 2 * (pairs - done) + 64)
        n = min(len(a), len(b))
        a, b = a[:n], b[:n]
        keep = a != b
        a, b = a[keep], b[keep]
        take = min(len(a), pairs - done)
        hits += int(np.count_nonzero(np.bitwise_count(a[:take] ^ b[:take]) == half))
        done += take
    return hits


# ------------------------------------------------------------ equivalences


def _square(M) -> np.ndarray:
    A = np.asarray(M.to_array() if isinstance(M, ShMatrix) else M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def seminormalize(M) -> ShMatrix:
    """Negate every row that starts with -1 so the first column becomes all ones."""
    A = _square(M).astype(np.int8)
    if not is_hadamard(A):
        raise PreconditionError("input is not an orthogonal ±1 matrix")
    if A.shape[0] % 4:
        raise DimensionError(f"SH matrices need order divisible by 4, got {A.shape[0]}")
    A = A * A[:, :1]
    return ShMatrix.from_array(A)


def normalize(H: ShMatrix) -> ShMatrix:
    """Negate columns so the first row is also all ones."""
    A = H.to_array()
    return ShMatrix.from_array(A * A[:1, :])


def is_normalized(M) -> bool:
    A = _square(M)
    return bool((A[0] == 1).all() and (A[:, 0] == 1).all())


def degenerate(H) -> Iterator[ShMatrix]:
    """All 2^(4k-1) SH matrices obtained by negating subsets of columns 2..4k.

    Subset ``s`` (bit ``j-1`` set means column ``j`` is negated) is yielded
    in order ``s = 0, 1, ...``; ``s = 0`` is the input itself.
    """
    A = _square(H)
    if not is_normalized(A):
        raise PreconditionError("degeneration needs a normalized matrix (first row and column all ones)")
    base = H if isinstance(H, ShMatrix) else ShMatrix.from_array(A)
    cols = base.columns
    m = base.order
    for subset in range(2 ** (m - 1)):
        out = [c if not (subset >> (j - 1)) & 1 else -c for j, c in enumerate(cols) if j]
        yield ShMatrix.from_sh_columns(out)


# ------------------------------------------------------------ discrepancy


@dataclass(frozen=True)
class DiscrepancyRow:
    k: int
    order: int
    expected_h_log2_lower: float
    expected_h_log2_upper: float
    expected_h_log2: float
    n_sh_log2: float | None


def discrepancy_table(k_max: int = 8) -> list[DiscrepancyRow]:
    """Model expectation E[H] against the known SH-matrix count, k = 1..k_max.

    Rows past order 32 carry ``n_sh_log2=None`` (no known count).
    """
    rows = []
    for k in range(1, k_max + 1):
        b = expected_h_log2_bounds(k)
        n_sh = count_report(k).n_sh
        rows.append(
            DiscrepancyRow(
                k=k,
                order=4 * k,
                expected_h_log2_lower=b.lower,
                expected_h_log2_upper=b.upper,
                expected_h_log2=expected_h_log2(k),
                n_sh_log2=None if n_sh is None else math.log2(n_sh),
            )
        )
    return rows


def discrepancy_csv(rows: list[DiscrepancyRow]) -> str:
    out = [
        "# schema: shadamard-discrepancy/1",
        "k,order,log2_eh_lower,log2_eh_upper,log2_eh_exact,log2_nsh",
    ]
    for r in rows:
        nsh = "unknown" if r.n_sh_log2 is None else f"{r.n_sh_log2:.6f}"
        out.append(
            f"{r.k},{r.order},{r.expected_h_log2_lower:.6f},{r.expected_h_log2_upper:.6f},"
            f"{r.expected_h_log2:.6f},{nsh}"
        )
    return "\n".join(out) + "\n"
