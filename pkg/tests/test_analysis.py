import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from shadamard.analysis import (
    KNOWN_NH_COUNTS,
    binomial,
    count_report,
    degenerate,
    discrepancy_csv,
    discrepancy_table,
    expected_h_log2,
    expected_h_log2_bounds,
    n_o_log2_bounds,
    n_qu_log2,
    n_qu_log2_bounds,
    n_v_log2_bounds,
    normalize,
    orthogonal_frequency,
    p_h_given_q_log2,
    p_h_given_q_log2_bounds,
    p_perp,
    p_perp_bounds,
    probability_report,
    seminormalize,
)
from shadamard.core import ShMatrix, is_hadamard, sylvester
from shadamard.errors import DimensionError, PreconditionError
from shadamard.graph import build_ortho_graph, edge_count
from shadamard.search import exhaustive_search
from shadamard.vectorspace import enumerate_sh_vectors

H4_ROW2_NEGATED = np.array([[1, 1, 1, 1], [-1, 1, -1, 1], [1, 1, -1, -1], [1, -1, -1, 1]])


def test_binomial():
    assert binomial(4, 2) == 6
    assert binomial(2, 1) ** 2 == 4
    assert binomial(8, 4) == 70
    with pytest.raises(ValueError):
        binomial(3, 4)
    with pytest.raises(ValueError):
        binomial(3, -1)


def test_count_report_k1():
    c = count_report(1)
    assert (c.n_v, c.n_o, c.n_qu, c.n_q, c.n_d, c.n_sh) == (6, 4, 20, 120, 8, 8)


def test_count_report_k2_and_k8():
    c = count_report(2)
    assert (c.n_v, c.n_o, c.n_sh) == (70, 36, 128)
    assert count_report(8).n_sh == 13710027 * 2**31
    assert count_report(9).n_sh is None and count_report(9).n_nh is None


@pytest.mark.parametrize("k", [1, 2, 3])
def test_counts_match_enumeration(k):
    vecs = list(enumerate_sh_vectors(k))
    c = count_report(k)
    assert c.n_v == len(vecs)
    assert c.n_qu == comb(len(vecs), 4 * k - 1)
    assert c.n_q == c.n_qu * math.factorial(4 * k - 1)
    v = vecs[len(vecs) // 3]
    assert c.n_o == sum(1 for u in vecs if (u.bits ^ v.bits).bit_count() == 2 * k)


def test_known_counts_table():
    assert KNOWN_NH_COUNTS == {4: 1, 8: 1, 12: 1, 16: 5, 20: 3, 24: 60, 28: 487, 32: 13710027}
    for order, n in KNOWN_NH_COUNTS.items():
        assert count_report(order // 4).n_sh == n * 2 ** (order - 1)


def test_p_perp_exact_and_graph():
    assert p_perp(1) == Fraction(4, 5)
    assert p_perp(2) == Fraction(36, 69)
    for k in (1, 2):
        g = build_ortho_graph(k)
        assert p_perp(k) == Fraction(edge_count(g), comb(g.vertex_count, 2))


def test_p_perp_bounds():
    assert p_perp_bounds(1) == pytest.approx((0.5, math.sqrt(2)))
    assert p_perp_bounds(4) == pytest.approx((0.25, math.sqrt(0.5)))
    for k in range(1, 65):
        lo, hi = p_perp_bounds(k)
        assert lo <= p_perp(k) <= min(1.0, hi)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_p_perp_monte_carlo(k):
    n = 100_000
    hits = orthogonal_frequency(k, n, np.random.default_rng(100 + k))
    p = float(p_perp(k))
    assert abs(hits / n - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_p_h_given_q():
    assert p_h_given_q_log2(1) == pytest.approx(3 * math.log2(0.8))
    assert p_h_given_q_log2(5) < p_h_given_q_log2(3)
    # the pairwise model and the exhaustive count disagree at k = 1
    model = 2 ** p_h_given_q_log2(1)
    assert model == pytest.approx(0.512)
    assert Fraction(len(exhaustive_search(1)), count_report(1).n_q) == Fraction(1, 15)
    assert model != pytest.approx(1 / 15) and model != pytest.approx(8 / 20)


def test_expected_h_bounds_values():
    assert expected_h_log2_bounds(1) == pytest.approx((-6, 8))
    assert expected_h_log2_bounds(5).upper == pytest.approx(440 - 130 * math.log2(5))
    assert expected_h_log2_bounds(5).upper == pytest.approx(138.149, abs=1e-3)
    assert expected_h_log2_bounds(5).lower == pytest.approx(200 - 70 - 130 * math.log2(5))


def test_expected_h_exact_path():
    expected = [3.356144, 10.448325, 16.684359, 18.244090, 12.194501, -3.819479, -31.756992, -73.294038]
    got = [expected_h_log2(k) for k in range(1, 9)]
    assert got == pytest.approx(expected, abs=1e-6)
    # E[H] rises to k = 4, falls from k = 5 and is below one from k = 6
    assert all(a < b for a, b in zip(got[:4], got[1:4]))
    assert all(a > b for a, b in zip(got[3:], got[4:]))
    assert [k for k in range(1, 9) if got[k - 1] < 0] == [6, 7, 8]


@pytest.mark.parametrize("k", range(1, 17))
def test_sandwich(k):
    c = count_report(k)
    assert n_o_log2_bounds(k).contains(math.log2(c.n_o))
    assert n_v_log2_bounds(k).contains(math.log2(c.n_v))
    assert p_perp_bounds(k).lower <= p_perp(k) <= p_perp_bounds(k).upper
    exact_p = p_h_given_q_log2(k)
    assert p_h_given_q_log2_bounds(k).contains(exact_p)
    assert p_h_given_q_log2_bounds(k, simplified=False).contains(exact_p)
    assert n_qu_log2_bounds(k, "rigorous").contains(n_qu_log2(k))
    assert expected_h_log2_bounds(k).contains(expected_h_log2(k))
    assert expected_h_log2_bounds(k, simplified=False).contains(expected_h_log2(k))


def test_count_bounds_that_undershoot():
    # the (N_V / (4k-1))^(4k-1) form is below the exact unique-candidate count
    for k in range(1, 17):
        assert n_qu_log2_bounds(k, "standard").upper < n_qu_log2(k)
        assert n_qu_log2_bounds(k, "simplified").upper < n_qu_log2(k)
    assert 2 ** n_qu_log2_bounds(1, "simplified").upper == pytest.approx(16)
    with pytest.raises(ValueError):
        n_qu_log2_bounds(1, "loose")


def test_probability_report_fields():
    r = probability_report(3)
    assert r.p_perp == Fraction(400, 923)
    assert 0 < float(r.p_perp) <= 1 and r.p_h_given_q_log2 <= 0
    assert r.expected_h_log2_bounds.contains(r.expected_h_log2)


def test_seminormalize():
    H = seminormalize(H4_ROW2_NEGATED)
    assert H.to_array().tolist() == sylvester(2).tolist()
    again = seminormalize(H)
    assert again == H
    assert seminormalize(sylvester(3)).to_array().tolist() == sylvester(3).tolist()
    rng = np.random.default_rng(0)
    signs = rng.choice([-1, 1], size=(8, 1))
    assert is_hadamard(seminormalize(sylvester(3) * signs).to_array())
    with pytest.raises(PreconditionError):
        seminormalize(np.ones((4, 4), dtype=int))
    with pytest.raises(DimensionError):
        seminormalize(sylvester(1))


@pytest.mark.parametrize("power", [2, 3])
def test_degenerate(power):
    H = ShMatrix.from_array(sylvester(power))
    out = list(degenerate(H))
    m = 2**power
    assert len(out) == 2 ** (m - 1) == count_report(m // 4).n_d
    assert len({H2.to_array().tobytes() for H2 in out}) == len(out)
    assert all(is_hadamard(H2.to_array()) for H2 in out)
    assert all((H2.to_array()[:, 0] == 1).all() for H2 in out)
    assert out[0] == H
    assert all(normalize(H2) == H for H2 in out)


def test_degenerate_k1_matches_exhaustive_up_to_column_order():
    found = {frozenset(c.bits for c in H.columns[1:]) for H in exhaustive_search(1)}
    degen = {frozenset(c.bits for c in H.columns[1:]) for H in degenerate(ShMatrix.from_array(sylvester(2)))}
    assert degen == found


def test_degenerate_rejects_unnormalized():
    with pytest.raises(PreconditionError):
        list(degenerate(ShMatrix.from_array(sylvester(2) * np.array([1, -1, 1, 1]))))


def test_k2_exhaustive_count_differs_from_degenerate_count():
    # The eight at k = 1 is a numerical coincidence: unordered column sets
    # outnumber the column-negation equivalents of the single NH class at k = 2.
    assert len(exhaustive_search(2)) == 3840
    assert count_report(2).n_sh == 128


def test_discrepancy_table():
    rows = discrepancy_table(8)
    assert [r.k for r in rows] == list(range(1, 9))
    assert rows[-1].n_sh_log2 == pytest.approx(math.log2(13710027) + 31)
    nsh = [r.n_sh_log2 for r in rows]
    assert all(a < b for a, b in zip(nsh, nsh[1:]))
    for r, (order, n) in zip(rows, sorted(KNOWN_NH_COUNTS.items())):
        assert r.n_sh_log2 == pytest.approx(math.log2(n) + order - 1)
    # E[H] drops below the known count from k = 5 and below one from k = 6
    assert [r.k for r in rows if r.expected_h_log2 < r.n_sh_log2] == [5, 6, 7, 8]
    assert [r.k for r in rows if r.expected_h_log2 < 0] == [6, 7, 8]
    # the upper bound itself stays positive over this range
    assert all(r.expected_h_log2_upper > 0 for r in rows)


def test_discrepancy_csv():
    text = discrepancy_csv(discrepancy_table(10))
    lines = text.splitlines()
    assert lines[0] == "# schema: shadamard-discrepancy/1"
    assert lines[1].split(",")[0] == "k"
    assert len(lines) == 12
    assert lines[-1].endswith(",unknown") and lines[-2].endswith(",unknown")
    assert lines[9].split(",")[-1] == f"{math.log2(13710027) + 31:.6f}"
