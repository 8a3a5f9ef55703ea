from fractions import Fraction
from itertools import product

import pytest

from crosslab.errors import DomainError, ZeroVector
from crosslab.lattice import (
    abs_upper_set, binom, box_balance_residuals, box_stationary, compose, count_profile,
    decompose, lower_set, neighbor_sets, norm, nonzero_total, shell, shell_combinatorics,
    shell_size, upper_set, vec, x_class, zero_total,
)


def test_norm():
    assert norm((0, 0, 0)) == 0
    assert norm((-2, 3)) == 5
    assert norm((-1, 0, 1)) == 2


def test_decompose_and_compose():
    assert decompose((-2, 3)) == ((2, 3), (-1, 1))
    assert decompose((0, 5)) == ((0, 5), (1, 1))
    assert compose((2, 3), (-1, 1)) == (-2, 3)
    with pytest.raises(DomainError):
        compose((1,), (0,))


def test_count_profile():
    assert count_profile((0, 1, 0, 0, 1, 5)) == (3, 2)
    assert count_profile((0, 0, 0, 0)) == (4, 0)
    assert count_profile((-1, 0, 1)) == (1, 2)


def test_vec_parses_text():
    assert vec("1,-2, 3") == (1, -2, 3)
    assert vec([4]) == (4,)


def test_lower_set_examples():
    assert lower_set((-2, 3)) == [(-1, 3), (-2, 2)]
    assert lower_set((-1, 0, 1)) == [(0, 0, 1), (-1, 0, 0)]
    assert lower_set((1, 0)) == [(0, 0)]
    with pytest.raises(ZeroVector):
        lower_set((0, 0))


def test_upper_set_examples():
    assert upper_set((-2, 3)) == [(-3, 3), (-2, 4)]
    assert upper_set((-1, 0, 1)) == [(-2, 0, 1), (-1, 1, 1), (-1, -1, 1), (-1, 0, 2)]
    assert sorted(upper_set((0, 0))) == sorted([(1, 0), (-1, 0), (0, 1), (0, -1)])


def test_abs_upper_set_examples():
    assert abs_upper_set((-1, 0, 1)) == [((2, 0, 1), 1), ((1, 1, 1), 2), ((1, 0, 2), 1)]
    assert abs_upper_set((1, 1)) == [((2, 1), 1), ((1, 2), 1)]
    assert abs_upper_set((1, 0)) == [((2, 0), 1), ((1, 1), 2)]
    with pytest.raises(ZeroVector):
        abs_upper_set((0, 0, 0))


def test_neighbor_sets_bundle():
    ns = neighbor_sets((1, 0))
    assert ns.lower == [(0, 0)] and len(ns.upper) == 3 and len(ns.abs_upper) == 2


def test_x_class_examples():
    assert x_class((1, 2)) == [(1, 2), (-1, 2), (1, -2), (-1, -2)]
    assert x_class((0, 0)) == [(0, 0)]
    cls = x_class((1, 0, 3))
    assert len(cls) == 4 and all(tuple(map(abs, w)) == (1, 0, 3) for w in cls)


def test_binom_conventions():
    assert binom(0, 0) == 1
    assert binom(2, 3) == 0
    assert binom(-1, 0) == 0
    assert binom(5, 2) == 10


def test_shell_combinatorics_examples():
    for n in (1, 2, 7, 30):
        sc = shell_combinatorics(1, n)
        assert (sc.c, sc.c0, sc.p_up) == (2, 0, Fraction(1, 2))
    sc = shell_combinatorics(2, 1)
    assert (sc.c, sc.c0, sc.p_up) == (4, 8, Fraction(3, 4))
    sc = shell_combinatorics(2, 2)
    assert (sc.c, sc.c0, sc.p_up) == (12, 8, Fraction(5, 8))
    with pytest.raises(DomainError):
        shell_combinatorics(2, 0)


def test_shell_combinatorics_wide_integers():
    sc = shell_combinatorics(8, 64)
    assert isinstance(sc.c, int) and sc.c > 2**40
    assert 0 < sc.p_up < 1


def test_shell_sizes():
    assert shell_size(2, 1) == 4
    assert shell_size(2, 2) == 8
    assert shell_size(3, 1, nonneg_only=True) == 3
    assert shell_size(4, 0) == 1


@pytest.mark.parametrize("d,n", [(1, 3), (2, 4), (3, 3), (4, 2)])
def test_shell_enumeration_matches_count(d, n):
    members = list(shell(d, n))
    assert members == sorted(members)
    assert len(members) == len(set(members)) == shell_size(d, n)
    assert all(norm(v) == n for v in members)
    nonneg = list(shell(d, n, nonneg_only=True))
    assert len(nonneg) == shell_size(d, n, nonneg_only=True)


def test_counts_against_brute_force():
    # C(n): nonzero coordinates summed over the shell; C0(n): twice the zero coordinates
    for d in range(1, 4):
        for n in range(1, 6):
            pts = [v for v in product(range(-n, n + 1), repeat=d) if norm(v) == n]
            assert nonzero_total(d, n) == sum(sum(1 for x in v if x) for v in pts)
            assert zero_total(d, n) == 2 * sum(sum(1 for x in v if x == 0) for v in pts)


def test_box_stationary_examples():
    assert box_stationary(3, (0,)) == Fraction(1, 7)
    assert box_stationary(3, (2,)) == Fraction(2, 7)
    for N in (1, 4):
        assert box_stationary(N, (1, 1)) / box_stationary(N, (0, 1)) == 2
    with pytest.raises(DomainError):
        box_stationary(2, (3,))


def test_box_balance():
    for N in (1, 2, 3):
        for d in (1, 2):
            assert all(r == 0 for r in box_balance_residuals(N, d))
