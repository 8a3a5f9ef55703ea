"""Exact geometry and combinatorics of the l1 lattice Z^d.

Vectors are plain tuples of Python ints.  Everything here is exact: counts are
integers and ratios are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Iterator, NamedTuple, Sequence

from .errors import DomainError, ZeroVector

LatticeVector = tuple[int, ...]
SignVector = tuple[int, ...]


class NeighborSets(NamedTuple):
    lower: list[LatticeVector]
    upper: list[LatticeVector]
    abs_upper: list[tuple[LatticeVector, int]]


class ShellCombinatorics(NamedTuple):
    d: int
    n: int
    c: int
    c0: int
    p_up: Fraction


def vec(v: Sequence[int] | str) -> LatticeVector:
    """Coerce a sequence (or ``"a,b,c"`` text) into a lattice vector."""
    if isinstance(v, str):
        parts = [p for p in v.replace(" ", "").split(",") if p != ""]
        v = [int(p) for p in parts]
    out = tuple(int(x) for x in v)
    if len(out) < 1:
        raise DomainError("lattice vectors need dimension d >= 1")
    return out


def zero(d: int) -> LatticeVector:
    return (0,) * d


def binom(n: int, k: int) -> int:
    # binom(0,0) = 1; zero whenever n < k or either index is negative
    if n < 0 or k < 0 or n < k:
        return 0
    return comb(n, k)


def norm(v: Sequence[int]) -> int:
    return sum(abs(x) for x in v)


def _sgn(x: int) -> int:
    return -1 if x < 0 else 1


def decompose(v: Sequence[int]) -> tuple[LatticeVector, SignVector]:
    """Split ``v`` into its modulus and sign vector (zero maps to +1)."""
    return tuple(abs(x) for x in v), tuple(_sgn(x) for x in v)


def compose(modulus: Sequence[int], sign: Sequence[int]) -> LatticeVector:
    if len(modulus) != len(sign):
        raise DomainError("modulus and sign vector differ in length")
    if any(m < 0 for m in modulus) or any(s not in (1, -1) for s in sign):
        raise DomainError("need a nonnegative modulus and a +-1 sign vector")
    return tuple(m * s for m, s in zip(modulus, sign))


def count_profile(v: Sequence[int]) -> tuple[int, int]:
    """Return ``(d0, d1)``: the number of zero and of unit-modulus coordinates."""
    d0 = sum(1 for x in v if x == 0)
    d1 = sum(1 for x in v if abs(x) == 1)
    return d0, d1


def _require_nonzero(v: Sequence[int]) -> None:
    if all(x == 0 for x in v):
        raise ZeroVector("operation undefined for the zero vector")


def lower_set(v: Sequence[int]) -> list[LatticeVector]:
    """Neighbours of ``v`` one unit closer to the origin.

    One entry per nonzero coordinate, so the list has ``d - d0(v)`` members.
    """
    v = vec(v)
    _require_nonzero(v)
    out = []
    for i, x in enumerate(v):
        if x != 0:
            m = list(v)
            m[i] -= _sgn(x)
            out.append(tuple(m))
    return out


def upper_set(v: Sequence[int]) -> list[LatticeVector]:
    """Neighbours of ``v`` one unit farther from the origin.

    A zero coordinate contributes both sign branches (``+`` first), giving
    ``d + d0(v)`` members.  Defined at the origin as the ``2d`` unit vectors.
    """
    v = vec(v)
    out = []
    for i, x in enumerate(v):
        for step in ((1, -1) if x == 0 else (_sgn(x),)):
            m = list(v)
            m[i] += step
            out.append(tuple(m))
    return out


def abs_upper_set(v: Sequence[int]) -> list[tuple[LatticeVector, int]]:
    """Distinct moduli of the upper set paired with their range (1 or 2)."""
    v = vec(v)
    _require_nonzero(v)
    ranges: dict[LatticeVector, int] = {}
    for m in upper_set(v):
        key = tuple(abs(x) for x in m)
        ranges[key] = ranges.get(key, 0) + 1
    return list(ranges.items())


def neighbor_sets(v: Sequence[int]) -> NeighborSets:
    return NeighborSets(lower_set(v), upper_set(v), abs_upper_set(v))


def x_class(v: Sequence[int]) -> list[LatticeVector]:
    """All vectors sharing the modulus of ``v``; first coordinate varies fastest."""
    v = vec(v)
    choices = [(abs(x), -abs(x)) if x else (0,) for x in v]
    return [tuple(reversed(p)) for p in itertools.product(*reversed(choices))]


def shell(d: int, n: int, nonneg_only: bool = False) -> Iterator[LatticeVector]:
    """Enumerate the norm-``n`` shell of Z^d in lexicographic order."""
    if d < 1 or n < 0:
        raise DomainError("need d >= 1 and n >= 0")

    def parts(k: int, rem: int) -> Iterator[tuple[int, ...]]:
        if k == 1:
            yield (rem,)
            return
        for first in range(rem + 1):
            for rest in parts(k - 1, rem - first):
                yield (first,) + rest

    out = []
    for modulus in parts(d, n):
        if nonneg_only:
            out.append(modulus)
        else:
            out.extend(x_class(modulus))
    yield from sorted(out)


def shell_size(d: int, n: int, nonneg_only: bool = False) -> int:
    if n < 0:
        raise DomainError("norm level must be nonnegative")
    if n == 0:
        return 1
    weight = 1 if nonneg_only else 2
    return sum(weight**i * binom(d, i) * binom(n - 1, i - 1) for i in range(1, d + 1))


def nonzero_total(d: int, n: int) -> int:
    """C(n): nonzero coordinates summed over the norm-n shell."""
    return sum(i * 2**i * binom(d, i) * binom(n - 1, i - 1) for i in range(1, d + 1))


def zero_total(d: int, n: int) -> int:
    """C0(n): twice the zero coordinates summed over the norm-n shell."""
    return sum((d - i) * 2 ** (i + 1) * binom(d, i) * binom(n - 1, i - 1) for i in range(1, d))


def shell_combinatorics(d: int, n: int) -> ShellCombinatorics:
    if d < 1:
        raise DomainError("dimension must be >= 1")
    if n < 1:
        raise DomainError("shell combinatorics need level n >= 1")
    c, c0 = nonzero_total(d, n), zero_total(d, n)
    return ShellCombinatorics(d, n, c, c0, Fraction(c0 + c, c0 + 2 * c))


def box_stationary(N: int, v: Sequence[int]) -> Fraction:
    """Stationary mass of ``v`` for d independent capacity-N negative-service queues."""
    v = vec(v)
    if N < 1 or any(x < 0 or x > N for x in v):
        raise DomainError(f"every coordinate must lie in [0, {N}]")
    d = len(v)
    d0, _ = count_profile(v)
    return Fraction(2 ** (d - d0), (2 * N + 1) ** d)


def single_queue_generator(N: int) -> list[list[Fraction]]:
    """Generator of one queue on {0..N}, unit rates.

    Arrivals and services both have rate 1; an empty server runs a negative
    service of rate 1, so the empty state leaves at rate 2.  Arrivals at
    capacity are lost.
    """
    if N < 1:
        raise DomainError("capacity must be >= 1")
    Q = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    for n in range(N + 1):
        if n < N:
            Q[n][n + 1] += 2 if n == 0 else 1
        if n > 0:
            Q[n][n - 1] += 1
        Q[n][n] = -sum(Q[n][j] for j in range(N + 1) if j != n)
    return Q


def box_balance_residuals(N: int, d: int) -> list[Fraction]:
    """Residuals of pi Q = 0 for the d-queue product chain at the product-form pi."""
    q1 = single_queue_generator(N)
    states = list(itertools.product(range(N + 1), repeat=d))
    index = {s: i for i, s in enumerate(states)}
    pi = [box_stationary(N, s) for s in states]
    resid = [Fraction(0)] * len(states)
    for s in states:
        i = index[s]
        for axis in range(d):
            a = s[axis]
            for b in range(N + 1):
                rate = q1[a][b]
                if rate == 0:
                    continue
                t = s[:axis] + (b,) + s[axis + 1 :]
                resid[index[t]] += pi[i] * rate
    return resid
