"""Analytic crossing laws: branching chains, shell laws, kernels, expectations."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from .errors import DomainError, ZeroVector
from .lattice import count_profile, shell_combinatorics, vec
from .pmf import (
    DEFAULT_K,
    GeometricKernel,
    Kernel,
    MixtureKernel,
    Pmf,
    convolution_powers,
    pointmass,
    warn_tail,
)

Direction = Literal["up", "down", "total"]
Convention = Literal["destination", "literal"]
CONVENTIONS = ("destination", "literal")


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown index convention {convention!r}; use one of {CONVENTIONS}")


def _transition_matrix(kernel_pmf: Pmf, K: int) -> np.ndarray:
    # row m: law of the next generation given m parents
    return convolution_powers(kernel_pmf, K, K)


def _propagate(ratios: Sequence[Fraction | float | None], K: int) -> list[np.ndarray]:
    """Laws of generations 0..len(ratios) starting from a single individual.

    ``None`` marks an identity step (every individual has exactly one child);
    a zero ratio kills every individual.
    """
    law = np.zeros(K + 1)
    law[1 if K >= 1 else 0] = 1.0
    laws = [law]
    cache: dict = {}
    for r in ratios:
        if r is None:
            laws.append(laws[-1].copy())
            continue
        if r == 0:
            extinct = np.zeros(K + 1)
            extinct[0] = laws[-1].sum()
            laws.append(extinct)
            continue
        key = float(r)
        if key not in cache:
            cache[key] = _transition_matrix(GeometricKernel(r).pmf(K), K)
        laws.append(laws[-1] @ cache[key])
    return laws


def branching_pmf(kernels: Sequence[GeometricKernel | Fraction | float], n: int, K: int = DEFAULT_K) -> Pmf:
    """Generation-n law of an inhomogeneous branching chain started from one individual.

    ``kernels[j - 1]`` is the offspring law used to produce generation ``j``;
    a list shorter than ``n`` repeats its last entry.
    """
    if n < 0:
        raise DomainError("generation must be >= 0")
    if n == 0:
        return pointmass(1, K, "V_0")
    if not kernels:
        raise DomainError("need at least one offspring kernel")
    ratios = []
    for j in range(n):
        k = kernels[min(j, len(kernels) - 1)]
        ratios.append(k.ratio if isinstance(k, GeometricKernel) else k)
    law = _propagate(ratios, K)[-1]
    return warn_tail(Pmf.from_masses(law, f"V_{n}"))


def gw_pmf(n: int, K: int = DEFAULT_K) -> Pmf:
    """Galton-Watson generation law with geometric(1/2) offspring, Z_0 = 1."""
    return branching_pmf([Fraction(1, 2)], n, K).relabel(f"Z_{n}")


def v_chain_ratios(lambdas: Sequence[float], mus: Sequence[float], n: int,
                   convention: Convention = "destination") -> list[Fraction | float | None]:
    """Per-step geometric ratios lambda/(lambda+mu) for the birth-death count chain.

    Rate lists are indexed by population level; index 0 is only read under the
    literal convention.  Short lists repeat their last entry.
    """
    _check_convention(convention)

    def at(seq, i):
        return seq[min(i, len(seq) - 1)]

    ratios = []
    for j in range(1, n + 1):
        level = j if convention == "destination" else j - 1
        lam, mu = at(lambdas, level), at(mus, level)
        if lam < 0 or mu <= 0:
            raise DomainError(f"rates at level {level} must satisfy lambda >= 0, mu > 0")
        ratios.append(Fraction(lam) / (Fraction(lam) + Fraction(mu)) if lam > 0 else 0.0)
    return ratios


def v_chain_pmf(lambdas: Sequence[float], mus: Sequence[float], n: int, K: int = DEFAULT_K,
                convention: Convention = "destination") -> Pmf:
    """Law of the birth count g(n) of a birth-death process started from one individual."""
    if n == 0:
        return pointmass(1, K, "V_0")
    law = _propagate(v_chain_ratios(lambdas, mus, n, convention), K)[-1]
    return warn_tail(Pmf.from_masses(law, f"V_{n}"))


def r_ratios(d: int, n: int, convention: Convention = "destination") -> list[Fraction | None]:
    """Geometric ratios for the steps R_0 -> R_1 -> ... -> R_n.

    Destination convention: the step into R_j uses rates at level j,
    lambda_j = C0(j) + C(j), mu_j = C(j).  Literal convention: level j - 1,
    whose level-0 step is degenerate (C(0) = C0(0) = 0) and is taken as the
    identity step.
    """
    _check_convention(convention)
    out: list[Fraction | None] = []
    for j in range(1, n + 1):
        level = j if convention == "destination" else j - 1
        if level == 0:
            out.append(None)
            continue
        out.append(shell_combinatorics(d, level).p_up)
    return out


@lru_cache(maxsize=128)
def _r_laws(d: int, n: int, K: int, convention: str) -> tuple[np.ndarray, ...]:
    return tuple(_propagate(r_ratios(d, n, convention), K))


def r_pmf(d: int, n: int, K: int = DEFAULT_K, convention: Convention = "destination") -> Pmf:
    if d < 1 or n < 0:
        raise DomainError("need d >= 1 and n >= 0")
    law = _r_laws(d, n, K, convention)[n]
    return warn_tail(Pmf.from_masses(law, f"R_{n}(d={d})"))


def _consecutive_sum(d: int, n: int, K: int, convention: str) -> Pmf:
    """Law of R_{n-1} + R_n by propagating the joint chain (never independent)."""
    laws = _r_laws(d, n, K, convention)
    prev = laws[n - 1]
    r = r_ratios(d, n, convention)[n - 1]
    if r is None:
        step = np.eye(K + 1)
    else:
        step = _transition_matrix(GeometricKernel(r).pmf(K), K)
    joint = prev[:, None] * step  # joint[m, k] = P(R_{n-1}=m, R_n=k)
    out = np.zeros(K + 1)
    for m in range(K + 1):
        if prev[m] == 0.0:
            continue
        out[m:] += joint[m, : K + 1 - m]
    return Pmf.from_masses(out, f"R_{n - 1}+R_{n}(d={d})")


def shell_law(d: int, n: int, direction: Direction, K: int = DEFAULT_K,
              convention: Convention = "destination") -> Pmf:
    """Law of the up-, down- or undirected crossing count of the norm-n shell."""
    if direction == "down":
        if n < 0:
            raise DomainError("down shell laws need n >= 0")
        return r_pmf(d, n, K, convention).relabel(f"shell_down(d={d},n={n})")
    if n < 1:
        raise DomainError(f"{direction} shell laws need n >= 1")
    if direction == "up":
        return r_pmf(d, n - 1, K, convention).relabel(f"shell_up(d={d},n={n})")
    if direction == "total":
        return warn_tail(_consecutive_sum(d, n, K, convention).relabel(f"shell_total(d={d},n={n})"))
    raise DomainError(f"unknown direction {direction!r}")


def state_kernel(v: Sequence[int], direction: Literal["up", "down"],
                 family: Literal["state", "xclass"] = "state") -> Kernel:
    """Per-parent offspring kernel for state or X-class crossing counts.

    X-class kernels are evaluated at the modulus of ``v``.  Mixture components
    with zero weight are dropped; a surviving degenerate component (ratio 1)
    raises :class:`DomainError`.
    """
    v = vec(v)
    if all(x == 0 for x in v):
        raise ZeroVector("kernels are undefined at the origin")
    d = len(v)
    d0, d1 = count_profile(v)
    a, b = d - d0, d + d0
    if family == "state":
        if direction == "up":
            return GeometricKernel(Fraction(1, a + 1), f"state_up{v}")
        if direction == "down":
            return GeometricKernel(Fraction(1, b + 1), f"state_down{v}")
    elif family == "xclass":
        if direction == "up":
            den = 2 * a - d1
            parts = [(Fraction(2 * (a - d1), den), Fraction(1, a + 1)),
                     (Fraction(d1, den), Fraction(2, a + 1))]
        elif direction == "down":
            parts = [(Fraction(2 * d0, b), Fraction(2, b + 1)),
                     (Fraction(a, b), Fraction(1, b + 1))]
        else:
            raise DomainError(f"unknown direction {direction!r}")
        comps = []
        for w, r in parts:
            if w == 0:
                continue
            if not 0 < r < 1:
                raise DomainError(f"degenerate X-class kernel at {v} ({direction}): ratio {r}")
            comps.append((w, GeometricKernel(r)))
        return MixtureKernel(tuple(comps), f"xclass_{direction}{v}")
    raise DomainError(f"unknown kernel family {family!r} / direction {direction!r}")


def conditional_count_pmf(kernel: Kernel, m: int, K: int = DEFAULT_K) -> Pmf:
    """m-fold convolution of the kernel: the count law given m parent units."""
    if m < 1:
        raise DomainError("parent total must be >= 1")
    rows = convolution_powers(kernel.pmf(K), m, K)
    return warn_tail(Pmf.from_masses(rows[m], f"{kernel.label}*{m}"))


def d1_crossing_law(level: int, direction: Direction, K: int = DEFAULT_K) -> Pmf:
    """Crossing count law of a nonzero level for the one-dimensional walk.

    Half the corresponding Galton-Watson law on k >= 1; the rest of the mass
    sits at zero.
    """
    if level == 0:
        raise ZeroVector("level-crossing laws need a nonzero level")
    n = abs(level)
    if direction == "up":
        z = gw_pmf(n - 1, K)
    elif direction == "down":
        z = gw_pmf(n, K)
    elif direction == "total":
        z = shell_law(1, n, "total", K)
    else:
        raise DomainError(f"unknown direction {direction!r}")
    masses = 0.5 * z.masses.copy()
    masses[0] = 0.5 + 0.5 * z.masses[0]
    return Pmf(masses, 0.5 * z.tail, f"d1_{direction}({level})")


@dataclass(frozen=True)
class Expectations:
    e_up: Fraction
    e_down: Fraction
    e_total: Fraction
    e_up_xclass: Fraction
    e_down_xclass: Fraction
    e_total_xclass: Fraction

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (self.e_up, self.e_down, self.e_total,
                self.e_up_xclass, self.e_down_xclass, self.e_total_xclass)

    def get(self, direction: str, family: str = "state") -> Fraction:
        key = {"up": 0, "down": 1, "total": 2}[direction] + (3 if family == "xclass" else 0)
        return self.as_tuple()[key]


def expected_crossings(v: Sequence[int]) -> Expectations:
    v = vec(v)
    if all(x == 0 for x in v):
        raise ZeroVector("expectations are stated for nonzero states")
    d = len(v)
    d0, _ = count_profile(v)
    up, down = Fraction(d - d0, 2 * d), Fraction(d + d0, 2 * d)
    scale = 2 ** (d - d0)
    return Expectations(up, down, up + down, up * scale, down * scale, (up + down) * scale)


def shell_expectation(d: int, n: int, direction: Literal["up", "down"]) -> Fraction:
    """Sum of state expectations over the norm-n shell (enumerated exhaustively)."""
    from .lattice import shell

    return sum((expected_crossings(v).get(direction) for v in shell(d, n)), Fraction(0))
