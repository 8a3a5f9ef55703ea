"""Truncated probability mass functions with explicit tail mass."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import binom as _binom_dist

from .errors import DomainError, TruncationWarning

DEFAULT_K = 200
TAIL_WARN = 1e-6
_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Pmf:
    """Masses on ``{0..K}`` plus the mass not assigned to any of them."""

    masses: np.ndarray
    tail: float = 0.0
    label: str = ""

    def __post_init__(self):
        m = np.array(self.masses, dtype=np.float64).reshape(-1)
        if m.size == 0:
            raise DomainError("a Pmf needs at least one bin")
        if np.any(m < -_TOL):
            raise DomainError("negative probability mass")
        m = np.clip(m, 0.0, None)
        tail = max(float(self.tail), 0.0)
        if abs(m.sum() + tail - 1.0) > 1e-9:
            raise DomainError(f"masses + tail = {m.sum() + tail!r}, expected 1")
        m.flags.writeable = False
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def from_masses(cls, masses, label: str = "") -> "Pmf":
        """Build from known masses; whatever is missing from 1 becomes the tail."""
        m = np.clip(np.asarray(masses, dtype=np.float64), 0.0, None)
        return cls(m, max(0.0, 1.0 - float(m.sum())), label)

    @property
    def k_max(self) -> int:
        return self.masses.size - 1

    def __len__(self) -> int:
        return self.masses.size

    def __getitem__(self, k: int) -> float:
        return float(self.masses[k]) if 0 <= k < self.masses.size else 0.0

    def padded(self, K: int) -> np.ndarray:
        out = np.zeros(K + 1)
        n = min(K + 1, self.masses.size)
        out[:n] = self.masses[:n]
        return out

    def truncate(self, K: int) -> "Pmf":
        return Pmf.from_masses(self.masses[: K + 1], self.label)

    def mean(self) -> tuple[float, float]:
        return pmf_mean(self)

    def relabel(self, label: str) -> "Pmf":
        return Pmf(self.masses, self.tail, label)

    def allclose(self, other: "Pmf", atol: float = 1e-12) -> bool:
        K = max(self.k_max, other.k_max)
        return bool(
            np.allclose(self.padded(K), other.padded(K), rtol=0, atol=atol)
            and abs(self.tail - other.tail) <= atol
        )

    def to_dict(self) -> dict:
        return {
            "k_max": self.k_max,
            "masses": [float(x) for x in self.masses],
            "tail": self.tail,
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "Pmf":
        masses = obj["masses"]
        if len(masses) != int(obj["k_max"]) + 1:
            raise DomainError("k_max does not match the number of masses")
        return cls(np.asarray(masses, dtype=np.float64), float(obj["tail"]), obj.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "Pmf":
        return cls.from_dict(json.loads(text))


def pointmass(k: int, K: int | None = None, label: str = "") -> Pmf:
    K = k if K is None else K
    m = np.zeros(K + 1)
    if k <= K:
        m[k] = 1.0
        return Pmf(m, 0.0, label)
    return Pmf(m, 1.0, label)


def warn_tail(p: Pmf, what: str = "") -> Pmf:
    if p.tail > TAIL_WARN:
        warnings.warn(
            f"{what or p.label or 'pmf'}: unassigned tail mass {p.tail:.3g} at K={p.k_max}",
            TruncationWarning,
            stacklevel=3,
        )
    return p


@dataclass(frozen=True)
class GeometricKernel:
    """``P{k} = (1 - ratio) * ratio**k``."""

    ratio: Fraction | float
    label: str = ""

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise DomainError(f"geometric ratio must lie in (0, 1), got {self.ratio}")

    @property
    def mean(self):
        return self.ratio / (1 - self.ratio)

    def pmf(self, K: int = DEFAULT_K) -> Pmf:
        return geometric_pmf(self, K)


@dataclass(frozen=True)
class MixtureKernel:
    components: tuple[tuple[Fraction | float, GeometricKernel], ...]
    label: str = ""

    def __post_init__(self):
        if not self.components:
            raise DomainError("empty mixture")
        total = sum(float(w) for w, _ in self.components)
        if abs(total - 1.0) > _TOL or any(w < 0 for w, _ in self.components):
            raise DomainError(f"mixture weights must be nonnegative and sum to 1, got {total}")

    @property
    def mean(self):
        return sum(w * g.mean for w, g in self.components)

    def pmf(self, K: int = DEFAULT_K) -> Pmf:
        m = sum(float(w) * g.pmf(K).masses for w, g in self.components)
        return Pmf.from_masses(m, self.label)


Kernel = GeometricKernel | MixtureKernel


def geometric_pmf(kernel: GeometricKernel | float | Fraction, K: int = DEFAULT_K) -> Pmf:
    if not isinstance(kernel, GeometricKernel):
        kernel = GeometricKernel(kernel)
    p = float(kernel.ratio)
    k = np.arange(K + 1)
    masses = (1.0 - p) * p**k
    return Pmf(masses, p ** (K + 1), kernel.label or f"geometric({kernel.ratio})")


def convolve(a: Pmf, b: Pmf, K: int | None = None) -> Pmf:
    """Law of the sum of independent draws; the tail absorbs everything past K."""
    K = max(a.k_max, b.k_max) if K is None else K
    m = np.convolve(a.masses, b.masses)[: K + 1]
    return Pmf.from_masses(m)


def convolution_powers(base: Pmf, m_max: int, K: int) -> np.ndarray:
    """Rows ``m = 0..m_max`` hold the truncated m-fold self-convolution of ``base``."""
    out = np.zeros((m_max + 1, K + 1))
    out[0, 0] = 1.0
    b = base.padded(K)
    for m in range(1, m_max + 1):
        out[m] = np.convolve(out[m - 1], b)[: K + 1]
    return out


def thin_pmf(p: Pmf, z: float, K: int | None = None) -> Pmf:
    """Binomial thinning: keep each counted unit independently with probability z."""
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"thinning probability must lie in [0, 1], got {z}")
    K = p.k_max if K is None else K
    ell = np.arange(p.k_max + 1)
    k = np.arange(K + 1)
    # matrix[l, k] = binom(l, k) z^k (1-z)^(l-k)
    matrix = _binom_dist.pmf(k[None, :], ell[:, None], float(z))
    return Pmf.from_masses(p.masses @ matrix, f"thin({p.label}, {z})")


def pmf_mean(p: Pmf) -> tuple[float, float]:
    """Mean over the assigned masses and the K*tail contribution left unresolved."""
    k = np.arange(p.masses.size)
    return float(np.dot(k, p.masses)), float(p.k_max * p.tail)


def tv_distance(p: Pmf, q: Pmf) -> float:
    K = max(p.k_max, q.k_max)
    return 0.5 * float(np.abs(p.padded(K) - q.padded(K)).sum()) + 0.5 * abs(p.tail - q.tail)
