"""Free, reflected and norm-box lattice walks; excursion and birth-death drivers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .crossing import CrossingTally, TallyMap, Target, Tracker, compile_targets
from .errors import DomainError, InvalidState
from .lattice import LatticeVector, norm
from .rng import StepStream, step_vector

VARIANTS = {"free": kernels.FREE, "reflected": kernels.REFLECTED,
            "box": kernels.BOX, "reflected_box": kernels.REFLECTED_BOX}


@dataclass(frozen=True)
class WalkKind:
    """Walk variant; box variants cap the l1 norm at ``N``."""

    variant: str = "free"
    N: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown walk variant {self.variant!r}")
        if self.boxed and (self.N is None or self.N < 1):
            raise DomainError("box walks need a capacity N >= 1")

    @property
    def boxed(self) -> bool:
        return self.variant in ("box", "reflected_box")

    @property
    def reflected(self) -> bool:
        return self.variant in ("reflected", "reflected_box")

    @property
    def code(self) -> int:
        return VARIANTS[self.variant]

    @classmethod
    def parse(cls, text: str) -> "WalkKind":
        """``free``, ``reflected``, ``box:N`` or ``reflected_box:N``."""
        name, _, cap = text.strip().lower().replace("-", "_").partition(":")
        try:
            return cls(name, int(cap) if cap else None)
        except ValueError as exc:
            raise DomainError(f"bad walk spec {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.variant}:{self.N}" if self.boxed else self.variant

    def check_state(self, state: Sequence[int]) -> None:
        if self.reflected and any(x < 0 for x in state):
            raise InvalidState(f"{state} leaves the nonnegative orthant")
        if self.boxed and norm(state) > self.N:
            raise InvalidState(f"{state} exceeds norm {self.N}")


def apply_step(kind: WalkKind, state: Sequence[int], e: Sequence[int]) -> LatticeVector:
    """One transition of the chosen walk: reflection first, then the norm cap."""
    kind.check_state(state)
    nxt = [s + x for s, x in zip(state, e)]
    if kind.reflected and any(x == -1 for x in nxt):
        nxt = [s - x for s, x in zip(state, e)]
    if kind.boxed and norm(nxt) > kind.N:
        return tuple(state)
    return tuple(nxt)


@dataclass
class ExcursionOutcome:
    status: str  # "returned" | "censored"
    length: int
    tallies: TallyMap | None = None
    max_norm: int = 0

    @property
    def returned(self) -> bool:
        return self.status == "returned"


def run_excursion(stream: StepStream, kind: WalkKind, d: int, t_max: int,
                  observers: Sequence = ()) -> ExcursionOutcome:
    """Walk from the origin until the first return or ``t_max`` steps.

    Every transition, including the closing one, is fed to each observer as
    ``observe(prev, next)``.  This is the readable reference path; bulk
    simulation goes through :func:`simulate_excursions`.
    """
    if t_max < 2:
        raise DomainError("t_max must be >= 2")
    state = (0,) * d
    top = 0
    for t in range(1, t_max + 1):
        nxt = apply_step(kind, state, step_vector(stream.draw(), d))
        for obs in observers:
            obs.observe(state, nxt)
        state = nxt
        top = max(top, norm(state))
        if norm(state) == 0:
            status = "returned"
            break
    else:
        status = "censored"
    tallies = None
    for obs in observers:
        if isinstance(obs, Tracker):
            part = obs.finalize(status)
            tallies = part if tallies is None else tallies + part
    return ExcursionOutcome(status, t, tallies, top)


@dataclass
class ExcursionBatch:
    """Columnar outcomes of many excursions."""

    targets: list[Target]
    status: np.ndarray     # 1 returned, 0 censored
    length: np.ndarray
    max_norm: np.ndarray
    tallies: np.ndarray    # [n, T, 3]: undirected, up, down
    t_max: int
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.status.size

    @property
    def returned(self) -> np.ndarray:
        return self.status == kernels.RETURNED

    def column(self, target: Target | str, which: str = "undirected") -> np.ndarray:
        name = target.name if isinstance(target, Target) else target
        idx = [t.name for t in self.targets].index(name)
        return self.tallies[:, idx, ("undirected", "up", "down").index(which)]

    def outcome(self, i: int) -> ExcursionOutcome:
        tm = TallyMap({t.name: CrossingTally(*map(int, self.tallies[i, j]))
                       for j, t in enumerate(self.targets)},
                      censored=not self.returned[i])
        return ExcursionOutcome("returned" if self.returned[i] else "censored",
                                int(self.length[i]), tm, int(self.max_norm[i]))

    @classmethod
    def concat(cls, parts: Sequence["ExcursionBatch"]) -> "ExcursionBatch":
        first = parts[0]
        return cls(first.targets,
                   np.concatenate([p.status for p in parts]),
                   np.concatenate([p.length for p in parts]),
                   np.concatenate([p.max_norm for p in parts]),
                   np.concatenate([p.tallies for p in parts]),
                   first.t_max, dict(first.meta))


def simulate_excursions(stream: StepStream, kind: WalkKind, t_max: int, count: int,
                        targets: Sequence[Target] = (), use_numba: bool | None = None
                        ) -> ExcursionBatch:
    """Run ``count`` excursions from the stream and tally every target."""
    d = stream.d
    if t_max < 2:
        raise DomainError("t_max must be >= 2")
    targets = list(targets)
    table = compile_targets(targets, d)
    fn = kernels.select(kernels.walk_kernel, kernels.walk_numpy, use_numba)
    T = len(targets)
    pos = np.zeros(d, np.int64)
    carry = np.zeros(4, np.int64)
    tally = np.zeros((T, 3), np.int64)
    out_status = np.zeros(count, np.int8)
    out_len = np.zeros(count, np.int64)
    out_top = np.zeros(count, np.int64)
    out_tally = np.zeros((count, T, 3), np.int32)
    done = 0
    cap = kind.N if kind.boxed else 0
    while done < count:
        if stream.exhausted():
            stream.refill()
        stream.offset, done = fn(stream.buffer, stream.offset, kind.code, cap, t_max, count,
                                 pos, carry, tally, *table, out_status, out_len, out_top,
                                 out_tally, done)
        stream.offset, done = int(stream.offset), int(done)
    return ExcursionBatch(targets, out_status, out_len, out_top, out_tally, t_max,
                          {"walk": str(kind), "d": d})


def birth_thresholds(lambdas: Sequence[float], mus: Sequence[float], levels: int) -> np.ndarray:
    """32-bit birth thresholds per population level (index 0 unused)."""
    out = np.zeros(levels + 1, np.uint64)
    for p in range(1, levels + 1):
        lam = lambdas[min(p, len(lambdas) - 1)]
        mu = mus[min(p, len(mus) - 1)]
        if lam < 0 or mu <= 0:
            raise DomainError(f"rates at population {p} need lambda >= 0 and mu > 0")
        out[p] = int(lam / (lam + mu) * 2**32)
    out[0] = out[1]
    return out


@dataclass
class BirthDeathBatch:
    status: np.ndarray
    length: np.ndarray
    g: np.ndarray  # [n, levels]

    @property
    def returned(self) -> np.ndarray:
        return self.status == kernels.RETURNED


def simulate_birth_death(stream: StepStream, lambdas: Sequence[float], mus: Sequence[float],
                         t_max: int, count: int, n_levels: int = 16,
                         use_numba: bool | None = None, block: int | None = None
                         ) -> BirthDeathBatch:
    """Birth counts g(n), n < n_levels, for ``count`` runs of the embedded jump chain.

    Rate lists are indexed by population; the last entry extends upward.
    A run that does not go extinct within ``t_max`` jumps is censored.
    """
    thr = birth_thresholds(lambdas, mus, max(len(lambdas), len(mus), 2))
    fn = kernels.select(kernels.bd_kernel, kernels.bd_numpy, use_numba)
    carry = np.zeros(3, np.int64)
    g = np.zeros(n_levels, np.int64)
    out_status = np.zeros(count, np.int8)
    out_len = np.zeros(count, np.int64)
    out_g = np.zeros((count, n_levels), np.int32)
    done = 0
    buf = np.empty(0, np.uint64)
    off = 0
    while done < count:
        if off >= buf.size:
            buf = stream.raw32(block or stream.block)
            off = 0
        off, done = fn(buf, off, thr, t_max, count, n_levels, carry, g,
                       out_status, out_len, out_g, done)
        off, done = int(off), int(done)
    return BirthDeathBatch(out_status, out_len, out_g)


def run_bd_excursion(stream: StepStream, lambdas: Sequence[float], mus: Sequence[float],
                     t_max: int, n_levels: int = 16) -> tuple[str, list[int]]:
    """Single birth-death run: ``(status, [g(0), g(1), ...])``."""
    batch = simulate_birth_death(stream, lambdas, mus, t_max, 1, n_levels, block=256)
    status = "returned" if batch.returned[0] else "censored"
    return status, [int(x) for x in batch.g[0]]
