"""Crossing targets, streaming trackers and tally containers."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidTarget
from .lattice import LatticeVector, lower_set, norm, upper_set, vec

KIND_CODES = {"state": 0, "shell": 1, "xclass": 2, "adirected": 3}
FIELDS = ("undirected", "up", "down")


@dataclass(frozen=True)
class Target:
    """What to count: a state, a norm shell, an X-class, or A-directed entries."""

    kind: str
    vector: LatticeVector | None = None
    level: int | None = None
    A: tuple[LatticeVector, ...] = ()

    @property
    def norm(self) -> int:
        return self.level if self.kind == "shell" else norm(self.vector)

    @property
    def name(self) -> str:
        if self.kind == "shell":
            return f"shell:{self.level}"
        text = f"{self.kind}:{_fmt(self.vector)}"
        if self.kind == "adirected":
            text += "|A=" + ";".join(_fmt(a) for a in self.A)
        return text

    def __str__(self) -> str:
        return self.name

    def validate(self, d: int) -> "Target":
        if self.kind not in KIND_CODES:
            raise InvalidTarget(f"unknown target kind {self.kind!r}")
        if self.kind == "shell":
            if self.level is None or self.level < 0:
                raise InvalidTarget("shell targets need a level >= 0")
            return self
        if self.vector is None or len(self.vector) != d:
            raise InvalidTarget(f"{self.name}: vector must have dimension {d}")
        if all(x == 0 for x in self.vector):
            raise InvalidTarget(f"{self.name}: state-type targets exclude the origin")
        if self.kind == "adirected":
            if not self.A:
                raise InvalidTarget(f"{self.name}: A must be nonempty")
            nbrs = set(lower_set(self.vector)) | set(upper_set(self.vector))
            for a in self.A:
                if len(a) != d or a not in nbrs:
                    raise InvalidTarget(f"{self.name}: {a} is not a neighbour of {self.vector}")
        return self

    def contains(self, state: Sequence[int]) -> bool:
        if self.kind == "shell":
            return norm(state) == self.level
        if self.kind == "xclass":
            return tuple(abs(x) for x in state) == tuple(abs(x) for x in self.vector)
        return tuple(state) == self.vector

    @classmethod
    def parse(cls, text: str) -> "Target":
        """Parse ``state:v``, ``shell:n``, ``xclass:v`` or ``adirected:v|A=w1;w2``."""
        kind, sep, rest = text.strip().partition(":")
        kind = kind.lower()
        if not sep:
            raise InvalidTarget(f"malformed target {text!r}")
        try:
            if kind == "shell":
                return Shell(int(rest))
            if kind in ("state", "xclass"):
                return cls(kind, vec(rest))
            if kind == "adirected":
                v, sep, a = rest.partition("|")
                if not sep or not a.startswith("A="):
                    raise InvalidTarget(f"adirected target needs '|A=...': {text!r}")
                return ADirected(vec(v), [vec(w) for w in a[2:].split(";") if w])
        except ValueError as exc:
            if isinstance(exc, InvalidTarget):
                raise
            raise InvalidTarget(f"malformed target {text!r}: {exc}") from exc
        raise InvalidTarget(f"unknown target kind in {text!r}")


def _fmt(v: Sequence[int]) -> str:
    return ",".join(str(x) for x in v)


def State(v) -> Target:
    return Target("state", vec(v))


def Shell(n: int) -> Target:
    return Target("shell", level=int(n))


def XClass(v) -> Target:
    return Target("xclass", vec(v))


def ADirected(v, A: Iterable) -> Target:
    return Target("adirected", vec(v), A=tuple(vec(a) for a in A))


@dataclass(frozen=True)
class CrossingTally:
    undirected: int = 0
    up: int = 0
    down: int = 0

    def __add__(self, other: "CrossingTally") -> "CrossingTally":
        return CrossingTally(self.undirected + other.undirected, self.up + other.up,
                             self.down + other.down)

    def get(self, which: str) -> int:
        return getattr(self, which)


class TargetTable(NamedTuple):
    """Flat arrays describing targets for the compiled kernels."""

    kinds: np.ndarray      # int64 [T]
    vectors: np.ndarray    # int64 [T, d]; modulus for X-classes
    a_off: np.ndarray      # int64 [T + 1]
    a_vecs: np.ndarray     # int64 [nA, d]
    by_off: np.ndarray     # int64 [max_norm + 2]
    by_idx: np.ndarray     # int64 [T]
    max_norm: int


def compile_targets(targets: Sequence[Target], d: int) -> TargetTable:
    T = len(targets)
    kinds = np.zeros(T, np.int64)
    vectors = np.zeros((T, d), np.int64)
    a_off = np.zeros(T + 1, np.int64)
    a_rows: list[LatticeVector] = []
    norms = np.zeros(T, np.int64)
    for i, t in enumerate(targets):
        t.validate(d)
        kinds[i] = KIND_CODES[t.kind]
        norms[i] = t.norm
        if t.vector is not None:
            vectors[i] = np.abs(t.vector) if t.kind == "xclass" else t.vector
        a_rows.extend(t.A)
        a_off[i + 1] = len(a_rows)
    a_vecs = np.array(a_rows, np.int64).reshape(-1, d)
    max_norm = int(norms.max()) if T else -1
    order = np.argsort(norms, kind="stable")
    counts = np.bincount(norms, minlength=max_norm + 1) if T else np.zeros(0, np.int64)
    by_off = np.zeros(max_norm + 2, np.int64)
    by_off[1:] = np.cumsum(counts)
    return TargetTable(kinds, vectors, a_off, a_vecs, by_off, order.astype(np.int64), max_norm)


@dataclass
class Tracker:
    """Reference observer: tallies crossings one transition at a time."""

    targets: list[Target]
    d: int
    counts: np.ndarray = field(init=False)
    _xmembers: list = field(init=False, repr=False)

    def __post_init__(self):
        self.targets = [t.validate(self.d) for t in self.targets]
        self.counts = np.zeros((len(self.targets), 3), np.int64)
        self._xmembers = [
            tuple(abs(x) for x in t.vector) if t.kind == "xclass" else None for t in self.targets
        ]

    def observe(self, prev: Sequence[int], nxt: Sequence[int]) -> None:
        prev, nxt = tuple(prev), tuple(nxt)
        if prev == nxt:  # blocked box step: nothing is entered
            return
        pn, nn = norm(prev), norm(nxt)
        for i, t in enumerate(self.targets):
            if t.kind == "adirected":
                hit = nxt == t.vector and prev in t.A
            elif t.kind == "xclass":
                hit = tuple(abs(x) for x in nxt) == self._xmembers[i]
            else:
                hit = t.contains(nxt)
            if not hit:
                continue
            self.counts[i, 0] += 1
            if pn == nn - 1:
                self.counts[i, 1] += 1
            elif pn == nn + 1:
                self.counts[i, 2] += 1

    def finalize(self, status: str = "returned") -> "TallyMap":
        return TallyMap(
            {t.name: CrossingTally(*map(int, row)) for t, row in zip(self.targets, self.counts)},
            censored=(status != "returned"),
        )


@dataclass(frozen=True)
class TallyMap:
    tallies: dict[str, CrossingTally]
    censored: bool = False

    def __getitem__(self, name) -> CrossingTally:
        return self.tallies[name.name if isinstance(name, Target) else name]

    def __add__(self, other: "TallyMap") -> "TallyMap":
        keys = list(dict.fromkeys([*self.tallies, *other.tallies]))
        merged = {k: self.tallies.get(k, CrossingTally()) + other.tallies.get(k, CrossingTally())
                  for k in keys}
        return TallyMap(merged, self.censored or other.censored)

    def rows(self, targets: Sequence[Target] | None = None) -> list[dict]:
        kinds = {t.name: t.kind for t in targets} if targets else {}
        return [
            {"target": name, "kind": kinds.get(name, name.split(":")[0]), "up": c.up,
             "down": c.down, "undirected": c.undirected, "censored": self.censored}
            for name, c in self.tallies.items()
        ]

    def to_json(self) -> str:
        return json.dumps(self.rows())
