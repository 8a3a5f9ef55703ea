"""Monte Carlo verification: experiments, empirical laws, adjudication, reports.

Conditioning on a finite return time is realised as ``tau <= t_max``.  Every
experiment runs a ladder of cutoffs so censoring bias can be watched as it
decays instead of being assumed away.  The ladder is coupled: excursions are
simulated once at the largest cutoff, and an excursion counts as returned at
cutoff ``c`` iff it returned within ``c`` steps.  Its tallies are then exactly
those a run truncated at ``c`` would have produced.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import analytic
from .crossing import ADirected, Shell, State, Target, XClass
from .errors import (
    AuditViolation,
    ConfigError,
    DomainError,
    EmptySample,
    InsufficientConditionedSample,
)
from .lattice import abs_upper_set, lower_set, norm, upper_set, vec, x_class
from .pmf import DEFAULT_K, GeometricKernel, Pmf, thin_pmf, tv_distance
from .rng import StepStream
from .walk import ExcursionBatch, WalkKind, simulate_birth_death, simulate_excursions

ALPHA = 0.01
MIN_CONDITIONED = 500
VERDICTS = ("pass", "fail", "flagged")
CSV_COLUMNS = ("identity", "target", "cutoff", "n_returned", "censored_frac", "estimate",
               "ci_low", "ci_high", "analytic", "tv", "chi2", "verdict")

__all__ = [
    "ExperimentConfig", "MCResult", "run_mc", "EmpiricalDist", "empirical_pmf", "wilson_interval",
    "tv_distance", "chi_square", "Measurement", "measure_law", "measure_expectation",
    "measure_thinning", "measure_return_fraction", "measure_audit", "measure_birth_death",
    "measure_oracle", "kernel_adjudicator", "d1_exhaustive_oracle", "path_audit", "AuditReport",
    "trend_verdict", "adjudicate", "VerificationReport",
]


# ---------------------------------------------------------------- experiments

@dataclass
class ExperimentConfig:
    d: int
    walk: WalkKind
    targets: list[Target]
    quota: int
    ladder: list[int]
    seed: int = 0
    workers: int = 1
    conditioning: int | None = None
    min_quota: int = 1000

    def __post_init__(self):
        if isinstance(self.walk, str):
            self.walk = WalkKind.parse(self.walk)
        self.ladder = [int(c) for c in self.ladder]
        if self.d < 1:
            raise ConfigError("dimension must be >= 1")
        if not self.ladder or any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ConfigError(f"cutoff ladder must be nonempty and strictly increasing: {self.ladder}")
        if self.ladder[0] < 2:
            raise ConfigError("cutoffs must be >= 2")
        if self.quota < self.min_quota:
            raise ConfigError(f"excursion quota {self.quota} is below {self.min_quota}")
        if self.workers < 1:
            raise ConfigError("need at least one worker")
        for t in self.targets:
            t.validate(self.d)

    @property
    def t_max(self) -> int:
        return self.ladder[-1]

    def worker_quotas(self) -> list[int]:
        q, r = divmod(self.quota, self.workers)
        return [q + (w < r) for w in range(self.workers)]


def _worker(args) -> ExcursionBatch:
    seed, index, d, walk, t_max, count, targets = args
    stream = StepStream(seed, index, d)
    return simulate_excursions(stream, walk, t_max, count, targets)


@dataclass
class MCResult:
    config: ExperimentConfig
    batch: ExcursionBatch

    def returned_at(self, cutoff: int | None = None) -> np.ndarray:
        cutoff = self.config.t_max if cutoff is None else cutoff
        return self.batch.returned & (self.batch.length <= cutoff)

    def n_returned(self, cutoff: int | None = None) -> int:
        return int(self.returned_at(cutoff).sum())

    def censored_frac(self, cutoff: int | None = None) -> float:
        return 1.0 - self.n_returned(cutoff) / len(self.batch)

    def values(self, target: Target | str, which: str = "undirected",
               cutoff: int | None = None) -> np.ndarray:
        return self.batch.column(target, which)[self.returned_at(cutoff)].astype(np.int64)

    def dist(self, target: Target | str, which: str = "undirected",
             cutoff: int | None = None) -> "EmpiricalDist":
        mask = self.returned_at(cutoff)
        vals = self.batch.column(target, which)[mask]
        return EmpiricalDist.from_samples(vals, censored=int(mask.size - mask.sum()))


def run_mc(config: ExperimentConfig, audit: bool = True) -> MCResult:
    """Simulate ``config.quota`` excursions at the largest cutoff.

    Worker ``w`` draws from substream ``(seed, w)`` and the batches are merged in
    worker order, so the result depends only on seed, worker count and quota.
    With ``audit`` set, any exact per-path identity failing raises
    :class:`AuditViolation`.
    """
    jobs = [(config.seed, w, config.d, config.walk, config.t_max, q, config.targets)
            for w, q in enumerate(config.worker_quotas())]
    if config.workers == 1:
        parts = [_worker(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_worker, jobs))
    batch = ExcursionBatch.concat(parts)
    batch.meta.update(seed=config.seed, workers=config.workers)
    result = MCResult(config, batch)
    if result.n_returned() == 0:
        warnings.warn("no excursion returned below the largest cutoff", RuntimeWarning,
                      stacklevel=2)
    if audit:
        report = path_audit(batch)
        if not report.ok:
            raise AuditViolation(report)
    return result


# ---------------------------------------------------------- empirical laws

@dataclass(frozen=True)
class EmpiricalDist:
    counts: np.ndarray
    n_returned: int
    censored: int = 0

    def __post_init__(self):
        if int(np.sum(self.counts)) != self.n_returned:
            raise DomainError("counts must sum to n_returned")

    @classmethod
    def from_samples(cls, values: Iterable[int], censored: int = 0) -> "EmpiricalDist":
        v = np.asarray(values, dtype=np.int64).reshape(-1)
        counts = np.bincount(v) if v.size else np.zeros(1, np.int64)
        return cls(counts, int(v.size), censored)

    @classmethod
    def from_counts(cls, counts: dict[int, int] | Sequence[int], censored: int = 0) -> "EmpiricalDist":
        if isinstance(counts, dict):
            arr = np.zeros(max(counts) + 1, np.int64)
            for k, c in counts.items():
                arr[k] = c
        else:
            arr = np.asarray(counts, np.int64)
        return cls(arr, int(arr.sum()), censored)

    @property
    def censored_frac(self) -> float:
        total = self.n_returned + self.censored
        return self.censored / total if total else 0.0

    def mean(self) -> tuple[float, float]:
        """Sample mean and its standard error."""
        if self.n_returned == 0:
            raise EmptySample("no returned excursions")
        k = np.arange(self.counts.size)
        m = float(k @ self.counts) / self.n_returned
        var = float((k - m) ** 2 @ self.counts) / max(self.n_returned - 1, 1)
        return m, math.sqrt(var / self.n_returned)


def _z(alpha: float) -> float:
    return float(stats.norm.ppf(1 - alpha / 2))


def wilson_interval(successes, n: int, alpha: float = ALPHA) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(successes, dtype=np.float64)
    z = _z(alpha)
    p = x / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return np.clip(centre - half, 0, 1), np.clip(centre + half, 0, 1)


def empirical_pmf(e: EmpiricalDist, alpha: float = ALPHA, label: str = "empirical"
                  ) -> tuple[Pmf, np.ndarray, np.ndarray]:
    """Relative frequencies with per-bin Wilson intervals."""
    if e.n_returned < 1:
        raise EmptySample("no returned excursions to build a pmf from")
    lo, hi = wilson_interval(e.counts, e.n_returned, alpha)
    return Pmf(e.counts / e.n_returned, 0.0, label), lo, hi


def chi_square(e: EmpiricalDist, p: Pmf, min_expected: float = 5.0) -> tuple[float, int, float]:
    """Pearson statistic, degrees of freedom and p-value after merging sparse bins.

    Bins are merged left to right until each expected count reaches
    ``min_expected``; observations past ``p``'s support join the tail bin.
    """
    n = e.n_returned
    K = p.k_max
    obs = np.zeros(K + 2)
    head = e.counts[: K + 1]
    obs[: head.size] = head
    obs[K + 1] = e.counts[K + 1:].sum()
    exp = n * np.append(p.masses, p.tail)
    merged_o, merged_e = [], []
    acc_o = acc_e = 0.0
    for o, x in zip(obs, exp):
        acc_o += o
        acc_e += x
        if acc_e >= min_expected:
            merged_o.append(acc_o)
            merged_e.append(acc_e)
            acc_o = acc_e = 0.0
    if merged_e:
        merged_o[-1] += acc_o
        merged_e[-1] += acc_e
    if len(merged_e) < 2:
        return 0.0, 0, 1.0
    o, x = np.array(merged_o), np.array(merged_e)
    stat = float(((o - x) ** 2 / x).sum())
    dof = len(o) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof))


def _tv_se(q: np.ndarray, n: int) -> float:
    """Rough standard error of an empirical TV distance (sum of bin errors)."""
    return 0.5 * float(np.sqrt(q * (1 - q) / n).sum())


# -------------------------------------------------------------- path audit

@dataclass
class AuditReport:
    checked: int
    violations: dict[str, int]
    first_bad: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    @property
    def total(self) -> int:
        return sum(self.violations.values())

    def summary(self) -> str:
        bad = {k: v for k, v in self.violations.items() if v}
        where = {k: self.first_bad[k] for k in bad}
        return f"{self.checked} excursions, violations {bad}, first offending index {where}"


def path_audit(batch: ExcursionBatch, mask: np.ndarray | None = None) -> AuditReport:
    """Exact per-path identities on returned excursions.

    Checks whichever of these the tracked targets allow: f = f-up + f-down,
    flow between consecutive shells, X-class = sum of its tracked states,
    the closing entry into the origin, the forced first step onto shell 1,
    parity of the return time, and the speed limit ``norm(v) <= tau / 2``.
    """
    keep = batch.returned if mask is None else (mask & batch.returned)
    idx = np.flatnonzero(keep)
    tallies = batch.tallies[idx].astype(np.int64)
    length = batch.length[idx]
    names = [t.name for t in batch.targets]
    col = {n: i for i, n in enumerate(names)}
    viol: dict[str, np.ndarray] = {}

    def add(name, bad):
        viol[name] = bad if name not in viol else viol[name] | bad

    add("parity", length % 2 != 0)
    add("speed", batch.max_norm[idx] > length // 2)
    for j, t in enumerate(batch.targets):
        row = tallies[:, j]
        if t.kind != "adirected":
            add("f=up+down", row[:, 0] != row[:, 1] + row[:, 2])
        if t.kind in ("state", "xclass", "adirected"):
            add("speed", (row[:, 0] > 0) & (norm(t.vector) > length // 2))
        if t.kind == "shell":
            nxt = col.get(Shell(t.level + 1).name)
            if nxt is not None:
                add("flow", row[:, 2] != tallies[:, nxt, 1])
            if t.level == 0:
                add("origin_down=1", row[:, 2] != 1)
            if t.level == 1:
                add("shell1_up=1", row[:, 1] != 1)
        if t.kind == "xclass":
            members = [col.get(State(w).name) for w in x_class(t.vector)]
            if all(m is not None for m in members):
                add("xclass=sum", (row != tallies[:, members, :].sum(axis=1)).any(axis=1))
    counts = {k: int(v.sum()) for k, v in viol.items()}
    first = {k: int(idx[np.flatnonzero(v)[0]]) for k, v in viol.items() if v.any()}
    return AuditReport(int(idx.size), counts, first)


# ------------------------------------------------------------ measurements

@dataclass
class Measurement:
    """One identity measured across a cutoff ladder, awaiting a verdict.

    ``discrepancy`` is what the tolerance applies to (TV distance, relative
    error, violation count ...) and ``disc_se`` its standard error; the
    adjudicator turns those into CI-overlap-tolerant trend decisions.
    """

    identity: str
    target: str
    cutoffs: list
    n_returned: list[int]
    censored_frac: list[float]
    estimate: list[float]
    est_se: list[float]
    analytic: list
    discrepancy: list[float]
    disc_se: list[float]
    tolerance: float
    tv: list | None = None
    chi2: list | None = None
    flagged: bool = False
    trend: bool = True
    note: str = ""
    extra: dict = field(default_factory=dict)


def _law_stats(e: EmpiricalDist, law: Pmf):
    emp, _, _ = empirical_pmf(e)
    tv = tv_distance(emp, law)
    stat, dof, pval = chi_square(e, law)
    mean, se = e.mean()
    return emp, tv, (stat, dof, pval), mean, se


def _require(n: int, min_samples: int) -> None:
    if n < max(min_samples, 1):
        raise InsufficientConditionedSample(n, max(min_samples, 1))


def measure_law(result: MCResult, target: Target, which: str, law: Pmf, identity: str,
                tolerance: float, flagged: bool = False, min_samples: int = 1) -> Measurement:
    """Empirical law of a tally column against an analytic pmf at every cutoff."""
    m = Measurement(identity, f"{target.name}[{which}]", [], [], [], [], [], [], [], [],
                    tolerance, tv=[], chi2=[], flagged=flagged)
    law_mean = law.mean()[0]
    for c in result.config.ladder:
        e = result.dist(target, which, c)
        m.cutoffs.append(c)
        m.n_returned.append(e.n_returned)
        m.censored_frac.append(result.censored_frac(c))
        _require(e.n_returned, min_samples)
        emp, tv, chi, mean, se = _law_stats(e, law)
        m.estimate.append(mean)
        m.est_se.append(se)
        m.analytic.append(law_mean)
        m.tv.append(tv)
        m.chi2.append(chi)
        m.discrepancy.append(tv)
        m.disc_se.append(_tv_se(emp.masses, e.n_returned))
    m.extra["analytic_pmf"] = law.truncate(min(law.k_max, 40)).to_dict()
    return m


def measure_expectation(result: MCResult, target: Target, which: str, expected: float,
                        identity: str, tolerance: float, min_samples: int = 1) -> Measurement:
    """Conditional mean of a tally column vs an exact value; discrepancy is relative."""
    m = Measurement(identity, f"{target.name}[{which}]", [], [], [], [], [], [], [], [], tolerance)
    for c in result.config.ladder:
        e = result.dist(target, which, c)
        _require(e.n_returned, min_samples)
        mean, se = e.mean()
        m.cutoffs.append(c)
        m.n_returned.append(e.n_returned)
        m.censored_frac.append(result.censored_frac(c))
        m.estimate.append(mean)
        m.est_se.append(se)
        m.analytic.append(float(expected))
        m.discrepancy.append(abs(mean - float(expected)) / abs(float(expected)))
        m.disc_se.append(se / abs(float(expected)))
    return m


def measure_thinning(result: MCResult, v, A: Sequence, tolerance: float,
                     identity: str = "thinning", min_samples: int = 1) -> Measurement:
    """f_A against binomial thinning of the empirical up-count law."""
    v = vec(v)
    A = [vec(a) for a in A]
    lower = lower_set(v)
    if not set(A) < set(lower):
        raise DomainError("thinning check needs A to be a strict subset of the lower set")
    z = len(A) / len(lower)
    up, fa = State(v), ADirected(v, A)
    m = Measurement(identity, fa.name, [], [], [], [], [], [], [], [], tolerance, tv=[], chi2=[])
    for c in result.config.ladder:
        e_up = result.dist(up, "up", c)
        e_a = result.dist(fa, "undirected", c)
        _require(e_a.n_returned, min_samples)
        base, _, _ = empirical_pmf(e_up)
        law = thin_pmf(base, z)
        emp, tv, chi, mean, se = _law_stats(e_a, law)
        m.cutoffs.append(c)
        m.n_returned.append(e_a.n_returned)
        m.censored_frac.append(result.censored_frac(c))
        m.estimate.append(mean)
        m.est_se.append(se)
        m.analytic.append(law.mean()[0])
        m.tv.append(tv)
        m.chi2.append(chi)
        m.discrepancy.append(tv)
        m.disc_se.append(_tv_se(emp.masses, e_a.n_returned))
    m.extra["z"] = z
    return m


def measure_return_fraction(result: MCResult, low: float, high: float,
                            identity: str = "return_fraction", min_samples: int = 1) -> Measurement:
    m = Measurement(identity, "origin", [], [], [], [], [], [], [], [], 0.0, trend=False)
    n = len(result.batch)
    _require(n, min_samples)
    for c in result.config.ladder:
        r = result.n_returned(c) / n
        m.cutoffs.append(c)
        m.n_returned.append(result.n_returned(c))
        m.censored_frac.append(1 - r)
        m.estimate.append(r)
        m.est_se.append(math.sqrt(r * (1 - r) / n))
        m.analytic.append(f"[{low}, {high}]")
        m.discrepancy.append(max(low - r, r - high, 0.0))
        m.disc_se.append(0.0)
    return m


def measure_audit(result: MCResult, identity: str = "path_audit") -> Measurement:
    m = Measurement(identity, "all", [], [], [], [], [], [], [], [], 0.0, trend=False)
    for c in result.config.ladder:
        rep = path_audit(result.batch, result.returned_at(c))
        m.cutoffs.append(c)
        m.n_returned.append(rep.checked)
        m.censored_frac.append(result.censored_frac(c))
        m.estimate.append(float(rep.total))
        m.est_se.append(0.0)
        m.analytic.append(0)
        m.discrepancy.append(float(rep.total))
        m.disc_se.append(0.0)
        m.extra[str(c)] = rep.violations
    return m


def measure_birth_death(lambdas: Sequence[float], mus: Sequence[float], n: int, runs: int,
                        t_max: int, seed: int, tolerance: float, K: int = DEFAULT_K,
                        convention: str = "destination", identity: str = "birth_death"
                        ) -> Measurement:
    """Birth counts g(n) of the simulated jump chain against the V_n chain law."""
    stream = StepStream(seed, 0, 1)
    batch = simulate_birth_death(stream, lambdas, mus, t_max, runs, n_levels=n + 1)
    ok = batch.returned
    e = EmpiricalDist.from_samples(batch.g[ok, n], censored=int((~ok).sum()))
    _require(e.n_returned, 1)
    law = analytic.v_chain_pmf(lambdas, mus, n, K, convention)
    emp, tv, chi, mean, se = _law_stats(e, law)
    return Measurement(identity, f"g({n})", [t_max], [e.n_returned], [e.censored_frac], [mean],
                       [se], [law.mean()[0]], [tv], [_tv_se(emp.masses, e.n_returned)],
                       tolerance, tv=[tv], chi2=[chi], trend=False)


def measure_oracle(L_values: Sequence[int], gap: float = 0.02, k_max: int = 3,
                   identity: str = "d1_oracle") -> Measurement:
    """Exact enumeration masses for f(1) against the one-dimensional closed form.

    Discrepancy per L: the worst of (a) the largest excess of any oracle bin over
    its analytic value, (b) the largest shortfall for k <= k_max at level 1
    (total direction) beyond ``gap``, and (c) any decrease as L grows.
    """
    m = Measurement(identity, "f(1)", [], [], [], [], [], [], [], [], 0.0, trend=False)
    prev = None
    for L in L_values:
        orc = d1_exhaustive_oracle(L)
        excess = 0.0
        for (level, direction), masses in orc.masses.items():
            law = analytic.d1_crossing_law(level, direction, K=max(len(masses) + 5, 80))
            for k, x in enumerate(masses):
                excess = max(excess, float(x) - law[k])
        law1 = analytic.d1_crossing_law(1, "total", K=80)
        level1 = orc.masses[(1, "total")]
        shortfall = [law1[k] - float(level1[k]) if k < len(level1) else law1[k]
                     for k in range(k_max + 1)]
        drop = 0.0
        if prev is not None:
            for key, masses in orc.masses.items():
                old = prev.masses[key]
                for k, x in enumerate(old):
                    new = masses[k] if k < len(masses) else Fraction(0)
                    drop = max(drop, float(x - new))
        m.cutoffs.append(L)
        m.n_returned.append(0)
        m.censored_frac.append(1 - float(orc.returned_mass))
        m.estimate.append(max(shortfall))
        m.est_se.append(0.0)
        m.analytic.append(gap)
        m.discrepancy.append(max(excess, max(shortfall) - gap, drop, 0.0))
        m.disc_se.append(0.0)
        m.extra[str(L)] = {"shortfall_k": shortfall, "max_excess": excess, "max_drop": drop}
        prev = orc
    return m


# ----------------------------------------------------------- exact oracle

@dataclass(frozen=True)
class OracleResult:
    L: int
    returned_mass: Fraction
    masses: dict  # (level, direction) -> list[Fraction] indexed by count k


def d1_exhaustive_oracle(L: int, levels: Sequence[int] = (-3, -2, -1, 1, 2, 3)) -> OracleResult:
    """Exact sub-probability laws of crossing counts over first-return paths of length <= L.

    Paths are aggregated by dynamic programming over ``(position, count)``
    instead of one-by-one backtracking; each path of length ``t`` carries weight
    ``2**-t`` so the result equals the enumeration sum exactly.
    """
    if L % 2 or L < 2 or L > 24:
        raise DomainError("L must be even with 2 <= L <= 24")
    out: dict = {}
    returned = Fraction(0)
    for level in levels:
        for direction in ("up", "down", "total"):
            # paths[(pos, count)] = number of surviving paths of the current length
            paths = {(0, 0): 1}
            done: dict[int, int] = {}
            for t in range(1, L + 1):
                nxt: dict = {}
                for (pos, cnt), w in paths.items():
                    for step in (1, -1):
                        q = pos + step
                        c = cnt
                        if q == level and (direction == "total"
                                           or (direction == "up" and abs(pos) == abs(level) - 1)
                                           or (direction == "down" and abs(pos) == abs(level) + 1)):
                            c += 1
                        if q == 0:
                            done[c] = done.get(c, 0) + w * 2 ** (L - t)
                        else:
                            nxt[(q, c)] = nxt.get((q, c), 0) + w
                paths = nxt
            top = max(done) if done else 0
            out[(level, direction)] = [Fraction(done.get(k, 0), 2**L) for k in range(top + 1)]
            if level == levels[0] and direction == "up":
                returned = sum(out[(level, direction)], Fraction(0))
    return OracleResult(L, returned, out)


# ------------------------------------------------------ kernel adjudication

def _parent_sum(result: MCResult, v, direction: str, family: str, parent: str,
                mask: np.ndarray) -> np.ndarray:
    which = {"written": direction, "total": "undirected"}[parent]
    if direction == "up":
        parents = lower_set(tuple(abs(x) for x in v) if family == "xclass" else v)
    else:
        parents = ([m for m, _ in abs_upper_set(v)] if family == "xclass" else upper_set(v))
    make = XClass if family == "xclass" else State
    total = np.zeros(int(mask.sum()), np.int64)
    for w in parents:
        total += result.batch.column(make(w), which)[mask]
    return total


def parent_targets(v, direction: str, family: str) -> list[Target]:
    """Targets a run must track for :func:`kernel_adjudicator`."""
    v = vec(v)
    make = XClass if family == "xclass" else State
    if direction == "up":
        parents = lower_set(tuple(abs(x) for x in v) if family == "xclass" else v)
    else:
        parents = [m for m, _ in abs_upper_set(v)] if family == "xclass" else upper_set(v)
    return [make(v)] + [make(w) for w in parents]


def consistent_kernel(v, direction: str, family: str, parent: str = "written") -> GeometricKernel:
    """Geometric kernel whose per-parent mean reconciles the exact expectations.

    Mean = E[target count] / E[parent sum], both taken from the closed-form
    expectations, so composing it over the parents reproduces the target mean.
    """
    v = vec(v)
    e = analytic.expected_crossings(v)
    target = e.get(direction, family)
    if direction == "up":
        parents = lower_set(tuple(abs(x) for x in v) if family == "xclass" else v)
    else:
        parents = [m for m, _ in abs_upper_set(v)] if family == "xclass" else upper_set(v)
    which = direction if parent == "written" else "total"
    denom = sum((analytic.expected_crossings(w).get(which, family) for w in parents), Fraction(0))
    mu = target / denom
    return GeometricKernel(mu / (1 + mu), f"consistent_{direction}{v}")


def kernel_adjudicator(result: MCResult, v, direction: str, family: str = "state",
                       m: int | None = None, parent: str = "written", cutoff: int | None = None,
                       K: int = 60, min_samples: int = MIN_CONDITIONED,
                       tolerance: float = 0.03) -> Measurement:
    """Conditional law of a target count given the parent sum equals ``m``.

    ``parent="written"`` sums the same-direction counts over the parents, as the
    recurrence is stated; ``parent="total"`` sums total visits instead.  The row
    carries the stated kernel prediction and the expectation-consistent
    alternative side by side.  Rows for d >= 2 are flagged, never pass/fail.
    """
    v = vec(v)
    m = result.config.conditioning if m is None else m
    if m is None or m < 1:
        raise DomainError("kernel adjudication needs a conditioning value m >= 1")
    which = direction
    make = XClass if family == "xclass" else State
    stated = analytic.state_kernel(v, direction, family)
    alt = consistent_kernel(v, direction, family, parent)
    law = analytic.conditional_count_pmf(stated, m, K)
    alt_law = analytic.conditional_count_pmf(alt, m, K)
    flagged = len(v) >= 2
    meas = Measurement(f"kernel[{parent}]", f"{make(v).name}[{which}]|parents={m}",
                       [], [], [], [], [], [], [], [], tolerance, tv=[], chi2=[], flagged=flagged)
    cutoffs = result.config.ladder if cutoff is None else [cutoff]
    rows = []
    for c in cutoffs:
        mask = result.returned_at(c)
        sums = _parent_sum(result, v, direction, family, parent, mask)
        vals = result.batch.column(make(v), which)[mask][sums == m]
        if vals.size < min_samples:
            raise InsufficientConditionedSample(int(vals.size), min_samples)
        e = EmpiricalDist.from_samples(vals, censored=int(mask.size - mask.sum()))
        emp, tv, chi, mean, se = _law_stats(e, law)
        _, lo, hi = empirical_pmf(e)
        alt_tv = tv_distance(emp, alt_law)
        meas.cutoffs.append(c)
        meas.n_returned.append(e.n_returned)
        meas.censored_frac.append(result.censored_frac(c))
        meas.estimate.append(mean)
        meas.est_se.append(se)
        meas.analytic.append(law.mean()[0])
        meas.tv.append(tv)
        meas.chi2.append(chi)
        meas.discrepancy.append(tv)
        meas.disc_se.append(_tv_se(emp.masses, e.n_returned))
        top = min(emp.k_max, 12)
        rows.append({
            "cutoff": c,
            "n_conditioned": e.n_returned,
            "empirical": [float(x) for x in emp.masses[: top + 1]],
            "ci_low": [float(x) for x in lo[: top + 1]],
            "ci_high": [float(x) for x in hi[: top + 1]],
            "stated_prediction": [law[k] for k in range(top + 1)],
            "alternative_prediction": [alt_law[k] for k in range(top + 1)],
            "tv_stated": tv,
            "tv_alternative": alt_tv,
            "mean_stated": law.mean()[0],
            "mean_alternative": alt_law.mean()[0],
        })
    meas.extra.update(stated_kernel=str(stated), alternative_ratio=float(alt.ratio),
                      parent=parent, family=family, m=m, laws=rows)
    return meas


# ------------------------------------------------------------ adjudication

def trend_verdict(discrepancies: Sequence[float], tolerance: float,
                  halfwidths: Sequence[float] | None = None, trend: bool = True) -> str:
    """Pass iff the last discrepancy is within tolerance and, when ``trend`` is
    set, no discrepancy rises above its predecessor beyond CI overlap."""
    h = [0.0] * len(discrepancies) if halfwidths is None else list(halfwidths)
    if discrepancies[-1] > tolerance:
        return "fail"
    if trend:
        for i in range(len(discrepancies) - 1):
            if discrepancies[i + 1] - h[i + 1] > discrepancies[i] + h[i]:
                return "fail"
    return "pass"


def expectation_trend(estimates: Sequence[float], target: float, rel_tol: float,
                      halfwidths: Sequence[float] | None = None) -> str:
    disc = [abs(e - target) / abs(target) for e in estimates]
    h = None if halfwidths is None else [x / abs(target) for x in halfwidths]
    return trend_verdict(disc, rel_tol, h)


@dataclass
class VerificationReport:
    measurements: list[Measurement]
    verdicts: list[str]
    alpha: float
    z: float
    warnings: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(v == "fail" for v in self.verdicts)

    def rows(self) -> list[dict]:
        out = []
        for m, verdict in zip(self.measurements, self.verdicts):
            for i, c in enumerate(m.cutoffs):
                est, se = m.estimate[i], m.est_se[i]
                out.append({
                    "identity": m.identity,
                    "target": m.target,
                    "cutoff": c,
                    "n_returned": m.n_returned[i],
                    "censored_frac": _num(m.censored_frac[i]),
                    "estimate": _num(est),
                    "ci_low": _num(est - self.z * se),
                    "ci_high": _num(est + self.z * se),
                    "analytic": _num(m.analytic[i]),
                    "tv": _num(m.tv[i]) if m.tv else "",
                    "chi2": _num(m.chi2[i][0]) if m.chi2 else "",
                    "verdict": verdict,
                })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        ids = []
        for m, verdict in zip(self.measurements, self.verdicts):
            ids.append({
                "identity": m.identity, "target": m.target, "verdict": verdict,
                "tolerance": m.tolerance, "flagged": m.flagged, "trend_rule": m.trend,
                "note": m.note, "cutoffs": m.cutoffs, "n_returned": m.n_returned,
                "censored_frac": m.censored_frac, "estimate": m.estimate,
                "estimate_se": m.est_se, "analytic": m.analytic, "discrepancy": m.discrepancy,
                "tv": m.tv, "chi2": [list(c) for c in m.chi2] if m.chi2 else None,
                "extra": m.extra,
            })
        return {"alpha": self.alpha, "z": self.z, "failed": self.failed,
                "warnings": self.warnings, "identities": ids}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)


def _num(x):
    if isinstance(x, str):
        return x
    return f"{float(x):.6g}"


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(type(x))


def adjudicate(measurements: Sequence[Measurement], alpha: float = ALPHA,
               warnings_: Sequence[str] = ()) -> VerificationReport:
    """Verdict per identity with the bias-trend rule.

    Interval half-widths use a Bonferroni-adjusted level ``alpha / rows``.
    Flagged identities are reported with their evidence but never fail.
    """
    if not measurements:
        raise DomainError("nothing to adjudicate")
    n_rows = sum(len(m.cutoffs) for m in measurements)
    z = _z(alpha / max(n_rows, 1))
    verdicts = []
    for m in measurements:
        if m.flagged:
            verdicts.append("flagged")
            continue
        h = [z * s for s in m.disc_se]
        verdicts.append(trend_verdict(m.discrepancy, m.tolerance, h, m.trend))
    return VerificationReport(list(measurements), verdicts, alpha, z, list(warnings_))


def insufficient(identity: str, target: str, exc: InsufficientConditionedSample) -> Measurement:
    """Placeholder row for an identity whose conditioned sample was too small."""
    return Measurement(identity, target, ["-"], [exc.found], [float("nan")], [float("nan")], [0.0],
                       ["-"], [0.0], [0.0], 0.0, flagged=True, trend=False,
                       note=f"insufficient sample: {exc.found} < {exc.required}")
