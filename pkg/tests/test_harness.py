import json
import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy import stats

from crosslab import analytic
from crosslab.crossing import ADirected, Shell, State, XClass
from crosslab.errors import (
    ConfigError, DomainError, EmptySample, InsufficientConditionedSample,
)
from crosslab.harness import (
    CSV_COLUMNS, EmpiricalDist, ExperimentConfig, Measurement, adjudicate, chi_square, expectation_trend,
    d1_exhaustive_oracle, empirical_pmf, insufficient, kernel_adjudicator, measure_oracle,
    path_audit, run_mc, trend_verdict, wilson_interval,
)
from crosslab.lattice import binom
from crosslab.pmf import Pmf, geometric_pmf


def test_empirical_pmf_example():
    e = EmpiricalDist.from_counts({0: 5, 1: 3, 2: 2}, censored=0)
    p, lo, hi = empirical_pmf(e)
    assert p.masses.tolist() == [0.5, 0.3, 0.2]
    assert np.all(lo <= p.masses) and np.all(p.masses <= hi)
    assert e.censored_frac == 0.0


def test_empirical_pmf_empty():
    with pytest.raises(EmptySample):
        empirical_pmf(EmpiricalDist.from_samples([]))


def test_empirical_counts_must_match():
    with pytest.raises(DomainError):
        EmpiricalDist(np.array([1, 2]), 4)


def test_wilson_width_shrinks_like_inverse_sqrt():
    widths = []
    for n in (1_000, 4_000, 16_000):
        lo, hi = wilson_interval(0.3 * n, n)
        widths.append(float(hi - lo))
    assert widths[0] / widths[1] == pytest.approx(2, rel=0.01)
    assert widths[1] / widths[2] == pytest.approx(2, rel=0.01)


def test_wilson_covers_extremes():
    lo, hi = wilson_interval(0, 50)
    assert lo == 0 and 0 < hi < 0.2


def test_chi_square_matches_scipy_without_merging():
    counts = np.array([480, 260, 140, 70, 50])
    law = Pmf(np.array([0.5, 0.25, 0.125, 0.0625, 0.0625]))
    stat, dof, pval = chi_square(EmpiricalDist.from_counts(counts), law)
    ref = stats.chisquare(counts, counts.sum() * law.masses)
    assert stat == pytest.approx(ref.statistic)
    assert dof == 4
    assert pval == pytest.approx(ref.pvalue)


def test_chi_square_merges_sparse_bins():
    rng = np.random.default_rng(1)
    law = geometric_pmf(0.5, 40)
    draws = rng.geometric(0.5, 2000) - 1
    stat, dof, pval = chi_square(EmpiricalDist.from_samples(draws), law)
    assert dof < 12
    assert pval > 1e-4


def test_mean_and_se():
    m, se = EmpiricalDist.from_samples([1, 1, 3, 3]).mean()
    assert m == 2
    assert se == pytest.approx(math.sqrt(4 / 3 / 4))


@pytest.mark.parametrize("estimates,expected", [((0.84, 0.93, 0.97), "pass"),
                                                ((0.80, 0.95, 0.83), "fail")])
def test_expectation_trend_examples(estimates, expected):
    assert expectation_trend(estimates, 1.0, 0.10) == expected


def test_trend_tolerates_overlapping_noise():
    assert trend_verdict([0.03, 0.035], 0.05, [0.01, 0.01]) == "pass"
    assert trend_verdict([0.01, 0.04], 0.05, [0.01, 0.01]) == "fail"
    assert trend_verdict([0.01, 0.04], 0.05, [0.01, 0.01], trend=False) == "pass"


def _meas(disc, tol, flagged=False):
    n = len(disc)
    return Measurement("x", "t", list(range(n)), [1] * n, [0.0] * n, [0.0] * n, [0.0] * n,
                       [0.0] * n, list(disc), [0.0] * n, tol, flagged=flagged)


def test_flagged_rows_never_fail():
    rep = adjudicate([_meas([0.9], 0.01, flagged=True), _meas([0.001], 0.01)])
    assert rep.verdicts == ["flagged", "pass"]
    assert not rep.failed
    rep = adjudicate([_meas([0.9], 0.01)])
    assert rep.failed


def test_bonferroni_z():
    rep = adjudicate([_meas([0.0, 0.0], 0.1), _meas([0.0, 0.0, 0.0], 0.1)])
    assert rep.z == pytest.approx(stats.norm.ppf(1 - 0.01 / 5 / 2))


def test_report_csv_columns():
    rep = adjudicate([_meas([0.01, 0.0], 0.1)])
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    json.loads(rep.to_json())


def test_insufficient_row_is_flagged():
    m = insufficient("kernel", "state:1,1", InsufficientConditionedSample(12, 500))
    rep = adjudicate([m])
    assert rep.verdicts == ["flagged"]
    assert "12 < 500" in m.note


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(2, "free", [], 5000, [100, 100])
    with pytest.raises(ConfigError):
        ExperimentConfig(2, "free", [], 10, [100])
    cfg = ExperimentConfig(2, "free", [], 10, [100], min_quota=1, workers=3)
    assert cfg.worker_quotas() == [4, 3, 3]


D2_TARGETS = [Shell(n) for n in range(5)] + [State(w) for w in ((1, 1), (-1, 1), (1, -1), (-1, -1))] \
    + [XClass((1, 1)), State((2, 0)), State((1, 0)), State((0, 1)), ADirected((1, 1), [(0, 1)])]


@pytest.fixture(scope="module")
def small_run():
    cfg = ExperimentConfig(2, "free", D2_TARGETS, 20_000, [1_000, 10_000], seed=3)
    return run_mc(cfg)


def test_path_audit_clean(small_run):
    rep = path_audit(small_run.batch)
    assert rep.ok and rep.checked == small_run.n_returned()


def test_path_audit_detects_tampering(small_run):
    batch = small_run.batch
    i = int(np.flatnonzero(batch.returned)[0])
    saved = batch.tallies[i].copy()
    batch.tallies[i, 1, 1] += 1
    try:
        rep = path_audit(batch)
        assert not rep.ok and rep.first_bad["f=up+down"] == i
    finally:
        batch.tallies[i] = saved


def test_coupled_ladder(small_run):
    a, b = small_run.returned_at(1_000), small_run.returned_at(10_000)
    assert np.all(b[a])
    assert small_run.censored_frac(1_000) >= small_run.censored_frac(10_000)


def test_kernel_adjudicator_row(small_run):
    m = kernel_adjudicator(small_run, (1, 1), "up", m=1, min_samples=100)
    assert m.flagged
    law = m.extra["laws"][0]
    for key in ("empirical", "ci_low", "ci_high", "stated_prediction", "alternative_prediction"):
        assert len(law[key]) >= 2
    assert adjudicate([m]).verdicts == ["flagged"]


def test_kernel_adjudicator_insufficient(small_run):
    with pytest.raises(InsufficientConditionedSample):
        kernel_adjudicator(small_run, (1, 1), "up", m=1, min_samples=10**7)
    with pytest.raises(DomainError):
        kernel_adjudicator(small_run, (1, 1), "up")


def test_d1_kernel_matches():
    cfg = ExperimentConfig(1, "free", [State((1,)), State((2,))], 220_000, [100_000], seed=4)
    res = run_mc(cfg)
    m = kernel_adjudicator(res, (2,), "up", m=1)
    assert not m.flagged
    assert m.tv[0] <= 0.03
    assert adjudicate([m]).verdicts == ["pass"]


def _brute_oracle(L, level, direction):
    out = {}
    for n in range(2, L + 1, 2):
        for steps in product((1, -1), repeat=n):
            pos, cnt, ok = 0, 0, True
            for t, s in enumerate(steps):
                q = pos + s
                if q == 0 and t < n - 1:
                    ok = False
                    break
                if q == level and (direction == "total"
                                   or (direction == "up" and abs(pos) == abs(level) - 1)
                                   or (direction == "down" and abs(pos) == abs(level) + 1)):
                    cnt += 1
                pos = q
            if ok and pos == 0:
                out[cnt] = out.get(cnt, 0) + Fraction(1, 2**n)
    return [out.get(k, Fraction(0)) for k in range(max(out) + 1)]


def test_oracle_l2():
    orc = d1_exhaustive_oracle(2)
    assert orc.returned_mass == Fraction(1, 2)
    assert orc.masses[(1, "total")] == [Fraction(1, 4), Fraction(1, 4)]


@pytest.mark.parametrize("L", [2, 4, 8, 12])
def test_oracle_matches_backtracking(L):
    orc = d1_exhaustive_oracle(L, levels=(-2, 1, 3))
    for level in (-2, 1, 3):
        for direction in ("up", "down", "total"):
            got = orc.masses[(level, direction)]
            want = _brute_oracle(L, level, direction)
            n = max(len(got), len(want))
            pad = lambda xs: xs + [Fraction(0)] * (n - len(xs))  # noqa: E731
            assert pad(got) == pad(want), (level, direction)


@pytest.mark.parametrize("L", [2, 6, 10, 16, 24])
def test_oracle_returned_mass(L):
    assert d1_exhaustive_oracle(L, levels=(1,)).returned_mass == 1 - Fraction(binom(L, L // 2), 2**L)


def test_oracle_domain():
    for L in (0, 3, 26):
        with pytest.raises(DomainError):
            d1_exhaustive_oracle(L)


def test_oracle_never_exceeds_law():
    m = measure_oracle([8, 12])
    for L in ("8", "12"):
        assert m.extra[L]["max_excess"] <= 0
        assert m.extra[L]["max_drop"] <= 0
    orc = d1_exhaustive_oracle(12)
    law = analytic.d1_crossing_law(1, "total")
    assert orc.masses[(1, "total")][1] == law[1] == 0.25  # only the path 0, 1, 0


def test_report_deterministic():
    cfg = ExperimentConfig(2, "free", [Shell(1), Shell(2)], 3000, [200, 2000], seed=9)
    reports = []
    for _ in range(2):
        res = run_mc(cfg)
        law = analytic.shell_law(2, 2, "up")
        from crosslab.harness import measure_law
        reports.append(adjudicate([measure_law(res, Shell(2), "up", law, "s", 0.5)]).to_csv())
    assert reports[0] == reports[1]


def test_workers_reproducible():
    cfg = ExperimentConfig(2, "free", [Shell(2)], 4000, [500], seed=1, workers=2)
    a, b = run_mc(cfg), run_mc(cfg)
    assert np.array_equal(a.batch.tallies, b.batch.tallies)
    assert np.array_equal(a.batch.length, b.batch.length)
    one = run_mc(ExperimentConfig(2, "free", [Shell(2)], 4000, [500], seed=1))
    assert not np.array_equal(one.batch.length, a.batch.length)
