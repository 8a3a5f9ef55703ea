"""Command-line front end: ``crosslab {shells,analytic,simulate,verify}``.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import warnings
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analytic, harness
from .crossing import ADirected, Shell, State, Target, XClass
from .errors import (
    AuditViolation,
    ConfigError,
    CrosslabError,
    EmptySample,
    InsufficientConditionedSample,
)
from .lattice import shell_combinatorics, shell_size, vec
from .pmf import DEFAULT_K, Pmf, thin_pmf
from .walk import WalkKind

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(CrosslabError):
    pass


# ------------------------------------------------------------------ output

def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    columns = list(columns or (rows[0].keys() if rows else []))
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def pmf_rows(p: Pmf) -> list[dict]:
    rows = [{"k": k, "mass": repr(float(x))} for k, x in enumerate(p.masses)]
    rows.append({"k": "tail", "mass": repr(float(p.tail))})
    return rows


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {category.__name__}: {message}", file=sys.stderr)


# ------------------------------------------------------------------ charts

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def chart_pmf(rows: Sequence[dict], path: str, title: str) -> None:
    plt = _pyplot()
    ks = [r["k"] for r in rows if r["k"] != "tail"]
    ys = [float(r["mass"]) for r in rows if r["k"] != "tail"]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(ks, ys, color="tab:blue")
    ax.set_xlabel("k")
    ax.set_ylabel("probability")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def chart_empirical(rows: Sequence[dict], path: str) -> None:
    plt = _pyplot()
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["target"], r["direction"]), []).append(r)
    n = max(len(groups), 1)
    fig, axes = plt.subplots(n, 1, figsize=(6, 2.6 * n), squeeze=False)
    for ax, ((target, direction), rs) in zip(axes[:, 0], groups.items()):
        ks = [int(r["k"]) for r in rs]
        f = np.array([float(r["freq"]) for r in rs])
        lo = np.array([float(r["ci_low"]) for r in rs])
        hi = np.array([float(r["ci_high"]) for r in rs])
        ax.bar(ks, f, yerr=[f - lo, hi - f], capsize=2, color="tab:orange")
        ax.set_title(f"{target} ({direction})", fontsize=9)
        ax.set_ylabel("frequency")
    axes[-1, 0].set_xlabel("k")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def chart_report(rows: Sequence[dict], path: str) -> None:
    plt = _pyplot()
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if r["tv"] == "" or r["cutoff"] == "-":
            continue
        series.setdefault(f"{r['identity']} {r['target']}", []).append(
            (float(r["cutoff"]), float(r["tv"])))
    fig, ax = plt.subplots(figsize=(7, 4))
    for name, pts in series.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=name)
    ax.set_xscale("log")
    ax.set_xlabel("cutoff t_max")
    ax.set_ylabel("TV distance")
    if series:
        ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------- commands

def cmd_shells(args) -> int:
    if args.d < 1 or args.n < 0:
        raise UsageError("need --d >= 1 and --n >= 0")
    row = {"d": args.d, "n": args.n, "nonneg": args.nonneg,
           "size": shell_size(args.d, args.n, args.nonneg)}
    if args.n >= 1:
        sc = shell_combinatorics(args.d, args.n)
        row.update(C=sc.c, C0=sc.c0, p=str(sc.p_up))
    else:
        row.update(C=0, C0=0, p="")
    if args.format == "json":
        _emit(json.dumps(row), args.out)
    else:
        _emit(rows_to_csv([row]), args.out)
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--kind {args.kind} needs " + ", ".join("--" + n for n in missing))


def _analytic_pmf(args) -> Pmf:
    K = args.kmax
    if args.kind == "shell":
        _need(args, "d", "n")
        return analytic.shell_law(args.d, args.n, args.direction, K, args.convention)
    if args.kind == "d1":
        _need(args, "n")
        return analytic.d1_crossing_law(args.n, args.direction, K)
    if args.kind == "state-kernel":
        _need(args, "v")
        if args.direction == "total":
            raise UsageError("state kernels are directed: use --direction up or down")
        kernel = analytic.state_kernel(vec(args.v), args.direction, args.family)
        return analytic.conditional_count_pmf(kernel, args.m or 1, K)
    if args.kind == "thin":
        _need(args, "z")
        base = args.base or ("d1" if (args.d or 1) == 1 else "shell")
        sub = argparse.Namespace(**{**vars(args), "kind": base})
        return thin_pmf(_analytic_pmf(sub), args.z, K)
    raise UsageError(f"unknown kind {args.kind!r}")


def cmd_analytic(args) -> int:
    if args.d is not None and args.d < 1:
        raise UsageError("--d must be >= 1")
    if args.v is not None and args.d is not None and len(vec(args.v)) != args.d:
        raise UsageError(f"--v {args.v} does not have dimension {args.d}")
    if args.kind == "expect":
        _need(args, "v")
        e = analytic.expected_crossings(vec(args.v))
        names = ("e_up", "e_down", "e_total", "e_up_xclass", "e_down_xclass", "e_total_xclass")
        row = {k: str(x) for k, x in zip(names, e.as_tuple())}
        row = {"v": args.v, **row}
        _emit(json.dumps(row) if args.format == "json" else rows_to_csv([row]), args.out)
        return EXIT_OK
    p = _analytic_pmf(args)
    rows = pmf_rows(p)
    _emit(p.to_json() if args.format == "json" else rows_to_csv(rows), args.out)
    if args.chart:
        chart_pmf(rows, args.chart, p.label)
    return EXIT_OK


def parse_targets(texts: Sequence[str], d: int) -> list[Target]:
    out = []
    for text in texts:
        t = Target.parse(text)
        t.validate(d)
        out.append(t)
    return out


def empirical_rows(result: harness.MCResult, targets: Sequence[Target]) -> list[dict]:
    rows = []
    cens = result.censored_frac()
    directions = {"adirected": ("undirected",)}
    for t in targets:
        for which in directions.get(t.kind, ("undirected", "up", "down")):
            e = result.dist(t, which)
            if e.n_returned == 0:
                continue
            pmf, lo, hi = harness.empirical_pmf(e)
            for k, c in enumerate(e.counts):
                if c == 0:
                    continue
                rows.append({
                    "target": t.name, "kind": t.kind, "direction": which, "k": k,
                    "count": int(c), "freq": f"{pmf.masses[k]:.6g}", "ci_low": f"{lo[k]:.6g}",
                    "ci_high": f"{hi[k]:.6g}", "n_returned": e.n_returned,
                    "censored": e.censored, "censored_frac": f"{cens:.6g}",
                })
    return rows


def cmd_simulate(args) -> int:
    if args.d < 1:
        raise UsageError("--d must be >= 1")
    if args.tmax < 2 or args.excursions < 1 or args.workers < 1 or args.seed < 0:
        raise UsageError("need --tmax >= 2, --excursions >= 1, --workers >= 1, --seed >= 0")
    targets = parse_targets(args.track or [], args.d)
    cfg = harness.ExperimentConfig(args.d, WalkKind.parse(args.walk), targets, args.excursions,
                                   [args.tmax], args.seed, args.workers, min_quota=1)
    result = harness.run_mc(cfg)
    rows = empirical_rows(result, targets)
    if args.format == "json":
        text = json.dumps({"d": args.d, "walk": str(cfg.walk), "t_max": args.tmax,
                           "excursions": args.excursions, "seed": args.seed,
                           "workers": args.workers, "n_returned": result.n_returned(),
                           "censored_frac": result.censored_frac(), "rows": rows}, indent=1)
    else:
        text = rows_to_csv(rows, ["target", "kind", "direction", "k", "count", "freq", "ci_low",
                                  "ci_high", "n_returned", "censored", "censored_frac"])
    _emit(text, args.out)
    if args.tallies:
        trows = []
        for i in range(len(result.batch)):
            o = result.batch.outcome(i)
            for r in o.tallies.rows(targets):
                trows.append({"excursion": i, "status": o.status, "length": o.length, **r})
        atomic_write(args.tallies, rows_to_csv(trows))
    if args.chart:
        chart_empirical(rows, args.chart)
    return EXIT_OK


# ----------------------------------------------------------------- verify

IDENTITY_PARAMS = {
    "path_audit": ({}, []),
    "shell_law": ({"n": {"type": "integer", "minimum": 0},
                   "direction": {"enum": ["up", "down", "total"]},
                   "convention": {"enum": ["destination", "literal"]}}, ["n", "direction"]),
    "expectation": ({"v": {"$ref": "#/$defs/vector"},
                     "direction": {"enum": ["up", "down", "total"]},
                     "family": {"enum": ["state", "xclass"]}}, ["v"]),
    "thinning": ({"v": {"$ref": "#/$defs/vector"},
                  "A": {"type": "array", "items": {"$ref": "#/$defs/vector"}, "minItems": 1}},
                 ["v", "A"]),
    "kernel": ({"v": {"$ref": "#/$defs/vector"}, "direction": {"enum": ["up", "down"]},
                "family": {"enum": ["state", "xclass"]}, "m": {"type": "integer", "minimum": 1},
                "parent": {"enum": ["written", "total", "both"]}}, ["v", "direction", "m"]),
    "return_fraction": ({"low": {"type": "number", "minimum": 0, "maximum": 1},
                         "high": {"type": "number", "minimum": 0, "maximum": 1}},
                        ["low", "high"]),
    "d1_law": ({"level": {"type": "integer", "not": {"const": 0}},
                "direction": {"enum": ["up", "down", "total"]}}, ["level", "direction"]),
    "birth_death": ({"lambdas": {"type": "array", "items": {"type": "number", "minimum": 0},
                                 "minItems": 1},
                     "mus": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                             "minItems": 1},
                     "n": {"type": "integer", "minimum": 0},
                     "runs": {"type": "integer", "minimum": 1},
                     "t_max": {"type": "integer", "minimum": 2}},
                    ["lambdas", "mus", "n", "runs", "t_max"]),
    "d1_oracle": ({"L": {"type": "array", "minItems": 1,
                         "items": {"type": "integer", "minimum": 2, "maximum": 24,
                                   "multipleOf": 2}},
                   "gap": {"type": "number", "minimum": 0}}, ["L"]),
}


def config_schema() -> dict:
    branches = []
    for name, (props, required) in IDENTITY_PARAMS.items():
        branches.append({
            "if": {"properties": {"name": {"const": name}}},
            "then": {"properties": {"name": True, "tolerance": True, **props},
                     "required": required, "additionalProperties": False},
        })
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$defs": {"vector": {"type": "array", "items": {"type": "integer"}, "minItems": 1}},
        "type": "object",
        "additionalProperties": False,
        "required": ["dimension", "walk", "cutoff_ladder", "excursions_per_cutoff", "seed",
                     "identities"],
        "properties": {
            "dimension": {"type": "integer", "minimum": 1},
            "walk": {"type": "string",
                     "pattern": "^(free|reflected|(box|reflected_box):[1-9][0-9]*)$"},
            "cutoff_ladder": {"type": "array", "minItems": 1,
                              "items": {"type": "integer", "minimum": 2}},
            "excursions_per_cutoff": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "workers": {"type": "integer", "minimum": 1},
            "tolerances": {"type": "object", "additionalProperties": False,
                           "properties": {k: {"type": "number", "minimum": 0}
                                          for k in ("tv", "mean_rel", "kernel_tv")}},
            "identities": {
                "type": "array", "minItems": 1,
                "items": {"type": "object", "required": ["name"],
                          "properties": {"name": {"enum": list(IDENTITY_PARAMS)},
                                         "tolerance": {"type": "number", "minimum": 0}},
                          "allOf": branches},
            },
        },
    }


def load_config(path: str | None) -> dict:
    """Read and validate a verify config; schema errors carry JSON-pointer paths."""
    import jsonschema

    if path in (None, "default"):
        text = resources.files("crosslab").joinpath("data/verify_default.json").read_text()
        where = "default config"
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        where = path
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: invalid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(config_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            pointer = "/" + "/".join(str(p) for p in e.absolute_path)
            lines.append(f"{pointer}: {e.message}")
        raise ConfigError(f"{where}: schema violations\n  " + "\n  ".join(lines))
    ladder = cfg["cutoff_ladder"]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("/cutoff_ladder: must be strictly increasing")
    d = cfg["dimension"]
    for i, ident in enumerate(cfg["identities"]):
        for key in ("v",):
            if key in ident and len(ident[key]) != d:
                raise ConfigError(f"/identities/{i}/{key}: expected {d} coordinates")
        for j, a in enumerate(ident.get("A", [])):
            if len(a) != d:
                raise ConfigError(f"/identities/{i}/A/{j}: expected {d} coordinates")
        if ident["name"] == "d1_law" and d != 1:
            raise ConfigError(f"/identities/{i}: d1_law needs dimension 1")
        if ident["name"] == "return_fraction" and ident["low"] > ident["high"]:
            raise ConfigError(f"/identities/{i}: low exceeds high")
    return cfg


def _identity_targets(ident: dict, d: int) -> list[Target]:
    name = ident["name"]
    if name == "shell_law":
        n = ident["n"]
        return [Shell(n)] + ([Shell(n - 1)] if n >= 1 else [])
    if name == "expectation":
        make = XClass if ident.get("family", "state") == "xclass" else State
        return [make(ident["v"])]
    if name == "thinning":
        return [State(ident["v"]), ADirected(ident["v"], ident["A"])]
    if name == "kernel":
        return harness.parent_targets(ident["v"], ident["direction"], ident.get("family", "state"))
    if name == "d1_law":
        return [State((ident["level"],))]
    if name == "path_audit":
        return [Shell(n) for n in range(4)]
    return []


def run_verify(cfg: dict) -> harness.VerificationReport:
    d = cfg["dimension"]
    tol = {"tv": 0.05, "mean_rel": 0.10, "kernel_tv": 0.03, **cfg.get("tolerances", {})}
    idents = cfg["identities"]
    seen: dict[str, Target] = {}
    for ident in idents:
        for t in _identity_targets(ident, d):
            seen.setdefault(t.name, t.validate(d))
    quota = cfg["excursions_per_cutoff"]
    notes: list[str] = []
    if quota < 1000:
        notes.append(f"excursions_per_cutoff={quota} is below 1000; small-sample rows are flagged")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    need_mc = any(i["name"] not in ("birth_death", "d1_oracle") for i in idents)
    result = None
    if need_mc:
        exp = harness.ExperimentConfig(d, WalkKind.parse(cfg["walk"]), list(seen.values()), quota,
                                       cfg["cutoff_ladder"], cfg["seed"], cfg.get("workers", 1),
                                       min_quota=1)
        result = harness.run_mc(exp)
    ms: list[harness.Measurement] = []
    for ident in idents:
        name = ident["name"]
        try:
            ms.extend(_measure(ident, result, cfg, tol))
        except (InsufficientConditionedSample, EmptySample) as exc:
            if isinstance(exc, EmptySample):
                exc = InsufficientConditionedSample(0, harness.MIN_CONDITIONED)
            msg = f"{name}: {exc}"
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            ms.append(harness.insufficient(name, _describe(ident), exc))
    return harness.adjudicate(ms, warnings_=notes)


def _describe(ident: dict) -> str:
    return ",".join(f"{k}={v}" for k, v in ident.items() if k not in ("name", "tolerance"))


def _measure(ident: dict, result, cfg: dict, tol: dict) -> list[harness.Measurement]:
    name = ident["name"]
    d = cfg["dimension"]
    minimum = harness.MIN_CONDITIONED
    if name == "path_audit":
        return [harness.measure_audit(result)]
    if name == "shell_law":
        conv = ident.get("convention", "destination")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            law = analytic.shell_law(d, ident["n"], ident["direction"], DEFAULT_K, conv)
        which = {"total": "undirected"}.get(ident["direction"], ident["direction"])
        m = harness.measure_law(result, Shell(ident["n"]), which, law, f"shell_law[{conv}]",
                                ident.get("tolerance", tol["tv"]), flagged=(conv == "literal"),
                                min_samples=minimum)
        return [m]
    if name == "expectation":
        family = ident.get("family", "state")
        direction = ident.get("direction", "total")
        make = XClass if family == "xclass" else State
        expected = analytic.expected_crossings(vec(ident["v"])).get(direction, family)
        which = {"total": "undirected"}.get(direction, direction)
        return [harness.measure_expectation(result, make(ident["v"]), which, float(expected),
                                            f"expectation[{family}]",
                                            ident.get("tolerance", tol["mean_rel"]),
                                            min_samples=minimum)]
    if name == "thinning":
        return [harness.measure_thinning(result, ident["v"], ident["A"],
                                         ident.get("tolerance", tol["tv"]), min_samples=minimum)]
    if name == "kernel":
        parents = ["written", "total"] if ident.get("parent", "both") == "both" else [ident["parent"]]
        return [harness.kernel_adjudicator(result, ident["v"], ident["direction"],
                                           ident.get("family", "state"), ident["m"], parent=p,
                                           tolerance=ident.get("tolerance", tol["kernel_tv"]))
                for p in parents]
    if name == "return_fraction":
        m = harness.measure_return_fraction(result, ident["low"], ident["high"],
                                            min_samples=minimum)
        return [m]
    if name == "d1_law":
        law = analytic.d1_crossing_law(ident["level"], ident["direction"])
        which = {"total": "undirected"}.get(ident["direction"], ident["direction"])
        return [harness.measure_law(result, State((ident["level"],)), which, law, "d1_law",
                                    ident.get("tolerance", tol["tv"]), min_samples=minimum)]
    if name == "birth_death":
        return [harness.measure_birth_death(ident["lambdas"], ident["mus"], ident["n"],
                                            ident["runs"], ident["t_max"], cfg["seed"],
                                            ident.get("tolerance", tol["tv"]))]
    if name == "d1_oracle":
        return [harness.measure_oracle(ident["L"], ident.get("gap", 0.02))]
    raise ConfigError(f"unknown identity {name!r}")


def cmd_verify(args) -> int:
    if args.print_default_config:
        sys.stdout.write(resources.files("crosslab").joinpath("data/verify_default.json")
                         .read_text())
        return EXIT_OK
    cfg = load_config(args.config)
    try:
        report = run_verify(cfg)
    except AuditViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(args.out_dir)
    csv_text, json_text = report.to_csv(), report.to_json()
    atomic_write(out / "report.csv", csv_text)
    atomic_write(out / "report.json", json_text)
    if args.chart:
        chart_report(report.rows(), str(out / "report.png"))
    for m, v in zip(report.measurements, report.verdicts):
        print(f"{v:8s} {m.identity} {m.target}")
    return EXIT_FAIL if report.failed else EXIT_OK


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crosslab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("shells", help="shell sizes and the C, C0, p counts")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--nonneg", action="store_true", help="nonnegative orthant only")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_shells)

    a = sub.add_parser("analytic", help="exact laws and expectations")
    a.add_argument("--kind", choices=("shell", "state-kernel", "d1", "expect", "thin"),
                   required=True)
    a.add_argument("--d", type=int)
    a.add_argument("--v", help="vector as a,b,c")
    a.add_argument("--n", type=int, help="shell level, or the signed level for d1")
    a.add_argument("--direction", choices=("up", "down", "total"), default="total")
    a.add_argument("--family", choices=("state", "xclass"), default="state")
    a.add_argument("--convention", choices=analytic.CONVENTIONS, default="destination")
    a.add_argument("--kmax", type=int, default=DEFAULT_K)
    a.add_argument("--m", type=int, help="parent total for state-kernel laws")
    a.add_argument("--z", type=float, help="thinning probability")
    a.add_argument("--base", choices=("shell", "d1", "state-kernel"),
                   help="law thinned by --kind thin (default: d1 when d=1, else shell)")
    a.add_argument("--format", choices=("csv", "json"), default="json")
    a.add_argument("--out")
    a.add_argument("--chart", help="write a PNG bar chart of the pmf")
    a.set_defaults(func=cmd_analytic)

    m = sub.add_parser("simulate", help="Monte Carlo excursions with crossing tallies")
    m.add_argument("--d", type=int, required=True)
    m.add_argument("--walk", default="free", help="free | reflected | box:N | reflected_box:N")
    m.add_argument("--tmax", type=int, required=True)
    m.add_argument("--excursions", type=int, required=True)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--track", action="append",
                   help='target such as "state:1,1", "shell:2", "xclass:1,0", '
                        '"adirected:1,0|A=1,1" (repeatable)')
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.add_argument("--out")
    m.add_argument("--tallies", help="also write per-excursion tally rows (CSV)")
    m.add_argument("--chart", help="write a PNG of the empirical laws")
    m.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the verification suite from a JSON config")
    v.add_argument("--config", default="default", help="path, or 'default' for the bundled one")
    v.add_argument("--out-dir", default="crosslab-report")
    v.add_argument("--chart", action="store_true")
    v.add_argument("--print-default-config", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings.showwarning = _show_warning
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CrosslabError as exc:
        if isinstance(exc, ValueError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        raise


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
