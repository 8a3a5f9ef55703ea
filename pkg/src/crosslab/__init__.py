"""Crossing counts of the simple symmetric random walk on Z^d.

Exact laws (:mod:`crosslab.analytic`), lattice combinatorics
(:mod:`crosslab.lattice`), seeded excursion simulation (:mod:`crosslab.walk`)
and a Monte Carlo verification harness (:mod:`crosslab.harness`).
"""
from .analytic import (
    d1_crossing_law,
    expected_crossings,
    gw_pmf,
    r_pmf,
    shell_law,
    state_kernel,
    v_chain_pmf,
)
from .crossing import ADirected, Shell, State, Target, Tracker, XClass
from .pmf import Pmf, geometric_pmf, thin_pmf, tv_distance
from .rng import StepStream
from .walk import WalkKind, run_excursion, simulate_excursions

__version__ = "0.1.0"

__all__ = [
    "ADirected", "Pmf", "Shell", "State", "StepStream", "Target", "Tracker", "WalkKind",
    "XClass", "d1_crossing_law", "expected_crossings", "geometric_pmf", "gw_pmf", "r_pmf",
    "run_excursion", "shell_law", "simulate_excursions", "state_kernel", "thin_pmf",
    "tv_distance", "v_chain_pmf",
]
