"""Bootstrap percolation on the random graph G(n, p).

Simulation (markproc, graph), exact stopping-time distributions (exact),
threshold and limit theory (theory), dynamical models (dynamics), and a
Monte Carlo harness (montecarlo).  The `bootperc` command line fronts all
of it; see README.md.
"""

from . import dynamics, exact, graph, markproc, montecarlo, theory
from .core import (NEVER, Params, ParamsError, Seed, TrialOutcome,
                   derive_stream, validate)

__all__ = [
    "NEVER", "Params", "ParamsError", "Seed", "TrialOutcome",
    "derive_stream", "validate",
    "theory", "markproc", "graph", "exact", "dynamics", "montecarlo",
]

__version__ = "0.1.0"
