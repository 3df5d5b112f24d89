"""Factor-augmented treatment effects: estimation, simulation and Monte Carlo."""

import json

import numpy as np

from . import _core
from ._core import FateError, scenario_names

__all__ = [
    "FateError",
    "check_identification",
    "fit",
    "iv_gmm",
    "montecarlo",
    "pi_matrix",
    "run_cli",
    "scenario_names",
]


def _arrays(y, d, z, x):
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    d = np.asarray(d, dtype=float).ravel()
    if x is not None:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
    return y, d, z, x


def pi_matrix(y, d, z, x=None):
    """Just-identified IV matrix and first-stage diagnostics. An intercept is always added to x."""
    return json.loads(_core.pi_matrix(*_arrays(y, d, z, x)))


def fit(y, d, z, x=None, L=1, defining=(), weighting="two_step"):
    """FATE fit with L components; `defining` names instruments z1..zK."""
    return json.loads(_core.fit(*_arrays(y, d, z, x), L=L, defining=list(defining), weighting=weighting))


def iv_gmm(y, d, z, x=None):
    return json.loads(_core.iv_gmm(*_arrays(y, d, z, x)))


def check_identification(K, J, L, R=1):
    return json.loads(_core.check_identification(K, J, L, R))


def montecarlo(scenario, seed=1, reps=0, n=0, threads=1):
    """Run a named scenario; reps and n override the defaults when positive."""
    return json.loads(_core.montecarlo(scenario, seed, reps, n, threads))


def run_cli(args):
    """Run the command-line tool in process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
