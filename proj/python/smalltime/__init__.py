"""Small-time expansion of multi-asset portfolio value functions."""

import json

import numpy as np

from . import _smalltime
from ._smalltime import BudgetError, ConfigError, DomainError, ModelError, StencilError, merton_benchmark

__all__ = [
    "BudgetError",
    "ConfigError",
    "DomainError",
    "ModelError",
    "StencilError",
    "default_config",
    "default_model",
    "default_utility",
    "execute_experiment",
    "mc_value",
    "merton_benchmark",
    "pi_zero",
    "run_experiment",
    "tilde_pi",
    "u1",
    "u2",
    "u_hat",
    "utility_derivs",
    "validate_model",
]


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def _vec(x):
    return np.asarray(x, dtype=float).reshape(-1)


def default_model():
    return json.loads(_smalltime.default_model_json())


def default_utility():
    return json.loads(_smalltime.default_utility_json())


def default_config(experiment="table23", t=1.5):
    return json.loads(_smalltime.default_config_json(experiment, t))


def validate_model(model):
    """Returns the list of violated assumptions; empty when valid."""
    return _smalltime.validate_model(_dump(model))


def utility_derivs(utility, s, order):
    return _smalltime.utility_derivs(_dump(utility), s, order)


def u1(model, utility, x, y):
    return _smalltime.u1(_dump(model), _dump(utility), _vec(x), y)


def u2(model, utility, x, y):
    return _smalltime.u2(_dump(model), _dump(utility), _vec(x), y)


def u_hat(model, utility, t, T, x, y):
    return _smalltime.u_hat(_dump(model), _dump(utility), t, T, _vec(x), y)


def pi_zero(model, utility, x, y):
    return _smalltime.pi_zero(_dump(model), _dump(utility), _vec(x), y)


def tilde_pi(model, utility, t, T, x, y):
    return _smalltime.tilde_pi(_dump(model), _dump(utility), t, T, _vec(x), y)


def mc_value(model, utility, x, y, t, T, n_paths=10000, dt=1e-3, seed=None, policy="tilde_pi"):
    kwargs = {} if seed is None else {"seed": seed}
    return _smalltime.mc_value(_dump(model), _dump(utility), _vec(x), y, t, T, n_paths=n_paths, dt=dt,
                               policy=policy, **kwargs)


def execute_experiment(config):
    """Runs an experiment in memory and returns (csv_text, summary_dict)."""
    csv, summary = _smalltime.execute_experiment(_dump(config))
    return csv, json.loads(summary)


def run_experiment(config):
    """Runs an experiment, writes its outputs and returns (exit_code, diagnostic)."""
    return _smalltime.run_experiment(_dump(config))
