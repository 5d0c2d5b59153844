"""Python access to the uailab C++ core.

Configs and environment descriptors may be given as dicts; they are
serialized to JSON before crossing into C++.
"""

import json as _json

from . import _uailab
from ._uailab import (
    ConfigError,
    ConvergenceError,
    ImpossibleEvidenceError,
    SizeError,
    SupportError,
    aixi_loss,
    channel_capacity,
    kl_policy,
    mutual_information,
    self_aixi_action,
    softmax_policy,
)


def _text(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def percept_distribution(env, history, action):
    return _uailab.percept_distribution(_text(env), history, action)


def percepts(env):
    return _uailab.percepts(_text(env))


def posterior(env_class, history):
    return _uailab.posterior(_text(env_class), history)


def optimal_q_values(env_class, history, horizon, gamma):
    return _uailab.optimal_q_values(_text(env_class), history, horizon, gamma)


def empowerment(env, state, k=1):
    return _uailab.empowerment(_text(env), state, k)


def run_episode(config, seed):
    return _uailab.run_episode(_text(config), seed)


def convergence_experiment(config):
    return _uailab.convergence_experiment(_text(config))


def lambda_sweep(config, lambdas):
    return _uailab.lambda_sweep(_text(config), list(lambdas))


def power_seeking_demo(config, betas=(0.0, 0.1), low_advantage=0.2):
    return _uailab.power_seeking_demo(_text(config), list(betas), low_advantage)


def audit(config, bits=False):
    return _uailab.audit(_text(config), bits)
