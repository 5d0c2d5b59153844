import math

import pytest

import uailab

BANDIT_CLASS = {
    "models": [
        {"type": "bernoulli_bandit", "probabilities": [0.9]},
        {"type": "bernoulli_bandit", "probabilities": [0.1]},
    ]
}

QUICK = {
    "environment": {"class_index": 1},
    "env_class": {
        "models": [
            {"type": "bernoulli_bandit", "probabilities": [0.8, 0.3]},
            {"type": "bernoulli_bandit", "probabilities": [0.4, 0.7]},
        ]
    },
    "policy_class": {"kind": "constant", "epsilon": 0.001},
    "planning": {"horizon": 3, "gamma": 0.4},
    "regularization": {"lambda": -0.1},
    "run": {"steps": 20, "seeds": [0, 1]},
}


def test_percepts_and_bayes():
    env = {"type": "bernoulli_bandit", "probabilities": [0.9, 0.1]}
    assert uailab.percepts(env) == [(0, 0.0), (1, 1.0)]
    assert uailab.percept_distribution(env, [], 0) == pytest.approx([0.1, 0.9])
    w = uailab.posterior(BANDIT_CLASS, [(0, 1, 1.0)])
    assert w == pytest.approx([0.9, 0.1], abs=1e-14)


def test_planner_and_policies():
    q = uailab.optimal_q_values({"models": [{"type": "bernoulli_bandit", "probabilities": [0.9, 0.2]}]}, [], 1, 0.9)
    assert q == pytest.approx([0.9, 0.2])
    assert uailab.softmax_policy([math.log(2), 0.0]) == pytest.approx([2 / 3, 1 / 3])
    assert uailab.aixi_loss([0.5, 0.5]) == pytest.approx(math.log(2))
    assert uailab.self_aixi_action([0.5, 0.6], [0.9, 0.1], [0.5, 0.5], 0.5) == 1
    assert uailab.kl_policy([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))


def test_capacity():
    bsc = [[0.9, 0.1], [0.1, 0.9]]
    assert uailab.channel_capacity(bsc)["capacity"] == pytest.approx(0.368064, abs=1e-4)
    assert uailab.mutual_information(bsc, [0.5, 0.5]) == pytest.approx(0.368064, abs=1e-6)
    room = {"type": "two_room"}
    assert uailab.empowerment(room, 2, 1) == pytest.approx(math.log(4), abs=1e-9)
    assert uailab.empowerment(room, 1, 1) == pytest.approx(0.0, abs=1e-12)


def test_experiments():
    rows = uailab.run_episode(QUICK, 0)
    assert len(rows) == 20
    assert rows == uailab.run_episode(QUICK, 0)
    assert all(r["value_gap"] >= -1e-9 for r in rows)
    conv = uailab.convergence_experiment(QUICK)
    assert conv["seeds"] == 2
    sweep = uailab.lambda_sweep(QUICK, [0.0, 10.0])
    assert sweep[0]["action_divergence"] == 0.0
    demo = uailab.power_seeking_demo({"environment": {"type": "two_room"}, "planning": {"horizon": 2, "gamma": 0.9},
                                      "regularization": {"lambda": 0.0}, "run": {"seeds": [0, 1]}})
    assert [c["fraction_high"] for c in demo] == [0.0, 0.0, 1.0, 0.0]
    report = uailab.audit({"environment": {"type": "noisy_grid", "size": 2}, "empowerment": {"k": 1}}, bits=True)
    assert report["units"] == "bits"


def test_errors():
    with pytest.raises(uailab.ConfigError):
        uailab.run_episode({"environment": {"type": "warp_drive"}}, 0)
    with pytest.raises(uailab.ConfigError):
        uailab.run_episode("{not json", 0)
