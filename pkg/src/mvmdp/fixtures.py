"""Small canonical instances used across tests, docs and separation reports."""

from __future__ import annotations

from .model import Mdp, make_mdp
from .rationals import Rat, rat


def one_shot_two_arms() -> Mdp:
    """One step, a sure-zero arm 'a' and a risky arm 'b' paying 0 or 2 evenly.

    The two deterministic choices give (mean, variance) = (0, 0) and (1, 1);
    mixing b with probability p gives mean p and variance 2p - p^2, so
    randomization reaches pairs no deterministic rule can.
    """
    return make_mdp(
        horizon=1,
        states=["s0", "end"],
        initial_state="s0",
        actions={"s0": ["a", "b"], "end": ["stay"]},
        transitions={
            ("s0", "a"): {"end": 1},
            ("s0", "b"): {"end": 1},
            ("end", "stay"): {"end": 1},
        },
        rewards={
            ("s0", "a"): {0: 1},
            ("s0", "b"): {0: rat(1, 2), 2: rat(1, 2)},
            ("end", "stay"): {0: 1},
        },
    )


def offset_chain() -> Mdp:
    """Two steps where the second action can offset the first random reward.

    At s0: 'a1' ends with reward 0; 'a2' pays a fair 0/1 coin and moves to s1.
    At s1: 'a3' pays 0, 'a4' pays 1. A rule that sees the accumulated reward
    plays a4 exactly when the coin paid 0, reaching total 1 surely; rules that
    see only (t, state) cannot.
    """
    return make_mdp(
        horizon=2,
        states=["s0", "s1", "end"],
        initial_state="s0",
        actions={"s0": ["a1", "a2"], "s1": ["a3", "a4"], "end": ["stay"]},
        transitions={
            ("s0", "a1"): {"end": 1},
            ("s0", "a2"): {"s1": 1},
            ("s1", "a3"): {"end": 1},
            ("s1", "a4"): {"end": 1},
            ("end", "stay"): {"end": 1},
        },
        rewards={
            ("s0", "a1"): {0: 1},
            ("s0", "a2"): {0: rat(1, 2), 1: rat(1, 2)},
            ("s1", "a3"): {0: 1},
            ("s1", "a4"): {1: 1},
            ("end", "stay"): {0: 1},
        },
    )


def forked_path(p: Rat) -> Mdp:
    """Three steps whose first move forks to s1 (prob p) or s1x (prob 1 - p).

    Both fork branches rejoin at s2, where 'a' pays 0 surely and 'b' pays the
    fair 0/2 coin (mean 1, variance 1). The fork is invisible in (t, state,
    accumulated reward) at s2, but a history-dependent rule can condition on
    it; mixing at s2 interpolates (mean, variance) between (0,0) and (1,1).
    """
    p = rat(p)
    return make_mdp(
        horizon=3,
        states=["s0", "s1", "s1x", "s2", "end"],
        initial_state="s0",
        actions={
            "s0": ["go"],
            "s1": ["go"],
            "s1x": ["go"],
            "s2": ["a", "b"],
            "end": ["stay"],
        },
        transitions={
            ("s0", "go"): {"s1": p, "s1x": 1 - p},
            ("s1", "go"): {"s2": 1},
            ("s1x", "go"): {"s2": 1},
            ("s2", "a"): {"end": 1},
            ("s2", "b"): {"end": 1},
            ("end", "stay"): {"end": 1},
        },
        rewards={
            ("s0", "go"): {0: 1},
            ("s1", "go"): {0: 1},
            ("s1x", "go"): {0: 1},
            ("s2", "a"): {0: 1},
            ("s2", "b"): {0: rat(1, 2), 2: rat(1, 2)},
            ("end", "stay"): {0: 1},
        },
    )


def two_point_stage() -> Mdp:
    """One step, two sure rewards 0 and 1: the classic max-variance instance.

    Every achievable law of the terminal reward is a two-point mixture on
    {0, 1}; variance q(1-q) peaks at 1/4 for the even mixture, strictly above
    both deterministic choices.
    """
    return make_mdp(
        horizon=1,
        states=["s0", "end"],
        initial_state="s0",
        actions={"s0": ["zero", "one"], "end": ["stay"]},
        transitions={
            ("s0", "zero"): {"end": 1},
            ("s0", "one"): {"end": 1},
            ("end", "stay"): {"end": 1},
        },
        rewards={
            ("s0", "zero"): {0: 1},
            ("s0", "one"): {1: 1},
            ("end", "stay"): {0: 1},
        },
    )


def all_zero(horizon: int = 2) -> Mdp:
    """Single state, single action, zero reward: every statistic is zero."""
    return make_mdp(
        horizon=horizon,
        states=["s0"],
        initial_state="s0",
        actions={"s0": ["stay"]},
        transitions={("s0", "stay"): {"s0": 1}},
        rewards={("s0", "stay"): {0: 1}},
    )
