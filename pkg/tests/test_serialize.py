import json

import pytest

from mvmdp import serialize
from mvmdp.errors import InputFormatError
from mvmdp.fixtures import forked_path, offset_chain, one_shot_two_arms
from mvmdp.rationals import rat


@pytest.mark.parametrize(
    "mdp", [one_shot_two_arms(), offset_chain(), forked_path(rat(2, 7))]
)
def test_round_trip_is_value_exact(mdp):
    text = serialize.dumps(mdp)
    again = serialize.loads(text)
    assert again == mdp
    assert serialize.dumps(again) == text


def test_stationary_entries_expand_to_all_steps():
    doc = {
        "horizon": 3,
        "states": ["s0"],
        "initial_state": "s0",
        "actions": {"s0": ["a"]},
        "transitions": [{"s": "s0", "a": "a", "rows": {"s0": [1, 1]}}],
        "rewards": [{"s": "s0", "a": "a", "pmf": [[[1, 2], [1, 1]]]}],
    }
    mdp = serialize.loads(json.dumps(doc))
    for t in range(3):
        assert mdp.transition(t, "s0", "a") == {"s0": 1}
        assert mdp.reward_pmf(t, "s0", "a") == {rat(1, 2): 1}


def test_nonstationary_dynamics_round_trip():
    doc = {
        "horizon": 2,
        "states": ["s0"],
        "initial_state": "s0",
        "actions": {"s0": ["a"]},
        "transitions": [{"s": "s0", "a": "a", "rows": {"s0": [1, 1]}}],
        "rewards": [
            {"t": 0, "s": "s0", "a": "a", "pmf": [[[1, 1], [1, 1]]]},
            {"t": 1, "s": "s0", "a": "a", "pmf": [[[-1, 1], [1, 1]]]},
        ],
    }
    mdp = serialize.loads(json.dumps(doc))
    assert mdp.reward_pmf(0, "s0", "a") == {1: 1}
    assert mdp.reward_pmf(1, "s0", "a") == {-1: 1}
    assert serialize.loads(serialize.dumps(mdp)) == mdp


@pytest.mark.parametrize(
    "mutate,needle",
    [
        (lambda d: d.pop("horizon"), "missing keys"),
        (lambda d: d.update(horizon="two"), "horizon"),
        (lambda d: d["transitions"].append({"s": "s0", "a": "a", "rows": {"s0": [1, 1]}}), "duplicate"),
        (lambda d: d["rewards"][0]["pmf"].append([[0, 1]]), "pmf item"),
        (lambda d: d["transitions"][0]["rows"].update(s0=[1, 0]), "bad rational"),
    ],
)
def test_malformed_documents_raise_input_errors(mutate, needle):
    doc = {
        "horizon": 1,
        "states": ["s0"],
        "initial_state": "s0",
        "actions": {"s0": ["a"]},
        "transitions": [{"s": "s0", "a": "a", "rows": {"s0": [1, 1]}}],
        "rewards": [{"s": "s0", "a": "a", "pmf": [[[0, 1], [1, 1]]]}],
    }
    mutate(doc)
    with pytest.raises(InputFormatError) as err:
        serialize.loads(json.dumps(doc))
    assert needle in str(err.value)


def test_strict_mode_rejects_semantically_invalid_mdp():
    doc = {
        "horizon": 1,
        "states": ["s0"],
        "initial_state": "s0",
        "actions": {"s0": ["a"]},
        "transitions": [{"s": "s0", "a": "a", "rows": {"s0": [1, 2]}}],
        "rewards": [{"s": "s0", "a": "a", "pmf": [[[0, 1], [1, 1]]]}],
    }
    with pytest.raises(InputFormatError):
        serialize.loads(json.dumps(doc))
    lax = serialize.loads(json.dumps(doc), strict=False)
    assert lax.horizon == 1


def test_not_json_raises():
    with pytest.raises(InputFormatError):
        serialize.loads("{not json")
