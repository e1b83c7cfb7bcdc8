"""Zero-variance reachability game, policy enumeration, class separations,
and hardness-reduction instance generators.

The zero-variance question (can the cumulative reward be made equal to some
constant k surely?) is a reachability game on the augmented graph: the
controller picks actions, an adversary picks any positive-probability
branch. One backward pass computes, for every node, the full set of forcible
terminal values, answering the question for every k at once.

Policy enumeration is the brute-force oracle used to validate the optimizing
modules on small instances: it walks every deterministic policy of a class
over the reachable decision points and evaluates each exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import EnumerationLimitError
from .frequency import frequencies_to_policy, mean_fixed_var_bounded
from .model import (
    DEFAULT_NODE_CAP,
    Mdp,
    PolicySpec,
    augment,
    evaluate_policy,
    make_mdp,
)
from .rationals import Rat, ZERO, ONE

DEFAULT_POLICY_CAP = 10**6


@dataclass(frozen=True)
class GameResult:
    """Forcible terminal values and a deterministic forcing policy for each."""

    achievable_values: frozenset
    winning_policy: dict


def zero_variance_values(
    mdp: Mdp, max_nodes: int = DEFAULT_NODE_CAP
) -> GameResult:
    """All k such that the cumulative reward can be forced to equal k.

    Per node (t, s, w) the recursion keeps the set of values forcible from
    there: at the horizon only w itself; earlier, any value every
    positive-probability branch of some action can force.
    """
    aug = augment(mdp, max_nodes=max_nodes)
    horizon = mdp.horizon
    win: list = [None] * (horizon + 1)
    win[horizon] = {(s, w): frozenset((w,)) for s, w in aug.layer(horizon)}
    for t in reversed(range(horizon)):
        layer = {}
        for s, w in aug.layer(t):
            forcible = set()
            for a in mdp.actions[s]:
                common = None
                for s2, p in mdp.transition(t, s, a).items():
                    if p <= 0:
                        continue
                    for r, g in mdp.reward_pmf(t, s, a).items():
                        if g <= 0:
                            continue
                        child = win[t + 1][(s2, w + r)]
                        common = child if common is None else common & child
                        if not common:
                            break
                    if not common:
                        break
                if common:
                    forcible |= common
            layer[(s, w)] = frozenset(forcible)
        win[t] = layer
    root = win[0][(mdp.initial_state, ZERO)]
    policies = {
        k: _forcing_policy(mdp, win, k) for k in sorted(root)
    }
    return GameResult(achievable_values=root, winning_policy=policies)


def _forcing_policy(mdp: Mdp, win: list, k) -> PolicySpec:
    """Forward reconstruction: at each reached node take the first action all
    of whose branches keep k forcible."""
    rule = {}
    frontier = {(mdp.initial_state, ZERO)}
    for t in range(mdp.horizon):
        nxt = set()
        for s, w in sorted(frontier):
            chosen = None
            for a in mdp.actions[s]:
                ok = True
                for s2, p in mdp.transition(t, s, a).items():
                    if p <= 0:
                        continue
                    for r, g in mdp.reward_pmf(t, s, a).items():
                        if g > 0 and k not in win[t + 1][(s2, w + r)]:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    chosen = a
                    break
            if chosen is None:
                raise AssertionError(f"no forcing action at ({t}, {s}, {w})")
            rule[(t, s, w)] = chosen
            for s2, p in mdp.transition(t, s, chosen).items():
                if p <= 0:
                    continue
                for r, g in mdp.reward_pmf(t, s, chosen).items():
                    if g > 0:
                        nxt.add((s2, w + r))
        frontier = nxt
    return PolicySpec("TSW", rule)


def _state_points(mdp: Mdp, aug) -> list:
    """Reachable (t, state) decision points in deterministic order."""
    order = {s: i for i, s in enumerate(mdp.states)}
    points = []
    for t in range(mdp.horizon):
        seen = sorted({s for s, _ in aug.layer(t)}, key=order.get)
        points.extend((t, s) for s in seen)
    return points


def _node_points(mdp: Mdp, aug) -> list:
    return [(t, s, w) for t in range(mdp.horizon) for s, w in aug.layer(t)]


def enumerate_policies(
    mdp: Mdp,
    class_tag: str,
    max_policies: int = DEFAULT_POLICY_CAP,
    max_nodes: int = DEFAULT_NODE_CAP,
) -> list:
    """Every deterministic policy of the class with its exact (J, Q, V).

    class_tag is "TS" (decides per reachable (t, state)) or "TSW" (per
    reachable (t, state, cumulative reward)).
    """
    if class_tag not in ("TS", "TSW"):
        raise ValueError(f"enumeration covers TS and TSW, not {class_tag!r}")
    aug = augment(mdp, max_nodes=max_nodes)
    if class_tag == "TS":
        points = _state_points(mdp, aug)
    else:
        points = _node_points(mdp, aug)
    count = 1
    for point in points:
        count *= len(mdp.actions[point[1]])
        if count > max_policies:
            raise EnumerationLimitError(
                f"more than {max_policies} {class_tag} policies"
            )
    out = []
    for combo in itertools.product(*(mdp.actions[p[1]] for p in points)):
        policy = PolicySpec(class_tag, dict(zip(points, combo)))
        ev = evaluate_policy(mdp, policy)
        out.append((policy, ev.mean, ev.second_moment, ev.variance))
    return out


def _simplex_grid(k: int, m: int):
    if k == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in _simplex_grid(k - 1, m - first):
            yield (first,) + rest


@dataclass(frozen=True)
class ClassFeasibility:
    feasible: bool
    witness: PolicySpec | None
    detail: str


@dataclass(frozen=True)
class SeparationReport:
    """Per-class answers to: is there a policy with mean >= mean_floor and
    variance <= variance_cap?"""

    mean_floor: Rat
    variance_cap: Rat
    entries: dict

    def __getitem__(self, class_tag: str) -> ClassFeasibility:
        return self.entries[class_tag]


def class_separation_report(
    mdp: Mdp,
    mean_floor,
    variance_cap,
    grid_resolution: int = 16,
    max_policies: int = DEFAULT_POLICY_CAP,
    max_combinations: int = DEFAULT_POLICY_CAP,
    max_nodes: int = DEFAULT_NODE_CAP,
) -> SeparationReport:
    """Feasibility of (mean >= mean_floor, variance <= variance_cap) per class.

    TS and TSW are decided exactly by enumeration. TS_U searches behavioral
    probabilities on a grid with grid_resolution levels per simplex: sound
    when it finds a witness, inconclusive otherwise (reported as no witness
    found at that resolution). TSW_U asks the occupation-measure LP at a
    sweep of fixed means: the floor itself, an even grid up to the mean
    bound, and every witness mean the other classes produced, so a feasible
    smaller class always propagates to a feasible TSW_U entry.
    """
    lam = Rat(mean_floor)
    cap = Rat(variance_cap)
    aug = augment(mdp, max_nodes=max_nodes)
    entries = {}
    witness_means = []

    def scan(class_tag):
        for policy, mean, _, variance in enumerate_policies(
            mdp, class_tag, max_policies=max_policies, max_nodes=max_nodes
        ):
            if mean >= lam and variance <= cap:
                return ClassFeasibility(
                    True, policy, f"enumerated witness with mean {mean}"
                ), mean
        return ClassFeasibility(False, None, "exhaustive enumeration"), None

    for tag in ("TS", "TSW"):
        entries[tag], mean = scan(tag)
        if mean is not None:
            witness_means.append(mean)

    entries["TS_U"], mean = _grid_search_state_randomized(
        mdp, aug, lam, cap, grid_resolution, max_combinations
    )
    if mean is not None:
        witness_means.append(mean)

    means = {lam}
    bound = mdp.mean_bound
    if bound > lam:
        step = (bound - lam) / 16
        means.update(lam + j * step for j in range(1, 17))
    means.update(mu for mu in witness_means if mu >= lam)
    found = None
    for mu in sorted(means):
        ok, z = mean_fixed_var_bounded(mdp, mu, cap, max_nodes=max_nodes)
        if ok:
            found = (mu, frequencies_to_policy(mdp, z))
            break
    if found is not None:
        entries["TSW_U"] = ClassFeasibility(
            True, found[1], f"occupation-measure witness with mean {found[0]}"
        )
    else:
        entries["TSW_U"] = ClassFeasibility(
            False, None, f"no witness at {len(means)} swept means"
        )
    return SeparationReport(mean_floor=lam, variance_cap=cap, entries=entries)


def _grid_search_state_randomized(
    mdp, aug, lam, cap, resolution, max_combinations
):
    if resolution < 1:
        raise ValueError("grid resolution must be at least 1")
    points = _state_points(mdp, aug)
    choice_lists = []
    total = 1
    for t, s in points:
        acts = mdp.actions[s]
        vectors = [
            {a: Rat(c, resolution) for a, c in zip(acts, combo)}
            for combo in _simplex_grid(len(acts), resolution)
        ]
        choice_lists.append(vectors)
        total *= len(vectors)
        if total > max_combinations:
            raise EnumerationLimitError(
                f"more than {max_combinations} grid policies"
            )
    for combo in itertools.product(*choice_lists):
        policy = PolicySpec("TS_U", dict(zip(points, combo)))
        ev = evaluate_policy(mdp, policy)
        if ev.mean >= lam and ev.variance <= cap:
            return ClassFeasibility(
                True, policy, f"grid witness with mean {ev.mean}"
            ), ev.mean
    return ClassFeasibility(
        False, None, f"no witness found at resolution {resolution}"
    ), None


def gen_subset_sum(values) -> Mdp:
    """Walk instance: one fair coin step to an absorbing exit, else a chain
    where step i adds or subtracts values[i]. Forcing total 0 surely needs
    the exit branch's 0 and a sign assignment balancing the values."""
    values = [int(v) for v in values]
    if not values:
        raise ValueError("need at least one value")
    if any(v <= 0 for v in values):
        raise ValueError("values must be positive")
    n = len(values)
    items = tuple(f"item{i}" for i in range(1, n + 1))
    states = ("toss",) + items + ("done", "out")
    actions = {"toss": ("go",), "done": ("stay",), "out": ("stay",)}
    transitions = {
        ("toss", "go"): {"out": Rat(1, 2), "item1": Rat(1, 2)},
        ("done", "stay"): {"done": ONE},
        ("out", "stay"): {"out": ONE},
    }
    rewards = {
        ("toss", "go"): {ZERO: ONE},
        ("done", "stay"): {ZERO: ONE},
        ("out", "stay"): {ZERO: ONE},
    }
    for i, value in enumerate(values, start=1):
        state = f"item{i}"
        target = f"item{i + 1}" if i < n else "done"
        actions[state] = ("plus", "minus")
        transitions[(state, "plus")] = {target: ONE}
        transitions[(state, "minus")] = {target: ONE}
        rewards[(state, "plus")] = {Rat(value): ONE}
        rewards[(state, "minus")] = {Rat(-value): ONE}
    return make_mdp(
        horizon=n + 1,
        states=states,
        initial_state="toss",
        actions=actions,
        transitions=transitions,
        rewards=rewards,
    )


def gen_3sat(clauses) -> Mdp:
    """Satisfiability instance over signed integer literals (3 per clause,
    shorter clauses padded by repeating the last literal).

    One uniform draw sends the process to an absorbing exit or to a clause;
    at a clause, picking a literal pays its sign; at the literal's variable,
    the truth choice pays the opposite sign iff it satisfies that literal.
    A state-only deterministic policy has identically zero total reward iff
    its truth assignment satisfies every clause.
    """
    padded = []
    for clause in clauses:
        lits = [int(l) for l in clause]
        if not lits or len(lits) > 3:
            raise ValueError("clauses need one to three literals")
        if any(l == 0 for l in lits):
            raise ValueError("literals are nonzero signed integers")
        while len(lits) < 3:
            lits.append(lits[-1])
        padded.append(tuple(lits))
    num_vars = max((abs(l) for c in padded for l in c), default=0)
    m = len(padded)
    clause_states = tuple(f"clause{j}" for j in range(1, m + 1))
    var_states = tuple(f"var{i}" for i in range(1, num_vars + 1))
    states = ("draw",) + clause_states + var_states + ("out",)
    actions = {"draw": ("go",), "out": ("stay",)}
    share = Rat(1, m + 1)
    first = {"out": share}
    for cs in clause_states:
        first[cs] = share
    transitions = {
        ("draw", "go"): first,
        ("out", "stay"): {"out": ONE},
    }
    rewards = {
        ("draw", "go"): {ZERO: ONE},
        ("out", "stay"): {ZERO: ONE},
    }
    for cs, lits in zip(clause_states, padded):
        actions[cs] = ("lit1", "lit2", "lit3")
        for name, lit in zip(actions[cs], lits):
            transitions[(cs, name)] = {f"var{abs(lit)}": ONE}
            rewards[(cs, name)] = {Rat(1 if lit > 0 else -1): ONE}
    for vs in var_states:
        actions[vs] = ("set_true", "set_false")
        transitions[(vs, "set_true")] = {"out": ONE}
        transitions[(vs, "set_false")] = {"out": ONE}
        rewards[(vs, "set_true")] = {Rat(-1): ONE}
        rewards[(vs, "set_false")] = {ONE: ONE}
    return make_mdp(
        horizon=3,
        states=states,
        initial_state="draw",
        actions=actions,
        transitions=transitions,
        rewards=rewards,
    )
