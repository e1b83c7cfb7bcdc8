"""Finite-horizon MDP model with exact rational dynamics.

An Mdp is a fixed-horizon process: at each step t < horizon the process sits
in a state s, an action a from actions[s] is taken, a reward is drawn from the
pmf rewards[(t, s, a)], and the next state is drawn independently from
transitions[(t, s, a)]. Performance of a policy is measured through the
terminal cumulative reward: its mean, second moment and variance.

Policies come in four classes, named by what the decision rule may observe:

    TS     deterministic,  sees (t, state)
    TS_U   randomized,     sees (t, state)
    TSW    deterministic,  sees (t, state, cumulative reward)
    TSW_U  randomized,     sees (t, state, cumulative reward)

All probabilities and rewards are exact rationals; evaluation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AugmentationLimitError, PolicyCoverageError
from .rationals import Rat, ZERO, rat

POLICY_CLASSES = ("TS", "TS_U", "TSW", "TSW_U")
RANDOMIZED_CLASSES = ("TS_U", "TSW_U")
REWARD_AWARE_CLASSES = ("TSW", "TSW_U")

DEFAULT_NODE_CAP = 10**6


@dataclass(frozen=True)
class Mdp:
    """Finite-horizon MDP. All maps are total over 0 <= t < horizon.

    transitions: (t, s, a) -> {next_state: probability}
    rewards:     (t, s, a) -> {reward_value: probability}
    Entries with probability zero may be present; consumers skip them.
    """

    horizon: int
    states: tuple[str, ...]
    initial_state: str
    actions: dict[str, tuple[str, ...]]
    transitions: dict[tuple[int, str, str], dict[str, Rat]]
    rewards: dict[tuple[int, str, str], dict[Rat, Rat]]

    def transition(self, t: int, s: str, a: str) -> dict[str, Rat]:
        return self.transitions[(t, s, a)]

    def reward_pmf(self, t: int, s: str, a: str) -> dict[Rat, Rat]:
        return self.rewards[(t, s, a)]

    @property
    def reward_bound(self) -> Rat:
        """Largest |reward value| carrying positive probability (0 if none)."""
        bound = ZERO
        for pmf in self.rewards.values():
            for value, prob in pmf.items():
                if prob > 0 and abs(value) > bound:
                    bound = abs(value)
        return bound

    @property
    def mean_bound(self) -> Rat:
        """reward_bound * horizon; |terminal cumulative reward| never exceeds it."""
        return self.reward_bound * self.horizon

    def integer_rewards(self) -> bool:
        return all(
            value.denominator == 1
            for pmf in self.rewards.values()
            for value, prob in pmf.items()
            if prob > 0
        )


def make_mdp(horizon, states, initial_state, actions, transitions, rewards) -> Mdp:
    """Normalizing constructor: coerces numbers to Rat and keys to canonical form.

    transitions/rewards may be keyed (t, s, a) or (s, a); (s, a) entries are
    expanded to every step (stationary dynamics).
    """
    states = tuple(states)
    actions = {s: tuple(acts) for s, acts in actions.items()}

    def expand(table, convert_key):
        out = {}
        for key, row in table.items():
            if len(key) == 3:
                t, s, a = key
                out[(int(t), s, a)] = convert_key(row)
            elif len(key) == 2:
                s, a = key
                converted = convert_key(row)
                for t in range(horizon):
                    out[(t, s, a)] = dict(converted)
            else:
                raise ValueError(f"bad dynamics key {key!r}")
        return out

    transitions = expand(
        transitions, lambda row: {s2: rat(p) for s2, p in row.items()}
    )
    rewards = expand(
        rewards, lambda pmf: {rat(v): rat(p) for v, p in pmf.items()}
    )
    return Mdp(int(horizon), states, initial_state, actions, transitions, rewards)


@dataclass(frozen=True)
class Violation:
    """One validation failure, locating the offending (t, s, a) when applicable."""

    location: tuple
    message: str

    def __str__(self) -> str:
        where = ", ".join(str(p) for p in self.location)
        return f"[{where}] {self.message}" if self.location else self.message


def validate(mdp: Mdp) -> list[Violation]:
    """Every invariant violation; empty list iff the Mdp is well-formed."""
    out: list[Violation] = []
    state_set = set(mdp.states)
    if mdp.horizon < 1:
        out.append(Violation((), f"horizon must be >= 1, got {mdp.horizon}"))
    if len(state_set) != len(mdp.states):
        out.append(Violation((), "duplicate state names"))
    if mdp.initial_state not in state_set:
        out.append(Violation((), f"initial state {mdp.initial_state!r} not a state"))
    for s in mdp.states:
        acts = mdp.actions.get(s)
        if not acts:
            out.append(Violation((s,), "state has no actions"))
        elif len(set(acts)) != len(acts):
            out.append(Violation((s,), "duplicate action names"))
    for s in mdp.actions:
        if s not in state_set:
            out.append(Violation((s,), "actions given for unknown state"))

    for t in range(max(mdp.horizon, 0)):
        for s in mdp.states:
            for a in mdp.actions.get(s, ()):
                loc = (t, s, a)
                row = mdp.transitions.get(loc)
                if row is None:
                    out.append(Violation(loc, "missing transition row"))
                else:
                    total = ZERO
                    for s2, p in row.items():
                        if s2 not in state_set:
                            out.append(Violation(loc, f"transition to unknown state {s2!r}"))
                        if p < 0:
                            out.append(Violation(loc, f"negative transition probability {p}"))
                        total += p
                    if total != 1:
                        out.append(Violation(loc, f"transition probabilities sum to {total}, not 1"))
                pmf = mdp.rewards.get(loc)
                if pmf is None:
                    out.append(Violation(loc, "missing reward pmf"))
                else:
                    total = ZERO
                    for _, p in pmf.items():
                        if p < 0:
                            out.append(Violation(loc, f"negative reward probability {p}"))
                        total += p
                    if total != 1:
                        out.append(Violation(loc, f"reward probabilities sum to {total}, not 1"))

    for (t, s, a) in list(mdp.transitions) + list(mdp.rewards):
        if not (0 <= t < mdp.horizon):
            out.append(Violation((t, s, a), f"dynamics entry outside horizon 0..{mdp.horizon - 1}"))
        elif s not in state_set or a not in mdp.actions.get(s, ()):
            out.append(Violation((t, s, a), "dynamics entry for unknown state/action"))
    return out


@dataclass(frozen=True)
class AugmentedSpace:
    """Reachable (state, cumulative reward) pairs, layered by step.

    layers[t] lists the pairs reachable at step t, t = 0..horizon; the order is
    deterministic (state order as in mdp.states, then reward value).
    """

    layers: tuple[tuple[tuple[str, Rat], ...], ...]
    integer_rewards: bool

    @property
    def node_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def layer(self, t: int) -> tuple[tuple[str, Rat], ...]:
        return self.layers[t]

    def reward_values(self, t: int) -> list[Rat]:
        return sorted({w for _, w in self.layers[t]})


def augment(mdp: Mdp, max_nodes: int = DEFAULT_NODE_CAP) -> AugmentedSpace:
    """Forward reachability over (state, cumulative reward), layer by layer.

    With integer rewards layer sizes stay polynomial (each layer's reward values
    lie among the integers within +-reward_bound*t); general rational rewards can
    grow exponentially, hence the node cap.
    """
    order = {s: i for i, s in enumerate(mdp.states)}
    current: set[tuple[str, Rat]] = {(mdp.initial_state, ZERO)}
    layers = [current]
    total = 1
    for t in range(mdp.horizon):
        nxt: set[tuple[str, Rat]] = set()
        for s, w in current:
            for a in mdp.actions[s]:
                row = mdp.transitions[(t, s, a)]
                pmf = mdp.rewards[(t, s, a)]
                for s2, p in row.items():
                    if p <= 0:
                        continue
                    for r, q in pmf.items():
                        if q <= 0:
                            continue
                        nxt.add((s2, w + r))
        total += len(nxt)
        if total > max_nodes:
            raise AugmentationLimitError(
                f"augmented space exceeds {max_nodes} nodes at layer {t + 1}"
            )
        layers.append(nxt)
        current = nxt
    ordered = tuple(
        tuple(sorted(layer, key=lambda sw: (order[sw[0]], sw[1]))) for layer in layers
    )
    return AugmentedSpace(layers=ordered, integer_rewards=mdp.integer_rewards())


@dataclass(frozen=True)
class PolicySpec:
    """A decision rule for one of the four policy classes.

    rule keys are (t, s) for TS/TS_U and (t, s, w) for TSW/TSW_U; values are an
    action name (deterministic classes) or {action: probability} (randomized).
    """

    policy_class: str
    rule: dict = field(compare=True)

    def __post_init__(self):
        if self.policy_class not in POLICY_CLASSES:
            raise ValueError(f"unknown policy class {self.policy_class!r}")

    @property
    def randomized(self) -> bool:
        return self.policy_class in RANDOMIZED_CLASSES

    @property
    def reward_aware(self) -> bool:
        return self.policy_class in REWARD_AWARE_CLASSES

    def action_pmf(self, t: int, s: str, w) -> dict[str, Rat]:
        """Action distribution at a decision point; raises PolicyCoverageError."""
        key = (t, s, w) if self.reward_aware else (t, s)
        try:
            choice = self.rule[key]
        except KeyError:
            raise PolicyCoverageError(
                f"policy ({self.policy_class}) has no rule at {key}"
            ) from None
        if self.randomized:
            return choice
        return {choice: Rat(1)}


def check_policy(mdp: Mdp, policy: PolicySpec) -> list[Violation]:
    """Static checks: known actions, distributions sum to 1 and are nonnegative."""
    out: list[Violation] = []
    for key, choice in policy.rule.items():
        s = key[1]
        acts = mdp.actions.get(s, ())
        if policy.randomized:
            total = ZERO
            for a, p in choice.items():
                if a not in acts:
                    out.append(Violation(key, f"unknown action {a!r}"))
                if p < 0:
                    out.append(Violation(key, f"negative action probability {p}"))
                total += p
            if total != 1:
                out.append(Violation(key, f"action probabilities sum to {total}, not 1"))
        else:
            if choice not in acts:
                out.append(Violation(key, f"unknown action {choice!r}"))
    return out


@dataclass(frozen=True)
class PolicyEvaluation:
    """Exact performance of a policy: terminal-cumulative-reward statistics."""

    mean: Rat
    second_moment: Rat
    variance: Rat
    terminal: dict[Rat, Rat]  # pmf of the terminal cumulative reward


def evaluate_policy(mdp: Mdp, policy: PolicySpec) -> PolicyEvaluation:
    """Exact forward propagation of the joint (state, cumulative reward) law."""
    dist: dict[tuple[str, Rat], Rat] = {(mdp.initial_state, ZERO): Rat(1)}
    for t in range(mdp.horizon):
        nxt: dict[tuple[str, Rat], Rat] = {}
        for (s, w), mass in dist.items():
            if mass == 0:
                continue
            for a, pa in policy.action_pmf(t, s, w).items():
                if pa == 0:
                    continue
                if a not in mdp.actions[s]:
                    raise PolicyCoverageError(
                        f"policy picks unknown action {a!r} at (t={t}, s={s})"
                    )
                row = mdp.transitions[(t, s, a)]
                pmf = mdp.rewards[(t, s, a)]
                base = mass * pa
                for s2, p in row.items():
                    if p <= 0:
                        continue
                    for r, q in pmf.items():
                        if q <= 0:
                            continue
                        key = (s2, w + r)
                        add = base * p * q
                        if key in nxt:
                            nxt[key] += add
                        else:
                            nxt[key] = add
        dist = nxt
    terminal: dict[Rat, Rat] = {}
    for (s, w), mass in dist.items():
        if mass == 0:
            continue
        if w in terminal:
            terminal[w] += mass
        else:
            terminal[w] = mass
    mean = sum((w * m for w, m in terminal.items()), ZERO)
    second = sum((w * w * m for w, m in terminal.items()), ZERO)
    return PolicyEvaluation(
        mean=mean,
        second_moment=second,
        variance=second - mean * mean,
        terminal=terminal,
    )
