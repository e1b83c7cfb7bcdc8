import itertools
import random

import pytest

from mvmdp.fixtures import (
    all_zero,
    forked_path,
    offset_chain,
    one_shot_two_arms,
    two_point_stage,
)
from mvmdp.frequency import (
    build_polytope,
    check_frequency,
    exact_pair_feasible,
    frequencies_to_policy,
    lower_hull_min_q,
    mean_fixed_var_bounded,
    min_q_over_interval,
    policy_frequencies,
    terminal_lower_hull,
)
from mvmdp.lp import LpStatus, solve
from mvmdp.model import PolicySpec, augment, evaluate_policy, make_mdp
from mvmdp.rationals import Rat


def test_skeleton_counts_one_stage():
    mdp = two_point_stage()
    sk = build_polytope(augment(mdp), mdp)
    # 2 action vars, 3 marginal vars; 1 mass + 1 coupling + 2 flow rows.
    assert len(sk.sa_keys) == 2
    assert len(sk.x_keys) == 3
    assert len(sk.rows) == 4


def test_all_zero_polytope_is_a_point():
    mdp = all_zero(horizon=2)
    sk = build_polytope(augment(mdp), mdp)
    sol = sk.run()
    assert sol.status is LpStatus.OPTIMAL
    z = sk.solution_vector(sol)
    assert all(v == 1 for v in z.z_sa.values())
    assert all(v == 1 for v in z.z_x.values())
    assert check_frequency(sk, z) == []


def test_layer_masses_sum_to_one():
    mdp = forked_path(Rat(1, 3))
    sk = build_polytope(augment(mdp), mdp)
    sol = sk.run(objective=sk.sm_coeffs)
    z = sk.solution_vector(sol)
    for t in range(mdp.horizon + 1):
        mass = sum(m for (tt, _, _), m in z.z_x.items() if tt == t)
        assert mass == 1


def test_exact_pair_examples():
    mdp = one_shot_two_arms()
    assert exact_pair_feasible(mdp, 0, 0)[0]
    assert exact_pair_feasible(mdp, 1, 1)[0]
    assert exact_pair_feasible(mdp, Rat(1, 2), Rat(3, 4))[0]
    assert not exact_pair_feasible(mdp, 1, 0)[0]
    assert not exact_pair_feasible(mdp, 2, 0)[0]


def test_exact_pair_witness_round_trip():
    mdp = one_shot_two_arms()
    ok, z = exact_pair_feasible(mdp, Rat(1, 2), Rat(3, 4))
    assert ok
    sk = build_polytope(augment(mdp), mdp)
    assert check_frequency(sk, z) == []
    assert z.terminal_mean(mdp.horizon) == Rat(1, 2)
    assert z.terminal_second_moment(mdp.horizon) == Rat(3, 4) + Rat(1, 4)
    policy = frequencies_to_policy(mdp, z)
    ev = evaluate_policy(mdp, policy)
    assert ev.mean == Rat(1, 2)
    assert ev.variance == Rat(3, 4)


def test_exact_zero_variance_pair_on_offset_chain():
    ok, z = exact_pair_feasible(offset_chain(), 1, 0)
    assert ok
    policy = frequencies_to_policy(offset_chain(), z)
    ev = evaluate_policy(offset_chain(), policy)
    assert (ev.mean, ev.variance) == (1, 0)
    assert ev.terminal == {1: 1}


def test_mean_fixed_var_bounded_examples():
    mdp = one_shot_two_arms()
    ok, z = mean_fixed_var_bounded(mdp, Rat(1, 4), Rat(1, 2))
    assert ok
    ev = evaluate_policy(mdp, frequencies_to_policy(mdp, z))
    assert ev.mean == Rat(1, 4)
    assert ev.variance <= Rat(1, 2)
    assert not mean_fixed_var_bounded(mdp, Rat(1, 4), Rat(1, 4))[0]
    # Mean beyond the reward budget: reward_bound * horizon is 2 here.
    assert not mean_fixed_var_bounded(mdp, 3, 100)[0]


def test_min_q_over_interval_examples():
    mdp = one_shot_two_arms()
    assert min_q_over_interval(mdp, 0, 1) == (LpStatus.OPTIMAL, 0)
    assert min_q_over_interval(mdp, Rat(1, 2), 1) == (LpStatus.OPTIMAL, 1)
    assert min_q_over_interval(mdp, 1, 1) == (LpStatus.OPTIMAL, 2)
    status, value = min_q_over_interval(mdp, 2, 3)
    assert status is LpStatus.INFEASIBLE
    assert value is None
    with pytest.raises(ValueError):
        min_q_over_interval(mdp, 1, 0)


def test_warm_start_agrees_with_cold_solve():
    mdp = offset_chain()
    sk = build_polytope(augment(mdp), mdp)
    warm = sk.run(objective=sk.sm_coeffs)
    cold = solve(sk.problem(objective=sk.sm_coeffs))
    assert warm.status is cold.status is LpStatus.OPTIMAL
    assert warm.value == cold.value == 0


def test_hull_one_shot():
    assert terminal_lower_hull(one_shot_two_arms()) == [(0, 0), (1, 2)]


def test_hull_offset_chain():
    # Deterministic reward-aware policies reach (0,0), (1/2,1/2), (1,1),
    # (1,2), (3/2,5/2); only three survive as lower-boundary corners.
    hull = terminal_lower_hull(offset_chain())
    assert hull == [(0, 0), (1, 1), (Rat(3, 2), Rat(5, 2))]


def test_hull_single_point():
    assert terminal_lower_hull(all_zero(horizon=3)) == [(0, 0)]


def test_lower_hull_min_q_queries():
    hull = terminal_lower_hull(one_shot_two_arms())
    assert lower_hull_min_q(hull, 0, 1) == 0
    assert lower_hull_min_q(hull, Rat(1, 2), 1) == 1
    assert lower_hull_min_q(hull, Rat(3, 4), Rat(3, 4)) == Rat(3, 2)
    assert lower_hull_min_q(hull, -5, 5) == 0
    assert lower_hull_min_q(hull, 2, 3) is None


def _random_mdp(rng, max_states=2, max_actions=2, max_horizon=3):
    horizon = rng.randrange(1, max_horizon + 1)
    n = rng.randrange(1, max_states + 1)
    states = tuple(f"s{i}" for i in range(n))
    actions = {
        s: tuple(f"a{j}" for j in range(rng.randrange(1, max_actions + 1)))
        for s in states
    }
    transitions = {}
    rewards = {}
    for t in range(horizon):
        for s in states:
            for a in actions[s]:
                targets = rng.sample(states, rng.randrange(1, n + 1))
                weights = [rng.randrange(1, 4) for _ in targets]
                total = sum(weights)
                transitions[(t, s, a)] = {
                    s2: Rat(wt, total) for s2, wt in zip(targets, weights)
                }
                values = rng.sample(range(-2, 3), rng.randrange(1, 3))
                weights = [rng.randrange(1, 4) for _ in values]
                total = sum(weights)
                rewards[(t, s, a)] = {
                    Rat(v): Rat(wt, total) for v, wt in zip(values, weights)
                }
    return make_mdp(
        horizon=horizon,
        states=states,
        initial_state=states[0],
        actions=actions,
        transitions=transitions,
        rewards=rewards,
    )


def _deterministic_reward_aware_policies(mdp, aug, cap=256):
    points = [
        (t, s, w) for t in range(mdp.horizon) for s, w in aug.layers[t]
    ]
    size = 1
    for t, s, w in points:
        size *= len(mdp.actions[s])
        if size > cap:
            return None
    out = []
    for combo in itertools.product(*(mdp.actions[s] for _, s, _ in points)):
        out.append(PolicySpec("TSW", dict(zip(points, combo))))
    return out


def _lower_hull_of_points(points):
    best = {}
    for lam, q in points:
        if lam not in best or q < best[lam]:
            best[lam] = q
    pts = sorted(best.items())
    if len(pts) == 1:
        return list(pts)
    chain = []
    for p in pts:
        while len(chain) >= 2:
            (x0, y0), (x1, y1) = chain[-2], chain[-1]
            if (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0) <= 0:
                chain.pop()
            else:
                break
        chain.append(p)
    return chain


def test_hull_matches_policy_enumeration():
    rng = random.Random(20260822)
    checked = 0
    while checked < 25:
        mdp = _random_mdp(rng)
        aug = augment(mdp)
        policies = _deterministic_reward_aware_policies(mdp, aug)
        if policies is None:
            continue
        points = []
        for policy in policies:
            ev = evaluate_policy(mdp, policy)
            points.append((ev.mean, ev.second_moment))
        expected = _lower_hull_of_points(points)
        assert terminal_lower_hull(mdp) == expected
        checked += 1


def test_policy_frequencies_lie_in_polytope():
    rng = random.Random(7)
    for _ in range(15):
        mdp = _random_mdp(rng, max_states=3, max_horizon=3)
        aug = augment(mdp)
        sk = build_polytope(aug, mdp)
        rule = {}
        for t in range(mdp.horizon):
            for s, w in aug.layers[t]:
                acts = mdp.actions[s]
                weights = [rng.randrange(0, 3) for _ in acts]
                if sum(weights) == 0:
                    weights[0] = 1
                total = sum(weights)
                rule[(t, s, w)] = {
                    a: Rat(wt, total) for a, wt in zip(acts, weights)
                }
        policy = PolicySpec("TSW_U", rule)
        z = policy_frequencies(mdp, policy, aug)
        assert check_frequency(sk, z) == []
        ev = evaluate_policy(mdp, policy)
        assert z.terminal_mean(mdp.horizon) == ev.mean
        assert z.terminal_second_moment(mdp.horizon) == ev.second_moment


def test_interval_minimum_is_monotone_in_the_window():
    rng = random.Random(99)
    for _ in range(8):
        mdp = _random_mdp(rng)
        hull = terminal_lower_hull(mdp)
        lam_min, lam_max = hull[0][0], hull[-1][0]
        status, wide = min_q_over_interval(mdp, lam_min, lam_max)
        assert status is LpStatus.OPTIMAL
        mid = (lam_min + lam_max) / 2
        status, narrow = min_q_over_interval(mdp, mid, lam_max)
        assert status is LpStatus.OPTIMAL
        assert wide <= narrow
        assert wide == lower_hull_min_q(hull, lam_min, lam_max)
        assert narrow == lower_hull_min_q(hull, mid, lam_max)


def test_exact_pair_implies_bounded_query():
    rng = random.Random(3)
    for _ in range(6):
        mdp = _random_mdp(rng)
        hull = terminal_lower_hull(mdp)
        lam, q = hull[-1]
        ok, _ = exact_pair_feasible(mdp, lam, q - lam * lam)
        assert ok
        ok, _ = mean_fixed_var_bounded(mdp, lam, q - lam * lam)
        assert ok
