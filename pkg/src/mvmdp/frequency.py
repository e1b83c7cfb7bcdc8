"""Occupation-measure polytope over the augmented space, and its LP queries.

For a policy, z_sa(t, (s, w), a) is the probability of being in state s with
accumulated reward w at step t and taking action a; z_x(t, (s, w)) is the
state marginal. Ranging over all history-dependent randomized policies, these
vectors form a polytope described exactly by:

    - nonnegativity,
    - unit mass on the initial point: z_x(0, (s0, 0)) = 1,
    - action-marginal coupling: sum_a z_sa(t, x, a) = z_x(t, x),
    - flow conservation through the factored kernel
      p_t(s'|s,a) * g_t(w'-w|s,a) into every layer-(t+1) point.

Unreachable (s, w) pairs are omitted entirely; the polytope over the reachable
layers is the same. Every terminal statistic of interest (mean and second
moment of the cumulative reward) is linear in z, which is what makes the
mean-variance questions below linear programs.

Skeletons are immutable after construction; each query builds a fresh
LpProblem, so concurrent queries against one skeleton are safe.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lp import LpProblem, LpSolution, LpStatus, solve
from .model import (
    AugmentedSpace,
    Mdp,
    DEFAULT_NODE_CAP,
    PolicySpec,
    augment,
)
from .rationals import Rat, ZERO, ONE


@dataclass(frozen=True)
class FrequencyVector:
    """Occupation measures keyed (t, s, w, a) and (t, s, w)."""

    z_sa: dict
    z_x: dict

    def terminal_mean(self, horizon: int) -> Rat:
        return sum(
            (w * m for (t, _, w), m in self.z_x.items() if t == horizon), ZERO
        )

    def terminal_second_moment(self, horizon: int) -> Rat:
        return sum(
            (w * w * m for (t, _, w), m in self.z_x.items() if t == horizon), ZERO
        )


class PolytopeSkeleton:
    """Constraint system of the polytope with a fixed variable order.

    Variables: one per z_sa entry (t < horizon), then one per z_x entry
    (t <= horizon). Rows: initial mass, couplings in layer order, flows in
    layer order. The ordering makes the deterministic-first-action policy a
    triangular warm basis for the solver.
    """

    def __init__(self, mdp: Mdp, aug: AugmentedSpace):
        self.mdp = mdp
        self.aug = aug
        self.sa_keys: list = []
        self.x_keys: list = []
        for t in range(mdp.horizon):
            for s, w in aug.layers[t]:
                for a in mdp.actions[s]:
                    self.sa_keys.append((t, s, w, a))
        for t in range(mdp.horizon + 1):
            for s, w in aug.layers[t]:
                self.x_keys.append((t, s, w))
        self.sa_index = {k: i for i, k in enumerate(self.sa_keys)}
        base = len(self.sa_keys)
        self.x_index = {k: base + i for i, k in enumerate(self.x_keys)}
        self.num_vars = base + len(self.x_keys)

        s0, w0 = aug.layers[0][0]
        self.rows: list = [({self.x_index[(0, s0, w0)]: ONE}, ONE)]
        self._warm: dict[int, int] = {0: self.x_index[(0, s0, w0)]}
        for t in range(mdp.horizon):
            for s, w in aug.layers[t]:
                coeffs = {self.sa_index[(t, s, w, a)]: ONE for a in mdp.actions[s]}
                coeffs[self.x_index[(t, s, w)]] = -ONE
                self._warm[len(self.rows)] = self.sa_index[(t, s, w, mdp.actions[s][0])]
                self.rows.append((coeffs, ZERO))
        inflow: dict = {key: {} for key in self.x_keys if key[0] > 0}
        for t, s, w, a in self.sa_keys:
            var = self.sa_index[(t, s, w, a)]
            for s2, p in mdp.transition(t, s, a).items():
                if p <= 0:
                    continue
                for r, q in mdp.reward_pmf(t, s, a).items():
                    if q <= 0:
                        continue
                    row = inflow[(t + 1, s2, w + r)]
                    row[var] = row.get(var, ZERO) - p * q
        for t in range(1, mdp.horizon + 1):
            for s, w in aug.layers[t]:
                coeffs = dict(inflow[(t, s, w)])
                coeffs[self.x_index[(t, s, w)]] = ONE
                self._warm[len(self.rows)] = self.x_index[(t, s, w)]
                self.rows.append((coeffs, ZERO))

        horizon = mdp.horizon
        self.mean_coeffs = {
            self.x_index[(horizon, s, w)]: w for s, w in aug.layers[horizon] if w != 0
        }
        self.sm_coeffs = {
            self.x_index[(horizon, s, w)]: w * w
            for s, w in aug.layers[horizon]
            if w != 0
        }

    def problem(
        self,
        objective: dict | None = None,
        extra_rows: list | None = None,
        extra_vars: list | None = None,
    ) -> LpProblem:
        """Fresh LpProblem: base constraints plus optional extra rows/variables.

        extra_vars is a list of (lower, upper) bounds; extra rows may reference
        the new variables at indices num_vars, num_vars + 1, ...
        """
        extra_vars = extra_vars or []
        n = self.num_vars + len(extra_vars)
        prob = LpProblem(num_vars=n)
        for coeffs, rhs in self.rows:
            prob.rows.append((coeffs, rhs))
        for k, (lo, hi) in enumerate(extra_vars):
            prob.lower[self.num_vars + k] = Rat(lo)
            prob.upper[self.num_vars + k] = None if hi is None else Rat(hi)
        for coeffs, rhs in extra_rows or []:
            prob.add_row(coeffs, rhs)
        if objective:
            for j, c in objective.items():
                prob.objective[j] = Rat(c)
        return prob

    def warm_basis(self) -> dict[int, int]:
        return dict(self._warm)

    def solution_vector(self, sol: LpSolution) -> FrequencyVector:
        z_sa = {k: sol.x[i] for k, i in self.sa_index.items()}
        z_x = {k: sol.x[i] for k, i in self.x_index.items()}
        return FrequencyVector(z_sa=z_sa, z_x=z_x)

    def run(
        self,
        objective: dict | None = None,
        extra_rows: list | None = None,
        extra_vars: list | None = None,
    ) -> LpSolution:
        prob = self.problem(objective, extra_rows, extra_vars)
        return solve(prob, initial_basis=self.warm_basis())


def build_polytope(aug: AugmentedSpace, mdp: Mdp) -> PolytopeSkeleton:
    """Constraint skeleton (no objective) for the frequency polytope."""
    return PolytopeSkeleton(mdp, aug)


def _skeleton(mdp: Mdp, max_nodes: int) -> PolytopeSkeleton:
    return build_polytope(augment(mdp, max_nodes=max_nodes), mdp)


def check_frequency(skeleton: PolytopeSkeleton, z: FrequencyVector) -> list[str]:
    """Exact constraint residual check; empty list iff z is in the polytope."""
    problems = []
    values = [ZERO] * skeleton.num_vars
    for k, i in skeleton.sa_index.items():
        values[i] = z.z_sa.get(k, ZERO)
    for k, i in skeleton.x_index.items():
        values[i] = z.z_x.get(k, ZERO)
    if any(v < 0 for v in values):
        problems.append("negative entry")
    for idx, (coeffs, rhs) in enumerate(skeleton.rows):
        total = sum((c * values[j] for j, c in coeffs.items()), ZERO)
        if total != rhs:
            problems.append(f"row {idx} residual {total - rhs}")
    return problems


def exact_pair_feasible(
    mdp: Mdp, mean, variance, max_nodes: int = DEFAULT_NODE_CAP
) -> tuple[bool, FrequencyVector | None]:
    """Is there a policy with exactly this (mean, variance) of the cumulative reward?

    Linear in z: mean row = mean and second-moment row = variance + mean^2.
    """
    mean = Rat(mean)
    variance = Rat(variance)
    sk = _skeleton(mdp, max_nodes)
    sol = sk.run(
        extra_rows=[
            (sk.mean_coeffs, mean),
            (sk.sm_coeffs, variance + mean * mean),
        ]
    )
    if sol.status is not LpStatus.OPTIMAL:
        return False, None
    return True, sk.solution_vector(sol)


def mean_fixed_var_bounded(
    mdp: Mdp, mean, variance_cap, max_nodes: int = DEFAULT_NODE_CAP
) -> tuple[bool, FrequencyVector | None]:
    """Is there a policy with this exact mean and variance <= variance_cap?"""
    mean = Rat(mean)
    variance_cap = Rat(variance_cap)
    sk = _skeleton(mdp, max_nodes)
    slack = sk.num_vars
    sm = dict(sk.sm_coeffs)
    sm[slack] = ONE
    sol = sk.run(
        extra_rows=[
            (sk.mean_coeffs, mean),
            (sm, variance_cap + mean * mean),
        ],
        extra_vars=[(ZERO, None)],
    )
    if sol.status is not LpStatus.OPTIMAL:
        return False, None
    return True, sk.solution_vector(sol)


def min_q_over_interval(
    mdp: Mdp, lo, hi, max_nodes: int = DEFAULT_NODE_CAP
) -> tuple[LpStatus, Rat | None]:
    """Smallest achievable second moment with the mean confined to [lo, hi]."""
    lo = Rat(lo)
    hi = Rat(hi)
    if lo > hi:
        raise ValueError("empty interval")
    sk = _skeleton(mdp, max_nodes)
    sol = _min_q(sk, lo, hi)
    if sol.status is not LpStatus.OPTIMAL:
        return LpStatus.INFEASIBLE, None
    return LpStatus.OPTIMAL, sol.value


def _min_q(sk: PolytopeSkeleton, lo: Rat, hi: Rat) -> LpSolution:
    if lo == hi:
        return sk.run(objective=sk.sm_coeffs, extra_rows=[(sk.mean_coeffs, lo)])
    window = sk.num_vars
    mean_row = dict(sk.mean_coeffs)
    mean_row[window] = -ONE
    return sk.run(
        objective=sk.sm_coeffs,
        extra_rows=[(mean_row, lo)],
        extra_vars=[(ZERO, hi - lo)],
    )


def frequencies_to_policy(mdp: Mdp, z: FrequencyVector) -> PolicySpec:
    """Behavioral policy with action law z_sa / z_x; first action where z_x = 0.

    Evaluating the result reproduces z's terminal moments exactly.
    """
    rule = {}
    for (t, s, w), mass in z.z_x.items():
        if t >= mdp.horizon:
            continue
        if mass > 0:
            rule[(t, s, w)] = {
                a: z.z_sa.get((t, s, w, a), ZERO) / mass for a in mdp.actions[s]
            }
        else:
            rule[(t, s, w)] = {mdp.actions[s][0]: ONE}
    return PolicySpec("TSW_U", rule)


def policy_frequencies(mdp: Mdp, policy: PolicySpec, aug: AugmentedSpace | None = None) -> FrequencyVector:
    """Occupation measures induced by a policy (exact forward propagation)."""
    if aug is None:
        aug = augment(mdp)
    z_sa: dict = {}
    z_x: dict = {}
    dist: dict = {(mdp.initial_state, ZERO): ONE}
    for t in range(mdp.horizon + 1):
        for s, w in aug.layers[t]:
            z_x[(t, s, w)] = dist.get((s, w), ZERO)
        if t == mdp.horizon:
            break
        nxt: dict = {}
        for s, w in aug.layers[t]:
            mass = dist.get((s, w), ZERO)
            pmf = policy.action_pmf(t, s, w) if mass > 0 else {}
            for a in mdp.actions[s]:
                pa = pmf.get(a, ZERO)
                z_sa[(t, s, w, a)] = mass * pa
                if mass == 0 or pa == 0:
                    continue
                for s2, p in mdp.transition(t, s, a).items():
                    if p <= 0:
                        continue
                    for r, q in mdp.reward_pmf(t, s, a).items():
                        if q <= 0:
                            continue
                        key = (s2, w + r)
                        nxt[key] = nxt.get(key, ZERO) + mass * pa * p * q
        dist = nxt
    return FrequencyVector(z_sa=z_sa, z_x=z_x)


def terminal_lower_hull(
    mdp: Mdp,
    max_nodes: int = DEFAULT_NODE_CAP,
    skeleton: PolytopeSkeleton | None = None,
) -> list[tuple[Rat, Rat]]:
    """Vertices of the lower boundary of the achievable (mean, second moment)
    set, left to right. Purely LP-driven (support directions with an exact
    lexicographic second stage), independent of the geometric DP engine.
    """
    sk = skeleton if skeleton is not None else _skeleton(mdp, max_nodes)

    lo_sol = sk.run(objective=sk.mean_coeffs)
    hi_sol = sk.run(objective={j: -c for j, c in sk.mean_coeffs.items()})
    lam_min = lo_sol.value
    lam_max = -hi_sol.value
    q_at_min = _min_q(sk, lam_min, lam_min).value
    left = (lam_min, q_at_min)
    if lam_min == lam_max:
        return [left]
    q_at_max = _min_q(sk, lam_max, lam_max).value
    right = (lam_max, q_at_max)

    def support_objective(a: tuple, b: tuple) -> dict:
        # minimize (q1 - q2) * mean + (lam2 - lam1) * q: constant along the
        # chord a-b, smaller strictly below it.
        ca = a[1] - b[1]
        cb = b[0] - a[0]
        coeffs: dict = {}
        for j, c in sk.mean_coeffs.items():
            coeffs[j] = ca * c
        for j, c in sk.sm_coeffs.items():
            coeffs[j] = coeffs.get(j, ZERO) + cb * c
        return coeffs

    def between(a: tuple, b: tuple) -> list:
        coeffs = support_objective(a, b)
        sol = sk.run(objective=coeffs)
        f_star = sol.value
        f_chord = (a[1] - b[1]) * a[0] + (b[0] - a[0]) * a[1]
        if f_star == f_chord:
            return []
        # Lexicographic stage: leftmost point of the optimal face is a vertex.
        lam_sol = sk.run(objective=sk.mean_coeffs, extra_rows=[(coeffs, f_star)])
        lam_c = lam_sol.value
        q_c = (f_star - (a[1] - b[1]) * lam_c) / (b[0] - a[0])
        c = (lam_c, q_c)
        return between(a, c) + [c] + between(c, b)

    return [left] + between(left, right) + [right]


def lower_hull_min_q(hull: list, lo: Rat, hi: Rat) -> Rat | None:
    """min q over the lower hull with mean in [lo, hi]; None if out of range.

    The hull is convex piecewise linear, so the minimum over an interval is
    attained at an interval endpoint or an interior hull vertex.
    """
    lam_min = hull[0][0]
    lam_max = hull[-1][0]
    if hi < lam_min or lo > lam_max:
        return None
    lo = max(lo, lam_min)
    hi = min(hi, lam_max)
    best = None
    for lam in (lo, hi):
        q = _hull_at(hull, lam)
        if best is None or q < best:
            best = q
    for lam, q in hull:
        if lo <= lam <= hi and q < best:
            best = q
    return best


def _hull_at(hull: list, lam: Rat) -> Rat:
    if lam == hull[0][0]:
        return hull[0][1]
    for (l1, q1), (l2, q2) in zip(hull, hull[1:]):
        if l1 <= lam <= l2:
            return q1 + (q2 - q1) * (lam - l1) / (l2 - l1)
    raise ValueError("mean outside hull range")
