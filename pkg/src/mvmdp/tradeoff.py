"""Grid approximation of the mean-variance tradeoff curve.

The exact curve v*(lam) = min{Var(W_T) : E[W_T] >= lam} is expensive to
tabulate directly, so this module builds a step-function approximation on a
uniform grid over [-KT, KT] (K the largest absolute reward, T the horizon).
Each grid cell records the cheapest achievable second moment over the means
it covers; subtracting a dominating endpoint square turns that into a
per-cell variance estimate that never exceeds the true curve, and suffix
minima assemble the estimates into the step function v-hat.

For a grid step delta, the curve satisfies, for every lam:

    v*(lam - delta) - 3*delta*K*T  <=  v-hat(lam)  <=  v*(lam)

The requested tolerances (epsilon, nu) are honored by choosing
delta = min(epsilon / (3KT), nu, KT).

The mirror curve lambda-hat(v) (largest mean reachable with variance at most
v) is built from the same grid with the opposite rounding, so every reported
mean is genuinely reachable at the queried variance budget.

MDPs with non-integer rational rewards are handled by flooring rewards to
multiples of a small step, rescaling to integers, and running the integer
machinery; `general_reward_v_hat` wires the pipeline together.
"""

from __future__ import annotations

import csv
from bisect import bisect_left
from dataclasses import dataclass

from .frequency import lower_hull_min_q, terminal_lower_hull
from .model import DEFAULT_NODE_CAP, Mdp
from .rationals import Rat, ZERO, floor_multiple, rat, rat_str


@dataclass(frozen=True)
class TradeoffCurve:
    """Step-function estimate of the minimum variance at a mean floor.

    grid holds lam_1 < ... < lam_n with lam_1 = -KT and lam_{n-1} <= KT <
    lam_n; cell i covers [grid[i], grid[i+1]].  qhat[i] is the cheapest
    second moment over means in cell i (None when no mean in the cell is
    achievable), uhat[i] subtracts the dominating endpoint square, and
    cell_values[i] is the suffix minimum of uhat from cell i on (None for
    plus infinity).  epsilon is the certified value slack 3*delta*KT.
    """

    mean_bound: Rat
    delta: Rat
    epsilon: Rat
    grid: tuple
    qhat: tuple
    uhat: tuple
    cell_values: tuple

    def value(self, lam) -> Rat | None:
        """v-hat(lam); None means plus infinity (no certified mean >= lam).

        Queries below the grid return the first cell's value (the exact
        curve is constant left of -KT); queries past the last grid point
        return None.  A query on a shared cell endpoint is answered by the
        cell lying to its left.
        """
        lam = rat(lam)
        if not self.cell_values:
            # Degenerate all-rewards-zero curve: the only achievable
            # moment pair is (0, 0).
            return ZERO if lam <= self.mean_bound else None
        if lam > self.grid[-1]:
            return None
        cell = max(bisect_left(self.grid, lam) - 1, 0)
        return self.cell_values[cell]


@dataclass(frozen=True)
class MeanCurve:
    """Step-function estimate of the largest mean at a variance cap.

    cell_caps[i] is a certified reachable variance for some mean in cell i
    (None when the cell holds no achievable mean); suffix_caps[i] is the
    minimum cap over cells i and later.  A query reports the left endpoint
    of the rightmost cell whose suffix cap fits the budget, which keeps
    every answer genuinely reachable: lambda-hat(v) <= lambda*(v), and
    lambda-hat(v) >= lambda*(v - epsilon) - delta with epsilon = 3*delta*KT.
    """

    mean_bound: Rat
    delta: Rat
    epsilon: Rat
    grid: tuple
    cell_caps: tuple
    suffix_caps: tuple

    def mean_for(self, v) -> Rat | None:
        """lambda-hat(v); None means no mean is certified (minus infinity)."""
        v = rat(v)
        if v < 0:
            return None
        if not self.suffix_caps:
            # Degenerate all-rewards-zero curve: mean 0 at variance 0.
            return ZERO
        best = None
        for lam, cap in zip(self.grid, self.suffix_caps):
            if cap is not None and cap <= v:
                best = lam
        return best


def _positive_tolerances(epsilon, nu) -> tuple:
    eps = rat(epsilon)
    slack = rat(nu)
    if eps <= 0 or slack <= 0:
        raise ValueError("epsilon and nu must be positive")
    return eps, slack


def _grid_cells(mdp: Mdp, eps: Rat, slack: Rat, max_nodes: int, hull):
    """Shared grid layout: step, grid points, and per-cell cheapest q."""
    bound = mdp.mean_bound
    # The step keeps both tolerances honored: 3*step*bound bounds the value
    # slack and step itself bounds the argument shift.  Capping at bound
    # keeps the squared-endpoint gap of every cell within 3*step*bound.
    step = min(eps / (3 * bound), slack, bound)
    grid = [-bound]
    while grid[-1] <= bound:
        grid.append(grid[-1] + step)
    if hull is None:
        hull = terminal_lower_hull(mdp, max_nodes=max_nodes)
    qhat = [lower_hull_min_q(hull, lo, hi) for lo, hi in zip(grid, grid[1:])]
    return bound, step, tuple(grid), tuple(qhat)


def _suffix_minima(values) -> tuple:
    out = [None] * len(values)
    best = None
    for i in reversed(range(len(values))):
        v = values[i]
        if v is not None and (best is None or v < best):
            best = v
        out[i] = best
    return tuple(out)


def approximate_v_star(
    mdp: Mdp,
    epsilon,
    nu,
    max_nodes: int = DEFAULT_NODE_CAP,
    hull=None,
) -> TradeoffCurve:
    """Tabulate an underestimate of v*(lam) on a uniform mean grid.

    Requires integer rewards (use general_reward_v_hat otherwise) and
    positive tolerances.  The result satisfies, at every lam,

        v*(lam - nu) - epsilon <= v-hat(lam) <= v*(lam)

    with both curves read as plus infinity past the largest achievable
    mean.  hull may carry a precomputed terminal lower hull for reuse.
    """
    eps, slack = _positive_tolerances(epsilon, nu)
    if not mdp.integer_rewards():
        raise ValueError(
            "approximate_v_star requires integer rewards; "
            "use general_reward_v_hat for general rational rewards"
        )
    if mdp.mean_bound == ZERO:
        return TradeoffCurve(ZERO, slack, ZERO, (ZERO,), (), (), ())
    bound, step, grid, qhat = _grid_cells(mdp, eps, slack, max_nodes, hull)
    uhat = []
    for i, q in enumerate(qhat):
        if q is None:
            uhat.append(None)
            continue
        lo, hi = grid[i], grid[i + 1]
        # Subtract the larger endpoint square: every mean in the cell has
        # its square between the endpoint squares, so the cell estimate
        # stays at or below the true minimum variance over the cell (cells
        # left of zero carry the larger square at their left endpoint).
        uhat.append(q - max(lo * lo, hi * hi))
    uhat = tuple(uhat)
    return TradeoffCurve(
        mean_bound=bound,
        delta=step,
        epsilon=3 * step * bound,
        grid=grid,
        qhat=qhat,
        uhat=uhat,
        cell_values=_suffix_minima(uhat),
    )


def approximate_lambda_star(
    mdp: Mdp,
    epsilon,
    nu,
    max_nodes: int = DEFAULT_NODE_CAP,
    hull=None,
) -> MeanCurve:
    """Tabulate a reachable underestimate of lambda*(v) on the same grid.

    Requires integer rewards and positive tolerances.  Each cell cap
    certifies that some mean in the cell reaches variance at most the cap,
    so every reported mean is reachable within the queried budget:

        lambda*(v - epsilon) - delta <= lambda-hat(v) <= lambda*(v)

    where epsilon = 3*delta*KT is stored on the curve and lambda* of a
    negative argument reads as minus infinity.
    """
    eps, slack = _positive_tolerances(epsilon, nu)
    if not mdp.integer_rewards():
        raise ValueError(
            "approximate_lambda_star requires integer rewards; "
            "discretize first for general rational rewards"
        )
    if mdp.mean_bound == ZERO:
        return MeanCurve(ZERO, slack, ZERO, (ZERO,), (), ())
    bound, step, grid, qhat = _grid_cells(mdp, eps, slack, max_nodes, hull)
    caps = []
    for i, q in enumerate(qhat):
        if q is None:
            caps.append(None)
            continue
        lo, hi = grid[i], grid[i + 1]
        # Subtract the smaller endpoint square: the cell's cheapest second
        # moment q is attained at some mean m in the cell with m*m at least
        # the smaller square, so q - min(...) is a variance that m really
        # achieves at most.  Reporting the cell's left endpoint therefore
        # never overstates the reachable mean.
        caps.append(q - min(lo * lo, hi * hi))
    caps = tuple(caps)
    return MeanCurve(
        mean_bound=bound,
        delta=step,
        epsilon=3 * step * bound,
        grid=grid,
        cell_caps=caps,
        suffix_caps=_suffix_minima(caps),
    )


def discretize_rewards(mdp: Mdp, delta) -> Mdp:
    """Floor every reward to a multiple of delta and merge equal values.

    Transition kernels are unchanged; each reward pmf keeps its total mass.
    """
    step = rat(delta)
    if step <= 0:
        raise ValueError("delta must be positive")
    rewards = {}
    for key, pmf in mdp.rewards.items():
        merged: dict = {}
        for value, prob in pmf.items():
            snapped = floor_multiple(value, step)
            merged[snapped] = merged.get(snapped, ZERO) + prob
        rewards[key] = merged
    return Mdp(
        horizon=mdp.horizon,
        states=mdp.states,
        initial_state=mdp.initial_state,
        actions=mdp.actions,
        transitions=mdp.transitions,
        rewards=rewards,
    )


def _scale_rewards(mdp: Mdp, factor: Rat) -> Mdp:
    rewards = {
        key: {value * factor: prob for value, prob in pmf.items()}
        for key, pmf in mdp.rewards.items()
    }
    return Mdp(
        horizon=mdp.horizon,
        states=mdp.states,
        initial_state=mdp.initial_state,
        actions=mdp.actions,
        transitions=mdp.transitions,
        rewards=rewards,
    )


def _unscale_curve(curve: TradeoffCurve, step: Rat) -> TradeoffCurve:
    """Map a curve built on rewards scaled by 1/step back to original units.

    Means scale by step, second moments and variances by step squared.
    """
    sq = step * step

    def var(v):
        return None if v is None else v * sq

    return TradeoffCurve(
        mean_bound=curve.mean_bound * step,
        delta=curve.delta * step,
        epsilon=curve.epsilon * sq,
        grid=tuple(lam * step for lam in curve.grid),
        qhat=tuple(var(q) for q in curve.qhat),
        uhat=tuple(var(u) for u in curve.uhat),
        cell_values=tuple(var(v) for v in curve.cell_values),
    )


def general_reward_v_hat(
    mdp: Mdp,
    epsilon,
    nu,
    max_nodes: int = DEFAULT_NODE_CAP,
) -> TradeoffCurve:
    """Approximate v* for an MDP with arbitrary rational rewards.

    Integer-reward inputs short-circuit to approximate_v_star at the halved
    internal tolerances.  Otherwise rewards are floored to multiples of a
    step small enough that half of each tolerance covers the flooring error
    (variance moves by at most 2KT^2 * step under flooring, means by at
    most T * step), the floored rewards are rescaled to integers, and the
    integer machinery runs at the remaining half tolerances.  The returned
    curve is in original units and satisfies, for every lam,

        v*(lam - nu) - epsilon <= v-hat(lam) <= v*(lam + nu) + epsilon

    against the exact curve of the original MDP.
    """
    eps, slack = _positive_tolerances(epsilon, nu)
    if mdp.integer_rewards():
        return approximate_v_star(mdp, eps / 2, slack / 2, max_nodes=max_nodes)
    reward_cap = mdp.reward_bound
    horizon = mdp.horizon
    step = min(
        eps / (4 * reward_cap * horizon * horizon),
        slack / (2 * horizon),
    )
    scaled = _scale_rewards(discretize_rewards(mdp, step), 1 / step)
    inner = approximate_v_star(
        scaled,
        (eps / 2) / (step * step),
        (slack / 2) / step,
        max_nodes=max_nodes,
    )
    return _unscale_curve(inner, step)


CSV_COLUMNS = (
    "lambda_lo",
    "lambda_hi",
    "qhat",
    "uhat",
    "vhat",
    "lambda_lo_float",
    "lambda_hi_float",
    "qhat_float",
    "uhat_float",
    "vhat_float",
)


def _csv_pair(value) -> tuple:
    if value is None:
        return "inf", "inf"
    return rat_str(value), repr(float(value))


def curve_rows(curve: TradeoffCurve) -> list:
    """One dict per grid cell with exact p/q strings and float renderings."""
    rows = []
    for i in range(len(curve.grid) - 1):
        lo_s, lo_f = _csv_pair(curve.grid[i])
        hi_s, hi_f = _csv_pair(curve.grid[i + 1])
        q_s, q_f = _csv_pair(curve.qhat[i])
        u_s, u_f = _csv_pair(curve.uhat[i])
        v_s, v_f = _csv_pair(curve.cell_values[i])
        rows.append(
            {
                "lambda_lo": lo_s,
                "lambda_hi": hi_s,
                "qhat": q_s,
                "uhat": u_s,
                "vhat": v_s,
                "lambda_lo_float": lo_f,
                "lambda_hi_float": hi_f,
                "qhat_float": q_f,
                "uhat_float": u_f,
                "vhat_float": v_f,
            }
        )
    return rows


def write_curve_csv(curve: TradeoffCurve, stream) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    writer.writerows(curve_rows(curve))
