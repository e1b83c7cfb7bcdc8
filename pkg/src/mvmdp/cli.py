"""Command-line front end.

Every numeric answer is printed both ways: an exact "p/q" string and a float
rendering of the same value. Decision subcommands (feasible-pair,
feasible-mean-var, oracle, zero-variance) use the exit code as the answer:
0 = yes / feasible, 1 = no / infeasible, 2 = bad input. Tolerance flags on
`frontier` accept floats with a warning; everywhere else numeric flags must
be exact rationals like 3, -2, or 7/4.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import re
import sys

from .errors import (
    AugmentationLimitError,
    EnumerationLimitError,
    InputFormatError,
)
from .frequency import (
    exact_pair_feasible,
    frequencies_to_policy,
    mean_fixed_var_bounded,
)
from .games import (
    DEFAULT_POLICY_CAP,
    class_separation_report,
    gen_3sat,
    gen_subset_sum,
    zero_variance_values,
)
from .model import (
    DEFAULT_NODE_CAP,
    Mdp,
    POLICY_CLASSES,
    PolicySpec,
    augment,
    validate,
)
from .rationals import Rat, rat_str, rationalize_float
from .serialize import dumps, loads
from .setdp import compute_pmq, exact_frontier, max_variance, min_variance
from .tradeoff import (
    approximate_v_star,
    curve_rows,
    general_reward_v_hat,
    discretize_rewards,
    write_curve_csv,
)

OK = 0
NO = 1
BAD = 2

_RATIONAL = re.compile(r"[+-]?\d+(?:/\d+)?\Z")

FORMATS = """\
formats:
  MDP JSON (input to every subcommand reading an instance; output of gen
  and discretize). Rationals are [numerator, denominator] pairs:
    {"horizon": 2, "states": ["s0", "end"], "initial_state": "s0",
     "actions": {"s0": ["a", "b"], "end": ["stay"]},
     "transitions": [{"t": 0, "s": "s0", "a": "a", "rows": {"end": [1, 1]}}, ...],
     "rewards": [{"t": 0, "s": "s0", "a": "b",
                  "pmf": [[[0, 1], [1, 2]], [[2, 1], [1, 2]]]}, ...]}
  An entry without "t" is stationary and applies at every step.

  frontier CSV (approximate mode): columns lambda_lo, lambda_hi, qhat,
  uhat, vhat plus *_float twins; one row per grid cell; "inf" marks an
  infeasible cell. vhat underestimates the exact frontier on the cell.

  frontier CSV (--exact): columns lambda, lambda_float, vstar, vstar_float;
  rows sample every boundary vertex and edge midpoint of the frontier.

  polygon JSON (inside min-variance / max-variance / frontier --exact
  --format json output): {"vertices": [{"mean": N, "second_moment": N,
  "variance": N}, ...]} where N = {"pq": "p/q", "float": x}; vertices walk
  the achievable (mean, second moment) polygon counterclockwise.

  policy JSON (witnesses): {"class": "TSW_U", "rules": [{"t": 0, "s": "s0",
  "w": N, "choose": {"a": N, ...}}, ...]}; deterministic classes carry
  "action" instead of "choose"; reward-blind classes omit "w".
"""


class _UsageError(Exception):
    pass


def _parse_exact(text: str, flag: str) -> Rat:
    """p/q only; floats are an error here so answers stay exact."""
    if not _RATIONAL.match(text):
        raise _UsageError(
            f"{flag} needs an exact rational like 3, -2, or 7/4, got {text!r}"
        )
    num, _, den = text.partition("/")
    if den:
        if int(den) == 0:
            raise _UsageError(f"{flag} has denominator zero: {text!r}")
        return Rat(int(num), int(den))
    return Rat(int(num))


def _parse_tolerance(text: str, flag: str) -> Rat:
    if _RATIONAL.match(text):
        return _parse_exact(text, flag)
    try:
        value = float(text)
    except ValueError:
        raise _UsageError(f"{flag} is not a number: {text!r}") from None
    approx = rationalize_float(value)
    print(
        f"warning: {flag}={text} is a float; using nearby rational "
        f"{rat_str(approx)}",
        file=sys.stderr,
    )
    return approx


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from None


def _load_mdp(args) -> Mdp:
    return loads(_read_text(args.input), strict=True)


def _emit(text: str, args) -> None:
    output = getattr(args, "output", None)
    if output in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
            if not text.endswith("\n"):
                handle.write("\n")
    except OSError as exc:
        raise _UsageError(f"cannot write {output}: {exc}") from None


def _emit_json(payload, args) -> None:
    _emit(json.dumps(payload, indent=2), args)


def _num(value) -> dict:
    return {"pq": rat_str(value), "float": float(Rat(value))}


def _policy_json(policy: PolicySpec) -> dict:
    rules = []
    for key in sorted(policy.rule):
        entry = {"t": key[0], "s": key[1]}
        if len(key) == 3:
            entry["w"] = _num(key[2])
        choice = policy.rule[key]
        if policy.randomized:
            entry["choose"] = {a: _num(p) for a, p in sorted(choice.items())}
        else:
            entry["action"] = choice
        rules.append(entry)
    return {"class": policy.policy_class, "rules": rules}


def _polygon_json(polygon) -> dict:
    return {
        "vertices": [
            {
                "mean": _num(m),
                "second_moment": _num(q),
                "variance": _num(q - m * m),
            }
            for m, q in polygon.vertices
        ]
    }


def _witness_policy(mdp: Mdp, mean, variance, max_nodes: int):
    ok, z = exact_pair_feasible(mdp, mean, variance, max_nodes=max_nodes)
    if not ok:
        return None
    return _policy_json(frequencies_to_policy(mdp, z))


def _cmd_validate(args) -> int:
    mdp = loads(_read_text(args.input), strict=False)
    problems = validate(mdp)
    if problems:
        _emit_json(
            {"valid": False, "violations": [str(p) for p in problems]}, args
        )
        print(
            f"error: invalid mdp: {len(problems)} violation(s)",
            file=sys.stderr,
        )
        return BAD
    _emit_json(
        {
            "valid": True,
            "horizon": mdp.horizon,
            "states": len(mdp.states),
            "integer_rewards": mdp.integer_rewards(),
            "reward_bound": _num(mdp.reward_bound),
            "mean_bound": _num(mdp.mean_bound),
        },
        args,
    )
    return OK


def _cmd_augment_stats(args) -> int:
    mdp = _load_mdp(args)
    aug = augment(mdp, max_nodes=args.max_nodes)
    layers = [len(layer) for layer in aug.layers]
    if args.format == "csv":
        lines = ["t,nodes"]
        lines.extend(f"{t},{n}" for t, n in enumerate(layers))
        _emit("\n".join(lines), args)
        return OK
    _emit_json(
        {
            "node_count": aug.node_count,
            "layer_sizes": layers,
            "integer_rewards": aug.integer_rewards,
            "reward_bound": _num(mdp.reward_bound),
            "mean_bound": _num(mdp.mean_bound),
        },
        args,
    )
    return OK


def _cmd_feasible_pair(args) -> int:
    mdp = _load_mdp(args)
    mean = _parse_exact(args.lam, "--lambda")
    variance = _parse_exact(args.v, "--v")
    ok, z = exact_pair_feasible(mdp, mean, variance, max_nodes=args.max_nodes)
    payload = {
        "feasible": ok,
        "mean": _num(mean),
        "variance": _num(variance),
    }
    if not ok:
        _emit_json(payload, args)
        return NO
    payload["policy"] = _policy_json(frequencies_to_policy(mdp, z))
    _emit_json(payload, args)
    return OK


def _cmd_feasible_mean_var(args) -> int:
    mdp = _load_mdp(args)
    mean = _parse_exact(args.lam, "--lambda")
    cap = _parse_exact(args.v, "--v")
    ok, z = mean_fixed_var_bounded(mdp, mean, cap, max_nodes=args.max_nodes)
    payload = {
        "feasible": ok,
        "mean": _num(mean),
        "variance_cap": _num(cap),
    }
    if not ok:
        _emit_json(payload, args)
        return NO
    second = z.terminal_second_moment(mdp.horizon)
    payload["achieved_variance"] = _num(second - mean * mean)
    payload["policy"] = _policy_json(frequencies_to_policy(mdp, z))
    _emit_json(payload, args)
    return OK


def _exact_frontier_rows(frontier) -> list:
    points = {frontier.lam_min, frontier.lam_max}
    for lo, hi, _, _, _ in frontier.pieces:
        points.update((lo, hi, (lo + hi) / 2))
    return [(lam, frontier.value(lam)) for lam in sorted(points)]


def _cmd_frontier(args) -> int:
    mdp = _load_mdp(args)
    if args.exact:
        if args.epsilon is not None or args.nu is not None:
            raise _UsageError("--epsilon/--nu apply to the approximate mode only")
        prune = (
            None
            if args.prune_eps is None
            else _parse_exact(args.prune_eps, "--prune-eps")
        )
        polygon = compute_pmq(mdp, prune_eps=prune, max_nodes=args.max_nodes)
        frontier = exact_frontier(polygon)
        rows = _exact_frontier_rows(frontier)
        if args.format == "json":
            _emit_json(
                {
                    "pruned": prune is not None,
                    "polygon": _polygon_json(polygon),
                    "samples": [
                        {"lambda": _num(lam), "vstar": _num(v)}
                        for lam, v in rows
                    ],
                },
                args,
            )
            return OK
        lines = ["lambda,lambda_float,vstar,vstar_float"]
        lines.extend(
            f"{rat_str(lam)},{float(lam)!r},{rat_str(v)},{float(v)!r}"
            for lam, v in rows
        )
        _emit("\n".join(lines), args)
        return OK
    if args.prune_eps is not None:
        raise _UsageError("--prune-eps applies to --exact only")
    if args.epsilon is None or args.nu is None:
        raise _UsageError("the approximate mode needs --epsilon and --nu")
    eps = _parse_tolerance(args.epsilon, "--epsilon")
    slack = _parse_tolerance(args.nu, "--nu")
    if mdp.integer_rewards():
        curve = approximate_v_star(mdp, eps, slack, max_nodes=args.max_nodes)
    else:
        curve = general_reward_v_hat(mdp, eps, slack, max_nodes=args.max_nodes)
    if args.format == "json":
        _emit_json(
            {
                "mean_bound": _num(curve.mean_bound),
                "delta": _num(curve.delta),
                "epsilon": _num(curve.epsilon),
                "rows": curve_rows(curve),
            },
            args,
        )
        return OK
    buffer = io.StringIO()
    write_curve_csv(curve, buffer)
    _emit(buffer.getvalue(), args)
    return OK


def _cmd_zero_variance(args) -> int:
    mdp = _load_mdp(args)
    result = zero_variance_values(mdp, max_nodes=args.max_nodes)
    values = sorted(result.achievable_values)
    _emit_json(
        {
            "values": [_num(k) for k in values],
            "policies": [
                {
                    "value": _num(k),
                    "policy": _policy_json(result.winning_policy[k]),
                }
                for k in values
            ],
        },
        args,
    )
    return OK if values else NO


def _variance_extreme(args, pick) -> int:
    mdp = _load_mdp(args)
    prune = (
        None
        if args.prune_eps is None
        else _parse_exact(args.prune_eps, "--prune-eps")
    )
    polygon = compute_pmq(mdp, prune_eps=prune, max_nodes=args.max_nodes)
    value, (m, q) = pick(polygon)
    payload = {
        "variance": _num(value),
        "witness_mean": _num(m),
        "witness_second_moment": _num(q),
        "pruned": prune is not None,
        "polygon": _polygon_json(polygon),
    }
    if prune is None:
        payload["policy"] = _witness_policy(mdp, m, value, args.max_nodes)
    _emit_json(payload, args)
    return OK


def _cmd_min_variance(args) -> int:
    return _variance_extreme(args, min_variance)


def _cmd_max_variance(args) -> int:
    return _variance_extreme(args, max_variance)


def _class_entry_json(entry) -> dict:
    return {
        "feasible": entry.feasible,
        "detail": entry.detail,
        "policy": None if entry.witness is None else _policy_json(entry.witness),
    }


def _cmd_oracle(args) -> int:
    mdp = _load_mdp(args)
    lam = _parse_exact(args.lam, "--lambda")
    cap = _parse_exact(args.v, "--v")
    report = class_separation_report(
        mdp,
        lam,
        cap,
        grid_resolution=args.grid_resolution,
        max_policies=args.max_policies,
        max_combinations=args.max_policies,
        max_nodes=args.max_nodes,
    )
    entry = report[args.policy_class]
    payload = {
        "class": args.policy_class,
        "mean_floor": _num(lam),
        "variance_cap": _num(cap),
    }
    payload.update(_class_entry_json(entry))
    _emit_json(payload, args)
    return OK if entry.feasible else NO


def _cmd_separation(args) -> int:
    mdp = _load_mdp(args)
    lam = _parse_exact(args.lam, "--lambda")
    cap = _parse_exact(args.v, "--v")
    report = class_separation_report(
        mdp,
        lam,
        cap,
        grid_resolution=args.grid_resolution,
        max_policies=args.max_policies,
        max_combinations=args.max_policies,
        max_nodes=args.max_nodes,
    )
    _emit_json(
        {
            "mean_floor": _num(lam),
            "variance_cap": _num(cap),
            "classes": {
                tag: _class_entry_json(report[tag]) for tag in POLICY_CLASSES
            },
        },
        args,
    )
    return OK


def _cmd_gen_subset_sum(args) -> int:
    _emit(dumps(gen_subset_sum(args.values)), args)
    return OK


def _cmd_gen_3sat(args) -> int:
    clauses = []
    for token in args.clauses:
        for piece in token.split(";"):
            if not piece:
                continue
            try:
                clauses.append(tuple(int(part) for part in piece.split(",")))
            except ValueError:
                raise _UsageError(
                    f"clause {piece!r} is not comma-separated integers"
                ) from None
    _emit(dumps(gen_3sat(clauses)), args)
    return OK


def _cmd_discretize(args) -> int:
    mdp = _load_mdp(args)
    step = _parse_exact(args.delta, "--delta")
    _emit(dumps(discretize_rewards(mdp, step)), args)
    return OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvmdp",
        description=(
            "Exact mean-variance analysis of finite-horizon MDPs: feasibility "
            "of (mean, variance) targets, frontier computation, zero-variance "
            "forcing, policy-class comparison, and instance generators."
        ),
        epilog=FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    reads = argparse.ArgumentParser(add_help=False)
    reads.add_argument("input", help="MDP JSON path, or - for stdin")
    writes = argparse.ArgumentParser(add_help=False)
    writes.add_argument("-o", "--output", help="write here instead of stdout")
    capped = argparse.ArgumentParser(add_help=False)
    capped.add_argument(
        "--max-nodes",
        type=int,
        default=DEFAULT_NODE_CAP,
        help="cap on augmented (state, reward) nodes (default %(default)s)",
    )

    p = sub.add_parser(
        "validate",
        parents=[reads, writes],
        help="check an MDP JSON file; exit 0 iff well formed and valid",
    )
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser(
        "augment-stats",
        parents=[reads, writes, capped],
        help="per-step counts of reachable (state, cumulative reward) nodes",
    )
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(handler=_cmd_augment_stats)

    p = sub.add_parser(
        "feasible-pair",
        parents=[reads, writes, capped],
        help="is (mean, variance) exactly achievable? exit 0 yes / 1 no",
    )
    p.add_argument("--lambda", dest="lam", metavar="P/Q", required=True,
                   help="target mean, exact rational")
    p.add_argument("--v", metavar="P/Q", required=True,
                   help="target variance, exact rational")
    p.set_defaults(handler=_cmd_feasible_pair)

    p = sub.add_parser(
        "feasible-mean-var",
        parents=[reads, writes, capped],
        help="mean exactly lambda with variance <= v? exit 0 yes / 1 no",
    )
    p.add_argument("--lambda", dest="lam", metavar="P/Q", required=True,
                   help="target mean, exact rational")
    p.add_argument("--v", metavar="P/Q", required=True,
                   help="variance cap, exact rational")
    p.set_defaults(handler=_cmd_feasible_mean_var)

    p = sub.add_parser(
        "frontier",
        parents=[reads, writes, capped],
        help="minimum variance as a function of the mean floor",
    )
    p.add_argument("--epsilon", metavar="P/Q",
                   help="value tolerance (approximate mode)")
    p.add_argument("--nu", metavar="P/Q",
                   help="mean-axis tolerance (approximate mode)")
    p.add_argument("--exact", action="store_true",
                   help="exact boundary instead of the grid approximation")
    p.add_argument("--prune-eps", metavar="P/Q",
                   help="with --exact: prune budget for the boundary recursion")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(handler=_cmd_frontier)

    p = sub.add_parser(
        "zero-variance",
        parents=[reads, writes, capped],
        help="all surely-forcible terminal values; exit 1 if none",
    )
    p.set_defaults(handler=_cmd_zero_variance)

    p = sub.add_parser(
        "min-variance",
        parents=[reads, writes, capped],
        help="smallest achievable variance and a witness",
    )
    p.add_argument("--prune-eps", metavar="P/Q",
                   help="prune budget; omit for the exact answer")
    p.set_defaults(handler=_cmd_min_variance)

    p = sub.add_parser(
        "max-variance",
        parents=[reads, writes, capped],
        help="largest achievable variance and a witness",
    )
    p.add_argument("--prune-eps", metavar="P/Q",
                   help="prune budget; omit for the exact answer")
    p.set_defaults(handler=_cmd_max_variance)

    searchy = argparse.ArgumentParser(add_help=False)
    searchy.add_argument("--lambda", dest="lam", metavar="P/Q", required=True,
                         help="mean floor, exact rational")
    searchy.add_argument("--v", metavar="P/Q", required=True,
                         help="variance cap, exact rational")
    searchy.add_argument("--grid-resolution", type=int, default=16,
                         help="randomization grid levels (default %(default)s)")
    searchy.add_argument("--max-policies", type=int,
                         default=DEFAULT_POLICY_CAP,
                         help="enumeration cap (default %(default)s)")

    p = sub.add_parser(
        "oracle",
        parents=[reads, writes, capped, searchy],
        help="can one policy class reach mean >= lambda with variance <= v?",
    )
    p.add_argument("--class", dest="policy_class", required=True,
                   choices=POLICY_CLASSES)
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser(
        "separation",
        parents=[reads, writes, capped, searchy],
        help="the same question for all four policy classes at once",
    )
    p.set_defaults(handler=_cmd_separation)

    gen = sub.add_parser("gen", help="instance generators")
    gen_sub = gen.add_subparsers(dest="generator", required=True)
    p = gen_sub.add_parser(
        "subset-sum",
        parents=[writes],
        help="sign-choice chain whose zero-variance set tests a partition",
    )
    p.add_argument("--r", dest="values", metavar="N", type=int, nargs="+",
                   required=True, help="positive integer values")
    p.set_defaults(handler=_cmd_gen_subset_sum)
    p = gen_sub.add_parser(
        "3sat",
        parents=[writes],
        help="satisfiability instance over signed literals",
    )
    p.add_argument("--clauses", metavar="L,L,L[;L,L,L]", nargs="+",
                   required=True,
                   help="clauses as comma-separated signed integers; join "
                        "several with ';' so negative leads do not read as "
                        "flags, e.g. --clauses '1,-2,3;-1,2'")
    p.set_defaults(handler=_cmd_gen_3sat)

    p = sub.add_parser(
        "discretize",
        parents=[reads, writes],
        help="floor every reward to a multiple of delta",
    )
    p.add_argument("--delta", metavar="P/Q", required=True,
                   help="grid step, exact positive rational")
    p.set_defaults(handler=_cmd_discretize)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return OK if exc.code in (None, 0) else BAD
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD
    except InputFormatError as exc:
        print(f"error: bad mdp input: {exc}", file=sys.stderr)
        return BAD
    except AugmentationLimitError as exc:
        print(f"error: augmented-node cap exceeded: {exc}", file=sys.stderr)
        return BAD
    except EnumerationLimitError as exc:
        print(f"error: policy cap exceeded: {exc}", file=sys.stderr)
        return BAD
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD


def main() -> None:
    try:
        code = run()
    except BrokenPipeError:
        # Downstream closed early (e.g. piping into head); die quietly the
        # way coreutils do, keeping the interpreter's exit flush off the
        # closed descriptor.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 1
    raise SystemExit(code)


if __name__ == "__main__":
    main()
