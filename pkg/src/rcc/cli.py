"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 parse or validation error, 3 budget
exceeded, 4 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import re
import sys

from .channel import classify, make_joint
from .errors import BudgetExceeded, ValidationError
from .gaussian import (
    GaussianRegion,
    GaussianSpec,
    gaussian_boundary,
    gaussian_membership,
    gaussian_secrecy_capacity,
)
from .info import cond_mutual_information, entropy
from .io import dumps, gaussian_csv, input_to_obj, load_channel, load_input, trace_csv, write_text
from .regions import BoundId, RateTriple, INNER
from .search import (
    SearchConfig,
    boundary_trace,
    inner_membership,
    outer_violation,
    secrecy_capacity_bounds,
)
from .simulator import SimConfig, simulate

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_BUDGET, EXIT_SUITE = range(5)

_SET = r"\s*([UVSXYZ]+)\s*"
_MI = re.compile(rf"^\s*I\({_SET};{_SET}(?:\|{_SET})?\)\s*$")
_H = re.compile(rf"^\s*H\({_SET}(?:\|{_SET})?\)\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def evaluate_expression(joint, expr: str) -> float:
    """Value of ``I(A;B|C)`` or ``H(A|C)`` on ``joint``."""
    m = _MI.match(expr)
    if m:
        a, b, c = m.groups()
        return cond_mutual_information(joint, a, b, c or "")
    m = _H.match(expr)
    if m:
        a, c = m.groups()
        return entropy(joint, a, c or "")
    raise ValidationError(f"cannot parse expression {expr!r}; use I(A;B|C) or H(A|C)")


def _triple(text):
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"--point needs R0,R1,Re, got {text!r}") from None
    if len(parts) != 3:
        raise ValidationError(f"--point needs three comma-separated rates, got {text!r}")
    return RateTriple(*parts)


def _floats(d):
    return {k: float(v) for k, v in d.items()}


def _emit(text, out):
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------
# commands


def cmd_classify(args):
    report = classify(load_channel(args.channel), args.tol)
    sys.stdout.write(dumps(report.as_dict()))


def cmd_mi(args):
    ch = load_channel(args.channel)
    aux = load_input(args.input, ch)
    print(repr(evaluate_expression(make_joint(ch, aux), args.expr)))


def _search_cfg(args):
    return SearchConfig(restarts=args.restarts, grid=args.grid, seed=args.seed, time_budget=args.budget)


def cmd_region(args):
    bound = BoundId.parse(args.bound)
    ch = load_channel(args.channel)
    cfg = _search_cfg(args)
    if args.point is not None:
        t = _triple(args.point)
        search = inner_membership if bound in INNER else outer_violation
        res = search(bound, ch, t, cfg)
        out = {
            "bound": bound.value,
            "point": list(t.as_tuple()),
            "found": res.found,
            "best_slack": res.best_slack,
            "slacks": _floats(res.best_slacks),
            "evaluated": res.evaluated,
        }
        if res.note:
            out["note"] = res.note
        if args.witness_out and res.witness is not None:
            write_text(args.witness_out, dumps(input_to_obj(res.witness.aux)))
        sys.stdout.write(dumps(out))
        return
    points = boundary_trace(bound, ch, cfg, args.r0_grid)
    _emit(trace_csv(bound.value, points), args.out)


def cmd_gaussian(args):
    spec = GaussianSpec(args.P1, args.P2, args.N1, args.N2, args.rho)
    if args.capacity:
        cs = gaussian_secrecy_capacity(spec)
        sys.stdout.write(dumps({"lower": cs.lower, "upper": cs.upper,
                                "reversely_degraded": spec.reversely_degraded}))
        return
    if args.region is None:
        raise UsageError("gaussian: --region is required unless --capacity is given")
    region = GaussianRegion.parse(args.region)
    if args.point is not None:
        m = gaussian_membership(region, spec, _triple(args.point), args.resolution)
        sys.stdout.write(dumps({"region": region.value, "member": m.member, "theta": m.theta,
                                "eta": m.eta, "slack": float(m.slack), "slacks": _floats(m.slacks)}))
        return
    points = gaussian_boundary(region, spec, args.resolution, args.eta_resolution)
    _emit(gaussian_csv(points), args.out)


def cmd_secrecy(args):
    ch = load_channel(args.channel)
    b = secrecy_capacity_bounds(ch, args.mode, _search_cfg(args))
    sys.stdout.write(dumps({"mode": args.mode, "lower": b.lower, "upper": b.upper}))


def cmd_simulate(args):
    ch = load_channel(args.channel)
    aux = load_input(args.input, ch)
    common = dict(eps=args.eps, trials=args.trials, seed=args.seed, genie=args.genie)
    if args.rates is not None:
        try:
            R0, r, r1, r2 = (float(v) for v in args.rates.split(","))
        except ValueError:
            raise ValidationError("--rates needs R0,r,r1,r2") from None
        cfg = SimConfig(ch, aux, args.n, args.blocks, R0, r, r1, r2, **common)
    else:
        cfg = SimConfig.preset(ch, aux, args.n, args.blocks, **common)
    _emit(dumps(simulate(cfg).to_json()), args.out)


def cmd_check(args):
    from .checks import run_suite

    res = run_suite(args.suite)
    print(res.line())
    return EXIT_OK if res.passed else EXIT_SUITE


# ----------------------------------------------------------------------------
# parser


def build_parser():
    p = _Parser(prog="rcc", description="Relay channels with confidential messages.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="structural classification of a channel")
    c.add_argument("channel")
    c.add_argument("--tol", type=float, default=1e-9)
    c.set_defaults(fn=cmd_classify)

    c = sub.add_parser("mi", help="evaluate I(A;B|C) or H(A|C)")
    c.add_argument("channel")
    c.add_argument("input")
    c.add_argument("--expr", required=True)
    c.set_defaults(fn=cmd_mi)

    def search_flags(c):
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--restarts", type=int, default=32)
        c.add_argument("--grid", type=int, default=4)
        c.add_argument("--budget", type=float, default=None, help="time budget in seconds")

    c = sub.add_parser("region", help="boundary trace or point membership for a bound")
    c.add_argument("--bound", required=True, choices=[b.value for b in BoundId])
    c.add_argument("--channel", required=True)
    search_flags(c)
    c.add_argument("--r0-grid", type=int, default=11)
    c.add_argument("--out")
    c.add_argument("--point", help="R0,R1,Re: test one triple instead of tracing")
    c.add_argument("--witness-out", help="write the certifying input here")
    c.set_defaults(fn=cmd_region)

    c = sub.add_parser("gaussian", help="Gaussian regions and secrecy capacity")
    c.add_argument("--region", choices=[r.value for r in GaussianRegion])
    for name in ("P1", "P2", "N1", "N2"):
        c.add_argument(f"--{name}", type=float, required=True)
    c.add_argument("--rho", type=float, default=0.0)
    c.add_argument("--resolution", type=int, default=1001)
    c.add_argument("--eta-resolution", type=int, default=11)
    c.add_argument("--out")
    c.add_argument("--point")
    c.add_argument("--capacity", action="store_true")
    c.set_defaults(fn=cmd_gaussian)

    c = sub.add_parser("secrecy", help="searched secrecy-capacity bounds")
    c.add_argument("--channel", required=True)
    c.add_argument("--mode", choices=["det", "sto"], default="det")
    search_flags(c)
    c.set_defaults(fn=cmd_secrecy)

    c = sub.add_parser("simulate", help="block-Markov coding Monte Carlo")
    c.add_argument("--channel", required=True)
    c.add_argument("--input", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--blocks", type=int, default=4)
    c.add_argument("--trials", type=int, default=400)
    c.add_argument("--eps", type=float, default=0.05)
    c.add_argument("--seed", type=int, default=0)
    g = c.add_mutually_exclusive_group()
    g.add_argument("--preset-rates", action="store_true", help="default")
    g.add_argument("--rates", help="R0,r,r1,r2")
    c.add_argument("--genie", action="store_true", help="relay uses the true bin index")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_simulate)

    from .checks import SUITES

    c = sub.add_parser("check", help="run a named invariant suite")
    c.add_argument("--suite", required=True, choices=sorted(SUITES))
    c.set_defaults(fn=cmd_check)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        code = args.fn(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"rcc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceeded as exc:
        print(f"rcc: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK if code is None else code
