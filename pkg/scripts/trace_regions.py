"""Boundary traces of several bounds on one channel, stacked in one CSV."""

import argparse
import sys

from rcc.channel import classify
from rcc.io import TRACE_HEADER, csv_text, load_channel, write_text
from rcc.regions import BoundId
from rcc.search import SearchConfig, boundary_trace

DEFAULT = ["d-in-tilde", "d-out-tilde", "d-in", "d-out", "s-in-tilde", "s-out-tilde"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("channel")
    ap.add_argument("--bounds", nargs="+", default=DEFAULT)
    ap.add_argument("--r0-grid", type=int, default=11)
    ap.add_argument("--restarts", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    ch = load_channel(args.channel)
    cfg = SearchConfig(restarts=args.restarts, seed=args.seed)
    bounds = [BoundId.parse(b) for b in args.bounds]
    if classify(ch).class_nl and BoundId.D_OUT_HAT not in bounds:
        bounds.append(BoundId.D_OUT_HAT)
    rows = []
    for b in bounds:
        print(f"tracing {b.value}", file=sys.stderr)
        rows += [(b.value, p.R0, p.R1, p.Re, p.slack_min) for p in boundary_trace(b, ch, cfg, args.r0_grid)]
    text = csv_text(TRACE_HEADER, rows)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
