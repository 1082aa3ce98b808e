"""Per-n simulator sweep on a channel/input pair, written as CSV.

    python3 scripts/sim_sweep.py fixtures/sim_channel.json fixtures/sim_input.json \
        --n 8 12 16 --trials 400 --out sweep.csv
"""

import argparse
import sys

import numpy as np

from rcc.io import csv_text, load_channel, load_input, write_text
from rcc.simulator import BLOCK_EVENTS, SimConfig, simulate

HEADER = ("n", *BLOCK_EVENTS, "lambda1", "lambda2", "equiv_lower", "equiv_block_mean", "equiv_target")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("channel")
    ap.add_argument("input")
    ap.add_argument("--n", type=int, nargs="+", default=[8, 12, 16])
    ap.add_argument("--blocks", type=int, default=4)
    ap.add_argument("--trials", type=int, default=400)
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--genie", action="store_true")
    ap.add_argument("--out")
    args = ap.parse_args()

    ch = load_channel(args.channel)
    aux = load_input(args.input, ch)
    rows = []
    for n in args.n:
        cfg = SimConfig.preset(ch, aux, n, args.blocks, eps=args.eps, trials=args.trials,
                               seed=args.seed, genie=args.genie)
        rep = simulate(cfg)
        # event rates are averaged over message blocks
        rows.append((n, *(float(np.mean(getattr(rep, k))) for k in BLOCK_EVENTS),
                     rep.lambda1, rep.lambda2, rep.equiv_lower, rep.equiv_block_mean, rep.equiv_target))
    text = csv_text(HEADER, rows)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
