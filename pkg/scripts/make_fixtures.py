"""Write the example channel and input files used in the README and tests."""

import argparse
import itertools
from pathlib import Path

import numpy as np

from rcc.channel import AuxInput, validate_channel
from rcc.io import channel_to_obj, dumps, input_to_obj, write_text


def uniform_channel(nx=2, ns=2, ny=2, nz=2):
    return validate_channel(np.full((nx, ns, ny, nz), 1.0 / (ny * nz)))


def flip_channel(p=0.25, ns=1):
    g = np.zeros((2, ns, 2, 2))
    for x, s, z in itertools.product(range(2), range(ns), range(2)):
        g[x, s, x, z] = 1 - p if z == x else p
    return validate_channel(g)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="fixtures")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "uniform.json": channel_to_obj(uniform_channel()),
        "flip025.json": channel_to_obj(flip_channel(0.25, ns=1)),
        "flip025_input.json": input_to_obj(AuxInput(np.full((1, 1, 2), 0.5))),
        "sim_channel.json": channel_to_obj(flip_channel(0.25, ns=2)),
        "sim_input.json": input_to_obj(AuxInput(np.full((1, 2, 2), 0.25))),
    }
    for name, obj in files.items():
        write_text(out / name, dumps(obj))
        print(out / name)


if __name__ == "__main__":
    main()
