"""Corner points of every Gaussian region for one spec, plus the secrecy capacity."""

import argparse
import math
import sys

from rcc.gaussian import GaussianRegion, GaussianSpec, gaussian_boundary, gaussian_secrecy_capacity
from rcc.io import gaussian_csv, write_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--P1", type=float, default=1.0)
    ap.add_argument("--P2", type=float, default=1.0)
    ap.add_argument("--N1", type=float, default=1.0)
    ap.add_argument("--N2", type=float, default=2.0)
    ap.add_argument("--rho", type=float, default=math.sqrt(0.5))
    ap.add_argument("--resolution", type=int, default=101)
    ap.add_argument("--out")
    args = ap.parse_args()

    spec = GaussianSpec(args.P1, args.P2, args.N1, args.N2, args.rho)
    cs = gaussian_secrecy_capacity(spec)
    print(f"secrecy capacity in [{cs.lower:.9f}, {cs.upper:.9f}]"
          f" (reversely degraded: {spec.reversely_degraded})", file=sys.stderr)
    points = []
    for region in GaussianRegion:
        points += gaussian_boundary(region, spec, args.resolution)
    text = gaussian_csv(points)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
