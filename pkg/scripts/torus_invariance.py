"""Full torsion of flux-twisted torus models along random metric paths.

Prints the torsion coordinate at both ends of each path, its largest
relative deviation along the path, and the finite-difference rate of the
full and low-lying parts at the midpoint.

    python scripts/torus_invariance.py --m 3 5 --paths 5
"""
import argparse

import numpy as np

from cmtorsion.deform import fd_rates, top_cut, torus_metric_family
from cmtorsion.torsion import torsion_truncated

FLUXES = {3: ["123:2.0", "123:1.0+0.7i"], 4: ["123:1.0", "124:1.0,234:0.5"],
          5: ["123:1.0", "145:1.0,235:0.5", "12345:1.0,123:0.3"], 6: ["123:1.0,456:0.5"]}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[3, 5])
    ap.add_argument("--paths", type=int, default=5)
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--length", type=float, default=0.5)
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print(f"{'m':>2} {'flux':<20} {'path':>4} {'tau(0)':>28} {'max rel dev':>11} {'full rate':>10} {'low rate':>10}")
    grid = np.linspace(0.0, args.length, args.points)
    for m in args.m:
        rng = np.random.default_rng([args.seed, m])
        for flux in FLUXES.get(m, ["123:1.0"]):
            for i in range(args.paths):
                x, y = rng.standard_normal((m, m)), rng.standard_normal((m, m))
                g0 = x @ x.T / m + np.eye(m)
                gdot = 0.2 * (y + y.T)
                f = torus_metric_family(m, flux, g0, gdot)
                taus = []
                for u in grid:
                    c = f.at(u)
                    taus.append(torsion_truncated(c, top_cut(c), f.reference_bases(u)).coord)
                dev = max(abs(z - taus[0]) for z in taus) / abs(taus[0])
                r = fd_rates(f, 0.5 * args.length, args.eps)
                z = taus[0]
                print(f"{m:>2} {flux:<20} {i:>4} {z.real:>13.6e}{z.imag:+.6e}i {dev:>11.2e} "
                      f"{abs(r.full):>10.2e} {abs(r.low):>10.2e}")


if __name__ == "__main__":
    main()
