"""Centered finite differences of log tau against the variation coefficients.

For each seeded acyclic base this draws even generators and compares the
finite-difference rate with -str(alpha) (metric law), -str(beta) and
-str(2 beta) (flux law conjugating both d and d*), and -str(beta) for the
flux law that moves d alone. A second table halves eps to show the
stencil order on cuts inside the spectrum.

    python scripts/variation_check.py --count 10
"""
import argparse
import math

import numpy as np

from cmtorsion.bicomplex import valid_cuts
from cmtorsion.deform import flux_family, fd_rate, metric_family, predicted_rate
from cmtorsion.models import random_bicomplex


def even_gen(rng, n0, n1, size=0.3):
    g = np.zeros((n0 + n1, n0 + n1), complex)
    for lo, hi in ((0, n0), (n0, n0 + n1)):
        k = hi - lo
        g[lo:hi, lo:hi] = size * (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k)))
    return g


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    eps = args.eps

    print("whole acyclic complex, cut above the spectrum: |fd - rate|")
    print(f"{'seed':>5} {'n':>3} {'metric':>10} {'flux/-str b':>12} {'flux/-2str b':>13} {'d-only':>10}")
    for seed in range(args.seed, args.seed + args.count):
        n = 1 + seed % 5
        base = random_bicomplex((n, n), (0, 0), "well", seed)
        rng = np.random.default_rng(seed)
        alpha, beta = even_gen(rng, n, n), even_gen(rng, n, n)
        m = metric_family(base, alpha)
        f = flux_family(base, beta)
        g = flux_family(base, beta, sides="d")
        fd = fd_rate(f, 0.0, eps)
        row = [
            abs(fd_rate(m, 0.0, eps) - predicted_rate(m, 0.0)),
            abs(fd - predicted_rate(f, 0.0)),
            abs(fd - predicted_rate(f, 0.0, exact=True)),
            abs(fd_rate(g, 0.0, eps) - predicted_rate(g, 0.0)),
        ]
        print(f"{seed:>5} {n:>3} {row[0]:>10.2e} {row[1]:>12.2e} {row[2]:>13.2e} {row[3]:>10.2e}")

    print()
    print("non-acyclic complex, cut inside the spectrum (metric law)")
    print(f"{'seed':>5} {'lambda':>8} {'err(eps)':>10} {'err(eps/2)':>11} {'order':>6}")
    for seed in range(args.seed, args.seed + args.count):
        c = random_bicomplex((5, 4), (2, 1), "well", seed)
        cuts = valid_cuts(c, 5)
        lam = cuts[len(cuts) // 2]
        m = metric_family(c, even_gen(np.random.default_rng(seed + 7), 5, 4))
        pred = predicted_rate(m, 0.0, lam)
        e1, e2 = (abs(fd_rate(m, 0.0, e, lam) - pred) for e in (eps, eps / 2))
        order = math.log2(e1 / e2) if e2 > 0 else float("nan")
        print(f"{seed:>5} {lam:>8.3f} {e1:>10.2e} {e2:>11.2e} {order:>6.2f}")


if __name__ == "__main__":
    main()
