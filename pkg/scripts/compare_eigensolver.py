"""Cross-check the Aberth solver against companion-matrix eigenvalues.

For each degree, reports the worst matched-root distance and the worst
normalized residual of each method on random sign polynomials.
"""

import argparse
import time

import numpy as np

from unitclust.poly import make_polynomial
from unitclust.rootfind import _residuals, find_roots


def matched_distance(a, b):
    b = list(b)
    worst = 0.0
    for z in a:
        j = int(np.argmin(np.abs(np.asarray(b) - z)))
        worst = max(worst, abs(b.pop(j) - z))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degrees", type=int, nargs="+", default=[16, 64, 256, 512])
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"{'N':>5} {'dist':>9} {'res_aberth':>11} {'res_eig':>9} {'t_aberth':>9} {'t_eig':>7}")
    for n in args.degrees:
        dist = ra = re = ta = te = 0.0
        for _ in range(args.trials):
            c = rng.choice([-1.0, 1.0], n + 1)
            p = make_polynomial(c)
            t = time.perf_counter()
            rs = find_roots(p)
            ta += time.perf_counter() - t
            t = time.perf_counter()
            eig = np.roots(c[::-1])
            te += time.perf_counter() - t
            dist = max(dist, matched_distance(rs.roots, eig))
            ra = max(ra, float(rs.residuals.max()))
            re = max(re, float(_residuals(p.coeffs, eig).max()))
        print(f"{n:5d} {dist:9.1e} {ra:11.1e} {re:9.1e} {ta / args.trials:9.4f} {te / args.trials:7.4f}")


if __name__ == "__main__":
    main()
