"""Search a polynomial lattice rule by CBC and compare against random generating vectors.

Usage: python scripts/cbc_example.py [--m 10] [--s 4] [--lam 2] [--trials 100]
"""

from __future__ import annotations

import argparse

import numpy as np

from hoqmc.analysis import l2_discrepancy
from hoqmc.constructions import CbcConfig, LatticeConfig, cbc_search, criterion_V, default_modulus, plps_spec
from hoqmc.gf import Polynomial
from hoqmc.netcore import generate_points
from hoqmc.quality import t_value


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--b", type=int, default=2)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--s", type=int, default=4)
    ap.add_argument("--lam", type=float, default=2.0)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = default_modulus(args.b, args.m)
    lat = cbc_search(p, args.m, args.s, CbcConfig(args.lam))
    ps = generate_points(plps_spec(lat))
    print(f"modulus p = {p}")
    print("q =", ", ".join(str(q) for q in lat.q))
    print(f"V = {criterion_V(ps, args.lam):.6g}  L2 = {l2_discrepancy(ps):.6g}  t = {t_value(plps_spec(lat)).t}")

    rng = np.random.default_rng(args.seed)
    vals = []
    for _ in range(args.trials):
        q = tuple(Polynomial.from_code(int(c), args.b) for c in rng.integers(1, args.b**args.m, args.s))
        vals.append(criterion_V(generate_points(plps_spec(LatticeConfig(p, q))), args.lam))
    vals = np.array(vals)
    print(f"random vectors: min V = {vals.min():.6g}, median V = {np.median(vals):.6g} over {args.trials} trials")


if __name__ == "__main__":
    main()
