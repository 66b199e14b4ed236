"""Large-k reflection slopes at area-preserved heights (rho=3.5, mu=0.5, nu=1.5, V0=10)."""

import argparse

from cantorscatter import PotentialSpec, scaling_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, default=1.0)
    ap.add_argument("--k-lo", type=float, default=1e2)
    ap.add_argument("--k-hi", type=float, default=1e4)
    args = ap.parse_args()
    cases = [(N, 4) for N in (2, 3, 4, 5, 8)] + [(8, S) for S in (0, 2, 3, 5)]
    print(f"{'N':>3} {'S':>3} {'slope':>9} {'intercept':>10} {'resid':>8} {'used':>5} {'V_S':>9}")
    for N, S in cases:
        fit = scaling_fit(PotentialSpec(N, 3.5, 0.5, 1.5, S, args.L, 0.0), 10.0, args.k_lo, args.k_hi, 400)
        print(f"{N:>3} {S:>3} {fit.slope:9.4f} {fit.intercept:10.4f} {fit.residual:8.3f} {fit.n_used:5d} {fit.V_S:9.3f}")


if __name__ == "__main__":
    main()
