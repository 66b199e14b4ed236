"""T over a (rho, k) grid, plus null / near-unity fractions and mean T per stage."""

import argparse

import numpy as np

from cantorscatter import PotentialSpec, rho_k_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="grid.csv")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    g = rho_k_grid(PotentialSpec(3, 10.0, 0.5, 0.0, 2, 25.0, 25.0), 9.0, 12.0, 61, 3.0, 5.0, 2001,
                   workers=args.workers)
    rr, kk = np.meshgrid(g.rho_axis, g.k_axis, indexing="ij")
    np.savetxt(args.out, np.column_stack([rr.ravel(), kk.ravel(), g.t.ravel()]),
               delimiter=",", header="rho,k,T", comments="", fmt="%.17g")
    print(f"null fraction (T < 1e-6): {np.mean(g.t < 1e-6):.3f}")
    print(f"near-unity fraction (T > 0.99): {np.mean(g.t > 0.99):.3f}")
    template = PotentialSpec(3, 1.8, 0.5, 1.15, 1, 25.0, 25.0)
    for S in range(1, 7):
        t = rho_k_grid(template.replace(S=S), 1.55, 2.0, 51, 7.0, 10.0, 2001, workers=args.workers).t
        print(f"S={S}: mean T = {np.nanmean(t):.4f}")


if __name__ == "__main__":
    main()
