"""Transmission profiles and resonance peaks for the N = 2..5 family (L=5, V=25).

    python3 scripts/transmission_profiles.py --out results/profiles
"""

import argparse
from pathlib import Path

import numpy as np

from cantorscatter import PotentialSpec, find_resonances, k_sweep
from cantorscatter.analysis import resonance_window

FAMILY = {2: 2, 3: 1, 4: 2, 5: 2}  # N -> stage


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/profiles")
    ap.add_argument("--n-points", type=int, default=4000)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for N, S in FAMILY.items():
        spec = PotentialSpec(N, N + 0.1, 0.0, 1.0, S, 5.0, 25.0)
        tab = k_sweep(spec, 0.01, 8.0, args.n_points, workers=args.workers)
        np.savetxt(out / f"sweep_N{N}.csv", np.column_stack([tab.axis, tab.t, tab.r]),
                   delimiter=",", header="k,T,R", comments="", fmt="%.17g")
        lo, hi = resonance_window(spec, 1e-3, 8.0, 40000)
        peaks = find_resonances(spec, lo, hi).peaks
        print(f"N={N} S={S}: window [{lo:.4f}, {hi:.4f}], {len(peaks)} peaks")
        for p in peaks:
            print(f"    k*={p.k:.10f}  T={p.T:.12f}  fwhm={p.width:.3e}")


if __name__ == "__main__":
    main()
