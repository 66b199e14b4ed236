"""Stage-to-stage saturation distances for the nu and mu families (N=3, L=V=25)."""

import argparse

from cantorscatter import PotentialSpec, saturation_metric


def show(label, res):
    print(label)
    print("      " + "".join(f"{s:>10d}" for s in res.stages))
    for s, row in zip(res.stages, res.distance):
        print(f"{s:>6d}" + "".join(f"{v:10.3g}" for v in row))
    print(f"  saturated beyond stage: {res.saturated_beyond()}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-points", type=int, default=4000)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    base = PotentialSpec(3, 2.0, 0.5, 1.0, 1, 25.0, 25.0)
    for nu in (1.0, 2.0, 3.5):
        res = saturation_metric(base.replace(nu=nu), [2, 4, 6, 8, 10, 12], 1e-3, 4.0, args.n_points, args.workers)
        show(f"rho=2 mu=0.5 nu={nu}", res)
    base = PotentialSpec(3, 3.5, 2.0, 0.0, 1, 25.0, 25.0)
    for mu in (2.0, 5.0, 9.0):
        res = saturation_metric(base.replace(mu=mu), [1, 2, 3, 4], 1e-3, 4.0, args.n_points, args.workers)
        show(f"rho=3.5 nu=0 mu={mu}", res)


if __name__ == "__main__":
    main()
