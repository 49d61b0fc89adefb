"""Paired-seed simulation: the same Feller-Pruitt paths under Psi_2 and
under sqrt(n Ln LLn), plus a Rademacher reference under sqrt(2n LLn)."""

import argparse

import numpy as np

from lilnorm.alpha0 import NormSeqSpec
from lilnorm.distmodel import Rademacher, feller_pruitt
from lilnorm.mcsim import SimConfig, cluster_histogram, run_sim
from lilnorm.normalizer import SlowFunction, construct_psi_from_phi


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=10**7)
    ap.add_argument("--paths", type=int, default=16)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    fp = feller_pruitt()
    nm2, _ = construct_psi_from_phi(fp, SlowFunction.phi2())
    runs = {
        "rademacher / sqrt(2nLLn)": (Rademacher(), NormSeqSpec.formula("lil")),
        "feller-pruitt / Psi_2": (fp, nm2),
        "feller-pruitt / sqrt(nLnLLn)": (fp, NormSeqSpec.formula("sqrt-n-Ln-LLn")),
    }
    maxima = {}
    for label, (dist, a) in runs.items():
        res = run_sim(SimConfig(dist, a, args.n_max, args.paths, args.seed, threads=args.threads))
        hist = cluster_histogram(res)
        maxima[label] = res.path_max
        print(f"{label:30s} path max in [{res.path_max.min():.3f}, {res.path_max.max():.3f}], "
              f"pooled {res.pooled_max:.3f}, symmetry {hist.symmetry:.3f}, "
              f"occupancy {hist.occupancy:.2f}")
    a, b = maxima["feller-pruitt / Psi_2"], maxima["feller-pruitt / sqrt(nLnLLn)"]
    print(f"paths where sqrt(nLnLLn) gives the larger max: {int(np.sum(b > a))} of {len(a)}")


if __name__ == "__main__":
    main()
