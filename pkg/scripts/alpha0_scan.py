"""Bracket alpha0 for a handful of normalising sequences and sigma policies."""

import argparse

from lilnorm.alpha0 import NormSeqSpec, SigmaPolicy, alpha0_estimate
from lilnorm.distmodel import Gaussian, Rademacher, feller_pruitt
from lilnorm.normalizer import SlowFunction, construct_psi_from_phi


def cases():
    g, rad, fp = Gaussian(1.0), Rademacher(), feller_pruitt()
    nm2, _ = construct_psi_from_phi(fp, SlowFunction.phi2())
    yield "gaussian, sqrt(2nLLn), sigma^2 = 1", g, NormSeqSpec.formula("lil"), SigmaPolicy.of_constant(1.0)
    yield "gaussian, n^1/2 (LLn)^1/4", g, NormSeqSpec.formula("sqrt-n-LLn-quarter"), None
    yield "gaussian, n^1/2 Ln", g, NormSeqSpec.formula("sqrt-n-Ln"), None
    yield "rademacher, gamma_n", rad, NormSeqSpec.gamma(rad), None
    yield "rademacher, 2 gamma_n", rad, NormSeqSpec.scaled(NormSeqSpec.gamma(rad), 2.0), None
    yield "feller-pruitt, Psi_2", fp, NormSeqSpec.psi(nm2), None


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--nmax", type=float, default=1e16)
    args = ap.parse_args()
    for label, dist, c, policy in cases():
        pols = [policy] if policy is not None else [SigmaPolicy.of_delta(d) for d in args.deltas]
        for pol in pols:
            rep = alpha0_estimate(dist, c, pol, nmax=args.nmax)
            rb = rep.ratio_bounds
            br = "none" if rep.bracket is None else f"[{rep.bracket[0]:.4f}, {rep.bracket[1]:.4f}]"
            print(f"{label:36s} {str(pol.describe()):34s} alpha0 {br:18s} {rep.flag:12s} "
                  f"[1/b, 1/a] = [{rb.lower:.4g}, {rb.upper:.4g}] ({rb.trend})")


if __name__ == "__main__":
    main()
