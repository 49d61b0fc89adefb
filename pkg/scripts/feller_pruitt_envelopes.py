"""Feller-Pruitt law: compare the envelopes phi1 = 2Lx and phi2.

Builds Psi from each envelope, reports the moment verdict that decides the
LIL, and prints Psi_2 against ((x/2) phi2(x) LLx)^(1/2) on a decade grid.
"""

import argparse
import math

from lilnorm.distmodel import feller_pruitt
from lilnorm.normalizer import SlowFunction, construct_psi_from_phi, fp_phi2_closed_form_log_psi


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--decades", type=int, nargs="+", default=[10, 20, 50, 100, 200, 300])
    args = ap.parse_args()

    fp = feller_pruitt()
    for name, phi in (("phi1 = 2Lx", SlowFunction.log_power(1.0)), ("phi2", SlowFunction.phi2())):
        nm, rep = construct_psi_from_phi(fp, phi)
        print(f"{name}: limsup H/phi ~ {rep.envelope_window_sup:.4f} ({rep.envelope_trend}), "
              f"moment condition {rep.moment_verdict}, max fixed-point iterations "
              f"{rep.max_iterations}")
        if phi.family == "feller-pruitt-phi2":
            print("      x   Psi2 / closed form")
            for k in args.decades:
                u = k * math.log(10.0)
                r = math.exp(nm.log_psi_from_log(u) - fp_phi2_closed_form_log_psi(u))
                print(f"  1e{k:<4d} {r:.6f}")


if __name__ == "__main__":
    main()
