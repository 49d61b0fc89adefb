"""Tabulate Psi^{-1}(y) against its closed-form asymptotes along y = 10^k.

loglog-power h:  Psi^{-1}(y) / (y^2 / (2 (LLy)^p))  -> 1
log-power h:     Psi^{-1}(y) / (y^2 / (Ly)^r)       -> 2^-(r+1)

The first converges in LLy only, so the table shows how far off it still is
at the top of the double range.
"""

import argparse
import math

from lilnorm.logscale import L_from_log, LL_from_log
from lilnorm.normalizer import Normalizer, SlowFunction


def ratio(nm: Normalizer, w: float, log_ref: float) -> float:
    return math.exp(nm.log_psi_inverse_from_log(w) - log_ref)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--decades", type=int, nargs="+", default=[6, 20, 50, 100, 200, 300])
    ap.add_argument("--p", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--r", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = ap.parse_args()

    print(f"{'family':>16} " + " ".join(f"{'1e' + str(k):>10}" for k in args.decades))
    for p in args.p:
        nm = Normalizer(SlowFunction.loglog_power(p))
        row = []
        for k in args.decades:
            w = k * math.log(10.0)
            row.append(ratio(nm, w, 2 * w - math.log(2.0) - p * math.log(LL_from_log(w))))
        print(f"{'loglog p=' + str(p):>16} " + " ".join(f"{v:10.5f}" for v in row))
    for r in args.r:
        nm = Normalizer(SlowFunction.log_power(r))
        row = []
        for k in args.decades:
            w = k * math.log(10.0)
            row.append(ratio(nm, w, 2 * w - r * math.log(L_from_log(w))) * 2 ** (r + 1))
        print(f"{'log r=' + str(r) + ' (x2^(r+1))':>16} " + " ".join(f"{v:10.5f}" for v in row))


if __name__ == "__main__":
    main()
