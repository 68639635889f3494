"""Realistic vs idealised e2e rate on the 4-hop path over a grid of p_e.

The idealised mode uses perfect swaps that keep links on failure and a
relaxed 0.8 fidelity threshold; both modes share p_e and random streams.
"""

import argparse

from entroute.sweep import default_params, fair_params, rate_comparison


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pe", type=float, nargs="*", default=[0.1, 0.15, 0.25, 0.4, 0.7, 1.0])
    parser.add_argument("--ps", type=float, default=0.9)
    parser.add_argument("--fidelity-threshold", type=float, default=0.95)
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'pe':>5s} {'realistic Hz':>13s} {'fair Hz':>10s} {'ratio':>7s}")
    for pe in args.pe:
        realistic = default_params(p_e=pe, p_s=args.ps, f_th=args.fidelity_threshold)
        report = rate_comparison(realistic, fair_params(realistic), args.trials, args.seed)
        ratio = f"{report.ratio:7.2f}" if report.ratio else "    n/a"
        print(f"{pe:5.2f} {report.realistic.rate_hz or 0:13.2f} {report.fair.rate_hz or 0:10.2f} {ratio}")


if __name__ == "__main__":
    main()
