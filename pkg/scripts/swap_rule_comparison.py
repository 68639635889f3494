"""Compare the two swap fidelity rules on the headline 4-hop statistics.

For each rule prints the 4-hop CDF at step 10 for T=5 and T=10, the
crossover step at T=20 and T=50, and the realistic/fair rate ratio.
"""

import argparse
from dataclasses import replace

from entroute.stats import crossover_step
from entroute.sweep import (
    FOUR_HOP_WITH_PRIORS,
    TWO_HOP,
    default_params,
    fair_params,
    panel_params,
    rate_comparison,
    run_panel,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    for rule in ("oldest", "product"):
        base = default_params(swap_rule=rule)
        cdf10 = {}
        for T in (5, 10):
            panel = run_panel(TWO_HOP, FOUR_HOP_WITH_PRIORS, panel_params(base, 0.15, 0.9, T), args.trials, args.seed)
            cdf10[T] = panel.table.series["path_b"][9]
        cross = {}
        for T in (20, 50):
            s = run_panel(TWO_HOP, FOUR_HOP_WITH_PRIORS, panel_params(base, 0.15, 0.9, T), args.trials, args.seed).table.series
            cross[T] = crossover_step(s["path_a"], s["path_b"])
        realistic = replace(default_params(p_e=0.15, p_s=0.9, f_th=0.95), swap_rule=rule)
        ratio = rate_comparison(realistic, fair_params(realistic), args.trials, args.seed).ratio
        print(
            f"{rule:8s} CDF4(10): T5={cdf10[5]:.3f} T10={cdf10[10]:.3f}  "
            f"crossover: T20={cross[20]} T50={cross[50]}  rate ratio={ratio:.2f}"
        )


if __name__ == "__main__":
    main()
