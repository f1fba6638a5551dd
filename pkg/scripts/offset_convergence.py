"""Monte Carlo offset variance vs sample count, next to both reference values.

For every (configuration, deviation mode) pair this prints the closed form,
the first-order propagation through the exact networks, and MC estimates at
increasing N. Useful for seeing where the two references disagree.

Run: python scripts/offset_convergence.py [--delta 0.01] [--alpha 0.7854] [--seed 42]
"""

import argparse
import math

from piezobridge.bridge import ALL_CONFIGS, P_SILICON
from piezobridge.budget import (
    DeviationMode,
    DeviationModel,
    offset_variance_analytic,
    offset_variance_linearized,
    offset_variance_monte_carlo,
)
from piezobridge.mechanics import MechanicalParams

SAMPLE_COUNTS = (1_000, 10_000, 100_000, 400_000)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--delta", type=float, default=0.01)
    parser.add_argument("--alpha", type=float, default=math.pi / 4)
    parser.add_argument("--h", type=float, default=1e6)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    mech = MechanicalParams(args.h, args.alpha)
    print("config,mode,closed_form,first_order," + ",".join(f"mc_{n}" for n in SAMPLE_COUNTS))
    for config in ALL_CONFIGS:
        for mode in DeviationMode:
            model = DeviationModel(mode, args.delta)
            cells = [
                offset_variance_analytic(config, mech, P_SILICON, model),
                offset_variance_linearized(config, mech, P_SILICON, model),
            ]
            for n in SAMPLE_COUNTS:
                mc = offset_variance_monte_carlo(config, mech, P_SILICON, 1.0, model, n, args.seed)
                cells.append(mc.mean)
            print(f"{config.value},{mode.value}," + ",".join(f"{c:.6g}" for c in cells))


if __name__ == "__main__":
    main()
