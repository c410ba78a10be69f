"""Steep-front 1D Poisson: train on a named scenario and dump the solution for plotting.

    python3 scripts/hard_transition.py --scenario desk --epochs 30000 --out hard.csv
"""

import argparse
import csv

import numpy as np

from scpinn import LossSpec, MLPArchitecture, TrainConfig, train
from scpinn.nn import forward
from scpinn.problems import HARD_SCENARIOS, equidistant_grid, poisson1d_hard


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", choices=sorted(HARD_SCENARIOS), default="desk")
    ap.add_argument("--loss", default="strong_variational")
    ap.add_argument("--degree", type=int, default=100)
    ap.add_argument("--epochs", type=int, default=30000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="optional CSV with x, u_hat, u_gt")
    args = ap.parse_args()

    problem = poisson1d_hard(**HARD_SCENARIOS[args.scenario])
    arch = MLPArchitecture((1, 20, 20, 20, 20, 1))
    spec = LossSpec(args.loss, n_r=args.degree, n_s=0)
    rep = train(problem, spec, arch, TrainConfig(epochs=args.epochs, seed=args.seed, eval_resolution=1001))
    print(f"{args.scenario}: eps_inf={rep.metrics.eps_inf:.3e} eps1={rep.metrics.eps1:.3e} "
          f"final loss={rep.final_loss:.3e} wall={sum(rep.wall):.1f}s")
    if args.out:
        x = equidistant_grid(1, 1001)
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "u_hat", "u_gt"])
            for xi, a, b in zip(x[:, 0], forward(arch, rep.theta, x), problem.solution(x)):
                w.writerow([f"{xi:.17g}", f"{a:.17g}", f"{b:.17g}"])


if __name__ == "__main__":
    main()
