"""Fourth-order ODE: cubature loss with polynomial differentiation vs MSE loss with Taylor jets.

Trains both for every seed and prints eps1, total wall time and median epoch time.

    python3 scripts/ode4_comparison.py --epochs 10000 --seeds 0 1 2
"""

import argparse

import numpy as np

from scpinn import LossSpec, MLPArchitecture, TrainConfig, get_problem, train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", type=int, default=10000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--omega", type=float, default=np.pi)
    ap.add_argument("--points", type=int, default=100, help="grid degree / number of collocation points")
    args = ap.parse_args()

    problem = get_problem("ode4", omega=args.omega)
    arch = MLPArchitecture((1, 50, 50, 50, 50, 1))
    print("loss,seed,eps1,eps_inf,wall_s,median_epoch_ms")
    for kind in ("strong_variational", "mse"):
        spec = LossSpec(kind, n_r=args.points, n_s=0)
        for seed in args.seeds:
            rep = train(problem, spec, arch, TrainConfig(epochs=args.epochs, seed=seed))
            print(f"{kind},{seed},{rep.metrics.eps1:.4e},{rep.metrics.eps_inf:.4e},"
                  f"{sum(rep.wall):.2f},{1e3 * rep.median_epoch_time():.3f}", flush=True)


if __name__ == "__main__":
    main()
