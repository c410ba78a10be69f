"""Inverse 1D Poisson: recovered lambda per loss kind and seed.

    python3 scripts/inverse_sweep.py --epochs 20000
"""

import argparse

from scpinn import LossSpec, MLPArchitecture, TrainConfig, get_problem, train_inverse


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", type=int, default=20000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--kinds", nargs="+", default=["strong", "strong_variational", "weak_variational", "mse"])
    ap.add_argument("--lambda0", type=float, default=1.0)
    ap.add_argument("--w-data", type=float, default=1.0)
    args = ap.parse_args()

    problem = get_problem("poisson1d_inverse")
    arch = MLPArchitecture((1, 20, 20, 20, 1))
    print(f"lambda_gt = {problem.lam_gt:.10f}")
    print("loss,seed,lambda,rel_eps_lambda,eps1")
    for kind in args.kinds:
        spec = LossSpec(kind, n_r=100, n_s=0, w_data=args.w_data)
        for seed in args.seeds:
            rep = train_inverse(problem, spec, arch, TrainConfig(epochs=args.epochs, seed=seed), args.lambda0)
            rel = abs(rep.final_lambda - problem.lam_gt) / problem.lam_gt
            print(f"{kind},{seed},{rep.final_lambda:.10f},{rel:.3e},{rep.metrics.eps1:.3e}", flush=True)


if __name__ == "__main__":
    main()
