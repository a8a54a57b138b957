"""Average degree statistics of simulated networks, per cutoff and design."""

import argparse

from tetradlogit.simlab import DgpConfig, Homogeneous, TypeHeterogeneous, degree_table

DESIGNS = {
    "lambda_0_1": Homogeneous((0.0, 1.0)),
    "lambda_0_2": Homogeneous((0.0, 2.0)),
    "type_0.5_1": TypeHeterogeneous((0.0, 0.5), (0.0, 1.0), "type_interaction"),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-nodes", type=int, default=25)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--sparsity", nargs="+", default=["0", "loglog", "sqrtlog", "log"])
    args = ap.parse_args()
    for sparsity in args.sparsity:
        for name, scheme in DESIGNS.items():
            table = degree_table(DgpConfig(args.n_nodes, scheme, 1.0, sparsity), args.reps)
            means = "  ".join(f"m={m}: {d['mean']:.3f}" for m, d in table.items())
            print(f"{sparsity:>8} {name:<12} {means}")


if __name__ == "__main__":
    main()
