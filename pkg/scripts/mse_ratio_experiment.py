"""Simulated MSE ratio of the two designs at their optimal bandwidths, over a grid of sample-size ratios."""
import argparse

from tiebreaker import DgpSpec, XSampler, get_kernel, theta_star, validate_mse_ratio


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kernel", default="triangular")
    ap.add_argument("--thetas", default="1,2,star")
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=81)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    k = get_kernel(args.kernel)
    spec = DgpSpec((0, 0, 11), (0, 0, -11), 1.0, 1.0, XSampler("uniform", -1, 1))
    print(f"{'theta':>8}{'simulated':>11}{'predicted':>11}{'h_rdd':>9}{'h_tbd':>9}")
    for tok in args.thetas.split(","):
        theta = theta_star(k) if tok.strip() == "star" else float(tok)
        rep = validate_mse_ratio(spec, theta, k, args.n, args.reps, args.seed, workers=args.workers)
        print(f"{theta:>8.4f}{rep.ratio:>11.4f}{rep.predicted:>11.4f}{rep.h_rdd:>9.4f}{rep.h_tbd:>9.4f}")


if __name__ == "__main__":
    main()
