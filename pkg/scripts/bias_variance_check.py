"""Compare simulated bias and variance of the threshold effect to leading-order predictions."""
import argparse

from tiebreaker import AssignmentRule, DgpSpec, XSampler, get_kernel, validate_bias_variance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kernel", default="triangular")
    ap.add_argument("--curvature", type=float, default=11.0, help="x^2 coefficient, +c above and -c below")
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=71)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    c = args.curvature
    spec = DgpSpec((0, 0, c), (0, 0, -c), 1.0, 1.0, XSampler("uniform", -1, 1))
    rule = AssignmentRule(0.0, args.delta, 0.5, "independent")
    rep = validate_bias_variance(spec, rule, args.h, get_kernel(args.kernel), args.reps, args.seed, n=args.n, workers=args.workers)
    print(f"bias      empirical {rep.emp_bias:.5f}  predicted {rep.pred_bias:.5f}  z = {rep.bias_z:.2f}")
    print(f"variance  empirical {rep.emp_var:.3e}  predicted {rep.pred_var:.3e}  ratio = {rep.var_ratio:.3f}")


if __name__ == "__main__":
    main()
