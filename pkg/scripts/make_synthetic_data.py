"""Write a synthetic stand-in for a school-level enrollment column.

Values are integer grade enrollments between 8 and 80, a mixture of small
rural schools and larger urban ones, so there are heavy ties and an uneven
density around the cutoff at 40.5.
"""
import argparse
from pathlib import Path

import numpy as np

from tiebreaker.io import write_rows


def synthetic_enrollments(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    small = rng.gamma(shape=6.0, scale=4.0, size=n)
    large = rng.normal(loc=52.0, scale=13.0, size=n)
    x = np.where(rng.random(n) < 0.3, small, large)
    return np.clip(np.rint(x), 8, 80).astype(int)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=711)
    ap.add_argument("--seed", type=int, default=20240711)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "data" / "synthetic_enrollments.csv")
    args = ap.parse_args()
    x = synthetic_enrollments(args.n, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_rows(args.out, ["x"], ([v] for v in x), {"source": "synthetic", "n": args.n, "seed": args.seed})
    print(f"wrote {len(x)} rows to {args.out}")


if __name__ == "__main__":
    main()
