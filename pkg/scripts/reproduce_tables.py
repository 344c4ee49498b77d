"""Print the kernel comparison table and the bias-free bandwidth table."""
from tiebreaker import bias_free_bandwidth, get_kernel, kernel_constants, relative_amse, theta_star
from tiebreaker.kernels import KERNEL_NAMES


def main():
    print(f"{'kernel':<14}{'C1':>10}{'C2':>9}{'C1~':>10}{'C2~':>9}{'ratio':>8}{'theta*':>8}{'h/delta':>9}")
    for name in KERNEL_NAMES:
        k = get_kernel(name)
        m = kernel_constants(k)
        print(
            f"{name:<14}{m.c1:>10.5f}{m.c2:>9.4f}{m.c1_tilde:>10.5f}{m.c2_tilde:>9.4f}"
            f"{relative_amse(k):>8.2f}{theta_star(k):>8.3f}{bias_free_bandwidth(k, 1.0):>9.4f}"
        )


if __name__ == "__main__":
    main()
