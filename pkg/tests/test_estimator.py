import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiebreaker import finite_bandwidth as fb
from tiebreaker.errors import DomainError, SingularFitError
from tiebreaker.estimator import (
    AssignmentRule,
    Dataset,
    Strategy,
    assign,
    fit_local_linear,
    sandwich_variance,
    smoother_weights,
)
from tiebreaker.kernels import KERNEL_NAMES, eval_kernel, get_kernel, tabulated_kernel

from oracles import dense_sandwich, dense_wls, two_regressions_tau

TRI = get_kernel("triangular")
BOX = get_kernel("boxcar")


def grid(n):
    return (2 * np.arange(1, n + 1) - n - 1) / n


# -- assignment


def test_sharp_rdd_assignment():
    x = np.array([-1.0, -0.2, 0.0, 0.1, 3.0])
    for seed in (0, 1, 2):
        z = assign(x, AssignmentRule(0.0, 0.0), seed)
        assert z.tolist() == [-1, -1, -1, 1, 1]
    z = assign(x + 5, AssignmentRule(5.0, 0.0))
    assert z.tolist() == [-1, -1, -1, 1, 1]


def test_deterministic_outside_window():
    x = np.linspace(-1, 1, 201)
    z = assign(x, AssignmentRule(0.0, 0.3, strategy="independent"), 4)
    assert np.all(z[x < -0.3 - 1e-12] == -1)
    assert np.all(z[x > 0.3 + 1e-12] == 1)


def test_stratified_pairs_balance():
    x = np.random.default_rng(0).uniform(-1, 1, 1000)
    rule = AssignmentRule(0.0, 0.4)
    inside = np.abs(x) <= 0.4
    z = assign(x, rule, 11)
    order = np.flatnonzero(inside)[np.argsort(x[inside], kind="stable")]
    pairs = z[order[: 2 * (order.size // 2)]].reshape(-1, 2)
    assert np.all(pairs.sum(axis=1) == 0)
    if order.size % 2 == 0:
        assert (z[inside] == 1).sum() == order.size // 2


def test_stratified_even_window_exact_half():
    x = grid(1000)
    z = assign(x, AssignmentRule(0.0, 0.2), 5)
    w = np.abs(x) <= 0.2
    assert w.sum() % 2 == 0
    assert (z[w] == 1).sum() == w.sum() // 2


def test_stratified_odd_leftover_uses_p():
    x = np.array([-0.5, -0.1, 0.0, 0.1, 0.5])  # three in the window
    tops = [assign(x, AssignmentRule(0.0, 0.2, 0.9), s)[3] for s in range(400)]
    assert 0.8 < np.mean(np.array(tops) == 1) < 0.98


def test_stratified_ties_pair_by_row_order():
    x = np.array([0.1, 0.1, 0.1, 0.1, -0.05, -0.05])
    z = assign(x, AssignmentRule(0.0, 0.2), 3)
    # sorted order: rows 4,5 then 0,1 then 2,3
    assert z[4] + z[5] == 0 and z[0] + z[1] == 0 and z[2] + z[3] == 0


def test_window_is_inclusive():
    x = np.array([-0.25, 0.25, 0.0, 0.9])
    seen = {assign(x, AssignmentRule(0.0, 0.25, strategy="independent"), s)[0] for s in range(50)}
    assert seen == {-1, 1}


def test_independent_fraction_concentrates():
    x = np.linspace(-0.5, 0.5, 10_000)
    rule = AssignmentRule(0.0, 0.5, strategy=Strategy.INDEPENDENT_BERNOULLI)
    fracs = np.array([np.mean(assign(x, rule, s) == 1) for s in range(200)])
    assert np.mean(np.abs(fracs - 0.5) <= 0.02) >= 0.99


def test_assignment_reproducible():
    x = np.random.default_rng(1).normal(size=300)
    for strat in Strategy:
        rule = AssignmentRule(0.0, 0.5, 0.3, strat)
        assert np.array_equal(assign(x, rule, 42), assign(x, rule, 42))
        assert not np.array_equal(assign(x, rule, 42), assign(x, rule, 43))


def test_rule_validation():
    with pytest.raises(DomainError):
        AssignmentRule(0.0, -0.1)
    with pytest.raises(DomainError):
        AssignmentRule(0.0, 0.1, 1.0)
    with pytest.raises(DomainError):
        assign([], AssignmentRule())


# -- dataset


def test_dataset_validation():
    with pytest.raises(DomainError):
        Dataset([0.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        Dataset([0, 1, 2, 3], [1, -1, 0, 1])
    with pytest.raises(DomainError):
        Dataset([0, 1, 2, 3], [1, -1, 1], None)
    with pytest.raises(DomainError):
        Dataset([0, 1, 2, 3], None, [1, 2])


def test_dataset_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.uniform(-1, 1, 20)
    d = Dataset(x, assign(x, AssignmentRule(0, 0.3), 1), rng.normal(size=20))
    p = tmp_path / "d.csv"
    d.to_csv(p, {"seed": 1})
    text = p.read_text()
    assert text.startswith("# seed=1\nx,z,y\n")
    back = Dataset.from_csv(p)
    assert np.array_equal(back.x, d.x) and np.array_equal(back.z, d.z) and np.array_equal(back.y, d.y)


def test_dataset_csv_without_z(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x\n0.1\n0.2\n-0.3\n0.4\n")
    d = Dataset.from_csv(p)
    assert d.z is None and d.y is None
    assert d.with_assignment(AssignmentRule(0.0, 0.0)).z.tolist() == [1, 1, -1, 1]


# -- fitting


def _two_line(beta, x, z):
    b1, b2, b3, b4 = beta
    return b1 + b2 * x + b3 * z + b4 * x * z


@given(
    st.lists(st.floats(-5, 5), min_size=4, max_size=4),
    st.floats(0.3, 2.0),
    st.floats(-0.3, 0.3),
    st.sampled_from(KERNEL_NAMES),
)
@settings(max_examples=60, deadline=None)
def test_noiseless_exact_recovery(beta, h, t, name):
    x = np.linspace(-1, 1, 60) + 0.003
    z = assign(x, AssignmentRule(t, 0.25), 0)
    y = _two_line(beta, x, z)
    res = fit_local_linear(Dataset(x, z, y), t, h, get_kernel(name))
    np.testing.assert_allclose(res.beta, beta, atol=1e-9)
    assert res.tau_thresh == 2 * res.beta[2] + 2 * res.beta[3] * t


@pytest.mark.parametrize("seed", range(10))
def test_matches_two_separate_regressions(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, 80)
    t = rng.uniform(-0.2, 0.2)
    z = assign(x, AssignmentRule(t, 0.3, strategy="independent"), rng)
    y = np.sin(3 * x) + z * (1 + x) + rng.normal(size=x.size)
    k = get_kernel(KERNEL_NAMES[seed % 7])
    h = 0.7
    res = fit_local_linear(Dataset(x, z, y), t, h, k)
    w = eval_kernel(k, (x - t) / h)
    assert res.tau_thresh == pytest.approx(two_regressions_tau(x, z, y, w, t), abs=1e-9)


def test_hand_dataset_dense_solve():
    x = np.array([-0.9, -0.6, -0.3, -0.1, 0.05, 0.2, 0.5, 0.8])
    z = np.array([-1, -1, 1, -1, 1, -1, 1, 1])
    y = np.array([1.0, 0.3, 2.2, -0.4, 1.9, 0.1, 2.8, 3.5])
    w = eval_kernel(TRI, x / 1.2)
    res = fit_local_linear(Dataset(x, z, y), 0.0, 1.2, TRI)
    np.testing.assert_allclose(res.beta, dense_wls(x, z, y, w), rtol=1e-12, atol=1e-12)
    assert res.n_eff == 8
    assert res.var_beta3_over_sigma2 == pytest.approx(dense_sandwich(x, z, w)[2, 2], rel=1e-10)


def test_boxcar_sandwich_is_inverse_gram():
    x = grid(400)
    z = assign(x, AssignmentRule(0.0, 0.15), 2)
    h = 0.5
    ind = (np.abs(x) <= h).astype(float)  # the 0/1 boxcar weights
    X = np.column_stack([np.ones_like(x), x, z, x * z])
    inv = np.linalg.inv(X.T @ (ind[:, None] * X))
    assert sandwich_variance(Dataset(x, z), 0.0, h, BOX) == pytest.approx(inv[2, 2], rel=1e-12)


@given(st.floats(1e-3, 1e3))
@settings(max_examples=20, deadline=None)
def test_sandwich_weight_scale_invariance(c):
    u = np.linspace(0, 1, 9)
    base = tabulated_kernel(u, 1 - u**2)
    scaled = tabulated_kernel(u, c * (1 - u**2))
    x = grid(200)
    z = assign(x, AssignmentRule(0.0, 0.1), 1)
    d = Dataset(x, z)
    assert sandwich_variance(d, 0, 0.6, scaled) == pytest.approx(sandwich_variance(d, 0, 0.6, base), rel=1e-10)


def test_translation_invariance():
    rng = np.random.default_rng(5)
    x = rng.uniform(-1, 1, 120)
    z = assign(x, AssignmentRule(0.1, 0.2), 3)
    y = 2 + x + 0.5 * z * x**2 + rng.normal(size=120)
    a = fit_local_linear(Dataset(x, z, y), 0.1, 0.6, TRI)
    b = fit_local_linear(Dataset(x + 40.5, z, y), 40.6, 0.6, TRI)
    assert b.tau_thresh == pytest.approx(a.tau_thresh, abs=1e-9)
    assert b.var_beta3_over_sigma2 == pytest.approx(a.var_beta3_over_sigma2, rel=1e-9)


def test_row_order_invariance():
    rng = np.random.default_rng(6)
    x = rng.uniform(-1, 1, 90)
    z = assign(x, AssignmentRule(0.0, 0.3), 2)
    perm = rng.permutation(90)
    a = sandwich_variance(Dataset(x, z), 0.0, 0.5, TRI)
    b = sandwich_variance(Dataset(x[perm], z[perm]), 0.0, 0.5, TRI)
    assert b == pytest.approx(a, rel=1e-12)


def test_all_treated_is_singular():
    x = np.linspace(-1, 1, 50)
    with pytest.raises(SingularFitError) as err:
        fit_local_linear(Dataset(x, np.ones(50), x), 0.0, 0.5, TRI)
    assert set(err.value.columns) & {"intercept", "z"}
    assert "x*z" in err.value.columns or "x" in err.value.columns


def test_too_few_weighted_points():
    x = np.array([-0.9, -0.8, 0.01, 0.8, 0.9])
    d = Dataset(x, [-1, -1, 1, 1, 1], x)
    with pytest.raises(SingularFitError, match="positive kernel weight"):
        fit_local_linear(d, 0.0, 0.1, TRI)


def test_fit_needs_labels_and_responses():
    with pytest.raises(DomainError):
        fit_local_linear(Dataset(np.arange(5.0), None, np.arange(5.0)), 0, 1, TRI)
    with pytest.raises(DomainError):
        fit_local_linear(Dataset(np.arange(5.0), [1, 1, -1, -1, 1]), 0, 1, TRI)
    with pytest.raises(DomainError):
        sandwich_variance(Dataset(np.arange(5.0), [1, 1, -1, -1, 1]), 0, -1.0, TRI)


def test_zero_weight_points_dropped():
    x = np.r_[np.linspace(-0.4, 0.4, 40), [5.0, -7.0]]
    z = assign(x, AssignmentRule(0, 0.1), 0)
    y = np.r_[x[:40], [1e6, -1e6]]
    res = fit_local_linear(Dataset(x, z, y), 0.0, 0.5, TRI)
    assert res.n_eff == 40
    assert res.tau_thresh == pytest.approx(0.0, abs=1e-9)


def test_smoother_weights_reproduce_tau():
    rng = np.random.default_rng(8)
    x = rng.uniform(-1, 1, 150)
    z = assign(x, AssignmentRule(0.0, 0.2), 8)
    y = rng.normal(size=150)
    d = Dataset(x, z, y)
    l = smoother_weights(d, 0.0, 0.4, TRI)
    assert l @ y == pytest.approx(fit_local_linear(d, 0.0, 0.4, TRI).tau_thresh, abs=1e-12)
    assert np.sum(l**2) / 4 == pytest.approx(sandwich_variance(d, 0.0, 0.4, TRI), rel=1e-10)


@pytest.mark.parametrize("k", [BOX, TRI], ids=["boxcar", "triangular"])
@pytest.mark.parametrize("h", [0.4, 0.8])
def test_finite_sample_matches_asymptotic(k, h):
    n = 10_000
    x = grid(n)
    for delta in (0.0, h / 2, h):
        z = assign(x, AssignmentRule(0.0, delta), 1)
        got = n * sandwich_variance(Dataset(x, z), 0.0, h, k)
        assert got == pytest.approx(fb.asymptotic_var_beta3(k, h, delta), rel=0.03)


def test_linear_model_unbiased():
    rng = np.random.default_rng(9)
    x = grid(400)
    taus = []
    for _ in range(300):
        z = assign(x, AssignmentRule(0.0, 0.3), rng)
        y = 1 + 0.5 * x + 0.8 * z - 0.3 * x * z + rng.normal(size=x.size)
        taus.append(fit_local_linear(Dataset(x, z, y), 0.0, 0.5, TRI).tau_thresh)
    taus = np.array(taus)
    se = taus.std(ddof=1) / np.sqrt(taus.size)
    assert abs(taus.mean() - 1.6) < 3 * se
