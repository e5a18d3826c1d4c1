import numpy as np
import pytest

from oracles import dense_lml, dense_posterior, matern52_dense
from stagger import Dataset, GPError, KernelParams, argmax_mean, conditional_variance, fit, joint_sample, posterior
from stagger.domain import InvalidDimensionError, make_rng, uniform_points
from stagger.gp import NOISE_FLOOR, _cholesky_jittered, build_model, log_marginal_likelihood, matern52, rff_posterior_sampler, sample_mvn


def random_data(rng, n, d, f=None):
    X = rng.random((n, d))
    y = np.sin(6 * X).sum(axis=1) if f is None else f(X)
    return Dataset(X, y)


@pytest.fixture(scope="module")
def model2d():
    return fit(random_data(make_rng(1), 8, 2), rng=make_rng(2))


def test_kernel_matches_dense():
    rng = make_rng(0)
    A, B = rng.random((5, 3)), rng.random((4, 3))
    ls = np.array([0.3, 0.7, 1.5])
    assert np.allclose(matern52(A, B, ls, 2.0), matern52_dense(A, B, ls, 2.0), atol=1e-14)


def test_empty_posterior_is_prior():
    m = fit(Dataset.empty(2))
    Q = make_rng(0).random((4, 2))
    post = posterior(m, Q)
    assert np.allclose(post.mean, 0.0)
    assert np.allclose(post.var, m.output_scale)
    assert np.allclose(post.cov, matern52_dense(Q, Q, m.params.lengthscales, m.params.output_scale))


def test_single_point_interpolates():
    x0, y0 = np.array([[0.3, 0.6]]), np.array([2.5])
    m = fit(Dataset(x0, y0))
    assert m.params.noise_variance == NOISE_FLOOR
    mu, var = m.mean_var(x0)
    assert abs(mu[0] - y0[0]) <= 1e-6 * abs(y0[0])
    assert var[0] <= 1e-6 * m.output_scale


def test_lml_matches_dense():
    data = random_data(make_rng(3), 8, 2)
    p = KernelParams(np.array([0.4, 0.9]), 1.3, 1e-3)
    assert abs(log_marginal_likelihood(data, p) - dense_lml(data.X, data.y, p)) < 1e-8


def test_posterior_matches_dense(model2d):
    Q = make_rng(4).random((5, 2))
    post = posterior(model2d, Q)
    mean, cov = dense_posterior(model2d, Q)
    assert np.max(np.abs(post.mean - mean)) < 1e-8
    assert np.max(np.abs(post.cov - cov)) < 1e-8


def test_posterior_psd_and_below_prior(model2d):
    Q = uniform_points(make_rng(5), 200, 2)
    post = posterior(model2d, Q)
    assert np.allclose(post.cov, post.cov.T)
    assert np.linalg.eigvalsh(post.cov).min() >= -1e-8
    assert np.all(post.var <= model2d.output_scale + 1e-9)


def test_factorization_reproduces_gram(model2d):
    K = matern52(model2d.data.X, model2d.data.X, model2d.params.lengthscales, model2d.params.output_scale)
    K[np.diag_indices_from(K)] += model2d.noise_variance
    assert np.linalg.norm(model2d.L @ model2d.L.T - K) <= 1e-10 * np.linalg.norm(K)


def test_dimension_mismatch(model2d):
    with pytest.raises(InvalidDimensionError):
        posterior(model2d, np.zeros((1, 3)))


def test_fit_order_invariant():
    data = random_data(make_rng(6), 10, 3)
    perm = make_rng(7).permutation(10)
    a = fit(data, rng=make_rng(8))
    b = fit(Dataset(data.X[perm], data.y[perm]), rng=make_rng(8))
    Q = make_rng(9).random((20, 3))
    ma, va = a.mean_var(Q)
    mb, vb = b.mean_var(Q)
    assert np.max(np.abs(ma - mb)) < 1e-10 and np.max(np.abs(va - vb)) < 1e-10


def test_fit_improves_on_default():
    data = random_data(make_rng(10), 20, 2)
    m = fit(data, rng=make_rng(0))
    ys = (data.y - m.y_shift) / m.y_scale
    assert log_marginal_likelihood(data, m.params, m.y_shift, m.y_scale) >= \
        log_marginal_likelihood(data, KernelParams.default(2), m.y_shift, m.y_scale) - 1e-6
    assert np.isfinite(ys).all()


def test_duplicates_absorbed_by_noise_floor():
    data = Dataset(np.array([[0.5], [0.5]]), np.array([0.0, 1.0]))
    m = fit(data, KernelParams(np.array([0.3]), 1.0, NOISE_FLOOR))
    assert np.isclose(m.mean(np.array([[0.5]]))[0], 0.5)


def test_jitter_escalates_on_singular_gram():
    K = np.ones((3, 3))
    L, jitter = _cholesky_jittered(K)
    assert jitter > 0 and np.allclose(L @ L.T, K + jitter * np.eye(3))


def test_jitter_exhausted_raises():
    with pytest.raises(GPError):
        sample_mvn(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), make_rng(0))


def test_joint_sample_degenerate_point():
    m = fit(Dataset(np.array([[0.4]]), np.array([1.0])))
    mu, var = m.mean_var(np.array([[0.4]]))
    out = joint_sample(m, np.array([[0.4]]), make_rng(0))
    assert abs(out[0] - mu[0]) < 1e-2  # the floor noise leaves a sliver of variance
    empty_var = fit(Dataset(np.array([[0.4]]), np.array([1.0])), KernelParams(np.array([0.3]), 1.0, NOISE_FLOOR))
    assert np.isfinite(joint_sample(empty_var, np.array([[0.4]]), make_rng(1))).all()


def test_joint_sample_repeated_points_equal(model2d):
    Q = np.array([[0.2, 0.3], [0.2, 0.3], [0.9, 0.1]])
    draws = joint_sample(model2d, Q, make_rng(0), size=50)
    assert np.array_equal(draws[:, 0], draws[:, 1])


def test_joint_sample_moments(model2d):
    Q = np.array([[0.1, 0.2], [0.15, 0.25], [0.8, 0.7]])
    post = posterior(model2d, Q)
    n = 100_000
    Y = joint_sample(model2d, Q, make_rng(11), size=n)
    C = np.cov(Y.T)
    se_mean = np.sqrt(post.var / n)
    assert np.all(np.abs(Y.mean(axis=0) - post.mean) < 3 * se_mean + 1e-12)
    sd = np.sqrt(np.diag(post.cov))
    se_cov = np.sqrt((np.outer(sd, sd) ** 2 + post.cov**2) / n)
    assert np.all(np.abs(C - post.cov) < 3 * se_cov + 1e-12)


def test_conditional_variance_empty_pending(model2d):
    Q = make_rng(12).random((6, 2))
    assert np.allclose(conditional_variance(model2d, Q, []), posterior(model2d, Q).var, atol=1e-14)


def test_conditional_variance_at_pending(model2d):
    m = fit(model2d.data, KernelParams(model2d.params.lengthscales, 1.0, NOISE_FLOOR))
    Q = make_rng(13).random((3, 2))
    v = conditional_variance(m, Q, Q[:1])
    assert v[0] <= 1e-6 * m.output_scale


def test_conditional_variance_matches_refit(model2d):
    rng = make_rng(14)
    Q, P = rng.random((5, 2)), rng.random((3, 2))
    _, cov = dense_posterior(model2d, Q, extra_X=P)
    assert np.max(np.abs(conditional_variance(model2d, Q, P) - np.diag(cov))) < 1e-8
    refit = model2d.condition_on(P, rng.normal(size=3) * 100)
    assert np.max(np.abs(conditional_variance(model2d, Q, P) - refit.mean_var(Q)[1])) < 1e-8


def test_argmax_mean_empty_in_box():
    x = argmax_mean(fit(Dataset.empty(3)), 3, rng=make_rng(0))
    assert x.shape == (3,) and np.all((0 <= x) & (x <= 1))


def test_argmax_mean_single_point():
    m = fit(Dataset(np.array([[0.37]]), np.array([1.0])))
    assert abs(argmax_mean(m, 1, rng=make_rng(0))[0] - 0.37) < 0.05


def test_argmax_mean_grid_oracle():
    data = random_data(make_rng(15), 5, 1, f=lambda X: np.sin(9 * X[:, 0]) + X[:, 0])
    m = fit(data, rng=make_rng(0))
    grid = np.linspace(0, 1, 4096)[:, None]
    x = argmax_mean(m, 1, rng=make_rng(1))
    assert m.mean(x[None])[0] >= m.mean(grid).max() - 1e-4


def test_mean_var_gradients(model2d):
    x = np.array([0.31, 0.62])
    mu, var, gmu, gvar = model2d.mean_var_grad(x)
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        mp, vp = model2d.mean_var(x + e)
        mm, vm = model2d.mean_var(x - e)
        assert abs((mp[0] - mm[0]) / (2 * h) - gmu[i]) < 1e-4 * max(1, abs(gmu[i]))
        assert abs((vp[0] - vm[0]) / (2 * h) - gvar[i]) < 1e-4 * max(1, abs(gvar[i]))


def test_pair_samples_match_joint(model2d):
    rng = make_rng(16)
    a, b = np.array([[0.2, 0.5]]), np.array([[0.25, 0.45]])
    n = 40_000
    ya, yb = model2d.pair_samples(np.repeat(a, n, 0), np.repeat(b, n, 0), rng)
    post = posterior(model2d, np.vstack([a, b]))
    C = np.cov(np.vstack([ya, yb]))
    assert np.allclose(C, post.cov, atol=6 * post.cov.max() / np.sqrt(n))
    assert np.allclose([ya.mean(), yb.mean()], post.mean, atol=6 * np.sqrt(post.var.max() / n))


def test_rff_covariance_close(model2d):
    Q = make_rng(17).random((4, 2))
    draws = rff_posterior_sampler(model2d, make_rng(18), size=4000, num_features=2048)(Q)
    post = posterior(model2d, Q)
    assert np.max(np.abs(np.cov(draws.T) - post.cov)) < 0.15 * post.var.max() + 1e-9
    assert np.max(np.abs(draws.mean(0) - post.mean)) < 0.1 * np.sqrt(post.var.max()) + 1e-6


def test_condition_on_keeps_params(model2d):
    m = model2d.condition_on(np.array([[0.5, 0.5]]), np.array([0.0]))
    assert m.params == model2d.params and m.n == model2d.n + 1
    assert m.y_shift == model2d.y_shift


def test_build_model_rejects_wrong_params():
    with pytest.raises(InvalidDimensionError):
        build_model(Dataset.empty(2), KernelParams.default(3), 0.0, 1.0)
