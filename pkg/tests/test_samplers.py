import inspect
import math

import numpy as np
import pytest
from scipy.stats import chisquare, multivariate_normal

from oracles import binned_tv, grid_pstar
from stagger import Dataset, argmax_mean, fit, posterior
from stagger.domain import make_rng
from stagger.samplers import (
    DEFAULT_K, STS_VARIANTS, PssConfig, StsConfig, TsConfig, chord_extent, perturb, pss_sample, pss_samples,
    stagger_length, sts_sample, sts_samples, ts_sample, ts_samples,
)


class FixedU:
    """Stands in for a generator whose ``random`` always returns ``u``."""

    def __init__(self, u):
        self.u = u

    def random(self, size=None):
        return self.u if size is None else np.full(size, self.u)


@pytest.mark.parametrize("u, s", [(0.0, 1.0), (1.0, 1e-6), (0.5, 1e-3)])
def test_stagger_length_endpoints(u, s):
    assert math.isclose(stagger_length(FixedU(u)), s, rel_tol=1e-12)


def test_stagger_length_log_uniform():
    s = stagger_length(make_rng(1), DEFAULT_K, 100_000)
    assert s.min() >= 1e-6 and s.max() <= 1.0
    counts = np.histogram(np.log10(s), bins=6, range=(-6, 0))[0]
    assert chisquare(counts).pvalue > 0.001


def test_stagger_length_is_stateless():
    assert list(inspect.signature(stagger_length).parameters) == ["rng", "k", "size"]


@pytest.mark.parametrize("s, expected", [(0.0, [0.2, 0.7]), (1.0, [0.9, 0.1])])
def test_perturb_endpoints(s, expected):
    assert np.allclose(perturb(np.array([0.2, 0.7]), np.array([0.9, 0.1]), s), expected)


def test_perturb_interpolates():
    assert np.allclose(perturb(np.zeros(2), np.ones(2), 0.25), [0.25, 0.25])


def uniform_gof(x):
    return chisquare(np.histogram(x, bins=16, range=(0, 1))[0]).pvalue


@pytest.mark.parametrize("draw", [
    lambda m, r: sts_samples(m, 1, StsConfig(), r, n=10_000),
    lambda m, r: ts_samples(m, 1, TsConfig(), r, n=10_000),
])
def test_empty_model_uniform(draw):
    assert uniform_gof(draw(fit(Dataset.empty(1)), make_rng(1))[:, 0]) > 0.001


def test_sts_M0_is_argmax_mean(three_point_model):
    a = sts_sample(three_point_model, 1, StsConfig(M=0), make_rng(3))
    b = argmax_mean(three_point_model, 1, rng=make_rng(3))
    assert np.array_equal(a, b)


def test_sts_repeatable(three_point_model):
    a = sts_samples(three_point_model, 1, StsConfig(), make_rng(4), n=5)
    assert np.array_equal(a, sts_samples(three_point_model, 1, StsConfig(), make_rng(4), n=5))


@pytest.mark.parametrize("name", sorted(STS_VARIANTS))
def test_variants_in_bounds(name):
    m = fit(Dataset(make_rng(0).random((6, 3)), make_rng(1).normal(size=6)), rng=make_rng(2))
    X = sts_samples(m, 3, STS_VARIANTS[name], make_rng(3), n=50)
    assert X.shape == (50, 3) and np.all((X >= 0) & (X <= 1))


def test_variant_flags():
    assert STS_VARIANTS["sts"] == StsConfig()
    assert STS_VARIANTS["sts-ui"].init_mode == "uniform"
    assert STS_VARIANTS["sts-m"].init_mode == "best-measured"
    assert STS_VARIANTS["sts-t"].init_mode == "thompson-at-measured"
    assert STS_VARIANTS["sts-ns"].proposal_mode == "uniform"


def test_bad_config():
    with pytest.raises(ValueError):
        StsConfig(M=-1)
    with pytest.raises(ValueError):
        StsConfig(init_mode="nope")


def test_acceptance_is_thompson_pair(three_point_model):
    m = three_point_model
    a, b = np.array([[0.45]]), np.array([[0.6]])
    n = 10_000
    ya, yb = m.pair_samples(np.repeat(a, n, 0), np.repeat(b, n, 0), make_rng(5))
    post = posterior(m, np.vstack([a, b]))
    diff_var = post.cov[0, 0] + post.cov[1, 1] - 2 * post.cov[0, 1]
    analytic = 1 - multivariate_normal(0, diff_var).cdf(post.mean[0] - post.mean[1])
    assert abs((yb > ya).mean() - analytic) < 0.02


def test_ts_single_candidate(three_point_model):
    cfg = TsConfig(num_candidates=1)
    rng = make_rng(6)
    x = ts_sample(three_point_model, 1, cfg, rng)
    assert np.array_equal(x, make_rng(6).random((1, 1))[0])


def test_ts_tv(three_point_model):
    ref = grid_pstar(three_point_model, make_rng(7))
    X = ts_samples(three_point_model, 1, TsConfig(num_candidates=4096), make_rng(8), n=4096)
    assert binned_tv(X, ref) < 0.1


def test_ts_rff_branch_in_bounds(three_point_model):
    X = ts_samples(three_point_model, 1, TsConfig(num_candidates=5000), make_rng(9), n=16)
    assert np.all((X >= 0) & (X <= 1))


def test_chord_axis():
    steps = PssConfig().bisection_steps
    x = np.array([[0.5, 0.5]])
    up = chord_extent(x, np.array([[1.0, 0.0]]), steps)[0]
    down = -chord_extent(x, np.array([[-1.0, 0.0]]), steps)[0]
    assert abs(up - 0.5) <= 2.0**-steps and abs(down + 0.5) <= 2.0**-steps


def test_pss_in_bounds():
    m = fit(Dataset(make_rng(0).random((5, 4)), make_rng(1).normal(size=5)), rng=make_rng(2))
    X = pss_samples(m, 4, PssConfig(iterations=30), make_rng(3), n=40)
    assert np.all((X >= 0) & (X <= 1))
    assert pss_sample(m, 4, PssConfig(iterations=5), make_rng(4)).shape == (4,)


@pytest.mark.xfail(strict=True, reason="single-draw acceptance concentrates the chain; stationary law is about 0.21 TV from p*")
def test_sts_tv(three_point_model):
    ref = grid_pstar(three_point_model, make_rng(10))
    assert binned_tv(sts_samples(three_point_model, 1, StsConfig(), make_rng(11), n=4096), ref) < 0.15


@pytest.mark.xfail(strict=True, reason="same acceptance rule as the stagger chain; lands near 0.25-0.3 TV")
def test_pss_tv(three_point_model):
    ref = grid_pstar(three_point_model, make_rng(12))
    assert binned_tv(pss_samples(three_point_model, 1, PssConfig(), make_rng(13), n=4096), ref) < 0.2
