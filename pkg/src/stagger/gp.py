"""Gaussian-process surrogate with a Matérn-5/2 ARD kernel.

Targets are standardized before fitting; every public quantity (means,
covariances, samples) is reported in objective units.  Hyperparameters are
fit by multi-start L-BFGS-B ascent of the log marginal likelihood using
analytic gradients.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .domain import InvalidDimensionError, as_points, check_dim, uniform_points
from .optim import multistart_maximize

log = logging.getLogger(__name__)

SQRT5 = math.sqrt(5.0)
NOISE_FLOOR = 1e-6
MAX_JITTER = 1e-2

LENGTHSCALE_BOUNDS = (1e-2, 1e2)
OUTPUT_SCALE_BOUNDS = (1e-2, 1e2)
# extra noise above the floor
NOISE_EXTRA_BOUNDS = (1e-9, 0.1)
# weak log-normal priors: each lengthscale centred on 0.5*sqrt(d), noise above the floor on 1e-4
LENGTHSCALE_PRIOR_SD = 1.5
NOISE_PRIOR_CENTER = math.log(1e-4)
NOISE_PRIOR_SD = 2.0


class GPError(RuntimeError):
    """Factorization failed even after jitter escalation."""


@dataclass(frozen=True)
class KernelParams:
    """Kernel hyperparameters, in standardized-target units."""

    lengthscales: np.ndarray
    output_scale: float = 1.0
    noise_variance: float = NOISE_FLOOR

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if ls.ndim != 1 or ls.size < 1 or np.any(ls <= 0):
            raise ValueError("lengthscales must be a non-empty vector of positive reals")
        if not self.output_scale > 0:
            raise ValueError("output_scale must be positive")
        if self.noise_variance < NOISE_FLOOR * (1 - 1e-12):
            raise ValueError(f"noise_variance must be at least the jitter floor {NOISE_FLOOR}")

    @classmethod
    def default(cls, d: int) -> "KernelParams":
        return cls(np.full(check_dim(d), 0.25 * math.sqrt(d)), 1.0, NOISE_FLOOR)

    @property
    def d(self) -> int:
        return self.lengthscales.size


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.ndim != 2:
            raise InvalidDimensionError(f"X must have shape (n, d), got {X.shape}")
        check_dim(X.shape[1])
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} points but {y.shape[0]} values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def empty(cls, d: int) -> "Dataset":
        return cls(np.empty((0, check_dim(d))), np.empty(0))

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def append(self, X, y) -> "Dataset":
        X = as_points(X, self.d)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return Dataset(np.vstack([self.X, X]), np.concatenate([self.y, y]))


@dataclass(frozen=True)
class PosteriorGaussian:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def var(self) -> np.ndarray:
        return np.clip(np.diag(self.cov), 0.0, None)


def _scaled_sqdist(X1: np.ndarray, X2: np.ndarray, ls: np.ndarray) -> np.ndarray:
    A = X1 / ls
    B = X2 / ls
    d2 = A @ B.T
    d2 *= -2.0
    d2 += (A * A).sum(1)[:, None]
    d2 += (B * B).sum(1)[None, :]
    return np.maximum(d2, 0.0, out=d2)


def matern52(X1: np.ndarray, X2: np.ndarray, lengthscales: np.ndarray, output_scale: float = 1.0) -> np.ndarray:
    d2 = _scaled_sqdist(X1, X2, lengthscales)
    r = np.sqrt(d2)
    r *= SQRT5
    e = np.exp(-r)
    r += 1.0
    r += (5.0 / 3.0) * d2
    r *= e
    if output_scale != 1.0:
        r *= output_scale
    return r


def _cholesky_jittered(K: np.ndarray, jitter: float = 0.0, scale: float = 1.0) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``K + jitter*scale*I``, escalating jitter x10 on failure."""
    diag = np.diag_indices_from(K)
    base = K[diag].copy()
    while True:
        try:
            A = K.copy()
            A[diag] = base + jitter * scale
            return cholesky(A, lower=True, check_finite=False, overwrite_a=True), jitter
        except np.linalg.LinAlgError:
            jitter = NOISE_FLOOR if jitter == 0.0 else jitter * 10.0
            if jitter > MAX_JITTER * (1 + 1e-9):
                raise GPError("covariance is not positive definite after jitter escalation") from None
            log.debug("cholesky failed, retrying with jitter %.1e", jitter)


def sample_mvn(mean: np.ndarray, cov: np.ndarray, rng: np.random.Generator, size: int | None = None,
               jitter_scale: float = 1.0) -> np.ndarray:
    """Draw from N(mean, cov).

    Coordinates with non-positive variance are returned at their mean.  The
    rest are drawn through a Cholesky factor with jitter escalation.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    m = mean.shape[0]
    shape = (m,) if size is None else (size, m)
    out = np.broadcast_to(mean, shape).copy()
    live = np.diag(cov) > 0
    if live.any():
        idx = np.flatnonzero(live)
        L, _ = _cholesky_jittered(cov[np.ix_(idx, idx)], jitter=NOISE_FLOOR if len(idx) > 1 else 0.0,
                                  scale=jitter_scale)
        z = rng.standard_normal((len(idx),) if size is None else (len(idx), size))
        draw = L @ z
        if size is None:
            out[idx] += draw
        else:
            out[:, idx] += draw.T
    return out


@dataclass(frozen=True, eq=False)
class GpModel:
    """A fitted GP.  Immutable; safe to share between readers."""

    data: Dataset
    params: KernelParams
    y_shift: float
    y_scale: float
    L: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    jitter: float = 0.0

    @property
    def d(self) -> int:
        return self.data.d

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def output_scale(self) -> float:
        """Prior variance in objective units."""
        return self.params.output_scale * self.y_scale**2

    @property
    def noise_variance(self) -> float:
        return self.params.noise_variance + self.jitter

    def kernel(self, X1, X2) -> np.ndarray:
        return matern52(X1, X2, self.params.lengthscales, self.params.output_scale)

    def _check(self, Q) -> np.ndarray:
        return as_points(Q, self.d)

    def _solve_factor(self, Kxq: np.ndarray) -> np.ndarray:
        return solve_triangular(self.L, Kxq, lower=True, check_finite=False)

    def _norm_posterior(self, Q: np.ndarray, full_cov: bool):
        """Posterior mean and (co)variance in standardized units."""
        prior_var = self.params.output_scale
        if self.n == 0:
            mu = np.zeros(len(Q))
            cov = self.kernel(Q, Q) if full_cov else np.full(len(Q), prior_var)
            return mu, cov
        Kxq = self.kernel(self.data.X, Q)
        mu = Kxq.T @ self.alpha
        V = self._solve_factor(Kxq)
        if full_cov:
            cov = self.kernel(Q, Q) - V.T @ V
            cov = 0.5 * (cov + cov.T)
        else:
            cov = np.clip(prior_var - (V * V).sum(0), 0.0, None)
        return mu, cov

    def mean_var(self, Q) -> tuple[np.ndarray, np.ndarray]:
        """Marginal posterior mean and variance at each row of ``Q``."""
        mu, var = self._norm_posterior(self._check(Q), full_cov=False)
        return self.y_shift + self.y_scale * mu, self.y_scale**2 * var

    def mean(self, Q) -> np.ndarray:
        Q = self._check(Q)
        if self.n == 0:
            return np.full(len(Q), self.y_shift)
        return self.y_shift + self.y_scale * (self.kernel(self.data.X, Q).T @ self.alpha)

    def _kernel_grad(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """k(x, X) and its Jacobian with respect to x, shape (n, d)."""
        ls = self.params.lengthscales
        diff = (x[None, :] - self.data.X) / ls
        r = np.sqrt((diff * diff).sum(1))
        e = np.exp(-SQRT5 * r)
        k = self.params.output_scale * (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * e
        dk = -self.params.output_scale * (5.0 / 3.0) * ((1.0 + SQRT5 * r) * e)[:, None] * diff / ls
        return k, dk

    def mean_grad(self, x) -> tuple[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if self.n == 0:
            return self.y_shift, np.zeros(self.d)
        k, dk = self._kernel_grad(x)
        return self.y_shift + self.y_scale * float(k @ self.alpha), self.y_scale * (dk.T @ self.alpha)

    def mean_var_grad(self, x) -> tuple[float, float, np.ndarray, np.ndarray]:
        """Mean, variance and their gradients at a single point."""
        x = np.asarray(x, dtype=float)
        s2 = self.y_scale**2
        if self.n == 0:
            z = np.zeros(self.d)
            return self.y_shift, s2 * self.params.output_scale, z, z.copy()
        k, dk = self._kernel_grad(x)
        u = cho_solve((self.L, True), k, check_finite=False)
        mu = self.y_shift + self.y_scale * float(k @ self.alpha)
        var = s2 * max(self.params.output_scale - float(k @ u), 0.0)
        return mu, var, self.y_scale * (dk.T @ self.alpha), -2.0 * s2 * (dk.T @ u)

    def condition_on(self, X, y) -> "GpModel":
        """Add observations keeping hyperparameters and target normalization fixed."""
        return build_model(self.data.append(X, y), self.params, self.y_shift, self.y_scale)

    def pair_samples(self, A, B, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """One joint draw at each pair ``(A[i], B[i])``; pairs are independent of each other."""
        A = self._check(A)
        B = self._check(B)
        m = len(A)
        sf2 = self.params.output_scale
        kab = matern52_pairwise(A, B, self.params.lengthscales, sf2)
        if self.n == 0:
            mu_a = mu_b = np.zeros(m)
            va = vb = np.full(m, sf2)
            cab = kab
        else:
            Kxa = self.kernel(self.data.X, A)
            Kxb = self.kernel(self.data.X, B)
            mu_a = Kxa.T @ self.alpha
            mu_b = Kxb.T @ self.alpha
            Va = self._solve_factor(Kxa)
            Vb = self._solve_factor(Kxb)
            va = np.clip(sf2 - (Va * Va).sum(0), 0.0, None)
            vb = np.clip(sf2 - (Vb * Vb).sum(0), 0.0, None)
            cab = kab - (Va * Vb).sum(0)
        z1 = rng.standard_normal(m)
        z2 = rng.standard_normal(m)
        sa = np.sqrt(va)
        safe = sa > 0
        rho = np.where(safe, cab / np.where(safe, sa, 1.0), 0.0)
        resid = np.sqrt(np.clip(vb - rho * rho, 0.0, None))
        ya = mu_a + sa * z1
        yb = mu_b + rho * z1 + resid * z2
        return self.y_shift + self.y_scale * ya, self.y_shift + self.y_scale * yb


def matern52_pairwise(A: np.ndarray, B: np.ndarray, ls: np.ndarray, output_scale: float = 1.0) -> np.ndarray:
    diff = (A - B) / ls
    r = np.sqrt((diff * diff).sum(1))
    return output_scale * (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * np.exp(-SQRT5 * r)


def build_model(data: Dataset, params: KernelParams, y_shift: float, y_scale: float) -> GpModel:
    if params.d != data.d:
        raise InvalidDimensionError(f"kernel has {params.d} lengthscales but data has dimension {data.d}")
    if data.n == 0:
        return GpModel(data, params, y_shift, y_scale, np.empty((0, 0)), np.empty(0))
    K = matern52(data.X, data.X, params.lengthscales, params.output_scale)
    K[np.diag_indices_from(K)] += params.noise_variance
    L, jitter = _cholesky_jittered(K)
    alpha = cho_solve((L, True), (data.y - y_shift) / y_scale, check_finite=False)
    return GpModel(data, params, float(y_shift), float(y_scale), L, alpha, jitter)


def _normalization(y: np.ndarray) -> tuple[float, float]:
    if y.size == 0:
        return 0.0, 1.0
    shift = float(y.mean())
    scale = float(y.std()) if y.size > 1 else 0.0
    if not scale > 1e-12 * max(1.0, abs(shift)):
        scale = 1.0
    return shift, scale


def _pack(params: KernelParams) -> np.ndarray:
    return np.concatenate([
        np.log(params.lengthscales),
        [math.log(params.output_scale), math.log(max(params.noise_variance - NOISE_FLOOR, NOISE_EXTRA_BOUNDS[0]))],
    ])


def _unpack(theta: np.ndarray) -> KernelParams:
    return KernelParams(np.exp(theta[:-2]), float(np.exp(theta[-2])), NOISE_FLOOR + float(np.exp(theta[-1])))


def _theta_bounds(d: int) -> list[tuple[float, float]]:
    lb = [tuple(np.log(LENGTHSCALE_BOUNDS))] * d
    return lb + [tuple(np.log(OUTPUT_SCALE_BOUNDS)), tuple(np.log(NOISE_EXTRA_BOUNDS))]


def log_marginal_likelihood(data: Dataset, params: KernelParams, y_shift: float = 0.0, y_scale: float = 1.0) -> float:
    """Log marginal likelihood of the standardized targets."""
    return -_neg_lml_and_grad(_pack(params), _sqdiffs(data.X), (data.y - y_shift) / y_scale, grad=False)


def _sqdiffs(X: np.ndarray) -> np.ndarray:
    """Per-dimension squared differences, flattened to shape (n*n, d)."""
    n, d = X.shape
    return ((X[:, None, :] - X[None, :, :]) ** 2).reshape(n * n, d)


def _neg_lml_and_grad(theta: np.ndarray, D2: np.ndarray, y: np.ndarray, grad: bool = True):
    n = y.shape[0]
    d = D2.shape[1]
    inv_ls2 = np.exp(-2.0 * theta[:d])
    sf2 = math.exp(theta[d])
    extra = math.exp(theta[d + 1])
    r = np.sqrt(D2 @ inv_ls2).reshape(n, n)
    e = np.exp(-SQRT5 * r)
    kbase = (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * e
    K = sf2 * kbase
    K[np.diag_indices(n)] += NOISE_FLOOR + extra
    try:
        L = cholesky(K, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return (1e25, np.zeros_like(theta)) if grad else 1e25
    alpha = cho_solve((L, True), y, check_finite=False)
    nll = 0.5 * y @ alpha + np.log(np.diag(L)).sum() + 0.5 * n * math.log(2 * math.pi)
    if not grad:
        return nll
    W = np.outer(alpha, alpha) - cho_solve((L, True), np.eye(n), check_finite=False)
    g = np.empty_like(theta)
    dk_dls = sf2 * (5.0 / 3.0) * (1.0 + SQRT5 * r) * e
    g[:d] = -0.5 * ((W * dk_dls).reshape(-1) @ D2) * inv_ls2
    g[d] = -0.5 * np.sum(W * sf2 * kbase)
    g[d + 1] = -0.5 * extra * np.trace(W)
    return nll, g


def _lengthscale_prior_center(d: int) -> float:
    return math.log(0.5 * math.sqrt(d))


def _neg_log_posterior(theta: np.ndarray, D2: np.ndarray, y: np.ndarray, center: float):
    nll, g = _neg_lml_and_grad(theta, D2, y)
    d = D2.shape[1]
    z = (theta[:d] - center) / LENGTHSCALE_PRIOR_SD
    zn = (theta[d + 1] - NOISE_PRIOR_CENTER) / NOISE_PRIOR_SD
    g = g.copy()
    g[:d] += z / LENGTHSCALE_PRIOR_SD
    g[d + 1] += zn / NOISE_PRIOR_SD
    return nll + 0.5 * float(z @ z) + 0.5 * zn * zn, g


def fit(data: Dataset, params: KernelParams | None = None, *, rng: np.random.Generator | None = None,
        n_restarts: int = 3, maxiter: int = 100) -> GpModel:
    """Fit a GP to ``data``.

    With ``params`` given, hyperparameters are taken as-is.  Otherwise the log
    marginal likelihood, plus weak log-normal penalties on the lengthscales
    and the noise, is maximized from the default start plus ``n_restarts``
    random log-space starts.  The penalties stop small datasets from being
    explained by vanishing lengthscales or by pure noise.  Fewer than two measurements
    carry no information about the hyperparameters, so the defaults are used.
    The dataset is put in a canonical (lexicographic) order first so the
    result does not depend on the order measurements arrived in.
    """
    order = np.lexsort(data.X.T[::-1]) if data.n else np.arange(0)
    data = Dataset(data.X[order], data.y[order])
    y_shift, y_scale = _normalization(data.y)
    if params is not None:
        return build_model(data, params, y_shift, y_scale)
    d = data.d
    if data.n < 2:
        return build_model(data, KernelParams.default(d), y_shift, y_scale)

    rng = np.random.default_rng(0) if rng is None else rng
    ynorm = (data.y - y_shift) / y_scale
    D2 = _sqdiffs(data.X)
    center = _lengthscale_prior_center(d)
    bounds = _theta_bounds(d)
    starts = [_pack(KernelParams.default(d))]
    for _ in range(n_restarts):
        starts.append(np.concatenate([
            rng.uniform(np.log(0.05), np.log(2.0), d) + 0.5 * math.log(d),
            [rng.uniform(np.log(0.3), np.log(3.0)), rng.uniform(np.log(1e-8), np.log(1e-2))],
        ]))
    best_theta, best_val = starts[0], np.inf
    for theta0 in starts:
        theta0 = np.clip(theta0, [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(_neg_log_posterior, theta0, args=(D2, ynorm, center), jac=True, method="L-BFGS-B",
                       bounds=bounds, options={"maxiter": maxiter})
        if np.isfinite(res.fun) and res.fun < best_val:
            best_theta, best_val = res.x, res.fun
    return build_model(data, _unpack(best_theta), y_shift, y_scale)


def posterior(model: GpModel, query) -> PosteriorGaussian:
    Q = model._check(query)
    if len(Q) == 0:
        raise ValueError("query must be non-empty")
    mu, cov = model._norm_posterior(Q, full_cov=True)
    return PosteriorGaussian(model.y_shift + model.y_scale * mu, model.y_scale**2 * cov)


def joint_sample(model: GpModel, query, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw from the joint posterior at ``query``.

    Repeated query points receive identical values.
    """
    Q = model._check(query)
    if len(Q) == 0:
        raise ValueError("query must be non-empty")
    uniq, inverse = np.unique(Q, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    mu, cov = model._norm_posterior(uniq, full_cov=True)
    draw = sample_mvn(mu, cov, rng, size=size)
    draw = draw[..., inverse]
    return model.y_shift + model.y_scale * draw


def conditional_variance(model: GpModel, query, pending) -> np.ndarray:
    """Posterior variance at ``query`` after hypothetical noisy observations at ``pending``.

    Observed values do not enter; only locations matter.
    """
    Q = model._check(query)
    P = np.asarray(pending, dtype=float).reshape(-1, model.d) if np.size(pending) else np.empty((0, model.d))
    if len(P) == 0:
        return model.mean_var(Q)[1]
    Z = np.vstack([Q, P])
    _, S = model._norm_posterior(Z, full_cov=True)
    m = len(Q)
    Sqq = np.diag(S)[:m]
    Sqp = S[:m, m:]
    Spp = S[m:, m:] + model.noise_variance * np.eye(len(P))
    Lp, _ = _cholesky_jittered(Spp)
    W = solve_triangular(Lp, Sqp.T, lower=True, check_finite=False)
    return model.y_scale**2 * np.clip(Sqq - (W * W).sum(0), 0.0, None)


def argmax_mean(model: GpModel, d: int, budget: tuple[int, int] = (8, 64), rng: np.random.Generator | None = None,
                raw_samples: int = 1024) -> np.ndarray:
    """Approximate maximizer of the posterior mean over the unit box.

    ``budget`` is ``(starts, steps)``.  The best measured point is the first
    start; the rest are the best of ``raw_samples`` uniform draws.  Ties go
    to the earliest start.
    """
    if d != model.d:
        raise InvalidDimensionError(f"model has dimension {model.d}, asked for {d}")
    n_starts, steps = budget
    rng = np.random.default_rng(0) if rng is None else rng
    raw = uniform_points(rng, raw_samples, d)
    if model.n == 0:
        return raw[0]
    lead = model.data.X[[int(np.argmax(model.data.y))]]
    raw_mu = model.mean(raw)
    top = raw[np.argsort(-raw_mu, kind="stable")[: max(n_starts - 1, 0)]]
    starts = np.vstack([lead, top])
    x, _ = multistart_maximize(model.mean_grad, starts, maxiter=steps)
    return x


def rff_posterior_sampler(model: GpModel, rng: np.random.Generator, size: int, num_features: int = 1024):
    """Approximate posterior function draws via random Fourier features.

    The prior is a random-feature expansion of the Matérn-5/2 kernel; each
    draw is conditioned on the data by a pathwise update.  Returns a callable
    mapping ``(m, d)`` points to a ``(size, m)`` array, consistent across calls.
    """
    d = model.d
    p = model.params
    g = rng.chisquare(5.0, size=num_features)
    omega = rng.standard_normal((num_features, d)) / p.lengthscales * np.sqrt(5.0 / g)[:, None]
    phase = rng.uniform(0.0, 2 * np.pi, num_features)
    w = rng.standard_normal((num_features, size))
    amp = math.sqrt(2.0 * p.output_scale / num_features)

    def prior(Q):
        return (amp * np.cos(Q @ omega.T + phase)) @ w

    if model.n:
        X = model.data.X
        eps = rng.standard_normal((model.n, size)) * math.sqrt(model.noise_variance)
        ynorm = ((model.data.y - model.y_shift) / model.y_scale)[:, None]
        v = cho_solve((model.L, True), ynorm - prior(X) - eps, check_finite=False)
    else:
        v = None

    def sample(Q):
        Q = model._check(Q)
        f = prior(Q)
        if v is not None:
            f = f + model.kernel(Q, X) @ v
        return (model.y_shift + model.y_scale * f).T

    return sample
