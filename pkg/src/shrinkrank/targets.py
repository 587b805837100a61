"""Benchmark target distributions.

Each target exposes an unnormalized log-density (``-inf`` outside the
support, never an exception) and its analytic gradient.
"""
import csv
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg
from scipy.special import expit

from ._validation import check_vector

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@dataclass(frozen=True)
class TargetDistribution:
    name: str
    dim: int
    log_density_fn: Callable = field(repr=False)
    grad_fn: Callable = field(repr=False)
    initial_point: np.ndarray = field(repr=False, default=None)
    info: dict = field(repr=False, default_factory=dict)

    def log_density(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"{self.name}: expected shape ({self.dim},), got {x.shape}")
        val = float(self.log_density_fn(x))
        # NaN means the model broke down at x; treat it as out of support
        return -math.inf if math.isnan(val) else val

    def grad_log_density(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"{self.name}: expected shape ({self.dim},), got {x.shape}")
        return np.asarray(self.grad_fn(x), dtype=np.float64)

    def default_initial_point(self):
        if self.initial_point is None:
            return np.zeros(self.dim)
        return np.array(self.initial_point, dtype=np.float64)


@dataclass(frozen=True)
class RegressionData:
    design: np.ndarray
    response: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        X = np.asarray(self.design, dtype=np.float64)
        y = np.asarray(self.response, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"design must be an n x k matrix with n, k >= 1, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"response has shape {y.shape}, expected ({X.shape[0]},)")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("regression data contain non-finite values")
        object.__setattr__(self, "design", X)
        object.__setattr__(self, "response", y)


@dataclass(frozen=True)
class EightSchoolsData:
    effects: np.ndarray
    std_errors: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.effects, dtype=np.float64)
        s = np.asarray(self.std_errors, dtype=np.float64)
        if y.shape != (8,) or s.shape != (8,):
            raise ValueError("eight-schools data need exactly 8 effects and 8 std_errors")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(s))):
            raise ValueError("eight-schools data contain non-finite values")
        if np.any(s <= 0):
            raise ValueError("std_errors must be strictly positive")
        object.__setattr__(self, "effects", y)
        object.__setattr__(self, "std_errors", s)


def load_eight_schools(path=None):
    """Read ``effects`` and ``std_errors`` arrays from a TOML file.

    Defaults to the copy of the classic SAT-coaching data shipped with the package.
    """
    if path is None:
        path = os.path.join(DATA_DIR, "eight_schools.toml")
    with open(path, "rb") as fh:
        cfg = tomllib.load(fh)
    try:
        return EightSchoolsData(cfg["effects"], cfg["std_errors"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing key {exc.args[0]!r}") from None


# -- Gaussian -----------------------------------------------------------------


def make_correlated_gaussian(p, rho):
    """Zero-mean Gaussian with unit variances and constant correlation ``rho``."""
    p = int(p)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    lower = -1.0 / (p - 1) if p > 1 else -math.inf
    if p == 1 and rho != 0:
        raise ValueError("rho must be 0 for a one-dimensional Gaussian")
    if p > 1 and not lower < rho < 1.0:
        raise ValueError(f"rho={rho} does not give a positive-definite matrix for p={p}")
    cov = np.full((p, p), float(rho))
    np.fill_diagonal(cov, 1.0)
    prec = np.linalg.inv(cov)

    def log_density(x):
        return -0.5 * x @ prec @ x

    def grad(x):
        return -(prec @ x)

    name = f"gaussian-{p}" if rho == 0 else f"correlated-gaussian-{p}-rho{rho:g}"
    return TargetDistribution(name, p, log_density, grad, np.zeros(p), {"covariance": cov})


# -- Gamma(2, 1) product ------------------------------------------------------


def make_gamma_product(p):
    """Product of ``p`` independent Gamma(2, 1) marginals."""
    p = int(p)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")

    def log_density(x):
        if np.any(x <= 0):
            return -math.inf
        return float(np.sum(np.log(x) - x))

    def grad(x):
        return 1.0 / x - 1.0

    return TargetDistribution(f"gamma-product-{p}", p, log_density, grad, np.ones(p))


# -- Eight Schools ------------------------------------------------------------


def make_eight_schools(data):
    """Centered hierarchical model over ``(theta_1..theta_8, mu, log tau)``.

    Uniform prior on ``mu`` and on ``tau``; the sampled coordinate is
    ``log tau``, so the log-Jacobian ``log tau`` is added to the density.
    """
    if not isinstance(data, EightSchoolsData):
        raise TypeError("data must be an EightSchoolsData instance")
    y = data.effects
    var = data.std_errors**2

    def log_density(z):
        theta, mu, log_tau = z[:8], z[8], z[9]
        if log_tau < -300.0:
            return -math.inf
        inv_tau2 = math.exp(-2.0 * log_tau) if log_tau < 300.0 else 0.0
        d = theta - mu
        return float(
            -0.5 * np.sum((y - theta) ** 2 / var)
            - 0.5 * np.sum(d * d) * inv_tau2
            - 7.0 * log_tau
        )

    def grad(z):
        theta, mu, log_tau = z[:8], z[8], z[9]
        inv_tau2 = math.exp(-2.0 * log_tau) if log_tau < 300.0 else 0.0
        d = theta - mu
        g = np.empty(10)
        g[:8] = (y - theta) / var - d * inv_tau2
        g[8] = np.sum(d) * inv_tau2
        g[9] = np.sum(d * d) * inv_tau2 - 7.0
        return g

    init = np.concatenate([np.full(8, y.mean()), [y.mean(), math.log(5.0)]])
    return TargetDistribution("eight-schools", 10, log_density, grad, init)


# -- logistic regression --------------------------------------------------------

PRIOR_VARIANCE = 100.0


def make_logistic_regression(data, name="logistic-regression"):
    """Logistic regression posterior over ``(intercept, coefficients)``.

    Each of the ``k + 1`` parameters has an independent N(0, 100) prior.
    """
    if not isinstance(data, RegressionData):
        raise TypeError("data must be a RegressionData instance")
    y = data.response
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("logistic regression responses must be 0 or 1")
    n, k = data.design.shape
    Xt = np.column_stack([np.ones(n), data.design])

    def log_density(beta):
        eta = Xt @ beta
        return float(y @ eta - np.sum(np.logaddexp(0.0, eta)) - 0.5 * beta @ beta / PRIOR_VARIANCE)

    def grad(beta):
        eta = Xt @ beta
        return Xt.T @ (y - expit(eta)) - beta / PRIOR_VARIANCE

    return TargetDistribution(name, k + 1, log_density, grad, np.zeros(k + 1))


def load_regression_csv(path, standardized=False):
    """Read a comma-separated file with a header row; the last column is the response."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read regression data {path!r}: {exc.strerror}") from None
    with fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) < 2:
        raise ValueError(f"{path}: need a header row and at least one data row")
    header, body = rows[0], rows[1:]
    if len(header) < 2:
        raise ValueError(f"{path}: need at least one covariate column and a response column")
    values = np.empty((len(body), len(header)))
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{i}: expected {len(header)} fields, found {len(row)}")
        try:
            values[i - 2] = [float(cell) for cell in row]
        except ValueError:
            raise ValueError(f"{path}:{i}: non-numeric cell in {row!r}") from None
    response = values[:, -1]
    if not np.all((response == 0) | (response == 1)):
        raise ValueError(f"{path}: response column {header[-1]!r} must contain only 0 and 1")
    design = values[:, :-1]
    if standardized:
        sd = design.std(axis=0)
        sd[sd == 0] = 1.0
        design = (design - design.mean(axis=0)) / sd
    return RegressionData(design, response, standardized)


def synthetic_credit_data(seed=1994, n=1000):
    """Surrogate with the shape of the German Credit data: 1000 rows, 24 raw covariates.

    Columns mix small integer codes, durations in months, ages and raw
    credit amounts, so the design is badly scaled just like the
    unstandardized original.
    """
    rng = np.random.default_rng(seed)
    X = np.empty((n, 24))
    X[:, 0] = rng.integers(1, 5, n)  # account status code
    X[:, 1] = rng.integers(4, 73, n)  # duration, months
    X[:, 2] = rng.integers(0, 5, n)  # credit history code
    X[:, 3] = np.round(rng.lognormal(7.8, 0.75, n) / 100.0)  # amount, hundreds
    X[:, 4] = rng.integers(1, 6, n)
    X[:, 5] = rng.integers(1, 6, n)
    X[:, 6] = rng.integers(1, 5, n)  # installment rate
    X[:, 7] = rng.integers(1, 5, n)
    X[:, 8] = rng.integers(1, 5, n)
    X[:, 9] = rng.integers(19, 76, n)  # age
    X[:, 10] = rng.integers(1, 5, n)
    X[:, 11] = rng.integers(1, 3, n)
    X[:, 12:24] = rng.integers(0, 2, (n, 12))  # indicator columns
    z = (X - X.mean(axis=0)) / X.std(axis=0)
    coef = rng.normal(0.0, 0.5, 24)
    prob = expit(-1.0 + z @ coef)
    y = (rng.random(n) < prob).astype(np.float64)
    return RegressionData(X, y, standardized=False)


# -- Gaussian process regression ---------------------------------------------------


def synthetic_gp_data(seed=2010, n=20):
    """1-D inputs on [0, 5] and responses drawn from the model at v1=1, v2=0.1, decay=2."""
    rng = np.random.default_rng(seed)
    inputs = np.sort(rng.uniform(0.0, 5.0, n))[:, None]
    d2 = (inputs - inputs.T) ** 2
    cov = np.exp(-2.0 * d2) + 0.1 * np.eye(n)
    targets = np.linalg.cholesky(cov) @ rng.standard_normal(n)
    return inputs, targets


def _sq_dists(inputs):
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    diff = X[:, None, :] - X[None, :, :]
    return np.sum(diff * diff, axis=-1)


def gp_log_marginal_likelihood(params, inputs, targets):
    """log N(targets | 0, C) with C = v1 exp(-decay d^2) + v2 I; ``-inf`` if C is not PD."""
    v1, v2, decay = params
    d2 = _sq_dists(inputs)
    y = np.asarray(targets, dtype=np.float64)
    C = v1 * np.exp(-decay * d2) + v2 * np.eye(len(y))
    try:
        cf = linalg.cho_factor(C, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        return -math.inf
    alpha = linalg.cho_solve(cf, y)
    logdet = 2.0 * np.sum(np.log(np.diag(cf[0])))
    return float(-0.5 * y @ alpha - 0.5 * logdet - 0.5 * len(y) * math.log(2 * math.pi))


def make_gp_regression(inputs, targets, logged):
    """Posterior over (signal variance, noise variance, decay rate) of a squared-exponential GP.

    Each parameter has an Exponential(1) prior.  With ``logged=True`` the
    chain runs on the logs of the three parameters and the log-Jacobian is
    included, giving unbounded support.
    """
    d2 = _sq_dists(inputs)
    y = check_vector(targets, "targets")
    n = len(y)
    if n < 2:
        raise ValueError("GP regression needs at least two observations")
    if d2.shape != (n, n):
        raise ValueError("inputs and targets disagree on the number of observations")
    eye = np.eye(n)

    def natural_logf_grad(params, want_grad):
        v1, v2, decay = params
        if v1 <= 0 or v2 <= 0 or decay <= 0 or not np.all(np.isfinite(params)):
            return -math.inf, None
        K = np.exp(-decay * d2)
        C = v1 * K + v2 * eye
        try:
            cf = linalg.cho_factor(C, lower=True)
        except linalg.LinAlgError:
            return -math.inf, None
        alpha = linalg.cho_solve(cf, y)
        logdet = 2.0 * np.sum(np.log(np.diag(cf[0])))
        logf = -0.5 * y @ alpha - 0.5 * logdet - (v1 + v2 + decay)
        if not want_grad:
            return logf, None
        with np.errstate(over="ignore", invalid="ignore"):
            W = np.outer(alpha, alpha) - linalg.cho_solve(cf, eye)
            dK_decay = -v1 * d2 * K
            g = 0.5 * np.array([np.sum(W * K), np.trace(W), np.sum(W * dK_decay)]) - 1.0
        return logf, g

    if logged:

        def log_density(u):
            if np.any(u > 700):
                return -math.inf
            logf, _ = natural_logf_grad(np.exp(u), False)
            return logf + float(np.sum(u))

        def grad(u):
            theta = np.exp(u)
            _, g = natural_logf_grad(theta, True)
            return theta * g + 1.0

        init = np.log([1.0, 0.1, 1.0])
        name = "gp-logged"
    else:

        def log_density(theta):
            return natural_logf_grad(theta, False)[0]

        def grad(theta):
            return natural_logf_grad(theta, True)[1]

        init = np.array([1.0, 0.1, 1.0])
        name = "gp-unlogged"
    return TargetDistribution(name, 3, log_density, grad, init)


def finite_diff_grad(target, x, h=1e-5):
    """Central-difference gradient of ``target.log_density`` at ``x``."""
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    x = check_vector(x, "x", dim=target.dim)
    g = np.empty(target.dim)
    for i in range(target.dim):
        e = np.zeros(target.dim)
        e[i] = h
        up = target.log_density(x + e)
        down = target.log_density(x - e)
        if not (math.isfinite(up) and math.isfinite(down)):
            raise ValueError(f"stencil point along coordinate {i} is outside the support")
        g[i] = (up - down) / (2.0 * h)
    return g


def transformed_target(base, R=None, shift=None):
    """Target ``x -> f(R^T (x - shift))``: ``base`` rotated by ``R``, then translated."""
    p = base.dim
    R = np.eye(p) if R is None else np.asarray(R, dtype=np.float64)
    shift = np.zeros(p) if shift is None else check_vector(shift, "shift", dim=p)

    def log_density(x):
        return base.log_density(R.T @ (x - shift))

    def grad(x):
        return R @ base.grad_log_density(R.T @ (x - shift))

    init = R @ base.default_initial_point() + shift
    return TargetDistribution(f"{base.name}-transformed", p, log_density, grad, init)
