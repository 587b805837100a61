"""Shrinking-rank slice sampling and the Adaptive Metropolis baseline.

Both samplers follow the scikit-learn parameter conventions (``get_params``,
``set_params``, ``clone``) so tuning grids can be built by cloning a base
sampler and overriding one parameter.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_open_unit, check_positive, check_vector
from .projection import OrthoBasis, angle_accepts, extend, project
from .rng import as_source


class SamplerError(RuntimeError):
    """A transition could not be completed."""

    iteration = None


class MaxCrumbsError(SamplerError):
    """The shrinking-rank step exhausted its crumb budget without accepting."""


@dataclass(frozen=True)
class ShrinkConfig:
    sigma_c: float = 1.0
    theta: float = 0.95
    cos_threshold: float = 0.5
    zero_density_factor: float = 0.1
    max_crumbs: int = 10000

    def __post_init__(self):
        check_positive(self.sigma_c, "sigma_c")
        check_open_unit(self.theta, "theta")
        check_open_unit(self.cos_threshold, "cos_threshold")
        # 1.0 switches the extra zero-density shrink off
        if not 0.0 < self.zero_density_factor <= 1.0:
            raise ValueError(
                f"zero_density_factor must lie in (0, 1], got {self.zero_density_factor}"
            )
        check_positive(self.max_crumbs, "max_crumbs", integer=True)


@dataclass
class ShrinkState:
    """Bookkeeping for one shrinking-rank transition."""

    x0: np.ndarray
    log_y: float
    basis: OrthoBasis
    crumb_offsets: list = field(default_factory=list)
    crumb_sds: list = field(default_factory=list)
    crumb_ranks: list = field(default_factory=list)
    k: int = 0

    def check_schedule(self, theta, zero_density_factor):
        sds = self.crumb_sds
        if len(sds) < 2:
            return
        prev, cur = sds[-2], sds[-1]
        allowed = (prev, theta * prev, zero_density_factor * theta * prev)
        if not any(cur == a for a in allowed):
            raise AssertionError(
                f"crumb sd schedule violated at crumb {len(sds)}: {prev!r} -> {cur!r}"
            )


@dataclass
class StepStats:
    n_density_evals: int = 0
    n_grad_evals: int = 0
    n_crumbs: int = 0
    accepted: bool = True
    log_density: float = math.nan


def shrink_rank_step(x0, target, cfg, src, debug=False, trace=None):
    """One shrinking-rank slice transition from ``x0``.

    Returns ``(x_new, stats)``; ``stats.log_density`` holds ``log f(x_new)``.
    ``f(x0)`` is evaluated (and counted) once to set the slice level, then
    once per proposal.  With ``debug=True`` the crumb-sd schedule is asserted
    after every crumb.  If ``trace`` is a list, the transition's
    :class:`ShrinkState` is appended to it.
    """
    x0 = check_vector(x0, "x0", dim=target.dim)
    p = target.dim
    stats = StepStats()
    logf0 = target.log_density(x0)
    stats.n_density_evals = 1
    if not math.isfinite(logf0):
        raise SamplerError(f"log density of {target.name} is not finite at x0={x0!r}")

    log_y = logf0 - src.draw_unit_exponential()
    state = ShrinkState(x0=x0, log_y=log_y, basis=OrthoBasis(p))
    if trace is not None:
        trace.append(state)
    sigma = cfg.sigma_c
    precision_sum = 0.0
    weighted_offsets = np.zeros(p)

    for k in range(1, cfg.max_crumbs + 1):
        J = state.basis
        state.k = k
        state.crumb_sds.append(sigma)
        state.crumb_ranks.append(J.n_columns)
        if debug:
            state.check_schedule(cfg.theta, cfg.zero_density_factor)

        offset = project(J, sigma * src.draw_std_normal_vec(p))
        state.crumb_offsets.append(offset)
        precision = sigma**-2
        precision_sum += precision
        weighted_offsets += precision * offset
        sigma_x = math.sqrt(1.0 / precision_sum)
        mu_x = weighted_offsets / precision_sum

        x = x0 + project(J, mu_x + sigma_x * src.draw_std_normal_vec(p))
        logf = target.log_density(x)
        stats.n_density_evals += 1
        if logf >= log_y:
            stats.n_crumbs = k
            stats.log_density = logf
            return x, stats

        if logf == -math.inf:
            sigma *= cfg.theta * cfg.zero_density_factor
            continue
        g = target.grad_log_density(x)
        stats.n_grad_evals += 1
        if angle_accepts(J, g, cfg.cos_threshold):
            # only the direction matters; rescale so huge gradients cannot overflow
            state.basis = extend(J, project(J, g / np.max(np.abs(g))))
        else:
            sigma *= cfg.theta

    raise MaxCrumbsError(
        f"no proposal accepted after {cfg.max_crumbs} crumbs on target {target.name} "
        f"from x0={x0!r} with {cfg!r}"
    )


@dataclass(frozen=True)
class AmConfig:
    """Adaptive Metropolis settings.

    ``initial_sd_times_sqrt_d`` is the tuning parameter: the fixed isotropic
    component has standard deviation ``initial_sd_times_sqrt_d / sqrt(d)``.
    The adaptive component ``N(x, 2.38^2 / d * (cov + ridge I))`` is used from
    step ``onset_factor * d`` on, except with probability ``beta``.
    """

    initial_sd_times_sqrt_d: float = 0.1
    onset_factor: int = 2
    beta: float = 0.05
    ridge: float = 1e-10

    def __post_init__(self):
        check_positive(self.initial_sd_times_sqrt_d, "initial_sd_times_sqrt_d")
        check_open_unit(self.beta, "beta")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")


@dataclass
class RunningMoments:
    """Welford accumulators for the mean and covariance of visited states."""

    dim: int
    n: int = 0
    mean: np.ndarray = None
    m2: np.ndarray = None

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        if self.m2 is None:
            self.m2 = np.zeros((self.dim, self.dim))

    def update(self, x):
        n = self.n + 1
        delta = x - self.mean
        mean = self.mean + delta / n
        return RunningMoments(self.dim, n, mean, self.m2 + np.outer(delta, x - mean))

    def covariance(self):
        if self.n < 2:
            return np.zeros((self.dim, self.dim))
        return self.m2 / (self.n - 1)


def adaptive_metropolis_step(x0, target, cfg, moments, src):
    """One Adaptive Metropolis transition.  Returns ``(x_new, stats, moments)``."""
    x0 = check_vector(x0, "x0", dim=target.dim)
    d = target.dim
    stats = StepStats(n_grad_evals=0, n_crumbs=0)
    logf0 = target.log_density(x0)
    stats.n_density_evals = 1
    if not math.isfinite(logf0):
        raise SamplerError(f"log density of {target.name} is not finite at x0={x0!r}")
    if moments is None:
        moments = RunningMoments(d)

    z = src.draw_std_normal_vec(d)
    adaptive = moments.n >= cfg.onset_factor * d and src.draw_uniform() >= cfg.beta
    step = None
    if adaptive:
        cov = moments.covariance() + cfg.ridge * np.eye(d)
        try:
            step = (2.38 / math.sqrt(d)) * (np.linalg.cholesky(cov) @ z)
        except np.linalg.LinAlgError:
            step = None
    if step is None:
        step = (cfg.initial_sd_times_sqrt_d / math.sqrt(d)) * z

    proposal = x0 + step
    logf = target.log_density(proposal)
    stats.n_density_evals += 1
    if logf >= logf0 - src.draw_unit_exponential():
        x_new, stats.log_density, stats.accepted = proposal, logf, True
    else:
        x_new, stats.log_density, stats.accepted = x0, logf0, False
    return x_new, stats, moments.update(x_new)


@dataclass
class Chain:
    """States of a run plus cumulative evaluation counters per iteration."""

    states: np.ndarray
    log_density: np.ndarray
    cum_density_evals: np.ndarray
    cum_grad_evals: np.ndarray
    n_crumbs: np.ndarray
    accepted: np.ndarray = None

    def __post_init__(self):
        if self.accepted is None:
            self.accepted = np.ones(len(self.states), dtype=bool)

    def __len__(self):
        return self.states.shape[0]

    @property
    def dim(self):
        return self.states.shape[1]

    @property
    def total_density_evals(self):
        return int(self.cum_density_evals[-1]) if len(self) else 0

    @classmethod
    def empty(cls, n, dim):
        return cls(
            states=np.empty((n, dim)),
            log_density=np.empty(n),
            cum_density_evals=np.zeros(n, dtype=np.int64),
            cum_grad_evals=np.zeros(n, dtype=np.int64),
            n_crumbs=np.zeros(n, dtype=np.int64),
            accepted=np.ones(n, dtype=bool),
        )


class _Sampler(BaseEstimator):
    def sample(self, target, x_init=None, n_iterations=1000, random_state=None):
        """Run a chain of ``n_iterations`` transitions and return a :class:`Chain`."""
        if x_init is None:
            x_init = target.default_initial_point()
        return run_chain(self, target, x_init, n_iterations, as_source(random_state))


class ShrinkingRankSampler(_Sampler):
    """Gradient-adaptive crumb slice sampler with a shrinking proposal subspace.

    Parameters
    ----------
    sigma_c : float
        Standard deviation of the first crumb; the main tuning parameter.
    theta : float
        Factor applied to the crumb sd whenever a rejection does not grow the basis.
    cos_threshold : float
        A rejected proposal's gradient extends the basis only if its projection
        keeps a cosine above this with the full gradient.
    zero_density_factor : float
        Extra shrink applied after a proposal outside the support (1 disables it).
    max_crumbs : int
        Crumbs allowed per transition before :class:`MaxCrumbsError` is raised.
    debug : bool
        Assert the crumb-sd schedule after every crumb.
    """

    tuning_parameter = "sigma_c"

    def __init__(self, sigma_c=1.0, theta=0.95, cos_threshold=0.5,
                 zero_density_factor=0.1, max_crumbs=10000, debug=False):
        self.sigma_c = sigma_c
        self.theta = theta
        self.cos_threshold = cos_threshold
        self.zero_density_factor = zero_density_factor
        self.max_crumbs = max_crumbs
        self.debug = debug

    def config(self):
        return ShrinkConfig(self.sigma_c, self.theta, self.cos_threshold,
                            self.zero_density_factor, self.max_crumbs)

    def _stepper(self, target):
        cfg = self.config()
        debug = self.debug

        def step(x, src):
            return shrink_rank_step(x, target, cfg, src, debug=debug)

        return step


class AdaptiveMetropolisSampler(_Sampler):
    """Adaptive Metropolis with a fixed isotropic mixture component.

    ``initial_sd_times_sqrt_d`` is the initial proposal sd times ``sqrt(d)``.
    """

    tuning_parameter = "initial_sd_times_sqrt_d"

    def __init__(self, initial_sd_times_sqrt_d=0.1, onset_factor=2, beta=0.05, ridge=1e-10):
        self.initial_sd_times_sqrt_d = initial_sd_times_sqrt_d
        self.onset_factor = onset_factor
        self.beta = beta
        self.ridge = ridge

    def config(self):
        return AmConfig(self.initial_sd_times_sqrt_d, self.onset_factor, self.beta, self.ridge)

    def _stepper(self, target):
        cfg = self.config()
        moments = RunningMoments(target.dim)

        def step(x, src):
            nonlocal moments
            x_new, stats, moments = adaptive_metropolis_step(x, target, cfg, moments, src)
            return x_new, stats

        return step


SAMPLERS = {
    "shrink-rank": ShrinkingRankSampler,
    "adaptive-metropolis": AdaptiveMetropolisSampler,
}


def make_sampler(sampler_id, tuning=None, **params):
    """Build a sampler from its identifier, setting its tuning parameter to ``tuning``."""
    try:
        cls = SAMPLERS[sampler_id]
    except KeyError:
        raise ValueError(
            f"unknown sampler {sampler_id!r}; choose from {sorted(SAMPLERS)}"
        ) from None
    if tuning is not None:
        params[cls.tuning_parameter] = tuning
    return cls(**params)


def run_chain(sampler, target, x_init, n_iterations, src):
    """Run ``n_iterations`` transitions of ``sampler`` on ``target`` from ``x_init``."""
    if isinstance(n_iterations, bool) or int(n_iterations) != n_iterations or n_iterations < 0:
        raise ValueError(f"n_iterations must be a non-negative integer, got {n_iterations!r}")
    n_iterations = int(n_iterations)
    x = check_vector(x_init, "x_init", dim=target.dim)
    chain = Chain.empty(n_iterations, target.dim)
    step = sampler._stepper(target)
    evals = grads = 0
    for i in range(n_iterations):
        try:
            x, stats = step(x, src)
        except SamplerError as exc:
            exc.iteration = i
            exc.args = (f"iteration {i}: {exc.args[0]}",) + exc.args[1:]
            raise
        evals += stats.n_density_evals
        grads += stats.n_grad_evals
        chain.states[i] = x
        chain.log_density[i] = stats.log_density
        chain.cum_density_evals[i] = evals
        chain.cum_grad_evals[i] = grads
        chain.n_crumbs[i] = stats.n_crumbs
        chain.accepted[i] = stats.accepted
    return chain
