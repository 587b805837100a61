"""Autocorrelation time, effective sample size and cost per independent draw."""
import math
from dataclasses import dataclass

import numpy as np

Z95 = 1.959963984540054
MIN_LENGTH = 100
MIN_DISTINCT = 5


class InestimableError(ValueError):
    """The series is too short or too degenerate for an autocorrelation time."""


@dataclass(frozen=True)
class EfficiencyReport:
    tau: float
    tau_ci: tuple
    ess: float
    evals_per_indep_obs: float
    evals_ci: tuple
    n_iterations: int
    total_density_evals: int
    monitored_function: str
    window: int = 0

    FIELDS = (
        "monitored", "n_iterations", "total_density_evals", "tau", "tau_lo", "tau_hi",
        "ess", "evals_per_indep_obs", "evals_lo", "evals_hi", "window",
    )

    def as_row(self):
        return {
            "monitored": self.monitored_function,
            "n_iterations": self.n_iterations,
            "total_density_evals": self.total_density_evals,
            "tau": self.tau,
            "tau_lo": self.tau_ci[0],
            "tau_hi": self.tau_ci[1],
            "ess": self.ess,
            "evals_per_indep_obs": self.evals_per_indep_obs,
            "evals_lo": self.evals_ci[0],
            "evals_hi": self.evals_ci[1],
            "window": self.window,
        }


def autocorrelation(series):
    """Normalized autocorrelation at every lag, via FFT."""
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / acov[0]


def autocorrelation_time(series, window_factor=5.0):
    """Integrated autocorrelation time with a self-consistent truncation window.

    ``tau(M) = 1 + 2 * sum_{t=1..M} rho(t)``, with ``M`` the smallest lag for
    which ``M >= window_factor * tau(M)``.  Returns ``(tau, (lo, hi), M)``;
    the interval uses ``var(tau) ~ tau^2 (4M + 2) / n`` and a normal
    approximation.  ``tau`` is clamped below at 1.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = len(x)
    if n < MIN_LENGTH:
        raise InestimableError(f"series of length {n} is shorter than {MIN_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise InestimableError("series contains non-finite values")
    if len(np.unique(x)) < MIN_DISTINCT:
        raise InestimableError(f"series has fewer than {MIN_DISTINCT} distinct values")
    rho = autocorrelation(x)
    taus = 1.0 + 2.0 * np.cumsum(rho[1:])
    lags = np.arange(1, n)
    ok = lags >= window_factor * taus
    if not np.any(ok):
        raise InestimableError("no self-consistent window: the series is too short")
    m = int(np.argmax(ok))
    window = int(lags[m])
    tau = max(float(taus[m]), 1.0)
    half = Z95 * tau * math.sqrt((4 * window + 2) / n)
    return tau, (max(tau - half, 0.0), tau + half), window


def _report(series, evals, label, window_factor):
    n = len(series)
    tau, (lo, hi), window = autocorrelation_time(series, window_factor)
    per_iter = evals / n
    return EfficiencyReport(
        tau=tau,
        tau_ci=(lo, hi),
        ess=n / tau,
        evals_per_indep_obs=per_iter * tau,
        evals_ci=(per_iter * lo, per_iter * hi),
        n_iterations=n,
        total_density_evals=int(evals),
        monitored_function=label,
        window=window,
    )


def _burned(chain, burn_in):
    if not 0.0 <= burn_in < 1.0:
        raise ValueError(f"burn_in must lie in [0, 1), got {burn_in}")
    start = int(math.floor(burn_in * len(chain)))
    cum = chain.cum_density_evals
    before = int(cum[start - 1]) if start > 0 else 0
    evals = int(cum[-1]) - before if len(chain) else 0
    return start, evals


def efficiency_report(chain, monitored=0, burn_in=0.1, window_factor=5.0):
    """Efficiency of ``chain`` for one monitored function of the state.

    ``monitored`` is a coordinate index or ``"log-density"``.  The first
    ``burn_in`` fraction of iterations (and their evaluations) is dropped.
    """
    start, evals = _burned(chain, burn_in)
    if monitored == "log-density":
        series = chain.log_density[start:]
        label = "log-density"
    else:
        idx = int(monitored)
        if not 0 <= idx < chain.dim:
            raise ValueError(f"coordinate {idx} out of range for dimension {chain.dim}")
        series = chain.states[start:, idx]
        label = f"x{idx}"
    return _report(series, evals, label, window_factor)


def worst_coordinate_report(chain, burn_in=0.1, window_factor=5.0):
    """Report for the coordinate with the largest autocorrelation time.

    Inestimable coordinates are skipped; ties go to the lowest index.
    """
    worst = None
    errors = []
    for i in range(chain.dim):
        try:
            rep = efficiency_report(chain, i, burn_in, window_factor)
        except InestimableError as exc:
            errors.append(f"x{i}: {exc}")
            continue
        if worst is None or rep.tau > worst.tau:
            worst = rep
    if worst is None:
        raise InestimableError("all coordinates inestimable (" + "; ".join(errors) + ")")
    return worst
