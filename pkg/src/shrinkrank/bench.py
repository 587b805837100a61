"""Target registry, benchmark plans and the tuning-grid runner."""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import targets as tg
from .diagnostics import InestimableError, efficiency_report, worst_coordinate_report
from .rng import RandomSource
from .samplers import SAMPLERS, MaxCrumbsError, SamplerError, make_sampler

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SHRINKRANK_OUTPUT_DIR"
# half-decade geometric grid over [1e-2, 1e2]
DEFAULT_GRID = tuple(float(v) for v in np.logspace(-2, 2, 9))
TARGET_IDS = (
    "n4", "correlated-gaussian", "gaussian", "gamma-product", "eight-schools",
    "german-credit", "logistic", "gp-logged", "gp-unlogged",
)


def build_target(spec, dim=None, rho=None, data=None):
    """Build a target from ``name`` or ``name:dim``.

    ``rho`` applies to the correlated Gaussian (default 0.999); ``data`` is a
    CSV path for ``german-credit``/``logistic`` or a TOML path for ``eight-schools``.
    """
    name, _, dim_part = str(spec).partition(":")
    if dim_part:
        dim = int(dim_part)
    if name == "n4":
        return tg.make_correlated_gaussian(4, 0.999 if rho is None else rho)
    if name == "correlated-gaussian":
        return tg.make_correlated_gaussian(dim or 4, 0.999 if rho is None else rho)
    if name == "gaussian":
        return tg.make_correlated_gaussian(dim or 1, 0.0 if rho is None else rho)
    if name == "gamma-product":
        return tg.make_gamma_product(dim or 2)
    if name == "eight-schools":
        return tg.make_eight_schools(tg.load_eight_schools(data))
    if name == "german-credit":
        if data is None:
            log.info("german-credit: no data file given, using the synthetic surrogate")
            return tg.make_logistic_regression(tg.synthetic_credit_data(), "german-credit")
        return tg.make_logistic_regression(tg.load_regression_csv(data), "german-credit")
    if name == "logistic":
        if data is None:
            raise ValueError("target 'logistic' needs a regression CSV (--data)")
        return tg.make_logistic_regression(tg.load_regression_csv(data))
    if name in ("gp-logged", "gp-unlogged"):
        inputs, y = tg.synthetic_gp_data()
        return tg.make_gp_regression(inputs, y, logged=name == "gp-logged")
    raise ValueError(f"unknown target {name!r}; choose from {', '.join(TARGET_IDS)}")


def output_path(path, default_name):
    """Resolve an output path; relative paths land in ``$SHRINKRANK_OUTPUT_DIR`` if set."""
    path = path or default_name
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


@dataclass
class BenchmarkPlan:
    targets: list
    samplers: list
    grids: dict
    n_iterations: int = 200000
    seed: int = 1
    output: str = "results.csv"
    monitored: str = "worst"
    burn_in: float = 0.1
    rho: float = None
    data: dict = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        if not self.targets:
            raise ValueError("plan lists no targets")
        if not self.samplers:
            raise ValueError("plan lists no samplers")
        for s in self.samplers:
            if s not in SAMPLERS:
                raise ValueError(f"unknown sampler {s!r} in plan")
            if not self.grids.get(s):
                raise ValueError(f"empty tuning grid for sampler {s!r}")
        if self.n_iterations < 1000:
            raise ValueError("benchmark plans need n_iterations >= 1000")

    def cells(self):
        """``(index, target, sampler, tuning)`` for every grid cell, in output order."""
        out = []
        for t in self.targets:
            for s in self.samplers:
                for v in self.grids[s]:
                    out.append((len(out), t, s, float(v)))
        return out


def load_plan(path):
    """Parse a flat TOML plan file (see ``plans/`` in the repository)."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ValueError(f"{path}: nested table {key!r}; plan files are flat")
    samplers = raw.pop("samplers", list(SAMPLERS))
    grids = {}
    for s in samplers:
        grids[s] = raw.pop(s.replace("-", "_") + "_grid", list(DEFAULT_GRID))
    data = {}
    for key in ("german_credit_csv", "logistic_csv", "eight_schools_config"):
        if key in raw:
            data[key] = raw.pop(key)
    try:
        targets = raw.pop("targets")
    except KeyError:
        raise ValueError(f"{path}: plan has no 'targets' key") from None
    known = {"n_iterations", "seed", "output", "monitored", "burn_in", "rho", "n_jobs"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown plan keys {sorted(unknown)}")
    if "monitored" in raw:
        raw["monitored"] = str(raw["monitored"])
    return BenchmarkPlan(targets=targets, samplers=samplers, grids=grids, data=data, **raw)


RESULT_COLUMNS = (
    "cell", "target", "dim", "sampler", "tuning", "status", "monitored", "n_iterations",
    "total_density_evals", "tau", "tau_lo", "tau_hi", "ess", "evals_per_indep_obs",
    "evals_lo", "evals_hi", "mean_crumbs", "max_crumbs", "grad_evals_per_iter",
    "acceptance_rate", "detail",
)


def _data_for(plan, target_spec):
    name = target_spec.partition(":")[0]
    return {
        "german-credit": plan.data.get("german_credit_csv"),
        "logistic": plan.data.get("logistic_csv"),
        "eight-schools": plan.data.get("eight_schools_config"),
    }.get(name)


def report_for(chain, monitored, burn_in):
    if monitored == "worst":
        return worst_coordinate_report(chain, burn_in)
    if monitored == "log-density":
        return efficiency_report(chain, "log-density", burn_in)
    return efficiency_report(chain, int(monitored), burn_in)


def run_cell(plan, cell):
    """Run one grid cell; failures become a status, never an exception."""
    index, target_spec, sampler_id, tuning = cell
    row = {"cell": index, "target": target_spec, "sampler": sampler_id, "tuning": tuning,
           "monitored": plan.monitored}
    try:
        target = build_target(target_spec, rho=plan.rho, data=_data_for(plan, target_spec))
    except (ValueError, OSError) as exc:
        row.update(status="error", detail=f"target: {exc}")
        return row
    row["dim"] = target.dim
    src = RandomSource(plan.seed).spawn(index)
    sampler = make_sampler(sampler_id, tuning)
    try:
        chain = sampler.sample(target, None, plan.n_iterations, src)
    except MaxCrumbsError as exc:
        row.update(status="max-crumbs", detail=f"max crumbs hit at iteration {exc.iteration}")
        return row
    except (SamplerError, ValueError, FloatingPointError) as exc:
        row.update(status="error", detail=str(exc)[:200])
        return row
    row.update(
        mean_crumbs=float(np.mean(chain.n_crumbs)),
        max_crumbs=int(np.max(chain.n_crumbs)),
        grad_evals_per_iter=float(chain.cum_grad_evals[-1] / len(chain)),
        acceptance_rate=float(np.mean(chain.accepted)),
        total_density_evals=chain.total_density_evals,
    )
    try:
        rep = report_for(chain, plan.monitored, plan.burn_in)
    except InestimableError as exc:
        row.update(status="inestimable", detail=str(exc)[:200])
        return row
    row.update(rep.as_row())
    row["monitored"] = rep.monitored_function
    row["status"] = "ok"
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_benchmark(plan, n_jobs=None):
    """Run every cell of ``plan`` and return result rows in cell order.

    Each cell draws from ``RandomSource(plan.seed).spawn(cell_index)``, so the
    result does not depend on ``n_jobs``.
    """
    cells = plan.cells()
    n_jobs = plan.n_jobs if n_jobs is None else n_jobs
    if n_jobs <= 1:
        rows = []
        for cell in cells:
            log.info("cell %d/%d: %s %s %g", cell[0] + 1, len(cells), cell[1], cell[2], cell[3])
            rows.append(run_cell(plan, cell))
        return rows
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_run_cell_args, [(plan, c) for c in cells]))
