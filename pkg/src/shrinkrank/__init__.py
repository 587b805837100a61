"""Shrinking-rank slice sampling, Adaptive Metropolis, benchmark targets and diagnostics."""
from .diagnostics import (
    EfficiencyReport, InestimableError, autocorrelation_time, efficiency_report,
    worst_coordinate_report,
)
from .projection import OrthoBasis, angle_accepts, extend, project
from .rng import RandomSource, TransformedSource
from .samplers import (
    AdaptiveMetropolisSampler, AmConfig, Chain, MaxCrumbsError, SamplerError, ShrinkConfig,
    ShrinkingRankSampler, StepStats, adaptive_metropolis_step, make_sampler, run_chain,
    shrink_rank_step,
)
from .targets import TargetDistribution, finite_diff_grad

__version__ = "0.1.0"
