"""Martingale CLT rate experiments: distances, Stein solver, bounds, BPRE."""

from ._core import (
    BoundReport,
    DistanceEstimate,
    SteinReport,
    conditional_moment_check,
    distances_from_sample,
    enumerate_law,
    env_moments,
    estimate_distances_mc,
    evaluate_bound,
    fit_rate,
    generate_path,
    kolmogorov_exact,
    lotka_nagaev,
    model_id,
    optimize_bound,
    path_endpoint,
    run_config,
    simulate_bpre,
    stein_check,
    wasserstein_exact,
)

__all__ = [
    "BoundReport",
    "DistanceEstimate",
    "SteinReport",
    "conditional_moment_check",
    "distances_from_sample",
    "enumerate_law",
    "env_moments",
    "estimate_distances_mc",
    "evaluate_bound",
    "fit_rate",
    "generate_path",
    "kolmogorov_exact",
    "lotka_nagaev",
    "model_id",
    "optimize_bound",
    "path_endpoint",
    "run_config",
    "simulate_bpre",
    "stein_check",
    "wasserstein_exact",
]
