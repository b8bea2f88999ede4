"""Monte Carlo experiment drivers, configs and reports."""

from poisson_er.experiments.config import (
    ExperimentConfig,
    load_config,
    merge_overrides,
    parse_config_text,
    shipped_config,
)
from poisson_er.experiments.drivers import (
    DRIVERS,
    run_connectedness,
    run_critical,
    run_depoissonization,
    run_experiment,
    run_fluid,
    run_giant,
    run_giant_clt,
    run_kc,
    run_oracle,
    run_tau_clt,
    run_walk_law,
)
from poisson_er.experiments.harness import ExperimentReport, run_trials, write_report

# Shipped configs in the order ``all`` runs them.
SUITE = (
    "giant",
    "giant_subcritical",
    "walk_law",
    "oracle",
    "fluid",
    "giant_clt",
    "kc",
    "critical",
    "tau_clt",
    "connectedness",
    "connectedness_small",
    "depoissonize",
)

__all__ = [
    "DRIVERS",
    "SUITE",
    "ExperimentConfig",
    "ExperimentReport",
    "load_config",
    "merge_overrides",
    "parse_config_text",
    "run_connectedness",
    "run_critical",
    "run_depoissonization",
    "run_experiment",
    "run_fluid",
    "run_giant",
    "run_giant_clt",
    "run_kc",
    "run_oracle",
    "run_tau_clt",
    "run_trials",
    "run_walk_law",
    "shipped_config",
    "write_report",
]
