"""Experiment runner: configs, scorecards, comparisons and planning oracles."""
from .compare import Comparison, bootstrap_ci, compare_agents, compare_pair, episodes_to_threshold
from .config import ExperimentConfig, TaskSpec, load_config, parse_config, validate_config
from .experiment import (
    build_task,
    expert_demonstrations,
    ghost_trajectories,
    representation_scores,
    run_experiment,
    train_vae,
)
from .oracle import optimal_start_value, value_iteration_oracle
from .report import Scorecard, dumps_json, emit_report, load_report, report_files

__all__ = [name for name in dir() if not name.startswith("_")]
