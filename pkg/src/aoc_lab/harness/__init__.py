"""Experiment harness: TOML configs, presets, comparison reports, SVG plots, CLI."""

from .config import config_hash, load_config, slotted_config_from, tandem_config_from
from .experiment import (ComparisonRow, ExperimentConfig, compare_report, csv_text,
                         pareto_csv, read_csv_rows, run_experiment)
from .svgplot import PlotSpec, render_plot
