"""Benchmarks for supervised learning on drifting streams with delayed labels.

The heavy lifting lives in the compiled ``_core`` module; this package
re-exports its operations.
"""

from ._core import (
    auc_pr,
    auc_roc,
    known_presets,
    report,
    run,
    run_config,
    sweep_config,
    tune_config,
)

__all__ = [
    "auc_pr",
    "auc_roc",
    "known_presets",
    "report",
    "run",
    "run_config",
    "sweep_config",
    "tune_config",
]
