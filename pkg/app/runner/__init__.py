from .evolve import (
    RunLock, run_evolve, read_run_config,
    save_checkpoint, load_checkpoint, latest_checkpoint, state_from_checkpoint,
)
from .reference import select_reference_points
from .export import (
    export_front, read_front, read_front_csv,
    export_kernel_distribution, write_kernel_csv,
    read_reference_points, reference_genotype,
)
from .cost import run_cost, format_cost_report
from .retrain import run_retrain, reduction_factor

__all__ = [
    "RunLock", "run_evolve", "read_run_config",
    "save_checkpoint", "load_checkpoint", "latest_checkpoint", "state_from_checkpoint",
    "select_reference_points",
    "export_front", "read_front", "read_front_csv",
    "export_kernel_distribution", "write_kernel_csv",
    "read_reference_points", "reference_genotype",
    "run_cost", "format_cost_report",
    "run_retrain", "reduction_factor",
]
