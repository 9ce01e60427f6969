"""Monte Carlo harness."""

from robustglm.features.simulator.scenarios import SimScenario
from robustglm.features.simulator.services import (
    CSV_COLUMNS,
    TIMING_COLUMNS,
    SimCell,
    SimResult,
    cell_seed,
    contaminate,
    generate_dataset,
    run_mse_grid,
)

__all__ = [
    "CSV_COLUMNS",
    "SimCell",
    "SimResult",
    "SimScenario",
    "TIMING_COLUMNS",
    "cell_seed",
    "contaminate",
    "generate_dataset",
    "run_mse_grid",
]
