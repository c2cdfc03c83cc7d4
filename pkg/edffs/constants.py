"""Shared constants for edffs.

Central home for values that would otherwise be scattered as magic numbers
across the model, the decoder, the engines and the renderers. Anything that is
genuinely user-tunable belongs in :mod:`edffs.config` instead; this module holds
the fixed values that define application behaviour.
"""

from __future__ import annotations

# --- Numerics ---------------------------------------------------------------

#: Tolerance for comparing real-valued times and power sums. Decoded start times
#: are built from the same additions the validator repeats, so this only has to
#: absorb the rounding of JSON round trips and summed float powers.
TIME_EPSILON: float = 1e-9

#: Cell value marking a frozen (non-PENDING) operation in X and Y matrices and
#: in the chromosome JSON dump.
FROZEN: int = -1

#: Order-matrix mark for an operation completed before the rescheduling point.
ORDER_DONE: int = 2**31 - 1

#: Order-matrix mark for an operation running (or pinned) at the rescheduling point.
ORDER_RUNNING: int = 0

# --- GA defaults ------------------------------------------------------------

DEFAULT_GRID_WIDTH: int = 64
DEFAULT_GRID_HEIGHT: int = 64
DEFAULT_ISLAND_WIDTH: int = 8
DEFAULT_ISLAND_HEIGHT: int = 8
DEFAULT_CROSSOVER_RATE: float = 0.9
DEFAULT_MUTATION_RATE: float = 0.1
DEFAULT_MIGRATION_INTERVAL: int = 10
DEFAULT_GENERATIONS: int = 100
DEFAULT_SEED: int = 1

#: Size of the von Neumann neighbourhood used by the local tournament.
TOURNAMENT_SIZE: int = 5

#: The only E_max calibration rule implemented: smallest 10**a, a >= 1.
EMAX_POLICY_POWER_OF_TEN: str = "power_of_ten"

#: spawn_key prefixes for the random streams derived from one seed.
ISLAND_STREAM_KEY: int = 0
ENGINE_STREAM_KEY: int = 1

#: spawn_key prefix of the stream that draws new-arrival jobs for a scenario.
ARRIVAL_STREAM_KEY: int = 2

#: Chromosomes handed to one worker task when a whole population is evaluated.
EVALUATION_CHUNK_SIZE: int = 64

# --- Instances --------------------------------------------------------------

#: Tardiness weight used by generated instances.
DEFAULT_WT: float = 100.0

#: Bounds of the uniform processing-time draw.
PROC_TIME_LOW: float = 1.0
PROC_TIME_HIGH: float = 5.0

#: Upper bound of the due-date slack factor sigma.
DUE_SLACK_HIGH: float = 2.0

#: Power drawn by every generated operation.
GENERATED_POWER: float = 1.0

# --- Experiments ------------------------------------------------------------

DEFAULT_RUNS: int = 30
DEFAULT_RS_RATIOS: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
DEFAULT_WT_GRID: tuple[float, ...] = (0.01, 0.1, 0.4, 0.7, 1.0, 4.0, 7.0, 10.0, 100.0)
DEFAULT_CHECKPOINTS: tuple[int, ...] = (100, 200, 300, 400, 500)
DEFAULT_CROSSOVER_GRID: tuple[float, ...] = (0.75, 0.825, 0.9)
DEFAULT_MUTATION_GRID: tuple[float, ...] = (0.05, 0.1, 0.15)

#: Objective value below which a run counts as an adequate solution.
DEFAULT_ADEQUATE_LEVEL: float = 200.0

# --- Oracle -----------------------------------------------------------------

DEFAULT_ORACLE_MAX_PENDING: int = 8
DEFAULT_ORACLE_MAX_SEARCH_SPACE: int = 2_000_000
DEFAULT_ORACLE_TIME_BUDGET_SECONDS: float = 600.0

#: How many candidates are decoded between two checks of the time budget.
ORACLE_BUDGET_CHECK_EVERY: int = 1024

# --- Gantt ------------------------------------------------------------------

#: Horizontal scale: SVG units per time unit.
GANTT_UNIT_WIDTH: float = 40.0
GANTT_ROW_HEIGHT: float = 24.0
GANTT_ROW_GAP: float = 6.0
GANTT_LABEL_WIDTH: float = 70.0
GANTT_MARGIN: float = 20.0
GANTT_POWER_STRIP_HEIGHT: float = 80.0
GANTT_FROZEN_COLOUR: str = "#b8b8b8"

#: Job colours, cycled by job index.
GANTT_PALETTE: tuple[str, ...] = (
    "#4e79a7",
    "#f28e2b",
    "#e15759",
    "#76b7b2",
    "#59a14f",
    "#edc948",
    "#b07aa1",
    "#ff9da7",
    "#9c755f",
    "#bab0ac",
)
