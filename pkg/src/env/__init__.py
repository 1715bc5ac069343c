"""
Partially observable blocks-fall world with an exact fall-probability oracle.
"""
from src.env.blocks import (
    Distractor,
    EventRecord,
    Observation,
    PileState,
    PileStatus,
    WorldState,
    base_cell,
    falls,
    pile_columns,
    render,
    reset,
    step,
)
from src.env.oracle import monte_carlo_fall_probs, oracle_fall_prob
from src.env.trajectory import Trajectory, dump_trajectory, fall_labels, one_hot, sample_trajectory
