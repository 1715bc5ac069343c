"""
Partially observable blocks-fall world.

A few piles of blocks stand at fixed columns of a square grid. Every step one pile is
nudged; a pile whose |offset| * height exceeds the fall threshold collapses and its blocks
scatter over random empty cells for a few steps before settling. Distractors wander the
grid and change colour. The rendered grid shows a pile's lean only once |offset| reaches the
lean threshold, so small offsets are invisible in a single frame.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Tuple

import numpy as np

from src.config import BASE_CHANNELS, BLOCK, EMPTY, LEAN_LEFT, LEAN_RIGHT, NUDGES, EnvConfig
from src.errors import ConfigError, InfeasiblePlacementError
from src.utils.validators import validate_env_config

log = logging.getLogger(__name__)

MAX_PLACEMENT_ATTEMPTS = 1000

# Moves available to a distractor: up, down, left, right
_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


class PileStatus(str, Enum):
    STANDING = 'standing'
    SCATTERING = 'scattering'
    FALLEN = 'fallen'


@dataclass(frozen=True)
class PileState:
    """
    One pile. ``blocks`` lists the cells of its scattered blocks once it has fallen.
    """
    column: int
    height: int
    offset: int
    status: PileStatus = PileStatus.STANDING
    t_remaining: int = 0
    settled_steps: int = 0
    blocks: Tuple[Tuple[int, int], ...] = ()

    @property
    def standing(self):
        return self.status == PileStatus.STANDING


@dataclass(frozen=True)
class Distractor:
    row: int
    col: int
    color: int


@dataclass(frozen=True)
class WorldState:
    """Ground-truth factors of the world; never shown to learners."""
    config: EnvConfig
    piles: Tuple[PileState, ...]
    distractors: Tuple[Distractor, ...]
    step: int = 0

    def to_dict(self):
        return {
            'step': self.step,
            'piles': [
                {'column': p.column, 'height': p.height, 'offset': p.offset,
                 'status': p.status.value, 't_remaining': p.t_remaining}
                for p in self.piles
            ],
            'distractors': [{'row': d.row, 'col': d.col, 'color': d.color} for d in self.distractors],
        }


@dataclass(frozen=True)
class EventRecord:
    step: int
    pile: int
    kind: str = 'fell'


@dataclass(frozen=True, eq=False)
class Observation:
    """
    Rendered grid. ``channels[r, c]`` is the single active channel of the cell.
    """
    channels: np.ndarray
    num_channels: int = field(default=BASE_CHANNELS)

    def __eq__(self, other):
        return (isinstance(other, Observation) and self.num_channels == other.num_channels
                and np.array_equal(self.channels, other.channels))


def falls(height, offset, threshold):
    """The fall rule: a pile collapses once |offset| * height exceeds the threshold."""
    return abs(offset) * height > threshold


def pile_columns(config):
    """Evenly spaced, fixed pile columns."""
    return tuple((p + 1) * config.grid_size // (config.pile_count + 1) for p in range(config.pile_count))


def reserved_cells(config):
    """Cells a standing pile may occupy; scattered blocks and distractors never enter them."""
    g = config.grid_size
    return {(row, col) for col in pile_columns(config) for row in range(g - config.max_height, g)}


def _standing_cells(pile, config):
    g = config.grid_size
    return [(g - 1 - level, pile.column) for level in range(pile.height)]


def _sample_standing(config, column, rng, attempts):
    while attempts[0] < MAX_PLACEMENT_ATTEMPTS:
        attempts[0] += 1
        height = int(rng.integers(1, config.max_height + 1))
        offset = int(rng.integers(-config.offset_bound, config.offset_bound + 1))
        if not falls(height, offset, config.fall_threshold):
            return PileState(column=column, height=height, offset=offset)
    raise InfeasiblePlacementError(
        f"no standing pile found after {MAX_PLACEMENT_ATTEMPTS} attempts "
        f"(max_height={config.max_height}, offset_bound={config.offset_bound}, "
        f"fall_threshold={config.fall_threshold})")


def _occupied(piles, distractors):
    cells = {cell for p in piles for cell in p.blocks}
    cells.update((d.row, d.col) for d in distractors)
    return cells


def _free_cells(config, taken):
    g = config.grid_size
    blocked = reserved_cells(config) | taken
    return [(r, c) for r in range(g) for c in range(g) if (r, c) not in blocked]


def reset(config, rng):
    """
    Start a world with standing piles and distractors on distinct free cells.

    Args:
        config (EnvConfig): World settings.
        rng (SeededRng): Randomness source.

    Returns:
        WorldState: Initial state at step 0.

    Raises:
        ConfigError: If the config violates its invariants.
        InfeasiblePlacementError: If placement fails within 1000 rejection attempts.
    """
    if not validate_env_config(config):
        raise ConfigError(f"Invalid environment config: {config}")

    attempts = [0]
    piles = tuple(_sample_standing(config, column, rng, attempts) for column in pile_columns(config))

    free = _free_cells(config, set())
    taken = set()
    distractors = []
    for _ in range(config.distractor_count):
        while True:
            attempts[0] += 1
            if attempts[0] > MAX_PLACEMENT_ATTEMPTS:
                raise InfeasiblePlacementError(
                    f"could not place {config.distractor_count} distractors without collision")
            cell = free[int(rng.integers(len(free)))]
            if cell not in taken:
                break
        taken.add(cell)
        distractors.append(Distractor(cell[0], cell[1], int(rng.integers(config.distractor_colors))))

    return WorldState(config=config, piles=piles, distractors=tuple(distractors), step=0)


def nudge_pile(pile, nudge, config):
    """
    Add a nudge to a standing pile's offset (clamped to the offset bound).

    A pile that now violates the standing rule starts scattering with no blocks placed yet;
    ``step`` scatters them. Piles that are not standing are returned unchanged.
    """
    if not pile.standing:
        return pile
    offset = int(np.clip(pile.offset + nudge, -config.offset_bound, config.offset_bound))
    if falls(pile.height, offset, config.fall_threshold):
        return replace(pile, offset=offset, status=PileStatus.SCATTERING,
                       t_remaining=config.scatter_duration, settled_steps=0)
    return replace(pile, offset=offset)


def _scatter(pile, index, config, piles, distractors, rng):
    others = [p for i, p in enumerate(piles) if i != index]
    free = _free_cells(config, _occupied(others, distractors))
    picks = sorted(rng.permutation(len(free))[:pile.height].tolist())
    return replace(pile, blocks=tuple(free[i] for i in picks))


def _advance_fallen(piles, distractors, config, rng, attempts):
    piles = list(piles)
    for index, pile in enumerate(piles):
        if pile.status == PileStatus.SCATTERING:
            remaining = pile.t_remaining - 1
            if remaining == 0:
                piles[index] = replace(pile, status=PileStatus.FALLEN, t_remaining=0, settled_steps=0)
            else:
                piles[index] = _scatter(replace(pile, t_remaining=remaining), index, config, piles, distractors, rng)
        elif pile.status == PileStatus.FALLEN:
            settled = pile.settled_steps + 1
            if config.respawn_delay and settled >= config.respawn_delay:
                piles[index] = _sample_standing(config, pile.column, rng, attempts)
            else:
                piles[index] = replace(pile, settled_steps=settled)
    return piles


def _walk(distractors, piles, config, rng):
    g = config.grid_size
    reserved = reserved_cells(config)
    moved = list(distractors)
    for index, d in enumerate(moved):
        dr, dc = _MOVES[int(rng.integers(len(_MOVES)))]
        target = (d.row + dr, d.col + dc)
        busy = _occupied(piles, moved[:index] + moved[index + 1:])
        row, col = d.row, d.col
        if 0 <= target[0] < g and 0 <= target[1] < g and target not in reserved and target not in busy:
            row, col = target
        color = (d.color + NUDGES[int(rng.integers(len(NUDGES)))]) % config.distractor_colors
        moved[index] = Distractor(row, col, color)
    return tuple(moved)


def step(state, rng):
    """
    Advance the world by one step.

    Scattering piles re-scatter (or settle), settled piles may respawn, one pile chosen
    uniformly receives a nudge drawn from the nudge alphabet, and each distractor moves
    one cell at random.

    Args:
        state (WorldState): Current state.
        rng (SeededRng): Randomness source.

    Returns:
        tuple: (next WorldState, list of EventRecord for piles that fell this step)
    """
    config = state.config
    attempts = [0]
    piles = _advance_fallen(state.piles, state.distractors, config, rng, attempts)

    target = int(rng.integers(config.pile_count))
    nudge = NUDGES[int(rng.choice(len(NUDGES), p=np.asarray(config.nudge_probs)))]
    events = []
    nudged = nudge_pile(piles[target], nudge, config)
    if piles[target].standing and not nudged.standing:
        piles[target] = _scatter(nudged, target, config, piles, state.distractors, rng)
        events.append(EventRecord(step=state.step + 1, pile=target))
        log.debug("pile %d fell at step %d", target, state.step + 1)
    else:
        piles[target] = nudged

    distractors = _walk(state.distractors, piles, config, rng)
    return WorldState(config=config, piles=tuple(piles), distractors=distractors, step=state.step + 1), events


def render(state):
    """
    Render the coarse grid observation of a state.

    Standing piles draw a column of blocks from the bottom row; the whole column uses a lean
    channel when |offset| >= lean threshold. Scattered blocks and distractors fill their cells.

    Args:
        state (WorldState): State to render.

    Returns:
        Observation: One active channel per cell.
    """
    config = state.config
    grid = np.full((config.grid_size, config.grid_size), EMPTY, dtype=np.int64)
    for pile in state.piles:
        if pile.standing:
            channel = BLOCK
            if pile.offset <= -config.lean_threshold:
                channel = LEAN_LEFT
            elif pile.offset >= config.lean_threshold:
                channel = LEAN_RIGHT
            for row, col in _standing_cells(pile, config):
                grid[row, col] = channel
        else:
            for row, col in pile.blocks:
                grid[row, col] = BLOCK
    for d in state.distractors:
        grid[d.row, d.col] = BASE_CHANNELS + d.color
    return Observation(channels=grid, num_channels=config.num_channels)


def base_cell(config, pile_index):
    """Bottom cell of a pile's column: filled exactly while the pile stands."""
    return config.grid_size - 1, pile_columns(config)[pile_index]
