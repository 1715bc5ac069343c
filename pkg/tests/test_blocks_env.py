"""
Tests for the blocks-fall world.
"""
from dataclasses import replace

import numpy as np
import pytest

from src.config import BLOCK, EMPTY, EnvConfig
from src.env.blocks import (
    PileState,
    PileStatus,
    WorldState,
    base_cell,
    falls,
    nudge_pile,
    render,
    reserved_cells,
    reset,
    step,
)
from src.errors import ConfigError
from src.tensor.rng import SeededRng


def run_steps(config, seed, count):
    rng = SeededRng(seed)
    state = reset(config, rng)
    states, events = [state], []
    for _ in range(count):
        state, fell = step(state, rng)
        states.append(state)
        events.extend(fell)
    return states, events


class TestReset:
    """
    Test cases for world initialisation.
    """

    def test_same_seed_same_state(self, env_config):
        assert reset(env_config, SeededRng(4)) == reset(env_config, SeededRng(4))

    def test_piles_start_standing_and_distractors_distinct(self, env_config):
        state = reset(env_config, SeededRng(0))
        assert all(p.standing for p in state.piles)
        cells = [(d.row, d.col) for d in state.distractors]
        assert len(set(cells)) == env_config.distractor_count
        assert not set(cells) & reserved_cells(env_config)

    def test_invalid_config_rejected(self):
        with pytest.raises(ConfigError):
            reset(EnvConfig(grid_size=5, pile_count=3), SeededRng(0))


class TestDynamics:
    """
    Test cases for nudges, falls and scattering.
    """

    def test_fall_rule(self):
        config = EnvConfig(fall_threshold=5)
        pile = PileState(column=3, height=3, offset=1)
        fallen = nudge_pile(pile, 1, config)
        assert fallen.offset == 2
        assert fallen.status == PileStatus.SCATTERING
        assert fallen.t_remaining == config.scatter_duration

    def test_height_one_never_falls(self):
        assert not any(falls(1, offset, 5) for offset in range(-3, 4))

    def test_offset_clamped(self):
        config = EnvConfig(offset_bound=3, fall_threshold=100)
        pile = nudge_pile(PileState(column=3, height=1, offset=3), 1, config)
        assert pile.offset == 3

    def test_fixed_seed_identical_event_log(self, env_config):
        _, first = run_steps(env_config, 11, 100)
        _, second = run_steps(env_config, 11, 100)
        assert first == second

    def test_events_mark_first_scattering_state(self, env_config):
        states, events = run_steps(env_config, 2, 200)
        assert events
        for event in events:
            assert states[event.step - 1].piles[event.pile].standing
            assert states[event.step].piles[event.pile].status == PileStatus.SCATTERING

    def test_scattered_blocks_avoid_reserved_cells(self, env_config):
        states, _ = run_steps(env_config, 5, 200)
        reserved = reserved_cells(env_config)
        for state in states:
            for pile in state.piles:
                assert not set(pile.blocks) & reserved
            assert not {(d.row, d.col) for d in state.distractors} & reserved

    def test_fallen_piles_respawn(self, env_config):
        states, events = run_steps(env_config, 3, 300)
        fell = {e.pile for e in events}
        assert fell
        pile = min(fell)
        first_fall = min(e.step for e in events if e.pile == pile)
        assert any(s.piles[pile].standing for s in states[first_fall:])


class TestRender:
    """
    Test cases for the coarse observation.
    """

    def test_empty_world(self, env_config):
        obs = render(WorldState(config=env_config, piles=(), distractors=()))
        assert np.all(obs.channels == EMPTY)

    def test_small_offset_is_invisible(self, env_config):
        pile = PileState(column=2, height=2, offset=0)
        upright = WorldState(config=env_config, piles=(pile,), distractors=())
        nudged = WorldState(config=env_config, piles=(replace(pile, offset=1),), distractors=())
        assert render(upright) == render(nudged)

    def test_lean_is_visible_at_threshold(self, env_config):
        pile = PileState(column=2, height=2, offset=env_config.lean_threshold)
        obs = render(WorldState(config=env_config, piles=(pile,), distractors=()))
        assert not np.any(obs.channels == BLOCK)

    def test_render_is_pure(self, env_config):
        state = reset(env_config, SeededRng(1))
        np.testing.assert_array_equal(render(state).channels, render(state).channels)

    def test_base_cell_filled_exactly_while_standing(self, env_config):
        states, _ = run_steps(env_config, 7, 200)
        for state in states:
            channels = render(state).channels
            for index, pile in enumerate(state.piles):
                row, col = base_cell(env_config, index)
                assert (channels[row, col] != EMPTY) == pile.standing
