"""
Evaluation of a trained model against the oracle, the pixel baseline and random slots.
"""
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.env.oracle import oracle_fall_prob
from src.env.trajectory import fall_labels, sample_trajectory
from src.harness.baseline import eval_baseline
from src.harness.information import mi_frame, slot_relevance
from src.harness.probes import auc_score, probe_outcome
from src.harness.resolution import resolve_statements
from src.mappings.report_format import PILE_FACTORS
from src.nets.model import slot_readouts
from src.nets.statements import StatementRecord, statements_from_batch
from src.tensor.autograd import no_grad
from src.tensor.rng import SeededRng

log = logging.getLogger(__name__)


def eval_trajectories(config, seed, count=None):
    """Held-out episodes shared by every system evaluated for ``seed``."""
    rng = SeededRng(seed).fork('eval')
    count = config.harness.eval_episodes if count is None else count
    return [sample_trajectory(config.env, rng, config.train.episode_length) for _ in range(count)]


@dataclass
class ModelRollout:
    """
    Frozen features of a model run over a batch of episodes.

    Arrays are indexed [episode, time]. Verifier scores and resolved bins exist only where
    t + K lies inside the episode (NaN / -1 elsewhere).
    """
    h: np.ndarray
    content: np.ndarray
    a_index: np.ndarray
    b_indices: np.ndarray
    attention: np.ndarray
    probs: np.ndarray
    verifier: np.ndarray
    resolved_bins: np.ndarray
    statements: List[StatementRecord] = field(default_factory=list)


def rollout_model(model, store, trajectories, horizon, rng, temperature=0.0):
    """
    Run F and C over whole episodes, issue a statement at every step and resolve it K steps later.

    Args:
        model (ConsciousnessModel): Networks.
        store (ParameterStore): Frozen parameters.
        trajectories (list): Equal-length Trajectory objects.
        horizon (int): Statement horizon K.
        rng (SeededRng): Selection noise.
        temperature (float): Selection temperature.

    Returns:
        ModelRollout: Features and resolved statements.
    """
    inputs = np.stack([traj.flat_observations() for traj in trajectories])
    episodes, length = inputs.shape[:2]
    with no_grad():
        states = model.unroll(store, inputs)
        thoughts = []
        c_prev = None
        for t in range(length):
            c_t, prediction = model.think(store, states[t], c_prev, rng, temperature)
            thoughts.append((c_t, prediction))
            c_prev = c_t

        verifier = np.full((episodes, length), np.nan)
        resolved = np.full((episodes, length), -1, dtype=np.int64)
        statements = []
        for t, (c_t, prediction) in enumerate(thoughts):
            records = statements_from_batch(c_t, prediction, horizon, t)
            if t + horizon < length:
                future = states[t + horizon]
                verifier[:, t] = model.verifier.verify(store, future, c_t, prediction).value
                resolved[:, t] = model.binner.assign(store, slot_readouts(future.value, c_t.a_index))
                for e, record in enumerate(records):
                    record.resolve(verifier[e, t], resolved[e, t])
            statements.extend(records)

    def stacked(fn):
        return np.stack([fn(c, p) for c, p in thoughts], axis=1)

    return ModelRollout(
        h=np.stack([s.value for s in states], axis=1),
        content=stacked(lambda c, p: c.content().value),
        a_index=stacked(lambda c, p: c.a_index),
        b_indices=stacked(lambda c, p: c.b_indices),
        attention=stacked(lambda c, p: c.attention.value),
        probs=stacked(lambda c, p: p.probs.value),
        verifier=verifier,
        resolved_bins=resolved,
        statements=statements,
    )


def event_samples(trajectories, pile, horizon):
    """
    (episode ids, time ids, labels) of every time the pile stands with K steps still ahead.
    """
    labels, valid = zip(*(fall_labels(traj, pile, horizon) for traj in trajectories))
    labels, valid = np.stack(labels), np.stack(valid)
    episodes, times = np.nonzero(valid)
    return episodes, times, labels[episodes, times]


def oracle_scores(trajectories, episodes, times, pile, horizon):
    return np.array([oracle_fall_prob(trajectories[e].states[t], pile, horizon)
                     for e, t in zip(episodes, times)])


@dataclass
class EvalReport:
    """Fall-prediction AUCs of every system plus the slot/factor MI table for one seed."""
    seed: int
    conscious_auc: float
    full_h_auc: float
    random_auc: float
    oracle_auc: float
    verifier_auc: float
    baseline_auc: Optional[float] = None
    statements_resolved: int = 0
    statements_unresolved: int = 0
    probes: List[dict] = field(default_factory=list)
    mi: List[dict] = field(default_factory=list)
    relevance: Dict[str, float] = field(default_factory=dict)
    random_slots: List[int] = field(default_factory=list)
    n_samples: int = 0
    wall_clock: float = 0.0

    def auc_rows(self):
        rows = [
            {'seed': self.seed, 'source': 'conscious', 'auc': self.conscious_auc},
            {'seed': self.seed, 'source': 'full_h', 'auc': self.full_h_auc},
            {'seed': self.seed, 'source': 'random_slots', 'auc': self.random_auc},
            {'seed': self.seed, 'source': 'oracle', 'auc': self.oracle_auc},
            {'seed': self.seed, 'source': 'verifier_statements', 'auc': self.verifier_auc},
        ]
        if self.baseline_auc is not None:
            rows.insert(3, {'seed': self.seed, 'source': 'baseline', 'auc': self.baseline_auc})
        return rows

    def ceiling_violations(self, tolerance=0.02):
        """Learned sources whose AUC exceeds the oracle's by more than ``tolerance``."""
        learned = {'conscious': self.conscious_auc, 'full_h': self.full_h_auc,
                   'random_slots': self.random_auc, 'baseline': self.baseline_auc}
        return [name for name, auc in learned.items()
                if auc is not None and np.isfinite(auc) and auc > self.oracle_auc + tolerance]

    def to_dict(self):
        return asdict(self)


def _probe_auc(features, labels, groups, source, pile, config, seed, min_samples):
    harness = config.harness
    try:
        report = probe_outcome(features, labels, source=source, target=f"pile{pile}_falls_within_K",
                               seed=seed, groups=groups, holdout=harness.probe_holdout,
                               steps=harness.probe_steps, lr=harness.probe_lr, min_samples=min_samples)
    except ValueError as e:
        log.warning("Probe %s on pile %d skipped: %s", source, pile, e)
        return None
    return report


def _mean(values):
    values = [v for v in values if v is not None and np.isfinite(v)]
    return float(np.mean(values)) if values else float('nan')


def evaluate(config, model, store, trajectories, seed, baseline=None, min_probe_samples=None,
             min_statements=None, min_mi_samples=None):
    """
    Compare the conscious model with the oracle, random slots, full h and the baseline.

    Args:
        config (LabConfig): Run config.
        model (ConsciousnessModel): Networks.
        store (ParameterStore): Trained parameters.
        trajectories (list): Evaluation episodes (shared with the baseline).
        seed (int): Seed for noise, probe splits and the random-slot draw.
        baseline (BaselineModel, optional): Pixel baseline to score on the same episodes.
        min_probe_samples, min_statements, min_mi_samples (int, optional): Overrides of the
            harness minimums.

    Returns:
        tuple: (EvalReport for this seed, ModelRollout with the resolved statements)
    """
    started = time.time()
    harness = config.harness
    horizon = config.train.horizon
    min_probe_samples = harness.min_probe_samples if min_probe_samples is None else min_probe_samples
    min_statements = harness.min_statements if min_statements is None else min_statements
    min_mi_samples = harness.min_mi_samples if min_mi_samples is None else min_mi_samples
    rng = SeededRng(seed).fork('evaluate')

    rollout = rollout_model(model, store, trajectories, horizon, rng.fork('noise'), harness.eval_temperature)
    random_slots = np.sort(rng.fork('random-slots').permutation(config.net.slot_count)[:config.net.selected_slots])

    sources = {
        'conscious': lambda e, t: rollout.content[e, t],
        'full_h': lambda e, t: rollout.h[e, t].reshape(len(e), -1),
        'random_slots': lambda e, t: rollout.h[e, t][:, random_slots].reshape(len(e), -1),
    }
    aucs = {name: [] for name in sources}
    oracle_aucs = []
    probes = []
    n_samples = 0
    falling = []
    for pile in range(config.env.pile_count):
        episodes, times, labels = event_samples(trajectories, pile, horizon)
        n_samples += labels.size
        for name, features in sources.items():
            report = _probe_auc(features(episodes, times), labels, episodes, name, pile, config, seed,
                                min_probe_samples)
            if report is not None:
                probes.append(report.to_dict())
                aucs[name].append(report.auc)
        try:
            oracle_aucs.append(auc_score(labels, oracle_scores(trajectories, episodes, times, pile, horizon)))
        except ValueError as e:
            log.warning("Oracle AUC for pile %d undefined: %s", pile, e)
        falling.append((pile, episodes[labels], times[labels]))

    baseline_auc = None
    if baseline is not None:
        baseline_auc, _, _ = eval_baseline(baseline, trajectories, horizon, rng.fork('baseline'),
                                           harness.baseline_rollouts)

    try:
        resolution = resolve_statements(rollout.statements, min_statements)
        verifier_auc, resolved, unresolved = resolution.auc, resolution.resolved, resolution.unresolved
    except ValueError as e:
        log.warning("Verifier-statement AUC skipped: %s", e)
        verifier_auc, resolved, unresolved = float('nan'), 0, len(rollout.statements)

    mi_rows, relevance = _information(config, rollout, trajectories, falling, random_slots, min_mi_samples)

    report = EvalReport(
        seed=int(seed),
        conscious_auc=_mean(aucs['conscious']),
        full_h_auc=_mean(aucs['full_h']),
        random_auc=_mean(aucs['random_slots']),
        oracle_auc=_mean(oracle_aucs),
        verifier_auc=verifier_auc,
        baseline_auc=baseline_auc,
        statements_resolved=resolved,
        statements_unresolved=unresolved,
        probes=probes,
        mi=mi_rows,
        relevance=relevance,
        random_slots=[int(s) for s in random_slots],
        n_samples=int(n_samples),
        wall_clock=time.time() - started,
    )
    violations = report.ceiling_violations()
    if violations:
        log.warning("Seed %d: %s exceed the oracle AUC %.3f by more than 0.02",
                    seed, ', '.join(violations), report.oracle_auc)
    return report, rollout


def _information(config, rollout, trajectories, falling, random_slots, min_samples):
    bins = config.harness.mi_bins
    readouts = rollout.h[..., 0].reshape(-1, config.net.slot_count)
    factors = {}
    for pile in range(config.env.pile_count):
        piles = [[s.piles[pile] for s in traj.states] for traj in trajectories]
        for name in PILE_FACTORS:
            factors[f"pile{pile}.{name}"] = np.array([[getattr(p, name) for p in row] for row in piles]).reshape(-1)
    try:
        mi_rows = mi_frame(readouts, factors, bins, min_samples).to_dict('records')
    except ValueError as e:
        log.warning("MI table skipped: %s", e)
        mi_rows = []

    # Slots selected just before a fall versus random slots, on the falling pile's factors
    sel_readouts, heights, offsets, usage = [], [], [], np.zeros(config.net.slot_count)
    for pile, episodes, times in falling:
        for e, t in zip(episodes, times):
            state = trajectories[e].states[t].piles[pile]
            sel_readouts.append(rollout.h[e, t, :, 0])
            heights.append(state.height)
            offsets.append(state.offset)
            usage[rollout.a_index[e, t]] += 1
            usage[rollout.b_indices[e, t]] += 1
    relevance = {'selected_mi': float('nan'), 'random_mi': float('nan'), 'n': len(sel_readouts)}
    if len(sel_readouts) >= 2:
        relevance = slot_relevance(np.array(sel_readouts), {'height': np.array(heights), 'offset': np.array(offsets)},
                                   usage, random_slots, bins)
    return mi_rows, relevance
