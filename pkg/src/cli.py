"""
Command-line entry point of the consciousness-prior lab.

    python -m src.cli train --config configs/desk.conf --seed 1 --out runs/s1
"""
import argparse
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime

import numpy as np
from dotenv import load_dotenv

from src.config import DEFAULT_RUNS_DIR, LOG_LEVEL_ENV, RUNS_DIR_ENV
from src.errors import CheckpointError, ConfigError, InfeasiblePlacementError, NumericalAbort, OracleBudgetError
from src.env.oracle import oracle_table
from src.harness.baseline import eval_baseline, train_baseline
from src.harness.diagnostics import run_gradcheck
from src.harness.evaluation import eval_trajectories, evaluate, rollout_model
from src.harness.report import write_eval_outputs, write_json
from src.harness.resolution import resolve_statements
from src.nets.model import ConsciousnessModel
from src.nets.statements import write_statement_dump
from src.tensor.rng import SeededRng
from src.training.trainer import episode_stream, train
from src.utils.checkpoint import load_checkpoint, save_checkpoint
from src.utils.data_loader import load_config, save_csv
from src.utils.manifest import write_manifest

log = logging.getLogger(__name__)

COMMANDS = ('train', 'eval', 'oracle', 'probe', 'statements', 'gradcheck', 'baseline')

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

ABORT_WINDOW_FILE = 'abort_window.npz'
BASELINE_CHECKPOINT = 'baseline.bin'


class UsageError(Exception):
    """Raised by the argument parser instead of exiting."""


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    common = UsageParser(add_help=False)
    common.add_argument('--config', required=True, help="Path to a key = value config file")
    common.add_argument('--seed', type=int, help="Override train.seed")
    common.add_argument('--out', help="Output directory (default: $CPLAB_RUNS_DIR/<timestamp>)")
    common.add_argument('--steps', type=int, help="Override the number of training steps")
    common.add_argument('--checkpoint', help="Reuse a trained model (eval, probe, statements)")

    parser = UsageParser(prog='cplab', description="Consciousness-prior lab")
    sub = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=UsageParser)
    sub.required = True
    for command in COMMANDS:
        sub.add_parser(command, parents=[common])
    return parser


def default_out_dir():
    root = os.environ.get(RUNS_DIR_ENV) or DEFAULT_RUNS_DIR
    return os.path.join(root, datetime.now().strftime('%Y%m%d-%H%M%S'))


def configure_logging():
    level = os.environ.get(LOG_LEVEL_ENV, 'INFO').upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')


def with_seed(config, seed):
    return replace(config, train=replace(config.train, seed=seed))


def baseline_episode_count(config, steps=None):
    """Episodes the trainer draws from the environment stream over a full run."""
    train_cfg = config.train
    total = train_cfg.total_steps if steps is None else steps
    return min(train_cfg.buffer_capacity, train_cfg.batch_size) + total // train_cfg.refresh_every


def trained_model(config, out_dir, steps=None, checkpoint=None):
    """
    Load ``checkpoint`` or train a fresh model into ``out_dir``.

    Returns:
        tuple: (ConsciousnessModel, ParameterStore)
    """
    model = ConsciousnessModel(config)
    if checkpoint:
        store = load_checkpoint(checkpoint)
        missing = set(model.init_params(SeededRng(0)).names()) - set(store.names())
        if missing:
            raise CheckpointError(f"{checkpoint} lacks entries: {', '.join(sorted(missing))}")
        log.info("Loaded %d entries from %s", len(store), checkpoint)
        return model, store
    result = train(config, out_dir, steps=steps)
    return result.model, result.store


def fit_baseline(config, steps=None):
    stream = episode_stream(config)
    episodes = [next(stream).observations for _ in range(baseline_episode_count(config, steps))]
    return train_baseline(config, episodes, SeededRng(config.train.seed).fork('baseline'))


def run_train(config, args):
    result = train(config, args.out, steps=args.steps)
    final = result.history[-1] if result.history else {}
    print(f"trained {len(result.history)} steps; final total loss {final.get('total', float('nan')):.4f}")
    print(f"checkpoint: {result.checkpoint_path}")


def run_eval(config, args):
    seeds = list(config.harness.eval_seeds) or [config.train.seed]
    reports, statements = [], []
    for seed in seeds:
        seed_config = with_seed(config, seed)
        seed_out = args.out if len(seeds) == 1 else os.path.join(args.out, f"seed_{seed}")
        model, store = trained_model(seed_config, seed_out, args.steps, args.checkpoint)
        baseline = fit_baseline(seed_config, args.steps)
        report, rollout = evaluate(seed_config, model, store, eval_trajectories(seed_config, seed), seed,
                                   baseline=baseline)
        reports.append(report)
        statements.extend(rollout.statements)
    paths = write_eval_outputs(args.out, reports)
    write_statement_dump(statements, os.path.join(args.out, 'statements.tsv'))
    for row in [row for report in reports for row in report.auc_rows()]:
        print(f"seed {row['seed']:>3} {row['source']:<20} AUC {row['auc']:.3f}")
    print(f"report: {paths['report']}")


def run_oracle(config, args):
    table = oracle_table(config.env, SeededRng(config.train.seed).fork('oracle'),
                         config.harness.oracle_states, config.train.horizon)
    save_csv(table, os.path.join(args.out, 'oracle.csv'))
    print(table.to_csv(index=False), end='')


def run_probe(config, args):
    seed = config.train.seed
    model, store = trained_model(config, args.out, args.steps, args.checkpoint)
    report, _ = evaluate(config, model, store, eval_trajectories(config, seed), seed)
    payload = {
        'seed': seed,
        'auc': {row['source']: row['auc'] for row in report.auc_rows()},
        'probes': report.probes,
        'n_samples': report.n_samples,
    }
    write_json(payload, os.path.join(args.out, 'probe.json'))
    for source, auc in payload['auc'].items():
        print(f"{source:<20} AUC {auc:.3f}")


def run_statements(config, args):
    seed = config.train.seed
    model, store = trained_model(config, args.out, args.steps, args.checkpoint)
    rollout = rollout_model(model, store, eval_trajectories(config, seed), config.train.horizon,
                            SeededRng(seed).fork('statements'), config.harness.eval_temperature)
    write_statement_dump(rollout.statements, os.path.join(args.out, 'statements.tsv'))
    try:
        summary = resolve_statements(rollout.statements, config.harness.min_statements).to_dict()
    except ValueError as e:
        log.warning("Statement resolution skipped: %s", e)
        summary = {'auc': None, 'resolved': sum(r.resolved for r in rollout.statements),
                   'unresolved': sum(not r.resolved for r in rollout.statements), 'hit_rate': None}
    summary['examples'] = [r.utterance for r in rollout.statements[:20]]
    write_json(summary, os.path.join(args.out, 'statements.json'))
    for utterance in summary['examples']:
        print(utterance)


def run_gradcheck_command(config, args):
    table = run_gradcheck(config, config.train.seed)
    save_csv(table, os.path.join(args.out, 'gradcheck.csv'))
    print(f"max gradient error {table['max_error'].max():.3e}")


def run_baseline(config, args):
    seed = config.train.seed
    baseline = fit_baseline(config, args.steps)
    save_checkpoint(baseline.store, os.path.join(args.out, BASELINE_CHECKPOINT))
    auc, per_pile, _ = eval_baseline(baseline, eval_trajectories(config, seed), config.train.horizon,
                                     SeededRng(seed).fork('evaluate').fork('baseline'),
                                     config.harness.baseline_rollouts)
    write_json({'seed': seed, 'auc': auc, 'per_pile_auc': per_pile,
                'final_loss': baseline.losses[-1] if baseline.losses else None,
                'steps': len(baseline.losses)},
               os.path.join(args.out, 'baseline.json'))
    print(f"baseline AUC {auc:.3f}")


HANDLERS = {
    'train': run_train,
    'eval': run_eval,
    'oracle': run_oracle,
    'probe': run_probe,
    'statements': run_statements,
    'gradcheck': run_gradcheck_command,
    'baseline': run_baseline,
}


def main(argv=None):
    """
    Run one lab command.

    Args:
        argv (list, optional): Arguments without the program name (default: sys.argv[1:]).

    Returns:
        int: 0 success, 1 usage error, 2 config error, 3 numerical abort.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    load_dotenv()
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE

    args.out = args.out or default_out_dir()
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = with_seed(config, args.seed)
        if args.steps is not None and args.steps < 1:
            raise ConfigError(f"--steps must be >= 1, got {args.steps}")
        write_manifest(args.out, ['cplab'] + argv, config, config.train.seed, args.command)
        log.info("Running %s with seed %d into %s", args.command, config.train.seed, args.out)
        HANDLERS[args.command](config, args)
    except (ConfigError, OracleBudgetError, InfeasiblePlacementError) as e:
        log.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (CheckpointError, FileNotFoundError) as e:
        log.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalAbort as e:
        path = os.path.join(args.out, ABORT_WINDOW_FILE)
        np.savez(path, window=np.asarray(e.window), step=np.asarray(-1 if e.step is None else e.step))
        log.error("%s; offending window written to %s", e, path)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
