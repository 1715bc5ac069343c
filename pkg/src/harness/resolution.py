"""
Resolution of statements against the future they describe.
"""
import logging
from dataclasses import asdict, dataclass

import numpy as np

from src.harness.probes import auc_score

log = logging.getLogger(__name__)

MIN_RESOLVED = 200


@dataclass
class StatementResolution:
    """
    Verifier-statement AUC: how well verifier scores rank true statements above false ones.
    """
    auc: float
    resolved: int
    unresolved: int
    hit_rate: float

    def to_dict(self):
        return asdict(self)


def resolve_statements(records, min_resolved=MIN_RESOLVED):
    """
    AUC of verifier scores against statement truth.

    A resolved statement is true when the realised bin equals the predicted argmax bin.
    Unresolved statements are skipped and counted.

    Args:
        records (list): StatementRecord objects.
        min_resolved (int): Minimum number of resolved statements.

    Returns:
        StatementResolution: AUC (NaN when every statement has the same truth value).

    Raises:
        ValueError: With fewer than ``min_resolved`` resolved statements.
    """
    resolved = [r for r in records if r.resolved]
    unresolved = len(records) - len(resolved)
    if len(resolved) < min_resolved:
        raise ValueError(f"need at least {min_resolved} resolved statements, got {len(resolved)}")
    truth = np.array([r.resolved_bin == r.argmax_bin for r in resolved])
    scores = np.array([r.verifier_score for r in resolved])
    try:
        auc = auc_score(truth, scores)
    except ValueError:
        log.warning("All %d resolved statements share one truth value; AUC undefined", len(resolved))
        auc = float('nan')
    return StatementResolution(auc=auc, resolved=len(resolved), unresolved=unresolved,
                               hit_rate=float(truth.mean()))
