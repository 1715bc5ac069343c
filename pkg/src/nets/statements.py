"""
Deterministic rendering of conscious states as statements about the future.
"""
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from src.mappings.report_format import STATEMENT_COLUMNS
from src.utils.data_loader import save_csv

_STATEMENT = re.compile(
    r'^slot\[(?P<a>\d+)\] in (?P<k>\d+) steps: bin (?P<bin>\d+) \(p=(?P<p>\d+\.\d{3})\) '
    r'\| given slots \{(?P<b>[\d,]*)\}$')


def render_statement(a_id, b_ids, probs, horizon):
    """
    Render "slot[<A>] in <K> steps: bin <argmax> (p=<max, 3 decimals>) | given slots {<B>}".

    B ids are listed in ascending order; ties in the argmax go to the lowest bin.
    """
    probs = np.asarray(probs, dtype=np.float64)
    best = int(np.argmax(probs))
    given = ','.join(str(i) for i in sorted(int(b) for b in b_ids))
    return f"slot[{int(a_id)}] in {int(horizon)} steps: bin {best} (p={probs[best]:.3f}) | given slots {{{given}}}"


def parse_statement(text):
    """
    Invert ``render_statement``.

    Returns:
        tuple: (A id, bin, K, B ids tuple, rounded p)

    Raises:
        ValueError: If the text is not a rendered statement.
    """
    match = _STATEMENT.match(text)
    if match is None:
        raise ValueError(f"not a statement: {text!r}")
    b_ids = tuple(int(i) for i in match.group('b').split(',') if i)
    return int(match.group('a')), int(match.group('bin')), int(match.group('k')), b_ids, float(match.group('p'))


@dataclass
class StatementRecord:
    """
    A prediction issued at time ``t`` about slot A's value bin at ``t + horizon``.

    ``verifier_score`` and ``resolved_bin`` stay None until ``t + horizon`` is observed.
    """
    t: int
    horizon: int
    a_id: int
    b_ids: Tuple[int, ...]
    probs: np.ndarray
    episode: int = 0
    verifier_score: Optional[float] = None
    resolved_bin: Optional[int] = None
    utterance: str = field(default='')

    def __post_init__(self):
        if not self.utterance:
            self.utterance = render_statement(self.a_id, self.b_ids, self.probs, self.horizon)

    @property
    def argmax_bin(self):
        return int(np.argmax(self.probs))

    @property
    def max_p(self):
        return float(np.max(self.probs))

    @property
    def resolved(self):
        return self.resolved_bin is not None and self.verifier_score is not None

    def resolve(self, verifier_score, resolved_bin):
        self.verifier_score = float(verifier_score)
        self.resolved_bin = int(resolved_bin)

    def to_row(self):
        return {
            't': self.t,
            'K': self.horizon,
            'A_id': self.a_id,
            'argmax_bin': self.argmax_bin,
            'max_p': round(self.max_p, 6),
            'B_ids': ','.join(str(b) for b in sorted(self.b_ids)),
            'verifier_score': '' if self.verifier_score is None else self.verifier_score,
            'resolved_bin': '' if self.resolved_bin is None else self.resolved_bin,
            'utterance': self.utterance,
        }


def statements_from_batch(c_t, prediction, horizon, t, episodes=None):
    """One StatementRecord per batch row of a conscious state."""
    probs = prediction.probs.value
    episodes = range(c_t.batch) if episodes is None else episodes
    return [
        StatementRecord(t=t, horizon=horizon, a_id=int(c_t.a_index[i]),
                        b_ids=tuple(int(b) for b in c_t.b_indices[i]),
                        probs=probs[i].copy(), episode=int(episode))
        for i, episode in enumerate(episodes)
    ]


def write_statement_dump(records, path):
    """
    Write statements as tab-separated lines without a header.

    Returns:
        str: The path written.
    """
    frame = pd.DataFrame([r.to_row() for r in records], columns=STATEMENT_COLUMNS)
    return save_csv(frame, path, sep='\t', header=False)
