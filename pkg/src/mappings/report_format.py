"""
This module defines the column layouts of every file a run writes.
"""

# One JSON object per training step, keys in this order
METRICS_FIELDS = [
    'step',
    'total',
    'nce',
    'pred',
    'ent',
    'div',
    'tau',
    'slot_usage',
]

LOSS_CURVE_COLUMNS = ['step', 'total', 'nce', 'pred']

AUC_BY_SEED_COLUMNS = ['seed', 'source', 'auc']

MI_MATRIX_COLUMNS = ['slot', 'factor', 'mi', 'n']

ORACLE_COLUMNS = ['state_id', 'pile', 'K', 'probability']

GRADCHECK_COLUMNS = ['component', 'points', 'max_error', 'coordinates']

# Statement dump: tab-separated, no header
STATEMENT_COLUMNS = [
    't',
    'K',
    'A_id',
    'argmax_bin',
    'max_p',
    'B_ids',
    'verifier_score',
    'resolved_bin',
    'utterance',
]

# Ground-truth factors per pile used by the mutual-information table
PILE_FACTORS = ['height', 'offset', 'standing']
