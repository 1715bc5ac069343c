"""
Evaluation: probes, mutual information, statement resolution, the pixel baseline and reports.
"""
from src.harness.baseline import BaselineModel, PixelBaseline, eval_baseline, train_baseline
from src.harness.diagnostics import run_gradcheck
from src.harness.evaluation import EvalReport, eval_trajectories, evaluate, rollout_model
from src.harness.information import histogram_discretize, mi_frame, mutual_information
from src.harness.probes import ProbeReport, auc_score, probe_outcome
from src.harness.report import write_eval_outputs
from src.harness.resolution import StatementResolution, resolve_statements
