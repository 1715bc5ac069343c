"""
Networks of the consciousness prior: F, C, the predictor, the verifier and the renderer.
"""
from src.nets.consciousness import ConsciousnessMechanism, ConsciousState
from src.nets.model import ConsciousnessModel, ValueBinner, slot_readouts
from src.nets.predictor import Prediction, Predictor
from src.nets.representation import RepresentationRNN
from src.nets.statements import StatementRecord, parse_statement, render_statement, write_statement_dump
from src.nets.verifier import Verifier
