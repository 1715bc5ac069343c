"""
Dense float64 arrays with reverse-mode gradients, seeded sampling and Adam.
"""
from src.tensor.autograd import Node, backward, constant, no_grad, parameter, stop_gradient, variable
from src.tensor.gradcheck import grad_check, grad_check_store
from src.tensor.optim import AdamConfig, adam_step
from src.tensor.params import ParameterStore, glorot_uniform
from src.tensor.rng import SeededRng
from src.tensor.sampling import gumbel_sample, top_k, top_k_rows
