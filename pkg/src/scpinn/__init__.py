"""Physics-informed networks trained with Sobolev-cubature losses and polynomial differentiation."""

__version__ = "0.1.0"

from .grid import integrate, lagrange_interpolate, legendre_rule, multi_index_set, tensor_grid
from .diff import apply_axis, apply_multi, diff_matrix_1d, laplacian
from .sobolev import BoundaryForm, SobolevForm, boundary_quadratic, sobolev_gradient, sobolev_quadratic
from .nn import MLPArchitecture, forward_batch, init, vjp_weights
from .jets import Jet, mse_loss_and_grad, nn_axis_derivatives
from .problems import catalog, error_metrics, get_problem, hermite
from .losses import LossEvaluator, LossSpec, assemble_residuals, loss_and_grad
from .optim import AdamState, TrainConfig, adam_step, train, train_inverse

__all__ = [
    "AdamState", "BoundaryForm", "Jet", "LossEvaluator", "LossSpec", "MLPArchitecture", "SobolevForm",
    "TrainConfig", "adam_step", "apply_axis", "apply_multi", "assemble_residuals", "boundary_quadratic",
    "catalog", "diff_matrix_1d", "error_metrics", "forward_batch", "get_problem", "hermite", "init",
    "integrate", "lagrange_interpolate", "laplacian", "legendre_rule", "loss_and_grad", "mse_loss_and_grad",
    "multi_index_set", "nn_axis_derivatives", "sobolev_gradient", "sobolev_quadratic", "tensor_grid",
    "train", "train_inverse", "vjp_weights",
]
