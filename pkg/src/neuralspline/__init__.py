"""Shallow power-activation networks, their spline representations, and reference solvers."""

from .activations import RELU, PowerActivation, check_admissibility, parse_activation
from .data import Dataset, generate, load_dataset
from .errors import InputError, NumericalError, TrainingError, UnsupportedOperation
from .model import NetworkParams, balance, forward, gradient, to_canonical_spline
from .oracle import GridProblem, solve, solve_data
from .regularizers import RegKind, path_norm, seminorm_of_network, weight_decay
from .splines import CanonicalSpline, connect_the_dots, natural_cubic, spline_seminorm
from .training import TrainConfig, train

__all__ = [
    "RELU", "PowerActivation", "check_admissibility", "parse_activation",
    "Dataset", "generate", "load_dataset",
    "InputError", "NumericalError", "TrainingError", "UnsupportedOperation",
    "NetworkParams", "balance", "forward", "gradient", "to_canonical_spline",
    "GridProblem", "solve", "solve_data",
    "RegKind", "path_norm", "seminorm_of_network", "weight_decay",
    "CanonicalSpline", "connect_the_dots", "natural_cubic", "spline_seminorm",
    "TrainConfig", "train",
]
