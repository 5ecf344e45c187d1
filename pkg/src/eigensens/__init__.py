"""Eigenvalue sensitivity analysis through KDE-estimated mutual information."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .dataset import Dataset, read_csv, to_csv
from .errors import (
    CapacityError,
    ComplexEigenvalueError,
    DegenerateColumnError,
    EigensensError,
    EmptyGridError,
    NumericalError,
    ValidationError,
)
from .grid import GridConfig, ProbabilityGrid, build_grid_product, build_grid_reference, marginal
from .infotheory import MiResult, entropy, joint_entropy, mutual_information, normalize_mi
from .kde import BandwidthSpec, KdeModel, cdf, pdf, silverman_bandwidth
from .sdmodel import generate_dataset
from .sensitivity import PipelineConfig, SensitivityReport, leave_one_out, minmax_normalize, total_mi
