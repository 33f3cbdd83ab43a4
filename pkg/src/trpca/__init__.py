"""Robust PCA by minimizing the trimmed reconstruction error over the Stiefel manifold."""

from .core import (
    SubspaceModel,
    TrimmedFitReport,
    TrimmedObjectiveSpec,
    default_t,
    fit,
    reduced_objective,
    reduced_residuals,
    residuals,
    supergradient,
    trimmed_objective,
    trpca_fit,
    trpca_multistart,
    update_basis,
    update_center,
)
from .datagen import ContaminatedDataset, GeneratorParams, gen_data1, gen_data2, mix
from .errors import DataError, DimensionError, NumericError
from .evaluation import BackgroundSplit, SweepResult, principal_angles, run_sweep, split_background, tre
from .pca import PcaModel, pca_fit, true_pca
from .stiefel import polar, random_frame, stiefel_min_linear

__version__ = "0.1.0"
