"""Hermite spline quasi-interpolation on uniform and hierarchical (THB) spline spaces."""
from .bspline import UniformGrid, bspline_deriv, bspline_eval
from .collocation_qi import comparison_qi
from .functions import FUNCTIONS, TestFunction, f1, f2, plane_wave, polynomial_function
from .harness import ExperimentConfig, Operator, run_experiment, sup_error
from .hierarchy import HierarchicalBasis, HierarchicalMesh, ThbBasis, uniform_mesh
from .hqi import (
    AnalyticProvider,
    FiniteDifferenceProvider,
    FunctionSource,
    HierSpline,
    hierarchical_comparison_qi,
    hierarchical_qi,
)
from .refine import adaptive_refine
from .tensor_qi import HermiteData, TensorSpline, tensor_qi, tensor_spline
from .uniform_qi import qi_coefficients

__all__ = [
    "AnalyticProvider", "ExperimentConfig", "FUNCTIONS", "FiniteDifferenceProvider", "FunctionSource",
    "HermiteData", "HierSpline", "HierarchicalBasis", "HierarchicalMesh", "Operator", "TensorSpline",
    "TestFunction", "ThbBasis", "UniformGrid", "adaptive_refine", "bspline_deriv", "bspline_eval",
    "comparison_qi", "f1", "f2", "hierarchical_comparison_qi", "hierarchical_qi", "plane_wave",
    "polynomial_function", "qi_coefficients", "run_experiment", "sup_error", "tensor_qi", "tensor_spline",
    "uniform_mesh",
]
