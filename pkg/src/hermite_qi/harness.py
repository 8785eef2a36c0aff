"""Experiment harness: operators, sup-norm errors, evaluation counts and tables."""
from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import collocation_qi
from .bspline import UniformGrid
from .functions import FUNCTIONS
from .hierarchy import HierarchicalBasis, HierarchicalMesh, uniform_mesh
from .hqi import (
    AnalyticProvider,
    EvaluationCounter,
    FiniteDifferenceProvider,
    FunctionSource,
    hierarchical_comparison_qi,
    hierarchical_qi,
)
from .refine import adaptive_refine, epsilon_from_tensor, vertex_points

log = logging.getLogger(__name__)

ERROR_GRID = 301
KINDS = ("tensor", "hier", "that", "that-hier", "fd", "fd-hier")
DERIVS = ((0, 0), (1, 0), (0, 1), (1, 1))


class ConfigError(ValueError):
    pass


class Operator:
    """A quasi-interpolation operator family bound to a function and degrees.

    ``family`` is ``"Q"`` (Hermite), ``"that"`` (collocation) or ``"fd"``
    (Hermite with finite-difference derivatives).  Calling the operator on a
    mesh yields the hierarchical spline; :meth:`tensor` gives the
    single-level operator on the level-``l`` grid.
    """

    def __init__(self, family, fun, degrees, base=None, fd_orders=(3, 3), counter=None):
        if family not in ("Q", "that", "fd"):
            raise ConfigError(f"unknown operator family {family!r}")
        self.family = family
        self.fun = fun
        self.degrees = tuple(degrees)
        self.base = base or UniformGrid()
        self.fd_orders = tuple(fd_orders)
        self.counter = counter

    def _provider(self):
        if self.family == "Q":
            return AnalyticProvider(self.fun, self.counter)
        if self.family == "fd":
            return FiniteDifferenceProvider(
                FunctionSource(self.fun, counter=self.counter), self.degrees, self.fd_orders, self.base
            )
        return FunctionSource(self.fun, counter=self.counter)

    def __call__(self, mesh: HierarchicalMesh, basis=None):
        if self.family == "that":
            return hierarchical_comparison_qi(mesh, self.degrees, self._provider(), basis)
        return hierarchical_qi(mesh, self.degrees, self._provider(), basis)

    def tensor(self, level: int):
        return self(uniform_mesh(level + 1, self.base)).finest


def error_grid(domain, n=ERROR_GRID):
    a1, b1, a2, b2 = domain
    return np.linspace(a1, b1, n), np.linspace(a2, b2, n)


def sup_error(spline, fun, deriv=(0, 0), n=ERROR_GRID) -> float:
    """``max |d^(r,s) (spline - f)|`` on the ``n x n`` grid including the boundary."""
    r, s = deriv
    d1, d2 = spline.degrees
    if r > d1 or s > d2:
        raise ValueError(f"derivative order {deriv} exceeds degrees {spline.degrees}")
    xs, ys = error_grid(fun.domain, n)
    X, Y = np.meshgrid(xs, ys)
    return float(np.max(np.abs(spline.on_grid(xs, ys, deriv) - fun.derivative(r, s)(X, Y))))


def tensor_dim(degrees, grid: UniformGrid) -> int:
    return (grid.n[0] + degrees[0]) * (grid.n[1] + degrees[1])


def count_evaluations(kind, degrees, grid: UniformGrid, fd_orders=(3, 3)) -> int:
    """Closed-form number of data evaluations of the tensor operators."""
    d1, d2 = degrees
    n1, n2 = grid.n
    if kind in ("Q", "tensor"):
        return 4 * (n1 + 2 * d1 - 1) * (n2 + 2 * d2 - 1)
    if kind == "that":
        return (d1 * (n1 + d1) + 1) * (d2 * (n2 + d2) + 1)
    if kind == "fd":
        k1, k2 = fd_orders
        return (n1 + 2 * d1 - 1 + k1) * (n2 + 2 * d2 - 1 + k2)
    raise ConfigError(f"no closed form for {kind!r}")


def counted_evaluations(family, fun, degrees, mesh: HierarchicalMesh, fd_orders=(3, 3)) -> int:
    """Distinct evaluations actually requested while building the operator on ``mesh``."""
    counter = EvaluationCounter(mesh.base)
    Operator(family, fun, degrees, mesh.base, fd_orders, counter)(mesh)
    return counter.count


@dataclass
class ErrorReport:
    M: int
    h_finest: float
    dim_tensor: int
    dim_hier: int
    err_sup: float
    err_x: float
    err_y: float
    err_xy: float
    evals: int


CSV_FIELDS = [f for f in ErrorReport.__dataclass_fields__]


@dataclass
class ExperimentConfig:
    function: str = "f1"
    degrees: tuple = (3, 3)
    levels: int = 5
    qi: str = "tensor"
    fd_order: tuple = (3, 3)
    eps_factor: float = 1.5
    out: str | None = None
    base: tuple = (8, 8)
    membership: str = "owner"

    def validate(self):
        if self.function not in FUNCTIONS:
            raise ConfigError(f"function: unknown {self.function!r}, choose from {sorted(FUNCTIONS)}")
        if self.qi not in KINDS:
            raise ConfigError(f"qi: unknown {self.qi!r}, choose from {KINDS}")
        if len(self.degrees) != 2 or any(d not in (2, 3, 4) for d in self.degrees):
            raise ConfigError(f"degrees: expected two values in 2..4, got {self.degrees}")
        if self.levels < 1:
            raise ConfigError(f"levels: must be >= 1, got {self.levels}")
        if self.membership not in ("owner", "closed"):
            raise ConfigError(f"membership: expected 'owner' or 'closed', got {self.membership!r}")
        if self.eps_factor <= 0:
            raise ConfigError(f"eps_factor: must be positive, got {self.eps_factor}")
        if self.qi.startswith("fd") and any(k < d for k, d in zip(self.fd_order, self.degrees)):
            raise ConfigError(f"fd_order: {self.fd_order} must be >= degrees {self.degrees}")
        return self

    @property
    def family(self) -> str:
        return {"tensor": "Q", "hier": "Q", "that": "that", "that-hier": "that",
                "fd": "fd", "fd-hier": "fd"}[self.qi]

    @property
    def hierarchical(self) -> bool:
        return self.qi.endswith("hier")

    @property
    def stem(self) -> str:
        return f"{self.function}_{self.qi}_d{self.degrees[0]}{self.degrees[1]}"


def parse_config_text(text: str) -> ExperimentConfig:
    """``key = value`` lines; keys use the command-line flag names."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = val
    if not values:
        raise ConfigError("empty configuration")
    return config_from_mapping(values)


def _pair(text, name):
    try:
        a, b = (int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"{name}: expected 'a,b', got {text!r}") from exc
    return (a, b)


def config_from_mapping(values: dict) -> ExperimentConfig:
    known = {"function", "degrees", "levels", "qi", "fd_order", "eps_factor", "out", "base", "membership"}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    kw = {}
    try:
        if "function" in values:
            kw["function"] = str(values["function"])
        if "qi" in values:
            kw["qi"] = str(values["qi"])
        if "levels" in values:
            kw["levels"] = int(values["levels"])
        if "eps_factor" in values:
            kw["eps_factor"] = float(values["eps_factor"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for key in ("degrees", "fd_order", "base"):
        if key in values:
            kw[key] = _pair(values[key], key)
    for key in ("out", "membership"):
        if key in values:
            kw[key] = str(values[key])
    return ExperimentConfig(**kw).validate()


def config_from_stem(stem: str, **overrides) -> ExperimentConfig:
    """Inverse of :attr:`ExperimentConfig.stem`, e.g. ``"f2_that-hier_d33"``."""
    try:
        function, qi, deg = stem.split("_")
        if not (deg.startswith("d") and len(deg) == 3):
            raise ValueError
        degrees = (int(deg[1]), int(deg[2]))
    except ValueError as exc:
        raise ConfigError(f"cannot parse run name {stem!r}; expected e.g. 'f1_hier_d33'") from exc
    return ExperimentConfig(function=function, qi=qi, degrees=degrees, **overrides).validate()


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reports: list
    epsilon: float | None = None
    meshes: list = field(default_factory=list)
    stopped_by_tolerance: bool | None = None


def _report(spline, fun, M, grid, dim_hier, evals):
    errs = [sup_error(spline, fun, rs) for rs in DERIVS]
    return ErrorReport(M, grid.h[0], tensor_dim(spline.degrees, grid), dim_hier, *errs, evals)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Tensor runs sweep levels ``0..K-1``; hierarchical runs follow the adaptive loop."""
    config.validate()
    fun = FUNCTIONS[config.function]
    base = UniformGrid(fun.domain, config.base)
    degrees = tuple(config.degrees)
    reports, meshes = [], []
    if not config.hierarchical:
        for level in range(config.levels):
            counter = EvaluationCounter(base)
            op = Operator(config.family, fun, degrees, base, config.fd_order, counter)
            spline = op.tensor(level)
            g = base.refined(level)
            reports.append(_report(spline, fun, level + 1, g, tensor_dim(degrees, g), counter.count))
            meshes.append(uniform_mesh(level + 1, base))
        result = ExperimentResult(config, reports, meshes=meshes)
    else:
        op = Operator(config.family, fun, degrees, base, config.fd_order)
        points = vertex_points(base, config.levels - 1)
        f_values = fun(*points)
        eps = epsilon_from_tensor(lambda: op.tensor(config.levels - 1), f_values, points, config.eps_factor)
        res = adaptive_refine(op, f_values, points, config.levels, eps, base, config.membership)
        for rec in res.trace:
            g = rec.mesh.grid(rec.depth - 1)
            evals = counted_evaluations(config.family, fun, degrees, rec.mesh, config.fd_order)
            reports.append(_report(rec.spline, fun, rec.depth, g, rec.dim, evals))
            meshes.append(rec.mesh)
        result = ExperimentResult(config, reports, eps, meshes, res.stopped_by_tolerance)
    if config.out:
        write_outputs(result, Path(config.out))
    return result


def format_number(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.3e}"


def write_csv(reports, path: Path):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for r in reports:
                w.writerow([format_number(v) for v in asdict(r).values()])
    except OSError as exc:
        raise OSError(f"cannot write table {path}: {exc}") from exc


def read_csv(path: Path) -> list:
    with Path(path).open(newline="") as fh:
        return [
            {k: (float(v) if v not in ("", None) else None) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]


def render_table(reports) -> str:
    rows = [CSV_FIELDS] + [[format_number(v) for v in asdict(r).values()] for r in reports]
    widths = [max(len(r[k]) for r in rows) for k in range(len(CSV_FIELDS))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"


def write_outputs(result: ExperimentResult, out: Path):
    from .export import export_mesh_svg, export_mesh_text

    out.mkdir(parents=True, exist_ok=True)
    stem = result.config.stem
    write_csv(result.reports, out / f"{stem}.csv")
    (out / f"{stem}.txt").write_text(render_table(result.reports))
    if result.config.hierarchical and result.meshes:
        export_mesh_text(result.meshes[-1], out / f"{stem}_mesh.txt")
        export_mesh_svg(result.meshes[-1], out / f"{stem}_mesh.svg")


DEFAULT_TOLERANCES = {"err_sup": 0.01, "err_x": 0.02, "err_y": 0.02, "err_xy": 0.02}


def compare_tables(produced, expected, tolerances=None) -> list:
    """Per-cell comparison; returns ``(M, column, got, want, rel, ok)`` tuples.

    Columns missing from ``expected`` (or empty there) are skipped.
    """
    tolerances = tolerances or DEFAULT_TOLERANCES
    want = {int(r["M"]): r for r in expected}
    out = []
    for row in produced:
        ref = want.get(int(row["M"]))
        if ref is None:
            continue
        for col, tol in tolerances.items():
            if ref.get(col) is None or row.get(col) is None:
                continue
            rel = abs(row[col] - ref[col]) / abs(ref[col]) if ref[col] else abs(row[col])
            out.append((int(row["M"]), col, row[col], ref[col], rel, rel <= tol))
    return out


def reference_names() -> list:
    from importlib.resources import files

    return sorted(p.name[:-4] for p in files("hermite_qi").joinpath("reference").iterdir()
                  if p.name.endswith(".csv"))


def reference_table(stem: str) -> list:
    """Bundled reference values for run ``stem`` (e.g. ``f1_hier_d22``) as rows of floats."""
    from importlib.resources import files

    res = files("hermite_qi").joinpath("reference", f"{stem}.csv")
    if not res.is_file():
        raise KeyError(f"no reference table {stem!r}; available: {', '.join(reference_names())}")
    with res.open() as fh:
        return [
            {k: (float(v) if v else None) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]


def reports_as_rows(reports) -> list:
    return [{k: float(v) for k, v in asdict(r).items()} for r in reports]
