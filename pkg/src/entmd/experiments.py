"""Instance generation and the two benchmark experiments, emitting CSV.

Experiment 1 compares the five solver variants on one random instance:
cumulative-minimum objective and divergence to an estimated limit, per
iteration per method.  Experiment 2 sweeps initialization scales for the
exponential Polyak scheme.  All output is deterministic for a fixed config:
one CSV per panel plus a key=value sidecar with the generation parameters,
written with 17 significant digits and LF line endings.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError
from .linalg import max_col_norm_sq, random_orthogonal, seeded_rng
from .solvers import Method, ProblemInstance, SolveConfig, SolveResult, Status, solve

__all__ = [
    "SingularLaw",
    "InstanceSpec",
    "ExperimentConfig",
    "gen_instance",
    "grid_search_constant",
    "run_experiment1",
    "run_experiment2",
]


class SingularLaw(enum.Enum):
    """Distribution of the nonzero singular values; both names draw |N(0,1)|
    (the absolute-normal reading of a normal spectrum for rectangular A)."""

    HALF_NORMAL = "half_normal"
    ABS_NORMAL = "abs_normal"


@dataclass(frozen=True)
class InstanceSpec:
    """Shape, sparsity and seed of a generated instance.

    ``sparsity=None`` plants a dense solution; otherwise exactly that many
    coordinates are nonzero.
    """

    m: int
    n: int
    sparsity: int | None = None
    singular_law: SingularLaw = SingularLaw.HALF_NORMAL
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DomainError("m and n must be positive")
        if self.sparsity is not None and not (1 <= self.sparsity <= self.n):
            raise DomainError("sparsity must lie in [1, n] or be None for dense")
        if self.m > self.n:
            warnings.warn("m > n: the system is not underdetermined", stacklevel=2)


@dataclass(eq=False)
class ExperimentConfig:
    spec: InstanceSpec
    methods: list[Method] = field(default_factory=lambda: [Method.md_polyak()])
    iters: int = 5_000
    limit_extra_iters: int = 5_000
    inits: list[float] = field(default_factory=lambda: [1e-4])
    out_path: str | Path = "."

    def __post_init__(self):
        if int(self.iters) < 1:
            raise DomainError("iters must be at least 1")
        if int(self.limit_extra_iters) < 0:
            raise DomainError("limit_extra_iters must be nonnegative")
        if not self.inits or any(s <= 0 for s in self.inits):
            raise DomainError("initialization scales must be positive")
        self.out_path = Path(self.out_path)


def gen_instance(spec: InstanceSpec) -> ProblemInstance:
    """Draw A = U diag(sigma) V^T and a planted nonnegative solution.

    Deterministic given the seed; the draw order from one Philox stream is:
    the (m, m) Gaussian block behind U, the (n, n) block behind V, the
    min(m, n) singular values |N(0, 1)|, the support indices (uniform
    without replacement), and the support values (uniform on [0, 1]).
    """
    rng = seeded_rng(spec.seed)
    u = random_orthogonal(spec.m, rng)
    v = random_orthogonal(spec.n, rng)
    k = min(spec.m, spec.n)
    sigma = np.abs(rng.standard_normal(k))
    a = (u[:, :k] * sigma) @ v[:, :k].T
    z = np.zeros(spec.n)
    if spec.sparsity is None:
        z = rng.uniform(0.0, 1.0, spec.n)
    else:
        support = rng.choice(spec.n, size=spec.sparsity, replace=False)
        z[support] = rng.uniform(0.0, 1.0, spec.sparsity)
    return ProblemInstance(a, a @ z, planted=z)


def grid_search_constant(p: ProblemInstance, x0, iters: int, num: int = 25,
                         span: tuple[float, float] = (1e-2, 1e2)) -> tuple[float, SolveResult]:
    """Best fixed stepsize from a log grid, judged by the smallest objective
    reached within the budget.

    The grid spans ``span`` relative to 1 / max_col_norm_sq(A), which puts
    the stable regime inside the sweep for any matrix scaling.
    """
    mc = max_col_norm_sq(p.a)
    grid = np.geomspace(span[0] / mc, span[1] / mc, num)
    best_alpha = None
    best_res = None
    best_f = np.inf
    for alpha in grid:
        cfg = SolveConfig(Method.md_constant(float(alpha)), x0, max_iters=iters, f_tol=0.0)
        res = solve(p, cfg)
        f_min = min((rec.f_value for rec in res.trace), default=np.inf)
        if res.status is Status.CONVERGED:
            f_min = 0.0
        if f_min < best_f:
            best_f, best_alpha, best_res = f_min, float(alpha), res
    return best_alpha, best_res


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_csv(path: Path, labels: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0])
    with open(path, "w", newline="\n") as fh:
        fh.write("iter," + ",".join(labels) + "\n")
        for i in range(rows):
            fh.write(str(i) + "," + ",".join(_fmt(col[i]) for col in columns) + "\n")


def _write_sidecar(path: Path, cfg: ExperimentConfig, extra: dict) -> None:
    spec = cfg.spec
    lines = {
        "m": spec.m,
        "n": spec.n,
        "sparsity": "dense" if spec.sparsity is None else spec.sparsity,
        "singular_law": spec.singular_law.value,
        "seed": spec.seed,
        "iters": cfg.iters,
        "limit_extra_iters": cfg.limit_extra_iters,
        "inits": ",".join(_fmt(s) for s in cfg.inits),
        "version": __version__,
    }
    lines.update(extra)
    with open(path, "w", newline="\n") as fh:
        for key, value in lines.items():
            fh.write(f"{key}={value}\n")


def _padded(values: list[float], length: int, fallback: float = 0.0) -> np.ndarray:
    """Front-run of a per-iteration series padded to fixed length with its
    last value (runs that stop early hold their final level)."""
    out = np.empty(length)
    k = min(len(values), length)
    out[:k] = values[:k]
    out[k:] = values[k - 1] if k > 0 else fallback
    return out


def _cummin(values: list[float], length: int) -> np.ndarray:
    if not values:
        return np.zeros(length)
    return np.minimum.accumulate(_padded(values, length))


def run_experiment1(cfg: ExperimentConfig) -> list[Path]:
    """Method comparison on one instance; writes two CSVs and a sidecar.

    Each method runs ``iters + limit_extra_iters`` iterations from
    ``inits[0] * ones``; the final iterate estimates the limit.  Panel one is
    the cumulative-minimum objective over the first ``iters`` iterations per
    method, panel two the divergence from the limit estimate to each iterate.
    """
    if not cfg.methods:
        raise DomainError("experiment 1 needs at least one method")
    p = gen_instance(cfg.spec)
    scale = cfg.inits[0]
    cummin_cols: list[np.ndarray] = []
    div_cols: list[np.ndarray] = []
    labels: list[str] = []
    statuses: dict[str, str] = {}

    for method in cfg.methods:
        if method.kind == "md_constant_grid":
            x0 = np.full(p.n, scale)
            alpha, long_res = grid_search_constant(p, x0, cfg.iters + cfg.limit_extra_iters)
            resolved = Method.md_constant(alpha)
            label = "md_constant_opt"
        else:
            resolved = method
            label = method.label
            x0 = np.full(p.n * 2 if method.kind == "eg_pm" else p.n, scale)
            long_res = solve(p, SolveConfig(resolved, x0,
                                            max_iters=cfg.iters + cfg.limit_extra_iters,
                                            f_tol=0.0))
        limit_est = long_res.x_final if resolved.kind != "eg_pm" else long_res.w_final
        # Rerun the identical deterministic trajectory, now recording the
        # divergence to the estimated limit (no descent checking: the
        # reference is an estimate, not an exact solution).
        div_res = solve(p, SolveConfig(resolved, x0, max_iters=cfg.iters, f_tol=0.0,
                                       trace_reference=np.clip(limit_est, 0.0, None),
                                       check_descent=False))
        labels.append(label)
        statuses[f"status.{label}"] = long_res.status.value
        cummin_cols.append(_cummin([r.f_value for r in long_res.trace], cfg.iters))
        div_cols.append(_padded([r.d_h_to_ref for r in div_res.trace], cfg.iters))

    out = cfg.out_path
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "exp1_cummin.csv", out / "exp1_divergence.csv", out / "exp1_meta.txt"]
    _write_csv(paths[0], labels, cummin_cols)
    _write_csv(paths[1], labels, div_cols)
    _write_sidecar(paths[2], cfg, {"methods": ",".join(labels), **statuses})
    return paths


def run_experiment2(cfg: ExperimentConfig) -> list[Path]:
    """Initialization-scale sweep for the exponential Polyak scheme.

    One cumulative-minimum objective column per scale in ``inits``.
    """
    p = gen_instance(cfg.spec)
    labels = []
    cols = []
    statuses = {}
    for scale in cfg.inits:
        label = f"x0_{scale:g}"
        res = solve(p, SolveConfig(Method.md_polyak(), np.full(p.n, scale),
                                   max_iters=cfg.iters, f_tol=0.0))
        labels.append(label)
        statuses[f"status.{label}"] = res.status.value
        cols.append(_cummin([r.f_value for r in res.trace], cfg.iters))
    out = cfg.out_path
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "exp2_cummin.csv", out / "exp2_meta.txt"]
    _write_csv(paths[0], labels, cols)
    _write_sidecar(paths[1], cfg, {"methods": "md_polyak"})
    return paths
