"""Derivative-free minimisers with evaluation budgets.

* :func:`random_search` is the biased random walk: a probe ``x + b + dx``, a
  mirrored probe ``x + b - dx``, and three bias update rules.
* :func:`downhill_simplex` is Nelder-Mead.
* :func:`improved_downhill_simplex` is Nelder-Mead that, once the simplex has
  collapsed, throws a fresh random simplex into the search box and carries on,
  keeping the best point seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset import BoundingBox


class Objective:
    """A real function of ``arity`` variables that counts its evaluations."""

    def __init__(self, fn: Callable[[np.ndarray], float], arity: int):
        self.fn = fn
        self.arity = arity
        self.eval_count = 0

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.arity,):
            raise ValueError(f"expected a vector of length {self.arity}, got shape {x.shape}")
        self.eval_count += 1
        value = float(self.fn(x))
        if not np.isfinite(value):
            raise FloatingPointError(f"objective returned {value} at {x}")
        return value

    evaluate = __call__


class BudgetExhausted(Exception):
    pass


class _Budget:
    """Wraps an objective, enforces ``max_evals`` and tracks the incumbent."""

    def __init__(self, obj: Objective, max_evals: int):
        self.obj = obj
        self.max_evals = max_evals
        self.used = 0
        self.best_x: np.ndarray | None = None
        self.best_f = np.inf

    @property
    def remaining(self) -> int:
        return self.max_evals - self.used

    def offer(self, x, f):
        if f < self.best_f:
            self.best_x = np.array(x, dtype=float)
            self.best_f = f

    def __call__(self, x) -> float:
        if self.used >= self.max_evals:
            raise BudgetExhausted
        self.used += 1
        f = self.obj(x)
        self.offer(x, f)
        return f


@dataclass(frozen=True)
class RsConfig:
    max_evals: int = 2000
    # std-dev of each coordinate of dx; scalar or per-coordinate vector
    step_scale: float | np.ndarray = 0.1

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if np.any(np.asarray(self.step_scale) <= 0):
            raise ValueError("step_scale must be positive")


@dataclass(frozen=True)
class DsConfig:
    max_evals: int = 2000
    alpha: float = 1.0
    gamma: float = 2.0
    rho: float = 0.5
    shrink: float = 0.5
    # absolute collapse threshold; when None, collapse_rel times a reference diameter
    collapse_tol: float | None = None
    collapse_rel: float = 1e-4
    max_restarts: int = 10
    # initial simplex edge, as a fraction of the box width per coordinate
    initial_step: float = 0.1

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if not self.alpha > 0:
            raise ValueError("reflection coefficient must be > 0")
        if not self.gamma > 1:
            raise ValueError("expansion coefficient must be > 1")
        if not 0 < self.rho < 1:
            raise ValueError("contraction coefficient must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must lie in (0, 1)")
        if self.collapse_tol is not None and not self.collapse_tol > 0:
            raise ValueError("collapse_tol must be > 0")
        if not self.collapse_rel > 0:
            raise ValueError("collapse_rel must be > 0")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be >= 0")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be > 0")

    def collapse_threshold(self, reference_diameter: float) -> float:
        if self.collapse_tol is not None:
            return self.collapse_tol
        return self.collapse_rel * reference_diameter


@dataclass
class TraceEntry:
    evaluations: int
    best_value: float
    spread: float  # simplex diameter, or bias norm for random search


@dataclass
class RsStep:
    dx: np.ndarray
    branch: str  # "forward", "backward" or "damp"
    bias: np.ndarray


@dataclass
class RestartEvent:
    evaluations: int
    diameter: float
    threshold: float
    incumbent: float


@dataclass
class OptimizerResult:
    best_point: np.ndarray
    best_value: float
    evaluations: int
    trace: list[TraceEntry] = field(default_factory=list)
    restarts: int = 0
    iterations: int = 0
    steps: list[RsStep] = field(default_factory=list)
    restart_events: list[RestartEvent] = field(default_factory=list)
    collapse_threshold: float | None = None


# --------------------------------------------------------------------- random search


def random_search_step(f, x, fx, bias, dx):
    """One random-search iteration.

    Returns ``(x, fx, bias, branch, evaluations)``. The second probe is skipped
    when ``f`` raises :class:`BudgetExhausted`, in which case the bias stays.
    """
    forward = x + bias + dx
    f_fwd = f(forward)
    if f_fwd < fx:
        return forward, f_fwd, 0.2 * bias + 0.4 * dx, "forward", 1
    backward = x + bias - dx
    try:
        f_bwd = f(backward)
    except BudgetExhausted:
        return x, fx, bias, "exhausted", 1
    if f_bwd < fx:
        return backward, f_bwd, bias - 0.4 * dx, "backward", 2
    return x, fx, 0.5 * bias, "damp", 2


def replay_bias(steps: list[RsStep], m: int) -> list[np.ndarray]:
    """Recompute the bias sequence of a logged run from its dx draws and branches."""
    bias = np.zeros(m)
    out = []
    for step in steps:
        if step.branch == "forward":
            bias = 0.2 * bias + 0.4 * step.dx
        elif step.branch == "backward":
            bias = bias - 0.4 * step.dx
        elif step.branch == "damp":
            bias = 0.5 * bias
        out.append(bias)
    return out


def random_search(obj: Objective, x0, cfg: RsConfig, rng: np.random.Generator) -> OptimizerResult:
    x = np.array(x0, dtype=float)
    if x.shape != (obj.arity,):
        raise ValueError("x0 length must equal the objective arity")
    f = _Budget(obj, cfg.max_evals)
    fx = f(x)
    bias = np.zeros_like(x)
    scale = np.broadcast_to(np.asarray(cfg.step_scale, dtype=float), x.shape)
    trace = [TraceEntry(f.used, fx, 0.0)]
    steps: list[RsStep] = []
    while f.remaining > 0:
        dx = rng.normal(0.0, 1.0, size=x.shape) * scale
        x, fx, bias, branch, _ = random_search_step(f, x, fx, bias, dx)
        steps.append(RsStep(dx, branch, bias))
        trace.append(TraceEntry(f.used, fx, float(np.linalg.norm(bias))))
    return OptimizerResult(
        best_point=x,
        best_value=fx,
        evaluations=f.used,
        trace=trace,
        iterations=len(steps),
        steps=steps,
    )


# --------------------------------------------------------------------------- simplex


@dataclass
class Simplex:
    """Vertices (rows) and cached values, kept sorted best to worst."""

    vertices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.vertices = np.array(self.vertices, dtype=float)
        self.values = np.array(self.values, dtype=float)
        m1, m = self.vertices.shape
        if m1 != m + 1 or self.values.shape != (m1,):
            raise ValueError("a simplex in R^m needs m+1 vertices and m+1 values")
        order = np.argsort(self.values, kind="stable")
        self.vertices = self.vertices[order]
        self.values = self.values[order]

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def best(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def best_value(self) -> float:
        return float(self.values[0])

    @classmethod
    def from_vertices(cls, vertices, f) -> "Simplex":
        vertices = np.asarray(vertices, dtype=float)
        return cls(vertices, [f(v) for v in vertices])


def init_simplex(obj, x0, h) -> Simplex:
    """Axis-aligned simplex: ``x0`` plus ``x0 + h_j e_j`` for every coordinate."""
    x0 = np.asarray(x0, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), x0.shape)
    if np.any(h <= 0):
        raise ValueError("simplex step must be positive")
    vertices = np.vstack([x0, x0 + np.diag(h)])
    return Simplex.from_vertices(vertices, obj)


def simplex_diameter(s: Simplex | np.ndarray) -> float:
    v = s.vertices if isinstance(s, Simplex) else np.asarray(s, dtype=float)
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max()))


def nelder_mead_step(s: Simplex, obj, cfg: DsConfig) -> Simplex:
    v, fv = s.vertices, s.values
    worst, f_worst = v[-1], fv[-1]
    f_second = fv[-2]
    centroid = v[:-1].mean(axis=0)

    def replace_worst(x, fx):
        vertices = v.copy()
        values = fv.copy()
        vertices[-1] = x
        values[-1] = fx
        return Simplex(vertices, values)

    reflected = centroid + cfg.alpha * (centroid - worst)
    f_r = obj(reflected)
    if f_r < fv[0]:
        expanded = centroid + cfg.gamma * (reflected - centroid)
        f_e = obj(expanded)
        if f_e < f_r:
            return replace_worst(expanded, f_e)
        return replace_worst(reflected, f_r)
    if f_r < f_second:
        return replace_worst(reflected, f_r)
    if f_r < f_worst:
        contracted = centroid + cfg.rho * (reflected - centroid)
        f_c = obj(contracted)
        if f_c <= f_r:
            return replace_worst(contracted, f_c)
    else:
        contracted = centroid + cfg.rho * (worst - centroid)
        f_c = obj(contracted)
        if f_c < f_worst:
            return replace_worst(contracted, f_c)

    best = v[0]
    vertices = v.copy()
    values = fv.copy()
    for i in range(1, len(vertices)):
        vertices[i] = best + cfg.shrink * (vertices[i] - best)
        values[i] = obj(vertices[i])
    return Simplex(vertices, values)


def _result(budget: _Budget, trace, iterations, restarts=0, events=(), threshold=None):
    return OptimizerResult(
        best_point=budget.best_x,
        best_value=budget.best_f,
        evaluations=budget.used,
        trace=trace,
        restarts=restarts,
        iterations=iterations,
        restart_events=list(events),
        collapse_threshold=threshold,
    )


def _descend(s: Simplex, budget: _Budget, cfg: DsConfig, threshold: float, trace):
    """Nelder-Mead until collapse or budget exhaustion.

    Returns ``(simplex, diameter, iterations, exhausted)``.
    """
    iterations = 0
    diameter = simplex_diameter(s)
    while diameter >= threshold:
        if budget.remaining <= 0:
            return s, diameter, iterations, True
        try:
            s = nelder_mead_step(s, budget, cfg)
        except BudgetExhausted:
            trace.append(TraceEntry(budget.used, budget.best_f, diameter))
            return s, diameter, iterations + 1, True
        iterations += 1
        previous, diameter = diameter, simplex_diameter(s)
        trace.append(TraceEntry(budget.used, budget.best_f, diameter))
        # shrinking at machine scale makes no further progress
        if diameter == 0.0 or (diameter == previous and diameter < 1e-12 * (1 + np.abs(s.best).max())):
            break
    return s, diameter, iterations, False


def _seeded_budget(obj, s0: Simplex, cfg: DsConfig) -> _Budget:
    """Budget whose first m+1 evaluations are the already-cached initial simplex."""
    budget = _Budget(obj, cfg.max_evals)
    budget.used = min(len(s0.values), cfg.max_evals)
    budget.offer(s0.vertices[0], float(s0.values[0]))
    return budget


def downhill_simplex(obj, s0: Simplex, cfg: DsConfig, collapse_tol: float | None = None) -> OptimizerResult:
    """Nelder-Mead from ``s0``.

    The m+1 evaluations that produced ``s0`` count toward ``cfg.max_evals``.
    Without an explicit threshold, collapse means the diameter fell below
    ``cfg.collapse_rel`` times the diameter of ``s0``.
    """
    threshold = collapse_tol if collapse_tol is not None else cfg.collapse_threshold(simplex_diameter(s0))
    budget = _seeded_budget(obj, s0, cfg)
    trace = [TraceEntry(budget.used, budget.best_f, simplex_diameter(s0))]
    _, _, iterations, _ = _descend(s0, budget, cfg, threshold, trace)
    return _result(budget, trace, iterations, threshold=threshold)


def improved_downhill_simplex(
    obj,
    box: BoundingBox,
    cfg: DsConfig,
    rng: np.random.Generator,
    s0: Simplex | None = None,
) -> OptimizerResult:
    """Nelder-Mead with random restarts inside ``box`` whenever the simplex collapses.

    Each restart draws all m+1 vertices uniformly in ``box``; the incumbent is
    kept outside the simplex so the reported best never gets worse. With
    ``cfg.max_restarts == 0`` this is exactly :func:`downhill_simplex` run with
    the box-derived collapse threshold.
    """
    threshold = cfg.collapse_threshold(box.diameter)
    if s0 is None:
        x0 = box.sample(rng)
        h = cfg.initial_step * np.where(box.widths > 0, box.widths, 1.0)
        budget = _Budget(obj, cfg.max_evals)
        try:
            s0 = init_simplex(budget, x0, h)
        except BudgetExhausted:
            return _result(budget, [TraceEntry(budget.used, budget.best_f, 0.0)], 0, threshold=threshold)
    else:
        budget = _seeded_budget(obj, s0, cfg)

    trace = [TraceEntry(budget.used, budget.best_f, simplex_diameter(s0))]
    s = s0
    iterations = 0
    restarts = 0
    events: list[RestartEvent] = []
    while True:
        s, diameter, its, exhausted = _descend(s, budget, cfg, threshold, trace)
        iterations += its
        if exhausted or budget.remaining <= 0 or restarts >= cfg.max_restarts:
            break
        if diameter >= threshold:
            # stalled at machine scale above the threshold: nothing left to do
            break
        restarts += 1
        events.append(RestartEvent(budget.used, diameter, threshold, budget.best_f))
        vertices = box.sample(rng, size=box.lower.size + 1)
        values = []
        try:
            for vertex in vertices:
                values.append(budget(vertex))
        except BudgetExhausted:
            trace.append(TraceEntry(budget.used, budget.best_f, simplex_diameter(vertices)))
            break
        s = Simplex(vertices, values)
        trace.append(TraceEntry(budget.used, budget.best_f, simplex_diameter(s)))
    return _result(budget, trace, iterations, restarts, events, threshold)
