"""Test functions, Gaussian expectations and the ``lhs <= bound`` checks.

The distances d2/d3 are suprema over function classes and are not computable.
Every check here compares a bound with ``|E g(F) - E g(Y)|`` for individual
test functions ``g``, which only certifies the bound against lower estimates
of the distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import core
from .bounds import (
    BoundReport,
    GaussianTarget,
    NotPositiveDefiniteError,
    SmoothnessConstants,
    _target,
    slepian_bound,
    stein_bound,
)
from .core import JointTable, ProductModel, StatisticVector
from .montecarlo import McConfig
from .quadforms import QuadFormSpec, build_quadratic_form, qf_bound, qf_conditions
from .rademacher import is_rademacher, rademacher_bounds
from .runs import RunsSpec, build_runs_statistic, runs_bound, runs_covariance

PASS_TOL = 1e-9
NULL_EIG_TOL = 1e-12
QUADRATURE_MAX_DIM = 3


@dataclass(frozen=True)
class SmoothTestFunction:
    """A test function with declared smoothness constants.

    ``func`` and ``grad`` act on batches of shape ``(N, d)``; ``gaussian_mean``
    maps a covariance matrix to ``E g(Y)`` in closed form.
    """

    func: Callable[[np.ndarray], np.ndarray]
    d: int
    constants: SmoothnessConstants
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    partials: Callable[[np.ndarray, tuple[int, ...]], np.ndarray] | None = None
    gaussian_mean: Callable[[np.ndarray], float] | None = None
    name: str = ""

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.d)
        return np.asarray(self.func(X), dtype=float).reshape(-1)


def make_cosine_family(t: Sequence[float], phase: float = 0.0) -> SmoothTestFunction:
    """``g(x) = cos(<t, x> + phase)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(t)):
        raise ValueError("frequency vector must be finite")
    norm = float(np.linalg.norm(t))
    amax = float(np.max(np.abs(t)))
    consts = SmoothnessConstants(lip=norm, m2=norm**2, g2_inf=amax**2, g3_inf=amax**3)

    def func(X):
        return np.cos(X @ t + phase)

    def grad(X):
        return -np.sin(X @ t + phase)[:, None] * t

    def partials(X, idx):
        # derivatives of cos cycle through -sin, -cos, sin, cos
        u = X @ t + phase
        r = len(idx) % 4
        base = [np.cos(u), -np.sin(u), -np.cos(u), np.sin(u)][r]
        return base * math.prod(t[i] for i in idx)

    def gaussian_mean(C):
        C = np.atleast_2d(np.asarray(C, dtype=float))
        return math.cos(phase) * math.exp(-0.5 * float(t @ C @ t))

    label = ",".join(f"{x:g}" for x in t)
    return SmoothTestFunction(func, t.size, consts, grad, partials, gaussian_mean, f"cos(t=[{label}],phase={phase:g})")


def make_quadratic(M) -> SmoothTestFunction:
    """``g(x) = x^T M x``; unbounded gradient, so no Lipschitz constant (diagnostic use)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    M = 0.5 * (M + M.T)
    d = M.shape[0]
    consts = SmoothnessConstants(
        lip=None, m2=2.0 * float(np.max(np.abs(np.linalg.eigvalsh(M)))), g2_inf=2.0 * float(np.max(np.abs(M))), g3_inf=0.0
    )

    def partials(X, idx):
        if len(idx) == 1:
            return 2.0 * X @ M[idx[0]]
        if len(idx) == 2:
            return np.full(X.shape[0], 2.0 * M[idx[0], idx[1]])
        return np.zeros(X.shape[0])

    return SmoothTestFunction(
        lambda X: np.einsum("bi,ij,bj->b", X, M, X),
        d,
        consts,
        grad=lambda X: 2.0 * X @ M,
        partials=partials,
        gaussian_mean=lambda C: float(np.trace(M @ np.atleast_2d(C))),
        name="quadratic",
    )


# --------------------------------------------------------------------------
# Constant checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantCheck:
    name: str
    observed: float
    declared: float
    allowance: float

    @property
    def passed(self) -> bool:
        return self.observed <= self.declared * (1.0 + 1e-6) + self.allowance + 1e-300


def _fd_partial(g: SmoothTestFunction, X: np.ndarray, idx: tuple[int, ...], h: float) -> np.ndarray:
    """Central finite difference of a mixed partial derivative."""
    out = np.zeros(X.shape[0])
    r = len(idx)
    for signs in np.ndindex(*(2,) * r):
        shift = np.zeros(g.d)
        for s, i in zip(signs, idx):
            shift[i] += h if s == 0 else -h
        sign = (-1) ** sum(signs)
        out += sign * g(X + shift)
    return out / (2.0 * h) ** r


def check_constants(
    g: SmoothTestFunction, probes: int = 200, seed: int = 0, scale: float = 3.0, h: float = 1e-2
) -> list[ConstantCheck]:
    """Probe the declared constants with random finite differences.

    Each finite difference is taken at step ``h`` and ``h/2``; the Richardson
    extrapolate is compared with the declared constant, with the gap between
    the two step sizes as error allowance.
    """
    rng = np.random.default_rng(seed)
    X = scale * rng.standard_normal((probes, g.d))
    Y = scale * rng.standard_normal((probes, g.d))
    c = g.constants
    out = []

    if c.lip is not None:
        ratio = np.abs(g(X) - g(Y)) / np.linalg.norm(X - Y, axis=1)
        out.append(ConstantCheck("lip", float(np.max(ratio)), c.lip, 0.0))
    if c.m2 is not None and g.grad is not None:
        ratio = np.linalg.norm(g.grad(X) - g.grad(Y), axis=1) / np.linalg.norm(X - Y, axis=1)
        out.append(ConstantCheck("m2", float(np.max(ratio)), c.m2, 0.0))
    for order, name in ((2, "g2_inf"), (3, "g3_inf")):
        declared = getattr(c, name)
        if declared is None:
            continue
        worst, allow = 0.0, 0.0
        for idx in np.ndindex(*(g.d,) * order):
            coarse = _fd_partial(g, X, idx, h)
            fine = _fd_partial(g, X, idx, h / 2)
            rich = (4.0 * fine - coarse) / 3.0
            k = int(np.argmax(np.abs(rich)))
            if abs(rich[k]) > worst:
                worst, allow = float(abs(rich[k])), float(abs(rich[k] - fine[k]))
        out.append(ConstantCheck(name, worst, declared, allow))
    return out


# --------------------------------------------------------------------------
# Gaussian side
# --------------------------------------------------------------------------


def _factor(target: GaussianTarget) -> np.ndarray:
    """``L`` with ``L L^T = C`` from the eigen-decomposition, null directions dropped."""
    keep = target.eigvals > NULL_EIG_TOL * max(1.0, target.op_norm)
    return target.eigvecs[:, keep] * np.sqrt(target.eigvals[keep])


def _hermite_mean(g: SmoothTestFunction, L: np.ndarray, nodes: int) -> float:
    r = L.shape[1]
    if r == 0:
        return float(g(np.zeros((1, g.d)))[0])
    z, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2.0 * math.pi)
    grids = np.meshgrid(*([z] * r), indexing="ij")
    Z = np.stack([a.ravel() for a in grids], axis=1)
    W = np.ones(())
    for _ in range(r):
        W = np.multiply.outer(W, w)
    return float(g(Z @ L.T) @ W.ravel())


def gaussian_expectation(
    g: SmoothTestFunction,
    target,
    method: str = "analytic",
    nodes: int = 64,
    samples: int = 100_000,
    seed: int = 0,
    batches: int = 100,
) -> tuple[float, float]:
    """``(E g(Y), error)`` for ``Y ~ N(0, C)``."""
    target = _target(target)
    if target.d != g.d:
        raise ValueError(f"test function dimension {g.d} does not match target dimension {target.d}")
    if method == "analytic":
        if g.gaussian_mean is None:
            raise ValueError(f"{g.name or 'test function'} has no closed-form Gaussian mean")
        return float(g.gaussian_mean(target.C)), 0.0
    if method == "quadrature":
        if target.d > QUADRATURE_MAX_DIM:
            raise ValueError(f"quadrature supports d <= {QUADRATURE_MAX_DIM}, got {target.d}")
        L = _factor(target)
        coarse = _hermite_mean(g, L, nodes)
        fine = _hermite_mean(g, L, 2 * nodes)
        return fine, abs(fine - coarse)
    if method == "mc":
        rng = np.random.default_rng(seed)
        L = _factor(target)
        size = -(-samples // batches)
        means = np.array([g(rng.standard_normal((size, L.shape[1])) @ L.T).mean() for _ in range(batches)])
        return float(means.mean()), float(means.std(ddof=1) / math.sqrt(batches))
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# Discrepancy
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscrepancyResult:
    lhs: float
    lhs_error: float
    statistic_side: float
    statistic_error: float
    gaussian_side: float
    gaussian_error: float
    statistic_method: str
    gaussian_method: str


def discrepancy(
    model: ProductModel,
    F: StatisticVector,
    g: SmoothTestFunction,
    target,
    mode: str = "exact",
    gaussian_method: str = "analytic",
    cfg: McConfig = McConfig(),
    table: JointTable | None = None,
) -> DiscrepancyResult:
    """``|E g(F) - E g(Y)|`` with error bars from both sides."""
    target = _target(target)
    if mode == "exact":
        if table is None:
            table = core.build_joint_table(model, F)
        side = float(table.weights.ravel() @ g(table.flat_values()))
        side_err = 0.0
    elif mode == "mc":
        sizes = cfg.chunk_sizes()
        means = []
        for c, size in enumerate(sizes):
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(c,)))
            means.append(g(F(model.sample(rng, size))).mean())
        means = np.array(means)
        frac = np.array(sizes, dtype=float) / sum(sizes)
        side = float(means @ frac)
        side_err = (
            float(math.sqrt(((means - side) ** 2) @ frac**2 * len(sizes) / (len(sizes) - 1))) if len(sizes) > 1 else math.nan
        )
    else:
        raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")
    gauss, gauss_err = gaussian_expectation(g, target, gaussian_method)
    return DiscrepancyResult(
        lhs=abs(side - gauss),
        lhs_error=side_err + gauss_err,
        statistic_side=side,
        statistic_error=side_err,
        gaussian_side=gauss,
        gaussian_error=gauss_err,
        statistic_method=mode,
        gaussian_method=gaussian_method,
    )


# --------------------------------------------------------------------------
# Corpus and suite
# --------------------------------------------------------------------------


def centered(model: ProductModel, F: StatisticVector) -> StatisticVector:
    """``F - E F`` with the mean computed by enumeration."""
    mean = core.moments(core.build_joint_table(model, F))[0]
    if np.max(np.abs(mean)) == 0.0:
        return F
    diff = F.closed_diff
    return StatisticVector(lambda X: F(X) - mean, F.d, closed_diff=diff, name=F.name)


@dataclass(frozen=True)
class Instance:
    """One statistic on one exact product space, with its Gaussian target.

    ``target`` is a covariance matrix or ``"exact-covariance"``.  ``runs`` and
    ``quadform`` hold the structured description when the specialised bounds
    apply.
    """

    id: str
    model: ProductModel
    F: StatisticVector
    target: object = "exact-covariance"
    runs: RunsSpec | None = None
    quadform: QuadFormSpec | None = None
    test_functions: tuple[SmoothTestFunction, ...] = field(default=(), repr=False)

    def resolve_target(self, table: JointTable | None = None) -> GaussianTarget | None:
        """The target law; ``None`` if it needs a table that was not supplied."""
        if not isinstance(self.target, str):
            return _target(self.target)
        if self.target != "exact-covariance":
            raise ValueError(f"unknown target {self.target!r}")
        if table is not None:
            return GaussianTarget(core.moments(table)[1])
        if self.runs is not None:
            return GaussianTarget(runs_covariance(self.runs))
        if self.quadform is not None:
            return GaussianTarget(qf_conditions(self.quadform).pairwise_covariance)
        return None


def default_test_functions(d: int) -> tuple[SmoothTestFunction, ...]:
    """Cosine family with ``|t|_2 <= 2``."""
    if d == 1:
        return tuple(make_cosine_family([s], ph) for s in (0.5, 1.0, 2.0) for ph in (0.0, math.pi / 4))
    rng = np.random.default_rng(1234 + d)
    out = [make_cosine_family(np.full(d, 1.0 / math.sqrt(d)), 0.0)]
    for _ in range(3):
        t = rng.standard_normal(d)
        out.append(make_cosine_family(t / np.linalg.norm(t) * rng.uniform(0.5, 2.0), float(rng.uniform(0, math.pi))))
    return tuple(out)


def _random_polynomial(rng: np.random.Generator, n: int, d: int, degree: int = 3):
    terms = []
    for _ in range(d):
        mons = []
        for _ in range(int(rng.integers(1, 5))):
            size = int(rng.integers(1, degree + 1))
            idx = tuple(sorted(rng.choice(n, size=min(size, n), replace=False).tolist()))
            mons.append((float(rng.normal()), idx))
        terms.append(mons)
    return terms


def random_polynomial_instance(seed: int, n: int, d: int, dist: core.ComponentDistribution, target="exact-covariance") -> Instance:
    rng = np.random.default_rng(seed)
    model = ProductModel.iid(dist, n)
    F = centered(model, core.polynomial_statistic(_random_polynomial(rng, n, d), n, name=f"poly{seed}"))
    return Instance(f"poly-{dist.name}-n{n}-d{d}-s{seed}", model, F, target)


def runs_instance(spec: RunsSpec, id: str) -> Instance:
    return Instance(id, spec.model, build_runs_statistic(spec), "exact-covariance", runs=spec)


def quadform_instance(spec: QuadFormSpec, id: str, target="exact-covariance") -> Instance:
    return Instance(id, spec.model, build_quadratic_form(spec), target, quadform=spec)


def default_corpus() -> list[Instance]:
    """Small exact corpus: hand-checked anchors plus random and structured cases."""
    from .quadforms import tridiagonal_matrix
    from .runs import bernoulli_runs_spec

    rad = core.rademacher()
    three = core.atoms([-math.sqrt(3.0), 0.0, math.sqrt(3.0)], [1 / 6, 2 / 3, 1 / 6], name="three-point")
    one = np.eye(1)
    out = [
        Instance("product-x1x2", ProductModel.iid(rad, 2), core.polynomial_statistic([[(1.0, (0, 1))]], 2, "x1x2"), one),
        Instance("sum-n4", ProductModel.iid(rad, 4), core.normalized_sum(4), one),
        quadform_instance(QuadFormSpec((np.array([[0.0, 1.0], [1.0, 0.0]]),), (rad, rad)), "quadform-n2", one),
        Instance("coordinates-d2", ProductModel.iid(rad, 2), core.linear_statistic(np.eye(2)), np.eye(2)),
        Instance(
            "two-point-sum-n5",
            ProductModel.iid(core.standardized_two_point(0.3), 5),
            core.normalized_sum(5),
            one,
        ),
        Instance(
            "repeated-product-singular",
            ProductModel.iid(rad, 3),
            core.polynomial_statistic([[(1.0, (0, 1))], [(1.0, (0, 1))]], 3, "x1x2-twice"),
            "exact-covariance",
        ),
        runs_instance(bernoulli_runs_spec(4, 2, 0.3), "runs-bernoulli-n4-d2"),
        runs_instance(bernoulli_runs_spec(6, 1, 0.5), "runs-bernoulli-n6-d1"),
        quadform_instance(QuadFormSpec((tridiagonal_matrix(5),), (rad,) * 5), "quadform-tridiagonal-n5"),
        quadform_instance(QuadFormSpec((tridiagonal_matrix(4),), (three,) * 4), "quadform-three-point-n4", one),
    ]
    for s in range(4):
        out.append(random_polynomial_instance(s, 4, 1 + s % 2, rad))
    out.append(random_polynomial_instance(10, 3, 2, three))
    return out


@dataclass(frozen=True)
class CheckRow:
    instance_id: str
    test_function: str
    method: str
    form: str
    alpha: float | None
    lhs: float
    lhs_error: float
    report: BoundReport | None
    status: str = "ok"

    @property
    def total(self) -> float:
        return math.nan if self.report is None else self.report.total

    @property
    def slack(self) -> float:
        return self.total - self.lhs

    @property
    def passed(self) -> bool | None:
        if self.report is None:
            return None
        return self.lhs <= self.report.total + self.lhs_error + PASS_TOL


def instance_reports(
    inst: Instance,
    table: JointTable,
    target: GaussianTarget,
    g: SmoothTestFunction,
    alpha_grid: Sequence[float],
    forms: Sequence[str],
    summaries: dict,
) -> list[tuple[str, str, float | None, BoundReport | None, str]]:
    """Every applicable bound for one instance and test function."""
    out = []
    gc = g.constants
    for alpha in alpha_grid:
        stats = summaries[alpha]
        for form in forms:
            sform = "L1" if form == "compact" else form
            if sform in ("L1", "split"):
                out.append(("slepian", sform, alpha, slepian_bound(stats, target, gc, sform), "ok"))
            tform = "L2" if form == "compact" else form
            if tform in ("L2", "split"):
                if not target.is_pd:
                    out.append(("stein", tform, alpha, None, NotPositiveDefiniteError.status))
                elif gc.lip is not None and gc.m2 is not None:
                    out.append(("stein", tform, alpha, stein_bound(stats, target, gc, tform), "ok"))
        if is_rademacher(inst.model):
            rb = rademacher_bounds(table, target, gc, alpha)
            out.append(("rademacher-d3", "L2", alpha, rb.d3, "ok"))
            if rb.d2 is not None:
                out.append(("rademacher-d2", "L2", alpha, rb.d2, "ok"))
            elif not target.is_pd:
                out.append(("rademacher-d2", "L2", alpha, None, NotPositiveDefiniteError.status))
    return out + structured_reports(inst, target, gc)


def structured_reports(inst: Instance, target: GaussianTarget, gc: SmoothnessConstants) -> list:
    """The runs and quadratic-form bounds, which need no enumeration."""
    out = []
    if inst.runs is not None:
        out.append(("runs", "closed", 1.0, runs_bound(inst.runs, gc), "ok"))
    if inst.quadform is not None:
        out.append(("quadform", "closed", 0.5, qf_bound(inst.quadform, target, gc), "ok"))
    return out


def bound_check_suite(
    instances: Sequence[Instance],
    alpha_grid: Sequence[float] = (0.0, 0.5, 1.0),
    forms: Sequence[str] = ("compact", "split"),
) -> list[CheckRow]:
    """Compare ``|E g(F) - E g(Y)|`` with every applicable bound.

    Rows are ordered by instance, then test function, then bound.  Rows whose
    hypotheses fail (e.g. Stein with singular ``C``) have no report and carry
    the failure in ``status``.
    """
    rows = []
    for inst in instances:
        table = core.build_joint_table(inst.model, inst.F)
        target = inst.resolve_target(table)
        summaries = {a: core.exact_summary(table, a) for a in alpha_grid}
        funcs = inst.test_functions or default_test_functions(table.d)
        for g in funcs:
            disc = discrepancy(inst.model, inst.F, g, target, table=table)
            for method, form, alpha, rep, status in instance_reports(inst, table, target, g, alpha_grid, forms, summaries):
                rows.append(CheckRow(inst.id, g.name, method, form, alpha, disc.lhs, disc.lhs_error, rep, status))
    return rows


def distance_lower_bound(table: JointTable, target, funcs: Sequence[SmoothTestFunction], order: int = 3) -> float:
    """``max_g |E g(F) - E g(Y)| / K(g)`` over ``funcs``, a lower estimate of d2 or d3.

    ``K(g) = max(||g''||, ||g'''||)`` for d3 and ``max(lip, M2)`` for d2.
    """
    target = _target(target)
    best = 0.0
    for g in funcs:
        c = g.constants
        scale = max(c.g2_inf, c.g3_inf) if order == 3 else max(c.lip, c.m2)
        if scale <= 0:
            continue
        lhs = discrepancy(table.model, None, g, target, table=table).lhs
        best = max(best, lhs / scale)
    return best
