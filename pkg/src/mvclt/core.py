"""Product-space models, statistics and the exact difference operators.

All exact computations run on a :class:`JointTable`: the statistic evaluated
once on every assignment of a finite product space, stored as an array of
shape ``(r_0, ..., r_{n-1}, d)`` where ``r_k`` is the number of atoms of
coordinate ``k``.  Axis ``k`` of that array is coordinate ``k`` and the
assignments are therefore enumerated in mixed-radix lexicographic order with
coordinate 0 slowest.

Scalar random variables on the table (``RandomVariableTable``) are plain numpy
arrays of shape ``table.shape``.  Every operator below is a weighted partial
sum over some axes of such an array.

Coordinates are 0-based.  The past / future sigma-fields are indexed the same
way: ``past(k)`` is generated by coordinates ``0..k`` (``k = -1`` is the
trivial field) and ``future(k)`` by coordinates ``k..n-1`` (``k = n`` is the
trivial field).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

EXACT_CAP = 2**22
WEIGHT_TOL = 1e-12

RandomVariableTable = np.ndarray
Sampler = Callable[[np.random.Generator, int], np.ndarray]


class CapExceededError(ValueError):
    pass


class NonFiniteStatisticError(FloatingPointError):
    pass


# --------------------------------------------------------------------------
# Distributions and models
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentDistribution:
    """Law of one input coordinate.

    Either a finite list of atoms (``values``/``probs``) or a ``sampler``
    ``(rng, size) -> ndarray``.  Sampler laws can carry a ``moments`` cache
    with keys ``mean``, ``var``, ``abs3``, ``abs4``, ``cabs3``, ``cabs4``,
    ``var_sq`` (absolute / central absolute moments and ``Var(X**2)``).
    """

    values: np.ndarray | None = None
    probs: np.ndarray | None = None
    sampler: Sampler | None = None
    moments: dict | None = None
    name: str = ""

    def __post_init__(self):
        if self.sampler is None:
            if self.values is None or self.probs is None:
                raise ValueError("finite distribution needs values and probs")
            values = np.asarray(self.values, dtype=float).ravel()
            probs = np.asarray(self.probs, dtype=float).ravel()
            if values.size == 0 or values.shape != probs.shape:
                raise ValueError("values and probs must be non-empty and aligned")
            if np.any(probs <= 0) or np.any(probs > 1):
                raise ValueError("atom probabilities must lie in (0, 1]")
            if abs(probs.sum() - 1.0) > WEIGHT_TOL:
                raise ValueError(f"atom probabilities sum to {probs.sum()!r}, not 1")
            if np.unique(values).size != values.size:
                raise ValueError("atom values must be distinct")
            if not np.all(np.isfinite(values)):
                raise ValueError("atom values must be finite")
            values.setflags(write=False)
            probs.setflags(write=False)
            object.__setattr__(self, "values", values)
            object.__setattr__(self, "probs", probs)
        elif self.values is not None:
            raise ValueError("give either atoms or a sampler, not both")

    @property
    def is_finite(self) -> bool:
        return self.sampler is None

    @property
    def n_atoms(self) -> int:
        if not self.is_finite:
            raise ValueError("sampler distribution has no atoms")
        return self.values.size

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.is_finite:
            if self.values.size == 1:
                return np.full(size, self.values[0])
            idx = rng.choice(self.values.size, size=size, p=self.probs)
            return self.values[idx]
        out = np.asarray(self.sampler(rng, size), dtype=float)
        if out.shape != (size,):
            raise ValueError(f"sampler returned shape {out.shape}, expected {(size,)}")
        return out

    def mean(self) -> float:
        if self.is_finite:
            return float(self.probs @ self.values)
        return self._cached("mean")

    def abs_moment(self, p: int, central: bool = False) -> float:
        """``E|X|^p`` or, with ``central``, ``E|X - EX|^p``."""
        if self.is_finite:
            x = self.values - self.mean() if central else self.values
            return float(self.probs @ np.abs(x) ** p)
        key = ("cabs" if central else "abs") + str(p)
        if p == 2:
            if central:
                return self._cached("var")
            return self._cached("var") + self._cached("mean") ** 2
        return self._cached(key)

    def variance(self) -> float:
        return self.abs_moment(2, central=True)

    def var_of_square(self) -> float:
        """``Var(X**2)``."""
        if self.is_finite:
            sq = self.values**2
            return float(self.probs @ sq**2 - (self.probs @ sq) ** 2)
        return self._cached("var_sq")

    def _cached(self, key: str) -> float:
        if not self.moments or key not in self.moments:
            raise KeyError(f"moment {key!r} not available for sampler distribution {self.name!r}")
        return float(self.moments[key])


def atoms(values: Sequence[float], probs: Sequence[float] | None = None, name: str = "") -> ComponentDistribution:
    values = np.asarray(values, dtype=float)
    if probs is None:
        probs = np.full(values.size, 1.0 / values.size)
    return ComponentDistribution(values=values, probs=np.asarray(probs, dtype=float), name=name or "atoms")


def rademacher() -> ComponentDistribution:
    return atoms([-1.0, 1.0], [0.5, 0.5], name="rademacher")


def bernoulli(p: float) -> ComponentDistribution:
    if not 0.0 < p < 1.0:
        raise ValueError(f"Bernoulli parameter must lie in (0, 1), got {p}")
    return atoms([0.0, 1.0], [1.0 - p, p], name=f"bernoulli({p})")


def standardized_two_point(p: float) -> ComponentDistribution:
    """Zero-mean, unit-variance law on two atoms, the negative one with mass ``p``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    lo = -math.sqrt((1.0 - p) / p)
    hi = math.sqrt(p / (1.0 - p))
    return atoms([lo, hi], [p, 1.0 - p], name=f"two-point({p})")


def standard_normal() -> ComponentDistribution:
    return ComponentDistribution(
        sampler=lambda rng, size: rng.standard_normal(size),
        moments={
            "mean": 0.0,
            "var": 1.0,
            "abs3": 2.0 * math.sqrt(2.0 / math.pi),
            "cabs3": 2.0 * math.sqrt(2.0 / math.pi),
            "abs4": 3.0,
            "cabs4": 3.0,
            "var_sq": 2.0,
        },
        name="normal",
    )


@dataclass(frozen=True)
class ProductModel:
    """Independent coordinates ``X = (X_0, ..., X_{n-1})``."""

    components: tuple[ComponentDistribution, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise ValueError("a product model needs at least one coordinate")
        object.__setattr__(self, "components", comps)

    @classmethod
    def iid(cls, dist: ComponentDistribution, n: int) -> "ProductModel":
        return cls(tuple([dist] * n))

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def is_finite(self) -> bool:
        return all(c.is_finite for c in self.components)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.n_atoms for c in self.components)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def check_exact(self, cap: int = EXACT_CAP) -> None:
        if not self.is_finite:
            bad = [k for k, c in enumerate(self.components) if not c.is_finite]
            raise ValueError(f"exact mode needs finite atoms; coordinates {bad} are sampler laws")
        if self.size > cap:
            raise CapExceededError(f"product space has {self.size} assignments, above the cap of {cap}")

    def assignments(self) -> np.ndarray:
        """All assignments, shape ``(size, n)``, coordinate 0 slowest."""
        grids = np.meshgrid(*[c.values for c in self.components], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def weights(self) -> np.ndarray:
        """Product probabilities as an array of shape ``self.shape``."""
        w = np.ones(())
        for c in self.components:
            w = np.multiply.outer(w, c.probs)
        return w

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.stack([c.draw(rng, size) for c in self.components], axis=1)


# --------------------------------------------------------------------------
# Statistics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StatisticVector:
    """A map ``F: R^n -> R^d``.

    ``func`` takes a batch ``(N, n)`` and returns ``(N, d)`` (or ``(N,)`` when
    ``d == 1``) if ``vectorized``; otherwise it is called row by row.

    ``closed_diff(k, X, a)``, if given, returns the increment
    ``F(X with column k set to a) - F(X)`` for a batch ``X`` and a scalar or
    per-row replacement ``a``, without evaluating ``F`` from scratch.
    """

    func: Callable[[np.ndarray], np.ndarray]
    d: int
    vectorized: bool = True
    closed_diff: Callable[[int, np.ndarray, Union[float, np.ndarray]], np.ndarray] | None = None
    name: str = ""

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("statistic dimension must be >= 1")

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.vectorized:
            out = np.asarray(self.func(X), dtype=float)
        else:
            out = np.array([np.asarray(self.func(row), dtype=float).ravel() for row in X])
        return out.reshape(X.shape[0], self.d)

    def substituted(self, k: int, X: np.ndarray, a, FX: np.ndarray | None = None) -> np.ndarray:
        """``F`` at ``X`` with column ``k`` replaced by ``a``."""
        if self.closed_diff is not None:
            if FX is None:
                FX = self(X)
            inc = np.asarray(self.closed_diff(k, X, a), dtype=float).reshape(X.shape[0], self.d)
            return FX + inc
        Y = np.array(X, dtype=float, copy=True)
        Y[:, k] = a
        return self(Y)


def linear_statistic(weights: np.ndarray, offset: np.ndarray | float = 0.0, name: str = "linear") -> StatisticVector:
    """``F_i(x) = sum_k W[i, k] x_k - offset_i``."""
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    off = np.broadcast_to(np.asarray(offset, dtype=float), (W.shape[0],)).copy()

    def closed_diff(k, X, a):
        return np.multiply.outer(np.asarray(a, dtype=float) - X[:, k], W[:, k]).reshape(X.shape[0], -1)

    return StatisticVector(lambda X: X @ W.T - off, W.shape[0], closed_diff=closed_diff, name=name)


def normalized_sum(n: int, mean: float = 0.0) -> StatisticVector:
    """``(X_0 + ... + X_{n-1} - n*mean) / sqrt(n)``."""
    s = 1.0 / math.sqrt(n)
    return linear_statistic(np.full((1, n), s), offset=n * mean * s, name=f"sum{n}")


Monomial = tuple[float, tuple[int, ...]]


def polynomial_statistic(terms: Sequence[Sequence[Monomial]], n: int, name: str = "polynomial") -> StatisticVector:
    """Multilinear polynomial statistic.

    ``terms[i]`` is a list of ``(coef, indices)`` monomials for output ``i``;
    each monomial contributes ``coef * prod(x[indices])``.  Monomials with
    empty ``indices`` are constants.
    """
    parsed = []
    for out_terms in terms:
        parsed.append([(float(c), tuple(int(i) for i in idx)) for c, idx in out_terms])
        for _, idx in parsed[-1]:
            if any(i < 0 or i >= n for i in idx):
                raise ValueError(f"monomial index out of range for n={n}: {idx}")

    def func(X):
        out = np.zeros((X.shape[0], len(parsed)))
        for i, out_terms in enumerate(parsed):
            for coef, idx in out_terms:
                out[:, i] += coef * np.prod(X[:, list(idx)], axis=1) if idx else coef
        return out

    return StatisticVector(func, len(parsed), name=name)


# --------------------------------------------------------------------------
# Joint table
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JointTable:
    model: ProductModel
    statistic: StatisticVector
    values: np.ndarray  # shape (*model.shape, d)
    weights: np.ndarray  # shape model.shape

    @property
    def shape(self) -> tuple[int, ...]:
        return self.weights.shape

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def d(self) -> int:
        return self.values.shape[-1]

    def component(self, i: int) -> RandomVariableTable:
        return self.values[..., i]

    def coordinate(self, k: int) -> RandomVariableTable:
        """The table of ``X_k`` itself."""
        shape = [1] * self.n
        shape[k] = -1
        return np.broadcast_to(self.model.components[k].values.reshape(shape), self.shape)

    def expect(self, U: RandomVariableTable) -> float:
        return float(np.sum(self.weights * U))

    def flat_values(self) -> np.ndarray:
        return self.values.reshape(-1, self.d)


def build_joint_table(model: ProductModel, F: StatisticVector, cap: int = EXACT_CAP) -> JointTable:
    model.check_exact(cap)
    X = model.assignments()
    vals = F(X)
    bad = np.flatnonzero(~np.all(np.isfinite(vals), axis=1))
    if bad.size:
        raise NonFiniteStatisticError(
            f"statistic is not finite at assignment index {bad[0]} ({X[bad[0]].tolist()})"
        )
    weights = model.weights()
    if abs(weights.sum() - 1.0) > WEIGHT_TOL * max(1, weights.size):
        raise ValueError(f"product weights sum to {weights.sum()!r}")
    values = vals.reshape(*model.shape, F.d)
    values.setflags(write=False)
    weights.setflags(write=False)
    return JointTable(model, F, values, weights)


# --------------------------------------------------------------------------
# Exact operators
# --------------------------------------------------------------------------


def _as_rv(table: JointTable, U: Union[int, np.ndarray]) -> np.ndarray:
    if isinstance(U, (int, np.integer)):
        if not 0 <= U < table.d:
            raise IndexError(f"component {U} out of range for d={table.d}")
        return table.values[..., U]
    U = np.asarray(U, dtype=float)
    if U.shape != table.shape:
        raise ValueError(f"random variable table has shape {U.shape}, expected {table.shape}")
    return U


def _check_coord(table: JointTable, k: int) -> None:
    if not 0 <= k < table.n:
        raise IndexError(f"coordinate {k} out of range for n={table.n}")


def _probs_along(table: JointTable, k: int) -> np.ndarray:
    shape = [1] * table.n
    shape[k] = -1
    return table.model.components[k].probs.reshape(shape)


def _average_axes(table: JointTable, U: np.ndarray, axes) -> np.ndarray:
    out = U
    for ax in axes:
        out = np.sum(out * _probs_along(table, ax), axis=ax, keepdims=True)
    return np.broadcast_to(out, table.shape).copy()


def expect_k(table: JointTable, U, k: int) -> RandomVariableTable:
    """``E_k[U]``: integrate out coordinate ``k`` only."""
    _check_coord(table, k)
    return _average_axes(table, _as_rv(table, U), [k])


def diff_D(table: JointTable, U, k: int) -> RandomVariableTable:
    """``U - E_k[U]``."""
    U = _as_rv(table, U)
    return U - expect_k(table, U, k)


def diff_d(table: JointTable, U, k: int) -> RandomVariableTable:
    """``sqrt(1/2 * E'_k |U - T_k U|^2)`` with the copy summed over the atoms of ``k``."""
    _check_coord(table, k)
    U = np.moveaxis(_as_rv(table, U), k, -1)
    p = table.model.components[k].probs
    gaps = U[..., :, None] - U[..., None, :]
    out = np.sqrt(0.5 * (gaps**2 @ p))
    return np.moveaxis(out, -1, k)


def cond_exp(table: JointTable, U, k: int, direction: str) -> RandomVariableTable:
    """Conditional expectation on the past or future sigma-field.

    ``direction="past"``: condition on coordinates ``0..k``, ``-1 <= k <= n-1``.
    ``direction="future"``: condition on coordinates ``k..n-1``, ``0 <= k <= n``.
    """
    n = table.n
    U = _as_rv(table, U)
    if direction == "past":
        if not -1 <= k <= n - 1:
            raise IndexError(f"past index {k} out of range [-1, {n - 1}]")
        axes = range(k + 1, n)
    elif direction == "future":
        if not 0 <= k <= n:
            raise IndexError(f"future index {k} out of range [0, {n}]")
        axes = range(0, k)
    else:
        raise ValueError(f"direction must be 'past' or 'future', got {direction!r}")
    return _average_axes(table, U, axes)


def marginal_cond_exp(table: JointTable, U, k: int) -> RandomVariableTable:
    """``E[U | X_k]``."""
    _check_coord(table, k)
    return _average_axes(table, _as_rv(table, U), [a for a in range(table.n) if a != k])


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


def d_alpha(table: JointTable, V, k: int, alpha: float = 0.5) -> RandomVariableTable:
    """``alpha*E[D_k V | past(k)] + (1-alpha)*E[D_k V | future(k)]``."""
    _check_alpha(alpha)
    DV = diff_D(table, V, k)
    return alpha * cond_exp(table, DV, k, "past") + (1.0 - alpha) * cond_exp(table, DV, k, "future")


def moments(table: JointTable) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance matrix of the statistic."""
    w = table.weights.ravel()
    v = table.flat_values()
    mean = w @ v
    c = v - mean
    cov = (c * w[:, None]).T @ c
    return mean, 0.5 * (cov + cov.T)


class ZAlpha(NamedTuple):
    mean: np.ndarray  # (d, d)
    var: np.ndarray  # (d, d)
    tables: np.ndarray  # (d, d, *shape)


def z_alpha_moments(table: JointTable, alpha: float = 0.5) -> ZAlpha:
    """``Z_ij = sum_k D_k F_i * D^(alpha)_k F_j`` as tables, with mean and variance."""
    _check_alpha(alpha)
    d = table.d
    Z = np.zeros((d, d) + table.shape)
    for k in range(table.n):
        DF = [diff_D(table, i, k) for i in range(d)]
        DA = [d_alpha(table, j, k, alpha) for j in range(d)]
        for i in range(d):
            for j in range(d):
                Z[i, j] += DF[i] * DA[j]
    w = table.weights
    mean = np.sum(Z * w, axis=tuple(range(2, Z.ndim)))
    var = np.sum((Z - mean[(...,) + (None,) * table.n]) ** 2 * w, axis=tuple(range(2, Z.ndim)))
    return ZAlpha(mean, var, Z)


def third_abs_moment_sum(table: JointTable) -> np.ndarray:
    """Per component ``i``: ``sum_k E|D_k F_i|^3``."""
    out = np.zeros(table.d)
    for i in range(table.d):
        for k in range(table.n):
            out[i] += table.expect(np.abs(diff_D(table, i, k)) ** 3)
    return out


def chain_rule_residual_check(table: JointTable, f, k: int) -> float:
    """Largest pointwise excess of the chain-rule remainder over its bound.

    ``f`` needs ``func`` (batch of points -> values), ``grad`` and
    ``constants.g2_inf``.  The remainder ``|D_k f(F) - sum_i df/dx_i(F) D_k F_i|``
    is compared with ``1/2 ||f''|| sum_{i,j} [(d_k F_i)^2 + (d_k F_j)^2]``.
    """
    if getattr(f, "grad", None) is None:
        raise ValueError("test function has no gradient")
    g2 = f.constants.g2_inf
    if g2 is None:
        raise ValueError("test function has no second-derivative bound")
    pts = table.flat_values()
    fF = np.asarray(f.func(pts), dtype=float).reshape(table.shape)
    grad = np.asarray(f.grad(pts), dtype=float).reshape(*table.shape, table.d)
    lhs = diff_D(table, fF, k)
    for i in range(table.d):
        lhs = lhs - grad[..., i] * diff_D(table, i, k)
    sq = sum(diff_d(table, i, k) ** 2 for i in range(table.d))
    rhs = 0.5 * g2 * 2 * table.d * sq
    return float(np.max(np.abs(lhs) - rhs))


# --------------------------------------------------------------------------
# Summaries consumed by the bound calculators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZSummary:
    """Everything the generic bounds need from a statistic.

    ``z_left`` / ``z_right`` hold per-sample ``Z`` values with shape
    ``(d, d, M)``.  In exact mode both are the same table flattened and
    ``weights`` are the product probabilities; in Monte Carlo mode they are two
    conditionally independent replicates per outer sample and ``chunks`` labels
    the batch of each sample.
    """

    mode: str
    alpha: float
    mean: np.ndarray
    sigma: np.ndarray
    z_mean: np.ndarray
    z_var: np.ndarray
    third: np.ndarray
    z_left: np.ndarray = field(repr=False)
    z_right: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    chunks: np.ndarray | None = field(default=None, repr=False)
    standard_errors: dict | None = None
    caveats: tuple[str, ...] = ()

    @property
    def d(self) -> int:
        return self.sigma.shape[0]

    def sq_dev(self, C: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """``E|C_ij - Z_ij|^2`` (unbiased in MC mode) and its standard error."""
        C = np.asarray(C, dtype=float)[..., None]
        return self._reduce((C - self.z_left) * (C - self.z_right))

    def abs_dev(self, C: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """``E|C_ij - Z_ij|`` and its standard error."""
        C = np.asarray(C, dtype=float)[..., None]
        return self._reduce(np.abs(C - 0.5 * (self.z_left + self.z_right)))

    def _reduce(self, per_sample: np.ndarray):
        est = per_sample @ self.weights
        if self.chunks is None:
            return est, None
        return est, batch_standard_error(per_sample, self.chunks)


def batch_standard_error(per_sample: np.ndarray, chunks: np.ndarray) -> np.ndarray:
    """Batch-means standard error of the sample mean along the last axis."""
    labels, counts = np.unique(chunks, return_counts=True)
    if labels.size < 2:
        return np.full(per_sample.shape[:-1], np.nan)
    means = np.stack([per_sample[..., chunks == c].mean(axis=-1) for c in labels], axis=-1)
    frac = counts / counts.sum()
    overall = means @ frac
    var = ((means - overall[..., None]) ** 2) @ (frac**2) * labels.size / (labels.size - 1)
    return np.sqrt(var)


def exact_summary(table: JointTable, alpha: float = 0.5) -> ZSummary:
    mean, cov = moments(table)
    z = z_alpha_moments(table, alpha)
    flat = z.tables.reshape(table.d, table.d, -1)
    return ZSummary(
        mode="exact",
        alpha=alpha,
        mean=mean,
        sigma=cov,
        z_mean=z.mean,
        z_var=z.var,
        third=third_abs_moment_sum(table),
        z_left=flat,
        z_right=flat,
        weights=table.weights.ravel(),
    )
