"""Monte Carlo counterparts of the exact operators.

Each outer sample ``x`` contributes

* ``D_k F(x) = F(x) - E_k F(x)``: ``E_k`` is an exact atom average for finite
  coordinates and an ``inner_resamples``-draw average otherwise;
* ``E[D_k F | past(k)](x)`` and ``E[D_k F | future(k)](x)``: averages of
  ``D_k F`` over ``inner_resamples`` redraws of the complementary coordinates.

Two conditionally independent replicates of the conditional averages are
drawn per outer sample, giving two replicates ``Z1``, ``Z2`` of ``Z^(alpha)``
that are each conditionally unbiased for ``Z(x)``.  ``E[Z1*Z2] = E[Z^2]``, so
the variance of ``Z`` is estimated without the ``O(1/inner_resamples)``
inflation of a plug-in estimator.

Outer samples are processed in chunks; chunk ``c`` draws from its own stream
``SeedSequence(seed, spawn_key=(c,))`` and chunk results are combined in chunk
order, so results are bitwise reproducible for a fixed ``(seed, chunk_size)``
whatever the number of workers.  Standard errors are batch means over chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import NonFiniteStatisticError, ProductModel, StatisticVector, ZSummary


@dataclass(frozen=True)
class McConfig:
    outer_samples: int = 10_000
    inner_resamples: int = 32
    seed: int = 0
    chunk_size: int = 100
    workers: int = 1

    def __post_init__(self):
        for name in ("outer_samples", "inner_resamples", "chunk_size", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer, got {getattr(self, name)}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def chunk_sizes(self) -> list[int]:
        full, rest = divmod(self.outer_samples, self.chunk_size)
        return [self.chunk_size] * full + ([rest] if rest else [])


class _ChunkSampler:
    def __init__(self, model: ProductModel, F: StatisticVector, alpha: float, cfg: McConfig, chunk: int):
        self.model, self.F, self.alpha, self.cfg, self.chunk = model, F, alpha, cfg, chunk
        self.rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(chunk,)))

    def _eval(self, X):
        out = self.F(X)
        if not np.all(np.isfinite(out)):
            row = int(np.flatnonzero(~np.all(np.isfinite(out), axis=1))[0])
            raise NonFiniteStatisticError(
                f"non-finite statistic value (seed={self.cfg.seed}, chunk={self.chunk}, row={row})"
            )
        return out

    def _expect_k(self, X, FX, k):
        comp = self.model.components[k]
        if comp.is_finite:
            return sum(p * self._finite(self.F.substituted(k, X, a, FX)) for a, p in zip(comp.values, comp.probs))
        R = self.cfg.inner_resamples
        acc = np.zeros_like(FX)
        for _ in range(R):
            acc += self._finite(self.F.substituted(k, X, comp.draw(self.rng, X.shape[0]), FX))
        return acc / R

    def _finite(self, values):
        if not np.all(np.isfinite(values)):
            raise NonFiniteStatisticError(f"non-finite statistic value (seed={self.cfg.seed}, chunk={self.chunk})")
        return values

    def diff(self, X, k, FX=None):
        if FX is None:
            FX = self._eval(X)
        return FX - self._expect_k(X, FX, k)

    def cond_diff(self, X, k, redraw):
        """Average of ``D_k F`` over redraws of the coordinates in ``redraw``."""
        if not redraw:
            return self.diff(X, k)
        B, R = X.shape[0], self.cfg.inner_resamples
        Y = np.repeat(X, R, axis=0)
        for a in redraw:
            Y[:, a] = self.model.components[a].draw(self.rng, B * R)
        return self.diff(Y, k).reshape(B, R, -1).mean(axis=1)

    def run(self, size):
        n, d, alpha = self.model.n, self.F.d, self.alpha
        X = self.model.sample(self.rng, size)
        FX = self._eval(X)
        Z = np.zeros((2, size, d, d))
        third = np.zeros((size, d))
        for k in range(n):
            Dk = self.diff(X, k, FX)
            third += np.abs(Dk) ** 3
            for rep in range(2):
                past = self.cond_diff(X, k, list(range(k + 1, n)))
                fut = self.cond_diff(X, k, list(range(0, k)))
                Da = alpha * past + (1.0 - alpha) * fut
                Z[rep] += Dk[:, :, None] * Da[:, None, :]
        return FX, Z, third


def _chunk_estimates(FX, Z, third):
    """Per-chunk unbiased estimates of mean, sigma, E[Z], Var(Z), third moments."""
    m = FX.shape[0]
    mean = FX.mean(axis=0)
    c = FX - mean
    sigma = c.T @ c / (m - 1) if m > 1 else np.full((FX.shape[1],) * 2, np.nan)
    z1, z2 = Z
    z_mean = 0.5 * (z1 + z2).mean(axis=0)
    if m > 1:
        z_var = m / (m - 1) * ((z1 * z2).mean(axis=0) - z1.mean(axis=0) * z2.mean(axis=0))
    else:
        z_var = np.full(z_mean.shape, np.nan)
    return {"mean": mean, "sigma": sigma, "z_mean": z_mean, "z_var": z_var, "third": third.mean(axis=0)}


def mc_estimates(model: ProductModel, F: StatisticVector, alpha: float = 0.5, cfg: McConfig = McConfig()) -> ZSummary:
    """Monte Carlo summary of ``F`` under ``model``.

    Returns a :class:`ZSummary` in ``mc`` mode whose ``standard_errors`` hold
    batch-means errors for ``mean``, ``sigma``, ``z_mean``, ``z_var``, ``third``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    sizes = cfg.chunk_sizes()
    if not sizes:
        raise ValueError("no Monte Carlo samples requested")

    def work(c):
        return _ChunkSampler(model, F, alpha, cfg, c).run(sizes[c])

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(c) for c in range(len(sizes))]

    per_chunk = [_chunk_estimates(*p) for p in parts]
    counts = np.array(sizes, dtype=float)
    frac = counts / counts.sum()
    est, se = {}, {}
    for key in per_chunk[0]:
        stack = np.stack([pc[key] for pc in per_chunk], axis=-1)
        est[key] = stack @ frac
        if len(sizes) > 1:
            se[key] = np.sqrt(((stack - est[key][..., None]) ** 2) @ frac**2 * len(sizes) / (len(sizes) - 1))
        else:
            se[key] = np.full(est[key].shape, np.nan)

    FX = np.concatenate([p[0] for p in parts])
    Z = np.concatenate([p[1] for p in parts], axis=1)
    chunks = np.repeat(np.arange(len(sizes)), sizes)
    M = FX.shape[0]
    caveats = ("conditional expectations are nested Monte Carlo estimates",)
    if not model.is_finite:
        caveats += ("third moments use estimated D_k F and are biased upward",)
    return ZSummary(
        mode="mc",
        alpha=alpha,
        mean=est["mean"],
        sigma=0.5 * (est["sigma"] + est["sigma"].T),
        z_mean=est["z_mean"],
        z_var=est["z_var"],
        third=est["third"],
        z_left=np.moveaxis(Z[0], 0, -1),
        z_right=np.moveaxis(Z[1], 0, -1),
        weights=np.full(M, 1.0 / M),
        chunks=chunks,
        standard_errors=se,
        caveats=caveats,
    )
