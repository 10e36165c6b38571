"""Explicit error bounds for ``|E g(F) - E g(Y)|``, ``Y ~ N(0, C)``.

Two calculators:

* :func:`stein_bound` needs ``C`` positive definite and ``g`` with finite
  Lipschitz constant and Hessian-Lipschitz constant ``M2``;
* :func:`slepian_bound` allows any positive semi-definite ``C`` and needs
  bounds on the second and third partial derivatives of ``g``.

Both come in a compact form (``"L2"`` for Stein, ``"L1"`` for Slepian) that
uses the whole law of ``Z^(alpha)``, and a ``"split"`` form that only uses
``sigma``, ``Var(Z)`` and the third absolute moments.  The split form is never
smaller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ZSummary

# sqrt(2*pi) to 36 significant digits
SQRT_2PI = 2.50662827463100050241576528481104525
PD_RTOL = 1e-12
PSD_ATOL = 1e-10
SYM_TOL = 1e-12
CENTERING_TOL = 1e-9


class NotPositiveDefiniteError(ValueError):
    status = "C-not-PD"


def jacobi_eigh(C: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, Q)`` with ``C = Q diag(eigenvalues) Q^T``,
    eigenvalues ascending.  Sweeps stop once the off-diagonal Frobenius mass
    is at most ``tol * ||C||_F``.
    """
    A = np.array(C, dtype=float, copy=True)
    d = A.shape[0]
    if A.shape != (d, d):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    Q = np.eye(d)
    scale = np.linalg.norm(A)
    if d == 1 or scale == 0.0:
        return np.diag(A).copy(), Q

    mask = ~np.eye(d, dtype=bool)

    def off(M):
        # summed directly: ||M||^2 - sum(diag^2) cancels catastrophically
        return math.sqrt(float(np.sum(M[mask] ** 2)))

    for _ in range(max_sweeps):
        if off(A) <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = A[q, p] = 0.0
                qp, qq = Q[:, p].copy(), Q[:, q].copy()
                Q[:, p] = c * qp - s * qq
                Q[:, q] = s * qp + c * qq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], Q[:, order]


def _check_symmetric(C: np.ndarray) -> np.ndarray:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {C.shape}")
    if np.max(np.abs(C - C.T), initial=0.0) > SYM_TOL * max(1.0, np.max(np.abs(C), initial=0.0)):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (C + C.T)


def sym_operator_norms(C: np.ndarray) -> tuple[float, float | None]:
    """``(||C||_op, ||C^-1||_op)``; the second is ``None`` unless ``C`` is positive definite."""
    w, _ = jacobi_eigh(_check_symmetric(C))
    op = float(np.max(np.abs(w)))
    lo = float(w[0])
    inv = 1.0 / lo if lo > PD_RTOL * max(1.0, op) else None
    return op, inv


@dataclass(frozen=True)
class GaussianTarget:
    """Centred Gaussian law ``N(0, C)`` with cached spectral data."""

    C: np.ndarray
    eigvals: np.ndarray = field(init=False, repr=False)
    eigvecs: np.ndarray = field(init=False, repr=False)
    op_norm: float = field(init=False)
    inv_op_norm: float | None = field(init=False)
    cholesky: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        C = _check_symmetric(self.C)
        w, Q = jacobi_eigh(C)
        if w[0] < -PSD_ATOL:
            raise ValueError(f"covariance has negative eigenvalue {w[0]:.3g}")
        op = float(np.max(np.abs(w)))
        inv = 1.0 / float(w[0]) if w[0] > PD_RTOL * max(1.0, op) else None
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "eigvals", w)
        object.__setattr__(self, "eigvecs", Q)
        object.__setattr__(self, "op_norm", op)
        object.__setattr__(self, "inv_op_norm", inv)
        object.__setattr__(self, "cholesky", np.linalg.cholesky(C) if inv is not None else None)

    @classmethod
    def identity(cls, d: int) -> "GaussianTarget":
        return cls(np.eye(d))

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def is_pd(self) -> bool:
        return self.inv_op_norm is not None


@dataclass(frozen=True)
class SmoothnessConstants:
    """Bounds on a test function: ``||g||_Lip``, ``M2(g)``, ``||g''||_inf``, ``||g'''||_inf``."""

    lip: float | None = None
    m2: float | None = None
    g2_inf: float | None = None
    g3_inf: float | None = None

    def __post_init__(self):
        for name in ("lip", "m2", "g2_inf", "g3_inf"):
            v = getattr(self, name)
            if v is not None and not v >= 0:
                raise ValueError(f"{name} must be non-negative, got {v}")

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValueError(f"missing smoothness constants: {', '.join(missing)}")


UNIT_CONSTANTS = SmoothnessConstants(1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class BoundReport:
    method: str
    form: str
    alpha: float | None
    terms: dict
    constants: dict
    total: float
    mode: str = "exact"
    standard_errors: dict | None = None
    status: str = "ok"
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if any(v < 0 for v in self.terms.values()):
            raise ValueError(f"negative bound term in {self.terms}")

    @property
    def total_se(self) -> float | None:
        if self.standard_errors is None:
            return None
        return float(sum(self.standard_errors.values()))


def _target(target) -> GaussianTarget:
    return target if isinstance(target, GaussianTarget) else GaussianTarget(np.asarray(target, dtype=float))


def _check_stats(stats: ZSummary, target: GaussianTarget) -> None:
    if target.d != stats.d:
        raise ValueError(f"target dimension {target.d} does not match statistic dimension {stats.d}")
    if stats.mode == "exact" and np.max(np.abs(stats.mean)) > CENTERING_TOL:
        raise ValueError(f"statistic is not centred (mean {stats.mean})")


def _sqrt_with_se(x: float, se: float | None):
    x = max(float(x), 0.0)
    r = math.sqrt(x)
    if se is None:
        return r, None
    return r, (float(se) / (2.0 * r) if r > 0 else math.sqrt(float(se)))


def _generic(stats: ZSummary, target: GaussianTarget, c_first: float, c_third: float, form: str, compact: str):
    """Assemble ``c_first * (covariance part) + c_third * sum of third moments``."""
    C = target.C
    se_map = stats.standard_errors
    mc = se_map is not None
    third_sum = float(np.sum(stats.third))
    terms, ses = {}, {}
    if form == compact:
        if compact == "L2":
            sq, sq_se = stats.sq_dev(C)
            val, se = _sqrt_with_se(np.sum(sq), None if sq_se is None else np.sum(sq_se))
        else:
            ab, ab_se = stats.abs_dev(C)
            val, se = float(np.sum(ab)), None if ab_se is None else float(np.sum(ab_se))
        terms["covariance_discrepancy"] = c_first * val
        ses["covariance_discrepancy"] = None if se is None else c_first * se
    elif form == "split":
        terms["covariance_mismatch"] = c_first * float(np.sum(np.abs(C - stats.sigma)))
        roots = [_sqrt_with_se(v, se_map["z_var"].flat[i] if mc else None) for i, v in enumerate(stats.z_var.flat)]
        terms["variance_term"] = c_first * sum(r for r, _ in roots)
        if mc:
            ses["covariance_mismatch"] = c_first * float(np.sum(se_map["sigma"]))
            ses["variance_term"] = c_first * sum(s for _, s in roots)
    else:
        raise ValueError(f"form must be {compact!r} or 'split', got {form!r}")
    terms["third_moment_term"] = c_third * third_sum
    if mc:
        ses["third_moment_term"] = c_third * float(np.sum(se_map["third"]))
    return terms, (ses if mc else None)


def stein_bound(stats: ZSummary, target, g: SmoothnessConstants, form: str = "L2") -> BoundReport:
    """Bound via the Stein equation; needs ``C`` positive definite and ``g.lip``, ``g.m2``."""
    target = _target(target)
    _check_stats(stats, target)
    if not target.is_pd:
        raise NotPositiveDefiniteError("Stein bound needs a positive definite covariance")
    g.require("lip", "m2")
    d = stats.d
    inv, op = target.inv_op_norm, target.op_norm
    b1 = inv * math.sqrt(op) * g.lip
    b2 = SQRT_2PI / 4.0 * inv**1.5 * op * g.m2 * d * d
    terms, ses = _generic(stats, target, b1, b2, form, "L2")
    return BoundReport(
        method="stein",
        form=form,
        alpha=stats.alpha,
        terms=terms,
        constants={"B1": b1, "B2": b2, "op_norm": op, "inv_op_norm": inv},
        total=float(sum(terms.values())),
        mode=stats.mode,
        standard_errors=ses,
        notes=stats.caveats,
    )


def slepian_bound(stats: ZSummary, target, g: SmoothnessConstants, form: str = "L1") -> BoundReport:
    """Bound via smart-path interpolation; any PSD ``C``, needs ``g.g2_inf`` and ``g.g3_inf``."""
    target = _target(target)
    _check_stats(stats, target)
    g.require("g2_inf", "g3_inf")
    d = stats.d
    b3 = g.g2_inf / 2.0
    b4 = g.g3_inf * d * d / 3.0
    terms, ses = _generic(stats, target, b3, b4, form, "L1")
    return BoundReport(
        method="slepian",
        form=form,
        alpha=stats.alpha,
        terms=terms,
        constants={"B3": b3, "B4": b4},
        total=float(sum(terms.values())),
        mode=stats.mode,
        standard_errors=ses,
        notes=stats.caveats,
    )
