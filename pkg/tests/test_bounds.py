import math

import numpy as np
import pytest

from mvclt import bounds, core
from mvclt.bounds import GaussianTarget, SmoothnessConstants, slepian_bound, stein_bound
from conftest import random_table, rademacher_table

UNIT = bounds.UNIT_CONSTANTS


def test_sqrt_2pi_constant():
    assert bounds.SQRT_2PI == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)


@pytest.mark.parametrize(
    "C, expected",
    [
        (np.eye(2), (1.0, 1.0)),
        (np.diag([2.0, 0.5]), (2.0, 2.0)),
        (np.array([[2.0, 1.0], [1.0, 2.0]]), (3.0, 1.0)),
    ],
)
def test_operator_norms(C, expected):
    op, inv = bounds.sym_operator_norms(C)
    assert op == pytest.approx(expected[0], abs=1e-14)
    assert inv == pytest.approx(expected[1], abs=1e-14)


def test_operator_norms_singular_and_asymmetric():
    assert bounds.sym_operator_norms(np.ones((2, 2)))[1] is None
    with pytest.raises(ValueError):
        bounds.sym_operator_norms(np.array([[1.0, 0.5], [0.0, 1.0]]))


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8, 12, 16])
def test_jacobi_reconstruction(d):
    rng = np.random.default_rng(d)
    A = rng.normal(size=(d, d))
    C = A + A.T
    w, Q = bounds.jacobi_eigh(C)
    assert np.linalg.norm(Q @ np.diag(w) @ Q.T - C) <= 1e-10 * np.linalg.norm(C)
    assert np.allclose(w, np.linalg.eigvalsh(C), atol=1e-10)
    assert np.all(np.diff(w) >= 0)


def test_target_rejects_negative_definite():
    with pytest.raises(ValueError):
        GaussianTarget(np.diag([1.0, -0.1]))
    t = GaussianTarget(np.ones((2, 2)))
    assert not t.is_pd and t.cholesky is None


def test_stein_constants_identity(x1x2):
    stats = core.exact_summary(rademacher_table(core.linear_statistic(np.eye(2)), 2))
    rep = stein_bound(stats, np.eye(2), SmoothnessConstants(lip=1, m2=1))
    assert rep.constants["B1"] == pytest.approx(1.0)
    # B2 carries the d^2 factor
    assert rep.constants["B2"] == pytest.approx(math.sqrt(2 * math.pi) / 4 * 4)


def test_stein_product_anchor(x1x2):
    stats = core.exact_summary(x1x2, 0.5)
    for form in ("L2", "split"):
        rep = stein_bound(stats, np.eye(1), SmoothnessConstants(lip=1, m2=1), form)
        assert rep.total == pytest.approx(math.sqrt(2 * math.pi) / 4 * 2, abs=1e-15)


def test_slepian_anchors(x1x2, sum4):
    assert slepian_bound(core.exact_summary(x1x2), np.eye(1), UNIT).total == pytest.approx(2 / 3, abs=1e-15)
    assert slepian_bound(core.exact_summary(sum4), np.eye(1), UNIT).total == pytest.approx(1 / 6, abs=1e-15)
    zero = SmoothnessConstants(g2_inf=1.0, g3_inf=0.0)
    assert slepian_bound(core.exact_summary(sum4), np.eye(1), zero).total == 0.0


def test_stein_refuses_singular_target():
    table = rademacher_table(core.polynomial_statistic([[(1.0, (0,))], [(1.0, (0,))]], 1), 1)
    stats = core.exact_summary(table)
    with pytest.raises(bounds.NotPositiveDefiniteError) as info:
        stein_bound(stats, np.ones((2, 2)), UNIT)
    assert info.value.status == "C-not-PD"
    assert slepian_bound(stats, np.ones((2, 2)), UNIT).total >= 0


def test_missing_constants_and_uncentred_statistic(x1x2):
    stats = core.exact_summary(x1x2)
    with pytest.raises(ValueError, match="lip"):
        stein_bound(stats, np.eye(1), SmoothnessConstants(g2_inf=1, g3_inf=1))
    table = rademacher_table(core.polynomial_statistic([[(1.0, ()), (1.0, (0,))]], 1), 1)
    with pytest.raises(ValueError, match="centred"):
        slepian_bound(core.exact_summary(table), np.eye(1), UNIT)


@pytest.mark.parametrize("seed", range(15))
def test_compact_form_never_exceeds_split_form(seed):
    table = random_table(seed)
    table = core.JointTable(table.model, None, table.values - core.moments(table)[0], table.weights)
    stats = core.exact_summary(table, 0.5)
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2))
    C = A @ A.T + 0.1 * np.eye(2)
    assert slepian_bound(stats, C, UNIT, "L1").total <= slepian_bound(stats, C, UNIT, "split").total + 1e-12
    assert stein_bound(stats, C, UNIT, "L2").total <= stein_bound(stats, C, UNIT, "split").total + 1e-12


def test_totals_monotone_in_constants(x1x2):
    stats = core.exact_summary(x1x2)
    C = np.array([[1.3]])
    small = slepian_bound(stats, C, SmoothnessConstants(g2_inf=1, g3_inf=1), "split").total
    big = slepian_bound(stats, C, SmoothnessConstants(g2_inf=2, g3_inf=1.5), "split").total
    assert small <= big


def test_report_total_is_sum_of_terms(x1x2):
    rep = slepian_bound(core.exact_summary(x1x2), np.array([[2.0]]), UNIT, "split")
    assert rep.total == pytest.approx(sum(rep.terms.values()), abs=1e-12)
    assert set(rep.terms) == {"covariance_mismatch", "variance_term", "third_moment_term"}
