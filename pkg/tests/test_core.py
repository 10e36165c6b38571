import math

import numpy as np
import pytest

from mvclt import core
from conftest import rademacher_table, random_table


def poly(terms, n):
    return core.polynomial_statistic(terms, n)


# ---------------------------------------------------------------- distributions


def test_atoms_validation():
    with pytest.raises(ValueError):
        core.atoms([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(ValueError):
        core.atoms([1.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        core.atoms([], [])


def test_two_point_law_is_standardized():
    for p in (0.1, 0.3, 0.5, 0.8):
        law = core.standardized_two_point(p)
        assert abs(law.mean()) < 1e-15
        assert abs(law.variance() - 1.0) < 1e-12


def test_bernoulli_moments():
    law = core.bernoulli(0.3)
    assert law.abs_moment(3) == pytest.approx(0.3)
    assert law.abs_moment(3, central=True) == pytest.approx(0.1218)
    assert law.abs_moment(4, central=True) == pytest.approx(0.0777)


def test_sampler_law_rejected_in_exact_mode():
    model = core.ProductModel((core.standard_normal(), core.rademacher()))
    with pytest.raises(ValueError, match="finite atoms"):
        core.build_joint_table(model, core.normalized_sum(2))


# ---------------------------------------------------------------- joint table


def test_table_product_of_two_signs(x1x2):
    assert x1x2.flat_values().ravel().tolist() == [1.0, -1.0, -1.0, 1.0]
    assert np.all(x1x2.weights == 0.25)


def test_table_single_atom():
    model = core.ProductModel((core.atoms([3.0], [1.0]),))
    table = core.build_joint_table(model, core.linear_statistic([[1.0]]))
    assert table.flat_values().tolist() == [[3.0]]
    assert table.weights.ravel().tolist() == [1.0]
    assert core.diff_D(table, 0, 0).tolist() == [0.0]


def test_table_sum_of_three():
    table = rademacher_table(core.linear_statistic([[1.0, 1.0, 1.0]]), 3)
    assert table.flat_values().shape == (8, 1)
    mean, cov = core.moments(table)
    assert mean[0] == pytest.approx(0.0, abs=1e-15)
    assert cov[0, 0] == pytest.approx(3.0)


def test_cap_exceeded_names_size():
    model = core.ProductModel.iid(core.rademacher(), 10)
    with pytest.raises(core.CapExceededError, match="1024"):
        core.build_joint_table(model, core.normalized_sum(10), cap=1000)


def test_non_finite_value_reports_assignment():
    F = core.StatisticVector(lambda X: np.log(X[:, 0] + 1.0), 1)
    with np.errstate(divide="ignore"), pytest.raises(core.NonFiniteStatisticError, match="assignment index 0"):
        core.build_joint_table(core.ProductModel.iid(core.rademacher(), 1), F)


def test_statistic_evaluated_once_per_assignment():
    calls = []

    def f(X):
        calls.append(X.shape[0])
        return X.sum(axis=1)

    core.build_joint_table(core.ProductModel.iid(core.rademacher(), 3), core.StatisticVector(f, 1))
    assert sum(calls) == 8


# ---------------------------------------------------------------- moments


def test_moments_examples():
    table = rademacher_table(poly([[(1.0, (0,))], [(1.0, (0,))]], 1), 1)
    assert np.allclose(core.moments(table)[1], [[1, 1], [1, 1]])
    table = rademacher_table(poly([[(1.0, (0, 1))], [(1.0, (0,)), (1.0, (1,))]], 2), 2)
    mean, cov = core.moments(table)
    assert np.allclose(mean, 0) and cov[0, 1] == 0.0


# ---------------------------------------------------------------- difference operators


def test_diff_D_examples(x1x2):
    D = core.diff_D(x1x2, 0, 0)
    assert D[1, 1] == 1.0  # x = (1, 1)
    table = rademacher_table(poly([[(1.0, (0,)), (1.0, (0, 1))]], 2), 2)
    D = core.diff_D(table, 0, 0)
    assert D[1, 0] == 0.0  # x = (1, -1)
    assert D[1, 1] == 2.0  # x = (1, 1)
    assert np.all(core.diff_D(table, np.full(table.shape, 7.0), 1) == 0.0)


def test_diff_D_bad_coordinate(x1x2):
    with pytest.raises(IndexError):
        core.diff_D(x1x2, 0, 2)


def test_diff_d_examples(x1x2):
    assert np.allclose(core.diff_d(x1x2, 0, 0), 1.0)
    table = rademacher_table(poly([[(1.0, (0,))]], 2), 2)
    assert np.all(core.diff_d(table, 0, 1) == 0.0)
    assert np.all(core.diff_d(table, np.full(table.shape, 2.0), 0) == 0.0)


def test_diff_D_has_zero_coordinate_mean():
    for seed in range(20):
        table = random_table(seed)
        for k in range(table.n):
            assert np.max(np.abs(core.expect_k(table, core.diff_D(table, 0, k), k))) < 1e-12


def test_cond_exp_examples(x1x2):
    assert np.all(core.cond_exp(x1x2, 0, 0, "past") == 0.0)
    assert np.array_equal(core.cond_exp(x1x2, 0, 0, "future"), x1x2.component(0))
    table = rademacher_table(poly([[(1.0, (0,)), (1.0, (1,))]], 2), 2)
    assert np.all(core.cond_exp(table, 0, 0, "past")[1] == 1.0)


def test_cond_exp_trivial_fields_give_mean():
    table = random_table(3)
    mean = table.expect(table.component(0))
    assert np.allclose(core.cond_exp(table, 0, -1, "past"), mean, atol=1e-12)
    assert np.allclose(core.cond_exp(table, 0, table.n, "future"), mean, atol=1e-12)
    with pytest.raises(IndexError):
        core.cond_exp(table, 0, table.n, "past")
    with pytest.raises(IndexError):
        core.cond_exp(table, 0, -1, "future")


def test_cond_exp_tower_property():
    for seed in range(20):
        table = random_table(seed)
        mean = table.expect(table.component(1))
        for k in range(table.n):
            for direction in ("past", "future"):
                assert abs(table.expect(core.cond_exp(table, 1, k, direction)) - mean) < 1e-12


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 1.0])
def test_d_alpha_examples(alpha):
    table = rademacher_table(poly([[(1.0, (0,))]], 2), 2)
    assert np.allclose(core.d_alpha(table, 0, 0, alpha), table.component(0))
    table = rademacher_table(poly([[(1.0, (0, 1))]], 2), 2)
    U = table.component(0)
    assert np.allclose(core.d_alpha(table, 0, 0, alpha), (1 - alpha) * U)
    assert np.allclose(core.d_alpha(table, 0, 1, alpha), alpha * U)


def test_d_alpha_rejects_bad_alpha(x1x2):
    with pytest.raises(ValueError):
        core.d_alpha(x1x2, 0, 0, 1.5)


# ---------------------------------------------------------------- Z and third moments


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_z_examples(x1x2, sum4, alpha):
    for table in (x1x2, sum4):
        z = core.z_alpha_moments(table, alpha)
        assert np.allclose(z.tables, 1.0)
        assert z.mean[0, 0] == pytest.approx(1.0)
        assert z.var[0, 0] == pytest.approx(0.0, abs=1e-15)
    table = rademacher_table(core.linear_statistic([[1.0]]), 1)
    assert np.allclose(core.z_alpha_moments(table, alpha).tables, 1.0)


def test_third_moment_examples(x1x2, sum4):
    assert core.third_abs_moment_sum(sum4)[0] == pytest.approx(0.5)
    assert core.third_abs_moment_sum(x1x2)[0] == pytest.approx(2.0)
    const = rademacher_table(poly([[(2.0, ())]], 2), 2)
    assert core.third_abs_moment_sum(const)[0] == 0.0


# ---------------------------------------------------------------- chain rule


class _Linear:
    def __init__(self, w):
        self.w = np.asarray(w, dtype=float)
        self.constants = type("C", (), {"g2_inf": 0.0})()

    def func(self, X):
        return X @ self.w

    def grad(self, X):
        return np.broadcast_to(self.w, X.shape)


def test_chain_rule_linear_function_is_exact():
    table = random_table(5)
    for k in range(table.n):
        assert core.chain_rule_residual_check(table, _Linear([1.0, -2.0]), k) <= 1e-12


def test_chain_rule_cosine_single_sign():
    from mvclt.verify import make_cosine_family

    table = rademacher_table(core.linear_statistic([[1.0]]), 1)
    assert core.chain_rule_residual_check(table, make_cosine_family([1.0]), 0) <= 0.0


def test_chain_rule_needs_gradient(x1x2):
    f = type("F", (), {"grad": None})()
    with pytest.raises(ValueError):
        core.chain_rule_residual_check(x1x2, f, 0)


# ---------------------------------------------------------------- summaries


def test_exact_summary_forms(x1x2):
    s = core.exact_summary(x1x2, 0.5)
    sq, se = s.sq_dev(np.eye(1))
    assert se is None and sq[0, 0] == pytest.approx(0.0)
    ab, _ = s.abs_dev(np.full((1, 1), 3.0))
    assert ab[0, 0] == pytest.approx(2.0)


def test_batch_standard_error_single_chunk_is_nan():
    assert np.isnan(core.batch_standard_error(np.ones((1, 5)), np.zeros(5, dtype=int))).all()


def test_batch_standard_error_matches_formula():
    x = np.arange(12.0)[None, :]
    chunks = np.repeat(np.arange(4), 3)
    means = x.reshape(4, 3).mean(axis=1)
    expected = means.std(ddof=1) / math.sqrt(4)
    assert core.batch_standard_error(x, chunks)[0] == pytest.approx(expected)
