import numpy as np
import pytest

from mvclt import core


def random_law(rng, max_atoms=3):
    """Random finite law with 1 to ``max_atoms`` distinct atoms."""
    k = int(rng.integers(1, max_atoms + 1))
    values = np.sort(rng.choice(np.arange(-6, 7), size=k, replace=False) / 2.0)
    probs = rng.dirichlet(np.ones(k))
    probs = np.clip(probs, 0.05, None)
    return core.atoms(values, probs / probs.sum())


def random_polynomial(rng, n, d, max_degree=3, max_terms=4):
    terms = []
    for _ in range(d):
        mons = []
        for _ in range(int(rng.integers(1, max_terms + 1))):
            size = int(rng.integers(0, min(max_degree, n) + 1))
            idx = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
            mons.append((float(rng.normal()), idx))
        terms.append(mons)
    return core.polynomial_statistic(terms, n)


def random_table(seed, max_n=6, d=2, max_atoms=3):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_n + 1))
    model = core.ProductModel(tuple(random_law(rng, max_atoms) for _ in range(n)))
    return core.build_joint_table(model, random_polynomial(rng, n, d))


def rademacher_table(F, n):
    return core.build_joint_table(core.ProductModel.iid(core.rademacher(), n), F)


@pytest.fixture
def x1x2():
    return rademacher_table(core.polynomial_statistic([[(1.0, (0, 1))]], 2), 2)


@pytest.fixture
def sum4():
    return rademacher_table(core.normalized_sum(4), 4)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
