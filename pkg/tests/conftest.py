import numpy as np
import pytest

from peermatch import HouseSpec, InstanceConfig, Matching, build_instance
from peermatch.generators import generate_random_instance

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def instance_a_config(scoring="zero"):
    return InstanceConfig(
        n_students=4,
        houses=[HouseSpec("h1", 2, 2.0), HouseSpec("h2", 2, 0.0)],
        edges=[(0, 1, 3.0), (2, 3, 3.0)],
        scoring=scoring,
    )


@pytest.fixture
def inst_a():
    return build_instance(instance_a_config())


@pytest.fixture
def mu_a():
    """Friends together: {s1, s2 -> h1; s3, s4 -> h2}."""
    return Matching.from_rosters([[0, 1], [2, 3]])


@pytest.fixture
def mu_split():
    """Friends split: {s1, s3 -> h1; s2, s4 -> h2}."""
    return Matching.from_rosters([[0, 2], [1, 3]])


def random_quotas(rng, n_real, m, holes):
    """Random positive quotas over m houses summing to n_real + holes."""
    total = n_real + holes
    cuts = np.sort(rng.choice(np.arange(1, total), size=m - 1, replace=False)) if m > 1 else np.array([], int)
    return np.diff(np.concatenate([[0], cuts, [total]])).tolist()


def random_instance(seed, n_max=8, m_max=3, holes_max=2, general=True, weight_model="weighted"):
    """Small random market; ``general`` mixes subjective values, house scores and holes."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(max(m, 2), n_max + 1))
    holes = int(rng.integers(0, holes_max + 1)) if general else 0
    quotas = random_quotas(rng, n, m, holes)
    cfg = generate_random_instance(
        n, m, seed=int(rng.integers(2**31)), weight_model=weight_model, p=float(rng.uniform(0.3, 0.9)),
        quota_rule=quotas,
        desirability=("subjective" if general and rng.random() < 0.5 else "objective"),
        scoring=("additive" if general and rng.random() < 0.5 else "zero"),
        d_high=float(rng.choice([1.0, 3.0, 10.0])),
        w_high=float(rng.choice([1.0, 5.0])),
    )
    return build_instance(cfg)
