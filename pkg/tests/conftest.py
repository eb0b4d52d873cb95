import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from entrocone.shannon import JointDistribution


def random_distribution(rng: random.Random, variables, exact=False, sparsity=0.3):
    """Random joint distribution; some outcomes get probability zero."""
    outcomes = list(itertools.product(*(range(c) for _, c in variables)))
    weights = [0 if rng.random() < sparsity else rng.randint(1, 20) for _ in outcomes]
    if not any(weights):
        weights[rng.randrange(len(weights))] = 1
    total = sum(weights)
    if exact:
        probs = {o: Fraction(w, total) for o, w in zip(outcomes, weights) if w}
    else:
        probs = {o: w / total for o, w in zip(outcomes, weights) if w}
    return JointDistribution(variables, probs)


def binary(names):
    return [(n, 2) for n in names]


@pytest.fixture
def rng():
    return random.Random(20240611)


@st.composite
def rational_distributions(draw, names, max_card=2):
    cards = [draw(st.integers(2, max_card)) for _ in names]
    variables = list(zip(names, cards))
    n_out = 1
    for c in cards:
        n_out *= c
    weights = draw(st.lists(st.integers(0, 12), min_size=n_out, max_size=n_out))
    if not any(weights):
        weights[0] = 1
    total = sum(weights)
    outcomes = itertools.product(*(range(c) for c in cards))
    probs = {o: Fraction(w, total) for o, w in zip(outcomes, weights) if w}
    return JointDistribution(variables, probs)


# acceptance criteria report ---------------------------------------------------

ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
