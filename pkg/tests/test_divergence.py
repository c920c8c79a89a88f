import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthaudit.divergence import (KULLBACK_LEIBLER, SQUARED_HELLINGER, f_pair, hellinger,
                                   jensen_shannon, wasserstein1_categorical)
from synthaudit.errors import CategoryMismatch, DomainError, Unsupported
from synthaudit.table import LabelDistribution


def test_jsd_examples():
    assert jensen_shannon([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert jensen_shannon([1.0, 0.0], [0.0, 1.0]) == 1.0
    want = 0.5 * math.log2(1 / 0.75) + 0.5 * (0.5 * math.log2(0.5 / 0.75)
                                              + 0.5 * math.log2(0.5 / 0.25))
    assert jensen_shannon([1.0, 0.0], [0.5, 0.5]) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(0.311278, abs=1e-6)


def test_jsd_matches_scipy(rng):
    from scipy.spatial.distance import jensenshannon
    for _ in range(20):
        p = rng.dirichlet(np.ones(5))
        q = rng.dirichlet(np.ones(5))
        assert jensen_shannon(p, q) == pytest.approx(jensenshannon(p, q, base=2) ** 2,
                                                     abs=1e-12)


def test_hellinger_examples():
    assert hellinger([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert hellinger([1.0, 0.0], [0.0, 1.0]) == 1.0
    want = math.sqrt((1 - math.sqrt(0.5)) ** 2 + 0.5) / math.sqrt(2)
    assert hellinger([1.0, 0.0], [0.5, 0.5]) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(0.541196, abs=1e-6)


def test_wasserstein_examples():
    assert wasserstein1_categorical([0.2, 0.8], [0.2, 0.8]) == 0.0
    assert wasserstein1_categorical([1, 0], [0, 1]) == 1.0
    assert wasserstein1_categorical([1, 0, 0, 0], [0, 0, 0, 1]) == 3.0


def test_wasserstein_matches_scipy(rng):
    from scipy.stats import wasserstein_distance
    for _ in range(20):
        p = rng.dirichlet(np.ones(6))
        q = rng.dirichlet(np.ones(6))
        idx = np.arange(6)
        assert wasserstein1_categorical(p, q) == pytest.approx(
            wasserstein_distance(idx, idx, p, q), abs=1e-12)


def test_category_mismatch():
    p = LabelDistribution(("A", "B"), np.array([0.5, 0.5]))
    q = LabelDistribution(("A", "C"), np.array([0.5, 0.5]))
    with pytest.raises(CategoryMismatch):
        jensen_shannon(p, q)
    with pytest.raises(CategoryMismatch):
        hellinger([0.5, 0.5], [1.0])


_dist = st.lists(st.floats(0.0, 1.0), min_size=2, max_size=6).filter(lambda v: sum(v) > 1e-3)


@settings(max_examples=80, deadline=None)
@given(_dist, st.data())
def test_divergences_symmetric_and_bounded(a, data):
    b = data.draw(st.lists(st.floats(0.0, 1.0), min_size=len(a), max_size=len(a))
                  .filter(lambda v: sum(v) > 1e-3))
    p = np.array(a) / sum(a)
    q = np.array(b) / sum(b)
    for fn in (jensen_shannon, hellinger, wasserstein1_categorical):
        assert fn(p, q) == pytest.approx(fn(q, p), abs=1e-12)
        assert fn(p, p) == pytest.approx(0.0, abs=1e-12)
    assert 0.0 <= jensen_shannon(p, q) <= 1.0 + 1e-12
    assert 0.0 <= hellinger(p, q) <= 1.0 + 1e-12


def test_f_pair_table_values():
    kl, h2 = f_pair("kl"), f_pair("SquaredHellinger")
    assert kl.f(1.0) == 0.0 and h2.f(1.0) == 0.0
    assert kl.f_conjugate(1.0) == 1.0
    assert h2.f(4.0) == 1.0
    assert h2.f_conjugate(0.5) == 1.0
    with pytest.raises(Unsupported):
        f_pair("chi2")


def test_h2_conjugate_domain():
    with pytest.raises(DomainError):
        SQUARED_HELLINGER.f_conjugate(1.0)


@pytest.mark.parametrize("pair", [KULLBACK_LEIBLER, SQUARED_HELLINGER])
def test_f_convex_midpoint(pair):
    u = np.linspace(0.0, 5.0, 41)
    for a in u:
        for b in u:
            assert pair.f(0.5 * (a + b)) <= 0.5 * (pair.f(a) + pair.f(b)) + 1e-12


@pytest.mark.parametrize("pair", [KULLBACK_LEIBLER, SQUARED_HELLINGER])
def test_fenchel_young(pair):
    u = np.linspace(0.0, 6.0, 61)
    t = np.linspace(-3.0, 0.99 if pair is SQUARED_HELLINGER else 3.0, 61)
    for tt in t:
        assert np.all(pair.f(u) >= u * tt - pair.f_conjugate(tt) - 1e-12)


def test_conjugate_gradients_numerically(rng):
    for pair in (KULLBACK_LEIBLER, SQUARED_HELLINGER):
        for v in rng.uniform(-2, 2, size=10):
            h = 1e-6
            num = (pair.output_activation(v + h) - pair.output_activation(v - h)) / (2 * h)
            assert pair.output_activation_grad(v) == pytest.approx(num, rel=1e-6)
            t = pair.output_activation(v)
            num = (pair.f_conjugate(t + h) - pair.f_conjugate(t - h)) / (2 * h)
            assert pair.f_conjugate_grad(t) == pytest.approx(num, rel=1e-5)


def test_fenchel_consistency_kl():
    v = np.linspace(-5.0, 5.0, 101)
    assert np.max(np.abs(KULLBACK_LEIBLER.conjugate_of_activation(v) - np.exp(v - 1))) <= 1e-12
