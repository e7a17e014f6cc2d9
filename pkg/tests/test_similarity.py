import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_pearson, naive_pearson, raw_cosine
from taucov.basis import BasisSpec, CoefficientVector
from taucov.dataio import TimeSeries, load_fixture
from taucov.errors import DomainError
from taucov.fit import fit_series
from taucov.similarity import Method, dot, pearson, similarity_matrix, tau_covariance

H = BasisSpec.hermite


def cv(values):
    return CoefficientVector(H(len(values) - 1), values)


@pytest.fixture(scope="module")
def table1():
    return load_fixture("table1")


def random_dataset(rng, n_series=8, n_points=16):
    years = list(range(2000, 2000 + n_points))
    return [TimeSeries(f"s{i}", years, rng.uniform(-1e3, 1e3, n_points))
            for i in range(n_series)]


@pytest.mark.parametrize("k0, expected", [(True, 32.0), (False, 28.0)])
def test_dot(k0, expected):
    assert dot(cv([1, 2, 3]), cv([4, 5, 6]), k0) == expected


def test_dot_zero_and_mismatch():
    assert dot(cv([0, 0, 0]), cv([0, 0, 0])) == 0.0
    with pytest.raises(DomainError):
        dot(cv([1, 2]), cv([1, 2, 3]))
    with pytest.raises(DomainError):
        dot(cv([1, 2]), CoefficientVector(BasisSpec.monomial(1), [1, 2]))


def test_tau_examples():
    assert tau_covariance(cv([3, -1, 2]), cv([3, -1, 2])) == 1.0
    assert tau_covariance(cv([1, 0]), cv([0, 1])) == 0.0


def test_tau_k0_switch():
    a, b = cv([10, 1, 0]), cv([10, 0, 1])
    assert tau_covariance(a, b, True) == pytest.approx(100 / 101)
    assert tau_covariance(a, b, False) == 0.0


def test_tau_undefined_angle():
    with pytest.raises(DomainError, match="undefined angle"):
        tau_covariance(cv([0, 0]), cv([1, 1]))
    with pytest.raises(DomainError):
        tau_covariance(cv([5, 0]), cv([1, 1]), k0_included=False)


def test_tau_handles_extreme_magnitudes():
    a = cv([1e300, 1e300])
    b = cv([1e-300, 1e-300])
    assert tau_covariance(a, b) == pytest.approx(1.0, abs=1e-15)


vectors = st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=16).filter(
    lambda v: max(abs(x) for x in v) > 1e-3)


@given(vectors)
def test_tau_self_similarity(v):
    assert abs(tau_covariance(cv(v), cv(v)) - 1.0) <= 1e-12


@given(st.data())
def test_tau_sign_and_scale(data):
    n = data.draw(st.integers(1, 15))
    elems = st.floats(-1e3, 1e3, allow_nan=False)
    a = data.draw(st.lists(elems, min_size=n + 1, max_size=n + 1).filter(
        lambda v: max(map(abs, v)) > 1e-3))
    b = data.draw(st.lists(elems, min_size=n + 1, max_size=n + 1).filter(
        lambda v: max(map(abs, v)) > 1e-3))
    t = tau_covariance(cv(a), cv(b))
    assert tau_covariance(-cv(a), cv(b)) == -t
    for lam in (1e-6, -1e-6, 1.0, -1.0, 1e6, -1e6):
        assert abs(tau_covariance(cv(a).scaled(lam), cv(b)) - math.copysign(1, lam) * t) <= 1e-12


def test_pearson_examples():
    assert pearson([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0
    x = list(range(10))
    assert pearson(x, [math.exp(v) for v in x]) == pytest.approx(0.71687, abs=5e-3)


def test_pearson_eleven_point_sequence():
    # 0..10 against exp(0..10): the printed 0.71687 belongs to the 10-point
    # sequence; the 11-point value is frozen here from the exact-rational oracle
    x = list(range(11))
    y = [math.exp(v) for v in x]
    assert pearson(x, y) == pytest.approx(exact_pearson(x, y), abs=1e-14)
    assert pearson(x, y) == pytest.approx(0.6914041565001567, abs=1e-14)


def test_pearson_forest_co2(table1):
    forest, co2 = table1[0].values, table1[1].values
    # frozen from the exact-rational oracle; the printed table has +0.804915995
    assert pearson(forest, co2) == pytest.approx(-0.9269370626338603, abs=1e-12)
    assert pearson(forest, co2) == pytest.approx(exact_pearson(forest, co2), abs=1e-12)


def test_pearson_errors():
    with pytest.raises(DomainError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(DomainError):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(DomainError):
        pearson([1], [1])


def test_pearson_matches_naive_oracle():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        x, y = rng.uniform(0, 1e3, n), rng.uniform(0, 1e3, n)
        assert abs(pearson(x, y) - naive_pearson(list(x), list(y))) <= 1e-10


@settings(max_examples=50)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=20), st.floats(-50, 50),
       st.floats(0.01, 100), st.floats(-100, 100))
def test_pearson_sign_flip_and_affine(x, c, scale, shift):
    x = np.array(x)
    if np.ptp(x) < 1e-3:
        return
    y = np.sin(np.arange(len(x))) + 0.1 * x
    if np.ptp(y) < 1e-6:
        return
    r = pearson(x, y)
    assert abs(pearson(-x + c, y) + r) <= 1e-12
    assert abs(pearson(scale * x + shift, y) - r) <= 1e-10
    assert abs(pearson(x, scale * y + shift) - r) <= 1e-10


def test_pearson_self_similarity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.uniform(-1e6, 1e6, 16)
        assert abs(pearson(x, x) - 1.0) <= 1e-12


def check_matrix(m):
    e = m.entries
    assert np.array_equal(e, e.T)
    assert np.all(np.abs(np.diag(e) - 1.0) <= 1e-12)
    assert np.all(np.abs(e) <= 1 + 1e-12)


@pytest.mark.parametrize("method", list(Method))
def test_matrix_over_table1(table1, method):
    m = similarity_matrix(table1, method)
    assert m.entries.shape == (8, 8)
    assert m.labels == tuple(s.label for s in table1)
    check_matrix(m)


def test_matrix_random_datasets():
    rng = np.random.default_rng(1234)
    for _ in range(100):
        ds = random_dataset(rng)
        check_matrix(similarity_matrix(ds, Method.PEARSON))
        check_matrix(similarity_matrix(ds, Method.TAU, precision=None))


def test_matrix_identical_series():
    s = TimeSeries("a", [2000, 2001, 2002, 2003], [1.0, 3.0, 2.0, 5.0])
    t = TimeSeries("b", s.years, s.values)
    for method in Method:
        m = similarity_matrix([s, t], method)
        assert np.allclose(m.entries, 1.0, atol=1e-12)


def test_matrix_preconditions(table1):
    with pytest.raises(DomainError):
        similarity_matrix(table1[:1], Method.PEARSON)
    odd = TimeSeries("odd", list(range(2001, 2017)), table1[0].values)
    with pytest.raises(DomainError):
        similarity_matrix([table1[0], odd], Method.PEARSON)


def test_matrix_tau_uses_fits(table1):
    m = similarity_matrix(table1[:3], Method.TAU, k0_included=False)
    a = fit_series(table1[0]).coefficients
    b = fit_series(table1[2]).coefficients
    assert m.entries[0, 2] == tau_covariance(a, b, False)
    assert m.k0_included is False


def test_tau_depends_on_basis_representation():
    rng = np.random.default_rng(99)
    years = list(range(2000, 2016))
    x, y = rng.uniform(1, 10, 16), rng.uniform(1, 10, 16)
    a = fit_series(TimeSeries("x", years, x)).coefficients
    b = fit_series(TimeSeries("y", years, y)).coefficients
    assert abs(tau_covariance(a, b) - raw_cosine(x, y)) > 0.05
