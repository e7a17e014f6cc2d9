import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (HERMITE_CLOSED_FORMS, closed_form_hermite, exact_unit_gram,
                     monomial_to_hermite_exact)
from taucov.basis import (BasisSpec, CoefficientVector, basis_eval, basis_eval_all,
                          basis_values, evaluate, gram_matrix, hermite_to_monomial_matrix,
                          horner, to_hermite, to_monomial)
from taucov.errors import DomainError, NumericalError

H = BasisSpec.hermite
M = BasisSpec.monomial


@pytest.mark.parametrize("k, x, expected", [
    (0, 0.7, 1.0),
    (2, 1.0, 2.0),
    (3, 2.0, 40.0),
    (10, 0.0, -30240.0),
])
def test_basis_eval_examples(k, x, expected):
    assert basis_eval(H(10), k, x) == expected


def test_monomial_eval():
    assert basis_eval(M(5), 5, 2.0) == 32.0
    assert basis_eval(M(0), 0, 123.0) == 1.0


@pytest.mark.parametrize("k", [-1, 4, 1.5])
def test_basis_eval_index_out_of_range(k):
    with pytest.raises(DomainError):
        basis_eval(H(3), k, 0.5)


def test_basis_eval_rejects_nonfinite():
    with pytest.raises(DomainError):
        basis_eval(H(2), 1, math.nan)


def test_basis_spec_validation():
    with pytest.raises(DomainError):
        BasisSpec("legendre", 3)
    with pytest.raises(DomainError):
        H(-1)
    assert H(4).dimension == 5


@pytest.mark.parametrize("spec, x, expected", [
    (H(2), 1.0, [1.0, 2.0, 2.0]),
    (H(1), 0.0, [1.0, 0.0]),
    (M(3), 2.0, [1.0, 2.0, 4.0, 8.0]),
])
def test_basis_eval_all_examples(spec, x, expected):
    assert basis_eval_all(spec, x) == expected


def test_basis_eval_all_matches_single_evaluation_exactly():
    rng = np.random.default_rng(5)
    for x in rng.uniform(-3, 3, 20):
        values = basis_eval_all(H(15), x)
        assert values == [basis_eval(H(15), k, x) for k in range(16)]


def test_vectorised_values_match_scalar_path():
    xs = np.linspace(-2, 2, 9)
    table = basis_values(H(8), xs)
    for x, row in zip(xs, table):
        assert row.tolist() == basis_eval_all(H(8), x)


def test_recurrence_matches_closed_forms():
    rng = np.random.default_rng(20240601)
    for x in rng.uniform(-3, 3, 100):
        got = basis_eval_all(H(10), x)
        for k in range(11):
            want = closed_form_hermite(k, x)
            assert abs(got[k] - want) <= 1e-12 * abs(want), (k, x)


def test_closed_form_table_is_consistent_with_parity_at_zero():
    # H_{2m}(0) = (-1)^m (2m)!/m!
    for m in range(6):
        assert HERMITE_CLOSED_FORMS[2 * m][0] == (-1) ** m * math.factorial(2 * m) // math.factorial(m)


@given(st.integers(0, 15), st.floats(-5, 5, allow_nan=False))
def test_parity(k, x):
    assert basis_eval(H(15), k, -x) == (-1) ** k * basis_eval(H(15), k, x)


@pytest.mark.parametrize("herm, mono", [
    ([0, 1], [0, 2]),
    ([0, 0, 1], [-2, 0, 4]),
    ([1, 0, 0.25], [0.5, 0, 1]),
])
def test_to_monomial_examples(herm, mono):
    out = to_monomial(CoefficientVector(H(len(herm) - 1), herm))
    assert out.basis == M(len(herm) - 1)
    assert out.coefficients == tuple(mono)


def test_to_hermite_examples():
    assert to_hermite(CoefficientVector(M(2), [0, 0, 1])).coefficients == (0.5, 0.0, 0.25)
    assert to_hermite(CoefficientVector(M(0), [3.25])).coefficients == (3.25,)


def test_conversion_family_guards():
    with pytest.raises(DomainError):
        to_monomial(CoefficientVector(M(1), [1, 1]))
    with pytest.raises(DomainError):
        to_hermite(CoefficientVector(H(1), [1, 1]))


def test_change_of_basis_matrix_matches_closed_forms():
    t = hermite_to_monomial_matrix(10)
    for k, coeffs in enumerate(HERMITE_CLOSED_FORMS):
        col = [t[m][k] for m in range(11)]
        assert col == coeffs + [0] * (11 - len(coeffs))


@pytest.mark.parametrize("m", range(16))
def test_to_hermite_matches_standard_identity(m):
    # x^m = m!/2^m sum_k H_{m-2k}/(k!(m-2k)!), independent of the library's inversion
    unit = [0.0] * (m + 1)
    unit[m] = 1.0
    got = to_hermite(CoefficientVector(M(m), unit)).coefficients
    assert got == tuple(float(v) for v in monomial_to_hermite_exact(unit))


def test_round_trip_random_vectors():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(0, 16))
        v = rng.uniform(-1, 1, n + 1)
        back = to_monomial(to_hermite(CoefficientVector(M(n), v)))
        worst = max(worst, float(np.max(np.abs(back.as_array() - v))))
        back = to_hermite(to_monomial(CoefficientVector(H(n), v)))
        worst = max(worst, float(np.max(np.abs(back.as_array() - v))))
    assert worst <= 1e-9


@settings(max_examples=60)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=16), st.floats(0, 1))
def test_evaluation_equivalence(coeffs, x):
    cv = CoefficientVector(H(len(coeffs) - 1), coeffs)
    mono = to_monomial(cv)
    a = evaluate(cv, x)
    b = horner(mono.coefficients, x)
    # relative to the size of the terms being summed; the value itself can be 0
    scale = max(abs(a), math.fsum(abs(c * v) for c, v in zip(coeffs, basis_eval_all(cv.basis, x))))
    assert abs(a - b) <= 1e-9 * scale


def test_coefficient_vector_validation():
    with pytest.raises(DomainError):
        CoefficientVector(H(2), [1, 2])
    with pytest.raises(DomainError):
        CoefficientVector(H(1), [1, math.inf])


def test_gram_examples():
    assert gram_matrix(H(1), (0, 1))[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert gram_matrix(M(1), (0, 1))[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_gram_unit_weight_matches_exact_integrals():
    g = gram_matrix(H(6), (0, 1))
    for j in range(7):
        for k in range(7):
            want = exact_unit_gram(j, k)
            assert g[j, k] == pytest.approx(want, rel=1e-12, abs=1e-10)
    assert np.array_equal(g, g.T)


def test_gram_gauss_weight_is_orthogonal():
    g = gram_matrix(H(6), weight="gauss")
    # oracle: Gauss-Hermite quadrature is exact for these polynomial products
    nodes, weights = np.polynomial.hermite.hermgauss(20)
    v = basis_values(H(6), nodes)
    oracle = (v * weights[:, None]).T @ v
    off = ~np.eye(7, dtype=bool)
    assert np.max(np.abs(g[off])) <= 1e-8
    norms = [2.0 ** k * math.factorial(k) * math.sqrt(math.pi) for k in range(7)]
    assert np.allclose(np.diag(g), norms, rtol=1e-12)
    assert np.allclose(g, oracle, rtol=1e-10, atol=1e-8)


def test_non_orthogonality_witness():
    g = gram_matrix(H(15), (0, 1))
    off = g[~np.eye(16, dtype=bool)]
    assert np.max(np.abs(off)) > 0.1


def test_gram_errors():
    with pytest.raises(DomainError):
        gram_matrix(H(1), (1, 0))
    with pytest.raises(DomainError):
        gram_matrix(H(1), weight="laguerre")
    with pytest.raises(NumericalError):
        gram_matrix(H(15), (0, 1), atol=0.0, rtol=0.0, max_level=4)
