"""Polynomial bases: physicists' Hermite and monomial.

Evaluation goes through one three-term recurrence, written so the same code
path serves Python floats, numpy arrays and mpmath numbers. Conversion between
the two families uses exact integer/rational change-of-basis matrices and
rounds each output coefficient once.
"""

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "Family",
    "BasisSpec",
    "CoefficientVector",
    "basis_eval",
    "basis_eval_all",
    "basis_values",
    "evaluate",
    "horner",
    "to_monomial",
    "to_hermite",
    "hermite_to_monomial_matrix",
    "monomial_to_hermite_matrix",
    "gram_matrix",
]

# e^{-144} ~ 3e-63; the tail beyond |x| = 12 is invisible at double precision
GAUSS_CUTOFF = 12.0


class Family(str, enum.Enum):
    HERMITE = "hermite_physicists"
    MONOMIAL = "monomial"


@dataclass(frozen=True)
class BasisSpec:
    """A polynomial family and the highest index used (dimension = degree + 1)."""

    family: Family
    degree: int

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise DomainError(f"unknown basis family {self.family!r}") from None
        object.__setattr__(self, "family", family)
        if isinstance(self.degree, bool) or int(self.degree) != self.degree:
            raise DomainError(f"degree must be an integer, got {self.degree!r}")
        if self.degree < 0:
            raise DomainError(f"degree must be >= 0, got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))

    @property
    def dimension(self):
        return self.degree + 1

    @classmethod
    def hermite(cls, degree):
        return cls(Family.HERMITE, degree)

    @classmethod
    def monomial(cls, degree):
        return cls(Family.MONOMIAL, degree)


@dataclass(frozen=True)
class CoefficientVector:
    """Expansion coefficients b_0..b_n of a polynomial in ``basis``.

    ``exact`` optionally carries the rational values the floats were rounded
    from; basis conversions consume and produce it so that chained
    conversions stay lossless.
    """

    basis: BasisSpec
    coefficients: tuple
    exact: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if self.exact is not None and len(self.exact) != len(coeffs):
            raise DomainError("exact coefficients differ in length")
        if len(coeffs) != self.basis.dimension:
            raise DomainError(
                f"expected {self.basis.dimension} coefficients for degree "
                f"{self.basis.degree}, got {len(coeffs)}"
            )
        if not all(math.isfinite(c) for c in coeffs):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    def __len__(self):
        return len(self.coefficients)

    def __iter__(self):
        return iter(self.coefficients)

    def __getitem__(self, k):
        return self.coefficients[k]

    def __neg__(self):
        exact = None if self.exact is None else tuple(-v for v in self.exact)
        return CoefficientVector(self.basis, [-c for c in self.coefficients], exact)

    def scaled(self, factor):
        return CoefficientVector(self.basis, [factor * c for c in self.coefficients])

    def as_array(self):
        return np.array(self.coefficients, dtype=float)

    def __call__(self, x):
        return evaluate(self, x)


def _recurrence(family, n, x):
    """Return [w_0(x), ..., w_n(x)] for scalar, array or mpmath ``x``."""
    one = x * 0 + 1
    values = [one]
    if n == 0:
        return values
    if family is Family.MONOMIAL:
        for _ in range(n):
            values.append(values[-1] * x)
        return values
    values.append(2 * x)
    for k in range(1, n):
        values.append(2 * x * values[k] - 2 * k * values[k - 1])
    return values


def _check_x(x):
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")


def basis_eval(spec, k, x):
    """Evaluate the k-th basis function of ``spec`` at ``x``.

    >>> basis_eval(BasisSpec.hermite(3), 3, 2.0)
    40.0
    """
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= spec.degree:
        raise DomainError(f"index {k} outside 0..{spec.degree}")
    x = float(x)
    _check_x(x)
    return _recurrence(spec.family, int(k), x)[int(k)]


def basis_eval_all(spec, x):
    """All basis values w_0(x)..w_n(x) from a single recurrence pass."""
    x = float(x)
    _check_x(x)
    return _recurrence(spec.family, spec.degree, x)


def basis_values(spec, x):
    """Vectorised evaluation; returns an array of shape ``x.shape + (n+1,)``."""
    x = np.asarray(x, dtype=float)
    return np.stack(_recurrence(spec.family, spec.degree, x), axis=-1)


def evaluate(cv, x):
    """Evaluate sum_k b_k w_k(x) for a scalar or array ``x``."""
    if np.ndim(x) == 0:
        values = basis_eval_all(cv.basis, x)
        return math.fsum(b * v for b, v in zip(cv.coefficients, values))
    return basis_values(cv.basis, x) @ cv.as_array()


def horner(coefficients, x):
    """Evaluate a monomial-basis polynomial c_0 + c_1 x + ... by Horner's rule."""
    acc = x * 0
    for c in reversed(list(coefficients)):
        acc = acc * x + c
    return acc


# -- change of basis --------------------------------------------------------

@lru_cache(maxsize=None)
def _hermite_monomial_rows(n):
    """Integer monomial coefficients of H_0..H_n; row k holds H_k."""
    rows = [[1]]
    if n >= 1:
        rows.append([0, 2])
    for k in range(1, n):
        nxt = [0] * (k + 2)
        for m, c in enumerate(rows[k]):
            nxt[m + 1] += 2 * c
        for m, c in enumerate(rows[k - 1]):
            nxt[m] -= 2 * k * c
        rows.append(nxt)
    return tuple(tuple(r + [0] * (n + 1 - len(r))) for r in rows)


def _combine_exact(matrix, cv):
    """Exact ``matrix @ cv`` as a tuple of Fractions."""
    exact = cv.exact if cv.exact is not None else [Fraction(c) for c in cv.coefficients]
    return tuple(sum((a * c for a, c in zip(row, exact) if a), Fraction(0)) for row in matrix)


def _unit(n, k):
    v = [0] * (n + 1)
    v[k] = 1
    return v


def hermite_to_monomial_matrix(n):
    """Integer matrix T with monomial = T @ hermite; column k is H_k expanded.

    T is upper triangular because H_k has degree k.
    """
    rows = _hermite_monomial_rows(n)
    return tuple(tuple(rows[k][m] for k in range(n + 1)) for m in range(n + 1))


@lru_cache(maxsize=None)
def monomial_to_hermite_matrix(n):
    """Exact rational inverse of :func:`hermite_to_monomial_matrix`.

    Column k is the image of the k-th unit vector under ``to_monomial``; the
    triangular system is inverted by back substitution in rationals.
    """
    t = hermite_to_monomial_matrix(n)
    cols = [[sum(t[m][j] * e for j, e in enumerate(_unit(n, k))) for m in range(n + 1)]
            for k in range(n + 1)]
    a = [[Fraction(cols[k][m]) for k in range(n + 1)] for m in range(n + 1)]
    inv = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    for j in range(n + 1):
        rhs = _unit(n, j)
        for i in range(n, -1, -1):
            s = rhs[i] - sum(a[i][k] * inv[k][j] for k in range(i + 1, n + 1))
            inv[i][j] = s / a[i][i]
    return tuple(tuple(r) for r in inv)


def to_monomial(cv):
    """Rewrite a Hermite expansion in the monomial basis."""
    if cv.basis.family is not Family.HERMITE:
        raise DomainError("to_monomial expects a Hermite coefficient vector")
    n = cv.basis.degree
    out = _combine_exact(hermite_to_monomial_matrix(n), cv)
    return CoefficientVector(BasisSpec.monomial(n), [float(v) for v in out], out)


def to_hermite(cv):
    """Rewrite a monomial expansion in the Hermite basis.

    >>> to_hermite(CoefficientVector(BasisSpec.monomial(2), [0, 0, 1])).coefficients
    (0.5, 0.0, 0.25)
    """
    if cv.basis.family is not Family.MONOMIAL:
        raise DomainError("to_hermite expects a monomial coefficient vector")
    n = cv.basis.degree
    out = _combine_exact(monomial_to_hermite_matrix(n), cv)
    return CoefficientVector(BasisSpec.hermite(n), [float(v) for v in out], out)


# -- Gram matrices ----------------------------------------------------------

def _simpson(spec, a, b, npanels, weight_fn):
    x = np.linspace(a, b, npanels + 1)
    w = np.ones(npanels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (b - a) / (3.0 * npanels)
    if weight_fn is not None:
        w = w * weight_fn(x)
    v = basis_values(spec, x)
    g = (v * w[:, None]).T @ v
    upper = np.triu(g)
    return upper + np.triu(g, 1).T


def gram_matrix(spec, interval=(0.0, 1.0), weight="unit", atol=1e-10, rtol=1e-13,
                max_level=22):
    """Matrix of inner products  int w_j(x) w_k(x) weight(x) dx.

    Composite Simpson's rule, doubling the panel count until two successive
    estimates agree within ``max(atol, rtol * max|G|)`` entrywise. The
    ``gauss`` weight exp(-x^2) integrates over the whole real line (truncated
    to +-12) and ignores ``interval``.
    """
    if weight == "unit":
        a, b = (float(v) for v in interval)
        if not a < b:
            raise DomainError(f"interval must satisfy a < b, got [{a}, {b}]")
        weight_fn = None
        level = 1
    elif weight == "gauss":
        a, b = -GAUSS_CUTOFF, GAUSS_CUTOFF
        weight_fn = lambda x: np.exp(-x * x)  # noqa: E731
        level = 6
    else:
        raise DomainError(f"unknown weight {weight!r}")

    prev = _simpson(spec, a, b, 2 ** level, weight_fn)
    for level in range(level + 1, max_level + 1):
        cur = _simpson(spec, a, b, 2 ** level, weight_fn)
        scale = np.max(np.abs(cur))
        if np.max(np.abs(cur - prev)) <= max(atol, rtol * scale):
            return cur
        prev = cur
    raise NumericalError(
        f"Gram quadrature did not converge after {2 ** max_level} panels"
    )
