"""Collocation fits of year-indexed series in a polynomial basis.

Years are mapped affinely onto [0, 1] and the expansion coefficients solve
the square system  sum_k b_k w_k(x_j) = f(x_j).  For 16 uniform nodes the
Hermite collocation matrix has a 1-norm condition number near 5e23, so
float64 coefficients cannot reproduce the data: rounding the *exact*
coefficients to double alone leaves relative residuals around 1e-4. The
default solver therefore runs in an mpmath context whose precision is chosen
from the condition number, keeps those coefficients for reconstruction, and
exposes float64 copies for downstream similarity work. ``precision=None``
selects the plain LAPACK route for comparison.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .basis import BasisSpec, CoefficientVector, Family, _recurrence, basis_values
from .errors import DomainError, NumericalError, TaucovError

__all__ = [
    "DomainMap",
    "FitResult",
    "Reconstruction",
    "collocation_matrix",
    "fit_series",
    "fit_values",
    "fit_all",
    "reconstruct",
    "RESIDUAL_TOL",
]

RESIDUAL_TOL = 1e-6
_MIN_DIGITS = 50
_GUARD_DIGITS = 25


@dataclass(frozen=True)
class DomainMap:
    """Affine map year -> (year - year_min) / (year_max - year_min)."""

    year_min: int
    year_max: int

    def __post_init__(self):
        if not self.year_max > self.year_min:
            raise DomainError(f"year_max ({self.year_max}) must exceed year_min ({self.year_min})")

    @classmethod
    def from_series(cls, series):
        return cls(series.years[0], series.years[-1])

    @property
    def span(self):
        return self.year_max - self.year_min

    def to_unit(self, year):
        return (year - self.year_min) / self.span

    def to_year(self, x):
        return self.year_min + x * self.span

    def exact(self, year):
        return (Fraction(year) - self.year_min) / self.span


@dataclass(frozen=True)
class FitResult:
    coefficients: CoefficientVector
    residual_max_rel: float
    condition_estimate: float
    refined: bool
    label: str = None
    precision: int = None
    least_squares: bool = False
    float_residual_max_rel: float = None
    exact_coefficients: tuple = field(default=None, repr=False, compare=False)

    @property
    def basis(self):
        return self.coefficients.basis


class Reconstruction(float):
    """A reconstructed value; ``x`` is the unit-interval point and
    ``extrapolated`` is set when it falls outside [0, 1]."""

    def __new__(cls, value, x, extrapolated):
        obj = super().__new__(cls, value)
        obj.x = x
        obj.extrapolated = extrapolated
        return obj

    @property
    def value(self):
        return float(self)


def collocation_matrix(spec, nodes):
    """Matrix with entry (j, k) = w_k(nodes[j])."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1:
        raise DomainError("nodes must be a flat sequence")
    if len(nodes) != spec.dimension:
        raise DomainError(f"need {spec.dimension} nodes for degree {spec.degree}, got {len(nodes)}")
    _check_distinct(nodes)
    return basis_values(spec, nodes)


def _check_distinct(nodes):
    seen = set()
    for j, x in enumerate(nodes):
        if x in seen:
            raise DomainError(f"duplicate collocation node {x} at position {j}")
        seen.add(x)


# -- high-precision dense solver -------------------------------------------

def _lu_factor(ctx, a):
    """Doolittle LU with partial (row) pivoting, in place on a copy of ``a``."""
    n = len(a)
    lu = [row[:] for row in a]
    perm = list(range(n))
    amax = max(abs(v) for row in a for v in row)
    tiny = n * amax * ctx.eps
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(lu[i][k]))
        if abs(lu[p][k]) <= tiny:
            return lu, perm, k
        if p != k:
            lu[k], lu[p] = lu[p], lu[k]
            perm[k], perm[p] = perm[p], perm[k]
        pivot = lu[k][k]
        for i in range(k + 1, n):
            m = lu[i][k] / pivot
            lu[i][k] = m
            if m:
                row_i, row_k = lu[i], lu[k]
                for j in range(k + 1, n):
                    row_i[j] -= m * row_k[j]
    return lu, perm, None


def _lu_solve(lu, perm, b):
    n = len(lu)
    y = [b[p] for p in perm]
    for i in range(n):
        row = lu[i]
        s = y[i]
        for j in range(i):
            s -= row[j] * y[j]
        y[i] = s
    for i in range(n - 1, -1, -1):
        row = lu[i]
        s = y[i]
        for j in range(i + 1, n):
            s -= row[j] * y[j]
        y[i] = s / row[i]
    return y


def _matvec(a, x):
    return [sum((aij * xj for aij, xj in zip(row, x))) for row in a]


def _norm1(ctx, cols):
    return max(ctx.fsum(abs(v) for v in col) for col in cols)


def _cond1(ctx, a, lu, perm):
    n = len(a)
    inv_cols = []
    for k in range(n):
        e = [ctx.zero] * n
        e[k] = ctx.one
        inv_cols.append(_lu_solve(lu, perm, e))
    a_cols = [[a[i][k] for i in range(n)] for k in range(n)]
    return _norm1(ctx, a_cols) * _norm1(ctx, inv_cols)


def _mp(ctx, v):
    if isinstance(v, Fraction):
        return ctx.mpf(v.numerator) / v.denominator
    return ctx.mpf(v)


def _hp_matrix(ctx, spec, nodes):
    return [_recurrence(spec.family, spec.degree, _mp(ctx, x)) for x in nodes]


@lru_cache(maxsize=64)
def _square_factorization(spec, nodes, digits):
    """LU factors and 1-norm condition number; depends only on the grid."""
    ctx = mpmath.MPContext()
    ctx.dps = digits
    a = _hp_matrix(ctx, spec, nodes)
    lu, perm, bad = _lu_factor(ctx, a)
    if bad is not None:
        raise NumericalError(f"collocation matrix is numerically singular (pivot {bad})",
                             condition_estimate=math.inf)
    return ctx, a, lu, perm, _cond1(ctx, a, lu, perm)


def _solve_square_hp(spec, nodes, values, digits):
    ctx, a, lu, perm, cond = _square_factorization(spec, tuple(nodes), digits)
    f = [_mp(ctx, v) for v in values]
    b = _lu_solve(lu, perm, f)
    r = [fi - ai for fi, ai in zip(f, _matvec(a, b))]
    delta = _lu_solve(lu, perm, r)
    b = [bi + di for bi, di in zip(b, delta)]
    return ctx, a, f, b, cond


def _solve_lstsq_hp(spec, nodes, values, digits):
    ctx = mpmath.MPContext()
    ctx.dps = digits
    a = _hp_matrix(ctx, spec, nodes)
    f = [_mp(ctx, v) for v in values]
    sv = ctx.svd_r(ctx.matrix(a), compute_uv=False)
    smin = min(sv)
    if smin == 0:
        raise NumericalError("least-squares system is rank deficient", condition_estimate=math.inf)
    cond = max(sv) / smin
    x, _ = ctx.qr_solve(ctx.matrix(a), ctx.matrix(f))
    b = [x[k] for k in range(spec.dimension)]
    return ctx, a, f, b, cond


def _residual(ctx, a, f, b):
    scale = max(1, max(abs(v) for v in f))
    return float(max(abs(fi - ai) for fi, ai in zip(f, _matvec(a, b))) / scale)


def _fit_hp(spec, nodes, values, precision, least_squares):
    solve = _solve_lstsq_hp if least_squares else _solve_square_hp
    digits = _MIN_DIGITS if precision == "auto" else int(precision)
    ctx, a, f, b, cond = solve(spec, nodes, values, digits)
    if precision == "auto":
        needed = int(ctx.ceil(ctx.log10(cond))) + _GUARD_DIGITS
        if needed > digits:
            digits = needed
            ctx, a, f, b, cond = solve(spec, nodes, values, digits)
    residual = _residual(ctx, a, f, b)
    rounded = [ctx.mpf(float(v)) for v in b]
    float_residual = _residual(ctx, a, f, rounded)
    return FitResult(
        coefficients=CoefficientVector(spec, [float(v) for v in b]),
        residual_max_rel=residual,
        condition_estimate=max(1.0, float(cond)),
        refined=not least_squares,
        precision=digits,
        least_squares=least_squares,
        float_residual_max_rel=float_residual,
        exact_coefficients=tuple(b),
    )


def _fit_float(spec, nodes, values, least_squares):
    a = basis_values(spec, np.array([float(x) for x in nodes]))
    f = np.asarray(values, dtype=float)
    if least_squares:
        b, *_ = scipy.linalg.lstsq(a, f)
        cond = float(np.linalg.cond(a))
        refined = False
    else:
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
        rcond, _ = lapack.dgecon(lu, np.linalg.norm(a, 1), norm="1")
        cond = math.inf if rcond == 0 else 1.0 / rcond
        if np.any(np.abs(np.diag(lu)) <= len(f) * np.finfo(float).eps * np.max(np.abs(a))):
            raise NumericalError("collocation matrix is numerically singular", cond)
        b = scipy.linalg.lu_solve((lu, piv), f)
        b = b + scipy.linalg.lu_solve((lu, piv), f - a @ b)
        refined = True
    residual = float(np.max(np.abs(a @ b - f)) / max(1.0, np.max(np.abs(f))))
    return FitResult(
        coefficients=CoefficientVector(spec, b),
        residual_max_rel=residual,
        condition_estimate=max(1.0, cond),
        refined=refined,
        least_squares=least_squares,
        float_residual_max_rel=residual,
    )


def fit_values(spec, nodes, values, precision="auto", least_squares=False, label=None):
    """Fit ``values`` observed at unit-interval ``nodes``.

    Nodes and values may be floats or Fractions; Fraction values are used
    exactly, which matters because the square Hermite system amplifies a
    one-ulp change in the data by up to its condition number. ``precision``
    is "auto", a number of decimal digits, or None for float64.
    """
    nodes = [Fraction(x) for x in nodes]
    values = [v if isinstance(v, Fraction) else float(v) for v in values]
    if len(nodes) != len(values):
        raise DomainError("nodes and values differ in length")
    if not all(math.isfinite(v) for v in values):
        raise DomainError("values must be finite")
    _check_distinct(nodes)
    n = spec.dimension
    if least_squares:
        if len(nodes) < n:
            raise DomainError(f"least squares needs at least {n} points, got {len(nodes)}")
    elif len(nodes) != n:
        raise DomainError(
            f"interpolation needs exactly {n} points for degree {spec.degree}, got "
            f"{len(nodes)}; lower the point count or use least squares"
        )
    if precision is None:
        result = _fit_float(spec, nodes, values, least_squares)
    else:
        result = _fit_hp(spec, nodes, values, precision, least_squares)
    if label is not None:
        result = _with_label(result, label)
    return result


def _with_label(result, label):
    return FitResult(**{**result.__dict__, "label": label})


def fit_series(series, spec=None, domain=None, precision="auto", least_squares=False):
    """Expansion coefficients of ``series`` in ``spec`` (default: Hermite, points - 1)."""
    if spec is None:
        spec = BasisSpec(Family.HERMITE, len(series) - 1)
    if domain is None:
        domain = DomainMap.from_series(series)
    for y in series.years:
        if not domain.year_min <= y <= domain.year_max:
            raise DomainError(f"{series.label!r}: year {y} outside "
                              f"[{domain.year_min}, {domain.year_max}]")
    nodes = [domain.exact(y) for y in series.years]
    return fit_values(spec, nodes, series.values, precision, least_squares, label=series.label)


def fit_all(dataset, spec=None, domain=None, precision="auto", least_squares=False):
    """Fit every series of ``dataset``; all must share one year grid."""
    dataset = list(dataset)
    if not dataset:
        return []
    years = dataset[0].years
    for s in dataset[1:]:
        if s.years != years:
            raise DomainError(f"{s.label!r}: year grid differs from {dataset[0].label!r}")
    if domain is None:
        domain = DomainMap.from_series(dataset[0])
    results = []
    for s in dataset:
        try:
            results.append(fit_series(s, spec, domain, precision, least_squares))
        except TaucovError as exc:
            if s.label in str(exc):
                raise
            raise type(exc)(f"{s.label!r}: {exc}") from exc
    return results


def reconstruct(fr, domain, year_or_x, mode="year"):
    """Evaluate the fitted expansion at a year or at a unit-interval point."""
    if mode == "year":
        x = Fraction(year_or_x) if isinstance(year_or_x, int) else Fraction(float(year_or_x))
        x = (x - domain.year_min) / domain.span
    elif mode == "unit_interval":
        x = Fraction(float(year_or_x))
    else:
        raise DomainError(f"unknown mode {mode!r}")
    spec = fr.coefficients.basis
    if fr.exact_coefficients is not None:
        ctx = mpmath.MPContext()
        ctx.dps = fr.precision
        xm = ctx.mpf(x.numerator) / x.denominator
        vals = _recurrence(spec.family, spec.degree, xm)
        value = float(ctx.fsum(b * v for b, v in zip(fr.exact_coefficients, vals)))
    else:
        vals = _recurrence(spec.family, spec.degree, float(x))
        value = math.fsum(b * v for b, v in zip(fr.coefficients, vals))
    return Reconstruction(value, float(x), not 0 <= x <= 1)
