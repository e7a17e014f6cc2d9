"""Tau-covariance and Pearson similarity between series.

Tau-covariance is the cosine of the angle between two coefficient vectors in
the same polynomial basis. Pearson is the usual product-moment correlation of
the raw observations, computed with the two-pass (mean-centred) formula.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .fit import fit_all

__all__ = [
    "Method",
    "SimilarityMatrix",
    "dot",
    "tau_covariance",
    "pearson",
    "similarity_matrix",
]

# largest |value| - 1 that is attributed to round-off and clamped
CLAMP_SLACK = 1e-12


class Method(str, enum.Enum):
    TAU = "tau_covariance"
    PEARSON = "pearson"


@dataclass(frozen=True)
class SimilarityMatrix:
    labels: tuple
    method: Method
    entries: np.ndarray
    k0_included: bool = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.labels)

    def get(self, a, b):
        from .dataio import resolve_label
        i = self.labels.index(resolve_label(a, self.labels))
        j = self.labels.index(resolve_label(b, self.labels))
        return float(self.entries[i, j])

    def pairs(self):
        """Yield (label_i, label_j, value) for every unordered pair i < j."""
        n = len(self.labels)
        for i in range(n):
            for j in range(i + 1, n):
                yield self.labels[i], self.labels[j], float(self.entries[i, j])


def _active(cv, k0_included):
    return cv.coefficients if k0_included else cv.coefficients[1:]


def _check_pair(a, b):
    if a.basis != b.basis:
        raise DomainError(f"basis mismatch: {a.basis} vs {b.basis}")


def dot(a, b, k0_included=True):
    """Euclidean scalar product of two coefficient vectors (correctly rounded)."""
    _check_pair(a, b)
    return math.fsum(x * y for x, y in zip(_active(a, k0_included), _active(b, k0_included)))


def _pow2_normalise(values):
    """Scale by a power of two so max |v| lies in [0.5, 1); exact in binary."""
    m = max((abs(v) for v in values), default=0.0)
    if m == 0.0:
        return None
    shift = math.frexp(m)[1]
    return [math.ldexp(v, -shift) for v in values]


def _clamp(value, what):
    if abs(value) <= 1.0:
        return value
    if abs(value) - 1.0 < CLAMP_SLACK:
        return math.copysign(1.0, value)
    raise NumericalError(f"{what} = {value!r} lies outside [-1, 1]")


def _cosine(u, v):
    nu = math.sqrt(math.fsum(x * x for x in u))
    nv = math.sqrt(math.fsum(y * y for y in v))
    return math.fsum(x * y for x, y in zip(u, v)) / (nu * nv)


def tau_covariance(a, b, k0_included=True):
    """Cosine of the angle between coefficient vectors ``a`` and ``b``.

    With ``k0_included=False`` the constant-term coefficient b_0 is left out
    of all three sums.
    """
    _check_pair(a, b)
    u = _pow2_normalise(_active(a, k0_included))
    v = _pow2_normalise(_active(b, k0_included))
    if u is None or v is None:
        raise DomainError("undefined angle: zero coefficient vector in the active range")
    return _clamp(_cosine(u, v), "tau-covariance")


def pearson(x, y):
    """Sample Pearson correlation, two-pass mean-centred formula."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise DomainError(f"length mismatch: {np.shape(x)} vs {np.shape(y)}")
    if len(x) < 2:
        raise DomainError("pearson needs at least two observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("pearson inputs must be finite")
    dx = x - math.fsum(x) / len(x)
    dy = y - math.fsum(y) / len(y)
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    if sxx == 0.0 or syy == 0.0:
        raise DomainError("pearson undefined for a zero-variance series")
    denom = sxx * syy
    # sqrt of the product makes pearson(x, x) exactly 1; split it on over/underflow
    denom = math.sqrt(denom) if 0.0 < denom < math.inf else math.sqrt(sxx) * math.sqrt(syy)
    r = math.fsum(dx * dy) / denom
    return _clamp(r, "pearson")


def _pairwise(labels, items, fn, method, k0_included):
    n = len(items)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = fn(items[i], items[j])
    return SimilarityMatrix(labels, method, out, k0_included)


def similarity_matrix(dataset, method=Method.TAU, spec=None, domain=None, k0_included=True,
                      fits=None, precision="auto"):
    """Labelled pairwise matrix over ``dataset``; the diagonal is exactly 1.

    For tau each series is fitted once (pass ``fits`` to reuse earlier
    results). Pearson works on the raw observations.
    """
    dataset = list(dataset)
    method = Method(method)
    if len(dataset) < 2:
        raise DomainError("a similarity matrix needs at least two series")
    years = dataset[0].years
    for s in dataset[1:]:
        if s.years != years:
            raise DomainError(f"{s.label!r}: year grid differs from {dataset[0].label!r}")
    labels = [s.label for s in dataset]
    if method is Method.PEARSON:
        return _pairwise(labels, [s.values for s in dataset], pearson, method, None)
    if fits is None:
        fits = fit_all(dataset, spec, domain, precision)
    vectors = [f.coefficients for f in fits]
    return _pairwise(labels, vectors, lambda a, b: tau_covariance(a, b, k0_included),
                     method, k0_included)
