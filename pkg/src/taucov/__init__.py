"""Hermite collocation fits and tau-covariance similarity for indicator series."""

__version__ = "0.1.0"

from .basis import (BasisSpec, CoefficientVector, Family, basis_eval, basis_eval_all,
                    gram_matrix, to_hermite, to_monomial)
from .dataio import ReferenceMatrix, TimeSeries, load_fixture, parse_wide_csv, write_wide_csv
from .errors import DataError, DomainError, NumericalError, TaucovError
from .fit import DomainMap, FitResult, collocation_matrix, fit_all, fit_series, reconstruct
from .similarity import Method, SimilarityMatrix, dot, pearson, similarity_matrix, tau_covariance
