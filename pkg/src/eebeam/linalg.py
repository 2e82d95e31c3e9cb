"""Small dense complex-Hermitian kernels: eigendecomposition and PD solves.

Matrices here are at most a few dozen rows (one per transmit antenna), so
everything is delegated to LAPACK via numpy/scipy with validation on top.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import SingularMatrixError, ValidationError

HERMITIAN_ATOL = 1e-12


def check_hermitian(a, atol=HERMITIAN_ATOL):
    """Validate that `a` is a square Hermitian matrix.

    Raises ValidationError naming the first offending entry pair.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    diff = np.abs(a - a.conj().T)
    if diff.max() > atol:
        m, n = np.unravel_index(np.argmax(diff), diff.shape)
        raise ValidationError(
            f"matrix is not Hermitian: entry ({m},{n})={a[m, n]} vs "
            f"conj of ({n},{m})={a[n, m]}"
        )
    return a


def eig_hermitian(a):
    """Eigendecomposition of a Hermitian matrix.

    Returns (values, vectors) with eigenvalues real and ascending and
    eigenvectors as unitary columns, so a = vectors @ diag(values) @ vectors^H.
    """
    a = check_hermitian(a)
    values, vectors = np.linalg.eigh(a)
    return values, vectors


def solve_pd(a, b, validate=True):
    """Solve a x = b for Hermitian positive-definite `a` via Cholesky.

    Raises SingularMatrixError if the factorization hits a non-positive pivot.
    """
    if validate:
        a = check_hermitian(a)
    b = np.asarray(b, dtype=complex)
    try:
        factor = cho_factor(a, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise SingularMatrixError(f"matrix is not positive definite: {exc}") from exc
    return cho_solve(factor, b, check_finite=False)
