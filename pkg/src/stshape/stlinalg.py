"""
Small complex linear-algebra kernel used by the shaping code.

Only three things are needed: Kronecker products of vectors, the top
eigenpair of a Hermitian matrix, and solves against Hermitian positive
definite (HPD) matrices. Nothing here ever forms an explicit inverse.
"""

import numpy as np
from scipy import linalg as sla

__all__ = ['DimensionError', 'ContractError', 'SingularMatrixError',
           'HERMITIAN_TOL', 'EIG_RESIDUAL_TOL', 'SOLVE_RESIDUAL_TOL',
           'MAX_CONDITION', 'kron', 'is_hermitian', 'hermitian_max_eigpair',
           'hermitian_min_eigpair', 'fix_phase', 'hpd_solve', 'hpd_whiten']

HERMITIAN_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-8
SOLVE_RESIDUAL_TOL = 1e-8
MAX_CONDITION = 1e12
# eigenvalues closer than this (relative to the spectral radius) are
# treated as one eigenspace when picking a canonical eigenvector
_CLUSTER_TOL = 1e-10


class DimensionError(ValueError):
    """Operand shapes do not agree."""


class ContractError(ValueError):
    """An input violates an operation's precondition."""


class SingularMatrixError(np.linalg.LinAlgError):
    """A matrix that must be invertible is numerically singular."""


def _as_finite(x, name):
    arr = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains NaN or Inf")
    return arr


def kron(a, b):
    """
    Kronecker product of two vectors.

    Block ``l`` of the result (length ``len(b)``) equals ``a[l] * b``.
    """
    a = _as_finite(a, 'a').ravel()
    b = _as_finite(b, 'b').ravel()
    if a.size == 0 or b.size == 0:
        raise DimensionError("kron needs non-empty operands")
    return (a[:, None] * b[None, :]).ravel()


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return True
    return np.linalg.norm(a - a.conj().T) <= tol * scale


def fix_phase(v):
    """Rotate ``v`` so its first non-negligible entry is real and positive."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    top = mags.max() if v.size else 0.0
    if top == 0.0:
        return v
    idx = int(np.argmax(mags > 1e-12 * top))
    return v * (np.conj(v[idx]) / mags[idx])


def _canonical_vector(vecs):
    """
    Deterministic unit vector from the column span of ``vecs``.

    Projects the standard basis vectors e_1, e_2, ... onto the subspace and
    takes the first projection with non-negligible norm. The result depends
    only on the subspace, not on which orthonormal basis LAPACK returned.
    """
    if vecs.shape[1] == 1:
        return fix_phase(vecs[:, 0] / np.linalg.norm(vecs[:, 0]))
    for k in range(vecs.shape[0]):
        proj = vecs @ vecs[k].conj()
        nrm = np.linalg.norm(proj)
        if nrm > 1e-6:
            return fix_phase(proj / nrm)
    # unreachable for an orthonormal basis of a non-trivial subspace
    raise ContractError("empty eigenspace")


def _eigpair(a, largest):
    a = _as_finite(a, 'a')
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got {a.shape}")
    if not is_hermitian(a):
        raise ContractError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(a)
    radius = max(abs(vals[0]), abs(vals[-1]), np.finfo(float).tiny)
    if largest:
        lam = vals[-1]
        mask = vals >= lam - _CLUSTER_TOL * radius
    else:
        lam = vals[0]
        mask = vals <= lam + _CLUSTER_TOL * radius
    q = _canonical_vector(vecs[:, mask])
    return float(lam), q


def hermitian_max_eigpair(a):
    """
    Largest eigenvalue of a Hermitian matrix and a unit eigenvector.

    For a repeated top eigenvalue the vector is the normalized projection
    of the first standard basis vector that is not orthogonal to the
    eigenspace, with its first non-zero entry rotated real positive.
    """
    return _eigpair(a, largest=True)


def hermitian_min_eigpair(a):
    """Smallest eigenvalue counterpart of :func:`hermitian_max_eigpair`."""
    return _eigpair(a, largest=False)


def _checked_cholesky(a, name):
    a = _as_finite(a, name)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got {a.shape}")
    if not is_hermitian(a):
        raise ContractError(f"{name} is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    vals = np.linalg.eigvalsh(a)
    if vals[0] <= 0.0 or vals[-1] / vals[0] > MAX_CONDITION:
        cond = np.inf if vals[0] <= 0.0 else vals[-1] / vals[0]
        raise SingularMatrixError(
            f"{name} is numerically singular (condition {cond:.3g})")
    return a, sla.cholesky(a, lower=True)


def hpd_solve(a, b, name='matrix'):
    """Solve ``a x = b`` for Hermitian positive definite ``a`` via Cholesky."""
    a, chol = _checked_cholesky(a, name)
    b = _as_finite(b, 'b')
    if b.shape[0] != a.shape[0]:
        raise DimensionError(
            f"right-hand side has {b.shape[0]} rows, {name} is {a.shape[0]}")
    return sla.cho_solve((chol, True), b)


def hpd_whiten(a, b, name='matrix'):
    """
    Return ``C^{-1} b`` where ``a = C C^H`` is the Cholesky factorization.

    Quadratic forms ``b^H a^{-1} b`` become plain squared norms of the
    result, which is how batched SINR metrics are evaluated.
    """
    a, chol = _checked_cholesky(a, name)
    b = _as_finite(b, 'b')
    if b.shape[0] != a.shape[0]:
        raise DimensionError(
            f"right-hand side has {b.shape[0]} rows, {name} is {a.shape[0]}")
    return sla.solve_triangular(chol, b, lower=True)
