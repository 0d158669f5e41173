"""Hermitian positive-definite matrix helpers.

Matrices are plain complex ``numpy`` arrays of shape ``(p, p)``; most
functions also accept stacks of shape ``(n, p, p)`` and broadcast over the
leading axis.  Arrays returned by :func:`hermitian` are read-only.
"""

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, ValidationError

HERMITIAN_RTOL = 1e-9
PIVOT_RTOL = 1e-14


def hermitian(a, rtol=HERMITIAN_RTOL):
    """Validate and symmetrize a (stack of) Hermitian matrices.

    Stores ``(a + a^H) / 2`` with the diagonal imaginary parts set to zero, so
    rounding noise in input files is absorbed.

    Raises
    ------
    ValidationError
        If the array is not square, holds non-finite entries, or departs from
        Hermitian symmetry by more than ``rtol`` relative to its largest
        entry.
    """
    m = np.array(a, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] == 0:
        raise ValidationError(f"expected square matrices, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix entries must be finite")
    mh = np.swapaxes(m, -1, -2).conj()
    scale = np.max(np.abs(m), axis=(-2, -1), keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    if np.any(np.abs(m - mh) > rtol * scale):
        raise ValidationError("matrix is not Hermitian within tolerance")
    out = (m + mh) / 2
    idx = np.arange(m.shape[-1])
    out[..., idx, idx] = out[..., idx, idx].real
    out.setflags(write=False)
    return out


def identity(p):
    return hermitian(np.eye(p))


def diag(*values):
    return hermitian(np.diag(np.asarray(values, dtype=float)))


def cholesky(m):
    """Lower-triangular factor ``F`` with ``F @ F^H == m``.

    A pivot (squared diagonal entry of ``F``) at or below ``1e-14`` times the
    largest diagonal entry of ``m`` is treated as a failure, which keeps the
    check meaningful for covariances of any magnitude.
    """
    m = np.asarray(m, dtype=complex)
    try:
        f = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    pivots = np.diagonal(f, axis1=-2, axis2=-1).real ** 2
    largest = np.max(np.diagonal(m, axis1=-2, axis2=-1).real, axis=-1, keepdims=True)
    if not np.all(np.isfinite(pivots)) or np.any(pivots <= PIVOT_RTOL * largest):
        raise NotPositiveDefinite("matrix is not positive definite (pivot below tolerance)")
    return f


def log_det(m):
    """Natural log of the determinant, ``2 * sum(log(diag(cholesky(m))))``.

    Returns a float for a single matrix and an array for a stack.
    """
    f = cholesky(m)
    out = 2.0 * np.sum(np.log(np.diagonal(f, axis1=-2, axis2=-1).real), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def inverse(m):
    f = cholesky(m)
    p = f.shape[-1]
    finv = np.linalg.solve(f, np.broadcast_to(np.eye(p), f.shape))
    inv = np.swapaxes(finv, -1, -2).conj() @ finv
    return hermitian(inv, rtol=1e-6)


def trace_of_product(a, b):
    """Real part of ``tr(a @ b)``; the imaginary residue must be negligible."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != b.shape[-2:] or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} do not match")
    t = np.einsum("...ij,...ji->...", a, b)
    mag = np.einsum("...ij,...ji->...", np.abs(a), np.abs(b))
    if np.any(np.abs(t.imag) > 1e-9 * np.maximum(mag, 1e-300)):
        raise ValidationError("trace of product has a non-negligible imaginary part")
    out = t.real
    return float(out) if np.ndim(out) == 0 else out


def kronecker(a, b):
    return hermitian(np.kron(np.asarray(a), np.asarray(b)))


def check_same_dim(a, b):
    if np.shape(a)[-1] != np.shape(b)[-1]:
        raise DimensionMismatch(f"dimension {np.shape(a)[-1]} != {np.shape(b)[-1]}")
