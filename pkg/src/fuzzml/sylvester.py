"""Solvers for the Sylvester equation A W + W B = Z.

Three routes with one residual contract:

* :func:`solve_sylvester` is the production path (Schur-based elimination,
  scales to large unknowns).
* :func:`kron_oracle` vectorizes the equation into a dense mn x mn linear
  system and solves it directly. It is quadratic-memory and kept as an
  independent correctness oracle for small problems.
* :func:`least_norm_solve` solves the same dense system by least squares,
  returning the minimum-norm solution when the operator is singular but
  the system is consistent.

Every route either returns a W with relative residual
||A W + W B - Z||_F / ||Z||_F at most RESIDUAL_RTOL or raises
:class:`SingularProblemError`.
"""

import warnings

import numpy as np
import scipy.linalg

__all__ = [
    "SingularProblemError",
    "solve_sylvester",
    "kron_oracle",
    "least_norm_solve",
    "RESIDUAL_RTOL",
    "KRON_GUARD",
]

RESIDUAL_RTOL = 1e-8
# Largest mn for which building the dense mn x mn system is allowed.
KRON_GUARD = 4096
_RCOND_MIN = 1e-12
_TINY = np.finfo(np.float64).tiny


class SingularProblemError(RuntimeError):
    """The Sylvester operator is singular (spectra of A and -B overlap)."""


def _check_shapes(a, b, z):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("B must be square")
    if z.shape != (a.shape[0], b.shape[0]):
        raise ValueError(
            "Z must be %d x %d, got %s" % (a.shape[0], b.shape[0], z.shape)
        )
    return a, b, z


def residual_norm(a, b, z, w) -> float:
    """Relative residual of a candidate solution."""
    num = np.linalg.norm(a @ w + w @ b - z)
    return num / max(np.linalg.norm(z), _TINY)


def solve_sylvester(a, b, z) -> np.ndarray:
    """Solve A W + W B = Z via Schur decompositions of A and B.

    Raises
    ------
    SingularProblemError
        If the solve fails or the residual contract is not met, which
        happens exactly when the spectra of A and -B (nearly) overlap.
    """
    a, b, z = _check_shapes(a, b, z)
    try:
        w = scipy.linalg.solve_sylvester(a, b, z)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularProblemError("singular problem: %s" % exc) from exc
    if not np.all(np.isfinite(w)) or residual_norm(a, b, z, w) > RESIDUAL_RTOL:
        raise SingularProblemError(
            "singular problem: residual exceeds %.1e" % RESIDUAL_RTOL
        )
    return w


def _kron_system(a, b):
    m = a.shape[0]
    n = b.shape[0]
    return np.kron(np.eye(n), a) + np.kron(b.T, np.eye(m))


def kron_oracle(a, b, z) -> np.ndarray:
    """Solve the vectorized system (I (x) A + B^T (x) I) w = vec(Z) directly.

    Vectorization is column-major. Guarded to mn <= KRON_GUARD unknowns;
    a reciprocal condition estimate below 1e-12 raises
    :class:`SingularProblemError`.
    """
    a, b, z = _check_shapes(a, b, z)
    m, n = z.shape
    if m * n > KRON_GUARD:
        raise ValueError("problem too large for the dense oracle (mn > %d)" % KRON_GUARD)
    big = _kron_system(a, b)
    try:
        with warnings.catch_warnings():
            # exact singularity surfaces as a warning here; the rcond check
            # below turns it into the contractual error
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(big)
        rcond, info = scipy.linalg.lapack.dgecon(lu, np.linalg.norm(big, 1), norm="1")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularProblemError("singular problem: %s" % exc) from exc
    if info != 0 or not np.isfinite(rcond) or rcond < _RCOND_MIN:
        raise SingularProblemError(
            "singular problem: reciprocal condition estimate %.2e" % rcond
        )
    w = scipy.linalg.lu_solve((lu, piv), z.flatten(order="F"))
    return w.reshape((m, n), order="F")


def least_norm_solve(a, b, z) -> np.ndarray:
    """Minimum-norm least-squares solution of the vectorized system.

    Intended for structurally singular but consistent problems (for
    example when both A and B share a zero eigenvalue while Z lies in the
    operator's range): rank-deficient directions receive no component
    instead of amplified noise. Inconsistent systems raise
    :class:`SingularProblemError`.
    """
    a, b, z = _check_shapes(a, b, z)
    m, n = z.shape
    if m * n > KRON_GUARD:
        raise ValueError("problem too large for the dense solver (mn > %d)" % KRON_GUARD)
    big = _kron_system(a, b)
    w, _, _, _ = np.linalg.lstsq(big, z.flatten(order="F"), rcond=None)
    w = w.reshape((m, n), order="F")
    if not np.all(np.isfinite(w)) or residual_norm(a, b, z, w) > RESIDUAL_RTOL:
        raise SingularProblemError(
            "singular problem: no consistent solution within %.1e" % RESIDUAL_RTOL
        )
    return w
