"""Dense continuous-time Lyapunov kernel.

Solves ``A X + X A^T + W = 0`` for Hurwitz ``A`` and symmetric ``W``.
The dual equation ``A^T Q + Q A + W = 0`` is obtained by calling
:func:`solve_lyapunov` with the transposed matrix. Controllability and
observability gramians are the two instances used by the H2 objective:
``W = B B^T`` and ``W = C^T C`` respectively.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import StabilityError

# Systems with spectral abscissa above this are rejected: near-marginal
# dynamics produce huge, noise-dominated gramians.
STABILITY_MARGIN = -1e-9


def _as_square(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError(f"{name} contains non-finite entries")
    return mat


def is_hurwitz(A: np.ndarray) -> tuple[bool, float]:
    """Check asymptotic stability of ``A``.

    Returns
    -------
    (stable, abscissa)
        ``stable`` is True iff every eigenvalue has strictly negative real
        part; ``abscissa`` is ``max Re(eig(A))``.
    """
    A = _as_square(A, "A")
    abscissa = float(np.max(np.linalg.eigvals(A).real))
    return abscissa < 0.0, abscissa


def solve_lyapunov(A: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Solve ``A X + X A^T + W = 0`` for symmetric ``W``.

    Uses a Schur-decomposition (Bartels-Stewart) solve; the result is
    explicitly symmetrized. The residual ``||A X + X A^T + W||_F`` stays
    below ``1e-8 * max(1, ||W||_F)`` for the dense, well-damped systems
    this package produces, and ``X`` is positive semidefinite whenever
    ``W`` is.

    Raises
    ------
    StabilityError
        If the spectral abscissa of ``A`` is above the stability margin,
        in which case the equation has no meaningful solution and callers
        must treat the operating point as infeasible.
    ValueError
        On non-square, non-finite, mismatched, or asymmetric inputs.
    """
    A = _as_square(A, "A")
    W = _as_square(W, "W")
    if A.shape != W.shape:
        raise ValueError(f"A and W must have equal shapes, got {A.shape} and {W.shape}")
    if not np.allclose(W, W.T, rtol=1e-10, atol=1e-12 * max(1.0, float(np.abs(W).max()))):
        raise ValueError("W must be symmetric")

    _, abscissa = is_hurwitz(A)
    if abscissa >= STABILITY_MARGIN:
        raise StabilityError(
            f"system matrix is not Hurwitz (spectral abscissa {abscissa:.3e})"
        )

    # scipy solves A X + X A^H = Q, so pass Q = -W.
    X = linalg.solve_continuous_lyapunov(A, -0.5 * (W + W.T))
    return 0.5 * (X + X.T)
