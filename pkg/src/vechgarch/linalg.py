"""Small dense linear-algebra kernel shared by the estimator modules.

Everything here operates on modest matrices (a handful of rows), so plain
LAPACK-backed numpy routines are used throughout.  The half-vectorisation
``vech`` stacks the lower triangle column by column, i.e. for a symmetric
``d x d`` matrix the entry order is ``(0,0), (1,0), ..., (d-1,0), (1,1),
(2,1), ...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import (
    InvalidInput,
    NotPositiveDefinite,
    NumericalFailure,
    SingularLyapunov,
    SingularMatrix,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "EigenDecomposition",
    "vech",
    "unvech",
    "vech_indices",
    "vech_dim",
    "mat_dim",
    "vec",
    "unvec",
    "sym",
    "asymmetry",
    "eig",
    "dlyap",
    "cholesky",
    "solve",
    "rsolve",
    "lstsq",
    "spectral_radius",
    "power_sequence",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Central store for the numerical tolerances used by the package.

    Attributes
    ----------
    symmetry : float
        Relative asymmetry allowed when half-vectorising a matrix.
    eig_residual : float
        Relative residual ``||A v - lambda v||`` allowed per eigenpair.
    lyapunov_rho : float
        The Lyapunov solver requires ``rho(B) < 1 - lyapunov_rho``.
    rcond : float
        Smallest acceptable ratio of extreme singular values before a
        square matrix counts as singular.
    unimodular : float
        Half-width of the exclusion band around the unit circle used when
        splitting companion-matrix eigenvalues.
    realify : float
        Relative imaginary residue allowed when casting a reconstructed
        matrix back to the reals.
    gamma_symmetry : float
        Relative asymmetry of a lag-0 innovation autocovariance above which
        a warning is recorded.
    eigvec_cond : float
        Condition-number cap for eigenvector matrices that get inverted.
    """

    symmetry: float = 1e-12
    eig_residual: float = 1e-10
    lyapunov_rho: float = 1e-10
    rcond: float = 1e-13
    unimodular: float = 1e-8
    realify: float = 1e-8
    gamma_symmetry: float = 1e-10
    eigvec_cond: float = 1e12


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues and unit-norm right eigenvectors (columns), both complex."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_matrix(m, name="matrix"):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise InvalidInput(f"{name} must be two-dimensional, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInput(f"{name} contains non-finite entries")
    return a


def _as_square(m, name="matrix"):
    a = _as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    return a


@lru_cache(maxsize=None)
def vech_indices(d):
    """Row/column index arrays of the lower triangle in vech order."""
    rows = []
    cols = []
    for j in range(d):
        for i in range(j, d):
            rows.append(i)
            cols.append(j)
    return np.asarray(rows), np.asarray(cols)


def vech_dim(d):
    """Length of the half-vectorisation of a ``d x d`` symmetric matrix."""
    if d < 1:
        raise InvalidInput(f"matrix dimension must be >= 1, got {d}")
    return d * (d + 1) // 2


def mat_dim(dbar):
    """Invert ``d*(d+1)/2``; errors if ``dbar`` is not a triangular number."""
    d = int((math.isqrt(8 * int(dbar) + 1) - 1) // 2)
    if d < 1 or d * (d + 1) // 2 != dbar:
        raise InvalidInput(f"{dbar} is not a valid vech length d*(d+1)/2")
    return d


def vech(m, tol=DEFAULT_TOL):
    """Half-vectorise a symmetric matrix (lower triangle, column by column)."""
    a = _as_square(m)
    gap = np.abs(a - a.T).max(initial=0.0)
    if gap > tol.symmetry * (1.0 + np.abs(a).max(initial=0.0)):
        raise InvalidInput(f"matrix is not symmetric (max asymmetry {gap:.3e})")
    rows, cols = vech_indices(a.shape[0])
    return a[rows, cols].copy()


def unvech(v):
    """Rebuild the symmetric matrix whose half-vectorisation is ``v``."""
    x = np.asarray(v, dtype=float)
    if x.ndim != 1:
        raise InvalidInput(f"vech input must be one-dimensional, got shape {x.shape}")
    d = mat_dim(x.shape[0])
    rows, cols = vech_indices(d)
    out = np.zeros((d, d))
    out[rows, cols] = x
    out[cols, rows] = x
    return out


def vec(m):
    """Stack the columns of a matrix into one vector."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, n_rows, n_cols):
    """Inverse of :func:`vec` for an ``n_rows x n_cols`` matrix."""
    return np.asarray(v).reshape((n_rows, n_cols), order="F")


def sym(m):
    """Symmetric part ``(M + M') / 2``."""
    a = np.asarray(m)
    return 0.5 * (a + a.T)


def asymmetry(m):
    """Relative Frobenius asymmetry ``||M - M'|| / (1 + ||M||)``."""
    a = np.asarray(m, dtype=float)
    return float(np.linalg.norm(a - a.T) / (1.0 + np.linalg.norm(a)))


def eig(m):
    """Full complex eigendecomposition with unit-norm eigenvectors.

    Thin wrapper around LAPACK ``geev`` that maps a convergence failure to
    :class:`~vechgarch.exceptions.NumericalFailure` and normalises the
    output container.
    """
    a = _as_square(m)
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    return EigenDecomposition(values, vectors)


def spectral_radius(m):
    """Largest eigenvalue modulus of a square matrix."""
    a = _as_square(m)
    return float(np.abs(np.linalg.eigvals(a)).max())


def dlyap(b, q, tol=DEFAULT_TOL):
    """Solve the discrete Lyapunov equation ``X - B X B' = Q``.

    The equation is vectorised to ``(I - kron(B, B)) vec(X) = vec(Q)`` and
    solved directly, which is exact (up to rounding) and perfectly adequate
    at the matrix sizes this package works with.  Requires
    ``rho(B) < 1 - tol.lyapunov_rho`` so the operator is invertible with a
    margin.  A symmetric ``Q`` yields a symmetrised ``X``.
    """
    bm = _as_square(b, "B")
    qm = _as_square(q, "Q")
    if bm.shape != qm.shape:
        raise InvalidInput(f"B and Q must have equal shapes, got {bm.shape} and {qm.shape}")
    rho = spectral_radius(bm)
    if rho >= 1.0 - tol.lyapunov_rho:
        raise SingularLyapunov(
            f"spectral radius {rho:.6g} >= {1.0 - tol.lyapunov_rho:.6g}; "
            "the Lyapunov operator is singular or nearly so"
        )
    n = bm.shape[0]
    op = np.eye(n * n) - np.kron(bm, bm)
    x = unvec(np.linalg.solve(op, vec(qm)), n, n)
    if asymmetry(qm) <= tol.symmetry:
        x = sym(x)
    return x


def cholesky(m, tol=DEFAULT_TOL):
    """Lower Cholesky factor of a symmetric positive definite matrix."""
    a = _as_square(m)
    gap = np.abs(a - a.T).max(initial=0.0)
    if gap > tol.symmetry * (1.0 + np.abs(a).max(initial=0.0)):
        raise InvalidInput(f"matrix is not symmetric (max asymmetry {gap:.3e})")
    try:
        return np.linalg.cholesky(sym(a))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc


def _check_invertible(a, name, tol):
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= tol.rcond * s[0]:
        raise SingularMatrix(
            f"{name} is singular to working precision "
            f"(smallest/largest singular value ratio {0.0 if s[0] == 0 else s[-1] / s[0]:.3e})"
        )


def solve(a, b, tol=DEFAULT_TOL, name="matrix"):
    """Solve ``A X = B`` for square ``A`` with an explicit singularity check."""
    am = _as_square(a, name)
    bm = np.asarray(b, dtype=float)
    if not np.isfinite(bm).all():
        raise InvalidInput("right-hand side contains non-finite entries")
    _check_invertible(am, name, tol)
    return np.linalg.solve(am, bm)


def rsolve(b, a, tol=DEFAULT_TOL, name="matrix"):
    """Solve ``X A = B`` for square ``A`` (right division ``B A^{-1}``)."""
    am = _as_square(a, name)
    bm = np.asarray(b, dtype=float)
    _check_invertible(am, name, tol)
    return np.linalg.solve(am.T, bm.T).T


def lstsq(a, b, tol=DEFAULT_TOL):
    """Minimise ``||X A - B||_F`` over ``X``.

    ``A`` is ``q x r`` and ``B`` is ``p x r``; the solution is ``p x q``.
    Rank deficiency of ``A`` (non-unique minimiser) raises
    :class:`~vechgarch.exceptions.SingularMatrix`.
    """
    am = _as_matrix(a, "A")
    bm = _as_matrix(b, "B")
    if am.shape[1] != bm.shape[1]:
        raise InvalidInput(
            f"A and B must have the same number of columns, got {am.shape} and {bm.shape}"
        )
    xt, _, rank, _ = np.linalg.lstsq(am.T, bm.T, rcond=None)
    if rank < am.shape[0]:
        raise SingularMatrix(
            f"least-squares design has rank {rank} < {am.shape[0]}; minimiser is not unique"
        )
    return xt.T


def power_sequence(m, k_max):
    """Return ``[I, M, M^2, ..., M^k_max]``, accumulated incrementally."""
    a = _as_square(m)
    powers = [np.eye(a.shape[0])]
    for _ in range(k_max):
        powers.append(powers[-1] @ a)
    return powers
