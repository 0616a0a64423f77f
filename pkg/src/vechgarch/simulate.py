"""Path simulation for the vech-GARCH(1,1) recursion.

Draws use ``numpy.random.Generator`` seeded with the counter-based Philox
bit generator, whose stream is documented and stable across numpy
releases, so a given seed reproduces the same path everywhere.  The noise
block is drawn up front as ``standard_normal((burn_in + n, d))`` and
consumed row by row; that draw order is part of the reproducibility
contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import InvalidInput, NonStationary, PositivityViolation
from .linalg import DEFAULT_TOL

__all__ = ["SimulationResult", "simulate", "to_x", "write_returns_csv", "read_returns_csv"]


@dataclass(frozen=True)
class SimulationResult:
    """A simulated sample path.

    ``y`` holds the ``n x d`` returns and ``h_path`` the matching
    ``n x dbar`` half-vectorised conditional covariances (the variance that
    generated each row of ``y``).
    """

    y: np.ndarray
    h_path: np.ndarray
    seed: int
    burn_in: int


def simulate(spec, n, seed, burn_in=1000, tol=DEFAULT_TOL):
    """Simulate ``n`` observations from a stationary spec.

    Parameters
    ----------
    spec : GarchSpec
        Must be stationary; the recursion starts at the unconditional
        covariance and runs ``burn_in`` warm-up steps that are discarded.
    n : int
        Number of retained observations.
    seed : int
        Seed for the Philox bit generator.
    burn_in : int, optional
        Warm-up length, 1000 by default.

    Returns
    -------
    SimulationResult

    Raises
    ------
    PositivityViolation
        If some conditional covariance fails to be positive definite; the
        exception carries the zero-based recursion step (burn-in included).
    """
    if n < 1:
        raise InvalidInput(f"n must be positive, got {n}")
    if burn_in < 0:
        raise InvalidInput(f"burn_in must be >= 0, got {burn_in}")
    rho = linalg.spectral_radius(spec.phi)
    if rho >= 1.0:
        raise NonStationary(f"spectral radius of A + B is {rho:.6g} >= 1")
    from .model import uncond_h  # local import to avoid a cycle at import time

    h0 = uncond_h(spec, tol=tol)
    total = burn_in + n
    rng = np.random.Generator(np.random.Philox(seed))
    eps = rng.standard_normal((total, spec.d))
    if spec.d == 1:
        y, h_path = _recursion_scalar(spec, h0, eps)
    else:
        y, h_path = _recursion(spec, h0, eps)
    return SimulationResult(y=y[burn_in:], h_path=h_path[burn_in:], seed=seed, burn_in=burn_in)


def _recursion_scalar(spec, h0, eps):
    # Plain-float loop: identical arithmetic to the generic path but far
    # cheaper, which matters for Monte Carlo runs with n ~ 1e5.
    c = float(spec.c[0])
    a = float(spec.A[0, 0])
    b = float(spec.B[0, 0])
    h = float(h0[0])
    ys = []
    hs = []
    for t, e in enumerate(eps[:, 0].tolist()):
        if not h > 0.0:
            raise PositivityViolation(
                f"conditional variance {h:.6g} is not positive at step {t}", step=t
            )
        yv = math.sqrt(h) * e
        ys.append(yv)
        hs.append(h)
        h = c + a * (yv * yv) + b * h
    return np.asarray(ys).reshape(-1, 1), np.asarray(hs).reshape(-1, 1)


def _recursion(spec, h0, eps):
    d = spec.d
    rows, cols = linalg.vech_indices(d)
    c, a, b = spec.c, spec.A, spec.B
    h = h0.copy()
    total = eps.shape[0]
    y = np.empty((total, d))
    h_path = np.empty((total, h0.shape[0]))
    hfull = np.empty((d, d))
    for t in range(total):
        hfull[rows, cols] = h
        hfull[cols, rows] = h
        try:
            chol = np.linalg.cholesky(hfull)
        except np.linalg.LinAlgError:
            raise PositivityViolation(
                f"conditional covariance is not positive definite at step {t}", step=t
            ) from None
        yt = chol @ eps[t]
        y[t] = yt
        h_path[t] = h
        x = yt[rows] * yt[cols]
        h = c + a @ x + b @ h
    return y, h_path


def to_x(y):
    """Map returns to half-vectorised outer products ``x_t = vech(y_t y_t')``."""
    a = np.asarray(y, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InvalidInput(f"y must be an n x d matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInput("y contains non-finite entries")
    rows, cols = linalg.vech_indices(a.shape[1])
    return a[:, rows] * a[:, cols]


def write_returns_csv(y, path):
    """Write returns to CSV with header ``y1,...,yd`` at full precision."""
    a = np.asarray(y, dtype=float)
    if a.ndim != 2:
        raise InvalidInput(f"y must be an n x d matrix, got shape {a.shape}")
    header = ",".join(f"y{i + 1}" for i in range(a.shape[1]))
    np.savetxt(path, a, fmt="%.17g", delimiter=",", header=header, comments="")


def read_returns_csv(path):
    """Read a returns CSV written by :func:`write_returns_csv`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        names = header.split(",") if header else []
        expected = [f"y{i + 1}" for i in range(len(names))]
        if not names or names != expected:
            raise InvalidInput(f"CSV header must be y1,...,yd, got {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise InvalidInput("CSV contains no data rows")
    if data.shape[1] != len(names):
        raise InvalidInput(
            f"CSV rows have {data.shape[1]} columns but header names {len(names)}"
        )
    return data
