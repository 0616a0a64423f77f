"""Sample moments of the squared-returns series and long-run covariances.

The estimator consumes the sample mean of ``x_t = vech(y_t y_t')`` and its
first three autocovariances.  For delta-method standard errors this module
also estimates the long-run covariance ``Psi`` of the stacked moment
process

    g_t = (x_t, vec(z_t z_t'), vec(z_{t+1} z_t'), vec(z_{t+2} z_t')),

where ``z_t = x_t - mean`` and ``vec`` stacks columns.  The default is a
Bartlett-kernel HAC estimate; a block-diagonal alternative tailored to
spherically distributed innovations is also provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import InsufficientData, InvalidInput
from .linalg import DEFAULT_TOL
from .model import MomentSet

__all__ = [
    "PsiEstimate",
    "sample_moments",
    "sample_autocovariances",
    "default_bandwidth",
    "hac_psi",
    "spherical_cov_h",
    "spherical_psi",
]


@dataclass(frozen=True)
class PsiEstimate:
    """Long-run covariance of the stacked moment process.

    ``psi`` is symmetric positive semidefinite by construction: negative
    eigenvalues left by the kernel sum are clipped at zero and the
    ``clipped`` flag records whether that happened.
    """

    psi: np.ndarray
    bandwidth: int
    method: str
    clipped: bool


def _as_sample(x):
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise InvalidInput(f"x must be an n x dbar matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInput("x contains non-finite entries")
    return a


def sample_moments(x):
    """Mean and first three autocovariances of an ``n x dbar`` sample.

    Lag ``k`` pairs ``(x_{t+k}, x_t)`` are averaged with divisor ``n - k``;
    the mean is the full-sample average and is used to centre every lag.

    Raises
    ------
    InsufficientData
        If fewer than 4 observations are supplied.
    """
    a = _as_sample(x)
    n = a.shape[0]
    if n < 4:
        raise InsufficientData(f"need at least 4 observations, got {n}")
    mean = a.mean(axis=0)
    z = a - mean
    m0 = z.T @ z / n
    m1 = z[1:].T @ z[:-1] / (n - 1)
    m2 = z[2:].T @ z[:-2] / (n - 2)
    return MomentSet(mean=mean, m0=m0, m1=m1, m2=m2)


def sample_autocovariances(x, max_lag):
    """List ``[m0, ..., m_max_lag]`` with divisor ``n - k`` at lag ``k``."""
    a = _as_sample(x)
    n = a.shape[0]
    if max_lag < 0:
        raise InvalidInput(f"max_lag must be >= 0, got {max_lag}")
    if n < max_lag + 2:
        raise InsufficientData(f"need at least {max_lag + 2} observations, got {n}")
    z = a - a.mean(axis=0)
    out = [z.T @ z / n]
    for k in range(1, max_lag + 1):
        out.append(z[k:].T @ z[:-k] / (n - k))
    return out


def default_bandwidth(n):
    """Bartlett-kernel bandwidth ``floor(4 (n/100)^{2/9})``."""
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def _stacked_process(x):
    """Rows ``g_t`` of the stacked moment process, for ``t = 0..n-3``."""
    a = _as_sample(x)
    n, k = a.shape
    if n < 4:
        raise InsufficientData(f"need at least 4 observations, got {n}")
    z = a - a.mean(axis=0)
    blocks = [a[: n - 2]]
    for lag in range(3):
        outer = z[lag : n - 2 + lag, :, None] * z[: n - 2, None, :]
        # vec stacks columns, so transpose the trailing axes before the
        # row-major reshape.
        blocks.append(outer.transpose(0, 2, 1).reshape(n - 2, k * k))
    return np.hstack(blocks)


def _clip_psd(m):
    values, vectors = np.linalg.eigh(linalg.sym(m))
    if values.min() >= 0.0:
        return linalg.sym(m), False
    clipped = vectors @ np.diag(np.clip(values, 0.0, None)) @ vectors.T
    return linalg.sym(clipped), True


def hac_psi(x, bandwidth=None):
    """Bartlett-kernel HAC estimate of the long-run covariance of ``g_t``.

    Parameters
    ----------
    x : ndarray
        The ``n x dbar`` squared-returns sample.
    bandwidth : int, optional
        Number of lags; defaults to ``floor(4 (n/100)^{2/9})``.

    Returns
    -------
    PsiEstimate
        With ``method == "hac-bartlett"``.
    """
    a = _as_sample(x)
    n = a.shape[0]
    if bandwidth is None:
        bandwidth = default_bandwidth(n)
    if bandwidth < 0:
        raise InvalidInput(f"bandwidth must be >= 0, got {bandwidth}")
    if n <= 10 * max(bandwidth, 1):
        raise InsufficientData(
            f"need more than {10 * max(bandwidth, 1)} observations for bandwidth "
            f"{bandwidth}, got {n}"
        )
    g = _stacked_process(a)
    g = g - g.mean(axis=0)
    n_g = g.shape[0]
    psi = g.T @ g / n_g
    for lag in range(1, bandwidth + 1):
        w = 1.0 - lag / (bandwidth + 1.0)
        cov = g[lag:].T @ g[:-lag] / n_g
        psi += w * (cov + cov.T)
    psi, clipped = _clip_psd(psi)
    return PsiEstimate(psi=psi, bandwidth=int(bandwidth), method="hac-bartlett", clipped=clipped)


def spherical_cov_h(ms, phi, tol=DEFAULT_TOL):
    """Closed-form long-run covariance of the sample mean of ``x_t``.

    Valid when the innovation sequence is a martingale difference with
    spherically distributed shocks, in which case the VARMA structure gives

        Cov = m0 + (I - Phi)^{-1} m1 + m1' (I - Phi')^{-1}.
    """
    if not isinstance(ms, MomentSet):
        raise InvalidInput("ms must be a MomentSet")
    p = np.asarray(phi, dtype=float)
    k = ms.dbar
    if p.shape != (k, k):
        raise InvalidInput(f"phi must have shape {(k, k)}, got {p.shape}")
    eye = np.eye(k)
    lead = linalg.solve(eye - p, ms.m1, tol=tol, name="I - Phi")
    return ms.m0 + lead + lead.T


def spherical_psi(x, phi, tol=DEFAULT_TOL):
    """Block-diagonal long-run covariance for spherical innovations.

    The mean block uses :func:`spherical_cov_h`; the autocovariance block
    is the plain (lag-0) sample covariance of the stacked outer-product
    process; the cross block is zero by construction.

    Returns
    -------
    PsiEstimate
        With ``method == "spherical-block"``.
    """
    a = _as_sample(x)
    k = a.shape[1]
    ms = sample_moments(a)
    g = _stacked_process(a)
    g = g - g.mean(axis=0)
    m_block = g[:, k:].T @ g[:, k:] / g.shape[0]
    psi = np.zeros((k + 3 * k * k, k + 3 * k * k))
    psi[:k, :k] = spherical_cov_h(ms, phi, tol=tol)
    psi[k:, k:] = m_block
    psi, clipped = _clip_psd(psi)
    return PsiEstimate(psi=psi, bandwidth=0, method="spherical-block", clipped=clipped)
