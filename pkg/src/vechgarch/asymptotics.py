"""Delta-method asymptotics for the closed-form estimator.

The estimator is a smooth map from the moment vector
``m = (mean, vec m0, vec m1, vec m2)`` to the parameter vector
``lambda = (c, vec A, vec B)``.  This module differentiates that map in
closed form, chains it with a long-run covariance ``Psi`` of the sample
moments, and reports ``Xi = J Psi J'`` together with the implied standard
errors ``sqrt(diag(Xi) / n)``.  ``vec`` stacks columns throughout, and the
parameter order within ``lambda`` follows the same convention.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from . import linalg
from .exceptions import InvalidInput
from .linalg import DEFAULT_TOL
from .model import MomentSet
from .moments import PsiEstimate, hac_psi, sample_moments, spherical_psi
from .solver import gammas, recover_sigma, solve_b

__all__ = [
    "JacobianState",
    "AsymptoticReport",
    "jacobian_action",
    "jacobian_matrix",
    "xi",
    "param_names",
    "standard_errors",
]


@dataclass(frozen=True)
class JacobianState:
    """Everything the derivative formulas evaluate at: the moment set plus
    the estimator outputs computed from it."""

    mean: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    phi: np.ndarray
    gamma0: np.ndarray
    gamma1: np.ndarray
    b: np.ndarray
    sigma: np.ndarray

    @property
    def dbar(self):
        return self.mean.shape[0]

    @classmethod
    def from_moments(cls, ms, tol=DEFAULT_TOL):
        """Run the estimation pipeline once and capture its state."""
        if not isinstance(ms, MomentSet):
            raise InvalidInput("ms must be a MomentSet")
        gs = gammas(ms, tol=tol)
        sol = solve_b(gs, tol=tol)
        rec = recover_sigma(sol.b, gs, tol=tol)
        return cls(mean=ms.mean, m0=ms.m0, m1=ms.m1, phi=gs.phi,
                   gamma0=gs.gamma0, gamma1=gs.gamma1, b=sol.b, sigma=rec.sigma)


@dataclass(frozen=True)
class AsymptoticReport:
    """Delta-method covariance and standard errors for ``(c, A, B)``."""

    xi: np.ndarray
    std_errors: np.ndarray
    param_names: list
    psi_method: str
    bandwidth: int
    n: int
    clipped: bool

    def to_json(self):
        return {
            "param_names": list(self.param_names),
            "std_errors": {name: float(se)
                           for name, se in zip(self.param_names, self.std_errors)},
            "xi": self.xi.tolist(),
            "psi_method": self.psi_method,
            "bandwidth": int(self.bandwidth),
            "n": int(self.n),
            "clipped": bool(self.clipped),
            "caveats": [
                "standard errors presuppose the moment conditions needed for "
                "asymptotic normality of the sample moments; they are not "
                "verified from the data"
            ],
        }


def jacobian_action(js, dmean, dm0, dm1, dm2, tol=DEFAULT_TOL):
    """Directional derivative of the estimator along a moment perturbation.

    Implements the chain obtained by differentiating each pipeline stage:

    - ``dPhi = (dm2 - Phi dm1) m1^{-1}``,
    - ``dgamma1 = dm1 - dPhi m0 - Phi dm0`` and the matching product rule
      for ``dgamma0`` (symmetrised, because the pipeline symmetrises
      ``gamma0``),
    - ``dSigma`` from the discrete Lyapunov equation
      ``dSigma - B dSigma B' = dgamma0 + dgamma1 B' + B dgamma1'``,
    - ``dB = -(dgamma1 + B dSigma) Sigma^{-1}``, ``dA = dPhi - dB``,
    - ``dc = -dPhi h + (I - Phi) dh``, the derivative of ``c = (I - Phi) h``.

    Returns the triple ``(dc, dA, dB)``.
    """
    k = js.dbar
    dmean = np.asarray(dmean, dtype=float).reshape(k)
    dm0 = np.asarray(dm0, dtype=float).reshape(k, k)
    dm1 = np.asarray(dm1, dtype=float).reshape(k, k)
    dm2 = np.asarray(dm2, dtype=float).reshape(k, k)
    phi, m0, m1 = js.phi, js.m0, js.m1
    b, sigma = js.b, js.sigma
    dphi = linalg.rsolve(dm2 - phi @ dm1, m1, tol=tol, name="m1")
    dgamma1 = dm1 - dphi @ m0 - phi @ dm0
    dgamma0 = (dm0 - dm1 @ phi.T - m1 @ dphi.T - dphi @ m1.T - phi @ dm1.T
               + dphi @ m0 @ phi.T + phi @ dm0 @ phi.T + phi @ m0 @ dphi.T)
    dgamma0 = linalg.sym(dgamma0)
    rhs = dgamma0 + dgamma1 @ b.T + b @ dgamma1.T
    dsigma = linalg.dlyap(b, rhs, tol=tol)
    db = -linalg.rsolve(dgamma1 + b @ dsigma, sigma, tol=tol, name="sigma")
    da = dphi - db
    dc = -dphi @ js.mean + (np.eye(k) - phi) @ dmean
    return dc, da, db


def jacobian_matrix(js, tol=DEFAULT_TOL):
    """Full Jacobian, ``(dbar + 2 dbar^2) x (dbar + 3 dbar^2)``.

    Columns run over the moment coordinates ``(mean, vec m0, vec m1,
    vec m2)`` and rows over ``(c, vec A, vec B)``.
    """
    k = js.dbar
    zero_v = np.zeros(k)
    zero_m = np.zeros((k, k))
    cols = []

    def column(dmean, dm0, dm1, dm2):
        dc, da, db = jacobian_action(js, dmean, dm0, dm1, dm2, tol=tol)
        return np.concatenate([dc, linalg.vec(da), linalg.vec(db)])

    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        cols.append(column(e, zero_m, zero_m, zero_m))
    for slot in range(3):
        for j in range(k):
            for i in range(k):
                em = np.zeros((k, k))
                em[i, j] = 1.0
                args = [zero_m, zero_m, zero_m]
                args[slot] = em
                cols.append(column(zero_v, *args))
    return np.column_stack(cols)


def param_names(d):
    """Labels for ``(c, vec A, vec B)`` in column-stacked order."""
    k = linalg.vech_dim(d)
    names = [f"c[{i}]" for i in range(k)]
    for tag in ("A", "B"):
        names.extend(f"{tag}[{i}][{j}]" for j in range(k) for i in range(k))
    return names


def xi(jac, psi, n):
    """Parameter covariance ``Xi = J Psi J'`` and standard errors.

    ``psi`` may be a :class:`~vechgarch.moments.PsiEstimate` or a bare
    matrix; ``n`` is the sample size behind the moment estimates.  Negative
    eigenvalues of the product (possible after clipping or with a rank
    deficient ``Psi``) are clipped at zero and flagged.
    """
    if n < 1:
        raise InvalidInput(f"n must be >= 1, got {n}")
    j = np.asarray(jac, dtype=float)
    if isinstance(psi, PsiEstimate):
        psi_matrix = psi.psi
        method = psi.method
        bandwidth = psi.bandwidth
        clipped = psi.clipped
    else:
        psi_matrix = np.asarray(psi, dtype=float)
        method = "external"
        bandwidth = 0
        clipped = False
    if psi_matrix.shape != (j.shape[1], j.shape[1]):
        raise InvalidInput(
            f"psi has shape {psi_matrix.shape}, expected {(j.shape[1], j.shape[1])}"
        )
    prod = linalg.sym(j @ psi_matrix @ j.T)
    values, vectors = np.linalg.eigh(prod)
    if values.min() < 0.0:
        prod = linalg.sym(vectors @ np.diag(np.clip(values, 0.0, None)) @ vectors.T)
        clipped = True
    se = np.sqrt(np.clip(np.diag(prod), 0.0, None) / n)
    return AsymptoticReport(
        xi=prod,
        std_errors=se,
        param_names=_names_from_rows(j.shape[0]),
        psi_method=method,
        bandwidth=bandwidth,
        n=int(n),
        clipped=clipped,
    )


def _names_from_rows(n_rows):
    # n_rows = dbar + 2 dbar^2  =>  dbar is the positive root.
    dbar = int(round((-1 + np.sqrt(1 + 8 * n_rows)) / 4))
    if dbar + 2 * dbar * dbar != n_rows:
        raise InvalidInput(f"{n_rows} rows do not match dbar + 2 dbar^2 for any dbar")
    d = linalg.mat_dim(dbar)
    return param_names(d)


def standard_errors(x, bandwidth=None, method="hac-bartlett", tol=DEFAULT_TOL):
    """One-call delta method on a raw ``x_t`` sample.

    Computes the sample moments, the long-run covariance by the requested
    method, the analytic Jacobian at the estimated state, and the final
    :class:`AsymptoticReport`.
    """
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise InvalidInput(f"x must be an n x dbar matrix, got shape {a.shape}")
    ms = sample_moments(a)
    js = JacobianState.from_moments(ms, tol=tol)
    if method == "hac-bartlett":
        psi = hac_psi(a, bandwidth=bandwidth)
    elif method == "spherical-block":
        psi = spherical_psi(a, js.phi, tol=tol)
    else:
        raise InvalidInput(f"unknown psi method {method!r}")
    jac = jacobian_matrix(js, tol=tol)
    return xi(jac, psi, a.shape[0])
