"""Closed-form parameter recovery from moments.

The pipeline maps a :class:`~vechgarch.model.MomentSet` to parameter
estimates:

1. ``Phi`` from the lag identities (``m2 m1^{-1}`` by default, with
   weighted and stacked least-squares variants over extra lags),
2. innovation autocovariances ``gamma0 = m0 - m1 Phi' - Phi m1' +
   Phi m0 Phi'`` and ``gamma1 = m1 - Phi m0``,
3. the moving-average matrix ``B`` as the stabilising solvent of the
   palindromic quadratic ``gamma1' + gamma0 B' + gamma1 (B')^2 = 0``,
   obtained from the eigenvalues of a ``2 dbar x 2 dbar`` companion matrix
   that come in ``(lambda, 1/lambda)`` pairs,
4. ``Sigma = -B^{-1} gamma1``, ``A = Phi - B`` and ``c = (I - Phi) h``.

Everything is deterministic linear algebra; no iterative optimisation is
involved anywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import (
    EstimationWarning,
    IllConditionedEigenvectors,
    InvalidInput,
    NotPositiveDefinite,
    NumericalFailure,
    SelectionCountMismatch,
    SingularMatrix,
    UnimodularEigenvalues,
    VechGarchError,
)
from .linalg import DEFAULT_TOL
from .model import GarchSpec, MomentSet, diagnostics
from .moments import sample_autocovariances, sample_moments

__all__ = [
    "GammaState",
    "SolventResult",
    "SigmaRecovery",
    "EstimateReport",
    "gammas",
    "phi_lstsq",
    "phi_weighted",
    "build_p",
    "solve_b",
    "solvent_from_pairs",
    "pme_residual",
    "nme_residual",
    "recover_sigma",
    "project_stationary",
    "estimate",
]


@dataclass(frozen=True)
class GammaState:
    """Autoregressive matrix and innovation autocovariances.

    ``gamma0`` is symmetrised on construction and the relative asymmetry of
    the raw input is recorded, so downstream solvers always see an exactly
    symmetric lag-0 autocovariance.
    """

    phi: np.ndarray
    gamma0: np.ndarray
    gamma1: np.ndarray
    gamma0_asymmetry: float = 0.0

    def __post_init__(self):
        phi = np.atleast_2d(np.asarray(self.phi, dtype=float))
        g0 = np.atleast_2d(np.asarray(self.gamma0, dtype=float))
        g1 = np.atleast_2d(np.asarray(self.gamma1, dtype=float))
        k = g0.shape[0]
        for name, m in (("phi", phi), ("gamma0", g0), ("gamma1", g1)):
            if m.shape != (k, k):
                raise InvalidInput(f"{name} must have shape {(k, k)}, got {m.shape}")
            if not np.isfinite(m).all():
                raise InvalidInput(f"{name} contains non-finite entries")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "gamma0_asymmetry", linalg.asymmetry(g0))
        object.__setattr__(self, "gamma0", linalg.sym(g0))
        object.__setattr__(self, "gamma1", g1)

    @property
    def dbar(self):
        return self.gamma0.shape[0]


@dataclass(frozen=True)
class SolventResult:
    """Stable solvent of the palindromic quadratic plus its spectral data.

    ``p_eigenvalues`` holds all ``2 dbar`` companion eigenvalues sorted by
    ascending modulus; ``b_eigenvalues`` the selected stable half.
    """

    b: np.ndarray
    b_eigenvalues: np.ndarray
    p_eigenvalues: np.ndarray
    residual_pme: float


@dataclass(frozen=True)
class SigmaRecovery:
    """Innovation covariance with its symmetry gap and equation residual."""

    sigma: np.ndarray
    symmetry_gap: float
    nme_residual: float
    warnings: list


@dataclass(frozen=True)
class EstimateReport:
    """Full output of the closed-form estimator."""

    spec: GarchSpec
    sigma: np.ndarray
    p_eigenvalues: np.ndarray
    b_eigenvalues: np.ndarray
    residual_pme: float
    residual_nme: float
    sigma_symmetry_gap: float
    diagnostics: object

    def to_json(self):
        return {
            "spec": self.spec.to_json(),
            "sigma": self.sigma.tolist(),
            "p_eigenvalues": _complex_list(self.p_eigenvalues),
            "b_eigenvalues": _complex_list(self.b_eigenvalues),
            "residual_pme": float(self.residual_pme),
            "residual_nme": float(self.residual_nme),
            "sigma_symmetry_gap": float(self.sigma_symmetry_gap),
            "diagnostics": self.diagnostics.to_json(),
        }


def _complex_list(values):
    return [{"re": float(v.real), "im": float(v.imag)} for v in np.asarray(values)]


def gammas(ms, phi_method="lag1", extra_covs=None, weights=None, tol=DEFAULT_TOL):
    """Build the :class:`GammaState` implied by a moment set.

    Parameters
    ----------
    ms : MomentSet
    phi_method : {"lag1", "weighted", "lstsq"}
        ``lag1`` solves ``Phi m1 = m2`` exactly; the other two combine the
        higher-lag identities ``m_{k+1} = Phi m_k`` supplied through
        ``extra_covs`` (a list ``[m3, m4, ...]``).
    weights : sequence, optional
        One weight per lag identity; equal weights by default.
    """
    phi = _estimate_phi(ms, phi_method, extra_covs, weights, tol)
    return _gamma_state(ms, phi)


def _gamma_state(ms, phi):
    g0 = ms.m0 - ms.m1 @ phi.T - phi @ ms.m1.T + phi @ ms.m0 @ phi.T
    g1 = ms.m1 - phi @ ms.m0
    return GammaState(phi=phi, gamma0=g0, gamma1=g1)


def _estimate_phi(ms, phi_method, extra_covs, weights, tol):
    covs = [ms.m1, ms.m2] + [np.asarray(m, dtype=float) for m in (extra_covs or [])]
    if phi_method == "lag1":
        try:
            return linalg.rsolve(ms.m2, ms.m1, tol=tol, name="m1")
        except SingularMatrix as exc:
            raise SingularMatrix(
                f"{exc}; the stacked phi_method='lstsq' handles singular "
                "individual lags"
            ) from exc
    if phi_method == "weighted":
        return phi_weighted(covs, weights=weights, tol=tol)
    if phi_method == "lstsq":
        return phi_lstsq(covs, weights=weights, tol=tol)
    raise InvalidInput(f"unknown phi_method {phi_method!r}")


def _lag_weights(n_lags, weights):
    if weights is None:
        return np.full(n_lags, 1.0 / n_lags)
    w = np.asarray(weights, dtype=float)
    if w.shape != (n_lags,):
        raise InvalidInput(f"need {n_lags} weights, got shape {w.shape}")
    if not np.isfinite(w).all() or w.sum() <= 0:
        raise InvalidInput("weights must be finite with positive sum")
    return w / w.sum()


def phi_lstsq(covs, weights=None, tol=DEFAULT_TOL):
    """Least-squares ``Phi`` over stacked lag identities.

    ``covs`` is ``[m1, m2, ..., m_{K+1}]``; the result minimises
    ``|| Phi [w_1 m1 ... w_K mK] - [w_1 m2 ... w_K m_{K+1}] ||_F``.
    Reduces to the plain lag-1 solution when ``K = 1`` and ``m1`` is
    invertible.
    """
    if len(covs) < 2:
        raise InvalidInput("need at least two autocovariances (m1 and m2)")
    n_lags = len(covs) - 1
    w = _lag_weights(n_lags, weights)
    design = np.hstack([w[k] * covs[k] for k in range(n_lags)])
    target = np.hstack([w[k] * covs[k + 1] for k in range(n_lags)])
    return linalg.lstsq(design, target, tol=tol)


def phi_weighted(covs, weights=None, tol=DEFAULT_TOL):
    """Convex combination of per-lag solutions ``m_{k+1} m_k^{-1}``."""
    if len(covs) < 2:
        raise InvalidInput("need at least two autocovariances (m1 and m2)")
    n_lags = len(covs) - 1
    w = _lag_weights(n_lags, weights)
    out = np.zeros_like(np.asarray(covs[0], dtype=float))
    for k in range(n_lags):
        out += w[k] * linalg.rsolve(covs[k + 1], covs[k], tol=tol, name=f"m{k + 1}")
    return out


def build_p(gs, tol=DEFAULT_TOL):
    """Companion matrix of the palindromic quadratic.

    ``P = [[0, I], [-gamma1^{-1} gamma1', -gamma1^{-1} gamma0]]`` whose
    eigenvalues come in ``(lambda, 1/lambda)`` pairs.  ``gamma1`` must be
    invertible; a singular ``gamma1`` (e.g. ``B = 0``) has no companion
    linearisation of this form.
    """
    k = gs.dbar
    try:
        lower = linalg.solve(gs.gamma1, np.hstack([gs.gamma1.T, gs.gamma0]), tol=tol,
                             name="gamma1")
    except SingularMatrix as exc:
        raise SingularMatrix(
            f"{exc}; a singular lag-1 innovation autocovariance (for instance "
            "when B = 0) admits no companion linearisation"
        ) from exc
    p = np.zeros((2 * k, 2 * k))
    p[:k, k:] = np.eye(k)
    p[k:, :k] = -lower[:, :k]
    p[k:, k:] = -lower[:, k:]
    return p


def _check_conjugate_closure(values, tol):
    vals = np.asarray(values)
    complex_vals = vals[np.abs(vals.imag) > tol * (1.0 + np.abs(vals))]
    if complex_vals.size == 0:
        return
    a = np.sort_complex(complex_vals)
    b = np.sort_complex(np.conj(complex_vals))
    if not np.allclose(a, b, rtol=1e-9, atol=1e-12):
        raise NumericalFailure(
            "selected eigenvalues are not closed under complex conjugation"
        )


def solvent_from_pairs(values, vectors_top, tol=DEFAULT_TOL):
    """Solvent ``(U')^{-1} diag(values) U'`` from chosen eigenpairs.

    ``vectors_top`` holds the upper ``dbar``-blocks of companion
    eigenvectors as columns.  Any selection of ``dbar`` eigenpairs with an
    invertible ``U`` yields a (generally complex) solution of the
    palindromic quadratic; only selections closed under conjugation give a
    real one.
    """
    u = np.asarray(vectors_top)
    vals = np.asarray(values)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvalidInput(f"vectors_top must be square, got shape {u.shape}")
    if vals.shape != (u.shape[0],):
        raise InvalidInput("need exactly one eigenvalue per eigenvector column")
    cond = np.linalg.cond(u)
    if not np.isfinite(cond) or cond > tol.eigvec_cond:
        raise IllConditionedEigenvectors(
            f"eigenvector block has condition number {cond:.3e}"
        )
    return np.linalg.solve(u.T, vals[:, None] * u.T)


def pme_residual(gs, b):
    """Frobenius residual of the palindromic quadratic at ``b``."""
    bt = np.asarray(b).T
    res = gs.gamma1.T + gs.gamma0 @ bt + gs.gamma1 @ (bt @ bt)
    return float(np.linalg.norm(res))


def nme_residual(gs, sigma, tol=DEFAULT_TOL):
    """Frobenius residual of ``gamma0 = Sigma + gamma1 Sigma^{-1} gamma1'``."""
    inv_term = linalg.solve(np.asarray(sigma, dtype=float), gs.gamma1.T, tol=tol,
                            name="sigma")
    res = gs.gamma0 - sigma - gs.gamma1 @ inv_term
    return float(np.linalg.norm(res))


def solve_b(gs, tol_unimodular=None, tol=DEFAULT_TOL):
    """Stable solvent of the palindromic quadratic.

    Eigenvalues of the companion matrix are sorted by ascending modulus;
    the ``dbar`` smallest must lie strictly inside the unit circle and the
    rest strictly outside, with a symmetric exclusion band of width
    ``tol_unimodular`` around the circle.  The solvent is assembled from
    the stable eigenpairs and cast back to the reals.

    Raises
    ------
    UnimodularEigenvalues
        If any eigenvalue modulus falls inside the exclusion band: the
        moving-average matrix would have an eigenvalue on the unit circle,
        where no stable/anti-stable split exists.
    SelectionCountMismatch
        If the count of in-circle eigenvalues differs from ``dbar``.
    """
    band = tol.unimodular if tol_unimodular is None else float(tol_unimodular)
    k = gs.dbar
    p = build_p(gs, tol=tol)
    dec = linalg.eig(p)
    order = np.argsort(np.abs(dec.eigenvalues), kind="stable")
    values = dec.eigenvalues[order]
    vectors = dec.eigenvectors[:, order]
    moduli = np.abs(values)
    on_circle = np.abs(moduli - 1.0) <= band
    if on_circle.any():
        worst = moduli[on_circle] - 1.0
        raise UnimodularEigenvalues(
            f"{int(on_circle.sum())} companion eigenvalue(s) within {band:g} of the "
            f"unit circle (closest offset {worst[np.abs(worst).argmin()]:.3e}); "
            "no stable solvent exists"
        )
    inside = int((moduli < 1.0).sum())
    if inside != k:
        raise SelectionCountMismatch(
            f"{inside} eigenvalues inside the unit circle, expected {k}"
        )
    sel_values = values[:k]
    sel_top = vectors[:k, :k]
    _check_conjugate_closure(sel_values, tol.realify)
    b_complex = solvent_from_pairs(sel_values, sel_top, tol=tol)
    scale = np.linalg.norm(b_complex)
    imag_norm = np.linalg.norm(b_complex.imag)
    if imag_norm > tol.realify * (1.0 + scale):
        raise NumericalFailure(
            f"imaginary residue {imag_norm:.3e} too large to realify the solvent"
        )
    b = np.ascontiguousarray(b_complex.real)
    return SolventResult(
        b=b,
        b_eigenvalues=sel_values,
        p_eigenvalues=values,
        residual_pme=pme_residual(gs, b),
    )


def recover_sigma(b, gs, tol=DEFAULT_TOL):
    """Innovation covariance ``Sigma = -B^{-1} gamma1``.

    The raw solution's relative asymmetry is recorded as ``symmetry_gap``
    and the returned matrix is symmetrised.  A non-positive-definite result
    is reported through a warning entry, never repaired.  When ``B`` is
    numerically zero the MA part is absent and ``gamma0`` itself is
    returned (with a warning); a singular but nonzero ``B`` is an error.
    """
    bm = np.atleast_2d(np.asarray(b, dtype=float))
    notes = []
    scale = 1.0 + np.linalg.norm(gs.gamma0)
    if np.linalg.norm(bm) <= 1e-10 * scale:
        notes.append({
            "code": "b_zero",
            "message": "B is numerically zero; returning gamma0 as Sigma",
        })
        sigma = linalg.sym(gs.gamma0)
        gap = 0.0
    else:
        raw = -linalg.solve(bm, gs.gamma1, tol=tol, name="B")
        gap = linalg.asymmetry(raw)
        sigma = linalg.sym(raw)
    try:
        linalg.cholesky(sigma, tol=tol)
    except (NotPositiveDefinite, InvalidInput):
        notes.append({
            "code": "sigma_not_pd",
            "message": "recovered Sigma is not positive definite",
        })
    try:
        residual = nme_residual(gs, sigma, tol=tol)
    except SingularMatrix:
        residual = float("inf")
        notes.append({
            "code": "sigma_singular",
            "message": "recovered Sigma is singular; equation residual unavailable",
        })
    return SigmaRecovery(sigma=sigma, symmetry_gap=float(gap),
                         nme_residual=residual, warnings=notes)


def _project_impl(phi, delta, tol):
    p = np.atleast_2d(np.asarray(phi, dtype=float))
    dec = linalg.eig(p)
    moduli = np.abs(dec.eigenvalues)
    if (moduli < 1.0).all():
        return p.copy(), []
    target = dec.eigenvalues.copy()
    mask = moduli >= 1.0
    target[mask] = target[mask] / moduli[mask] * (1.0 - delta)
    notes = [{
        "code": "phi_projected",
        "message": f"rescaled {int(mask.sum())} eigenvalue(s) of Phi to modulus "
                   f"{1.0 - delta:g}",
    }]
    cond = np.linalg.cond(dec.eigenvectors)
    if np.isfinite(cond) and cond <= tol.eigvec_cond:
        recon = np.linalg.solve(dec.eigenvectors.T, (dec.eigenvectors * target).T).T
        if np.linalg.norm(recon.imag) <= tol.realify * (1.0 + np.linalg.norm(recon)):
            out = recon.real
            if linalg.spectral_radius(out) < 1.0:
                return out, notes
    rho = linalg.spectral_radius(p)
    notes.append({
        "code": "phi_projection_fallback",
        "message": "eigenvector basis too ill conditioned; rescaled the whole "
                   "matrix instead",
    })
    return p * ((1.0 - delta) / rho), notes


def project_stationary(phi, delta=1e-3, tol=DEFAULT_TOL):
    """Pull eigenvalues of ``phi`` with modulus >= 1 back inside the circle.

    Offending eigenvalues are rescaled to modulus ``1 - delta`` with their
    phase preserved and the matrix is rebuilt in its eigenbasis.  If that
    basis is too ill conditioned to invert, the whole matrix is rescaled by
    ``(1 - delta) / rho(phi)`` instead and an
    :class:`~vechgarch.exceptions.EstimationWarning` is emitted.  A matrix
    that is already stationary is returned unchanged.
    """
    out, notes = _project_impl(phi, delta, tol)
    for note in notes:
        warnings.warn(note["message"], EstimationWarning, stacklevel=2)
    return out


_WRAPPABLE = (VechGarchError,)


def _run_stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except _WRAPPABLE as exc:
        if exc.stage is None and type(exc).__init__ is VechGarchError.__init__:
            raise type(exc)(str(exc), stage=name) from exc
        raise


def estimate(data, phi_method="lag1", lags=1, weights=None, project=False,
             tol_unimodular=None, tol=DEFAULT_TOL):
    """Closed-form estimation of (c, A, B, Sigma) from data or moments.

    Parameters
    ----------
    data : ndarray or MomentSet
        Either the ``n x dbar`` series of half-vectorised outer products
        ``x_t`` (use :func:`vechgarch.simulate.to_x` on raw returns) or a
        precomputed :class:`~vechgarch.model.MomentSet`.
    phi_method : {"lag1", "weighted", "lstsq"}
        How to combine lag identities into ``Phi``.
    lags : int
        Number of lag identities for the weighted/lstsq methods; entries
        beyond the first two autocovariances require raw data.
    weights : sequence, optional
        Per-lag weights, equal by default.
    project : bool
        Project a nonstationary ``Phi`` estimate back inside the unit
        circle before forming the innovation autocovariances.
    tol_unimodular : float, optional
        Exclusion band around the unit circle for the eigenvalue split.

    Returns
    -------
    EstimateReport
        Parameter estimates plus spectral data, equation residuals and
        diagnostics; soft repairs are listed in ``diagnostics.warnings``.
    """
    if lags < 1:
        raise InvalidInput(f"lags must be >= 1, got {lags}")
    if isinstance(data, MomentSet):
        ms = data
        extra = None
        if phi_method != "lag1" and lags > 1:
            raise InvalidInput(
                "lag identities beyond m2 = Phi m1 require the raw sample, "
                "not a precomputed MomentSet"
            )
    else:
        x = np.asarray(data, dtype=float)
        if x.ndim != 2:
            raise InvalidInput(f"data must be an n x dbar matrix, got shape {x.shape}")
        linalg.mat_dim(x.shape[1])  # validates the vech width
        ms = _run_stage("moments", sample_moments, x)
        extra = None
        if phi_method != "lag1" and lags > 1:
            covs = _run_stage("moments", sample_autocovariances, x, lags + 1)
            extra = covs[3:]
    d = linalg.mat_dim(ms.dbar)
    notes = []
    phi_hat = _run_stage("gammas", _estimate_phi, ms, phi_method, extra, weights, tol)
    if project and linalg.spectral_radius(phi_hat) >= 1.0:
        phi_hat, proj_notes = _project_impl(phi_hat, 1e-3, tol)
        notes.extend(proj_notes)
    gs = _gamma_state(ms, phi_hat)
    if gs.gamma0_asymmetry > tol.gamma_symmetry:
        notes.append({
            "code": "gamma0_symmetrized",
            "message": f"gamma0 symmetrised (relative asymmetry "
                       f"{gs.gamma0_asymmetry:.3e})",
        })
    sol = _run_stage("solve_b", solve_b, gs, tol_unimodular=tol_unimodular, tol=tol)
    rec = _run_stage("sigma", recover_sigma, sol.b, gs, tol=tol)
    notes.extend(rec.warnings)
    a_hat = gs.phi - sol.b
    c_hat = (np.eye(ms.dbar) - gs.phi) @ ms.mean
    spec = GarchSpec(d=d, c=c_hat, A=a_hat, B=sol.b)
    diag = diagnostics(spec, tol=tol)
    diag.warnings = notes + diag.warnings
    return EstimateReport(
        spec=spec,
        sigma=rec.sigma,
        p_eigenvalues=sol.p_eigenvalues,
        b_eigenvalues=sol.b_eigenvalues,
        residual_pme=sol.residual_pme,
        residual_nme=rec.nme_residual,
        sigma_symmetry_gap=rec.symmetry_gap,
        diagnostics=diag,
    )
