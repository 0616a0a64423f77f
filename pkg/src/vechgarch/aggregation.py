"""Temporal aggregation of vech-GARCH(1,1) processes.

Sampling a process every ``m`` periods (stock aggregation) or summing
returns over blocks of ``m`` periods (flow aggregation) again yields a
weak VARMA(1,1) in the squared returns, with autoregressive matrix
``Phi^m``.  Its innovation autocovariances are finite linear combinations
``sum_i J_i Sigma J_i'`` whose coefficient ladders are built here, after
which the usual palindromic solve recovers the low-frequency ``(c, A, B)``.

Flow aggregation allows an additive noise ``w`` on the aggregated returns
whose squared-process covariance ``sigma_w`` enters the autocovariances;
``w`` is taken to be mean preserving, so the aggregated unconditional
moment is ``m h``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import InvalidInput, MissingSigmaW
from .linalg import DEFAULT_TOL
from .model import GarchSpec, diagnostics
from .solver import EstimateReport, GammaState, recover_sigma, solve_b

__all__ = [
    "AggregationInput",
    "AggregatedSpec",
    "stock_gammas",
    "flow_gammas",
    "aggregate_params",
    "aggregate_data",
]


@dataclass(frozen=True)
class AggregationInput:
    """A spec, its innovation covariance and the aggregation request.

    ``sigma`` is the covariance of the martingale-difference innovation of
    the disaggregated squared-returns process.  ``sigma_w`` (flow only,
    required for ``m > 1``) is the covariance contribution of the additive
    aggregation noise.
    """

    spec: GarchSpec
    sigma: np.ndarray
    m: int
    kind: str = "stock"
    sigma_w: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("stock", "flow"):
            raise InvalidInput(f"kind must be 'stock' or 'flow', got {self.kind!r}")
        if int(self.m) < 1:
            raise InvalidInput(f"m must be >= 1, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        k = self.spec.dbar
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.shape != (k, k) or not np.isfinite(sigma).all():
            raise InvalidInput(f"sigma must be a finite {k} x {k} matrix")
        object.__setattr__(self, "sigma", sigma)
        if self.kind == "flow":
            if self.sigma_w is None:
                if self.m > 1:
                    raise MissingSigmaW(
                        "flow aggregation with m > 1 requires sigma_w (use a "
                        "zero matrix for noiseless aggregation)"
                    )
                object.__setattr__(self, "sigma_w", np.zeros((k, k)))
            else:
                sw = np.asarray(self.sigma_w, dtype=float)
                if sw.shape != (k, k) or not np.isfinite(sw).all():
                    raise InvalidInput(f"sigma_w must be a finite {k} x {k} matrix")
                object.__setattr__(self, "sigma_w", sw)
        elif self.sigma_w is not None:
            raise InvalidInput("sigma_w only applies to flow aggregation")


@dataclass(frozen=True)
class AggregatedSpec:
    """Low-frequency parameters plus the autocovariances they solve."""

    spec_m: GarchSpec
    gamma0_m: np.ndarray
    gamma1_m: np.ndarray
    m: int
    kind: str
    report: EstimateReport

    def to_json(self):
        out = self.spec_m.to_json()
        out["m"] = int(self.m)
        out["kind"] = self.kind
        return out


def _stock_ladder(spec, m):
    """Coefficients ``J_0..J_m`` of the sampled process's MA representation.

    ``J_0 = I``, ``J_i = Phi^{i-1} A`` for ``1 <= i <= m-1``, and the final
    coefficient is ``J_m = -Phi^{m-1} B`` (it replaces ``Phi^{m-1} A``: the
    lag-m innovation enters through the previous low-frequency observation).
    """
    powers = linalg.power_sequence(spec.phi, max(m - 1, 0))
    ladder = [np.eye(spec.dbar)]
    for i in range(1, m):
        ladder.append(powers[i - 1] @ spec.A)
    ladder.append(-powers[m - 1] @ spec.B)
    return ladder


def _flow_ladder(spec, m):
    """Coefficients ``J_0..J_{2m-1}`` for the block-summed process.

    Partial sums ``S_i = (I + Phi + ... + Phi^{i-1}) A`` accumulate while an
    innovation still contributes to the current block; past the block
    boundary the leading terms drop off again and every coefficient from
    ``i = m`` on carries the ``-Phi^{m-1} B`` tail.
    """
    k = spec.dbar
    powers = linalg.power_sequence(spec.phi, max(m - 1, 0))
    tail = -powers[m - 1] @ spec.B
    prefix = [np.zeros((k, k))]
    for i in range(1, m):
        prefix.append(prefix[-1] + powers[i - 1])
    ladder = [np.eye(k)]
    for i in range(1, m):
        ladder.append(np.eye(k) + prefix[i] @ spec.A)
    if m == 1:
        ladder.append(tail)
        return ladder
    ladder.append(prefix[m - 1] @ spec.A + tail)
    for i in range(m + 1, 2 * m - 1):
        partial = sum(powers[j] for j in range(i - m, m - 1))
        ladder.append(partial @ spec.A + tail)
    ladder.append(tail)
    return ladder


def stock_gammas(spec, sigma, m, tol=DEFAULT_TOL):
    """Innovation autocovariances of the every-m-th-period process.

    Returns ``(gamma0_m, gamma1_m)`` with ``gamma0_m = sum_i J_i Sigma
    J_i'`` over the stock ladder and ``gamma1_m = J_m Sigma``.
    """
    _check_sigma(spec, sigma)
    if m < 1:
        raise InvalidInput(f"m must be >= 1, got {m}")
    ladder = _stock_ladder(spec, m)
    gamma0 = sum(j @ sigma @ j.T for j in ladder)
    gamma1 = ladder[m] @ sigma
    return linalg.sym(gamma0), gamma1


def flow_gammas(spec, sigma, m, sigma_w=None, tol=DEFAULT_TOL):
    """Innovation autocovariances of the block-summed process.

    ``sigma_w`` adds ``sigma_w + Phi^m sigma_w (Phi^m)'`` to the lag-0
    autocovariance and ``-Phi^m sigma_w`` to the lag-1 one; both outputs
    are affine in it.  Required for ``m > 1``; pass a zero matrix for
    noiseless aggregation.
    """
    _check_sigma(spec, sigma)
    if m < 1:
        raise InvalidInput(f"m must be >= 1, got {m}")
    k = spec.dbar
    if sigma_w is None:
        if m > 1:
            raise MissingSigmaW(
                "flow aggregation with m > 1 requires sigma_w (use a zero "
                "matrix for noiseless aggregation)"
            )
        sigma_w = np.zeros((k, k))
    sw = np.asarray(sigma_w, dtype=float)
    if sw.shape != (k, k) or not np.isfinite(sw).all():
        raise InvalidInput(f"sigma_w must be a finite {k} x {k} matrix")
    ladder = _flow_ladder(spec, m)
    phi_m = np.linalg.matrix_power(spec.phi, m)
    gamma0 = sum(j @ sigma @ j.T for j in ladder)
    gamma0 = gamma0 + sw + phi_m @ sw @ phi_m.T
    gamma1 = sum(ladder[i + m] @ sigma @ ladder[i].T for i in range(m))
    gamma1 = gamma1 - phi_m @ sw
    return linalg.sym(gamma0), gamma1


def _check_sigma(spec, sigma):
    s = np.asarray(sigma, dtype=float)
    k = spec.dbar
    if s.shape != (k, k) or not np.isfinite(s).all():
        raise InvalidInput(f"sigma must be a finite {k} x {k} matrix")


def aggregate_params(inp, tol=DEFAULT_TOL):
    """Low-frequency GARCH parameters implied by a high-frequency spec.

    Solves the palindromic quadratic for the aggregated autocovariances,
    so the output moving-average matrix is the stable solvent:
    ``A_m = Phi^m - B_m`` and ``c_m = (I - Phi^m) h_m`` with ``h_m = h``
    for stock sampling and ``h_m = m h`` for flow sums.

    Returns
    -------
    AggregatedSpec
        With an :class:`~vechgarch.solver.EstimateReport` documenting the
        solve (eigenvalues, residuals, diagnostics).
    """
    if not isinstance(inp, AggregationInput):
        raise InvalidInput("inp must be an AggregationInput")
    spec, m = inp.spec, inp.m
    if linalg.asymmetry(inp.sigma) > 1e-8:
        raise InvalidInput("sigma must be symmetric")
    linalg.cholesky(linalg.sym(inp.sigma), tol=tol)
    from .model import uncond_h  # deferred: avoids import-order knots

    h = uncond_h(spec, tol=tol)
    if inp.kind == "stock":
        gamma0_m, gamma1_m = stock_gammas(spec, inp.sigma, m, tol=tol)
        h_m = h
    else:
        gamma0_m, gamma1_m = flow_gammas(spec, inp.sigma, m, sigma_w=inp.sigma_w, tol=tol)
        h_m = m * h
    phi_m = np.linalg.matrix_power(spec.phi, m)
    gs = GammaState(phi=phi_m, gamma0=gamma0_m, gamma1=gamma1_m)
    sol = solve_b(gs, tol=tol)
    rec = recover_sigma(sol.b, gs, tol=tol)
    a_m = phi_m - sol.b
    c_m = (np.eye(spec.dbar) - phi_m) @ h_m
    spec_m = GarchSpec(d=spec.d, c=c_m, A=a_m, B=sol.b)
    diag = diagnostics(spec_m, tol=tol)
    diag.warnings = list(rec.warnings) + diag.warnings
    report = EstimateReport(
        spec=spec_m,
        sigma=rec.sigma,
        p_eigenvalues=sol.p_eigenvalues,
        b_eigenvalues=sol.b_eigenvalues,
        residual_pme=sol.residual_pme,
        residual_nme=rec.nme_residual,
        sigma_symmetry_gap=rec.symmetry_gap,
        diagnostics=diag,
    )
    return AggregatedSpec(spec_m=spec_m, gamma0_m=gamma0_m, gamma1_m=gamma1_m,
                          m=m, kind=inp.kind, report=report)


def aggregate_data(y, m, kind="stock"):
    """Aggregate a returns sample: take every m-th row or block sums.

    Stock aggregation keeps rows ``m-1, 2m-1, ...`` (the last observation
    of each block); flow aggregation sums consecutive blocks of ``m``
    rows.  A trailing partial block is dropped.
    """
    a = np.asarray(y, dtype=float)
    if a.ndim != 2:
        raise InvalidInput(f"y must be an n x d matrix, got shape {a.shape}")
    if kind not in ("stock", "flow"):
        raise InvalidInput(f"kind must be 'stock' or 'flow', got {kind!r}")
    if m < 1:
        raise InvalidInput(f"m must be >= 1, got {m}")
    n_blocks = a.shape[0] // m
    if n_blocks == 0:
        raise InvalidInput(f"need at least {m} rows to aggregate with m = {m}")
    trimmed = a[: n_blocks * m]
    if kind == "stock":
        return trimmed[m - 1 :: m].copy()
    return trimmed.reshape(n_blocks, m, a.shape[1]).sum(axis=1)
