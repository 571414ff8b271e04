"""Signed log-likelihood root and its third-order modification.

``r(tau)`` is the signed root of the profile likelihood ratio.  The modified
root is

    r*(tau) = r(tau) - log(r(tau) / Q(tau)) / r(tau)

where ``Q`` is built from likelihood gradients taken along the ancillary
directions ``V`` (derived from the pivots ``(x_ij - mu_i) / (tau mu_i)``) and
from observed-information determinants.  Substituting ``V`` into the
gradients leaves only per-group sums of ``x`` and ``x**2``, so everything
below runs on sufficient statistics.  :func:`build_V` and
:func:`gradient_bundle_direct` evaluate the same objects observation by
observation and exist to cross-check the reduced forms.
"""

from dataclasses import dataclass
import functools
import math

import numpy as np
from scipy import optimize

from . import model
from .dist import normal_cdf, normal_quantile
from .errors import (
    BracketingFailed,
    InconsistentSigns,
    NoConvergence,
    NonPositiveInfoDeterminant,
    NonPositiveParameter,
    ProfileExceedsMaximum,
    RawDataRequired,
    SingularGradientMatrix,
)
from .interval import IntervalEstimate

GUARD = 1e-5
RADICAND_SLACK = 1e-10
MAX_DOUBLINGS = 60


@dataclass(frozen=True, eq=False)
class AncillaryDirections:
    """Ancillary directions evaluated at the MLE.

    ``blocks`` is the dense ``(k + 1, n)`` array of directions when raw data
    are available and ``None`` on the summary-only path, where only
    ``theta_hat`` is needed.
    """

    theta_hat: model.ParamVector
    blocks: np.ndarray = None


@dataclass(frozen=True, eq=False)
class GradientBundle:
    l_V: np.ndarray
    l_theta_V: np.ndarray

    @property
    def l_lambda_V(self):
        return self.l_theta_V[1:]


@dataclass(frozen=True)
class RootDiagnostics:
    tau: float
    r: float
    q: float
    r_star: float
    guard_active: bool


def build_V(data, fit):
    """Dense ancillary directions ``-(dR/dx)^-1 (dR/dtheta)`` at the MLE.

    Row 0 holds ``(x_ij - mu_i) / tau`` for every observation; row ``i + 1``
    holds ``x_ij / mu_i`` inside group ``i`` and zero elsewhere.
    """
    if data.raw is None:
        raise RawDataRequired("ancillary directions need the raw observations")
    tau, mu = fit.theta_hat.tau, fit.theta_hat.mu
    sizes = [len(r) for r in data.raw]
    V = np.zeros((data.k + 1, sum(sizes)))
    start = 0
    for i, x in enumerate(data.raw):
        sl = slice(start, start + len(x))
        V[0, sl] = (x - mu[i]) / tau
        V[i + 1, sl] = x / mu[i]
        start += len(x)
    return AncillaryDirections(fit.theta_hat, V)


def ancillary(fit):
    """Directions for the summary-only path."""
    return AncillaryDirections(fit.theta_hat)


def gradient_bundle(theta, data, V):
    """Likelihood gradient along ``V`` and its derivative in theta.

    Uses the closed forms in the group sums; ``V`` contributes only its
    ``theta_hat``.
    """
    model._check_theta(theta, data)
    tau, mu = theta.tau, theta.mu
    th, mh = V.theta_hat.tau, V.theta_hat.mu
    n, m1, m2 = data.n, data.mean, data.mean_sq
    k = data.k
    t2 = tau * tau

    l_V = np.empty(k + 1)
    # sum_j (x - mh)(mu - x) = n (mu m1 - m2 - mh mu + mh m1)
    cross = n * (mu * m1 - m2 - mh * mu + mh * m1)
    l_V[0] = np.sum(cross / mu ** 2) / (th * t2)
    l_V[1:] = n * (mu * m1 - m2) / (mh * mu ** 2 * t2)

    l_theta_V = np.zeros((k + 1, k + 1))
    # every component of l_V carries 1 / tau^2
    l_theta_V[0] = -2.0 * l_V / tau
    # d/dmu_i of -(x - mu)/(mu^2 tau^2) is (2x - mu)/(mu^3 tau^2)
    mu3 = mu ** 3
    l_theta_V[1:, 0] = n * (2.0 * m2 - mu * m1 - 2.0 * mh * m1 + mh * mu) / (th * t2 * mu3)
    diag = n * (2.0 * m2 - mu * m1) / (mh * t2 * mu3)
    l_theta_V[1 + np.arange(k), 1 + np.arange(k)] = diag
    return GradientBundle(l_V, l_theta_V)


def gradient_bundle_direct(theta, data, V):
    """Observation-level evaluation of :func:`gradient_bundle`.

    Sums ``dl/dx_j * V_mj`` over all observations with
    ``dl/dx_ij = -(x_ij - mu_i) / (mu_i^2 tau^2)``.
    """
    if data.raw is None or V.blocks is None:
        raise RawDataRequired("direct gradients need raw data and dense directions")
    tau, mu = theta.tau, theta.mu
    x = np.concatenate(data.raw)
    gid = np.concatenate([np.full(len(r), i) for i, r in enumerate(data.raw)])
    mu_j = mu[gid]
    dl_dx = -(x - mu_j) / (mu_j ** 2 * tau ** 2)
    l_V = V.blocks @ dl_dx

    k = data.k
    l_theta_V = np.empty((k + 1, k + 1))
    l_theta_V[0] = V.blocks @ (2.0 * (x - mu_j) / (mu_j ** 2 * tau ** 3))
    d_mu = (2.0 * x - mu_j) / (mu_j ** 3 * tau ** 2)
    for i in range(k):
        l_theta_V[i + 1] = V.blocks @ np.where(gid == i, d_mu, 0.0)
    return GradientBundle(l_V, l_theta_V)


def slr_r(tau, data, fit):
    """Signed root ``sgn(tau_hat - tau) sqrt(2 (l_hat - l_p(tau)))``."""
    if not tau > 0:
        raise NonPositiveParameter(f"tau must be positive, got {tau!r}")
    radicand = 2.0 * (fit.loglik - model.profile_loglik(tau, data))
    if radicand < 0:
        if radicand < -RADICAND_SLACK:
            raise ProfileExceedsMaximum(
                f"profile log-likelihood at tau={tau!r} exceeds the fitted maximum "
                f"by {-radicand / 2:.3g}")
        radicand = 0.0
    return math.copysign(math.sqrt(radicand), fit.tau_hat - tau) if radicand else 0.0


@functools.lru_cache(maxsize=64)
def _at_mle(data, fit):
    # pieces of Q that depend only on the MLE
    theta_hat = fit.theta_hat
    at_hat = gradient_bundle(theta_hat, data, ancillary(fit))
    denom = np.linalg.det(at_hat.l_theta_V)
    scale = np.prod(np.abs(at_hat.l_theta_V).max(axis=1))
    if not abs(denom) > 1e-300 * max(scale, 1.0):
        raise SingularGradientMatrix(f"gradient matrix at the MLE is singular (det={denom!r})")
    det_full = np.linalg.det(model.observed_info(theta_hat, data))
    return at_hat, denom, det_full


def q_statistic(tau, data, fit):
    """Correction factor ``Q(tau)`` of the modified root."""
    if not tau > 0:
        raise NonPositiveParameter(f"tau must be positive, got {tau!r}")
    at_hat, denom, det_full = _at_mle(data, fit)
    theta_tau = model.constrained_theta(tau, data)
    at_tau = gradient_bundle(theta_tau, data, ancillary(fit))
    num = np.vstack([at_hat.l_V - at_tau.l_V, at_tau.l_lambda_V])
    numer = np.linalg.det(num)

    det_nuis = np.prod(np.diag(model.nuisance_info(theta_tau, data)))
    if not (det_full > 0 and det_nuis > 0):
        raise NonPositiveInfoDeterminant(
            f"information determinants must be positive (|j|={det_full!r}, "
            f"|j_lambda|={det_nuis!r})")
    return float(numer / denom * math.sqrt(det_full / det_nuis))


def r_star(tau, data, fit, guard=GUARD):
    """Modified signed root with diagnostics.

    Inside ``|r| < guard`` the correction is a 0/0 form and ``r`` itself is
    returned with ``guard_active`` set.

    Raises
    ------
    InconsistentSigns
        If ``r / Q <= 0`` outside the guard region.
    """
    r = slr_r(tau, data, fit)
    if abs(r) < guard:
        return RootDiagnostics(float(tau), r, math.nan, r, True)
    q = q_statistic(tau, data, fit)
    ratio = r / q
    if not ratio > 0:
        raise InconsistentSigns(f"r={r!r} and Q={q!r} differ in sign at tau={tau!r}")
    return RootDiagnostics(float(tau), r, q, r - math.log(ratio) / r, False)


def _find_endpoint(f, tau_hat, side, target, tol):
    # f(tau) - target changes sign between tau_hat and some outer point
    g = lambda t: f(t) - target
    inner = tau_hat
    g_inner = g(inner)
    factor = 0.5 if side < 0 else 1.5
    outer = tau_hat * factor
    searched = [outer, outer]
    for _ in range(MAX_DOUBLINGS + 1):
        g_outer = g(outer)
        searched = [min(searched[0], outer), max(searched[1], outer)]
        if g_outer == 0:
            return outer, 0
        if np.sign(g_outer) != np.sign(g_inner):
            break
        inner, g_inner = outer, g_outer
        outer = outer / 2.0 if side < 0 else outer * 2.0
    else:
        raise BracketingFailed(
            f"no {'lower' if side < 0 else 'upper'} endpoint found for target "
            f"{target:+.4f} on [{searched[0]:.6g}, {searched[1]:.6g}]",
            searched=tuple(searched))
    lo, hi = (outer, inner) if side < 0 else (inner, outer)
    root, info = optimize.brentq(g, lo, hi, xtol=tol, rtol=8.9e-16,
                                 full_output=True, disp=False)
    if not info.converged:
        raise NoConvergence(f"endpoint refinement failed: {info.flag}")
    return root, info.iterations


def _interval(f, data, level, fit, method, extra=None):
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level!r}")
    if fit is None:
        fit = model.fit_mle(data)
    z = normal_quantile(0.5 + level / 2.0)
    # tighter than 1e-8 (1 + tau_hat) so endpoint residuals stay below 1e-6
    tol = 1e-11 * (1.0 + fit.tau_hat)
    lower, it_lo = _find_endpoint(f, fit.tau_hat, -1, z, tol)
    upper, it_hi = _find_endpoint(f, fit.tau_hat, +1, -z, tol)
    diag = {"tau_hat": fit.tau_hat, "fit_iterations": fit.iterations,
            "iterations": (it_lo, it_hi), "z": z}
    if extra:
        diag.update(extra)
    return IntervalEstimate(method, level, lower, upper, diag)


def ci_mslr(data, level=0.95, fit=None, guard=GUARD):
    """Interval ``{tau : |r*(tau)| < z_{alpha/2}}``."""
    fit = fit if fit is not None else model.fit_mle(data)
    f = lambda t: r_star(t, data, fit, guard).r_star
    return _interval(f, data, level, fit, "MSLR")


def ci_slr(data, level=0.95, fit=None):
    """Interval ``{tau : |r(tau)| <= z_{alpha/2}}``."""
    fit = fit if fit is not None else model.fit_mle(data)
    return _interval(lambda t: slr_r(t, data, fit), data, level, fit, "SLR")


def _two_sided(stat):
    return min(1.0, 2.0 * min(normal_cdf(-stat), normal_cdf(stat)))


def pvalue_mslr(data, tau0, fit=None, guard=GUARD):
    """Two-sided p-value of ``H0: tau = tau0`` from ``r*(tau0)``."""
    if not tau0 > 0:
        raise NonPositiveParameter(f"tau0 must be positive, got {tau0!r}")
    fit = fit if fit is not None else model.fit_mle(data)
    return _two_sided(r_star(tau0, data, fit, guard).r_star)


def pvalue_slr(data, tau0, fit=None):
    if not tau0 > 0:
        raise NonPositiveParameter(f"tau0 must be positive, got {tau0!r}")
    fit = fit if fit is not None else model.fit_mle(data)
    return _two_sided(slr_r(tau0, data, fit))
