"""Normal model with a common coefficient of variation.

Group ``i`` is normal with mean ``mu_i > 0`` and standard deviation
``tau * mu_i``.  Every likelihood quantity here is written in terms of the
per-group sufficient statistics ``(n_i, mean_i, mean_sq_i)`` so that data
sets given only as summaries are handled exactly like raw data.

Parameters are ordered ``(tau, mu_1, ..., mu_k)`` throughout.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize

from .errors import (
    NegativeMeanGroup,
    NoConvergence,
    NonPositiveParameter,
    TooFewObservations,
    ZeroVariance,
)

MAX_ITER = 200


@dataclass(frozen=True)
class SampleSummary:
    """Sufficient statistics of one group.

    Attributes
    ----------
    n : int
        Number of observations.
    mean : float
        Sample mean.
    mean_sq : float
        Mean of the squared observations, ``sum(x**2) / n``.
    sd : float
        Sample standard deviation with the ``n - 1`` denominator.
    """

    n: int
    mean: float
    mean_sq: float
    sd: float

    def __post_init__(self):
        if self.n < 2:
            raise TooFewObservations(f"a group needs at least 2 observations, got {self.n}")
        if not self.mean_sq > self.mean * self.mean or not self.sd > 0:
            raise ZeroVariance("group has zero sample variance")
        if not self.mean > 0:
            raise NegativeMeanGroup(
                f"group mean must be positive under the model, got {self.mean!r}")

    @classmethod
    def from_moments(cls, n, mean, sd):
        """Build a summary from ``(n, mean, sd)`` as printed in tables."""
        n = int(n)
        if n < 2:
            raise TooFewObservations(f"a group needs at least 2 observations, got {n}")
        mean = float(mean)
        sd = float(sd)
        if not sd > 0:
            raise ZeroVariance("standard deviation must be positive")
        mean_sq = mean * mean + sd * sd * (n - 1) / n
        return cls(n, mean, mean_sq, sd)

    @property
    def cv(self):
        return self.sd / self.mean


def summarize(values):
    """Sufficient statistics of a group of raw observations.

    Raises
    ------
    TooFewObservations
        If fewer than two values are given.
    ZeroVariance
        If all values are equal.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise TooFewObservations(f"a group needs at least 2 observations, got {x.size}")
    if np.all(x == x[0]):
        raise ZeroVariance("all observations in the group are equal")
    return SampleSummary(
        n=int(x.size),
        mean=float(np.mean(x)),
        mean_sq=float(np.mean(x * x)),
        sd=float(np.std(x, ddof=1)),
    )


@dataclass(frozen=True, eq=False)
class Dataset:
    """k independent groups, as summaries and optionally as raw values."""

    groups: tuple
    raw: tuple = None
    n: np.ndarray = field(init=False, repr=False)
    mean: np.ndarray = field(init=False, repr=False)
    mean_sq: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        groups = tuple(self.groups)
        if len(groups) < 1:
            raise TooFewObservations("a dataset needs at least one group")
        object.__setattr__(self, "groups", groups)
        if self.raw is not None:
            raw = tuple(np.asarray(r, dtype=float).ravel() for r in self.raw)
            if len(raw) != len(groups):
                raise ValueError("raw and summary group counts differ")
            for g, r in zip(groups, raw):
                s = summarize(r)
                if (g.n != s.n or not math.isclose(g.mean, s.mean, rel_tol=1e-12)
                        or not math.isclose(g.mean_sq, s.mean_sq, rel_tol=1e-12)):
                    raise ValueError("summaries do not match the raw observations")
            object.__setattr__(self, "raw", raw)
        for name in ("n", "mean", "mean_sq"):
            arr = np.array([getattr(g, name) for g in groups], dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_groups(cls, groups):
        """Dataset from a sequence of per-group raw observation arrays."""
        raw = [np.asarray(g, dtype=float).ravel() for g in groups]
        return cls(tuple(summarize(r) for r in raw), tuple(raw))

    @classmethod
    def from_summaries(cls, n, mean, sd):
        """Dataset from per-group sizes, means and standard deviations."""
        if not len(n) == len(mean) == len(sd):
            raise ValueError("n, mean and sd must have the same length")
        return cls(tuple(SampleSummary.from_moments(*t) for t in zip(n, mean, sd)))

    @property
    def k(self):
        return len(self.groups)

    @property
    def total_n(self):
        return int(sum(g.n for g in self.groups))

    @property
    def sd(self):
        return np.array([g.sd for g in self.groups])

    def summary_only(self):
        """The same data with the raw observations dropped."""
        return Dataset(self.groups)

    def scaled(self, factors):
        """Dataset with group ``i`` multiplied by ``factors[i] > 0``."""
        factors = [float(c) for c in factors]
        if self.raw is not None:
            return Dataset.from_groups([c * r for c, r in zip(factors, self.raw)])
        return Dataset(tuple(
            SampleSummary(g.n, c * g.mean, c * c * g.mean_sq, c * g.sd)
            for c, g in zip(factors, self.groups)))


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Model parameters ``(tau, mu_1, ..., mu_k)``."""

    tau: float
    mu: np.ndarray

    def __post_init__(self):
        tau = float(self.tau)
        mu = np.array(self.mu, dtype=float).ravel()
        if not tau > 0 or not np.all(mu > 0):
            raise NonPositiveParameter(
                f"tau and all mu must be positive, got tau={tau!r}, mu={mu!r}")
        mu.flags.writeable = False
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_array(cls, theta):
        theta = np.asarray(theta, dtype=float)
        return cls(theta[0], theta[1:])

    def as_array(self):
        return np.concatenate(([self.tau], self.mu))


@dataclass(frozen=True)
class FitResult:
    theta_hat: ParamVector
    loglik: float
    iterations: int
    converged: bool
    profile_curvature: float

    @property
    def tau_hat(self):
        return self.theta_hat.tau


def _check_theta(theta, data):
    if len(theta.mu) != data.k:
        raise ValueError(f"theta has {len(theta.mu)} means for {data.k} groups")


def _residual_ss(mu, data):
    # sum_j (x_ij / mu_i - 1)^2 per group, from sufficient statistics
    m1, m2 = data.mean, data.mean_sq
    return data.n * ((m2 - m1 * m1) / (mu * mu) + (m1 / mu - 1.0) ** 2)


def log_likelihood(theta, data):
    """Log-likelihood, dropping the constant ``-n/2 log(2 pi)``."""
    _check_theta(theta, data)
    tau, mu = theta.tau, theta.mu
    return float(-data.total_n * math.log(tau) - np.sum(data.n * np.log(mu))
                 - np.sum(_residual_ss(mu, data)) / (2.0 * tau * tau))


def _cmle(tau, mean, mean_sq):
    # (sqrt(m1^2 + 4 t^2 m2) - m1) / (2 t^2), rationalised to avoid cancellation
    return 2.0 * mean_sq / (np.sqrt(mean * mean + 4.0 * tau * tau * mean_sq) + mean)


def cmle_mu(tau, summary):
    """Constrained MLE of a group mean for fixed ``tau``."""
    if not tau > 0:
        raise NonPositiveParameter(f"tau must be positive, got {tau!r}")
    return float(_cmle(float(tau), summary.mean, summary.mean_sq))


def constrained_theta(tau, data):
    """``(tau, mu_hat_1(tau), ..., mu_hat_k(tau))``."""
    if not tau > 0:
        raise NonPositiveParameter(f"tau must be positive, got {tau!r}")
    return ParamVector(tau, _cmle(float(tau), data.mean, data.mean_sq))


def profile_loglik(tau, data):
    return log_likelihood(constrained_theta(tau, data), data)


def score(theta, data):
    """Gradient of :func:`log_likelihood` in ``(tau, mu_1, ..., mu_k)``."""
    _check_theta(theta, data)
    tau, mu = theta.tau, theta.mu
    n, m1, m2 = data.n, data.mean, data.mean_sq
    d_tau = -data.total_n / tau + np.sum(_residual_ss(mu, data)) / tau ** 3
    d_mu = -n / mu + n * (m2 / mu ** 3 - m1 / mu ** 2) / (tau * tau)
    return np.concatenate(([d_tau], d_mu))


def profile_score(tau, data):
    """Derivative of the profile log-likelihood (envelope theorem)."""
    theta = constrained_theta(tau, data)
    return float(-data.total_n / tau + np.sum(_residual_ss(theta.mu, data)) / tau ** 3)


def observed_info(theta, data):
    """Observed information ``-d2 l / d theta d theta'``.

    The mean block is diagonal; ordering is ``(tau, mu_1, ..., mu_k)``.
    """
    _check_theta(theta, data)
    tau, mu = theta.tau, theta.mu
    n, m1, m2 = data.n, data.mean, data.mean_sq
    k = data.k
    info = np.empty((k + 1, k + 1))
    info[0, 0] = -data.total_n / tau ** 2 + 3.0 * np.sum(_residual_ss(mu, data)) / tau ** 4
    cross = 2.0 * n * (m2 / mu ** 3 - m1 / mu ** 2) / tau ** 3
    info[0, 1:] = cross
    info[1:, 0] = cross
    info[1:, 1:] = np.diag(-n / mu ** 2 + n * (3.0 * m2 / mu ** 4 - 2.0 * m1 / mu ** 3) / tau ** 2)
    return info


def nuisance_info(theta, data):
    """The ``mu`` block of :func:`observed_info` (a diagonal matrix)."""
    return observed_info(theta, data)[1:, 1:].copy()


def moment_tau(data):
    """Pooled moment estimate used to start the MLE search."""
    sd2 = np.array([g.sd ** 2 for g in data.groups])
    return math.sqrt(np.sum((data.n - 1) * sd2) / np.sum(data.n * data.mean ** 2))


def fit_mle(data):
    """Maximum likelihood fit by maximizing the profile log-likelihood in tau.

    The constrained means are closed form, so locating the root of the
    profile score in one dimension gives the joint MLE.  The root is
    bracketed starting from ``[tau0 / 10, 10 tau0]`` around the pooled
    moment estimate and refined with Brent's method.

    Raises
    ------
    NegativeMeanGroup
        If some group mean is not positive.
    NoConvergence
        If the bracket cannot be found or the refinement fails.
    """
    if np.any(data.mean <= 0):
        raise NegativeMeanGroup("all group means must be positive")
    tau0 = moment_tau(data)
    lo, hi = tau0 / 10.0, tau0 * 10.0
    g_lo, g_hi = profile_score(lo, data), profile_score(hi, data)
    for _ in range(MAX_ITER):
        if g_lo > 0 and g_hi < 0:
            break
        if g_lo <= 0:
            lo /= 4.0
            g_lo = profile_score(lo, data)
        if g_hi >= 0:
            hi *= 4.0
            g_hi = profile_score(hi, data)
    else:
        raise NoConvergence(f"could not bracket the MLE of tau in [{lo:g}, {hi:g}]")

    tau_hat, info = optimize.brentq(
        profile_score, lo, hi, args=(data,), xtol=1e-15, rtol=8.9e-16,
        maxiter=MAX_ITER, full_output=True, disp=False)
    if not info.converged:
        raise NoConvergence(f"profile score root search failed: {info.flag}")

    theta_hat = constrained_theta(tau_hat, data)
    loglik = log_likelihood(theta_hat, data)
    grad = abs(profile_score(tau_hat, data))
    h = 1e-4 * tau_hat
    curvature = (profile_loglik(tau_hat + h, data) - 2.0 * loglik
                 + profile_loglik(tau_hat - h, data)) / (h * h)
    # the score at tau_hat is bounded by rounding of A / tau^3
    scale = data.total_n / tau_hat
    converged = bool(grad < max(1e-8, 64 * np.finfo(float).eps * scale))
    if not converged:
        raise NoConvergence(f"profile score {grad:.3g} at tau_hat={tau_hat!r}")
    return FitResult(theta_hat, loglik, int(info.iterations), converged, float(curvature))
