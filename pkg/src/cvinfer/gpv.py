"""Generalized pivotal quantities for the common CV.

Three pivotals are drawn by Monte Carlo from ``U_i ~ chi2(n_i - 1)``,
``Z_i ~ N(0, 1)`` and ``Z ~ N(0, 1)``:

* GV1: ``sum (n_i - 1) / R_i / sum (n_i - 1)`` with
  ``R_i = (xbar_i / s_i) sqrt(U_i / (n_i - 1)) - Z_i / d_i``, where ``d_i`` is
  ``n_i`` or ``sqrt(n_i)`` depending on :class:`GV1Variant`;
* GV2: ``n / (sum n_i sqrt(U_i / (n_i - 1)) xbar_i / s_i - sqrt(n) Z)``;
* GV3: the average of the GV1 and GV2 draws built on the same ``U_i``.

Draws are produced in blocks of ``BLOCK`` replicates; block ``b`` reads the
stream ``(seed, b)``, so the pool does not depend on how blocks are
scheduled.
"""

from dataclasses import dataclass
import enum
import math
import warnings

import numpy as np

from .dist import RngStream, chi_square, std_normal
from .errors import InvalidParameter, ZeroPivotalDenominator
from .interval import IntervalEstimate

BLOCK = 4096
MAX_REDRAWS = 100


class GV1Variant(str, enum.Enum):
    AS_PRINTED = "as_printed"  # Z_i / n_i
    SQRT_N = "sqrt_n"  # Z_i / sqrt(n_i)


METHODS = ("GV1", "GV2", "GV3")


@dataclass(frozen=True)
class PivotalConfig:
    draws: int = 100_000
    gv1_variant: GV1Variant = GV1Variant.SQRT_N
    seed: int = 0

    def __post_init__(self):
        if self.draws < 1:
            raise InvalidParameter(f"draws must be positive, got {self.draws}")
        object.__setattr__(self, "gv1_variant", GV1Variant(self.gv1_variant))


@dataclass(frozen=True, eq=False)
class PivotalSample:
    values: np.ndarray
    method: str
    redraws: int = 0


def _gv1_div(n, variant):
    return n if GV1Variant(variant) is GV1Variant.AS_PRINTED else np.sqrt(n)


def _gv1(ratio, n, U, Zi, variant):
    R = ratio * np.sqrt(U / (n - 1)) - Zi / _gv1_div(n, variant)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sum((n - 1) / R, axis=-1) / np.sum(n - 1)


def _gv2(ratio, n, U, Z):
    denom = np.sum(n * np.sqrt(U / (n - 1)) * ratio, axis=-1) - math.sqrt(np.sum(n)) * Z
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sum(n) / denom


def _inputs(data):
    return data.n, data.mean / data.sd


def draw_gv1(data, u, z, variant=GV1Variant.SQRT_N):
    """GV1 pivotal for given chi-square draws ``u`` and normal draws ``z``."""
    n, ratio = _inputs(data)
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    R = ratio * np.sqrt(u / (n - 1)) - z / _gv1_div(n, variant)
    if np.any(R == 0):
        raise ZeroPivotalDenominator("some R_i is exactly zero")
    return float(np.sum((n - 1) / R) / np.sum(n - 1))


def draw_gv2(data, u, z):
    """GV2 pivotal for chi-square draws ``u`` and one normal draw ``z``."""
    n, ratio = _inputs(data)
    u = np.asarray(u, dtype=float)
    denom = np.sum(n * np.sqrt(u / (n - 1)) * ratio) - math.sqrt(np.sum(n)) * float(z)
    if denom == 0:
        raise ZeroPivotalDenominator("GV2 denominator is exactly zero")
    return float(np.sum(n) / denom)


def draw_gv3(g1, g2):
    return 0.5 * g1 + 0.5 * g2


def _block(data, variant, stream, size):
    n, ratio = _inputs(data)
    k = data.k
    gen = stream.generator()
    U = chi_square(gen, np.broadcast_to(n - 1, (size, k)))
    Zi = std_normal(gen, (size, k))
    Z = std_normal(gen, size)
    g1 = _gv1(ratio, n, U, Zi, variant)
    g2 = _gv2(ratio, n, U, Z)
    return {"GV1": g1, "GV2": g2, "GV3": draw_gv3(g1, g2)}


def _bad(vals):
    return ~np.isfinite(vals) | (vals == 0)


def pivotal_samples(data, cfg, methods=METHODS):
    """Draw ``cfg.draws`` replicates of each requested pivotal.

    All pivotals are computed from the same underlying draws.  A replicate
    whose value is not finite is replaced, for that pivotal only, by a fresh
    draw from a bumped substream; the number replaced is recorded.
    """
    methods = [m.upper() for m in methods]
    for m in methods:
        if m not in METHODS:
            raise InvalidParameter(f"unknown pivotal method {m!r}")
    out = {m: np.empty(cfg.draws) for m in methods}
    redraws = dict.fromkeys(methods, 0)
    for b, start in enumerate(range(0, cfg.draws, BLOCK)):
        size = min(BLOCK, cfg.draws - start)
        block = _block(data, cfg.gv1_variant, RngStream(cfg.seed, b, 0), size)
        for m in methods:
            vals = block[m]
            attempt = 0
            while (bad := _bad(vals)).any():
                attempt += 1
                if attempt > MAX_REDRAWS:
                    raise ZeroPivotalDenominator("could not obtain finite pivotal draws")
                redraws[m] += int(bad.sum())
                fresh = _block(data, cfg.gv1_variant,
                               RngStream(cfg.seed, b, 0, attempt), int(bad.sum()))
                vals[bad] = fresh[m]
            out[m][start:start + size] = vals
    return {m: PivotalSample(out[m], m, redraws[m]) for m in methods}


def pivotal_sample(data, method, cfg):
    method = method.upper()
    return pivotal_samples(data, cfg, (method,))[method]


def _interval_from_sample(sample, level, cfg):
    lower, upper = percentile_interval(sample.values, level)
    diag = {"draws": cfg.draws, "seed": cfg.seed, "redraws": sample.redraws}
    if sample.method != "GV2":
        diag["gv1_variant"] = cfg.gv1_variant.value
    if cfg.draws >= 1000:
        diag["mc_stderr"] = _batch_stderr(sample.values, level)
    return IntervalEstimate(sample.method, level, lower, upper, diag)


def percentile_interval(values, level):
    """Equal-tailed percentile interval (linear interpolation, type 7)."""
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level!r}")
    alpha = 1.0 - level
    lo, hi = np.quantile(np.asarray(values, dtype=float), [alpha / 2.0, 1.0 - alpha / 2.0])
    return float(lo), float(hi)


def _batch_stderr(values, level, batches=20):
    # spread of batch quantiles, rescaled to the full pool
    parts = np.array_split(np.asarray(values), batches)
    ends = np.array([percentile_interval(p, level) for p in parts])
    return tuple(float(s) for s in ends.std(axis=0, ddof=1) / math.sqrt(batches))


def gpv_ci(data, method, level=0.95, cfg=None):
    """Percentile interval from the pivotal draws of one method."""
    cfg = cfg if cfg is not None else PivotalConfig()
    if cfg.draws < 1000:
        warnings.warn(f"only {cfg.draws} pivotal draws; percentile endpoints will be noisy",
                      stacklevel=2)
    return _interval_from_sample(pivotal_sample(data, method, cfg), level, cfg)


def gpv_cis(data, level=0.95, cfg=None, methods=METHODS):
    """Intervals for several pivotals sharing one set of draws."""
    cfg = cfg if cfg is not None else PivotalConfig()
    samples = pivotal_samples(data, cfg, methods)
    return {m: _interval_from_sample(s, level, cfg) for m, s in samples.items()}


def generalized_pvalue(values, tau0):
    values = np.asarray(values)
    above = np.mean(values > tau0)
    below = np.mean(values < tau0)
    return float(min(1.0, 2.0 * min(above, below)))


def gpv_pvalue(data, method, tau0, cfg=None):
    """Two-sided generalized p-value, ``2 min(P(G > tau0), P(G < tau0))``."""
    cfg = cfg if cfg is not None else PivotalConfig()
    return generalized_pvalue(pivotal_sample(data, method, cfg).values, tau0)
