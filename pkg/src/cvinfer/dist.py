"""Random streams and the few distributions the package needs.

Streams are keyed by ``(master_seed, stream_id, substream)`` and backed by
numpy's counter-based Philox generator, so any replication can be
regenerated independently of the order in which others were produced.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from .errors import DomainError, InvalidParameter, OutOfBracket

WEIBULL_SHAPE_BRACKET = (0.05, 500.0)


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0
    substream: int = 0
    attempt: int = 0

    def generator(self):
        key = [int(self.stream_id) % 2 ** 64, int(self.substream) % 2 ** 64]
        if self.attempt:
            key.append(int(self.attempt))
        ss = np.random.SeedSequence(int(self.master_seed) % 2 ** 64, spawn_key=tuple(key))
        return np.random.Generator(np.random.Philox(ss))

    def bumped(self):
        """The same key with the redraw counter advanced."""
        return RngStream(self.master_seed, self.stream_id, self.substream, self.attempt + 1)


def _gen(stream):
    return stream.generator() if isinstance(stream, RngStream) else stream


def std_normal(stream, size=None):
    return _gen(stream).standard_normal(size)


def chi_square(stream, df, size=None):
    """Chi-square draws as ``Gamma(df / 2, scale=2)``."""
    df = np.asarray(df, dtype=float)
    if np.any(df <= 0):
        raise InvalidParameter(f"degrees of freedom must be positive, got {df!r}")
    return _gen(stream).gamma(df / 2.0, 2.0, size)


def weibull(stream, shape, scale, size=None):
    """Weibull draws by inversion, ``scale * (-log U) ** (1 / shape)``."""
    shape = np.asarray(shape, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if np.any(shape <= 0) or np.any(scale <= 0):
        raise InvalidParameter("Weibull shape and scale must be positive")
    # 1 - U lies in (0, 1], keeping the log finite
    u = 1.0 - _gen(stream).random(size)
    return scale * (-np.log(u)) ** (1.0 / shape)


def normal_cdf(x):
    return float(special.ndtr(x)) if np.ndim(x) == 0 else special.ndtr(x)


def normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0) & (p_arr < 1))):
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    q = special.ndtri(p_arr)
    return float(q) if np.ndim(p) == 0 else q


def log_gamma(x):
    return special.gammaln(x)


def weibull_cv(shape):
    """Coefficient of variation of a Weibull distribution with this shape."""
    a = np.asarray(shape, dtype=float)
    cv2 = np.expm1(log_gamma(1.0 + 2.0 / a) - 2.0 * log_gamma(1.0 + 1.0 / a))
    return np.sqrt(cv2)


def weibull_shape_for_cv(tau):
    """Weibull shape whose coefficient of variation equals ``tau``.

    The CV falls strictly as the shape grows, so plain bisection (in
    log-shape) on the default bracket converges.
    """
    if not tau > 0:
        raise InvalidParameter(f"tau must be positive, got {tau!r}")
    lo, hi = WEIBULL_SHAPE_BRACKET
    cv_lo, cv_hi = weibull_cv(lo), weibull_cv(hi)
    if not cv_hi <= tau <= cv_lo:
        raise OutOfBracket(
            f"CV {tau!r} is outside [{cv_hi:.4g}, {cv_lo:.4g}] reachable by shapes "
            f"in [{lo}, {hi}]")
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = 0.5 * (llo + lhi)
        if mid in (llo, lhi):
            break
        if weibull_cv(math.exp(mid)) > tau:
            llo = mid
        else:
            lhi = mid
    return math.exp(0.5 * (llo + lhi))
