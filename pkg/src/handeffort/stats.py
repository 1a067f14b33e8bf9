"""Aggregation of per-sample scores and Pearson / partial correlation with
two-sided Student-t p-values."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product
from typing import IO, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateControl, MissingLetter, TooFewPoints, ZeroVariance
from .kinematics import JointAngleVector, handshape_distance

CORRELATION_HEADER = ["analysis", "r", "p", "n"]

HD_AGGREGATIONS = ("cross_product", "mean_vector")

# continued-fraction controls for the incomplete beta function
_CF_MAX_ITER = 500
_CF_EPS = 1e-16
_CF_TINY = 1e-300


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int


def mean_by_key(samples: Iterable[tuple[Hashable, float]]) -> dict:
    """Arithmetic mean of the values of each key, keys in first-seen order."""
    sums: dict = {}
    counts: dict = {}
    for k, v in samples:
        sums[k] = sums.get(k, 0.0) + float(v)
        counts[k] = counts.get(k, 0) + 1
    return {k: sums[k] / counts[k] for k in sums}


def mean_pair_distance(samples_by_letter: Mapping[str, Sequence[JointAngleVector]], pair,
                       aggregation: str = "cross_product") -> float:
    """Handshape distance between two letters with several samples each.

    ``cross_product`` averages the distance over every sample pairing;
    ``mean_vector`` takes the distance between the per-letter mean angle
    vectors.
    """
    a, b = pair
    for k in (a, b):
        if not samples_by_letter.get(k):
            raise MissingLetter(f"no samples for letter {k!r}")
    sa, sb = samples_by_letter[a], samples_by_letter[b]
    if aggregation == "cross_product":
        return float(np.mean([handshape_distance(x, y) for x, y in product(sa, sb)]))
    if aggregation == "mean_vector":
        ma = JointAngleVector(np.mean([x.angles for x in sa], axis=0))
        mb = JointAngleVector(np.mean([x.angles for x in sb], axis=0))
        return handshape_distance(ma, mb)
    raise ValueError(f"aggregation must be one of {HD_AGGREGATIONS}")


# ---------------------------------------------------------------------------
# regularized incomplete beta and the t test
# ---------------------------------------------------------------------------


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the fraction converges fast only on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def correlation_p_value(r: float, df: int) -> float:
    """Two-sided p for a correlation coefficient with ``df`` degrees of
    freedom, t = r * sqrt(df / (1 - r^2))."""
    if abs(r) >= 1.0:
        return 0.0
    # df / (df + t^2) simplifies to 1 - r^2
    return min(1.0, max(0.0, betainc(df / 2.0, 0.5, (1.0 - r) * (1.0 + r))))


# ---------------------------------------------------------------------------
# correlation
# ---------------------------------------------------------------------------


def _series(*xs) -> list[np.ndarray]:
    arrs = [np.asarray(x, dtype=float).reshape(-1) for x in xs]
    n = len(arrs[0])
    if any(len(a) != n for a in arrs):
        raise ValueError("series must have equal length")
    for a in arrs:
        if not np.all(np.isfinite(a)):
            raise ValueError("series must be finite")
    return arrs


def _r(x: np.ndarray, y: np.ndarray) -> float:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ZeroVariance("correlation undefined for a constant series")
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy))))
    return max(-1.0, min(1.0, r))


def pearson(x, y) -> CorrelationResult:
    x, y = _series(x, y)
    n = len(x)
    if n < 3:
        raise TooFewPoints(f"pearson needs at least 3 points, got {n}")
    r = _r(x, y)
    return CorrelationResult(r, correlation_p_value(r, n - 2), n)


def partial_correlation(x, y, z) -> CorrelationResult:
    """Correlation of ``x`` and ``y`` with the linear effect of ``z`` removed."""
    x, y, z = _series(x, y, z)
    n = len(x)
    if n < 4:
        raise TooFewPoints(f"partial correlation needs at least 4 points, got {n}")
    rxy, rxz, ryz = _r(x, y), _r(x, z), _r(y, z)
    if 1.0 - abs(rxz) < 1e-12 or 1.0 - abs(ryz) < 1e-12:
        raise DegenerateControl("control variable is perfectly correlated with an input")
    r = (rxy - rxz * ryz) / math.sqrt((1.0 - rxz ** 2) * (1.0 - ryz ** 2))
    r = max(-1.0, min(1.0, r))
    return CorrelationResult(r, correlation_p_value(r, n - 3), n)


def write_correlations(rows: Iterable[tuple[str, CorrelationResult | None, int]], out: IO[str]) -> None:
    """One row per analysis; an analysis that could not be computed keeps
    its ``n`` and leaves ``r`` and ``p`` empty."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CORRELATION_HEADER)
    for name, res, n in rows:
        if res is None:
            w.writerow([name, "", "", n])
        else:
            w.writerow([name, repr(res.r), repr(res.p_value), res.n])
