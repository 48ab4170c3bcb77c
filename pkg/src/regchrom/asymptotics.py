"""Closed-form asymptotics and the chromatic-number predictor.

The predictor: for d >= 3, the chromatic number of a random d-regular
graph is (asymptotically almost surely) k-1 or k, where k is the
smallest integer with d < 2(k-1)*ln(k-1); the value k-1 is excluded
when additionally d > (2k-3)*ln(k-1). Both threshold comparisons are
certified with interval arithmetic at escalating precision, so the
verdict is provably correct even for d around 10^6 where the margins
are only a few units (ties cannot occur: the thresholds are irrational
for integer inputs).

Moment displays grow like k^n and are evaluated in log space with
40-digit working precision, returned as LogValue(log, value) with the
plain value populated only when it is representable in a double.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import iv, mp

from .errors import InputError

_LOG_REPRESENTABLE = 700.0
_WORK_DPS = 40


@dataclass(frozen=True)
class LogValue:
    """A positive quantity stored by its natural log."""

    log: float
    value: float | None

    @staticmethod
    def from_log(log_mpf):
        log = float(log_mpf)
        value = float(mpmath.exp(log_mpf)) if abs(log) < _LOG_REPRESENTABLE else None
        return LogValue(log, value)


@dataclass(frozen=True)
class ChromaticPrediction:
    d: int
    k: int
    second_condition: bool
    verdict: tuple

    def as_dict(self):
        return {
            "d": self.d,
            "k": self.k,
            "second_condition": self.second_condition,
            "verdict": list(self.verdict),
        }


@dataclass(frozen=True)
class CycleCorrection:
    m: int
    lam: Fraction
    delta: Fraction

    @property
    def multiplier(self):
        """Joint-moment factor per cycle: lam * (1 + delta)."""
        return self.lam * (1 + self.delta)


@dataclass(frozen=True)
class MolloyReedBound:
    d: int
    q: int
    excludes: bool
    weak_excludes: bool

    def __bool__(self):
        return self.excludes


def _certified_greater(value_fn, bound):
    """Decide value_fn() > bound with interval arithmetic; value_fn takes no
    args and evaluates under the ambient iv precision. Escalates precision
    until the interval excludes the bound, which must not equal the value."""
    for dps in (30, 60, 120, 240):
        iv.dps = dps
        val = value_fn()
        if val.b < bound:
            return False
        if val.a > bound:
            return True
    raise ArithmeticError("could not certify comparison; bound may equal the value")


def _threshold_exceeds_d(k, d):
    """Certified truth of d < 2(k-1)*ln(k-1)."""
    return _certified_greater(lambda: 2 * iv.mpf(k - 1) * iv.log(iv.mpf(k - 1)), d)


def _second_condition_holds(k, d):
    """Certified truth of d > (2k-3)*ln(k-1)."""
    return not _certified_greater(lambda: iv.mpf(2 * k - 3) * iv.log(iv.mpf(k - 1)), d)


def predict_chromatic(d):
    """Two-point (or one-point) prediction for the chromatic number."""
    d = int(d)
    if d < 3:
        raise InputError("predictor requires d >= 3")
    # float bracket for the smallest k with d < 2(k-1)ln(k-1), then certify
    lo, hi = 4, 8
    while 2 * (hi - 1) * math.log(hi - 1) <= d:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if 2 * (mid - 1) * math.log(mid - 1) > d:
            hi = mid
        else:
            lo = mid + 1
    k = lo
    while not _threshold_exceeds_d(k, d):
        k += 1
    while k > 4 and _threshold_exceeds_d(k - 1, d):
        k -= 1
    second = _second_condition_holds(k, d)
    verdict = (k,) if second else (k - 1, k)
    return ChromaticPrediction(d=d, k=k, second_condition=second, verdict=verdict)


def molloy_reed_excludes(d, q):
    """Lower-bound criteria: colourability with q colours is excluded when
    q*(1-1/q)^(d/2) < 1 (strict form), or when d > (2q-1)*ln(q) (weak form).
    Truthiness follows the strict form.

    The strict comparison is exact: squaring gives the rational test
    q^2 (1-1/q)^d < 1, so half-integer powers never force rounding (the
    value can equal 1, e.g. d = q = 2, and then does not exclude)."""
    if q < 1 or d < 1:
        raise InputError("need q >= 1 and d >= 1")
    excludes = Fraction(q) ** 2 * Fraction(q - 1, q) ** d < 1
    if q == 1:
        weak = d > 0
    else:
        weak = not _certified_greater(lambda: iv.mpf(2 * q - 1) * iv.log(iv.mpf(q)), d)
    return MolloyReedBound(d=d, q=q, excludes=excludes, weak_excludes=weak)


def within_theorem_range(d, k):
    """True iff (d, k) satisfies d < 2(k-1)ln(k-1), the regime in which the
    second-moment display and the predictor pairing are valid."""
    if k < 3:
        raise InputError("need k >= 3")
    return _threshold_exceeds_d(k, d)


def cycle_correction(d, k, m):
    """Exact lambda_m = (d-1)^m/(2m) and delta_m = (-1)^m/(k-1)^(m-1)."""
    if d < 3 or k < 3 or m < 1:
        raise InputError("need d >= 3, k >= 3, m >= 1")
    lam = Fraction((d - 1) ** m, 2 * m)
    delta = Fraction((-1) ** m, (k - 1) ** (m - 1))
    return CycleCorrection(m=m, lam=lam, delta=delta)


def _check_variance_domain(d, k):
    if k < 3:
        raise InputError("need k >= 3")
    if k * k - 2 * k - d + 2 <= 0:
        raise InputError(
            f"k^2 - 2k - d + 2 = {k * k - 2 * k - d + 2} must be positive"
        )


def sum_lambda_delta_sq(d, k):
    """Closed form of sum_m lambda_m * delta_m^2 =
    (k-1)^2 * ln((k-1)/sqrt(k^2-2k-d+2))."""
    _check_variance_domain(d, k)
    a = k * k - 2 * k - d + 2
    return (k - 1) ** 2 * (math.log(k - 1) - 0.5 * math.log(a))


def sum_lambda_delta_sq_series(d, k, terms=200):
    """Partial series sum_{m<=terms} lambda_m delta_m^2; the independent
    check of the closed form."""
    _check_variance_domain(d, k)
    total = 0.0
    ratio = (d - 1) / (k - 1) ** 2
    power = 1.0
    for m in range(1, terms + 1):
        power *= ratio
        total += (k - 1) ** 2 / 2 * power / m
    return total


def second_moment_ratio(d, k):
    """Limit of E[Y^2]/E[Y]^2: ((k-1)/sqrt(k^2-2k-d+2))^((k-1)^2).

    Agrees with exp(sum_lambda_delta_sq(d, k)) to machine precision; that
    identity is the small-subgraph-conditioning variance condition."""
    _check_variance_domain(d, k)
    a = k * k - 2 * k - d + 2
    try:
        return math.exp((k - 1) ** 2 * (math.log(k - 1) - 0.5 * math.log(a)))
    except OverflowError:
        return math.inf


def _require_display_args(n, d, k):
    if k < 3:
        raise InputError("need k >= 3")
    if n % k != 0:
        raise InputError(f"k = {k} does not divide n = {n}")
    if (n * d) % 2 != 0:
        raise InputError(f"dn = {n * d} is odd")


def ey_asym(n, d, k):
    """First-moment display: k^(k/2) ((k-1)/(2 pi (k-2)))^((k-1)/2)
    n^(-(k-1)/2) k^n (1-1/k)^(dn/2), in log space."""
    _require_display_args(n, d, k)
    with mp.workdps(_WORK_DPS):
        kk, nn, dd = mp.mpf(k), mp.mpf(n), mp.mpf(d)
        log = (
            kk / 2 * mp.log(kk)
            + (kk - 1) / 2 * (mp.log(kk - 1) - mp.log(2 * mp.pi * (kk - 2)))
            - (kk - 1) / 2 * mp.log(nn)
            + nn * mp.log(kk)
            + dd * nn / 2 * mp.log(1 - 1 / kk)
        )
        return LogValue.from_log(log)


def ey2_asym(n, d, k):
    """Second-moment display: k^k (k-1)^(k(k-1)) /
    ((k^2-2k-d+2)^((k-1)^2/2) (2 pi (k-2))^(k-1)) n^(-(k-1)) k^(2n)
    (1-1/k)^(dn), in log space. Requires d < 2(k-1)ln(k-1)."""
    _require_display_args(n, d, k)
    if not within_theorem_range(d, k):
        raise InputError(f"requires d < 2(k-1)ln(k-1); d = {d}, k = {k}")
    with mp.workdps(_WORK_DPS):
        kk, nn, dd = mp.mpf(k), mp.mpf(n), mp.mpf(d)
        a = kk * kk - 2 * kk - dd + 2
        log = (
            kk * mp.log(kk)
            + kk * (kk - 1) * mp.log(kk - 1)
            - (kk - 1) ** 2 / 2 * mp.log(a)
            - (kk - 1) * mp.log(2 * mp.pi * (kk - 2))
            - (kk - 1) * mp.log(nn)
            + 2 * nn * mp.log(kk)
            + dd * nn * mp.log(1 - 1 / kk)
        )
        return LogValue.from_log(log)


def coeff_asym(n, d, k, s):
    """Saddlepoint value C(s) of the single-colouring coefficient whose
    class degrees deviate from dn/k by a total of s (s even), log space."""
    _require_display_args(n, d, k)
    if s % 2 != 0:
        raise InputError(f"s must be even, got {s}")
    with mp.workdps(_WORK_DPS):
        kk, nn, dd, ss = mp.mpf(k), mp.mpf(n), mp.mpf(d), mp.mpf(s)
        log_base = mp.log(kk * (kk - 1)) - mp.log(dd * nn)
        log = (
            -kk * mp.log(2 * mp.pi)
            + (dd * nn + ss) / 2 * log_base
            + mp.log(2)
            + dd * nn / 2
            + kk / 2 * mp.log(2 * mp.pi)
            + kk / 2 * log_base
            - mp.log(2 * kk - 2) / 2
            - (kk - 1) / 2 * mp.log(kk - 2)
        )
        return LogValue.from_log(log)


def gamma_const(k):
    """Constant prefactor of the colouring-pair coefficient asymptotics:
    k^(k^2) (k-1)^(k(k-1)) / ((2 pi)^((k^2-1)/2) (k^2-2k+2)^((k-1)^2/2)
    (k-2)^(k-1)), log space."""
    if k < 3:
        raise InputError("need k >= 3")
    with mp.workdps(_WORK_DPS):
        kk = mp.mpf(k)
        log = (
            kk * kk * mp.log(kk)
            + kk * (kk - 1) * mp.log(kk - 1)
            - (kk * kk - 1) / 2 * mp.log(2 * mp.pi)
            - (kk - 1) ** 2 / 2 * mp.log(kk * kk - 2 * kk + 2)
            - (kk - 1) * mp.log(kk - 2)
        )
        return LogValue.from_log(log)


def det_H(d, k):
    """Determinant of the Gaussian quadratic form in the central-region
    sum: k^(2k-2) * ((k^2-2k-d+2)/(k^2-2k+2))^((k-1)^2), log space."""
    _check_variance_domain(d, k)
    with mp.workdps(_WORK_DPS):
        kk, dd = mp.mpf(k), mp.mpf(d)
        a = kk * kk - 2 * kk - dd + 2
        log = (2 * kk - 2) * mp.log(kk) + (kk - 1) ** 2 * (
            mp.log(a) - mp.log(kk * kk - 2 * kk + 2)
        )
        return LogValue.from_log(log)


def s1_closed_form(n, d, k):
    """Central-region contribution to E[Y^2], reassembled from gamma_const
    and det_H via the Laplace/Euler-Maclaurin steps:

        S1 = gamma(k) * (k-1)^(dn) / (n^(k^2/2-1/2) k^((d-2)n))
             * (n/k)^((k-1)^2) * (2 pi / n)^((k-1)^2/2) / sqrt(det H).

    Must agree with ey2_asym; that agreement is the self-consistency
    check of the constants."""
    _require_display_args(n, d, k)
    if not within_theorem_range(d, k):
        raise InputError(f"requires d < 2(k-1)ln(k-1); d = {d}, k = {k}")
    with mp.workdps(_WORK_DPS):
        kk, nn, dd = mp.mpf(k), mp.mpf(n), mp.mpf(d)
        log = (
            mp.mpf(gamma_const(k).log)
            + dd * nn * mp.log(kk - 1)
            - (kk * kk / 2 - mp.mpf(1) / 2) * mp.log(nn)
            - (dd - 2) * nn * mp.log(kk)
            + (kk - 1) ** 2 * (mp.log(nn) - mp.log(kk))
            + (kk - 1) ** 2 / 2 * (mp.log(2 * mp.pi) - mp.log(nn))
            - mp.mpf(det_H(d, k).log) / 2
        )
        return LogValue.from_log(log)
