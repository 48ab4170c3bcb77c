"""Sampling experiments connecting the exact oracles to the asymptotics.

Every sample draws a pairing from its own counter-based RNG stream
(stream index = global sample index), computes the balanced-colouring
count Y and the short-cycle counts X_m exactly, and accumulates integer
sums; merging partial sums is exact addition, so reports are
bit-identical for any worker partition of the index range. Standard
errors come from the same integer accumulators (sample variance / N,
delta method for ratios).

Joint cycle moments use falling factorials: for a requested (m, p) the
per-sample weight is Y * prod_m [X_m]_p, and the reported estimate is
the ratio E[Y * prod [X_m]_p] / E[Y] with its theory column
prod (lambda_m (1 + delta_m))^p. Since loops kill every colouring,
any spec involving m = 1 accumulates exactly zero.

At desk scale (dn <= 16) sampling can be replaced by full enumeration
over all (dn-1)!! pairings, which reproduces the exact oracle values as
rational means; that mode backs the oracle-equivalence tests.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import asymptotics, genfunc
from .coloring import count_balanced_colourings, chromatic_number
from .errors import GuardError, InputError
from .pairing import count_cycles, enumerate_pairings, is_simple, pairing_rng, sample_pairing, to_multigraph

MOMENT_MAX_VERTICES = 24
CHI_MAX_VERTICES = 40


def falling_factorial(x, p):
    out = 1
    for i in range(p):
        out *= x - i
    return out


@dataclass
class _Sums:
    """Exact integer accumulators for moment estimation."""

    n_samples: int = 0
    y: int = 0
    y2: int = 0
    y3: int = 0
    y4: int = 0
    yf: list = field(default_factory=list)      # sum of Y*F per cycle spec
    yf_sq: list = field(default_factory=list)   # sum of (Y*F)^2
    yf_y: list = field(default_factory=list)    # sum of (Y*F)*Y

    @staticmethod
    def zero(n_specs):
        return _Sums(yf=[0] * n_specs, yf_sq=[0] * n_specs, yf_y=[0] * n_specs)

    def add(self, other):
        self.n_samples += other.n_samples
        self.y += other.y
        self.y2 += other.y2
        self.y3 += other.y3
        self.y4 += other.y4
        for i in range(len(self.yf)):
            self.yf[i] += other.yf[i]
            self.yf_sq[i] += other.yf_sq[i]
            self.yf_y[i] += other.yf_y[i]
        return self

    def record(self, y, fs):
        self.n_samples += 1
        self.y += y
        y2 = y * y
        self.y2 += y2
        self.y3 += y2 * y
        self.y4 += y2 * y2
        for i, f in enumerate(fs):
            yf = y * f
            self.yf[i] += yf
            self.yf_sq[i] += yf * yf
            self.yf_y[i] += yf * y


def _measure(g, k, cycle_spec, m_max):
    y = count_balanced_colourings(g, k)
    if m_max:
        xs = count_cycles(g, m_max)
        fs = [
            math.prod(falling_factorial(xs[m], p) for m, p in spec)
            for spec in cycle_spec
        ]
    else:
        fs = []
    return y, fs


def _moment_chunk(args):
    n, d, k, cycle_spec, m_max, seed, start, stop = args
    sums = _Sums.zero(len(cycle_spec))
    for idx in range(start, stop):
        g = to_multigraph(sample_pairing(n, d, seed, stream=idx))
        sums.record(*_measure(g, k, cycle_spec, m_max))
    return sums


def _ratio_se(num_sum, num_sq, cross, den_sum, den_sq, n):
    """Delta-method standard error of (mean num)/(mean den)."""
    a = num_sum / n
    b = den_sum / n
    if b == 0:
        return float("nan")
    var_num = num_sq / n - a * a
    var_den = den_sq / n - b * b
    cov = cross / n - a * b
    var = (var_num - 2 * (a / b) * cov + (a / b) ** 2 * var_den) / (b * b)
    return math.sqrt(max(var, 0.0) / n)


def _second_moment_ratio_se(y, y2, y3, y4, n):
    """Delta-method standard error of (mean Y^2)/(mean Y)^2."""
    a = y2 / n
    b = y / n
    if b == 0:
        return float("nan")
    var_a = y4 / n - a * a
    var_b = y2 / n - b * b
    cov = y3 / n - a * b
    var = var_a / b**4 - 4 * a * cov / b**5 + 4 * a * a * var_b / b**6
    return math.sqrt(max(var, 0.0) / n)


@dataclass
class MomentReport:
    n: int
    d: int
    k: int
    n_samples: int
    seed: object
    mode: str
    cycle_spec: tuple
    ey: dict = field(default_factory=dict)
    ratio_y2: dict = field(default_factory=dict)
    joint: list = field(default_factory=list)
    totals: dict = field(default_factory=dict)  # exact integer accumulators

    def as_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "k": self.k,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "mode": self.mode,
            "cycle_spec": [list(map(list, spec)) for spec in self.cycle_spec],
            "ey": self.ey,
            "ratio_y2": self.ratio_y2,
            "joint": self.joint,
            "totals": self.totals,
        }


def _normalise_cycle_spec(cycle_spec):
    specs = []
    for spec in cycle_spec or ():
        if isinstance(spec[0], int):
            spec = (spec,)
        specs.append(tuple((int(m), int(p)) for m, p in spec))
    return tuple(specs)


def _theory_columns(n, d, k, specs):
    ey_th = asymptotics.ey_asym(n, d, k).value if k >= 3 else None
    try:
        ratio_th = asymptotics.second_moment_ratio(d, k)
    except InputError:
        ratio_th = None
    joint_th = []
    for spec in specs:
        if d >= 3 and k >= 3:
            val = 1.0
            for m, p in spec:
                val *= float(asymptotics.cycle_correction(d, k, m).multiplier) ** p
            joint_th.append(val)
        else:
            joint_th.append(None)
    return ey_th, ratio_th, joint_th


def _exact_columns(n, d, k):
    try:
        ey = genfunc.exact_expected_Y(n, d, k)
    except GuardError:
        ey = None
    try:
        ey2 = genfunc.exact_second_moment(n, d, k)
    except GuardError:
        ey2 = None
    ratio = ey2 / ey**2 if (ey not in (None, 0) and ey2 is not None) else None
    return ey, ratio


def estimate_moments(n, d, k, n_samples, cycle_spec=((2, 1),), seed=0, workers=1):
    """Monte Carlo moment report over n_samples pairings.

    cycle_spec is a sequence of joint specs; each spec is an (m, p) pair
    or a tuple of them, requesting E[Y * prod [X_m]_p] / E[Y]."""
    if n > MOMENT_MAX_VERTICES:
        raise GuardError(f"estimate_moments requires n <= {MOMENT_MAX_VERTICES}")
    if n_samples < 100:
        raise GuardError("estimate_moments requires n_samples >= 100")
    if k < 2 or n % k:
        raise InputError(f"need k >= 2 dividing n; got n = {n}, k = {k}")
    specs = _normalise_cycle_spec(cycle_spec)
    m_max = max((m for spec in specs for m, _ in spec), default=0)

    chunks = []
    workers = max(1, int(workers))
    step = -(-n_samples // workers)
    for start in range(0, n_samples, step):
        chunks.append((n, d, k, specs, m_max, seed, start, min(start + step, n_samples)))
    if workers == 1 or len(chunks) == 1:
        partials = [_moment_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_moment_chunk, chunks))
    sums = _Sums.zero(len(specs))
    for part in partials:
        sums.add(part)
    return _assemble_report(n, d, k, seed, "sample", specs, sums)


def enumerate_moments(n, d, k, cycle_spec=((2, 1),)):
    """Full-enumeration twin of estimate_moments: exact rational means
    over all (dn-1)!! pairings; the oracle-equivalence mode."""
    if k < 2 or n % k:
        raise InputError(f"need k >= 2 dividing n; got n = {n}, k = {k}")
    specs = _normalise_cycle_spec(cycle_spec)
    m_max = max((m for spec in specs for m, _ in spec), default=0)
    sums = _Sums.zero(len(specs))
    for p in enumerate_pairings(n, d):
        sums.record(*_measure(to_multigraph(p), k, specs, m_max))
    return _assemble_report(n, d, k, None, "enumerate", specs, sums)


def _assemble_report(n, d, k, seed, mode, specs, sums):
    N = sums.n_samples
    ey_th, ratio_th, joint_th = _theory_columns(n, d, k, specs)
    ey_exact, ratio_exact = _exact_columns(n, d, k)
    report = MomentReport(
        n=n, d=d, k=k, n_samples=N, seed=seed, mode=mode, cycle_spec=specs
    )
    report.totals = {"n": N, "y": sums.y, "y2": sums.y2, "yf": list(sums.yf)}
    exact = mode == "enumerate"

    mean_y = Fraction(sums.y, N)
    se_y = (
        None
        if exact
        else math.sqrt(max(float(Fraction(sums.y2, N) - mean_y**2), 0.0) / N)
    )
    report.ey = {
        "estimate": float(mean_y),
        "exact_mean": f"{mean_y}" if exact else None,
        "se": se_y,
        "theory_asym": ey_th,
        "exact_oracle": None if ey_exact is None else float(ey_exact),
    }

    ratio = None if sums.y == 0 else float(Fraction(sums.y2 * N, sums.y**2))
    se_ratio = (
        None
        if exact or sums.y == 0
        else _second_moment_ratio_se(sums.y, sums.y2, sums.y3, sums.y4, N)
    )
    report.ratio_y2 = {
        "estimate": ratio,
        "se": se_ratio,
        "theory_asym": ratio_th,
        "exact_oracle": None if ratio_exact is None else float(ratio_exact),
    }

    for i, spec in enumerate(specs):
        if sums.y == 0:
            est, se = None, None
        else:
            est = float(Fraction(sums.yf[i], sums.y))
            se = (
                None
                if exact
                else _ratio_se(sums.yf[i], sums.yf_sq[i], sums.yf_y[i], sums.y, sums.y2, N)
            )
        report.joint.append(
            {
                "spec": [list(mp) for mp in spec],
                "estimate": est,
                "exact_mean": f"{Fraction(sums.yf[i], sums.y)}" if exact and sums.y else None,
                "se": se,
                "theory_asym": joint_th[i],
                "yf_total": sums.yf[i],
            }
        )
    return report


@dataclass
class ChiFrequencyTable:
    n: int
    d: int
    n_samples: int
    seed: object
    counts: dict
    rejections: int
    predicted_verdict: list

    def as_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "counts": {str(chi): c for chi, c in sorted(self.counts.items())},
            "rejections": self.rejections,
            "predicted_verdict": self.predicted_verdict,
        }


def _chi_chunk(args):
    n, d, seed, start, stop = args
    counts = {}
    rejections = 0
    for idx in range(start, stop):
        g = to_multigraph(sample_pairing(n, d, seed, stream=idx))
        if not is_simple(g):
            rejections += 1
            continue
        chi = chromatic_number(g)
        counts[chi] = counts.get(chi, 0) + 1
    return counts, rejections


def chi_frequency(n, d, n_samples, seed=0, workers=1):
    """Draw n_samples pairings, discard the non-simple ones, and tabulate
    exact chromatic numbers of the rest."""
    if n > CHI_MAX_VERTICES:
        raise GuardError(f"chi_frequency requires n <= {CHI_MAX_VERTICES}")
    if n_samples < 10:
        raise GuardError("chi_frequency requires n_samples >= 10")
    chunks = []
    workers = max(1, int(workers))
    step = -(-n_samples // workers)
    for start in range(0, n_samples, step):
        chunks.append((n, d, seed, start, min(start + step, n_samples)))
    if workers == 1 or len(chunks) == 1:
        partials = [_chi_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_chi_chunk, chunks))
    counts = {}
    rejections = 0
    for part_counts, part_rej in partials:
        rejections += part_rej
        for chi, c in part_counts.items():
            counts[chi] = counts.get(chi, 0) + c
    verdict = list(asymptotics.predict_chromatic(d).verdict) if d >= 3 else []
    return ChiFrequencyTable(
        n=n,
        d=d,
        n_samples=n_samples,
        seed=seed,
        counts=counts,
        rejections=rejections,
        predicted_verdict=verdict,
    )


def convergence_study(d, k, n_list, seed=None, what="ey"):
    """Exact-versus-asymptotic table; the ratio column is the convergence
    diagnostic toward 1. what = "ey" compares exact_expected_Y with its
    display; "coeff" compares the exact coefficient with C(0).
    Deterministic; the seed argument is accepted for interface
    uniformity and unused."""
    import mpmath

    rows = []
    for n in n_list:
        if what == "coeff":
            exact = genfunc.coeff_single(k, (d * n // k,) * k)
            asym = asymptotics.coeff_asym(n, d, k, 0)
        elif what == "ey":
            exact = genfunc.exact_expected_Y(n, d, k)
            asym = asymptotics.ey_asym(n, d, k)
        else:
            raise InputError(f"unknown study {what!r}; expected 'ey' or 'coeff'")
        if exact <= 0:
            ratio = 0.0
        else:
            log_exact = mpmath.log(mpmath.mpf(exact.numerator)) - mpmath.log(
                mpmath.mpf(exact.denominator)
            )
            ratio = float(mpmath.exp(log_exact - asym.log))
        rows.append(
            {
                "n": n,
                "exact": f"{exact}",
                "exact_float": float(exact) if abs(asym.log) < 700 else None,
                "asymptotic": asym.value,
                "ratio": ratio,
            }
        )
    return rows
