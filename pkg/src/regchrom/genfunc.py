"""Exact-rational coefficient extraction and pre-asymptotic moment identities.

Everything here is exact: values are `fractions.Fraction` end to end,
no floating point. The workhorse is a coefficient extractor for
generating functions of the form prod_{(i,j) in E} exp(x_i x_j): the
coefficient of prod x_i^{c_i} equals

    sum over nonneg integer edge weights b_e with degree marginals c
    of prod_e 1/b_e!

which we compute as  (number of compatible point matchings) / prod c_i!,
with the matching count obtained by a label-by-label dynamic program
over residual degree vectors. Both coefficient flavours reduce to this
engine: the single-colouring one on the complete graph over k colour
classes, and the colouring-pair one on the k^2 labels (p,q) with
(p,q) ~ (r,s) compatible iff p != r and q != s.

First and second moments of the balanced-colouring count Y over the
space of (dn-1)!! pairings then follow from the exact identities

    E[Y]   = multinomial(n; n/k..) * (dn/k)!^k * coeff / (dn-1)!!
    E[Y^2] = sum over feasible colour-count matrices M of |T(M)| / (dn-1)!!

with |T(M)| assembled from factorial ratios and the pair coefficient.
"""

from fractions import Fraction
from functools import lru_cache
from math import factorial

from .errors import GuardError, InputError
from .pairing import double_factorial

COEFF_SINGLE_MAX_DEGREE = 300
COEFF_PAIR_MAX_DEGREE = 120
SECOND_MOMENT_MAX_MATRICES = 20_000


def _matching_count(degrees, neighbours):
    """Number of perfect matchings on points grouped into labelled classes.

    degrees[i] points carry label i; a pair may join labels i and j only
    when j is in neighbours[i]. Labels are processed in order: all pairs
    incident to label t and a later label are decided when t is reached,
    by distributing t's residual points over later compatible labels.
    """
    L = len(degrees)
    later = [sorted(u for u in neighbours[t] if u > t) for t in range(L)]
    memo = {}

    def rec(t, res):
        if t == L:
            return 1
        r = res[t]
        if r == 0:
            return rec(t + 1, res)
        key = (t, res[t:])
        hit = memo.get(key)
        if hit is not None:
            return hit
        targets = [u for u in later[t] if res[u] > 0]
        total = 0

        def distribute(idx, remaining, weight, res_now):
            nonlocal total
            if idx == len(targets):
                if remaining == 0:
                    total += weight * rec(t + 1, res_now)
                return
            u = targets[idx]
            cap = min(remaining, res_now[u])
            if idx == len(targets) - 1:
                lo = remaining if remaining <= cap else None
                if lo is None:
                    return
                choices = (remaining,)
            else:
                choices = range(cap + 1)
            for b in choices:
                if b:
                    w = weight * _binom(remaining, b) * _falling(res_now[u], b)
                    nxt = list(res_now)
                    nxt[u] -= b
                    distribute(idx + 1, remaining - b, w, tuple(nxt))
                else:
                    distribute(idx + 1, remaining, weight, res_now)

        # multinomial over t's points folds into binomials taken greedily
        start = list(res)
        start[t] = 0
        distribute(0, r, 1, tuple(start))
        memo[key] = total
        return total

    return rec(0, tuple(degrees))


@lru_cache(maxsize=None)
def _binom(n, k):
    return factorial(n) // (factorial(k) * factorial(n - k))


def _falling(n, k):
    return factorial(n) // factorial(n - k)


def _edge_coefficient(degrees, neighbours):
    total = sum(degrees)
    if total % 2:
        return Fraction(0)
    count = _matching_count(degrees, neighbours)
    denom = 1
    for c in degrees:
        denom *= factorial(c)
    return Fraction(count, denom)


def coeff_single(k, c):
    """Coefficient of prod_j x_j^{c_j} in exp(sum_{j<l} x_j x_l), exact.

    Equals the sum over symmetric nonnegative integer tables {b_jl} with
    row marginals c of prod 1/b_jl!.
    """
    if k < 2:
        raise InputError("need k >= 2")
    c = tuple(int(x) for x in c)
    if len(c) != k:
        raise InputError(f"degree vector must have length k = {k}")
    if any(x < 0 for x in c):
        raise InputError("degrees must be nonnegative")
    if sum(c) > COEFF_SINGLE_MAX_DEGREE:
        raise GuardError(
            f"coeff_single requires total degree <= {COEFF_SINGLE_MAX_DEGREE},"
            f" got {sum(c)}"
        )
    neighbours = [[u for u in range(k) if u != t] for t in range(k)]
    return _edge_coefficient(c, neighbours)


def coeff_pair(k, c):
    """Coefficient of prod x_{p,q}^{c_{p,q}} in
    exp((1/2) sum_{p!=r, q!=s} x_{p,q} x_{r,s}), exact.

    c is a k-by-k array of nonnegative integers. Labels with zero degree
    cannot meet any edge and are dropped before the matching DP runs.
    """
    if k < 2:
        raise InputError("need k >= 2")
    rows = [list(map(int, row)) for row in c]
    if len(rows) != k or any(len(r) != k for r in rows):
        raise InputError(f"degree table must be {k}x{k}")
    if any(x < 0 for row in rows for x in row):
        raise InputError("degrees must be nonnegative")
    total = sum(x for row in rows for x in row)
    if total > COEFF_PAIR_MAX_DEGREE:
        raise GuardError(
            f"coeff_pair requires total degree <= {COEFF_PAIR_MAX_DEGREE}, got {total}"
        )
    active = [(p, q) for p in range(k) for q in range(k) if rows[p][q] > 0]
    degrees = [rows[p][q] for p, q in active]
    neighbours = [
        [j for j, (r, s) in enumerate(active) if r != p and s != q]
        for p, q in active
    ]
    return _edge_coefficient(degrees, neighbours)


def exact_expected_Y(n, d, k):
    """Exact E[Y] over all (dn-1)!! pairings: the mean number of balanced
    k-colourings of the projected multigraph."""
    _require_moment_args(n, d, k)
    a = n * d // k
    coeff = coeff_single(k, (a,) * k)
    multinom = factorial(n) // factorial(n // k) ** k
    return Fraction(multinom * factorial(a) ** k, double_factorial(n * d - 1)) * coeff


def _require_moment_args(n, d, k):
    if n < 1 or d < 1:
        raise InputError("need n >= 1 and d >= 1")
    if k < 2:
        raise InputError("need k >= 2")
    if n % k != 0:
        raise InputError(f"k = {k} does not divide n = {n}")
    if (n * d) % 2 != 0:
        raise InputError(f"dn = {n * d} is odd; no pairings exist")


def _validate_colour_count(M, n, k):
    """Check M is doubly stochastic with entries in (k/n)Z; return the
    integer cell-count matrix N = M*n/k."""
    rows = [[Fraction(x) for x in row] for row in M]
    if len(rows) != k or any(len(r) != k for r in rows):
        raise InputError(f"colour count matrix must be {k}x{k}")
    if any(x < 0 for row in rows for x in row):
        raise InputError("colour count entries must be nonnegative")
    for i in range(k):
        if sum(rows[i]) != 1:
            raise InputError(f"row {i} of colour count matrix does not sum to 1")
        col = sum(rows[p][i] for p in range(k))
        if col != 1:
            raise InputError(f"column {i} of colour count matrix does not sum to 1")
    N = []
    for row in rows:
        cells = []
        for x in row:
            v = x * n / k
            if v.denominator != 1:
                raise InputError(
                    f"entry {x} times n/k = {Fraction(n, k)} is not an integer cell count"
                )
            cells.append(int(v))
        N.append(cells)
    return N


def exact_T(M, n, d):
    """Exact number of triples (pairing, colouring1, colouring2) whose
    colour overlap matrix is M: |T(M)|."""
    k = len(M)
    _require_moment_args(n, d, k)
    N = _validate_colour_count(M, n, k)
    return _exact_T_cells(N, n, d, k)


def _exact_T_cells(N, n, d, k):
    c = [[d * N[p][q] for q in range(k)] for p in range(k)]
    coeff = coeff_pair(k, c)
    if coeff == 0:
        return Fraction(0)
    value = Fraction(factorial(n))
    for p in range(k):
        for q in range(k):
            value *= Fraction(factorial(d * N[p][q]), factorial(N[p][q]))
    return value * coeff


def count_feasible_matrices(k, r):
    """Number of k-by-k nonnegative integer matrices with all row and
    column sums r (the feasible colour-count lattice size at n = r*k)."""

    @lru_cache(maxsize=None)
    def rec(rows_left, residuals):
        if rows_left == 0:
            return 1
        total = 0
        res = list(residuals)
        cap_later = (rows_left - 1) * r

        def fill(idx, remaining, state):
            nonlocal total
            if idx == k:
                if remaining == 0:
                    nxt = tuple(sorted(state))
                    if all(x <= cap_later for x in nxt):
                        total += rec(rows_left - 1, nxt)
                return
            hi = min(remaining, state[idx])
            for b in range(hi + 1):
                s = list(state)
                s[idx] -= b
                fill(idx + 1, remaining - b, s)

        fill(0, r, res)
        return total

    return rec(k, tuple([r] * k))


def _iter_row_sums(k, r, residuals, rows_left):
    """Rows with sum r, entrywise <= residuals, leaving every column
    residual reachable by the remaining rows; lexicographic order."""
    cap_later = (rows_left - 1) * r

    def fill(idx, remaining, row, state):
        if idx == k:
            if remaining == 0 and all(x <= cap_later for x in state):
                yield tuple(row), tuple(state)
            return
        hi = min(remaining, state[idx])
        for b in range(hi + 1):
            state[idx] -= b
            row.append(b)
            yield from fill(idx + 1, remaining - b, row, state)
            row.pop()
            state[idx] += b

    yield from fill(0, r, [], list(residuals))


def iter_feasible_matrices(k, r):
    """All k-by-k nonnegative integer matrices with row/col sums r,
    generated row by row with column-budget pruning, lexicographic."""

    def rec(rows, residuals, rows_left):
        if rows_left == 0:
            yield [list(row) for row in rows]
            return
        for row, nxt in _iter_row_sums(k, r, residuals, rows_left):
            rows.append(row)
            yield from rec(rows, nxt, rows_left - 1)
            rows.pop()

    yield from rec([], tuple([r] * k), k)


def exact_second_moment(n, d, k, max_matrices=SECOND_MOMENT_MAX_MATRICES):
    """Exact E[Y^2]: sum of |T(M)|/(dn-1)!! over all feasible colour
    count matrices M (doubly stochastic, entries in (k/n)Z).

    Work guard: refuses when the feasible-M count exceeds max_matrices.
    For n = k every feasible M is a permutation matrix and |T| is
    invariant under colour relabelling, so the sum collapses to
    k! * |T(identity)| without enumeration.
    """
    _require_moment_args(n, d, k)
    r = n // k
    pairings = double_factorial(n * d - 1)
    if r == 1:
        identity = [[1 if p == q else 0 for q in range(k)] for p in range(k)]
        return Fraction(factorial(k)) * _exact_T_cells(identity, n, d, k) / pairings

    n_matrices = count_feasible_matrices(k, r)
    if n_matrices > max_matrices:
        raise GuardError(
            f"exact_second_moment work guard: {n_matrices} feasible colour-count"
            f" matrices exceeds the bound of {max_matrices}"
        )
    total = Fraction(0)
    for N in iter_feasible_matrices(k, r):
        total += _exact_T_cells(N, n, d, k)
    return total / pairings


def count_colour_types(k, m):
    """Number of proper colour sequences on a rooted oriented m-cycle:
    (k-1)^m + (k-1)(-1)^m; satisfies t_m + t_{m-1} = k(k-1)^{m-1}, t_1 = 0."""
    if k < 2 or m < 1:
        raise InputError("need k >= 2 and m >= 1")
    return (k - 1) ** m + (k - 1) * (-1) ** m
