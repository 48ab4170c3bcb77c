"""Exact colouring oracles on small multigraphs.

Two exact counters for balanced k-colourings (all class sizes n/k):

  * count_balanced_colourings — production path. Writes the count as an
    inclusion-exclusion over vertex subsets,
        Y = sum_S (-1)^{n-|S|} * N_c(S)^k,
    where N_c(S) is the number of independent c-subsets of S (c = n/k):
    tuples of k independent c-sets inside S are N_c(S)^k, and sieving
    over S leaves exactly the tuples covering V, which are the ordered
    balanced colourings since the sizes force disjointness. N_c is one
    zeta transform over the subset lattice, so the whole count is
    O(2^n * n) and exact in integers.
  * count_balanced_colourings_backtracking — direct baktracking with
    colour-class budgets, one leaf per colouring. Kept as a slow
    cross-check; both counters count labelled colourings (no colour
    symmetry is quotiented out).

Properness ignores edge multiplicity except loops, which make every
count zero. chromatic_number treats parallel edges as single edges and
is undefined on loops.
"""

from itertools import product

import numpy as np

from .errors import GuardError, InputError

COUNT_MAX_VERTICES = 24
CHROMATIC_MAX_VERTICES = 40

_POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)
_LATTICE_CACHE = {}


def _subset_lattice(n):
    """Cached (masks, popcounts, odd-parity) arrays for the 2^n lattice."""
    if n not in _LATTICE_CACHE:
        masks = np.arange(1 << n, dtype=np.int64)
        pop = _POP16[masks & 0xFFFF] + _POP16[(masks >> 16) & 0xFFFF]
        odd = ((n - pop) & 1).astype(bool)
        _LATTICE_CACHE[n] = (masks, pop, odd)
        if len(_LATTICE_CACHE) > 8:
            _LATTICE_CACHE.pop(next(iter(_LATTICE_CACHE)))
    return _LATTICE_CACHE[n]


def _require_balanced_args(g, k, n_max):
    if k < 2:
        raise InputError("need k >= 2")
    if g.n % k != 0:
        raise InputError(f"k = {k} does not divide n = {g.n}")
    if g.n > n_max:
        raise GuardError(f"balanced-colouring search requires n <= {n_max}, got n = {g.n}")


def count_balanced_colourings(g, k):
    """Exact number of proper colourings with every class of size n/k."""
    _require_balanced_args(g, k, COUNT_MAX_VERTICES)
    if g.has_loop():
        return 0
    n = g.n
    c = n // k
    size = 1 << n
    masks, pop, odd = _subset_lattice(n)

    ind = pop == c
    for u, v in g.simple_edges():
        ind = ind & (((masks >> u) & (masks >> v) & 1) == 0)

    f = ind.astype(np.int64)
    # subset-sum (zeta) transform: N[S] = number of independent c-subsets of S
    for i in range(n):
        f = f.reshape(-1, 2, 1 << i)
        f[:, 1, :] += f[:, 0, :]
    f = f.reshape(size)

    max_n = int(f[-1])
    if max_n == 0:
        return 0
    if size * max_n**k < 2**62:
        powers = f**k
        return int(powers[~odd].sum() - powers[odd].sum())
    # big counts: group equal N values per parity and use Python integers
    total = 0
    for parity, sign in ((False, 1), (True, -1)):
        vals, cnts = np.unique(f[odd == parity], return_counts=True)
        total += sign * sum(int(cn) * int(v) ** k for v, cn in zip(vals, cnts))
    return total


def count_balanced_colourings_backtracking(g, k):
    """Reference counter: budgeted backtracking, one leaf per colouring.

    Vertices are taken in a saturation-first (DSATUR) static order; a
    branch dies as soon as any colour's remaining budget is exhausted.
    Exponential in the count itself, so only for small cross-checks.
    """
    _require_balanced_args(g, k, COUNT_MAX_VERTICES)
    if g.has_loop():
        return 0
    n = g.n
    c = n // k
    order = dsatur_order(g)
    colour = [-1] * n
    budget = [c] * k

    def rec(idx):
        if idx == n:
            return 1
        v = order[idx]
        forbidden = 0
        for u in g.adj[v]:
            if colour[u] >= 0:
                forbidden |= 1 << colour[u]
        total = 0
        for col in range(k):
            if budget[col] == 0 or (forbidden >> col) & 1:
                continue
            budget[col] -= 1
            colour[v] = col
            total += rec(idx + 1)
            colour[v] = -1
            budget[col] += 1
        return total

    return rec(0)


def exists_balanced_colouring(g, k):
    """True iff at least one balanced proper k-colouring exists.

    Early-exit search with budgets; prunes colour-label symmetry (safe
    for existence, unlike for the counter). Agrees with the counter
    being positive wherever both run.
    """
    _require_balanced_args(g, k, CHROMATIC_MAX_VERTICES)
    if g.has_loop():
        return False
    n = g.n
    c = n // k
    order = dsatur_order(g)
    colour = [-1] * n
    budget = [c] * k

    def rec(idx, used):
        if idx == n:
            return True
        v = order[idx]
        forbidden = set(colour[u] for u in g.adj[v] if colour[u] >= 0)
        limit = min(k, used + 1)
        for col in range(limit):
            if budget[col] == 0 or col in forbidden:
                continue
            budget[col] -= 1
            colour[v] = col
            if rec(idx + 1, max(used, col + 1)):
                return True
            colour[v] = -1
            budget[col] += 1
        return False

    return rec(0, 0)


def dsatur_order(g):
    """Static vertex order: repeatedly take the (saturation, degree)-max vertex."""
    n = g.n
    order = []
    placed = [False] * n
    neighbour_cols = [set() for _ in range(n)]
    degs = [len(g.adj[v]) for v in range(n)]
    for step in range(n):
        best = max(
            (v for v in range(n) if not placed[v]),
            key=lambda v: (len(neighbour_cols[v]), degs[v], -v),
        )
        placed[best] = True
        order.append(best)
        for u in g.adj[best]:
            neighbour_cols[u].add(step)
    return order


def _greedy_clique(g):
    """Greedy clique from each vertex in degree order; returns best size."""
    best = 1 if g.n else 0
    by_degree = sorted(range(g.n), key=lambda v: -len(g.adj[v]))
    for start in by_degree:
        clique = [start]
        for v in by_degree:
            if v != start and all(v in g.adj[u] for u in clique):
                clique.append(v)
        best = max(best, len(clique))
    return best


def _dsatur_upper_bound(g):
    order = dsatur_order(g)
    colour = {}
    for v in order:
        used = {colour[u] for u in g.adj[v] if u in colour}
        c = 0
        while c in used:
            c += 1
        colour[v] = c
    return (max(colour.values()) + 1) if colour else 0


def _colourable(g, k):
    """Backtracking k-colourability with dynamic saturation order and
    new-colour symmetry breaking."""
    n = g.n
    colour = [-1] * n

    def pick():
        best, key = -1, (-1, -1)
        for v in range(n):
            if colour[v] >= 0:
                continue
            sat = len({colour[u] for u in g.adj[v] if colour[u] >= 0})
            cand = (sat, len(g.adj[v]))
            if cand > key:
                best, key = v, cand
        return best

    def rec(assigned, used):
        if assigned == n:
            return True
        v = pick()
        forbidden = {colour[u] for u in g.adj[v] if colour[u] >= 0}
        if len(forbidden) >= k:
            return False
        for col in range(min(k, used + 1)):
            if col in forbidden:
                continue
            colour[v] = col
            if rec(assigned + 1, max(used, col + 1)):
                return True
            colour[v] = -1
        return False

    return rec(0, 0)


def chromatic_number(g):
    """Exact chromatic number; loops make it undefined, parallels collapse."""
    if g.has_loop():
        raise InputError("chromatic number undefined: multigraph has a loop")
    if g.n > CHROMATIC_MAX_VERTICES:
        raise GuardError(
            f"chromatic_number requires n <= {CHROMATIC_MAX_VERTICES}, got n = {g.n}"
        )
    if g.n == 0:
        return 0
    if not g.simple_edges():
        return 1
    lb = max(2, _greedy_clique(g))
    ub = _dsatur_upper_bound(g)
    for k in range(lb, ub):
        if _colourable(g, k):
            return k
    return ub


def brute_force_chromatic(g):
    """Independent oracle: smallest k admitting a proper colouring, found by
    scanning all k^n assignments. Only for tiny graphs."""
    if g.has_loop():
        raise InputError("chromatic number undefined: multigraph has a loop")
    if g.n == 0:
        return 0
    edges = g.simple_edges()
    if not edges:
        return 1
    for k in range(2, g.n + 1):
        for assignment in product(range(k), repeat=g.n):
            if all(assignment[u] != assignment[v] for u, v in edges):
                return k
    return g.n


def brute_force_proper_colourings(g, k):
    """Independent oracle: total (not necessarily balanced) proper k-colourings."""
    if g.has_loop():
        return 0
    edges = g.simple_edges()
    return sum(
        1
        for assignment in product(range(k), repeat=g.n)
        if all(assignment[u] != assignment[v] for u, v in edges)
    )
