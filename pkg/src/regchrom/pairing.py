"""Configuration-model pairings and their projected multigraphs.

A pairing is a perfect matching on d*n points grouped into n cells of d
points each; collapsing each cell to a vertex yields a random d-regular
multigraph (loops and parallel edges allowed). This module samples and
enumerates pairings, projects them, and counts short cycles exactly.

Cycle-count conventions (fixed here for the whole package):
  * X_1 = number of loop edges,
  * X_2 = number of unordered pairs of parallel edges between distinct
    vertices (sum of C(mult, 2) over parallel classes),
  * X_m, m >= 3 = number of cycles on m distinct vertices, where two
    cycles using different parallel edges count separately and each
    cycle is counted once, not once per rooted orientation.
"""

from collections import Counter

import numpy as np

from .errors import GuardError, InputError

ENUMERATION_MAX_POINTS = 16
CYCLE_MAX_LENGTH = 8


def double_factorial(m):
    """(m)!! for odd m >= -1; the number of perfect matchings on m+1 points."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def pairing_rng(seed, stream=0):
    """Counter-based generator for (seed, stream); streams never collide.

    Philox keyed through a spawn path, so worker `stream` indices give
    statistically independent, reproducible streams.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


class Pairing:
    """Perfect matching on d*n points; point i lives in cell i // d."""

    __slots__ = ("n", "d", "mates")

    def __init__(self, n, d, mates):
        mates = tuple(int(m) for m in mates)
        if len(mates) != n * d:
            raise InputError(f"mates must have length dn = {n * d}")
        for i, j in enumerate(mates):
            if j == i or not (0 <= j < n * d) or mates[j] != i:
                raise InputError("mates must be a fixed-point-free involution")
        self.n = n
        self.d = d
        self.mates = mates

    def pairs(self):
        """The dn/2 unordered point pairs, each as (i, j) with i < j."""
        return [(i, j) for i, j in enumerate(self.mates) if i < j]

    def __eq__(self, other):
        return (self.n, self.d, self.mates) == (other.n, other.d, other.mates)

    def __hash__(self):
        return hash((self.n, self.d, self.mates))

    def __repr__(self):
        return f"Pairing(n={self.n}, d={self.d}, mates={self.mates})"


class Multigraph:
    """Vertex set {0..n-1} with an edge multiset; loops allowed.

    Immutable after construction. Derived views (collapsed adjacency,
    multiplicities) are built once in __init__ and shared freely.
    """

    __slots__ = ("n", "edges", "mult", "adj", "loops")

    def __init__(self, n, edges):
        self.n = n
        canon = []
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            canon.append((u, v) if u <= v else (v, u))
        canon.sort()
        self.edges = tuple(canon)
        mult = Counter(self.edges)
        self.mult = dict(mult)
        adj = [set() for _ in range(n)]
        loops = [0] * n
        for (u, v), c in mult.items():
            if u == v:
                loops[u] += c
            else:
                adj[u].add(v)
                adj[v].add(u)
        self.adj = tuple(frozenset(s) for s in adj)
        self.loops = tuple(loops)

    def degree(self, v):
        """Degree of v; each loop contributes 2."""
        deg = 2 * self.loops[v]
        for u in self.adj[v]:
            deg += self.multiplicity(v, u)
        return deg

    def degrees(self):
        return [self.degree(v) for v in range(self.n)]

    def multiplicity(self, u, v):
        key = (u, v) if u <= v else (v, u)
        return self.mult.get(key, 0)

    def num_edges(self):
        return len(self.edges)

    def has_loop(self):
        return any(self.loops)

    def simple_edges(self):
        """Distinct non-loop vertex pairs (u, v), u < v."""
        return sorted({(u, v) for u, v in self.edges if u != v})

    def __eq__(self, other):
        return (self.n, self.edges) == (other.n, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Multigraph(n={self.n}, edges={list(self.edges)})"


class CycleCounts:
    """Exact counts X_1..X_m_max under the package cycle conventions."""

    __slots__ = ("counts",)

    def __init__(self, counts):
        self.counts = dict(counts)

    def __getitem__(self, m):
        return self.counts[m]

    def as_dict(self):
        return dict(self.counts)

    def __repr__(self):
        return f"CycleCounts({self.counts})"


def _check_feasible(n, d):
    if n < 1 or d < 1:
        raise InputError("need n >= 1 and d >= 1")
    if (n * d) % 2 != 0:
        raise InputError(f"dn = {n * d} is odd; no perfect matching exists")


def sample_pairing(n, d, seed, stream=0):
    """Uniform random pairing on d*n points, deterministic in (seed, stream).

    Shuffles the dn points and pairs consecutive entries, which is exactly
    uniform over the (dn-1)!! matchings.
    """
    _check_feasible(n, d)
    rng = seed if isinstance(seed, np.random.Generator) else pairing_rng(seed, stream)
    perm = rng.permutation(n * d)
    mates = [0] * (n * d)
    for t in range(0, n * d, 2):
        a, b = int(perm[t]), int(perm[t + 1])
        mates[a] = b
        mates[b] = a
    return Pairing(n, d, mates)


def enumerate_pairings(n, d):
    """Yield every pairing exactly once, lexicographic by smallest unpaired point.

    Desk-scale oracle: refuses dn > 16 (15!! = 2,027,025 matchings).
    """
    _check_feasible(n, d)
    dn = n * d
    if dn > ENUMERATION_MAX_POINTS:
        raise GuardError(
            f"enumerate_pairings requires dn <= {ENUMERATION_MAX_POINTS}, got dn = {dn}"
        )
    mates = [-1] * dn

    def rec(free):
        if not free:
            yield Pairing(n, d, mates)
            return
        i = free[0]
        for j in free[1:]:
            mates[i], mates[j] = j, i
            rest = [x for x in free if x != i and x != j]
            yield from rec(rest)
        mates[i] = -1

    yield from rec(list(range(dn)))


def to_multigraph(p):
    """Project a pairing: cells become vertices, pairs become edges."""
    return Multigraph(p.n, [(i // p.d, j // p.d) for i, j in p.pairs()])


def count_cycles(g, m_max):
    """Exact X_1..X_m_max for a multigraph.

    Loops and parallel pairs are read off the edge multiset; cycles of
    length >= 3 are enumerated by DFS over vertex paths rooted at the
    cycle's minimum vertex, with the direction fixed by requiring the
    second vertex to be smaller than the last, so each vertex cycle is
    visited once; parallel edges multiply the count of that cycle.
    """
    if m_max > CYCLE_MAX_LENGTH:
        raise GuardError(f"count_cycles requires m_max <= {CYCLE_MAX_LENGTH}, got {m_max}")
    counts = {m: 0 for m in range(1, m_max + 1)}
    if m_max >= 1:
        counts[1] = sum(g.loops)
    if m_max >= 2:
        counts[2] = sum(c * (c - 1) // 2 for (u, v), c in g.mult.items() if u != v)

    for m in range(3, m_max + 1):
        total = 0
        for root in range(g.n):
            # paths root -> ... of length m returning to root, all vertices > root
            stack = [(root, (root,), 1)]
            while stack:
                v, path, weight = stack.pop()
                if len(path) == m:
                    if root in g.adj[v] and path[1] < path[-1]:
                        total += weight * g.multiplicity(v, root)
                    continue
                for u in g.adj[v]:
                    if u > root and u not in path:
                        stack.append((u, path + (u,), weight * g.multiplicity(v, u)))
        counts[m] = total
    return CycleCounts(counts)


def is_simple(g):
    """True iff the multigraph has no loops and no parallel edges."""
    if g.has_loop():
        return False
    return all(c == 1 for (u, v), c in g.mult.items() if u != v)


def write_multigraph(g, path):
    """Write the text format: "n d" then one "u v" line per edge occurrence.

    The header's d is the common degree; non-regular multigraphs are not
    representable in this format.
    """
    degs = g.degrees()
    if g.n == 0 or len(set(degs)) != 1:
        raise InputError("multigraph text format requires a regular multigraph")
    lines = [f"{g.n} {degs[0]}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_multigraph(path):
    """Read the text format written by write_multigraph; validates regularity."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2 or len(tokens) % 2 != 0:
        raise InputError("malformed multigraph file")
    n, d = int(tokens[0]), int(tokens[1])
    edges = [(int(tokens[i]), int(tokens[i + 1])) for i in range(2, len(tokens), 2)]
    g = Multigraph(n, edges)
    if g.degrees() != [d] * n:
        raise InputError(f"multigraph is not {d}-regular as its header claims")
    return g
