from itertools import combinations

import numpy as np
import pytest
from scipy import stats

from regchrom.errors import GuardError, InputError
from regchrom.pairing import (
    Multigraph,
    Pairing,
    count_cycles,
    double_factorial,
    enumerate_pairings,
    is_simple,
    pairing_rng,
    read_multigraph,
    sample_pairing,
    to_multigraph,
    write_multigraph,
)

ALL_DESK_COMBOS = [
    (n, d)
    for n in range(1, 13)
    for d in range(1, 13)
    if n * d <= 12 and (n * d) % 2 == 0
]


def brute_force_cycle_count(g, m):
    """Independent oracle: scan all m-subsets of vertices and all cyclic
    orders; multiply edge multiplicities along a realised cycle."""
    total = 0
    for verts in combinations(range(g.n), m):
        rest = verts[1:]
        seen = set()
        from itertools import permutations

        for order in permutations(rest):
            if order[::-1] in seen:
                continue
            seen.add(order)
            cyc = (verts[0],) + order
            weight = 1
            for i in range(m):
                weight *= g.multiplicity(cyc[i], cyc[(i + 1) % m])
            total += weight
    return total


class TestEnumeration:
    @pytest.mark.parametrize("n,d", ALL_DESK_COMBOS)
    def test_count_matches_double_factorial(self, n, d):
        seen = set()
        count = 0
        for p in enumerate_pairings(n, d):
            seen.add(p.mates)
            count += 1
        assert count == double_factorial(n * d - 1)
        assert len(seen) == count

    def test_trivial_single_cell(self):
        (p,) = enumerate_pairings(1, 2)
        assert p.mates == (1, 0)

    def test_guard(self):
        with pytest.raises(GuardError):
            list(enumerate_pairings(9, 2))

    def test_odd_points_rejected(self):
        with pytest.raises(InputError):
            list(enumerate_pairings(3, 3))


class TestSampler:
    def test_odd_points_rejected(self):
        with pytest.raises(InputError):
            sample_pairing(3, 3, seed=0)

    def test_deterministic_per_stream(self):
        a = sample_pairing(10, 3, seed=7, stream=4)
        b = sample_pairing(10, 3, seed=7, stream=4)
        c = sample_pairing(10, 3, seed=7, stream=5)
        assert a == b
        assert a != c

    def test_uniformity_chi_square(self):
        # 3 pairings at (n=2, d=2); chi-square at significance 1e-3
        draws = 30_000
        counts = {}
        for i in range(draws):
            p = sample_pairing(2, 2, seed=123, stream=i)
            counts[p.mates] = counts.get(p.mates, 0) + 1
        assert len(counts) == 3
        expected = draws / 3
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < stats.chi2.ppf(1 - 1e-3, df=2)

    def test_degrees_and_edge_counts(self):
        n, d = 20, 5
        for i in range(10_000):
            g = to_multigraph(sample_pairing(n, d, seed=1, stream=i))
            degs = g.degrees()
            assert degs == [d] * n
            assert g.num_edges() == n * d // 2
        assert sum(degs) == n * d

    def test_rng_streams_do_not_collide(self):
        a = pairing_rng(3, stream=0).integers(0, 2**63, size=4)
        b = pairing_rng(3, stream=1).integers(0, 2**63, size=4)
        assert not np.array_equal(a, b)


class TestMultigraph:
    def test_projection_loop(self):
        (p,) = enumerate_pairings(1, 2)
        g = to_multigraph(p)
        assert g.edges == ((0, 0),)
        assert g.degrees() == [2]
        assert not is_simple(g)

    def test_projection_double_edge(self):
        p = Pairing(2, 2, [2, 3, 0, 1])
        g = to_multigraph(p)
        assert g.edges == ((0, 1), (0, 1))
        assert g.multiplicity(0, 1) == 2
        assert not is_simple(g)

    def test_simple_triangle(self):
        p = Pairing(3, 2, [5, 2, 1, 4, 3, 0])
        g = to_multigraph(p)
        assert is_simple(g)
        assert g.simple_edges() == [(0, 1), (0, 2), (1, 2)]

    def test_text_format_round_trip(self, tmp_path, petersen):
        path = tmp_path / "g.txt"
        write_multigraph(petersen, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "10 3"
        assert len(lines) == 1 + 15
        back = read_multigraph(path)
        assert back == petersen

    def test_text_format_keeps_loops_and_multiplicity(self, tmp_path):
        g = Multigraph(2, [(0, 0), (1, 1), (0, 1), (0, 1)])
        path = tmp_path / "m.txt"
        write_multigraph(g, path)
        assert read_multigraph(path) == g

    def test_reader_rejects_degree_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 3\n0 1\n1 2\n")
        with pytest.raises(InputError):
            read_multigraph(path)


class TestCycleCounts:
    def test_loop(self, loop_graph):
        assert count_cycles(loop_graph, 3).as_dict() == {1: 1, 2: 0, 3: 0}

    def test_triangle(self):
        p = Pairing(3, 2, [5, 2, 1, 4, 3, 0])
        x = count_cycles(to_multigraph(p), 4)
        assert x.as_dict() == {1: 0, 2: 0, 3: 1, 4: 0}

    def test_double_edge_and_parallel_multiplicity(self):
        g = Multigraph(3, [(0, 1), (0, 1), (1, 2), (0, 2)])
        x = count_cycles(g, 3)
        assert x[1] == 0
        assert x[2] == 1
        assert x[3] == 2  # the triangle can use either parallel edge

    def test_triple_edge_pairs(self):
        g = Multigraph(2, [(0, 1)] * 3)
        assert count_cycles(g, 2)[2] == 3  # C(3, 2)

    def test_guard(self, c6):
        with pytest.raises(GuardError):
            count_cycles(c6, 9)

    def test_trace_oracle_on_simple_graphs(self):
        for i in range(60):
            g = to_multigraph(sample_pairing(8, 3, seed=11, stream=i))
            if not is_simple(g):
                continue
            A = np.zeros((g.n, g.n))
            for u, v in g.simple_edges():
                A[u, v] = A[v, u] = 1
            x = count_cycles(g, 4)
            assert x[3] == round(np.trace(A @ A @ A) / 6)
            degs = np.array(g.degrees())
            tr4 = np.trace(np.linalg.matrix_power(A, 4))
            c4 = (tr4 - 2 * np.sum(degs**2) + 2 * g.num_edges()) / 8
            assert x[4] == round(c4)

    def test_brute_force_oracle_on_multigraphs(self):
        for i in range(25):
            g = to_multigraph(sample_pairing(7, 4, seed=13, stream=i))
            x = count_cycles(g, 5)
            for m in (3, 4, 5):
                assert x[m] == brute_force_cycle_count(g, m)

    def test_pairing_invariant_checks(self):
        with pytest.raises(InputError):
            Pairing(2, 2, [1, 0, 3, 3])
        with pytest.raises(InputError):
            Pairing(2, 2, [0, 1, 3, 2])
