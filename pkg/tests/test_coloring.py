from itertools import product

import numpy as np
import pytest

from regchrom.coloring import (
    brute_force_chromatic,
    brute_force_proper_colourings,
    chromatic_number,
    count_balanced_colourings,
    count_balanced_colourings_backtracking,
    exists_balanced_colouring,
)
from regchrom.errors import GuardError, InputError
from regchrom.pairing import Multigraph, is_simple, sample_pairing, to_multigraph


def brute_force_balanced(g, k):
    """Oracle: scan all k^n assignments, count proper + balanced ones."""
    if g.has_loop():
        return 0
    edges = g.simple_edges()
    c = g.n // k
    total = 0
    for assignment in product(range(k), repeat=g.n):
        if any(assignment.count(col) != c for col in range(k)):
            continue
        if all(assignment[u] != assignment[v] for u, v in edges):
            total += 1
    return total


class TestBalancedCounting:
    def test_k4_all_bijections_proper(self, k4):
        assert count_balanced_colourings(k4, 4) == 24

    def test_loop_kills_count(self):
        g = Multigraph(3, [(0, 0), (0, 1), (1, 2), (2, 0)])
        assert count_balanced_colourings(g, 3) == 0
        assert count_balanced_colourings(Multigraph(3, [(0, 0), (1, 2)]), 3) == 0

    def test_c6_exhaustive_enumeration(self, c6):
        # 66 proper 3-colourings in total, 24 of them balanced
        assert brute_force_proper_colourings(c6, 3) == 66
        assert brute_force_balanced(c6, 3) == 24
        assert count_balanced_colourings(c6, 3) == 24

    def test_matches_brute_force_on_random_multigraphs(self):
        for i in range(40):
            g = to_multigraph(sample_pairing(6, 3, seed=21, stream=i))
            for k in (2, 3, 6):
                assert count_balanced_colourings(g, k) == brute_force_balanced(g, k)

    def test_matches_backtracking_counter(self):
        for i in range(30):
            g = to_multigraph(sample_pairing(8, 3, seed=5, stream=i))
            for k in (2, 4):
                fast = count_balanced_colourings(g, k)
                slow = count_balanced_colourings_backtracking(g, k)
                assert fast == slow

    def test_bounded_by_total_proper_colourings(self):
        for i in range(10):
            g = to_multigraph(sample_pairing(8, 3, seed=3, stream=i))
            assert count_balanced_colourings(g, 2) <= brute_force_proper_colourings(g, 2)
            assert count_balanced_colourings(g, 4) <= brute_force_proper_colourings(g, 4)

    def test_relabelling_invariance(self):
        rng = np.random.default_rng(2)
        for i in range(15):
            g = to_multigraph(sample_pairing(9, 2, seed=8, stream=i))
            perm = rng.permutation(g.n)
            relabelled = Multigraph(g.n, [(perm[u], perm[v]) for u, v in g.edges])
            assert count_balanced_colourings(g, 3) == count_balanced_colourings(relabelled, 3)

    def test_zero_whenever_loops_present(self):
        found = 0
        for i in range(200):
            g = to_multigraph(sample_pairing(6, 2, seed=4, stream=i))
            if g.has_loop():
                found += 1
                assert count_balanced_colourings(g, 3) == 0
        assert found > 0

    def test_divisibility_and_guard_errors(self, c5, c6):
        with pytest.raises(InputError):
            count_balanced_colourings(c5, 2)
        with pytest.raises(GuardError):
            count_balanced_colourings(Multigraph(26, [(i, (i + 1) % 26) for i in range(26)]), 2)
        with pytest.raises(InputError):
            count_balanced_colourings(c6, 1)


class TestExistence:
    def test_k4(self, k4):
        assert exists_balanced_colouring(k4, 4)

    def test_loop(self):
        assert not exists_balanced_colouring(Multigraph(2, [(0, 0), (1, 1)]), 2)

    def test_c6_bipartition(self, c6):
        assert exists_balanced_colouring(c6, 2)

    def test_agrees_with_counter(self):
        for i in range(40):
            g = to_multigraph(sample_pairing(6, 3, seed=31, stream=i))
            for k in (2, 3):
                assert exists_balanced_colouring(g, k) == (count_balanced_colourings(g, k) > 0)


class TestChromaticNumber:
    def test_named_graphs(self, k4, c5, petersen):
        assert chromatic_number(k4) == 4
        assert chromatic_number(c5) == 3
        assert chromatic_number(petersen) == 3

    def test_loop_undefined(self):
        with pytest.raises(InputError):
            chromatic_number(Multigraph(2, [(0, 0), (0, 1)]))

    def test_parallel_edges_collapse(self):
        g = Multigraph(2, [(0, 1), (0, 1)])
        assert chromatic_number(g) == 2

    def test_edgeless(self):
        assert chromatic_number(Multigraph(3, [])) == 1

    def test_matches_brute_force_minimum(self):
        checked = 0
        for i in range(60):
            g = to_multigraph(sample_pairing(6, 3, seed=41, stream=i))
            if g.has_loop():
                continue
            assert chromatic_number(g) == brute_force_chromatic(g)
            checked += 1
        assert checked > 10

    def test_agrees_with_balanced_search(self):
        # chromatic_number never exceeds any k admitting a balanced colouring
        for i in range(20):
            g = to_multigraph(sample_pairing(6, 3, seed=51, stream=i))
            if g.has_loop():
                continue
            chi = chromatic_number(g)
            for k in (2, 3, 6):
                if exists_balanced_colouring(g, k):
                    assert chi <= k
