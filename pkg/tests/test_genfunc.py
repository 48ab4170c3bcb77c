from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial

import pytest

from regchrom.coloring import count_balanced_colourings
from regchrom.errors import GuardError, InputError
from regchrom.genfunc import (
    coeff_pair,
    coeff_single,
    count_colour_types,
    count_feasible_matrices,
    exact_T,
    exact_expected_Y,
    exact_second_moment,
    iter_feasible_matrices,
)
from regchrom.pairing import double_factorial, enumerate_pairings, to_multigraph


def oracle_coeff_single(k, c):
    """Direct enumeration over symmetric tables {b_jl} with the required
    marginals, summing prod 1/b!."""
    pairs = list(combinations(range(k), 2))

    def rec(idx, residual, acc):
        if idx == len(pairs):
            return acc if all(r == 0 for r in residual) else Fraction(0)
        j, l = pairs[idx]
        total = Fraction(0)
        for b in range(min(residual[j], residual[l]) + 1):
            nxt = list(residual)
            nxt[j] -= b
            nxt[l] -= b
            total += rec(idx + 1, nxt, acc / factorial(b))
        return total

    return rec(0, list(c), Fraction(1))


def oracle_coeff_pair(k, c):
    """Direct enumeration over symmetric pair tables with marginals c."""
    labels = [(p, q) for p in range(k) for q in range(k)]
    pairs = [
        (i, j)
        for i, j in combinations(range(len(labels)), 2)
        if labels[i][0] != labels[j][0] and labels[i][1] != labels[j][1]
    ]
    residual = [c[p][q] for p, q in labels]

    def rec(idx, residual, acc):
        if idx == len(pairs):
            return acc if all(r == 0 for r in residual) else Fraction(0)
        i, j = pairs[idx]
        total = Fraction(0)
        for b in range(min(residual[i], residual[j]) + 1):
            nxt = list(residual)
            nxt[i] -= b
            nxt[j] -= b
            total += rec(idx + 1, nxt, acc / factorial(b))
        return total

    return rec(0, residual, Fraction(1))


def balanced_assignments(n, k):
    c = n // k
    for assignment in product(range(k), repeat=n):
        if all(assignment.count(col) == c for col in range(k)):
            yield assignment


def colour_count_cells(c1, c2, k):
    cells = [[0] * k for _ in range(k)]
    for a, b in zip(c1, c2):
        cells[a][b] += 1
    return cells


class TestCoeffSingle:
    def test_spec_examples(self):
        assert coeff_single(3, (2, 2, 2)) == 1
        assert coeff_single(3, (1, 1, 1)) == 0
        assert coeff_single(3, (2, 2, 0)) == Fraction(1, 2)

    def test_matches_enumeration_oracle(self):
        cases = [
            (2, (4, 4)),
            (3, (3, 2, 1)),
            (3, (4, 4, 4)),
            (4, (2, 2, 2, 2)),
            (4, (3, 1, 2, 2)),
        ]
        for k, c in cases:
            assert coeff_single(k, c) == oracle_coeff_single(k, c)

    def test_permutation_symmetry(self):
        base = (4, 2, 0, 2)
        vals = {coeff_single(4, p) for p in permutations(base)}
        assert len(vals) == 1

    def test_zero_for_odd_total(self):
        assert coeff_single(4, (1, 1, 1, 2)) == 0

    def test_zero_for_infeasible_marginal(self):
        # one class demands more ends than all others can supply
        assert coeff_single(3, (5, 1, 2)) == 0

    def test_guard(self):
        with pytest.raises(GuardError):
            coeff_single(3, (200, 200, 2))

    def test_complete_graph_matchings(self):
        # all-ones degrees count the perfect matchings of K_k
        assert coeff_single(6, (1,) * 6) == 15
        assert coeff_single(8, (1,) * 8) == 105


class TestCoeffPair:
    def test_constant_term(self):
        assert coeff_pair(3, [[0] * 3] * 3) == 1

    def test_odd_parity(self):
        c = [[0] * 3 for _ in range(3)]
        c[0][0] = 1
        assert coeff_pair(3, c) == 0

    def test_single_cross_term(self):
        c = [[1, 0, 0], [0, 1, 0], [0, 0, 0]]
        assert coeff_pair(3, c) == 1

    def test_matches_enumeration_oracle(self):
        cases = []
        c = [[2, 0], [0, 2]]
        cases.append((2, c))
        c = [[1, 1], [1, 1]]
        cases.append((2, c))
        c = [[2, 1, 0], [1, 0, 1], [0, 1, 2]]
        cases.append((3, c))
        c = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
        cases.append((3, c))
        for k, c in cases:
            assert coeff_pair(k, c) == oracle_coeff_pair(k, c)

    def test_k2_factorises_into_diagonals(self):
        # only (1,1)-(2,2) and (1,2)-(2,1) are compatible at k = 2
        c = [[3, 2], [2, 3]]
        expected = Fraction(1, factorial(3)) * Fraction(1, factorial(2))
        assert coeff_pair(2, c) == expected

    def test_guard(self):
        with pytest.raises(GuardError):
            coeff_pair(2, [[100, 0], [0, 100]])


class TestExactExpectedY:
    def test_spec_example_4_3_2(self):
        assert exact_expected_Y(4, 3, 2) == Fraction(32, 77)

    def test_enumeration_example_2_2_2(self):
        # the three pairings carry Y = 2, 2, 0
        assert exact_expected_Y(2, 2, 2) == Fraction(4, 3)

    def test_odd_dn_rejected(self):
        with pytest.raises(InputError):
            exact_expected_Y(3, 3, 3)

    def test_divisibility(self):
        with pytest.raises(InputError):
            exact_expected_Y(4, 3, 3)

    @pytest.mark.parametrize("n,d,k", [(2, 2, 2), (4, 2, 2), (3, 2, 3), (6, 1, 3), (4, 1, 4)])
    def test_enumeration_equality(self, n, d, k):
        total = 0
        count = 0
        for p in enumerate_pairings(n, d):
            total += count_balanced_colourings(to_multigraph(p), k)
            count += 1
        assert exact_expected_Y(n, d, k) == Fraction(total, count)


class TestExactT:
    def test_negative_entry_rejected(self):
        with pytest.raises(InputError):
            exact_T([[Fraction(3, 2), Fraction(-1, 2)], [Fraction(-1, 2), Fraction(3, 2)]], 4, 3)

    def test_not_doubly_stochastic_rejected(self):
        with pytest.raises(InputError):
            exact_T([[1, 0], [1, 0]], 4, 3)

    def test_non_integral_cells_rejected(self):
        with pytest.raises(InputError):
            exact_T([[Fraction(1, 3), Fraction(2, 3)], [Fraction(2, 3), Fraction(1, 3)]], 4, 3)

    @pytest.mark.parametrize("n,d", [(2, 2), (4, 3)])
    def test_triple_enumeration(self, n, d):
        """|T(M)| from the formula equals the direct count of triples
        (pairing, colouring, colouring) with colour count M."""
        k = 2
        tallies = {}
        n_pairings = 0
        for p in enumerate_pairings(n, d):
            n_pairings += 1
            g = to_multigraph(p)
            if g.has_loop():
                continue
            edges = g.simple_edges()
            proper = [
                a
                for a in balanced_assignments(n, k)
                if all(a[u] != a[v] for u, v in edges)
            ]
            for c1 in proper:
                for c2 in proper:
                    key = tuple(map(tuple, colour_count_cells(c1, c2, k)))
                    tallies[key] = tallies.get(key, 0) + 1
        assert n_pairings == double_factorial(n * d - 1)
        total = Fraction(0)
        for cells, count in tallies.items():
            M = [[Fraction(cells[p][q] * k, n) for q in range(k)] for p in range(k)]
            assert exact_T(M, n, d) == count
            total += count
        assert total / n_pairings == exact_second_moment(n, d, k)

    def test_identity_overlap_2_2(self):
        assert exact_T([[1, 0], [0, 1]], 2, 2) == 4


class TestExactSecondMoment:
    def test_enumeration_example_2_2_2(self):
        assert exact_second_moment(2, 2, 2) == Fraction(8, 3)

    def test_spec_example_4_3_2(self):
        total = 0
        count = 0
        for p in enumerate_pairings(4, 3):
            y = count_balanced_colourings(to_multigraph(p), 2)
            total += y * y
            count += 1
        assert exact_second_moment(4, 3, 2) == Fraction(total, count)

    def test_divisibility(self):
        with pytest.raises(InputError):
            exact_second_moment(4, 3, 3)

    def test_work_guard(self):
        with pytest.raises(GuardError):
            exact_second_moment(12, 1, 6)

    def test_matrix_enumeration_matches_count(self):
        for k, r in [(2, 3), (3, 2), (4, 2)]:
            matrices = list(iter_feasible_matrices(k, r))
            assert len(matrices) == count_feasible_matrices(k, r)
            assert len({tuple(map(tuple, m)) for m in matrices}) == len(matrices)
            for m in matrices:
                assert all(sum(row) == r for row in m)
                assert all(sum(col) == r for col in zip(*m))

    def test_known_matrix_counts(self):
        assert count_feasible_matrices(4, 3) == 2008
        assert count_feasible_matrices(6, 2) == 202410

    def test_permutation_partial_sum_monotone(self):
        for n, d, k in [(6, 2, 3), (4, 3, 2)]:
            r = n // k
            partial = Fraction(0)
            for perm in permutations(range(k)):
                M = [[1 if perm[p] == q else 0 for q in range(k)] for p in range(k)]
                partial += exact_T(M, n, d)
            partial /= double_factorial(n * d - 1)
            assert partial <= exact_second_moment(n, d, k)


class TestColourTypes:
    def test_spec_examples(self):
        assert count_colour_types(3, 1) == 0
        assert count_colour_types(3, 2) == 6
        assert count_colour_types(4, 3) == 24

    @pytest.mark.parametrize("k", [3, 4, 5, 6])
    def test_recurrence(self, k):
        assert count_colour_types(k, 1) == 0
        for m in range(2, 9):
            assert count_colour_types(k, m) + count_colour_types(k, m - 1) == k * (k - 1) ** (
                m - 1
            )

    @pytest.mark.parametrize("k,m", [(3, 2), (3, 3), (4, 3), (4, 4), (3, 5)])
    def test_brute_force_rooted_cycle_sequences(self, k, m):
        count = sum(
            1
            for seq in product(range(k), repeat=m)
            if all(seq[i] != seq[(i + 1) % m] for i in range(m))
        )
        assert count_colour_types(k, m) == count
