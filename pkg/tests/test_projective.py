import random
from fractions import Fraction

import numpy as np
import pytest

from voisinlab.projective import (
    EMPTY,
    Subspace,
    dedup_by_plucker,
    meet,
    plucker_distance,
    span,
)


def rand_subspace(rng, n, k, exact=True):
    while True:
        if exact:
            rows = [[Fraction(rng.randint(-5, 5)) for _ in range(n + 1)] for _ in range(k + 1)]
        else:
            rows = [[complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(n + 1)]
                    for _ in range(k + 1)]
        try:
            return Subspace(rows, exact=exact)
        except ValueError:
            continue


class TestSpanMeet:
    def test_span_point_with_itself(self):
        p = Subspace.point([1, 2, 3, 4])
        assert span(p, p) == p

    def test_span_of_appendix_lines_is_hyperplane_t0(self):
        # lines (t0=t1=0) and (t0=t3=0) inside P^3: span = {t0=0}
        l1 = Subspace.line_through([0, 0, 1, 0], [0, 0, 0, 1])
        l2 = Subspace.line_through([0, 1, 0, 0], [0, 0, 1, 0])
        s = span(l1, l2)
        assert s.dim == 2
        # row-reduce oracle: the span is exactly {t0 = 0}
        assert s == Subspace([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])

    def test_span_of_disjoint_lines_in_p5(self):
        l1 = Subspace.line_through([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0])
        l2 = Subspace.line_through([0, 0, 1, 0, 0, 0], [0, 0, 0, 1, 0, 0])
        assert span(l1, l2).dim == 3

    def test_meet_plane_with_itself(self):
        pl = Subspace([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1]])
        assert meet(pl, pl) == pl

    def test_meet_opposite_edges_empty(self):
        # Cayley tetrahedron: E02 = (t1=t3=0), E13 = (t0=t2=0): skew
        e02 = Subspace.line_through([1, 0, 0, 0], [0, 0, 1, 0])
        e13 = Subspace.line_through([0, 1, 0, 0], [0, 0, 0, 1])
        assert meet(e02, e13) == EMPTY

    def test_meet_concurrent_lines_is_point(self):
        l1 = Subspace.line_through([1, 0, 0, 0], [0, 1, 0, 0])
        l2 = Subspace.line_through([1, 0, 0, 0], [0, 0, 1, 0])
        m = meet(l1, l2)
        assert m.dim == 0 and m == Subspace.point([1, 0, 0, 0])

    def test_modular_law(self):
        # generic pairs in P^5 are skew, so build pairs sharing a common core
        rng = random.Random(17)
        trials = 0
        attempts = 0
        while trials < 20 and attempts < 400:
            attempts += 1
            core = rand_subspace(rng, 5, 0)
            try:
                a = span(core, rand_subspace(rng, 5, rng.randint(0, 1)))
                b = span(core, rand_subspace(rng, 5, rng.randint(0, 1)))
            except ValueError:
                continue
            m = meet(a, b)
            s = span(a, b)
            if m is EMPTY or s.dim == 5:
                continue
            trials += 1
            assert s.dim + m.dim == a.dim + b.dim
        assert trials == 20

    def test_numeric_meet_matches_exact(self):
        rng = random.Random(23)
        for _ in range(10):
            a = rand_subspace(rng, 4, 2)
            b = rand_subspace(rng, 4, 2)
            me = meet(a, b)
            mn = meet(a.to_approx(), b.to_approx())
            if me is EMPTY:
                assert mn is EMPTY
            else:
                assert mn is not EMPTY and mn.dim == me.dim
                assert me.to_approx().angle_distance(mn) < 1e-7


class TestPlucker:
    def test_rescaled_basis_same_key(self):
        l1 = Subspace.line_through([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0])
        l2 = Subspace([[3, 0, 0, 0, 0, 0], [2, 7, 0, 0, 0, 0]])
        assert l1.plucker_key() == l2.plucker_key()
        assert plucker_distance(l1, l2) < 1e-12

    def test_distinct_coordinate_lines_differ_in_support(self):
        l1 = Subspace.line_through([1, 0, 0, 0], [0, 1, 0, 0])
        l2 = Subspace.line_through([0, 0, 1, 0], [0, 0, 0, 1])
        k1 = l1.plucker_key()
        k2 = l2.plucker_key()
        s1 = {i for i, v in enumerate(k1) if v != (0.0, 0.0)}
        s2 = {i for i, v in enumerate(k2) if v != (0.0, 0.0)}
        assert s1.isdisjoint(s2)

    def test_invariance_under_random_basis_change(self):
        rng = random.Random(31)
        base = rand_subspace(rng, 5, 1, exact=False)
        for _ in range(100):
            g = np.array([[rng.gauss(0, 1) + 1j * rng.gauss(0, 1) for _ in range(2)]
                          for _ in range(2)])
            if abs(np.linalg.det(g)) < 1e-3:
                continue
            other = Subspace(g @ base.matrix(), exact=False)
            assert plucker_distance(base, other) < 1e-10

    def test_dedup(self):
        l1 = Subspace.line_through([1, 0, 0, 0], [0, 1, 0, 0])
        l2 = Subspace([[2, 0, 0, 0], [0, 5, 0, 0]])
        l3 = Subspace.line_through([0, 0, 1, 0], [0, 0, 0, 1])
        assert len(dedup_by_plucker([l1, l2, l3])) == 2


class TestCanonicalForms:
    def test_exact_equality_is_rref_equality(self):
        a = Subspace([[1, 2, 3, 4], [0, 1, 1, 1]])
        b = Subspace([[1, 1, 2, 3], [0, 2, 2, 2]])
        assert a == b

    def test_contains_point(self):
        pl = Subspace([[1, 0, 0, 1], [0, 1, 0, -1]])
        assert pl.contains_point([1, 1, 0, 0])
        assert not pl.contains_point([0, 0, 1, 0])
        assert pl.to_approx().contains_point([1, 1, 0, 0])

    def test_angle_distance_detects_difference(self):
        a = Subspace.line_through([1, 0, 0, 0], [0, 1, 0, 0]).to_approx()
        b = Subspace.line_through([1, 0, 0, 0], [0, 1, 1e-3, 0]).to_approx()
        assert a.angle_distance(b) > 1e-4
        assert not a.is_same(b)
