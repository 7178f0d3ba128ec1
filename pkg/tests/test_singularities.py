import random
from fractions import Fraction

import numpy as np
import pytest

from voisinlab.polynomials import Poly
from voisinlab.singularities import (
    ClassificationAmbiguous,
    affine_local_class,
    is_cone,
    local_class,
    plane_curve_local_class,
)


def P(n, terms):
    return Poly(n, {k: Fraction(v) for k, v in terms.items()})


def affine(terms, n=3):
    return Poly(n, {k: Fraction(v) for k, v in terms.items()})


class TestAffineGerms:
    def test_a1_normal_form(self):
        # u^2 + v^2 + w^2
        h = affine({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
        assert affine_local_class(h).is_ak(1)

    def test_a3_normal_form(self):
        # u^2 + v^2 + w^4
        h = affine({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 4): 1})
        cls = affine_local_class(h)
        assert cls.is_ak(3) and cls.hessian_rank == 2

    def test_a2_with_cross_terms(self):
        # (u+w)^2 + v^2 + w^3 is A2 after splitting
        h = affine({(2, 0, 0): 1, (1, 0, 1): 2, (0, 0, 2): 1, (0, 2, 0): 1,
                    (0, 0, 3): 1})
        assert affine_local_class(h).is_ak(2)

    def test_a5_needs_deep_jets(self):
        # u^2 + v^2 + w^6 with a disguise: substitute w -> w + u
        base = affine({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 6): 1})
        u = Poly.variable(3, 0)
        v = Poly.variable(3, 1)
        w = Poly.variable(3, 2)
        h = base.substitute([u, v, w + u])
        assert affine_local_class(h).is_ak(5)

    def test_corank2_is_not_a(self):
        # u^2 + v^3 + w^3: Hessian rank 1, reported outside the A series
        h = affine({(2, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})
        cls = affine_local_class(h)
        assert cls.kind == "BeyondJetBound" and cls.corank == 2

    def test_smooth_point(self):
        h = affine({(1, 0, 0): 1, (0, 2, 0): 1})
        assert affine_local_class(h).kind == "Smooth"

    def test_nonisolated_a_infinity(self):
        # u^2 + v^2: singular along the w-axis
        h = affine({(2, 0, 0): 1, (0, 2, 0): 1})
        assert affine_local_class(h).kind == "NonIsolated"

    def test_jet_bound_exceeded_never_silent(self):
        # u^2 + v^2 + w^9 with default bound 8
        h = affine({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 9): 1})
        cls = affine_local_class(h)
        assert cls.kind in ("BeyondJetBound", "NonIsolated")
        assert not cls.is_ak()

    def test_deformation_consistency(self):
        # u^2 + v^2 + w^4 + eps*w^2: A1 for eps != 0, A3 at eps = 0
        for eps, expected in [(Fraction(1, 1000), 1), (Fraction(0), 3)]:
            h = affine({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 4): 1})
            h = h + Poly(3, {(0, 0, 2): eps})
            assert affine_local_class(h).is_ak(expected)

    def test_invariance_under_affine_coordinate_changes(self):
        rng = random.Random(4)
        h = affine({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 4): 1})  # A3
        for _ in range(20):
            while True:
                m = [[Fraction(rng.randint(-3, 3)) for _ in range(3)] for _ in range(3)]
                from voisinlab.polynomials import exact_det
                if exact_det(m) != 0:
                    break
            imgs = [Poly.linear_form(row) for row in m]
            assert affine_local_class(h.substitute(imgs)).is_ak(3)

    def test_hessian_vs_splitting_on_random_a1(self):
        rng = random.Random(12)
        count = 0
        for _ in range(200):
            # random nondegenerate quadratic + random cubic junk
            q = [[Fraction(rng.randint(-3, 3)) for _ in range(3)] for _ in range(3)]
            quad = Poly.zero(3)
            for i in range(3):
                for j in range(3):
                    e = [0, 0, 0]
                    e[i] += 1
                    e[j] += 1
                    quad = quad + Poly(3, {tuple(e): q[i][j]})
            from voisinlab.polynomials import exact_det
            sym = [[q[i][j] + q[j][i] for j in range(3)] for i in range(3)]
            if exact_det(sym) == 0:
                continue
            cub = Poly(3, {(3, 0, 0): rng.randint(-3, 3), (0, 3, 0): rng.randint(-3, 3),
                           (1, 1, 1): rng.randint(-3, 3)})
            cls = affine_local_class(quad + cub)
            assert cls.is_ak(1) and cls.hessian_rank == 3
            count += 1
        assert count > 100


class TestProjectivePoints:
    def test_quintic_style_chart_classification(self):
        # cone x2^2*x3... take g = x2^2*x5 + x3^2*x5 + x4^4/x5... use
        # homogeneous quintic with A3 at (0:0:0:1): u^2 + v^2 + w^4 homogenized
        g = Poly(4, {(2, 0, 0, 3): Fraction(1), (0, 2, 0, 3): Fraction(1),
                     (0, 0, 4, 1): Fraction(1)})
        cls = local_class(g, [0, 0, 0, 1])
        assert cls.is_ak(3)

    def test_numeric_agrees_with_exact(self):
        g = Poly(4, {(2, 0, 0, 3): Fraction(1), (0, 2, 0, 3): Fraction(1),
                     (0, 0, 4, 1): Fraction(1)})
        cls = local_class(g.to_approx(), [0j, 0j, 0j, 1 + 0j])
        assert cls.is_ak(3)
        assert cls.gap > 1e3


class TestPlaneCurves:
    def test_node(self):
        # x y = 0 union at (0:0:1): xy + z-homogenized: c = x*y*z ... use nodal cubic
        c = P(3, {(3, 0, 0): 1, (0, 3, 0): 1, (1, 1, 1): 1})  # node at (0:0:1)
        assert plane_curve_local_class(c, [0, 0, 1]).is_ak(1)

    def test_cusp(self):
        # cuspidal cubic x^3 - y^2 z: cusp at (0:0:1)
        c = P(3, {(3, 0, 0): 1, (0, 2, 1): -1})
        assert plane_curve_local_class(c, [0, 0, 1]).is_ak(2)


class TestCones:
    def test_x8_fixture_is_cone_over_nodal_cubic(self):
        g = P(4, {(0, 3, 0, 0): 1, (0, 0, 3, 0): 1, (0, 1, 1, 1): 1})
        rep = is_cone(g)
        assert rep.vertex is not None and rep.vertex_dim == 0
        v = [Fraction(x) for x in rep.vertex]
        assert v[1] == v[2] == v[3] == 0 and v[0] != 0
        assert rep.base_kind == "nodal"

    def test_x9_style_cone_over_cuspidal_cubic(self):
        g = P(4, {(0, 3, 0, 0): 1, (0, 0, 2, 1): -1})
        rep = is_cone(g)
        assert rep.base_kind == "cuspidal"

    def test_elliptic_cone_base_smooth(self):
        # cone over t1^2 t2 = t0^3 + t2^3, vertex (0:0:0:1)
        g = P(4, {(0, 2, 1, 0): 1, (3, 0, 0, 0): -1, (0, 0, 3, 0): -1})
        rep = is_cone(g)
        assert rep.base_kind == "smooth"
        v = [Fraction(x) for x in rep.vertex]
        assert v[0] == v[1] == v[2] == 0

    def test_cayley_is_not_a_cone(self):
        g = P(4, {(1, 1, 1, 0): 1, (1, 1, 0, 1): 1, (1, 0, 1, 1): 1, (0, 1, 1, 1): 1})
        rep = is_cone(g)
        assert rep.vertex is None

    def test_elliptic_vertex_is_simple_elliptic(self):
        g = P(4, {(0, 2, 1, 0): 1, (3, 0, 0, 0): -1, (0, 0, 3, 0): -1})
        cls = local_class(g, [0, 0, 0, 1])
        assert cls.kind == "SimpleElliptic"
