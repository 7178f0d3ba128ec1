import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from voisinlab.continuation import (
    CONVERGED,
    DIVERGED,
    CompiledSystem,
    NoContraction,
    PolySystem,
    SegmentSystem,
    TrackOptions,
    match_endpoints,
    refine,
    solve_total_degree,
    square_up,
    track_family,
    track_segment,
)
from voisinlab.polynomials import Poly


def poly_from_terms(n, terms):
    return Poly(n, terms, exact=False)


def product_system():
    # {x^2 - 1, y^3 - 1}
    p1 = poly_from_terms(2, {(2, 0): 1.0, (0, 0): -1.0})
    p2 = poly_from_terms(2, {(0, 3): 1.0, (0, 0): -1.0})
    return PolySystem((p1, p2), 2)


class TestCompiledSystem:
    def test_matches_poly_evaluate(self):
        rng = random.Random(1)
        polys = []
        for _ in range(3):
            terms = {}
            for _ in range(6):
                e = tuple(rng.randint(0, 3) for _ in range(3))
                terms[e] = complex(rng.gauss(0, 1), rng.gauss(0, 1))
            polys.append(poly_from_terms(3, terms))
        comp = CompiledSystem(polys, 3)
        pts = np.array([[rng.gauss(0, 1) + 1j * rng.gauss(0, 1) for _ in range(3)]
                        for _ in range(5)])
        vals = comp.eval(pts)
        for b in range(5):
            for i, p in enumerate(polys):
                assert abs(vals[b, i] - p.evaluate(pts[b])) < 1e-10

    def test_jacobian_matches_finite_differences(self):
        rng = random.Random(2)
        p = poly_from_terms(2, {(2, 1): 1.0 + 0.5j, (0, 2): -2.0, (1, 0): 3.0})
        comp = CompiledSystem([p], 2)
        x = np.array([[0.3 + 0.1j, -0.7 + 0.2j]])
        _, jac = comp.eval_and_jac(x)
        eps = 1e-7
        for j in range(2):
            dx = np.zeros((1, 2), dtype=complex)
            dx[0, j] = eps
            fd = (comp.eval(x + dx) - comp.eval(x - dx)) / (2 * eps)
            assert abs(jac[0, 0, j] - fd[0, 0]) < 1e-6


class TestTotalDegree:
    def test_product_system_six_roots(self):
        results = solve_total_degree(product_system(), seed=3)
        assert len(results) == 6
        assert all(r.converged for r in results)
        expected = {(round(sx), k) for sx in (-1, 1) for k in range(3)}
        got = set()
        for r in results:
            x, y = r.endpoint
            assert abs(x**2 - 1) < 1e-8 and abs(y**3 - 1) < 1e-8
            angle = (cmath.phase(y) % (2 * math.pi)) / (2 * math.pi / 3)
            got.add((round(x.real), round(angle) % 3))
        assert got == expected

    def test_gamma_trick_stability(self):
        # two different path constants give the same endpoint set
        rng = random.Random(7)
        for trial in range(5):
            terms1 = {(2, 0): rng.gauss(0, 1) + 1j * rng.gauss(0, 1),
                      (0, 2): rng.gauss(0, 1) + 1j * rng.gauss(0, 1),
                      (1, 1): rng.gauss(0, 1), (1, 0): rng.gauss(0, 1),
                      (0, 0): rng.gauss(0, 1) + 1j * rng.gauss(0, 1)}
            terms2 = {(1, 1): rng.gauss(0, 1) + 1j * rng.gauss(0, 1),
                      (0, 1): rng.gauss(0, 1), (1, 0): 1.0,
                      (0, 0): rng.gauss(0, 1)}
            sys_ = PolySystem((poly_from_terms(2, terms1), poly_from_terms(2, terms2)), 2)
            ends = []
            for seed in (trial * 2 + 100, trial * 2 + 101):
                rs = solve_total_degree(sys_, seed=seed)
                pts = sorted([r.endpoint for r in rs if r.converged],
                             key=lambda p: (round(p[0].real, 6), round(p[0].imag, 6),
                                            round(p[1].real, 6)))
                ends.append(pts)
            assert len(ends[0]) == len(ends[1])
            for a, b in zip(ends[0], ends[1]):
                assert np.linalg.norm(a - b) < 1e-8

    def test_deficient_system_reports_divergence(self):
        # {x*y - 1, x} has no solutions: all 2 paths must leave, none Converged
        p1 = poly_from_terms(2, {(1, 1): 1.0, (0, 0): -1.0})
        p2 = poly_from_terms(2, {(1, 0): 1.0})
        results = solve_total_degree(PolySystem((p1, p2), 2), seed=5)
        assert len(results) == 2
        assert all(not r.converged for r in results)
        assert any(r.status == DIVERGED for r in results)

    def test_endpoint_count_within_bezout(self):
        results = solve_total_degree(product_system(), seed=11)
        assert len(results) <= 6


class TestSquareUp:
    def test_contains_original_solutions(self):
        # overdetermined: {x^2-1, (x-1)*y, y} has solutions (1, 0), (-1, 0)
        p1 = poly_from_terms(2, {(2, 0): 1.0, (0, 0): -1.0})
        p2 = poly_from_terms(2, {(1, 1): 1.0, (0, 1): -1.0})
        p3 = poly_from_terms(2, {(0, 1): 1.0})
        squared, filt = square_up(PolySystem((p1, p2, p3), 2), seed=1)
        assert squared.is_square
        results = solve_total_degree(squared, seed=2)
        good = [r.endpoint for r in results if r.converged and filt(r.endpoint[None, :])[0]]
        xs = sorted(round(p[0].real) for p in good)
        assert xs == [-1, 1]
        assert all(abs(p[1]) < 1e-6 for p in good)

    def test_extraneous_tagged(self):
        p1 = poly_from_terms(2, {(2, 0): 1.0, (0, 0): -1.0})
        p2 = poly_from_terms(2, {(1, 1): 1.0, (0, 1): -1.0})
        p3 = poly_from_terms(2, {(0, 1): 1.0})
        squared, filt = square_up(PolySystem((p1, p2, p3), 2), seed=1)
        results = solve_total_degree(squared, seed=2)
        flags = [bool(filt(r.endpoint[None, :])[0]) for r in results if r.converged]
        assert flags.count(True) == 2
        assert flags.count(False) >= 1  # squared system has extraneous roots


def _sqrt_family_segment(z0: complex, z1: complex) -> SegmentSystem:
    # H(x, s) = x^2 - ((1-s) z0 + s z1)
    polys = [Poly(2, {(2, 0): 1.0, (0, 0): -z0, (0, 1): z0 - z1}, exact=False)]
    return SegmentSystem(polys, 1)


class TestFamilyTracking:
    def test_constant_path_identity(self):
        seg = _sqrt_family_segment(1.0, 1.0)
        starts = np.array([[1.0], [-1.0]], dtype=complex)
        results = track_family([seg], starts)
        for r, s in zip(results, starts):
            assert r.converged and abs(r.endpoint[0] - s[0]) < 1e-9

    def test_square_root_monodromy_swaps_sheets(self):
        # loop z = e^{2 pi i t} around the branch point of x^2 = z
        waypoints = [cmath.exp(2j * math.pi * k / 8) for k in range(9)]
        segs = [_sqrt_family_segment(waypoints[k], waypoints[k + 1]) for k in range(8)]
        starts = np.array([[1.0], [-1.0]], dtype=complex)
        results = track_family(segs, starts)
        assert all(r.converged for r in results)
        ends = np.array([r.endpoint for r in results])
        perm = match_endpoints(starts, ends)
        assert perm == [1, 0]

    def test_reverse_path_identity(self):
        rng = random.Random(13)
        z0 = 1.0
        z1 = complex(rng.gauss(0, 1), rng.gauss(0, 1)) + 3
        fwd = _sqrt_family_segment(z0, z1)
        back = _sqrt_family_segment(z1, z0)
        starts = np.array([[1.0], [-1.0]], dtype=complex)
        results = track_family([fwd, back], starts)
        for r, s in zip(results, starts):
            assert r.converged and abs(r.endpoint[0] - s[0]) < 1e-8


class TestRefine:
    def test_exact_solution_immediate(self):
        res = refine(product_system(), [1.0, 1.0])
        assert res.converged and res.steps <= 2

    def test_perturbed_recovery(self):
        res = refine(product_system(), [1.0 + 1e-4, 1.0 - 1e-4j], target_tol=1e-12)
        assert res.converged
        assert abs(res.endpoint[0] - 1) < 1e-12 and abs(res.endpoint[1] - 1) < 1e-12

    def test_no_fake_certificate_without_contraction(self):
        # x^2 + 1 from a real start: real Newton iterates never converge, so
        # refine must refuse rather than certify
        p = poly_from_terms(1, {(2,): 1.0, (0,): 1.0})
        with pytest.raises(NoContraction):
            refine(PolySystem((p,), 1), [0.1], target_tol=1e-12,
                   opts=TrackOptions(precision_escalation=False))


class TestMatching:
    def test_equidistant_end_is_ambiguous(self):
        ref = np.array([[0.0], [1.0]], dtype=complex)
        ends = np.array([[0.5], [0.5]], dtype=complex)
        with pytest.raises(Exception):
            match_endpoints(ref, ends)

    def test_non_bijective_assignment_rejected(self):
        ref = np.array([[0.0], [1.0]], dtype=complex)
        ends = np.array([[1e-9], [2e-9]], dtype=complex)
        with pytest.raises(Exception):
            match_endpoints(ref, ends)
