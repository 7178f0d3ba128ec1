import random
from fractions import Fraction

import numpy as np
import pytest

from voisinlab.fourfold import (
    CubicFourfold,
    SingularAlongLine,
    TypeIIInput,
    cg_fourfold,
    cg_normalize,
    cg_roundtrip_check,
    classify_line,
    contains_line,
    fourfold_containing_lines,
    line_residual,
    lines_through_point,
    random_fourfold,
    smoothness_probe,
)
from voisinlab.polynomials import Poly, exact_det
from voisinlab.projective import Subspace, span


def fermat() -> CubicFourfold:
    terms = {tuple(3 if j == i else 0 for j in range(6)): Fraction(1) for i in range(6)}
    return CubicFourfold(Poly(6, terms), provenance="file")


FERMAT_LINE = Subspace.line_through([1, -1, 0, 0, 0, 0], [0, 0, 1, -1, 0, 0])
R_LINE = Subspace.line_through([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0])
L_LINE = Subspace.line_through([1, 0, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0])


class TestContainment:
    def test_fermat_contains_antidiagonal_line(self):
        assert contains_line(fermat(), FERMAT_LINE)

    def test_fermat_does_not_contain_coordinate_line(self):
        l = Subspace.line_through([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0])
        assert not contains_line(fermat(), l)
        assert line_residual(fermat(), l) > 0.1

    def test_constrained_family_contains_both_lines(self):
        y = random_fourfold(1, "cg+typeII-residual-pair")
        assert contains_line(y, R_LINE)
        assert contains_line(y, L_LINE)


class TestClassification:
    def test_fermat_line_is_type_ii(self):
        cls = classify_line(fermat(), FERMAT_LINE)
        assert cls.kind == "TypeII"
        assert cls.gradient_span_rank == 2
        assert cls.lam.dim == 3

    def test_constrained_family_l_is_type_ii(self):
        y = random_fourfold(1, "cg+typeII-residual-pair")
        cls = classify_line(y, L_LINE)
        assert cls.kind == "TypeII" and cls.lam.dim == 3

    def test_generic_cg_r_is_type_i(self):
        y = random_fourfold(1, "cg")
        cls = classify_line(y, R_LINE)
        assert cls.kind == "TypeI" and cls.lam.dim == 2

    def test_line_inside_lambda(self):
        y = random_fourfold(2, "cg")
        cls = classify_line(y, R_LINE)
        s = span(cls.lam, R_LINE)
        assert s.dim == cls.lam.dim  # L subset Lambda_L

    def test_classification_invariant_under_coordinate_changes(self):
        y = random_fourfold(3, "cg")
        rng = random.Random(5)
        base = classify_line(y, R_LINE)
        for _ in range(12):
            while True:
                m = [[Fraction(rng.randint(-3, 3)) for _ in range(6)] for _ in range(6)]
                if exact_det(m) != 0:
                    break
            images = [Poly.linear_form([m[i][j] for i in range(6)]) for j in range(6)]
            fz = y.f.substitute(images)
            yz = CubicFourfold(fz, provenance="file")
            from voisinlab.polynomials import exact_inverse
            minv = exact_inverse(m)
            # moved line: old rows times M^{-T}? point x on new fourfold iff M x on Y
            rows = []
            for row in R_LINE.frame():
                rows.append([sum(minv[i][j] * row[i] for i in range(6)) for j in range(6)])
            moved = Subspace(rows)
            cls = classify_line(yz, moved)
            assert cls.kind == base.kind and cls.lam.dim == base.lam.dim

    def test_singular_along_line_detected(self):
        # cone over a cubic surface in x0..x3: singular along V(x0..x3)
        terms = {(3, 0, 0, 0, 0, 0): Fraction(1), (0, 3, 0, 0, 0, 0): Fraction(1),
                 (0, 0, 3, 0, 0, 0): Fraction(1), (1, 1, 1, 0, 0, 0): Fraction(1)}
        y = CubicFourfold(Poly(6, terms))
        bad = Subspace.line_through([0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0])
        with pytest.raises(SingularAlongLine):
            classify_line(y, bad)


class TestCGNormalForm:
    def test_already_normalized_reads_off(self):
        y = random_fourfold(4, "cg")
        cg = cg_normalize(y, R_LINE)
        assert cg_roundtrip_check(y, cg)
        # Q0 is the (1,0)-coefficient quadratic of the original
        assert cg.q0.degree() == 2 and cg.q1.degree() == 2 and cg.p.degree() == 3

    def test_roundtrip_on_found_line_exact(self):
        # a fourfold built to contain a random rational line
        lines = [Subspace.line_through([1, 2, 0, 1, 0, 0], [0, 1, 1, 0, 2, 1])]
        y = fourfold_containing_lines(6, lines)
        cg = cg_normalize(y, lines[0])
        assert cg.exact
        assert cg_roundtrip_check(y, cg)
        # the reference line maps to V(z2..z5)
        back = cg.new_line_to_old([[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]])
        assert back == lines[0]

    def test_b33_zero_under_residual_condition(self):
        y = random_fourfold(7, "cg+typeII-residual-pair")
        cg = cg_normalize(y, R_LINE)
        assert cg.q1.coeff((0, 2, 0, 0)) == 0  # b33 = 0

    def test_type_ii_reference_rejected(self):
        y = random_fourfold(1, "cg+typeII-residual-pair")
        with pytest.raises(TypeIIInput):
            cg_normalize(y, L_LINE)


class TestGeneration:
    def test_seeded_reproducibility(self):
        a = random_fourfold(11, "cg")
        b = random_fourfold(11, "cg")
        assert a.f == b.f

    def test_type_ii_constraints_hold(self):
        for seed in range(1, 6):
            y = random_fourfold(seed, "cg+typeII-residual-pair")
            cg = cg_normalize(y, R_LINE)
            a33 = cg.q0.coeff((0, 2, 0, 0))
            b33 = cg.q1.coeff((0, 2, 0, 0))
            c333 = cg.p.coeff((0, 3, 0, 0))
            a23 = cg.q0.coeff((1, 1, 0, 0))
            a35 = cg.q0.coeff((0, 1, 0, 1))
            c233 = cg.p.coeff((1, 2, 0, 0))
            c335 = cg.p.coeff((0, 2, 0, 1))
            assert a33 == b33 == c333 == 0
            assert a23 * c335 - a35 * c233 == 0

    def test_json_roundtrip(self, tmp_path):
        y = random_fourfold(9, "cg+typeII-residual-pair")
        path = tmp_path / "y.json"
        y.save(str(path))
        z = CubicFourfold.load(str(path))
        assert z.f == y.f and len(z.known_lines) == 2


class TestSmoothnessProbe:
    def test_fermat_passes(self):
        rep = smoothness_probe(fermat(), n_trials=4, seed=1)
        assert rep.passed

    def test_cone_fails_with_witness(self):
        terms = {(3, 0, 0, 0, 0, 0): Fraction(1), (0, 3, 0, 0, 0, 0): Fraction(1),
                 (0, 0, 3, 0, 0, 0): Fraction(1)}
        y = CubicFourfold(Poly(6, terms))
        rep = smoothness_probe(y, n_trials=4, seed=2)
        assert not rep.passed
        w = np.array(rep.witness)
        # witness on the vertex plane x0 = x1 = x2 = 0
        assert np.max(np.abs(w[:3])) < 1e-6 * np.max(np.abs(w))
        assert rep.witness_residual < 1e-9

    def test_seeded_random_passes(self):
        y = random_fourfold(1, "none")
        rep = smoothness_probe(y, n_trials=4, seed=3)
        assert rep.passed


class TestLinesThroughPoint:
    def test_fermat_point(self):
        y = fermat()
        pt = [1, -1, 0, 0, 0, 0]
        lines = lines_through_point(y, pt, slice_seed=1)
        assert len(lines) >= 1
        for l in lines:
            assert contains_line(y, l, tol=1e-7)

    def test_generic_count_is_six(self):
        y = random_fourfold(2, "cg")
        pt = [1, 0, 0, 0, 0, 0]  # on R inside Y
        lines = lines_through_point(y, pt, slice_seed=5)
        assert 1 <= len(lines) <= 6
        # Bezout count: for a generic point the slice cuts 6 lines
        assert len(lines) == 6

    def test_off_surface_point_rejected(self):
        with pytest.raises(ValueError):
            lines_through_point(fermat(), [1, 0, 0, 0, 0, 0], slice_seed=1)
