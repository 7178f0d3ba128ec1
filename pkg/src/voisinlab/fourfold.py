"""The cubic fourfold: membership, line types, the Clemens-Griffiths normal
form relative to a contained line, seeded instance generation, a smoothness
probe, and the lines through a point.

A line L on Y = V(f) is type I when the six restricted partials df/dx_i|_L
span a 3-dimensional space of binary quadrics (the common tangent space
Lambda_L is then a plane) and type II when they span a 2-dimensional space
(Lambda_L is a P^3).  The classification matrix is the 3x6 array of
(s^2, st, t^2) coefficients of the restricted partials; Lambda_L is its
projectivized kernel.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polynomials import (
    CubicBlossom,
    Poly,
    exact_inverse,
    exact_kernel,
    exact_rank,
    numeric_kernel,
    numeric_rank,
    restrict_to_subspace,
)
from .projective import Subspace

COORD_HEIGHT = 20  # seeded integer coefficient height


class SingularAlongLine(RuntimeError):
    """The fourfold is singular at a point of the line (rank <= 1 partials)."""


class TypeIIInput(ValueError):
    """Operation defined only for type I lines."""


class SingularInput(ValueError):
    pass


class GenerationFailure(RuntimeError):
    pass


class DegenerateSlice(RuntimeError):
    pass


@dataclass(frozen=True)
class CubicFourfold:
    f: Poly  # 6 variables, homogeneous degree 3
    provenance: str = "file"
    known_lines: tuple[Subspace, ...] = ()

    def __post_init__(self):
        if self.f.n != 6 or self.f.degree() != 3 or not self.f.is_homogeneous():
            raise ValueError("a cubic fourfold needs a homogeneous cubic in 6 variables")

    @property
    def exact(self) -> bool:
        return self.f.exact

    def blossom(self) -> CubicBlossom:
        return CubicBlossom(self.f)

    def to_json_dict(self) -> dict:
        d = self.f.to_json_dict()
        d["provenance"] = self.provenance
        if self.known_lines:
            d["known_lines"] = [line_to_json(l) for l in self.known_lines]
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "CubicFourfold":
        f = Poly.from_json_dict(d)
        lines = tuple(line_from_json(l) for l in d.get("known_lines", []))
        return CubicFourfold(f, provenance=d.get("provenance", "file"), known_lines=lines)

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)

    @staticmethod
    def load(path: str) -> "CubicFourfold":
        with open(path) as fh:
            return CubicFourfold.from_json_dict(json.load(fh))


def line_to_json(l: Subspace) -> dict:
    return {"basis": [[str(Fraction(v)) if l.exact else repr(complex(v)) for v in row]
                      for row in l.basis]}


def line_from_json(d: dict) -> Subspace:
    rows = [[Fraction(v) for v in row] for row in d["basis"]]
    return Subspace(rows)


@dataclass(frozen=True)
class LineClassification:
    line: Subspace
    kind: str  # "TypeI" | "TypeII"
    lam: Subspace  # Lambda_L: P^2 for type I, P^3 for type II
    gradient_span_rank: int
    gap: float  # singular-value decision gap; inf for exact

    @property
    def is_type_i(self) -> bool:
        return self.kind == "TypeI"


def line_restriction(y: CubicFourfold, line: Subspace) -> Poly:
    return restrict_to_subspace(y.f if line.exact and y.exact else y.f.to_approx(),
                                line.frame() if line.exact and y.exact
                                else [[complex(v) for v in r] for r in line.frame()])


def line_residual(y: CubicFourfold, line: Subspace) -> float:
    """Norm of the restricted binary cubic, relative to the coefficient scale."""
    r = line_restriction(y, line)
    return r.coeff_norm() / (y.f.coeff_norm() or 1.0)


def contains_line(y: CubicFourfold, line: Subspace, tol: float = 1e-9) -> bool:
    if line.dim != 1:
        raise ValueError("need a line")
    if y.exact and line.exact:
        return line_restriction(y, line).is_zero()
    return line_residual(y, line) < tol


def _restricted_partial_matrix(y: CubicFourfold, line: Subspace):
    """3x6 matrix: rows (s^2, st, t^2) coefficients of the restricted partials."""
    exact = y.exact and line.exact
    frame = line.frame() if exact else [[complex(v) for v in r] for r in line.frame()]
    monos = [(2, 0), (1, 1), (0, 2)]
    cols = []
    for i in range(6):
        p = y.f.partial(i) if exact else y.f.to_approx().partial(i)
        r = restrict_to_subspace(p, frame)
        cols.append([r.coeff(m) for m in monos])
    return [[cols[i][m] for i in range(6)] for m in range(3)], exact


def classify_line(y: CubicFourfold, line: Subspace, tol: float = 1e-9,
                  rank_tol: float = 1e-8) -> LineClassification:
    """Type I/II decision with Lambda_L = projectivized kernel of the 3x6
    restricted-partials matrix.  Raises SingularAlongLine on rank <= 1."""
    if not contains_line(y, line, tol=tol):
        raise ValueError("line does not lie on the fourfold")
    mat, exact = _restricted_partial_matrix(y, line)
    if exact:
        rank = exact_rank(mat)
        gap = math.inf
        kern = exact_kernel(mat)
    else:
        rep = numeric_rank(np.array(mat, dtype=complex), rank_tol)
        rank, gap = rep.rank, rep.gap
        kern = numeric_kernel(np.array(mat, dtype=complex), rank_tol)
    if rank <= 1:
        raise SingularAlongLine(f"restricted partials have rank {rank}")
    lam = Subspace(kern if exact else kern, exact=exact)
    kind = "TypeI" if rank == 3 else "TypeII"
    return LineClassification(line=line, kind=kind, lam=lam,
                              gradient_span_rank=rank, gap=gap)


# ---------------------------------------------------------------------------
# Clemens-Griffiths normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CGForm:
    """f composed with the column frame equals
    z4 z0^2 + z5 z0 z1 + z3 z1^2 + z0 Q0 + z1 Q1 + P, with the reference
    line R at V(z2..z5)."""

    frame: tuple  # 6x6 matrix (rows); point with new coords z sits at frame^T z
    q0: Poly  # quadratic in (z2..z5), 4 variables
    q1: Poly
    p: Poly  # cubic in (z2..z5)
    g: Poly  # the full normalized cubic in 6 variables
    exact: bool

    def frame_columns(self) -> list[list]:
        """Old-coordinate vectors of the new basis (column i = new e_i)."""
        return [list(row) for row in self.frame]

    def new_line_to_old(self, rows: Sequence[Sequence]) -> Subspace:
        cols = self.frame_columns()
        out = []
        for r in rows:
            vec = None
            for ci, coef in enumerate(r):
                add = [coef * v for v in cols[ci]]
                vec = add if vec is None else [a + b for a, b in zip(vec, add)]
            out.append(vec)
        return Subspace(out, exact=self.exact)

    def old_point_to_new(self, pt: Sequence):
        if self.exact:
            from .polynomials import exact_solve
            cols = self.frame_columns()
            m = [[cols[j][i] for j in range(6)] for i in range(6)]
            sol = exact_solve(m, list(pt))
            return sol
        cols = np.array([[complex(v) for v in r] for r in self.frame_columns()]).T
        return np.linalg.solve(cols, np.array([complex(v) for v in pt]))


def cg_normalize(y: CubicFourfold, r_line: Subspace) -> CGForm:
    """Normalize coordinates relative to a type I line R on Y.

    Moves R to V(z2..z5), then rewrites the three linear coefficient forms of
    the (z0, z1)-quadratic part as the coordinates z4, z5, z3.  The algorithm
    pivots on the first standard vectors that keep each frame invertible.
    Raises TypeIIInput when the coefficient forms are dependent (rank 2) and
    SingularAlongLine via the classification when worse.
    """
    cls = classify_line(y, r_line)
    if cls.kind != "TypeI":
        raise TypeIIInput("normal form needs a type I reference line")
    exact = y.exact and r_line.exact
    fr = r_line.frame() if exact else [[complex(v) for v in row] for row in r_line.frame()]

    # complete R's basis to a frame of P^5 by standard vectors
    basis = [list(row) for row in fr]
    chosen = []
    for j in range(6):
        cand = [Fraction(1 if i == j else 0) if exact else complex(i == j) for i in range(6)]
        test = basis + [cand]
        if exact:
            ok = exact_rank(test) == len(test)
        else:
            ok = numeric_rank(np.array(test, dtype=complex)).rank == len(test)
        if ok:
            basis.append(cand)
            chosen.append(j)
        if len(basis) == 6:
            break
    if len(basis) != 6:
        raise SingularInput("could not complete the line frame")

    cols = basis  # new basis vectors in old coordinates
    images = [Poly.linear_form([cols[i][j] for i in range(6)], exact=exact)
              for j in range(6)]
    f1 = (y.f if exact else y.f.to_approx()).substitute(images)

    # pure (y0, y1) part must vanish since R is on Y
    for e in ((3, 0), (2, 1), (1, 2), (0, 3)):
        c = f1.coeff((e[0], e[1], 0, 0, 0, 0))
        if (exact and c != 0) or (not exact and abs(complex(c)) > 1e-8 * f1.coeff_norm()):
            raise SingularInput("reference line is not on the fourfold after framing")

    def coeff_form(e01):
        # linear form in y2..y5 multiplying y0^e0 y1^e1
        coeffs = []
        for j in range(2, 6):
            e = [0] * 6
            e[0], e[1] = e01
            e[j] += 1
            coeffs.append(f1.coeff(tuple(e)))
        return coeffs

    alpha = coeff_form((2, 0))
    beta = coeff_form((1, 1))
    gamma = coeff_form((0, 2))
    rows3 = [alpha, beta, gamma]
    if exact:
        rk = exact_rank(rows3)
    else:
        rk = numeric_rank(np.array(rows3, dtype=complex)).rank
    if rk == 2:
        raise TypeIIInput("coefficient forms are dependent: R is of type II")
    if rk < 2:
        raise SingularInput("degenerate coefficient forms")

    # rows of N: (z2, z3, z4, z5) = (completion, gamma, alpha, beta) in y2..y5
    completion = None
    for j in range(4):
        cand = [Fraction(1 if i == j else 0) if exact else complex(i == j) for i in range(4)]
        test = [cand, gamma, alpha, beta]
        ok = (exact_rank(test) == 4) if exact else (
            numeric_rank(np.array(test, dtype=complex)).rank == 4)
        if ok:
            completion = cand
            break
    if completion is None:
        raise SingularInput("no completion for the coefficient frame")
    nmat = [completion, gamma, alpha, beta]
    ninv = (exact_inverse(nmat) if exact
            else np.linalg.inv(np.array(nmat, dtype=complex)).tolist())

    # y_last = N^{-1} z_last; total frame columns: old = cols' combos
    images2 = []
    for j in range(6):
        if j < 2:
            images2.append(Poly.variable(6, j, exact=exact))
        else:
            coeffs = [Fraction(0) if exact else 0j] * 6
            for i in range(4):
                coeffs[2 + i] = ninv[j - 2][i]
            images2.append(Poly.linear_form(coeffs, exact=exact))
    g = f1.substitute(images2)

    # combined frame: new basis vector z_i in old coordinates
    frame_rows = []
    for i in range(6):
        if i < 2:
            frame_rows.append(list(cols[i]))
        else:
            vec = [Fraction(0) if exact else 0j] * 6
            for k in range(4):
                coef = ninv[k][i - 2]
                for t in range(6):
                    vec[t] += coef * cols[2 + k][t]
            frame_rows.append(vec)

    # read off Q0, Q1, P in the last 4 variables
    def extract(e01, degree):
        terms = {}
        for e, c in g.terms.items():
            if (e[0], e[1]) == e01 and sum(e[2:]) == degree:
                terms[tuple(e[2:])] = c
        return Poly(4, terms, exact=exact)

    q0 = extract((1, 0), 2)
    q1 = extract((0, 1), 2)
    p = extract((0, 0), 3)

    # shape check: quadratic part must be exactly z4 z0^2 + z5 z0 z1 + z3 z1^2
    expected = {(2, 0, 0, 0, 1, 0), (1, 1, 0, 0, 0, 1), (0, 2, 0, 1, 0, 0)}
    for e, c in g.terms.items():
        if sum(e[:2]) == 2:
            one = (exact and c == 1) or (not exact and abs(complex(c) - 1) < 1e-7)
            if tuple(e) not in expected or not one:
                if exact or abs(complex(c)) > 1e-7 * g.coeff_norm():
                    raise SingularInput(f"normal form shape violated at {e}: {c}")
    cg = CGForm(frame=tuple(tuple(v for v in row) for row in frame_rows),
                q0=q0, q1=q1, p=p, g=g, exact=exact)
    return cg


def cg_roundtrip_check(y: CubicFourfold, cg: CGForm) -> bool:
    """f(frame^T z) == g exactly (rationals) or to 1e-9 relative."""
    cols = cg.frame_columns()
    images = [Poly.linear_form([cols[i][j] for i in range(6)], exact=cg.exact)
              for j in range(6)]
    lhs = (y.f if cg.exact else y.f.to_approx()).substitute(images)
    diff = lhs - cg.g
    if cg.exact:
        return diff.is_zero()
    return diff.coeff_norm() < 1e-9 * max(1.0, cg.g.coeff_norm())


def cg_fourfold(q0: Poly, q1: Poly, p: Poly) -> CubicFourfold:
    """Assemble z4 z0^2 + z5 z0 z1 + z3 z1^2 + z0 Q0 + z1 Q1 + P."""
    exact = q0.exact and q1.exact and p.exact
    terms = {(2, 0, 0, 0, 1, 0): Fraction(1) if exact else 1.0 + 0j,
             (1, 1, 0, 0, 0, 1): Fraction(1) if exact else 1.0 + 0j,
             (0, 2, 0, 1, 0, 0): Fraction(1) if exact else 1.0 + 0j}
    f = Poly(6, terms, exact=exact)
    for src, pre in ((q0, (1, 0)), (q1, (0, 1)), (p, (0, 0))):
        for e, c in src.terms.items():
            full = (pre[0], pre[1]) + tuple(e)
            f = f + Poly(6, {full: c}, exact=exact)
    lines = (Subspace.line_through([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]),)
    return CubicFourfold(f, provenance="cg-form", known_lines=lines)


# ---------------------------------------------------------------------------
# seeded generation
# ---------------------------------------------------------------------------


def _random_form(rng: random.Random, n: int, degree: int,
                 height: int = COORD_HEIGHT) -> Poly:
    import itertools
    terms = {}
    for combo in itertools.combinations_with_replacement(range(n), degree):
        e = [0] * n
        for i in combo:
            e[i] += 1
        c = rng.randint(-height, height)
        if c:
            terms[tuple(e)] = Fraction(c)
    return Poly(n, terms)


def random_fourfold(seed: int, constraint_set: str = "none") -> CubicFourfold:
    """Seeded rational fourfold; constraint_set in
    {"none", "cg", "cg+typeII-residual-pair"}.

    The constrained family imposes, for R = V(z2..z5) and L = V(z1,z2,z4,z5):
    containment of L (a33 = c333 = 0), residuality of R to L (b33 = 0), and
    type II for L (a23*c335 = a35*c233, solved for c335 with a23 != 0).
    """
    rng = random.Random(seed)
    for _ in range(100):
        if constraint_set == "none":
            f = _random_form(rng, 6, 3)
            if f.is_zero() or not all(any(e[i] for e in f.terms) for i in range(6)):
                continue
            return CubicFourfold(f, provenance="seeded-random")
        q0 = _random_form(rng, 4, 2)
        q1 = _random_form(rng, 4, 2)
        p = _random_form(rng, 4, 3)
        if constraint_set == "cg":
            if q0.is_zero() or q1.is_zero() or p.is_zero():
                continue
            return cg_fourfold(q0, q1, p)
        if constraint_set == "cg+typeII-residual-pair":
            # indices into (z2, z3, z4, z5): a33 ~ exponent (0,2,0,0) etc.
            def drop(poly, e):
                return poly - Poly(4, {e: poly.coeff(e)})

            q0 = drop(q0, (0, 2, 0, 0))          # a33 = 0
            q1 = drop(q1, (0, 2, 0, 0))          # b33 = 0
            p = drop(p, (0, 3, 0, 0))            # c333 = 0
            a23 = q0.coeff((1, 1, 0, 0))
            a35 = q0.coeff((0, 1, 0, 1))
            c233 = p.coeff((1, 2, 0, 0))
            if a23 == 0:
                continue
            c335 = a35 * c233 / a23
            p = drop(p, (0, 2, 0, 1)) + Poly(4, {(0, 2, 0, 1): c335})
            y = cg_fourfold(q0, q1, p)
            lines = y.known_lines + (
                Subspace.line_through([1, 0, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0]),)
            return CubicFourfold(y.f, provenance="cg-form", known_lines=lines)
        raise ValueError(f"unknown constraint set {constraint_set!r}")
    raise GenerationFailure(f"no acceptable draw in 100 attempts (seed {seed})")


def fourfold_containing_lines(seed: int, lines: Sequence[Subspace],
                              height: int = 3) -> CubicFourfold:
    """Random rational fourfold containing the given rational lines.

    Containment is 4 linear conditions per line on the 56 cubic coefficients;
    a random integer combination of the exact kernel is drawn.
    """
    import itertools
    monos = list(itertools.combinations_with_replacement(range(6), 3))
    exps = []
    for combo in monos:
        e = [0] * 6
        for i in combo:
            e[i] += 1
        exps.append(tuple(e))
    rows = []
    for line in lines:
        p, q = line.frame()
        for k in range(4):  # coefficient of s^(3-k) t^k
            row = []
            for e in exps:
                mono = Poly(6, {e: Fraction(1)})
                rest = restrict_to_subspace(mono, [p, q])
                row.append(rest.coeff((3 - k, k)))
            rows.append(row)
    kern = exact_kernel(rows)
    if not kern:
        raise GenerationFailure("no cubic contains all the requested lines")
    rng = random.Random(seed)
    for _ in range(100):
        combo = [rng.randint(-height, height) for _ in kern]
        coeffs = [sum(c * v[i] for c, v in zip(combo, kern)) for i in range(56)]
        terms = {e: c for e, c in zip(exps, coeffs) if c != 0}
        if not terms:
            continue
        f = Poly(6, terms)
        y = CubicFourfold(f, provenance="seeded-random", known_lines=tuple(lines))
        if all(contains_line(y, l) for l in lines):
            return y
    raise GenerationFailure("all seeded combinations degenerate")


# ---------------------------------------------------------------------------
# smoothness probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    passed: bool
    witness: tuple | None
    witness_residual: float
    trials: int


def smoothness_probe(y: CubicFourfold, n_trials: int = 8, seed: int = 0,
                     tol: float = 1e-10) -> ProbeReport:
    """Hunt for common zeros of the six partials on random square slices.

    Trials alternate between five random combinations of the partials
    (isolated hunt) and four combinations plus a random hyperplane
    (positive-dimensional hunt), each in a random affine chart.  Any endpoint
    whose full gradient residual is below tol (after polishing) is a singular
    witness and fails the probe.
    """
    from .continuation import PolySystem, TrackOptions, polish_projective_zero, solve_total_degree

    rng = random.Random(seed)
    parts = [p.to_approx() for p in y.f.gradient()]
    scale = max(1.0, y.f.coeff_norm())
    for trial in range(n_trials):
        def rand_lin(const):
            coeffs = {tuple(1 if j == i else 0 for j in range(6)):
                      complex(rng.gauss(0, 1), rng.gauss(0, 1)) for i in range(6)}
            if const:
                coeffs[(0,) * 6] = -1.0
            return Poly(6, coeffs, exact=False)

        n_combos = 5 if trial % 2 == 0 else 4
        eqs = []
        for _ in range(n_combos):
            acc = Poly.zero(6, exact=False)
            for p in parts:
                acc = acc + p.scale(complex(rng.gauss(0, 1), rng.gauss(0, 1)))
            eqs.append(acc)
        if n_combos == 4:
            eqs.append(rand_lin(const=False))
        eqs.append(rand_lin(const=True))  # chart
        results = solve_total_degree(PolySystem(tuple(eqs), 6),
                                     TrackOptions(), seed=seed * 101 + trial)
        for r in results:
            # truncated paths stalling on a positive-dimensional singular
            # locus are witness candidates too; the residual is the gate
            if not np.all(np.isfinite(r.endpoint)) or np.linalg.norm(r.endpoint) > 1e6:
                continue
            resid = max(abs(p.evaluate(r.endpoint)) for p in parts)
            if resid < 1e-5 * scale:
                polished, _ = polish_projective_zero(parts, r.endpoint)
                polished_resid = max(abs(p.evaluate(polished)) for p in parts)
                if polished_resid < tol * scale:
                    return ProbeReport(False, tuple(complex(v) for v in polished),
                                       float(polished_resid), trial + 1)
    return ProbeReport(True, None, math.inf, n_trials)


# ---------------------------------------------------------------------------
# lines through a point
# ---------------------------------------------------------------------------


def lines_through_point(y: CubicFourfold, pt: Sequence, slice_seed: int = 0,
                        tol: float = 1e-8, attempts: int = 3) -> list[Subspace]:
    """Up to six lines on Y through a point of Y, by one random linear slice.

    The direction w solves {grad f(pt).w = 0, blossom(pt,w,w) = 0, f(w) = 0}
    plus a random slice (Bezout 6) and two chart normalizations; solutions are
    verified by containment and deduplicated.
    """
    from .continuation import PolySystem, TrackOptions, solve_total_degree
    from .projective import dedup_by_plucker

    fval = abs(complex(y.f.evaluate(list(pt))))
    scale = max(1.0, y.f.coeff_norm()) * max(abs(complex(v)) for v in pt) ** 3
    if fval > 1e-8 * scale:
        raise ValueError("point is not on the fourfold")
    bl = CubicBlossom(y.f.to_approx())
    ptc = [complex(v) for v in pt]
    grad_lin = Poly.linear_form([complex(p.evaluate(ptc)) for p in y.f.to_approx().gradient()],
                                exact=False)
    quad = bl.poly_2w(ptc)
    cubic = y.f.to_approx()
    last_err: Exception | None = None
    for attempt in range(attempts):
        rng = random.Random(slice_seed + 7919 * attempt)

        def rand_aff(c0):
            coeffs = {tuple(1 if j == i else 0 for j in range(6)):
                      complex(rng.gauss(0, 1), rng.gauss(0, 1)) for i in range(6)}
            if c0 is not None:
                coeffs[(0,) * 6] = c0
            return Poly(6, coeffs, exact=False)

        slice_eq = rand_aff(None)
        chart1 = rand_aff(-1.0)   # r1 . w = 1
        # r2 . w = 0 with r2 . pt != 0 picks the representative mod pt
        while True:
            chart2 = rand_aff(None)
            if abs(chart2.evaluate(ptc)) > 0.1:
                break
        sys_ = PolySystem((grad_lin, quad, cubic, slice_eq, chart1, chart2), 6)
        results = solve_total_degree(sys_, TrackOptions(), seed=slice_seed + attempt)
        lines = []
        from .continuation import newton_polish
        for r in results:
            w = r.endpoint
            if not np.all(np.isfinite(w)) or np.linalg.norm(w) > 1e6:
                continue
            if not r.converged:
                # paths can stall on non-reduced line families (cone points);
                # least-squares polishing still lands on the component
                w, _ = newton_polish([grad_lin, quad, cubic, slice_eq, chart1, chart2],
                                     w, iters=120, tol=1e-300)
            resid = max(abs(grad_lin.evaluate(w)), abs(quad.evaluate(w)),
                        abs(cubic.evaluate(w)))
            if resid > 1e-6 * max(1.0, float(np.linalg.norm(w)) ** 3):
                continue
            cand = Subspace([ptc, list(w)], exact=False)
            if contains_line(y, cand, tol=tol):
                lines.append(cand)
        lines = dedup_by_plucker(lines)
        if lines:
            return lines
        last_err = DegenerateSlice(f"slice attempt {attempt} found no verified line")
    raise last_err or DegenerateSlice("no lines found")
