"""The degree-16 self-map on lines of a cubic fourfold and its companions.

psi sends a type I line L to the residual line R of the plane section
Lambda_L . Y = 2L + R; psi_hat extends it to type II lines along the pencil
of planes L in Xi in Lambda_L; phi sends an ordered pair of skew lines to a
(possibly degenerate) twisted cubic built from the first line and the conic
residual to the second; psi_fiber computes the full 16-element fiber over a
target line, either through the nodes of the discriminant quintic or through
a direct tangency system suitable for parameter transport.

Direct fiber system (unknowns t and w in C^6 plus two chart equations): the
line L = span(R(t), w) with R(t) = a + t b satisfies psi(L) = R exactly when
the ternary section of the plane span(a, b, w) is proportional to
(beta - t alpha)^2 gamma, which reduces (for R on Y) to the five equations

    B(a,w,w) = B(b,w,w) = f(w) = B(a,a,w) - t^2 B(b,b,w)
                                = B(a,b,w) + t B(b,b,w) = 0

with B the polarization of f.  These have Bezout number 72 with the two
affine chart normalizations of w, and depend polynomially on the anchor
points (a, b), which is what monodromy transport tracks.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .continuation import (
    PolySystem,
    TrackOptions,
    newton_polish,
    solve_total_degree,
)
from .fourfold import CubicFourfold, TypeIIInput, classify_line, contains_line
from .polynomials import (
    CubicBlossom,
    NotSplit,
    Poly,
    poly_divides,
    restrict_to_subspace,
    split_ternary_cubic,
)
from .projective import (
    EMPTY,
    Subspace,
    dedup_by_plucker,
    meet,
    plucker_distance,
    sort_by_plucker,
    span,
)


class SplitFailure(RuntimeError):
    pass


class PlaneNotInPencil(ValueError):
    pass


class NonSkew(ValueError):
    pass


class ConicExtractionFailure(RuntimeError):
    pass


class FiberDeficient(RuntimeError):
    def __init__(self, count, record=None):
        super().__init__(f"fiber clustering yielded {count} lines, expected 16")
        self.count = count
        self.record = record


@dataclass(frozen=True)
class ResidualRecord:
    source: Subspace
    plane: Subspace
    residual: Subspace
    factor_scale: object
    is_triple: bool


@dataclass(frozen=True)
class TwistedCubicRecord:
    span3: Subspace
    components: tuple  # of ("line", Subspace, mult) or ("conic", plane, Poly, mult)
    label: str | None = None

    def lines(self) -> list[Subspace]:
        return [c[1] for c in self.components if c[0] == "line"]

    def total_degree(self) -> int:
        return sum((1 if c[0] == "line" else 2) * c[-1] for c in self.components)


@dataclass(frozen=True)
class FiberRecord:
    target: Subspace
    lines: tuple[Subspace, ...]
    node_points: tuple  # base points of the quintic (empty for the direct route)
    residuals: tuple[float, ...]
    multiplicities: tuple[int, ...]
    separations: tuple[float, ...]  # pairwise minimum per line
    special_flags: tuple[str, ...]

    @property
    def count_with_multiplicity(self) -> int:
        return sum(self.multiplicities)


def _line_in_plane_from_factor(plane: Subspace, lin: Poly) -> Subspace:
    """The line {lin = 0} of a plane, with lin in the coordinates of the
    plane's canonical frame (the frame every restriction here uses)."""
    if lin.degree() != 1:
        raise ValueError("need a linear form")
    coeffs = [lin.coeff(tuple(1 if j == i else 0 for j in range(lin.n)))
              for i in range(lin.n)]
    if lin.exact:
        from .polynomials import exact_kernel
        kern = exact_kernel([coeffs])
    else:
        from .polynomials import numeric_kernel
        kern = numeric_kernel(np.array([coeffs], dtype=complex))
    frame = plane.frame()
    pts = []
    for v in kern:
        pt = None
        for c, row in zip(v, frame):
            add = [c * x for x in row]
            pt = add if pt is None else [a + b for a, b in zip(pt, add)]
        pts.append(pt)
    return Subspace(pts, exact=lin.exact and plane.exact)


def line_factor_in_plane(plane: Subspace, line: Subspace) -> Poly:
    """The linear form on the plane (in canonical frame coordinates) cutting
    the given line of the plane."""
    exact = plane.exact and line.exact
    frame = plane.frame()
    coords = []
    for row in line.frame():
        if exact:
            from .polynomials import exact_solve
            m = [[frame[j][i] for j in range(3)] for i in range(plane.n + 1)]
            sol = exact_solve(m, list(row))
            if sol is None:
                raise ValueError("line does not lie in the plane")
            coords.append(sol)
        else:
            m = np.array([[complex(frame[j][i]) for j in range(3)]
                          for i in range(plane.n + 1)])
            sol, res, *_ = np.linalg.lstsq(m, np.array([complex(v) for v in row]),
                                           rcond=None)
            coords.append(list(sol))
    if exact:
        from .polynomials import exact_kernel
        kern = exact_kernel(coords)
    else:
        from .polynomials import numeric_kernel
        kern = numeric_kernel(np.array(coords, dtype=complex))
    return Poly.linear_form(list(kern[0]), exact=exact)


def _section_split(y: CubicFourfold, plane: Subspace, seed: int = 0,
                   tol: float = 1e-9):
    exact = y.exact and plane.exact
    rest = restrict_to_subspace(y.f if exact else y.f.to_approx(),
                                plane.frame() if exact
                                else [[complex(v) for v in r] for r in plane.frame()])
    return split_ternary_cubic(rest, tol=tol, seed=seed), rest


def psi(y: CubicFourfold, line: Subspace, seed: int = 0,
        tol: float = 1e-9) -> ResidualRecord:
    """Residual line of Lambda_L . Y = 2L + R for a type I line."""
    cls = classify_line(y, line, tol=tol)
    if cls.kind != "TypeI":
        raise TypeIIInput("psi is undefined on type II lines; use psi_hat")
    return _residual_in_plane(y, line, cls.lam, seed=seed, tol=tol)


def _residual_in_plane(y: CubicFourfold, line: Subspace, plane: Subspace,
                       seed: int = 0, tol: float = 1e-9) -> ResidualRecord:
    try:
        split, rest = _section_split(y, plane, seed=seed, tol=tol)
    except NotSplit as err:
        raise SplitFailure(f"plane section does not split: {err}") from err
    mults = sorted(m for _, m in split.factors)
    if mults == [3]:
        lf = split.factors[0][0]
        triple_line = _line_in_plane_from_factor(plane, lf)
        if not _same_line(triple_line, line, tol):
            raise SplitFailure("triple factor does not cut the source line")
        return ResidualRecord(source=line, plane=plane, residual=triple_line,
                              factor_scale=split.scale, is_triple=True)
    if mults != [1, 2]:
        raise SplitFailure(f"unexpected factor pattern {mults}")
    double = next(f for f, m in split.factors if m == 2)
    single = next(f for f, m in split.factors if m == 1)
    dline = _line_in_plane_from_factor(plane, double)
    if not _same_line(dline, line, tol):
        raise SplitFailure("double factor does not cut the source line")
    residual = _line_in_plane_from_factor(plane, single)
    is_triple = _same_line(residual, line, tol)
    return ResidualRecord(source=line, plane=plane, residual=residual,
                          factor_scale=split.scale, is_triple=is_triple)


def _same_line(a: Subspace, b: Subspace, tol: float = 1e-9) -> bool:
    if a.exact and b.exact:
        return a == b
    return plucker_distance(a, b) < max(tol, 1e-7)


def psi_hat(y: CubicFourfold, line: Subspace, xi: Subspace, seed: int = 0,
            tol: float = 1e-9) -> ResidualRecord:
    """Residual of Xi . Y = 2L + R for a plane L in Xi in Lambda_L (type II L)."""
    cls = classify_line(y, line, tol=tol)
    if cls.kind != "TypeII":
        raise TypeIIInput("psi_hat needs a type II line")
    if xi.dim != 2:
        raise PlaneNotInPencil("Xi must be a plane")
    if not _contains_subspace(xi, line, tol) or not _contains_subspace(cls.lam, xi, tol):
        raise PlaneNotInPencil("need L in Xi in Lambda_L")
    return _residual_in_plane(y, line, xi, seed=seed, tol=tol)


def _contains_subspace(big: Subspace, small: Subspace, tol: float = 1e-9) -> bool:
    s = span(big, small)
    return s.dim == big.dim


def pencil_plane(cls, t) -> Subspace:
    """The plane span(L, v0 + t v1) of the type II pencil, P^1-parametrized.

    The two directions v0, v1 complete L's basis inside Lambda_L (a P^3),
    taken in the deterministic order of the canonical kernel basis;
    t = None gives the plane at infinity span(L, v1).
    """
    lam = cls.lam
    line = cls.line
    if lam.dim != 3:
        raise PlaneNotInPencil("pencil exists only for type II lines")
    exact = lam.exact and line.exact
    rows = [list(r) for r in line.frame()]
    extras = []
    for cand in lam.frame():
        test = rows + extras + [list(cand)]
        if exact:
            from .polynomials import exact_rank
            ok = exact_rank(test) == len(test)
        else:
            from .polynomials import numeric_rank
            ok = numeric_rank(np.array(test, dtype=complex)).rank == len(test)
        if ok:
            extras.append(list(cand))
        if len(extras) == 2:
            break
    if len(extras) != 2:
        raise PlaneNotInPencil("could not frame the pencil")
    v0, v1 = extras
    if t is None:
        third = v1
    else:
        if exact and not isinstance(t, (int, Fraction)):
            exact = False
            rows = [[complex(v) for v in r] for r in rows]
            v0 = [complex(v) for v in v0]
            v1 = [complex(v) for v in v1]
        third = [a + t * b for a, b in zip(v0, v1)]
    return Subspace(rows + [third], exact=exact and (t is None or isinstance(t, (int, Fraction))))


# ---------------------------------------------------------------------------
# the pair map phi
# ---------------------------------------------------------------------------


def phi(y: CubicFourfold, l1: Subspace, l2: Subspace, point=None, seed: int = 0,
        tol: float = 1e-9) -> TwistedCubicRecord:
    """Pair map: L1 plus the conic residual to L2 in span(L2, p) . Y, p in L1.

    With no explicit p: if both lines are type I with a common residual line R
    (the defining property of the pair variety), the flat-limit rule applies
    with p = L1 . R, giving the degenerate chain L1 + L2 + R directly;
    otherwise p is a seeded random point of L1 (re-drawn if the conic
    extraction degenerates).
    """
    if meet(l1, l2) is not EMPTY:
        raise NonSkew("phi needs skew lines")
    if not (contains_line(y, l1, tol=1e-7) and contains_line(y, l2, tol=1e-7)):
        raise ValueError("both lines must lie on the fourfold")

    if point is None:
        r1 = r2 = None
        try:
            r1 = psi(y, l1, seed=seed, tol=tol)
            r2 = psi(y, l2, seed=seed, tol=tol)
        except (TypeIIInput, SplitFailure):
            pass
        if r1 is not None and r2 is not None and _same_line(r1.residual, r2.residual, tol):
            # flat limit at p = L1 . R: the residual conic is L2 + R
            rline = r2.residual
            return TwistedCubicRecord(
                span3=span(l1, l2),
                components=(("line", l1, 1), ("line", l2, 1), ("line", rline, 1)),
                label="pair-chain")
        rng = random.Random(seed ^ 0xABCD)
        for attempt in range(4):
            a, b = l1.frame()
            t = complex(rng.gauss(0, 1), rng.gauss(0, 1))
            p = [complex(ai) + t * complex(bi) for ai, bi in zip(a, b)]
            try:
                return _phi_at_point(y, l1, l2, p, tol)
            except ConicExtractionFailure:
                continue
        raise ConicExtractionFailure("all auxiliary points degenerate")
    return _phi_at_point(y, l1, l2, list(point), tol)


def _phi_at_point(y: CubicFourfold, l1: Subspace, l2: Subspace, p, tol: float):
    exact = (y.exact and l2.exact and all(isinstance(v, (int, Fraction)) for v in p))
    frame = [list(r) for r in (l2.frame() if exact
                               else [[complex(v) for v in r] for r in l2.frame()])]
    frame.append(p if exact else [complex(v) for v in p])
    plane = Subspace(frame, exact=exact)
    rest = restrict_to_subspace(y.f if exact else y.f.to_approx(), plane.frame())
    # the section vanishes on L2: divide out its linear factor
    ell2 = line_factor_in_plane(plane, l2 if exact else l2.to_approx())
    conic = poly_divides(ell2, rest)
    if conic is None or conic.degree() != 2:
        raise ConicExtractionFailure("section is not divisible by the line factor")
    pieces = _conic_components(plane, conic, tol)
    comps = tuple([("line", l1, 1)] + pieces)
    return TwistedCubicRecord(span3=span(l1, plane), components=comps)


def _conic_components(plane: Subspace, conic: Poly, tol: float) -> list:
    """Split a plane conic into lines when it is degenerate."""
    gram = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            e = [0, 0, 0]
            e[i] += 1
            e[j] += 1
            c = conic.coeff(tuple(e))
            gram[i][j] = c if i == j else c / 2
    if conic.exact:
        from .polynomials import exact_rank
        rank = exact_rank(gram)
    else:
        from .polynomials import numeric_rank
        rank = numeric_rank(np.array([[complex(v) for v in r] for r in gram])).rank
    if rank == 3:
        return [("conic", plane, conic, 1)]
    if rank == 1:
        # double line: any nonzero row of the Gram matrix gives the factor
        rows = sorted(gram, key=lambda r: -sum(abs(complex(v)) ** 2 for v in r))
        lf = Poly.linear_form(rows[0], exact=conic.exact)
        return [("line", _line_in_plane_from_factor(plane, lf), 2)]
    # rank 2: two lines through the conic's singular point
    if conic.exact:
        from .polynomials import exact_kernel
        kern = exact_kernel(gram)
    else:
        from .polynomials import numeric_kernel
        kern = numeric_kernel(np.array([[complex(v) for v in r] for r in gram]))
    vertex = list(kern[0])
    from .polynomials import binary_form_roots, rational_roots
    # restrict to a line missing the vertex to find the two branches
    out = []
    if conic.exact:
        basis = []
        for j in range(3):
            cand = [Fraction(1 if i == j else 0) for i in range(3)]
            from .polynomials import exact_rank as _er
            if _er([vertex, cand]) == 2:
                basis.append(cand)
            if len(basis) == 2:
                break
        rest = restrict_to_subspace(conic, basis)
        coeffs = [rest.coeff((2 - k, k)) for k in range(3)]
        rr = rational_roots(coeffs)
        pts = []
        if coeffs[2] == 0:
            pts.append(basis[1])
        for val, m in rr:
            pts.append([a + val * b for a, b in zip(basis[0], basis[1])])
        if sum(m for _, m in rr) + (1 if coeffs[2] == 0 else 0) < 2:
            # rational splitting unavailable: keep the conic undivided
            return [("conic", plane, conic, 1)]
        for z in pts:
            from .polynomials import exact_kernel as _ek
            lf_rows = _ek([[a for a in vertex], [a for a in z]])
            # linear forms vanishing on both points: 1-dimensional
            lf = Poly.linear_form(list(lf_rows[0]), exact=True)
            out.append(("line", _line_in_plane_from_factor(plane, lf), 1))
        return out
    rng = random.Random(11)
    basis = [[complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(3)] for _ in range(2)]
    rest = restrict_to_subspace(conic, basis)
    for (s, t), m in binary_form_roots(rest, tol=tol):
        z = [s * a + t * b for a, b in zip(basis[0], basis[1])]
        from .polynomials import numeric_kernel as _nk
        lf_rows = _nk(np.array([vertex, z], dtype=complex))
        lf = Poly.linear_form(list(lf_rows[0]), exact=False)
        out.append(("line", _line_in_plane_from_factor(plane, lf), m))
    return out


def record_distance(a: TwistedCubicRecord, b: TwistedCubicRecord) -> float:
    """Component-set distance: optimal matching of line/conic pieces."""
    la = [c for c in a.components for _ in range(c[-1]) if c[0] == "line"]
    lb = [c for c in b.components for _ in range(c[-1]) if c[0] == "line"]
    ca = [c for c in a.components if c[0] == "conic"]
    cb = [c for c in b.components if c[0] == "conic"]
    if len(la) != len(lb) or len(ca) != len(cb):
        return math.inf
    used = set()
    worst = 0.0
    for c in la:
        best, best_j = math.inf, None
        for j, d in enumerate(lb):
            if j in used:
                continue
            dist = plucker_distance(c[1].to_approx(), d[1].to_approx())
            if dist < best:
                best, best_j = dist, j
        used.add(best_j)
        worst = max(worst, best)
    for c, d in zip(ca, cb):
        worst = max(worst, c[1].to_approx().angle_distance(d[1].to_approx()))
    worst = max(worst, a.span3.to_approx().angle_distance(b.span3.to_approx()))
    return worst


# ---------------------------------------------------------------------------
# fibers of psi
# ---------------------------------------------------------------------------


def psi_fiber(y: CubicFourfold, r_line: Subspace, seed: int = 0,
              opts: TrackOptions | None = None, method: str = "quintic",
              strict: bool = True, separation_tol: float = 1e-4) -> FiberRecord:
    """All lines L with psi(L) = R, via discriminant-quintic nodes (default)
    or the direct tangency system ("direct" / "squared").

    Every line is re-verified through the split identity; a non-16 count
    raises FiberDeficient when strict (the record rides on the exception).
    """
    if method == "quintic":
        rec = _fiber_by_quintic(y, r_line, seed, opts)
    elif method in ("direct", "squared"):
        rec = _fiber_direct(y, r_line, seed, opts, squared=(method == "squared"))
    else:
        raise ValueError(f"unknown fiber method {method!r}")
    if strict and rec.count_with_multiplicity != 16:
        raise FiberDeficient(rec.count_with_multiplicity, rec)
    return rec


def _verify_fiber_line(y: CubicFourfold, line: Subspace, r_line: Subspace,
                       tol: float = 1e-8) -> float:
    """Residual of the split identity: section of span(L, R) equals
    scale * l_L^2 * l_R up to the verification tolerance."""
    plane = span(line.to_approx(), r_line.to_approx())
    if plane.dim != 2:
        return math.inf
    try:
        rec = _residual_in_plane(y, line.to_approx(), plane, tol=max(tol, 1e-9))
    except (SplitFailure, NotSplit):
        return math.inf
    return plucker_distance(rec.residual, r_line.to_approx())


def _assemble_record(y, r_line, lines, mults, nodes, flags,
                     separation_tol) -> FiberRecord:
    order = sorted(range(len(lines)), key=lambda i: lines[i].plucker_key(tol=1e-7))
    lines = [lines[i] for i in order]
    mults = [mults[i] for i in order]
    nodes = [nodes[i] for i in order] if nodes else []
    residuals = [float(_verify_fiber_line(y, l, r_line)) for l in lines]
    seps = []
    for i, l in enumerate(lines):
        s = min((plucker_distance(l, m) for j, m in enumerate(lines) if j != i),
                default=math.inf)
        seps.append(float(s))
    flags = list(flags)
    if any(s < separation_tol for s in seps):
        flags.append("separation-below-tolerance")
    return FiberRecord(target=r_line, lines=tuple(lines),
                       node_points=tuple(tuple(p) for p in nodes),
                       residuals=tuple(residuals), multiplicities=tuple(mults),
                       separations=tuple(seps), special_flags=tuple(flags))


def _fiber_by_quintic(y, r_line, seed, opts) -> FiberRecord:
    from .quintic import (QuinticSingReport, RankNotOne, build_quintic,
                          node_to_line, quintic_singularities)

    dq = build_quintic(y, r_line)
    rep = quintic_singularities(dq, seed=seed, opts=opts)
    lines, mults, nodes, flags = [], [], [], []
    for sp in rep.points:
        try:
            line, gap = node_to_line(dq, sp.point)
        except RankNotOne as err:
            flags.append(f"rank-not-one at node: {err}")
            continue
        resid = _verify_fiber_line(y, line, r_line)
        if resid > 1e-6:
            flags.append(f"node line failed verification ({resid:.1e})")
            continue
        lines.append(line)
        from .quintic import _node_multiplicity
        mults.append(_node_multiplicity(sp.local))
        nodes.append(sp.point)
        if sp.local.label() != "A1":
            flags.append(f"{sp.local.label()} node (branch proximity)")
    for pt, msg in rep.indeterminate:
        flags.append(f"indeterminate node: {msg}")
    return _assemble_record(y, r_line, lines, mults, nodes, flags, 1e-4)


def fiber_system(y: CubicFourfold, a: Sequence[complex], b: Sequence[complex],
                 r1: Sequence[complex], r2: Sequence[complex]) -> PolySystem:
    """The direct tangency system in 7 unknowns (t, w0..w5)."""
    bl = CubicBlossom(y.f.to_approx())
    a = [complex(v) for v in a]
    b = [complex(v) for v in b]

    def lift_w(p: Poly) -> Poly:
        return Poly(7, {(0,) + e: c for e, c in p.terms.items()}, exact=False)

    t = Poly.variable(7, 0, exact=False)
    e1 = lift_w(bl.poly_2w(a))
    e2 = lift_w(bl.poly_2w(b))
    e3 = lift_w(y.f.to_approx())
    aaw = lift_w(bl.poly_1w(a, a))
    abw = lift_w(bl.poly_1w(a, b))
    bbw = lift_w(bl.poly_1w(b, b))
    e4 = aaw - t * t * bbw
    e5 = abw + t * bbw
    chart1 = Poly(7, {tuple([0] + [1 if j == i else 0 for j in range(6)]): complex(v)
                      for i, v in enumerate(r1)} | {(0,) * 7: -1.0}, exact=False)
    chart2 = Poly(7, {tuple([0] + [1 if j == i else 0 for j in range(6)]): complex(v)
                      for i, v in enumerate(r2)}, exact=False)
    return PolySystem((e1, e2, e3, e4, e5, chart1, chart2), 7)


def nine_condition_system(y: CubicFourfold, a, b, r1, r2) -> PolySystem:
    """All nine coefficient conditions of section = c (beta - t alpha)^2 gamma.

    Four of them do not involve the unknowns (they express that span(a,b)
    lies on the fourfold); squaring this overdetermined formulation down and
    filtering against all nine is the cross-check route.
    """
    bl = CubicBlossom(y.f.to_approx())
    a = [complex(v) for v in a]
    b = [complex(v) for v in b]

    def lift_w(p: Poly) -> Poly:
        return Poly(7, {(0,) + e: c for e, c in p.terms.items()}, exact=False)

    def const(v) -> Poly:
        return Poly.constant(7, complex(v), exact=False)

    t = Poly.variable(7, 0, exact=False)
    eqs = [
        const(bl.eval3(a, a, a)),
        const(3 * bl.eval3(a, a, b)),
        const(3 * bl.eval3(a, b, b)),
        const(bl.eval3(b, b, b)),
        lift_w(bl.poly_2w(a)).scale(3.0),
        lift_w(bl.poly_2w(b)).scale(3.0),
        lift_w(y.f.to_approx()),
        lift_w(bl.poly_1w(a, a)).scale(3.0) - t * t * lift_w(bl.poly_1w(b, b)).scale(3.0),
        lift_w(bl.poly_1w(a, b)).scale(6.0) + t * lift_w(bl.poly_1w(b, b)).scale(6.0),
    ]
    return PolySystem(tuple(eqs), 7)


def _fiber_anchor_charts(r_line: Subspace, seed: int):
    rng = random.Random(seed ^ 0xF1BE)
    a0, b0 = [list(map(complex, r)) for r in r_line.to_approx().frame()]
    # random rotation of the anchors so the meeting parameter t stays generic
    m = [[complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(2)] for _ in range(2)]
    a = [m[0][0] * x + m[0][1] * y for x, y in zip(a0, b0)]
    b = [m[1][0] * x + m[1][1] * y for x, y in zip(a0, b0)]
    r1 = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(6)]
    r2 = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(6)]
    return a, b, r1, r2


def fiber_solutions_to_lines(sols: Sequence[Sequence[complex]], a, b,
                             r_line: Subspace) -> list[Subspace]:
    lines = []
    for sol in sols:
        t, w = sol[0], list(sol[1:])
        p = [ai + t * bi for ai, bi in zip(a, b)]
        cand = Subspace([p, w], exact=False)
        if plucker_distance(cand, r_line.to_approx()) < 1e-6:
            continue  # the degenerate w in span(a, b) branch
        lines.append(cand)
    return lines


def _fiber_direct(y, r_line, seed, opts, squared: bool = False) -> FiberRecord:
    opts = opts or TrackOptions()
    a, b, r1, r2 = _fiber_anchor_charts(r_line, seed)
    flags = []
    if squared:
        from .continuation import square_up
        nine = nine_condition_system(y, a, b, r1, r2)
        sq, filt = square_up(nine, seed=seed ^ 0x51, n_out=5)
        chart1 = fiber_system(y, a, b, r1, r2).equations[5]
        chart2 = fiber_system(y, a, b, r1, r2).equations[6]
        system = PolySystem(tuple(sq.equations) + (chart1, chart2), 7,
                            originals=nine.equations)
        results = solve_total_degree(system, opts, seed=seed)
        sols = [r.endpoint for r in results
                if r.converged and filt(r.endpoint[None, :])[0]]
        flags.append("squared-up cross-check route")
    else:
        system = fiber_system(y, a, b, r1, r2)
        results = solve_total_degree(system, opts, seed=seed)
        sols = []
        comp_sys = system
        for r in results:
            if not r.converged:
                continue
            resid = max(abs(p.evaluate(r.endpoint)) for p in comp_sys.equations)
            if resid < 1e-6 * max(1.0, float(np.linalg.norm(r.endpoint)) ** 3):
                sols.append(r.endpoint)
    cands = fiber_solutions_to_lines(sols, a, b, r_line)
    cands = [l for l in cands if contains_line(y, l, tol=1e-6)]
    lines = []
    for l in cands:
        resid = _verify_fiber_line(y, l, r_line)
        if resid < 1e-6:
            lines.append(l)
    lines = dedup_by_plucker(lines, tol=1e-6)
    mults = [1] * len(lines)
    return _assemble_record(y, r_line, lines, mults, [], flags, 1e-4)


def sample_pair_variety(y: CubicFourfold, seed: int = 0, n: int = 3,
                        targets: Sequence[Subspace] | None = None,
                        opts: TrackOptions | None = None):
    """Ordered pairs (L_i, L_j), i != j, of distinct lines with equal image.

    Targets default to the fourfold's known rational lines; each target's
    fiber is computed once and pairs are drawn without replacement.
    """
    rng = random.Random(seed)
    targets = list(targets if targets is not None else y.known_lines)
    if not targets:
        raise ValueError("no targets available: pass explicit target lines")
    out = []
    fibers = {}
    ti = 0
    guard = 0
    while len(out) < n and guard < 50 * n:
        guard += 1
        target = targets[ti % len(targets)]
        ti += 1
        key = id(target)
        if key not in fibers:
            try:
                fibers[key] = psi_fiber(y, target, seed=seed + ti, opts=opts,
                                        strict=False)
            except Exception:
                continue
        rec = fibers[key]
        if len(rec.lines) < 2:
            continue
        i, j = rng.sample(range(len(rec.lines)), 2)
        out.append(((rec.lines[i], rec.lines[j]), rec))
    if len(out) < n:
        raise RuntimeError("could not sample enough fiber pairs")
    return out
