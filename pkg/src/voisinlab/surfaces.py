"""Whole-surface analysis of cubic surfaces in P^3.

Covers the degeneration chain of the four-nodal (Cayley) cubic: singular
points and their types, line enumeration, residual/triple-line geometry in
pencils of planes, the taxonomy label, and the group-law arithmetic on cones
over smooth plane cubics.

The taxonomy decision runs: (1) dimension of the singular locus; (2) isolated
case: classify the points and match the multiset (4xA1, 2xA1+A3, A1+A5,
other ADE) with the simple elliptic cone vertex as its own case; (3) a
surface singular along a line is a cone (base smooth/nodal/cuspidal for the
elliptic cone / X8 / X9 cases) or not (X6 / X7 / other separated by the
number of planes cutting the line triply: 0 / 1 / else).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .continuation import (
    PolySystem,
    TrackOptions,
    polish_projective_zero,
    solve_total_degree,
)
from .polynomials import (
    Poly,
    binary_form_roots,
    exact_kernel,
    exact_rank,
    numeric_kernel,
    rational_roots,
    restrict_to_subspace,
    univariate_roots,
)
from .projective import Subspace, dedup_by_plucker, plucker_distance, sort_by_plucker
from .singularities import (
    ClassificationAmbiguous,
    ConeReport,
    LocalClass,
    _rationalize_point,
    is_cone,
    local_class,
)


class NotACone(ValueError):
    pass


@dataclass(frozen=True)
class CubicSurface:
    g: Poly  # homogeneous cubic in 4 variables
    ambient_frame: Subspace | None = None  # the P^3 inside P^5, when cut from a fourfold

    def __post_init__(self):
        if self.g.n != 4 or self.g.degree() != 3 or not self.g.is_homogeneous():
            raise ValueError("need a homogeneous cubic in 4 variables")

    @property
    def exact(self) -> bool:
        return self.g.exact


def surface_from_span(y, plane3: Subspace) -> CubicSurface:
    """Cut a fourfold by a P^3."""
    if plane3.dim != 3:
        raise ValueError("need a 3-dimensional subspace")
    exact = y.exact and plane3.exact
    g = restrict_to_subspace(y.f if exact else y.f.to_approx(),
                             plane3.frame() if exact
                             else [[complex(v) for v in r] for r in plane3.frame()])
    return CubicSurface(g, ambient_frame=plane3)


@dataclass(frozen=True)
class PencilEntry:
    parameter: object  # pencil parameter t, or None for the plane at infinity
    plane: Subspace
    residual: Subspace
    pattern: tuple[int, int]  # multiplicities (of L, of the residual): (2,1) or (3,0)

    @property
    def is_triple(self) -> bool:
        return self.pattern == (3, 0)


@dataclass(frozen=True)
class SurfaceLineRecord:
    line: Subspace
    singular_points_met: tuple
    pencil: tuple[PencilEntry, ...]
    triple_planes: tuple[Subspace, ...]


@dataclass(frozen=True)
class LineEnumeration:
    finite: bool
    records: tuple[SurfaceLineRecord, ...] = ()
    ruling: str = ""  # description when infinitely many lines exist
    cone: ConeReport | None = None
    singular_line: Subspace | None = None

    @property
    def count(self) -> int:
        if not self.finite:
            raise ValueError("infinitely many lines")
        return len(self.records)


@dataclass(frozen=True)
class SurfaceTaxon:
    label: str
    sing_points: tuple = ()       # (point, LocalClass)
    cone: ConeReport | None = None
    singular_line: Subspace | None = None
    triple_plane_count: int | None = None
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# singular points
# ---------------------------------------------------------------------------


def _singular_witnesses(s: CubicSurface, seed: int = 0,
                        opts: TrackOptions | None = None) -> list[np.ndarray]:
    """Witness points of the singular locus.

    Two solves: three random combinations of the partials (isolated hunt,
    Bezout 8) and two combinations plus a random hyperplane (Bezout 4), which
    samples a positive-dimensional singular locus at a generic position so a
    singular line yields at least two distinct witnesses.
    """
    opts = opts or TrackOptions()
    g = s.g.to_approx()
    parts = [g.partial(i) for i in range(4)]
    scale = max(1.0, g.coeff_norm())
    out: list[np.ndarray] = []
    # two passes of each variant: deep singular points lose paths easily, and
    # a second set of random combinations recovers them
    for variant in (0, 1, 2, 3):
        rng = random.Random(seed + 7717 * variant)

        def rand_lin(const):
            coeffs = {tuple(1 if j == i else 0 for j in range(4)):
                      complex(rng.gauss(0, 1), rng.gauss(0, 1)) for i in range(4)}
            if const:
                coeffs[(0, 0, 0, 0)] = -1.0
            return Poly(4, coeffs, exact=False)

        n_combos = 3 if variant % 2 == 0 else 2
        eqs = []
        for _ in range(n_combos):
            acc = Poly.zero(4, exact=False)
            for p in parts:
                acc = acc + p.scale(complex(rng.gauss(0, 1), rng.gauss(0, 1)))
            eqs.append(acc)
        if variant % 2 == 1:
            eqs.append(rand_lin(const=False))
        eqs.append(rand_lin(const=True))
        results = solve_total_degree(PolySystem(tuple(eqs), 4), opts,
                                     seed=seed + 3 + 31 * variant)
        for r in results:
            pt = r.endpoint
            if not np.all(np.isfinite(pt)) or np.linalg.norm(pt) > 1e5:
                continue
            # paths stalling near a deep singular point can be far off; the
            # post-polish residual is the real gate, so pre-screen loosely
            if max(abs(p.evaluate(pt)) for p in parts) > 1.0 * scale * max(
                    1.0, float(np.linalg.norm(pt)) ** 2):
                continue
            polished, _ = polish_projective_zero(parts, pt)
            resid = max(abs(p.evaluate(polished)) for p in parts)
            if resid < 1e-9 * scale * max(1.0, float(np.linalg.norm(polished)) ** 2):
                out.append(polished / polished[int(np.argmax(np.abs(polished)))])
    return out


def _cluster_points(points: list[np.ndarray], radius: float = 1e-6):
    clusters: list[list[np.ndarray]] = []
    for w in points:
        for cl in clusters:
            if np.linalg.norm(w - cl[0]) < radius * max(1.0, np.linalg.norm(cl[0])):
                cl.append(w)
                break
        else:
            clusters.append([w])
    return [np.mean(cl, axis=0) for cl in clusters]


def _singular_line(s: CubicSurface, centers: list[np.ndarray]):
    """An exact or numeric line inside the singular locus, if one exists."""
    g = s.g
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            cand_rows = [centers[i], centers[j]]
            if s.exact:
                try:
                    approx_line = Subspace(cand_rows, exact=False)
                except ValueError:
                    approx_line = None
                line = _rationalize_line(approx_line, max_den=2000, tol=1e-6) \
                    if approx_line is not None else None
                if line is not None:
                    rest = [restrict_to_subspace(p, line.frame()) for p in g.gradient()]
                    if all(r.is_zero() for r in rest):
                        return line
            try:
                line = Subspace(cand_rows, exact=False)
            except ValueError:
                continue
            rest = [restrict_to_subspace(p.to_approx(),
                                         [[complex(v) for v in r] for r in line.frame()])
                    for p in g.gradient()]
            scale = max(1.0, g.coeff_norm())
            if all(r.coeff_norm() < 1e-7 * scale for r in rest):
                return line
    return None


def _canonical_rational_point(pt) -> tuple:
    """Scale an exact projective point so its first nonzero entry is 1."""
    lead = next(v for v in pt if v != 0)
    return tuple(Fraction(v) / lead for v in pt)


def _hessian_minors(g: Poly) -> list[Poly]:
    """All 3x3 minors of the 4x4 second-partials matrix (cubics).

    They vanish at every A_k point with k >= 2 (the homogeneous Hessian drops
    to rank 2 there), giving a deflated system that localizes deep points
    sharply where the bare gradient only manages O(tol^(1/(k+1)))."""
    h = [[g.partial(i).partial(j) for j in range(4)] for i in range(4)]
    out = []
    import itertools
    for rows in itertools.combinations(range(4), 3):
        for cols in itertools.combinations(range(4), 3):
            m = [[h[r][c] for c in cols] for r in rows]
            det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                   - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                   + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
            out.append(det)
    return out


def _deflated_polish_if_deep(g: Poly, parts, minors, pt: np.ndarray) -> np.ndarray:
    """Re-polish on the deflated system when the Hessian looks corank >= 2.

    Accepted only when the refined point stays within the localization
    scatter of the original: the deflated system has no solution at a plain
    node, and a least-squares jump to some other singular point would pass a
    residual-only test.
    """
    hess = np.array([[complex(g.partial(i).partial(j).evaluate(pt)) for j in range(4)]
                     for i in range(4)])
    svals = np.linalg.svd(hess, compute_uv=False)
    if svals[0] == 0 or svals[2] / svals[0] > 1e-2:
        return pt
    refined, _ = polish_projective_zero(minors + parts, pt)
    if not np.all(np.isfinite(refined)):
        return pt
    if _proj_dist(refined, pt) > 0.05:
        return pt
    old = max(abs(p.evaluate(pt)) for p in parts)
    new = max(abs(p.evaluate(refined)) for p in parts)
    return refined if new <= max(old, 1e-30) * 10 else pt


def singular_points(s: CubicSurface, seed: int = 0):
    """Isolated singular points with classification; detects singular lines.

    Returns (list of (point, LocalClass), singular_line or None).  Witnesses
    of a deep A_k are only localized to O(tol^(1/(k+1))) by the gradient
    residual, so exact surfaces snap each cluster to nearby rationals with a
    coarse tolerance and keep only those that verify exactly (a wrong snap
    cannot verify: singular points are isolated); numeric leftovers merge in
    a second pass before classification.
    """
    witnesses = _singular_witnesses(s, seed=seed)
    centers = _cluster_points(witnesses)
    line = _singular_line(s, centers) if len(centers) >= 2 else None
    if line is not None:
        return [], line

    gg = s.g.to_approx()
    parts = [gg.partial(i) for i in range(4)]
    minors = [m.to_approx() for m in _hessian_minors(gg)]
    centers = [_deflated_polish_if_deep(gg, parts, minors, c) for c in centers]
    centers = [c / c[int(np.argmax(np.abs(c)))] for c in centers]
    centers = _cluster_points(centers, radius=1e-6)

    exact_pts: dict[tuple, None] = {}
    leftovers: list[np.ndarray] = []
    for c in centers:
        if s.exact:
            rat = _rationalize_point(c, max_den=120, tol=5e-2)
            if rat is not None and s.g.evaluate(list(rat)) == 0 and \
                    all(p.evaluate(list(rat)) == 0 for p in s.g.gradient()):
                exact_pts[_canonical_rational_point(rat)] = None
                continue
        leftovers.append(c)
    # residual witnesses inside the localization basin of an exact point are
    # the same singularity seen with deep-multiplicity scatter
    exact_arr = [np.array([complex(v) for v in p]) for p in exact_pts]
    exact_arr = [a / a[int(np.argmax(np.abs(a)))] for a in exact_arr]
    leftovers = [c for c in leftovers
                 if all(np.linalg.norm(c - a) > 5e-2 * max(1.0, np.linalg.norm(a))
                        for a in exact_arr)]
    # numeric points carry no exact certificate, so they must beat a much
    # tighter residual gate than snap candidates (stalled near-misses sit
    # around 1e-8 relative, honest polished points at 1e-13 or better)
    scale = max(1.0, gg.coeff_norm())
    leftovers = [c for c in leftovers
                 if max(abs(p.evaluate(c)) for p in parts)
                 < 1e-11 * scale * max(1.0, float(np.linalg.norm(c)) ** 2)]
    leftovers = _cluster_points(leftovers, radius=1e-3)

    out = []
    for pt in exact_pts:
        out.append((pt, local_class(s.g, list(pt))))
    for c in leftovers:
        cls = local_class(s.g.to_approx(), list(c))
        out.append((tuple(complex(v) for v in c), cls))
    return out, None


# ---------------------------------------------------------------------------
# residual pencils
# ---------------------------------------------------------------------------


def _complete_line_frame(line: Subspace):
    rows = [list(r) for r in line.frame()]
    exact = line.exact
    extras = []
    for j in range(4):
        cand = [Fraction(1 if i == j else 0) if exact else complex(i == j)
                for i in range(4)]
        test = rows + extras + [cand]
        if exact:
            ok = exact_rank(test) == len(test)
        else:
            from .polynomials import numeric_rank
            ok = numeric_rank(np.array(test, dtype=complex)).rank == len(test)
        if ok:
            extras.append(cand)
        if len(extras) == 2:
            break
    return rows, extras


def residual_pencil(s: CubicSurface, line: Subspace,
                    tol: float = 1e-9) -> SurfaceLineRecord:
    """Sweep the pencil of planes through a line of the surface.

    In plane coordinates (alpha, beta, gamma) with the line at {gamma = 0},
    the section is gamma-divisible automatically; tangency along the line
    means the three gamma^1 coefficients vanish, which is a polynomial
    condition on the pencil parameter solved exactly over the rationals and
    numerically otherwise.  Tangent planes record their residual line
    (the gamma^2-quotient), triple planes are those whose residual is the
    line itself.
    """
    exact = s.exact and line.exact
    g = s.g if exact else s.g.to_approx()
    rest_line = restrict_to_subspace(g, line.frame() if exact else
                                     [[complex(v) for v in r] for r in line.frame()])
    if not (rest_line.is_zero() if exact
            else rest_line.coeff_norm() < 1e-7 * max(1.0, g.coeff_norm())):
        raise ValueError("line does not lie on the surface")
    rows, extras = _complete_line_frame(line if exact else line.to_approx())
    v, w = extras

    # section over the pencil: coefficients as polynomials in the parameter
    # use two symbolic passes: restrict to span(L, v + t w) with t symbolic by
    # working in 4 plane variables (alpha, beta, gamma, t is handled by
    # evaluating coefficient polynomials)
    def section(third):
        return restrict_to_subspace(g, rows + [third])

    # tangency conditions as polynomials in t: c_mono(t) for gamma^1 monomials
    # computed by interpolation: degree <= 3 in t, sample at 5 points
    samples = ([Fraction(k) for k in range(-2, 3)] if exact
               else [complex(k, 0.3 * k * k + 0.1) for k in range(-2, 3)])
    mono_g1 = [(2, 0, 1), (1, 1, 1), (0, 2, 1)]
    mono_g2 = [(1, 0, 2), (0, 1, 2)]
    mono_g3 = [(0, 0, 3)]
    sample_vals = {m: [] for m in mono_g1 + mono_g2 + mono_g3}
    for t in samples:
        third = [a + t * b for a, b in zip(v, w)]
        sec = section(third)
        for m in sample_vals:
            sample_vals[m].append(sec.coeff(m))

    def interp(vals):
        # coefficients of the degree-<=4 polynomial through the samples
        n = len(samples)
        if exact:
            mat = [[samples[i] ** k for k in range(n)] for i in range(n)]
            from .polynomials import exact_solve
            sol = exact_solve(mat, vals)
            return sol
        mat = np.array([[samples[i] ** k for k in range(n)] for i in range(n)],
                       dtype=complex)
        return list(np.linalg.solve(mat, np.array(vals, dtype=complex)))

    cpolys = {m: interp(sample_vals[m]) for m in mono_g1}

    # common parameter roots of the three tangency conditions
    def poly_norm(c):
        return max((abs(complex(x)) for x in c), default=0.0)

    lead = max(cpolys.values(), key=poly_norm)
    scale = max(poly_norm(c) for c in cpolys.values()) or 1.0
    # gamma^2 coefficient polynomials in t, for the triple-plane condition
    cpolys_g2 = {m: interp(sample_vals[m]) for m in mono_g2}

    def _common_roots_g2():
        a, b = cpolys_g2[mono_g2[0]], cpolys_g2[mono_g2[1]]
        if exact:
            base = a if any(x != 0 for x in a) else b
            if all(x == 0 for x in base):
                return []
            out = []
            for root, _ in rational_roots(base):
                va = sum(cc * root ** kk for kk, cc in enumerate(a))
                vb = sum(cc * root ** kk for kk, cc in enumerate(b))
                if va == 0 and vb == 0:
                    out.append(root)
            return out
        sc = max(poly_norm(a), poly_norm(b)) or 1.0
        base = a if poly_norm(a) >= poly_norm(b) else b
        deg = len(base) - 1
        while deg > 0 and abs(complex(base[deg])) < 1e-10 * sc:
            deg -= 1
        if deg < 1:
            return []
        out = []
        for root, _ in univariate_roots([complex(x) for x in base[:deg + 1]], tol=1e-8):
            va = abs(sum(complex(cc) * root ** kk for kk, cc in enumerate(a)))
            vb = abs(sum(complex(cc) * root ** kk for kk, cc in enumerate(b)))
            if max(va, vb) < 1e-6 * sc * max(1.0, abs(root)) ** 2:
                out.append(root)
        return out

    candidates: list = []
    if exact:
        if all(all(x == 0 for x in c) for c in cpolys.values()):
            # every plane is tangent (line inside the singular locus); the
            # triple planes solve the two gamma^2-coefficient conditions
            candidates = samples + _common_roots_g2()
        else:
            base = next(c for c in cpolys.values() if any(x != 0 for x in c))
            for root, _ in rational_roots(base):
                ok = True
                for c in cpolys.values():
                    val = sum(cc * root ** k for k, cc in enumerate(c))
                    if val != 0:
                        ok = False
                if ok:
                    candidates.append(root)
    else:
        if all(poly_norm(c) < 1e-9 * max(1.0, g.coeff_norm()) for c in cpolys.values()):
            candidates = samples + _common_roots_g2()
        else:
            base = lead
            deg = len(base) - 1
            while deg > 0 and abs(complex(base[deg])) < 1e-12 * scale:
                deg -= 1
            if deg >= 1:
                for root, _ in univariate_roots([complex(x) for x in base[:deg + 1]],
                                                tol=1e-8):
                    vals = [abs(sum(complex(cc) * root ** k for k, cc in enumerate(c)))
                            for c in cpolys.values()]
                    if max(vals) < 1e-6 * scale * max(1.0, abs(root)) ** 3:
                        candidates.append(root)

    entries = []
    triples = []

    def handle(t, third):
        sec = section(third)
        # drop gamma^0 and gamma^1 dust for numeric input
        if not exact:
            cn = max(1.0, sec.coeff_norm())
            terms = {e: c for e, c in sec.terms.items()
                     if not (e[2] <= 1 and abs(complex(c)) < 1e-6 * cn)}
            sec = Poly(3, terms, exact=False)
        if any(e[2] <= 1 for e in sec.terms):
            return  # not actually divisible by gamma^2
        a = sec.coeff(mono_g2[0])
        b = sec.coeff(mono_g2[1])
        c3 = sec.coeff(mono_g3[0])
        entry_exact = exact and not isinstance(t, complex)
        frame_rows = rows + [third]
        plane = Subspace(frame_rows, exact=entry_exact)
        lf = Poly.linear_form([a, b, c3], exact=entry_exact)
        if lf.is_zero():
            return
        res_plane_line = _plane_line(frame_rows, lf, entry_exact)
        if (exact and a == 0 and b == 0) or (not exact and
                max(abs(complex(a)), abs(complex(b)))
                < max(tol, 1e-7) * max(1.0, abs(complex(c3)))):
            entries.append(PencilEntry(t, plane, line, (3, 0)))
            triples.append(plane)
        else:
            entries.append(PencilEntry(t, plane, res_plane_line, (2, 1)))

    seen = set()
    for t in candidates:
        key = repr(t) if exact else (round(complex(t).real, 9), round(complex(t).imag, 9))
        if key in seen:
            continue
        seen.add(key)
        handle(t, [a + t * b for a, b in zip(v, w)])
    # the plane at infinity span(L, w)
    handle(None, list(w))

    sing_met = ()
    return SurfaceLineRecord(line=line, singular_points_met=sing_met,
                             pencil=tuple(entries), triple_planes=tuple(triples))


def _plane_line(frame_rows: list, lf: Poly, exact: bool) -> Subspace:
    """The line {lf = 0} of the plane spanned by frame_rows (the same rows the
    restriction used: a canonicalized subspace basis would permute the
    coordinates lf refers to)."""
    if lf.exact:
        kern = exact_kernel([[lf.coeff(tuple(1 if j == i else 0 for j in range(3)))
                              for i in range(3)]])
    else:
        kern = numeric_kernel(np.array([[complex(lf.coeff(tuple(1 if j == i else 0
                                                                for j in range(3))))
                                         for i in range(3)]]))
    pts = []
    for vvec in kern:
        pt = None
        for c, row in zip(vvec, frame_rows):
            add = [c * x for x in row]
            pt = add if pt is None else [a + b for a, b in zip(pt, add)]
        pts.append(pt)
    return Subspace(pts, exact=exact and lf.exact)


# ---------------------------------------------------------------------------
# line enumeration
# ---------------------------------------------------------------------------


def _rationalize_line(l: Subspace, max_den: int = 120, tol: float = 1e-7):
    """Rationalize a numeric line via its reduced-echelon representative.

    Orthonormalized basis rows never look rational, but the echelon form's
    entries are coordinate ratios and recover small rationals directly.
    """
    b = l.matrix().copy()
    # greedy column-pivot echelon reduction
    piv0 = int(np.argmax(np.abs(b[0]) + np.abs(b[1])))
    if abs(b[0][piv0]) < abs(b[1][piv0]):
        b = b[::-1].copy()
    b[0] = b[0] / b[0][piv0]
    b[1] = b[1] - b[1][piv0] * b[0]
    rest = [k for k in range(b.shape[1]) if k != piv0]
    piv1 = rest[int(np.argmax(np.abs(b[1][rest])))]
    if abs(b[1][piv1]) < 1e-12 * max(1.0, np.max(np.abs(b))):
        return None
    b[1] = b[1] / b[1][piv1]
    b[0] = b[0] - b[0][piv1] * b[1]
    rows = [_rationalize_point(row, max_den=max_den, tol=tol) for row in b]
    if any(r is None for r in rows):
        return None
    try:
        return Subspace([list(r) for r in rows])
    except ValueError:
        return None


def _chart_line_system(s: CubicSurface, i: int, j: int):
    """Line chart (i, j): rows e_i + a e_k + b e_l, e_j + c e_k + d e_l."""
    ks = [k for k in range(4) if k not in (i, j)]
    g = s.g.to_approx()
    # unknowns (a, b, c, d); build the restriction coefficients symbolically
    # in 6 variables (a, b, c, d, sp, tp) then read binary-cubic coefficients
    n = 6
    a, b, c, d, sp, tp = [Poly.variable(n, k, exact=False) for k in range(6)]
    coords = [Poly.zero(n, exact=False)] * 4
    coords = {}
    for k in range(4):
        coords[k] = Poly.zero(n, exact=False)
    one = Poly.constant(n, 1.0 + 0j, exact=False)
    coords[i] = sp
    coords[j] = tp
    coords[ks[0]] = sp * a + tp * c
    coords[ks[1]] = sp * b + tp * d
    images = [coords[k] for k in range(4)]
    sec = g.substitute(images)
    eqs = []
    for m in range(4):
        terms = {}
        for e, cc in sec.terms.items():
            if e[4] == 3 - m and e[5] == m:
                terms[e[:4]] = cc
        eqs.append(Poly(4, terms, exact=False))
    return eqs, ks


def lines_on_surface(s: CubicSurface, seed: int = 0,
                     opts: TrackOptions | None = None,
                     with_pencils: bool = True) -> LineEnumeration:
    """Enumerate the lines of a cubic surface.

    Surfaces singular along a line (cones, the non-normal chain) carry
    infinitely many lines and are returned as a tagged ruling outcome.  The
    finite case tracks 81 paths in each of the six line charts of the
    Grassmannian, verifies candidates by containment (exactly whenever they
    rationalize), and deduplicates.
    """
    opts = opts or TrackOptions()
    cone = is_cone(s.g, seed=seed)
    if cone.vertex is not None:
        return LineEnumeration(finite=False,
                               ruling=f"cone over a {cone.base_kind} plane cubic",
                               cone=cone)
    pts, line = singular_points(s, seed=seed)
    if line is not None:
        return LineEnumeration(finite=False,
                               ruling="non-normal surface singular along a line",
                               singular_line=line)

    g = s.g.to_approx()
    scale = max(1.0, g.coeff_norm())
    found: list[Subspace] = []
    for i in range(4):
        for j in range(i + 1, 4):
            eqs, ks = _chart_line_system(s, i, j)
            results = solve_total_degree(PolySystem(tuple(eqs), 4), opts,
                                         seed=seed + 17 * (4 * i + j))
            from .continuation import newton_polish
            for r in results:
                pt = r.endpoint
                if not np.all(np.isfinite(pt)) or np.linalg.norm(pt) > 1e7:
                    continue
                resid = max(abs(e.evaluate(pt)) for e in eqs)
                if resid > 1e-4 * scale * max(1.0, float(np.linalg.norm(pt)) ** 3):
                    continue
                # lines of singular surfaces have multiplicity in the chart
                # systems, leaving converged endpoints only ~tol^(1/m)
                # accurate; polishing restores them
                pt, _ = newton_polish(eqs, pt, iters=120, tol=1e-300)
                aa, bb, cc, dd = pt
                rows = [[0.0] * 4 for _ in range(2)]
                rows[0][i] = 1.0
                rows[0][ks[0]] = aa
                rows[0][ks[1]] = bb
                rows[1][j] = 1.0
                rows[1][ks[0]] = cc
                rows[1][ks[1]] = dd
                try:
                    cand = Subspace(rows, exact=False)
                except ValueError:
                    continue  # polishing collapsed a junk candidate
                rest = restrict_to_subspace(g, [[complex(v) for v in row]
                                                for row in cand.frame()])
                nrm = max(1.0, float(np.linalg.norm(np.array(rows, dtype=complex))) ** 3)
                if rest.coeff_norm() < 1e-7 * scale * nrm:
                    found.append(cand)
    found = dedup_by_plucker(found, tol=1e-6)

    # exact verification: rationalize whenever possible.  The snap tolerance
    # is coarse because multiple lines (through deep singular points) are
    # localized only to tol^(1/multiplicity); exact containment verification
    # makes a wrong snap impossible to accept.
    exact_lines: list[Subspace] = []
    numeric_lines: list[Subspace] = []
    for l in found:
        if s.exact:
            cand = _rationalize_line(l, max_den=120, tol=1e-2)
            if cand is not None and restrict_to_subspace(s.g, cand.frame()).is_zero():
                exact_lines.append(cand)
                continue
        numeric_lines.append(l)
    exact_lines = dedup_by_plucker(exact_lines, tol=1e-9)
    numeric_lines = [l for l in dedup_by_plucker(numeric_lines, tol=1e-3)
                     if all(plucker_distance(l, e) > 1e-3 for e in exact_lines)]
    lines = sort_by_plucker(exact_lines + numeric_lines)

    records = []
    sing_pts = [np.array([complex(v) for v in p]) for p, _ in pts]
    for l in lines:
        met = []
        for k, (p, cls) in enumerate(pts):
            arr = sing_pts[k]
            if l.to_approx().contains_point(arr, tol=1e-7):
                met.append(p)
        pencil = residual_pencil(s, l) if with_pencils else \
            SurfaceLineRecord(l, (), (), ())
        records.append(SurfaceLineRecord(line=l, singular_points_met=tuple(met),
                                         pencil=pencil.pencil,
                                         triple_planes=pencil.triple_planes))
    return LineEnumeration(finite=True, records=tuple(records))


# ---------------------------------------------------------------------------
# taxonomy
# ---------------------------------------------------------------------------


def classify_surface(s: CubicSurface, seed: int = 0) -> SurfaceTaxon:
    pts, line = singular_points(s, seed=seed)

    if line is None:
        labels = sorted(cls.label() for _, cls in pts)
        if not labels:
            return SurfaceTaxon("Smooth")
        if labels == ["SimpleElliptic"]:
            return SurfaceTaxon("SimpleElliptic", sing_points=tuple(pts),
                                cone=is_cone(s.g, seed=seed))
        if all(cls.is_ak() for _, cls in pts):
            if labels == ["A1"] * 4:
                return SurfaceTaxon("FourA1", sing_points=tuple(pts))
            if labels == ["A1", "A1", "A3"]:
                return SurfaceTaxon("TwoA1A3", sing_points=tuple(pts))
            if labels == ["A1", "A5"]:
                return SurfaceTaxon("A1A5", sing_points=tuple(pts))
            return SurfaceTaxon("OtherADE", sing_points=tuple(pts))
        return SurfaceTaxon("OtherADE", sing_points=tuple(pts),
                            notes=("non-ADE isolated point present",))

    cone = is_cone(s.g, seed=seed)
    if cone.vertex is not None:
        if cone.base_kind == "smooth":
            return SurfaceTaxon("SimpleElliptic", cone=cone, singular_line=line)
        if cone.base_kind == "nodal":
            return SurfaceTaxon("X8", cone=cone, singular_line=line)
        if cone.base_kind == "cuspidal":
            return SurfaceTaxon("X9", cone=cone, singular_line=line)
        return SurfaceTaxon("NonNormalOther", cone=cone, singular_line=line)

    rec = residual_pencil(s, line)
    n_triple = len(rec.triple_planes)
    if n_triple == 0:
        return SurfaceTaxon("X6", singular_line=line, triple_plane_count=0)
    if n_triple == 1:
        return SurfaceTaxon("X7", singular_line=line, triple_plane_count=1)
    return SurfaceTaxon("NonNormalOther", singular_line=line,
                        triple_plane_count=n_triple)


# ---------------------------------------------------------------------------
# elliptic cone arithmetic
# ---------------------------------------------------------------------------


@dataclass
class EllipticCone:
    surface: CubicSurface
    vertex: np.ndarray
    base_frame: list  # three ambient vectors spanning the base plane
    base_cubic: Poly  # smooth plane cubic in base coordinates
    origin: np.ndarray | None = None  # flex chosen as the group origin

    def base_point_of_line(self, l: Subspace) -> np.ndarray:
        """Intersection of a ruling line with the base plane, in base coords."""
        m = np.array(self.base_frame, dtype=complex).T  # 4x3
        full = np.column_stack([m, np.array(self.vertex, dtype=complex)])
        pts = []
        for row in l.to_approx().frame():
            sol = np.linalg.solve(full, np.array([complex(v) for v in row]))
            pts.append(sol[:3])
        a, b = pts
        # the base point is the combination with zero vertex coordinate
        va = np.linalg.solve(full, np.array([complex(v) for v in l.to_approx().frame()[0]]))[3]
        vb = np.linalg.solve(full, np.array([complex(v) for v in l.to_approx().frame()[1]]))[3]
        comb = vb * a - va * b
        if np.linalg.norm(comb) < 1e-12:
            raise NotACone("line does not meet the base plane transversally")
        return comb / comb[int(np.argmax(np.abs(comb)))]

    def line_of_base_point(self, p: Sequence[complex]) -> Subspace:
        m = np.array(self.base_frame, dtype=complex).T
        amb = m @ np.array([complex(v) for v in p])
        return Subspace([list(amb), list(self.vertex)], exact=False)

    # -- chord constructions -------------------------------------------------

    def _third_intersection(self, p, q) -> np.ndarray:
        """Third point of the line through p and q (tangent when p == q)."""
        c = self.base_cubic.to_approx()
        p = np.array(p, dtype=complex)
        q = np.array(q, dtype=complex)
        same = np.linalg.norm(np.cross(p, q)) < 1e-10 * (np.linalg.norm(p) * np.linalg.norm(q))
        if same:
            grad = np.array([complex(pp.evaluate(list(p))) for pp in c.gradient()])
            kern = numeric_kernel(np.array([grad]), rank_tol=1e-10)
            dirs = [v for v in kern
                    if np.linalg.norm(np.cross(v, p)) > 1e-8 * np.linalg.norm(v)]
            q = dirs[0]
        rest = restrict_to_subspace(c, [list(p), list(q)])
        roots = binary_form_roots(rest, tol=1e-10)
        # polish each simple root to machine precision on the chord
        restc = rest.to_approx()
        d0 = restc.partial(0)
        d1 = restc.partial(1)
        polished_roots = []
        for (sraw, traw), mult in roots:
            if mult == 1:
                for _ in range(4):
                    val = restc.evaluate([sraw, traw])
                    if abs(sraw) >= abs(traw):
                        dv = d1.evaluate([sraw, traw])
                        if dv != 0:
                            traw = traw - val / dv
                    else:
                        dv = d0.evaluate([sraw, traw])
                        if dv != 0:
                            sraw = sraw - val / dv
            polished_roots.append(((sraw, traw), mult))
        roots = polished_roots
        # known roots: p at (1:0) (and with multiplicity 2 for a tangent)
        vals = []
        for (sraw, traw), mult in roots:
            for _ in range(mult):
                vals.append((sraw, traw))
        # remove the parameters corresponding to p (and q when distinct)
        def param_of(pt):
            # solve pt ~ s p + t q
            m = np.column_stack([p, q])
            sol, *_ = np.linalg.lstsq(m, pt, rcond=None)
            return sol

        remaining = list(vals)
        for known in ([p, p] if same else [p, q]):
            sol = param_of(np.array(known, dtype=complex))
            best = min(range(len(remaining)),
                       key=lambda k: _param_dist(remaining[k], sol))
            remaining.pop(best)
        if len(remaining) != 1:
            raise RuntimeError("third intersection not isolated")
        sraw, traw = remaining[0]
        out = sraw * p + traw * q
        out = out / out[int(np.argmax(np.abs(out)))]
        # polish onto the curve along the chord
        return out

    def negate(self, p) -> np.ndarray:
        return self._third_intersection(p, self.origin)

    def add(self, p, q) -> np.ndarray:
        return self.negate(self._third_intersection(p, q))

    def double(self, p) -> np.ndarray:
        return self.add(p, p)

    def minus_two(self, p) -> np.ndarray:
        """-2p via the group law (negate after doubling)."""
        return self.negate(self.double(p))

    def is_origin(self, p, tol: float = 1e-8) -> bool:
        return _proj_dist(np.asarray(p, complex), self.origin) < tol

    def residual_of(self, p) -> np.ndarray:
        """Geometric residual: tangent plane along the ruling line over p."""
        l = self.line_of_base_point(p)
        rec = residual_pencil(self.surface, l, tol=1e-8)
        tangents = list(rec.pencil)
        if not tangents:
            raise RuntimeError("no tangent plane found along the ruling line")
        entry = tangents[0]
        if entry.is_triple:
            return self.base_point_of_line(l)  # residual to itself
        return self.base_point_of_line(entry.residual)

    def is_two_torsion_pair(self, p, q, tol: float = 1e-7) -> bool:
        """Whether q = p + xi with xi 2-torsion (equal residuals)."""
        diff = self.add(q, self.negate(p))
        doubled = self.double(diff)
        return _proj_dist(doubled, self.origin) < tol

    def triple_lines(self, seed: int = 0) -> list[np.ndarray]:
        """The nine flexes of the base cubic (Hessian intersection)."""
        return curve_flexes(self.base_cubic, seed=seed)


def _param_dist(ab, cd):
    a = np.array([ab[0], ab[1]], dtype=complex)
    b = np.array([cd[0], cd[1]], dtype=complex)
    return _proj_dist(a, b)


def _proj_dist(a, b) -> float:
    """Scale-invariant distance of projective points, O(eps) at equality
    (gauge-aligned difference, not the sqrt-floored chordal metric)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return math.inf
    a = a / na
    b = b / nb
    j = int(np.argmax(np.abs(a)))
    if abs(b[j]) > 0.05:
        return float(np.linalg.norm(a / a[j] - b / b[j]) / np.linalg.norm(a / a[j]))
    inner = abs(np.vdot(a, b))
    return math.sqrt(max(0.0, 2 - 2 * min(1.0, inner)))


def hessian_cubic(c: Poly) -> Poly:
    """Hessian determinant of a ternary cubic (again a ternary cubic)."""
    h = [[c.partial(i).partial(j) for j in range(3)] for i in range(3)]
    return (h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
            - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
            + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]))


def curve_flexes(c: Poly, seed: int = 0) -> list[np.ndarray]:
    """Flexes of a smooth plane cubic: the nine Hessian intersections."""
    cc = c.to_approx()
    hh = hessian_cubic(cc)
    rng = random.Random(seed)
    chart = Poly(3, {tuple(1 if j == i else 0 for j in range(3)):
                     complex(rng.gauss(0, 1), rng.gauss(0, 1)) for i in range(3)}
                 | {(0, 0, 0): -1.0}, exact=False)
    results = solve_total_degree(PolySystem((cc, hh, chart), 3),
                                 TrackOptions(), seed=seed + 5)
    pts = []
    scale_c = max(1.0, cc.coeff_norm())
    scale_h = max(1.0, hh.coeff_norm())
    for r in results:
        if not r.converged:
            continue
        pt = r.endpoint
        nrm = max(1.0, float(np.linalg.norm(pt)) ** 3)
        if abs(cc.evaluate(pt)) < 1e-7 * scale_c * nrm and \
                abs(hh.evaluate(pt)) < 1e-7 * scale_h * nrm:
            pts.append(np.array(pt) / pt[int(np.argmax(np.abs(pt)))])
    return _cluster_points(pts, radius=1e-6)


def elliptic_cone_ops(s: CubicSurface, seed: int = 0) -> EllipticCone:
    """Group-law interface of a cone over a smooth plane cubic.

    The ruling lines are identified with the base curve; the origin of the
    group law is a flex (the first in a deterministic ordering), so the
    residual line over p is -2p and the triple lines sit at the 3-torsion.
    """
    taxon = classify_surface(s, seed=seed)
    if taxon.label != "SimpleElliptic":
        raise NotACone(f"surface classifies as {taxon.label}")
    cone = taxon.cone or is_cone(s.g, seed=seed)
    vertex = np.array([complex(v) for v in cone.vertex])
    piv = int(np.argmax(np.abs(vertex)))
    base_frame = [[1.0 + 0j if k == i else 0j for k in range(4)]
                  for i in range(4) if i != piv]
    base_cubic = restrict_to_subspace(s.g.to_approx(), base_frame)
    ec = EllipticCone(surface=s, vertex=vertex, base_frame=base_frame,
                      base_cubic=base_cubic)
    flexes = ec.triple_lines(seed=seed)
    if not flexes:
        raise NotACone("no flexes found on the base cubic")
    flexes.sort(key=lambda p: tuple(np.round(np.concatenate([p.real, p.imag]), 7)))
    ec.origin = flexes[0]
    return ec
