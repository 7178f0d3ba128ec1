"""The determinantal discriminant quintic of the projection from a line.

In the normal form z4 z0^2 + z5 z0 z1 + z3 z1^2 + z0 Q0 + z1 Q1 + P relative
to a type I line R, the plane through R over a base point z in P^3 meets the
fourfold in R plus the residual conic

    C_z(s, t, u) = z4 s^2 + z5 st + z3 t^2 + Q0 su + Q1 tu + P u^2 .

The quintic stores twice the Gram matrix of C_z in the plane coordinates
ordered (u, s, t):

    M = [[2P, Q0, Q1], [Q0, 2 z4, z5], [Q1, z5, 2 z3]],

so det M = 0 exactly where the conic is singular and rank M(q) = rank of the
conic (rank 1 at the double-line points, which are the fiber of the self-map
over R).  The singular locus of det M is computed by tracking three random
combinations of the four partial quartics (Bezout 64) and classified
pointwise; for a general R it consists of 16 nodes.
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
from .fourfold import CGForm, CubicFourfold, cg_normalize
from .polynomials import Poly, numeric_rank
from .projective import Subspace
from .singularities import (
    ClassificationAmbiguous,
    LocalClass,
    local_class,
    _rationalize_point,
)


class NormalizationFailure(RuntimeError):
    pass


class PositiveDimensionalSingLocus(RuntimeError):
    """The quintic is singular along a curve (reference line of type II or worse)."""


class RankNotOne(ValueError):
    """The conic over the point is not a double line."""


@dataclass(frozen=True)
class DiscriminantQuintic:
    cg: CGForm
    matrix: tuple  # 3x3 of Poly in the 4 base variables (z2, z3, z4, z5)
    det: Poly  # homogeneous degree 5
    exact: bool

    def matrix_at(self, q: Sequence) -> np.ndarray:
        return np.array([[complex(p.evaluate(list(q))) for p in row]
                         for row in self.matrix])


@dataclass(frozen=True)
class SingularPoint:
    point: tuple  # in the base P^3 coordinates (z2, z3, z4, z5)
    local: LocalClass
    residual: float  # max |partial| at the point, relative
    path_count: int  # incoming tracked paths in the cluster


@dataclass(frozen=True)
class QuinticSingReport:
    points: tuple[SingularPoint, ...]
    counts_by_type: dict
    total_with_multiplicity: int
    indeterminate: tuple = ()  # points whose classification was refused

    def count(self, label: str) -> int:
        return self.counts_by_type.get(label, 0)


def build_quintic(y: CubicFourfold, r_line: Subspace) -> DiscriminantQuintic:
    """Normalize relative to R and assemble the 2x-Gram matrix and its det."""
    try:
        cg = cg_normalize(y, r_line)
    except Exception as err:
        raise NormalizationFailure(str(err)) from err
    return quintic_from_cg(cg)


def quintic_from_cg(cg: CGForm) -> DiscriminantQuintic:
    exact = cg.exact
    two = Fraction(2) if exact else 2.0 + 0j
    z3 = Poly.variable(4, 1, exact=exact)
    z4 = Poly.variable(4, 2, exact=exact)
    z5 = Poly.variable(4, 3, exact=exact)
    m = ((cg.p.scale(two), cg.q0, cg.q1),
         (cg.q0, z4.scale(two), z5),
         (cg.q1, z5, z3.scale(two)))
    det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
           - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
           + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    if det.is_zero() or det.degree() != 5:
        raise NormalizationFailure("determinant is not a quintic")
    return DiscriminantQuintic(cg=cg, matrix=m, det=det, exact=exact)


def _collinear_triples(points: list[np.ndarray], tol: float = 1e-6) -> bool:
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            for k in range(j + 1, len(points)):
                m = np.vstack([points[i], points[j], points[k]])
                if numeric_rank(m, rank_tol=tol).rank <= 2:
                    return True
    return False


def rank1_minors(dq: DiscriminantQuintic) -> list[Poly]:
    """The six 2x2 minors of M, vanishing exactly on the rank-<=1 locus."""
    m = [[p.to_approx() for p in row] for row in dq.matrix]
    out = []
    for i in range(3):
        for j in range(i, 3):
            rows = [r for r in range(3) if r != i]
            colsel = [c for c in range(3) if c != j]
            out.append(m[rows[0]][colsel[0]] * m[rows[1]][colsel[1]]
                       - m[rows[0]][colsel[1]] * m[rows[1]][colsel[0]])
    return out


def _witness_solve(dq: DiscriminantQuintic, parts, g, scale, seed: int,
                   opts: TrackOptions, use_coordinate_subsystem: bool) -> list[np.ndarray]:
    rng = random.Random(seed)
    if use_coordinate_subsystem:
        eqs = [parts[1], parts[2], parts[3]]
    else:
        eqs = []
        for _ in range(3):
            acc = Poly.zero(4, exact=False)
            for p in parts:
                acc = acc + p.scale(complex(rng.gauss(0, 1), rng.gauss(0, 1)))
            eqs.append(acc)
    chart = Poly(4, {tuple(1 if j == i else 0 for j in range(4)):
                     complex(rng.gauss(0, 1), rng.gauss(0, 1)) for i in range(4)}
                 | {(0, 0, 0, 0): -1.0}, exact=False)
    results = solve_total_degree(PolySystem(tuple(eqs) + (chart,), 4), opts,
                                 seed=seed + 1)
    minors = rank1_minors(dq)
    mscale = max(1.0, max(p.coeff_norm() for p in minors))

    def prel(pt):
        return (max(abs(p.evaluate(pt)) for p in parts)
                / max(1.0, float(np.linalg.norm(pt)) ** 4))

    witnesses = []
    for r in results:
        pt = r.endpoint
        # multiple singular points (A3 and worse) sit at degenerate endpoints
        # where the convergence certificate fails; those paths are candidates
        # too, gated by the polished residual below
        if not np.all(np.isfinite(pt)) or np.linalg.norm(pt) > 1e5:
            continue
        if prel(pt) > 1e-1 * scale:
            continue
        polished, _ = polish_projective_zero(parts + [g], pt)
        # at an A_k with k >= 2 the partials only localize the point to
        # O(tol^(1/(k+1))); the rank-1 minors vanish to first order there, so
        # a second polish on minors+partials pins the point sharply
        refined, _ = polish_projective_zero(minors + parts, polished)
        if prel(refined) <= prel(polished) * 10:
            polished = refined
        nrm = float(np.linalg.norm(polished))
        minor_resid = max(abs(p.evaluate(polished)) for p in minors) / max(1.0, nrm ** 5)
        if prel(polished) < 1e-9 * scale and minor_resid < 1e-8 * mscale:
            witnesses.append(polished / polished[int(np.argmax(np.abs(polished)))])
    return witnesses


def quintic_singularities(dq: DiscriminantQuintic, seed: int = 0,
                          opts: TrackOptions | None = None,
                          cluster_radius: float = 1e-6,
                          jet_bound: int = 8,
                          use_coordinate_subsystem: bool = False,
                          max_attempts: int = 2) -> QuinticSingReport:
    """Solve and classify Sing(det M).

    Default subsystem: three random complex combinations of the four partials
    (with a random affine chart), endpoints filtered by all four partials and
    the quintic itself, polished, clustered (radius 1e-6 in normalized
    coordinates with an intra/inter separation assertion), and classified.
    When the absorbed-node total falls short of 16 the solve is repeated with
    fresh combinations and the witness sets merged, so a dropped path never
    silently loses a node.  `use_coordinate_subsystem` switches to the
    deterministic partials {d/dz3, d/dz4, d/dz5} fallback.
    """
    opts = opts or TrackOptions()
    g = dq.det.to_approx()
    parts = [g.partial(i) for i in range(4)]
    scale = max(1.0, g.coeff_norm())

    witnesses: list[np.ndarray] = []
    report = None
    for attempt in range(max_attempts):
        witnesses += _witness_solve(dq, parts, g, scale, seed + 1009 * attempt,
                                    opts, use_coordinate_subsystem)
        report = _classify_witnesses(dq, parts, g, scale, witnesses,
                                     cluster_radius, jet_bound)
        if report.total_with_multiplicity >= 16:
            break
    return report


def _classify_witnesses(dq, parts, g, scale, witnesses, cluster_radius,
                        jet_bound) -> QuinticSingReport:
    clusters: list[list[np.ndarray]] = []
    for w in witnesses:
        placed = False
        for cl in clusters:
            if np.linalg.norm(w - cl[0]) < cluster_radius * max(1.0, np.linalg.norm(cl[0])):
                cl.append(w)
                placed = True
                break
        if not placed:
            clusters.append([w])
    centers = [np.mean(cl, axis=0) for cl in clusters]

    # intra/inter separation sanity
    if len(centers) > 1:
        max_intra = max((max(np.linalg.norm(w - cl[0]) for w in cl) for cl in clusters),
                        default=0.0)
        min_inter = min(np.linalg.norm(centers[i] - centers[j])
                        for i in range(len(centers)) for j in range(i + 1, len(centers)))
        if min_inter > 0 and max_intra / min_inter > 1e-3:
            raise PositiveDimensionalSingLocus(
                f"cluster separation ratio {max_intra / min_inter:.2e} too poor")

    if len(centers) >= 5 and _collinear_triples(centers[:12]):
        if _singular_along_line(dq, centers):
            raise PositiveDimensionalSingLocus("singular along a line in the base")

    sing_points: list[SingularPoint] = []
    indeterminate = []
    for cl in clusters:
        center = np.mean(cl, axis=0)
        resid = max(abs(p.evaluate(center)) for p in parts) / scale
        exact_pt = _snap_exact(dq, center) if dq.exact else None
        try:
            if exact_pt is not None:
                cls = local_class(dq.det, list(exact_pt), jet_bound=jet_bound)
                pt_out = tuple(exact_pt)
                resid = 0.0
            else:
                cls = local_class(g, list(center), jet_bound=jet_bound)
                pt_out = tuple(complex(v) for v in center)
            sing_points.append(SingularPoint(pt_out, cls, float(resid), len(cl)))
        except ClassificationAmbiguous as err:
            indeterminate.append((tuple(complex(v) for v in center), str(err)))
        except ValueError as err:
            # cluster of near-misses that polished off the surface
            indeterminate.append((tuple(complex(v) for v in center), str(err)))

    counts: dict[str, int] = {}
    for sp in sing_points:
        counts[sp.local.label()] = counts.get(sp.local.label(), 0) + 1
    total = sum(_node_multiplicity(sp.local) for sp in sing_points)
    return QuinticSingReport(points=tuple(sing_points), counts_by_type=counts,
                             total_with_multiplicity=total,
                             indeterminate=tuple(indeterminate))


def _snap_exact(dq: DiscriminantQuintic, center: np.ndarray):
    """Snap a numeric cluster center to exact rationals when it verifies.

    Near-rational centers (the constrained family puts the A3 at a coordinate
    point) are only trusted after exact re-verification of the quintic and
    all four partials, so a loose snapping tolerance costs nothing.
    """
    rat = _rationalize_point(center, max_den=60, tol=2e-5)
    if rat is None:
        return None
    if dq.det.evaluate(list(rat)) != 0:
        return None
    if any(p.evaluate(list(rat)) != 0 for p in dq.det.gradient()):
        return None
    return rat


def _node_multiplicity(cls: LocalClass) -> int:
    """Node count absorbed by the singularity in the 16-node degeneration:
    an A_k point absorbs ceil((k+1)/2) colliding nodes (A1 -> 1, A3 -> 2)."""
    if cls.is_ak():
        return (cls.k + 1) // 2
    return 1


def _singular_along_line(dq: DiscriminantQuintic, centers: list[np.ndarray]) -> bool:
    for i in range(min(3, len(centers))):
        for j in range(i + 1, min(4, len(centers))):
            frame = [list(centers[i]), list(centers[j])]
            try:
                from .polynomials import restrict_to_subspace
                rest = [restrict_to_subspace(p.to_approx(), frame)
                        for p in dq.det.gradient()]
            except Exception:
                continue
            if all(r.coeff_norm() < 1e-6 * max(1.0, dq.det.coeff_norm()) for r in rest):
                return True
    return False


def node_to_line(dq: DiscriminantQuintic, q: Sequence,
                 rank1_tol: float = 1e-8) -> tuple[Subspace, float]:
    """The line over a double-line point of the base, in original coordinates.

    The conic over q has Gram matrix M(q)/2; rank 1 is certified by the
    second singular value (< rank1_tol * first), then the double line
    {w_u u + w_s s + w_t t = 0} is pulled back through the plane frame
    (e0, e1, q) and the normal-form frame.  Returns (line, rank-gap ratio).
    """
    mq = dq.matrix_at(q)
    s = np.linalg.svd(mq, compute_uv=False)
    if s[0] == 0 or s[1] / s[0] > rank1_tol:
        raise RankNotOne(f"second singular value ratio {s[1] / max(s[0], 1e-300):.2e}")
    gap = float(s[0] / s[1]) if s[1] > 0 else math.inf
    rows = [mq[i] for i in range(3)]
    w = rows[int(np.argmax([np.linalg.norm(r) for r in rows]))]
    # w is the coefficient vector of the double line in plane coords (u, s, t)
    kern = []
    piv = int(np.argmax(np.abs(w)))
    for i in range(3):
        if i == piv:
            continue
        v = np.zeros(3, dtype=complex)
        v[i] = 1.0
        v[piv] = -w[i] / w[piv]
        kern.append(v)
    # plane point with coordinates (u, s, t): u * zfull + s * e0 + t * e1
    zfull = np.zeros(6, dtype=complex)
    zfull[2:] = np.array([complex(v) for v in q])
    e0 = np.zeros(6, dtype=complex)
    e0[0] = 1
    e1 = np.zeros(6, dtype=complex)
    e1[1] = 1
    pts = [v[0] * zfull + v[1] * e0 + v[2] * e1 for v in kern]
    line_cg = Subspace(pts, exact=False)
    # back to original coordinates through the normal-form frame
    cols = np.array([[complex(v) for v in row] for row in dq.cg.frame_columns()]).T
    old = Subspace((cols @ np.array([list(p) for p in pts]).T).T, exact=False)
    return old, gap
