"""Local classification of isolated hypersurface surface singularities.

A_k recognition runs the splitting lemma on bounded jets: after centering the
point in an affine chart, the Hessian rank decides A_1 directly; in corank 1
the two Morse directions are eliminated by solving the critical equations as
truncated power series in the remaining variable (Newton on jets), and the
order m of the residual one-variable series gives A_{m-1}.  The default jet
bound 8 recognizes up to A_6, comfortably past the A_1..A_5 range this
project needs; deeper germs surface as BeyondJetBound, never as a silent A_k.

Exact rational input takes an exact path end to end: rank decisions by
fraction-free elimination and series arithmetic over Q, so fixtures are
classified with zero tolerance.  Approximate input reports singular-value
gaps and refuses (ClassificationAmbiguous) when a rank decision is closer
than a factor 1e3.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polynomials import (
    Poly,
    exact_kernel,
    exact_rank,
    numeric_rank,
    restrict_to_subspace,
)

GAP_REQUIREMENT = 1e3


class ClassificationAmbiguous(RuntimeError):
    """Numeric evidence too close to a rank/order boundary to decide."""


@dataclass(frozen=True)
class LocalClass:
    kind: str  # "Smooth" | "A" | "SimpleElliptic" | "NonIsolated" | "BeyondJetBound"
    k: int | None = None  # for kind == "A"
    corank: int | None = None
    hessian_rank: int | None = None
    gap: float = math.inf  # inf for exact decisions
    jet_order: int | None = None
    detail: str = ""

    def is_ak(self, k: int | None = None) -> bool:
        return self.kind == "A" and (k is None or self.k == k)

    def label(self) -> str:
        if self.kind == "A":
            return f"A{self.k}"
        return self.kind


def _is_exact_scalar(v) -> bool:
    return isinstance(v, (int, Fraction))


def _center_chart(g: Poly, q: Sequence) -> Poly:
    """Affine local equation at q: chart at the largest coordinate, q at 0."""
    n = g.n
    exact = g.exact and all(_is_exact_scalar(v) for v in q)
    vals = [Fraction(v) if exact else complex(v) for v in q]
    piv = max(range(n), key=lambda i: abs(complex(vals[i])))
    if vals[piv] == 0:
        raise ValueError("zero vector is not a projective point")
    vals = [v / vals[piv] for v in vals]
    rest = [i for i in range(n) if i != piv]
    images = []
    m = n - 1
    for i in range(n):
        if i == piv:
            images.append(Poly.constant(m, Fraction(1) if exact else 1.0 + 0j, exact=exact))
        else:
            j = rest.index(i)
            images.append(Poly.variable(m, j, exact=exact)
                          + Poly.constant(m, vals[i], exact=exact))
    return g.substitute(images) if exact else g.to_approx().substitute(images)


def _truncate(p: Poly, bound: int) -> Poly:
    return Poly(p.n, {e: c for e, c in p.terms.items() if sum(e) <= bound}, exact=p.exact)


def _hessian_at_zero(h: Poly) -> list[list]:
    n = h.n
    return [[h.partial(i).partial(j).evaluate([0] * n) for j in range(n)] for i in range(n)]


def _exact_sym_diagonalize(hess: list[list[Fraction]]) -> tuple[list[list[Fraction]], int]:
    """Congruence transform P with (P^T H P) diagonal; returns (P, rank).

    Column operations complete squares; when all diagonal entries vanish but
    an off-diagonal survives, a hyperbolic pair is created first.
    """
    n = len(hess)
    a = [[Fraction(v) for v in row] for row in hess]
    p = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    r = 0
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(col, n) for j in range(i + 1, n)
                         if a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # column_i += column_j creates a nonzero diagonal at i
            for k in range(n):
                a[k][i] += a[k][j]
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                p[k][i] += p[k][j]
            piv = i
        if piv != col:
            for k in range(n):
                a[k][col], a[k][piv] = a[k][piv], a[k][col]
            for k in range(n):
                a[col][k], a[piv][k] = a[piv][k], a[col][k]
            for k in range(n):
                p[k][col], p[k][piv] = p[k][piv], p[k][col]
        d = a[col][col]
        for j2 in range(n):
            if j2 != col and a[col][j2] != 0:
                f = a[col][j2] / d
                for k in range(n):
                    a[k][j2] -= f * a[k][col]
                for k in range(n):
                    a[j2][k] -= f * a[col][k]
                for k in range(n):
                    p[k][j2] -= f * p[k][col]
        r += 1
    return p, r


def _numeric_sym_diagonalize(hess: np.ndarray, rank_tol: float) -> tuple[np.ndarray, int, float]:
    """Complex-symmetric congruence diagonalization via Takagi-style SVD."""
    rep = numeric_rank(hess, rank_tol)
    # For complex symmetric H, svd gives H = U S V^H with V = conj(U) up to
    # phases; columns of conj(U) serve as congruence directions ordering the
    # quadratic form by strength.
    u, s, vh = np.linalg.svd(hess)
    p = u.conj()
    return p, rep.rank, rep.gap


def _split_series(h: Poly, morse_idx: list[int], rest_idx: list[int],
                  bound: int) -> Poly:
    """Eliminate the Morse variables: residual series in the rest variables.

    Solves grad_morse h = 0 for the morse variables as jets in the rest
    variables by Newton iteration; returns h with the critical section
    substituted, truncated at the bound.  h's quadratic part must be
    nondegenerate exactly on the morse block.
    """
    n = h.n
    m = len(rest_idx)
    exact = h.exact
    one = Fraction(1) if exact else 1.0 + 0j

    # current guesses U_i (poly in the rest variables) for each morse variable
    guesses = {i: Poly.zero(m, exact=exact) for i in morse_idx}
    grads = {i: h.partial(i) for i in morse_idx}
    hess0 = [[grads[i].partial(j).evaluate([0] * n) for j in morse_idx] for i in morse_idx]
    if exact:
        from .polynomials import exact_inverse
        hinv = exact_inverse(hess0)
    else:
        hinv = np.linalg.inv(np.array(hess0, dtype=complex))

    def images():
        out = []
        for i in range(n):
            if i in morse_idx:
                out.append(guesses[i])
            else:
                out.append(Poly.variable(m, rest_idx.index(i), exact=exact))
        return out

    # chord Newton gains one jet order per sweep
    for _ in range(bound + 2):
        imgs = images()
        gvals = [_truncate(grads[i].substitute(imgs), bound) for i in morse_idx]
        if all(gv.is_zero() for gv in gvals):
            break
        for a, i in enumerate(morse_idx):
            delta = Poly.zero(m, exact=exact)
            for b in range(len(morse_idx)):
                coef = hinv[a][b] if exact else hinv[a, b]
                delta = delta + gvals[b].scale(coef)
            guesses[i] = _truncate(guesses[i] - delta, bound)
    return _truncate(h.substitute(images()), bound)


def _series_order(p: Poly, bound: int, exact: bool, scale: float,
                  rel_floor: float = 1e-5) -> tuple[int | None, float]:
    """Lowest significant total degree and its decision gap.

    A coefficient counts as significant when it clears both the absolute
    noise floor and rel_floor times the largest coefficient of the series;
    the relative floor protects against small point-location errors faking a
    lower order (their parasitic coefficients scale with the offset).  The
    decision gap compares the leading significant coefficient with the
    largest discarded one below it and must exceed 1e3.
    """
    if exact:
        if p.is_zero():
            return None, math.inf
        return min(sum(e) for e in p.terms), math.inf
    by_order: dict[int, float] = {}
    for e, c in p.terms.items():
        d = sum(e)
        by_order[d] = max(by_order.get(d, 0.0), abs(complex(c)))
    if not by_order:
        return None, math.inf
    biggest = max(by_order.values())
    noise = max(1e-9 * scale, rel_floor * biggest)
    sig = [d for d in sorted(by_order) if by_order[d] > noise]
    if not sig:
        return None, math.inf
    m = sig[0]
    below = max((v for d, v in by_order.items() if d < m), default=0.0)
    gap = by_order[m] / below if below > 0 else math.inf
    if gap < GAP_REQUIREMENT:
        raise ClassificationAmbiguous(
            f"series order {m} decided by gap {gap:.1f} < {GAP_REQUIREMENT}")
    return m, gap


def _ternary_cubic_smooth(c: Poly, seed: int = 0) -> bool:
    """Whether the plane cubic c = 0 in P^2 is smooth (no common partial zero)."""
    from .continuation import PolySystem, TrackOptions, solve_total_degree

    parts = [pp.to_approx() for pp in c.gradient()]
    rng = random.Random(seed)
    # random chart: l(x) = 1, plus two random combinations of the partials
    chart = Poly(3, {(1, 0, 0): complex(rng.gauss(0, 1), rng.gauss(0, 1)),
                     (0, 1, 0): complex(rng.gauss(0, 1), rng.gauss(0, 1)),
                     (0, 0, 1): complex(rng.gauss(0, 1), rng.gauss(0, 1)),
                     (0, 0, 0): -1.0}, exact=False)
    eqs = []
    for i in range(2):
        acc = Poly.zero(3, exact=False)
        for p in parts:
            acc = acc + p.scale(complex(rng.gauss(0, 1), rng.gauss(0, 1)))
        eqs.append(acc)
    results = solve_total_degree(PolySystem((eqs[0], eqs[1], chart), 3),
                                 TrackOptions(), seed=seed + 1)
    scale = max(1.0, c.coeff_norm())
    from .continuation import polish_projective_zero
    for r in results:
        pt = r.endpoint
        # degenerate singular points (cusps) fail the convergence certificate
        if not np.all(np.isfinite(pt)) or np.linalg.norm(pt) > 1e6:
            continue
        if max(abs(p.evaluate(pt)) for p in parts) > 1e-2 * scale:
            continue
        polished, _ = polish_projective_zero(parts, pt)
        if max(abs(p.evaluate(polished)) for p in parts) < 1e-8 * scale:
            return False
    return True


def local_class(g: Poly, q: Sequence, jet_bound: int = 8,
                rank_tol: float = 1e-8) -> LocalClass:
    """Classify the germ of {g = 0} at the projective point q.

    g is a homogeneous form in n+1 >= 3 variables; q a point with g(q) = 0.
    Affine germs can be classified by passing the local equation together with
    q = origin in one more variable, or via `affine_local_class`.
    """
    h = _center_chart(g, q)
    return affine_local_class(h, jet_bound=jet_bound, rank_tol=rank_tol)


def affine_local_class(h: Poly, jet_bound: int = 8,
                       rank_tol: float = 1e-8) -> LocalClass:
    """Classify an affine germ h at the origin (h in 3 variables for surfaces)."""
    n = h.n
    exact = h.exact
    scale = h.coeff_norm() or 1.0
    val = h.evaluate([0] * n)
    if (exact and val != 0) or (not exact and abs(complex(val)) > 1e-8 * scale):
        raise ValueError("point is not on the hypersurface")
    grad = [h.partial(i).evaluate([0] * n) for i in range(n)]
    gnorm = math.sqrt(sum(abs(complex(v)) ** 2 for v in grad))
    if exact:
        if any(v != 0 for v in grad):
            return LocalClass("Smooth")
    elif gnorm > 1e-7 * scale:
        return LocalClass("Smooth", gap=gnorm / (1e-7 * scale))

    hess = _hessian_at_zero(h)
    if exact:
        p, rank = _exact_sym_diagonalize(hess)
        gap = math.inf
    else:
        arr = np.array([[complex(v) for v in row] for row in hess])
        p, rank, gap = _numeric_sym_diagonalize(arr, rank_tol)
        if gap < GAP_REQUIREMENT:
            raise ClassificationAmbiguous(
                f"Hessian rank {rank} decided by gap {gap:.1f} < {GAP_REQUIREMENT}")
    corank = n - rank

    if rank == n:
        return LocalClass("A", k=1, corank=0, hessian_rank=rank, gap=gap, jet_order=2)

    # change coordinates so the quadratic part is supported on the first
    # `rank` variables
    if exact:
        hh = h.substitute([
            Poly.linear_form([p[i][j] for j in range(n)], exact=True) for i in range(n)
        ])
    else:
        hh = h.substitute([
            Poly.linear_form([complex(p[i, j]) for j in range(n)], exact=False)
            for i in range(n)
        ])
    hh = _truncate(hh, jet_bound)

    morse = list(range(rank))
    rest = list(range(rank, n))

    if rank == n - 1:
        residual = _split_series(hh, morse, rest, jet_bound)
        order, ogap = _series_order(residual, jet_bound, exact, scale)
        if order is None:
            return LocalClass("NonIsolated" if exact else "BeyondJetBound",
                              corank=corank, hessian_rank=rank, gap=gap,
                              jet_order=jet_bound,
                              detail="residual series vanishes to the jet bound")
        if order > jet_bound - 1:
            return LocalClass("BeyondJetBound", corank=corank, hessian_rank=rank,
                              gap=min(gap, ogap), jet_order=order)
        return LocalClass("A", k=order - 1, corank=corank, hessian_rank=rank,
                          gap=min(gap, ogap), jet_order=order)

    # corank >= 2: not an A_k.  Cubic-cone test for the simple elliptic case.
    cubic_part = Poly(n, {e: c for e, c in hh.terms.items() if sum(e) == 3},
                      exact=exact)
    if rank == 0 and n == 3 and not cubic_part.is_zero():
        if _ternary_cubic_smooth(cubic_part):
            return LocalClass("SimpleElliptic", corank=corank, hessian_rank=0,
                              gap=gap, jet_order=3, detail="nondegenerate cubic cone")
    if rank >= 1:
        residual = _split_series(hh, morse, rest, jet_bound)
        order, ogap = _series_order(residual, jet_bound, exact, scale)
        if order is None:
            return LocalClass("NonIsolated" if exact else "BeyondJetBound",
                              corank=corank, hessian_rank=rank, gap=gap,
                              jet_order=jet_bound,
                              detail="residual series vanishes to the jet bound")
        return LocalClass("BeyondJetBound", corank=corank, hessian_rank=rank,
                          gap=min(gap, ogap), jet_order=order,
                          detail="corank 2 germ outside the A series")
    return LocalClass("BeyondJetBound", corank=corank, hessian_rank=rank, gap=gap,
                      jet_order=3, detail="degenerate cubic cone")


def plane_curve_local_class(c: Poly, q: Sequence, jet_bound: int = 8,
                            rank_tol: float = 1e-8) -> LocalClass:
    """Local class of a plane curve germ (c homogeneous in 3 variables)."""
    h = _center_chart(c, q)
    n = h.n
    exact = h.exact
    scale = h.coeff_norm() or 1.0
    grad = [h.partial(i).evaluate([0] * n) for i in range(n)]
    gnorm = math.sqrt(sum(abs(complex(v)) ** 2 for v in grad))
    if (exact and any(v != 0 for v in grad)) or (not exact and gnorm > 1e-7 * scale):
        return LocalClass("Smooth")
    hess = _hessian_at_zero(h)
    if exact:
        p, rank = _exact_sym_diagonalize(hess)
        gap = math.inf
    else:
        arr = np.array([[complex(v) for v in row] for row in hess])
        p, rank, gap = _numeric_sym_diagonalize(arr, rank_tol)
        if gap < GAP_REQUIREMENT:
            raise ClassificationAmbiguous(f"curve Hessian gap {gap:.1f}")
    if rank == 2:
        return LocalClass("A", k=1, corank=0, hessian_rank=2, gap=gap, jet_order=2)
    if rank == 1:
        if exact:
            hh = h.substitute([Poly.linear_form([p[i][j] for j in range(n)], exact=True)
                               for i in range(n)])
        else:
            hh = h.substitute([Poly.linear_form([complex(p[i, j]) for j in range(n)],
                                                exact=False) for i in range(n)])
        hh = _truncate(hh, jet_bound)
        residual = _split_series(hh, [0], [1], jet_bound)
        order, ogap = _series_order(residual, jet_bound, exact, scale)
        if order is None:
            return LocalClass("NonIsolated" if exact else "BeyondJetBound",
                              corank=1, hessian_rank=1, gap=gap, jet_order=jet_bound)
        return LocalClass("A", k=order - 1, corank=1, hessian_rank=1,
                          gap=min(gap, ogap), jet_order=order)
    return LocalClass("BeyondJetBound", corank=2, hessian_rank=0, gap=gap, jet_order=3,
                      detail="plane curve point of multiplicity >= 3")


@dataclass(frozen=True)
class ConeReport:
    vertex: tuple | None
    vertex_dim: int  # projective dimension of the vertex locus (-1: none)
    base_kind: str | None  # "smooth" | "nodal" | "cuspidal" | "other"
    base_singular_point: tuple | None = None


def is_cone(g: Poly, rank_tol: float = 1e-8, seed: int = 0) -> ConeReport:
    """Detect a cone structure of a homogeneous cubic in 4 variables.

    v is a vertex iff the directional derivative sum_i v_i * dg/dx_i vanishes
    identically (equivalently all first and second partials vanish at v); the
    vertex locus is the kernel of the coefficient matrix of the partials.
    The base curve is the restriction to a complementary plane, classified as
    smooth / nodal / cuspidal / other.
    """
    n = g.n
    monos = sorted({e for p in g.gradient() for e in p.terms})
    if g.exact:
        mat = [[g.partial(i).coeff(e) for i in range(n)] for e in monos]
        kern = exact_kernel(mat)
        vdim = len(kern) - 1
        if not kern:
            return ConeReport(None, -1, None)
        vertex = tuple(kern[0])
    else:
        mat = np.array([[complex(g.partial(i).coeff(e)) for i in range(n)] for e in monos])
        from .polynomials import numeric_kernel
        kern = numeric_kernel(mat, rank_tol)
        vdim = kern.shape[0] - 1
        if kern.shape[0] == 0:
            return ConeReport(None, -1, None)
        vertex = tuple(kern[0])

    # base: restrict to a coordinate plane missing the vertex
    piv = max(range(n), key=lambda i: abs(complex(vertex[i])))
    frame = [[1 if j == i else 0 for j in range(n)] for i in range(n) if i != piv]
    base = restrict_to_subspace(g if g.exact else g.to_approx(),
                                frame if g.exact else [[complex(v) for v in r] for r in frame])
    kind, sing_pt = _classify_plane_cubic(base, seed=seed)
    return ConeReport(vertex, vdim, kind, sing_pt)


def _classify_plane_cubic(c: Poly, seed: int = 0) -> tuple[str, tuple | None]:
    from .continuation import PolySystem, TrackOptions, solve_total_degree

    if _ternary_cubic_smooth(c, seed=seed):
        return "smooth", None
    # locate a singular point numerically and classify the germ
    rng = random.Random(seed + 7)
    parts = [p.to_approx() for p in c.gradient()]
    chart = Poly(3, {(1, 0, 0): complex(rng.gauss(0, 1), rng.gauss(0, 1)),
                     (0, 1, 0): complex(rng.gauss(0, 1), rng.gauss(0, 1)),
                     (0, 0, 1): complex(rng.gauss(0, 1), rng.gauss(0, 1)),
                     (0, 0, 0): -1.0}, exact=False)
    eqs = []
    for _ in range(2):
        acc = Poly.zero(3, exact=False)
        for p in parts:
            acc = acc + p.scale(complex(rng.gauss(0, 1), rng.gauss(0, 1)))
        eqs.append(acc)
    results = solve_total_degree(PolySystem((eqs[0], eqs[1], chart), 3),
                                 TrackOptions(), seed=seed + 9)
    scale = max(1.0, c.coeff_norm())
    from .continuation import polish_projective_zero
    best = None
    for r in results:
        if not np.all(np.isfinite(r.endpoint)) or np.linalg.norm(r.endpoint) > 1e6:
            continue
        if max(abs(p.evaluate(r.endpoint)) for p in parts) > 1e-2 * scale:
            continue
        polished, _ = polish_projective_zero(parts, r.endpoint)
        resid = max(abs(p.evaluate(polished)) for p in parts)
        if resid < 1e-7 * scale and (best is None or resid < best[1]):
            best = (polished, resid)
    if best is None:
        return "other", None
    pt = _rationalize_point(best[0])
    use = pt if pt is not None and c.exact else tuple(complex(v) for v in best[0])
    cls = plane_curve_local_class(c if (pt is not None and c.exact) else c.to_approx(), use)
    if cls.is_ak(1):
        return "nodal", tuple(use)
    if cls.is_ak(2):
        return "cuspidal", tuple(use)
    return "other", tuple(use)


def _rationalize_point(pt, max_den: int = 64, tol: float = 1e-9):
    """Try to read a projective point as small rationals; None if not close."""
    arr = np.asarray(pt, dtype=complex)
    j = int(np.argmax(np.abs(arr)))
    arr = arr / arr[j]
    if np.max(np.abs(arr.imag)) > tol * max(1.0, np.max(np.abs(arr))):
        return None
    out = []
    for v in arr.real:
        f = Fraction(v).limit_denominator(max_den)
        if abs(float(f) - v) > tol:
            return None
        out.append(f)
    return tuple(out)
