"""Monodromy of the degree-16 self-map: loop transport of fibers, the
branch-circle transposition, permutation-group generation, and the exact
group order by Schreier-Sims.

Loops live in the space of target lines: a base line R0 = span(a, b) is
deformed by complex multiples of a random anchor direction, every waypoint is
Newton-projected back onto the honest lines-on-Y locus, and the 16 solutions
of the direct tangency system are tracked segment by segment (the system's
coefficients are polynomial in the interpolation parameter, so each leg is an
ordinary polynomial homotopy).  Endpoint matching uses a nearest-neighbour
ratio test and refuses ambiguous assignments, so permutations are never
assembled from guesses; a failed loop is re-randomized, never patched.

Composition convention: traversing loop A then loop B yields
compose(perm_B, perm_A), i.e. left-to-right traversal is right-to-left
function composition; indices refer to the base fiber sorted by its canonical
Pluecker keys.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .continuation import (
    COLLISION,
    CONVERGED,
    CompiledSystem,
    MatchingAmbiguous,
    PolySystem,
    SegmentSystem,
    TrackOptions,
    match_endpoints,
    newton_polish,
    solve_total_degree,
    track_family,
)
from .fourfold import CubicFourfold
from .polynomials import CubicBlossom, Poly
from .projective import Subspace, plucker_distance
from .voisin import FiberRecord, fiber_system, psi_fiber

FACT16 = math.factorial(16)

# fiber transport tolerances: endpoint separations are O(0.1), so 1e-9
# endpoints leave six orders of matching margin while clearing the Newton
# floor of mildly ill-conditioned paths
TRANSPORT_OPTS = TrackOptions(corrector_tol=3e-9, endpoint_tol=1e-9,
                              predictor_tol=1e-4, max_step=0.5)


class CollisionOnLoop(RuntimeError):
    pass


class NoCollapseFound(RuntimeError):
    pass


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError("not a permutation")

    @staticmethod
    def identity(n: int = 16) -> "Permutation":
        return Permutation(tuple(range(n)))

    def __call__(self, i: int) -> int:
        return self.images[i]

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(i) = self(other(i))."""
        return Permutation(tuple(self.images[other.images[i]]
                                 for i in range(len(self.images))))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for i in range(len(self.images)):
            if i in seen or self.images[i] == i:
                seen.add(i)
                continue
            cyc = [i]
            j = self.images[i]
            seen.add(i)
            while j != i:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        lengths = sorted((len(c) for c in self.cycles()), reverse=True)
        fixed = len(self.images) - sum(lengths)
        return tuple(lengths + [1] * fixed)

    def is_transposition(self) -> bool:
        cyc = self.cycles()
        return len(cyc) == 1 and len(cyc[0]) == 2

    def cycle_notation(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(v + 1) for v in c) + ")" for c in cyc)


# ---------------------------------------------------------------------------
# Schreier-Sims
# ---------------------------------------------------------------------------


def _orbit_with_transversal(point: int, gens: list[Permutation], n: int):
    orbit = {point: Permutation.identity(n)}
    frontier = [point]
    while frontier:
        x = frontier.pop()
        ux = orbit[x]
        for g in gens:
            y = g(x)
            if y not in orbit:
                orbit[y] = g.compose(ux)
                frontier.append(y)
    return orbit


def schreier_sims(gens: Sequence[Permutation], n: int = 16):
    """Base, strong generating set, and exact order (deterministic).

    Fixpoint formulation: every Schreier generator of every level must sift
    to the identity through the deeper levels; any nontrivial residue joins
    the strong set and the pass restarts.  Quadratic-ish but exact and
    transparent, plenty fast at degree 16.  Returns (order, base, strong
    generators per level).
    """
    sgs = [g for g in gens if not g.is_identity()]
    if not sgs:
        return 1, [], []
    base: list[int] = []

    def extend_base_for(g: Permutation):
        if all(g(b) == b for b in base):
            base.append(next(p for p in range(n) if g(p) != p))

    for g in sgs:
        extend_base_for(g)

    def strong_at(i: int) -> list[Permutation]:
        return [g for g in sgs if all(g(base[k]) == base[k] for k in range(i))]

    changed = True
    guard = 0
    while changed and guard < 10000:
        guard += 1
        changed = False
        for i in range(len(base)):
            gens_i = strong_at(i)
            if not gens_i:
                continue
            orbit = _orbit_with_transversal(base[i], gens_i, n)
            for x, ux in orbit.items():
                for h in gens_i:
                    g2 = orbit[h(x)].inverse().compose(h).compose(ux)
                    for j in range(i + 1, len(base)):
                        orbit_j = _orbit_with_transversal(base[j], strong_at(j), n)
                        img = g2(base[j])
                        if img not in orbit_j:
                            break
                        g2 = orbit_j[img].inverse().compose(g2)
                    if not g2.is_identity():
                        sgs.append(g2)
                        extend_base_for(g2)
                        changed = True
                if changed:
                    break
            if changed:
                break

    order = 1
    for i in range(len(base)):
        order *= len(_orbit_with_transversal(base[i], strong_at(i), n))
    return order, base, [strong_at(i) for i in range(len(base))]


def group_order(gens: Sequence[Permutation], n: int = 16) -> int:
    return schreier_sims(gens, n)[0]


def transitivity_flags(gens: Sequence[Permutation], n: int = 16) -> tuple[bool, bool]:
    """(transitive, 2-transitive) via orbit of 0 and its stabilizer orbit."""
    gens = [g for g in gens if not g.is_identity()]
    if not gens:
        return n == 1, n <= 2
    orbit = _orbit_with_transversal(0, list(gens), n)
    transitive = len(orbit) == n
    if not transitive:
        return False, False
    # stabilizer generators of 0 by Schreier's lemma
    stab = []
    for x, ux in orbit.items():
        for g in gens:
            s = orbit[g(x)].inverse().compose(g).compose(ux)
            if not s.is_identity():
                stab.append(s)
    if not stab:
        return True, n <= 2
    sub_orbit = _orbit_with_transversal(1, stab, n)
    two_transitive = len(sub_orbit) == n - 1 and 0 not in sub_orbit
    return True, two_transitive


# ---------------------------------------------------------------------------
# loops in the space of target lines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoopSpec:
    base_target: Subspace
    waypoints: tuple  # anchor pairs ((a, b) 6-vectors), closed: first == last
    provenance: str = "random"


@dataclass
class MonodromyContext:
    """Base fiber of the tangency system in fixed charts, ready to transport."""

    y: CubicFourfold
    record: FiberRecord
    a: np.ndarray
    b: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    state: np.ndarray  # (16, 7) solutions (t, w)
    tensor: np.ndarray | None = None  # normalized dense cubic tensor

    def dense_tensor(self) -> np.ndarray:
        if self.tensor is None:
            self.tensor = dense_cubic_tensor(self.y)
        return self.tensor


def _line_containment_system(y: CubicFourfold):
    bl = CubicBlossom(y.f.to_approx())

    def residuals(a, b):
        return np.array([
            bl.eval3(a, a, a),
            3 * bl.eval3(a, a, b),
            3 * bl.eval3(a, b, b),
            bl.eval3(b, b, b),
        ])

    def jacobian(a, b):
        # rows: d residual / d(a, b) (4 x 12)
        j = np.zeros((4, 12), dtype=complex)
        da_aaa = 3 * np.array(list(_lin_coeffs(bl.poly_1w(a, a))))
        j[0, :6] = da_aaa
        j[1, :6] = 6 * np.array(list(_lin_coeffs(bl.poly_1w(a, b))))
        j[1, 6:] = 3 * np.array(list(_lin_coeffs(bl.poly_1w(a, a))))
        j[2, :6] = 3 * np.array(list(_lin_coeffs(bl.poly_1w(b, b))))
        j[2, 6:] = 6 * np.array(list(_lin_coeffs(bl.poly_1w(a, b))))
        j[3, 6:] = 3 * np.array(list(_lin_coeffs(bl.poly_1w(b, b))))
        return j

    return residuals, jacobian


def _lin_coeffs(p: Poly):
    for i in range(p.n):
        yield complex(p.coeff(tuple(1 if j == i else 0 for j in range(p.n))))


def project_anchors(y: CubicFourfold, a, b, tol: float = 1e-11,
                    iters: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Newton-project an anchor pair so span(a, b) is a line on Y.

    Underdetermined (4 equations, 12 unknowns): minimum-norm updates keep the
    projected line close to the input.
    """
    residuals, jacobian = _line_containment_system(y)
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    scale = max(1.0, y.f.coeff_norm())
    for _ in range(iters):
        r = residuals(a, b)
        if np.linalg.norm(r) < tol * scale:
            break
        j = jacobian(a, b)
        delta, *_ = np.linalg.lstsq(j, r, rcond=None)
        a = a - delta[:6]
        b = b - delta[6:]
    r = residuals(a, b)
    if np.linalg.norm(r) > 1e-9 * scale:
        raise RuntimeError(f"anchor projection stalled at residual {np.linalg.norm(r):.2e}")
    return a, b


def dense_cubic_tensor(y: CubicFourfold) -> np.ndarray:
    """Symmetric (6,6,6) coefficient tensor with f(x) = c * sum T_ijk x_i x_j x_k.

    Normalized to unit coefficient scale so transport equations are O(1) and
    absolute tracker tolerances behave."""
    from itertools import permutations
    bl = CubicBlossom(y.f.to_approx())
    t = np.zeros((6, 6, 6), dtype=complex)
    for (i, j, k), val in bl.tensor.items():
        for p in set(permutations((i, j, k))):
            t[p] = complex(val)
    return t / max(1.0, y.f.coeff_norm())


class FiberTransportSystem:
    """Tangency-system family evaluator for one transport leg, tensor form.

    Variables (t, w0..w5, s); anchors interpolate along sigma = s + g s(1-s)
    (the gamma detour).  Everything is evaluated by batched contractions
    against the cubic's symmetric coefficient tensor, so constructing a leg
    costs microseconds and evaluation stays in numpy.  Duck-typed like
    CompiledSystem for the tracker: n_eqs = 7, n_vars = 8.
    """

    n_eqs = 7
    n_vars = 8

    def __init__(self, tensor: np.ndarray, a0, b0, a1, b1, r1, r2, gamma: complex = 0j):
        self.T = tensor
        self.a0 = np.asarray(a0, dtype=complex)
        self.b0 = np.asarray(b0, dtype=complex)
        self.a1 = np.asarray(a1, dtype=complex)
        self.b1 = np.asarray(b1, dtype=complex)
        self.r1 = np.asarray(r1, dtype=complex)
        self.r2 = np.asarray(r2, dtype=complex)
        self.gamma = complex(gamma)
        # 6x6 quadratic-form matrices M_a = T : a, per anchor endpoint
        self.Ma = [np.einsum("ijk,i->jk", tensor, v) for v in (self.a0, self.a1)]
        self.Mb = [np.einsum("ijk,i->jk", tensor, v) for v in (self.b0, self.b1)]

    def _interp(self, s: np.ndarray):
        g = self.gamma
        sig = s + g * s * (1 - s)
        dsig = 1 + g * (1 - 2 * s)
        return sig, dsig

    def _anchors(self, sig):
        a = (1 - sig)[:, None] * self.a0[None, :] + sig[:, None] * self.a1[None, :]
        b = (1 - sig)[:, None] * self.b0[None, :] + sig[:, None] * self.b1[None, :]
        da = (self.a1 - self.a0)[None, :]
        db = (self.b1 - self.b0)[None, :]
        return a, b, da, db

    def eval_and_jac(self, x: np.ndarray):
        T = self.T
        t = x[:, 0]
        w = x[:, 1:7]
        s = x[:, 7]
        bsz = x.shape[0]
        sig, dsig = self._interp(s)
        a, b, da, db = self._anchors(sig)

        Tw = np.einsum("ijk,bk->bij", T, w)      # T : w
        Tww = np.einsum("bij,bj->bi", Tw, w)     # T : w : w  (vector)
        fw = np.einsum("bi,bi->b", Tww, w)       # f(w)
        Ta = np.einsum("ijk,bi->bjk", T, a)
        Tb = np.einsum("ijk,bi->bjk", T, b)
        qa = np.einsum("bjk,bj,bk->b", Ta, w, w)     # B(a,w,w)
        qb = np.einsum("bjk,bj,bk->b", Tb, w, w)
        vaa = np.einsum("bjk,bj->bk", Ta, a)         # B(a,a,.) vector
        vbb = np.einsum("bjk,bj->bk", Tb, b)
        vab = np.einsum("bjk,bj->bk", Ta, b)
        laa = np.einsum("bk,bk->b", vaa, w)
        lbb = np.einsum("bk,bk->b", vbb, w)
        lab = np.einsum("bk,bk->b", vab, w)

        vals = np.empty((bsz, 7), dtype=complex)
        vals[:, 0] = qa
        vals[:, 1] = qb
        vals[:, 2] = fw
        vals[:, 3] = laa - t * t * lbb
        vals[:, 4] = lab + t * lbb
        vals[:, 5] = w @ self.r1 - 1.0
        vals[:, 6] = w @ self.r2

        jac = np.zeros((bsz, 7, 8), dtype=complex)
        # d/dw blocks
        jac[:, 0, 1:7] = 2 * np.einsum("bjk,bk->bj", Ta, w)
        jac[:, 1, 1:7] = 2 * np.einsum("bjk,bk->bj", Tb, w)
        jac[:, 2, 1:7] = 3 * Tww
        jac[:, 3, 1:7] = vaa - (t * t)[:, None] * vbb
        jac[:, 4, 1:7] = vab + t[:, None] * vbb
        jac[:, 5, 1:7] = self.r1[None, :]
        jac[:, 6, 1:7] = self.r2[None, :]
        # d/dt
        jac[:, 3, 0] = -2 * t * lbb
        jac[:, 4, 0] = lbb
        # d/ds via sigma
        qa_s = np.einsum("ijk,bi,bj,bk->b", T, np.broadcast_to(da, a.shape), w, w)
        qb_s = np.einsum("ijk,bi,bj,bk->b", T, np.broadcast_to(db, b.shape), w, w)
        # d/dsig of B(a,a,w) = 2 B(da, a, w); of B(a,b,w) = B(da,b,w)+B(a,db,w)
        daw = np.einsum("ijk,bi,bj,bk->b", T, np.broadcast_to(da, a.shape), a, w)
        dbw = np.einsum("ijk,bi,bj,bk->b", T, np.broadcast_to(db, b.shape), b, w)
        dab = (np.einsum("ijk,bi,bj,bk->b", T, np.broadcast_to(da, a.shape), b, w)
               + np.einsum("ijk,bi,bj,bk->b", T, a, np.broadcast_to(db, b.shape), w))
        jac[:, 0, 7] = qa_s * dsig
        jac[:, 1, 7] = qb_s * dsig
        jac[:, 3, 7] = (2 * daw - t * t * 2 * dbw) * dsig
        jac[:, 4, 7] = (dab + t * 2 * dbw) * dsig
        return vals, jac

    def eval(self, x: np.ndarray):
        return self.eval_and_jac(x)[0]

    def jac(self, x: np.ndarray):
        return self.eval_and_jac(x)[1]


def segment_fiber_polys(y: CubicFourfold, a0, b0, a1, b1, r1, r2,
                        gamma: complex = 0j) -> SegmentSystem:
    """Tangency system with anchors interpolated linearly in s (8 variables).

    A nonzero gamma bends the leg into the complex parameter plane via
    s -> s + gamma s (1 - s) (endpoints fixed), steering around real-line
    crossings of the branch divisor the straight leg might graze.
    """
    bl = CubicBlossom(y.f.to_approx())
    a0 = [complex(v) for v in a0]
    b0 = [complex(v) for v in b0]
    a1 = [complex(v) for v in a1]
    b1 = [complex(v) for v in b1]

    def lift_w(p: Poly, sdeg: int = 0) -> Poly:
        # w-polynomial times s^sdeg, in 8 variables (t, w0..w5, s)
        return Poly(8, {(0,) + e + (sdeg,): c for e, c in p.terms.items()}, exact=False)

    s = Poly.variable(8, 7, exact=False)
    one = Poly.constant(8, 1.0 + 0j, exact=False)
    t = Poly.variable(8, 0, exact=False)

    def mix1(p0: Poly, p1: Poly) -> Poly:
        # (1-s) p0 + s p1
        return lift_w(p0) * (one - s) + lift_w(p1) * s

    def mix2(p00: Poly, p01: Poly, p11: Poly) -> Poly:
        # (1-s)^2 p00 + 2 s (1-s) p01 + s^2 p11
        u = one - s
        return (lift_w(p00) * u * u + lift_w(p01) * u * s * 2.0 + lift_w(p11) * s * s)

    e1 = mix1(bl.poly_2w(a0), bl.poly_2w(a1))
    e2 = mix1(bl.poly_2w(b0), bl.poly_2w(b1))
    e3 = lift_w(y.f.to_approx())
    aaw = mix2(bl.poly_1w(a0, a0), bl.poly_1w(a0, a1), bl.poly_1w(a1, a1))
    bbw = mix2(bl.poly_1w(b0, b0), bl.poly_1w(b0, b1), bl.poly_1w(b1, b1))
    abw_mixed = (lift_w(bl.poly_1w(a0, b0)) * (one - s) * (one - s)
                 + (lift_w(bl.poly_1w(a0, b1)) + lift_w(bl.poly_1w(a1, b0))) * s * (one - s)
                 + lift_w(bl.poly_1w(a1, b1)) * s * s)
    e4 = aaw - t * t * bbw
    e5 = abw_mixed + t * bbw
    chart1 = Poly(8, {tuple([0] + [1 if j == i else 0 for j in range(6)] + [0]): complex(v)
                      for i, v in enumerate(r1)} | {(0,) * 8: -1.0}, exact=False)
    chart2 = Poly(8, {tuple([0] + [1 if j == i else 0 for j in range(6)] + [0]): complex(v)
                      for i, v in enumerate(r2)}, exact=False)
    polys = [e1, e2, e3, e4, e5, chart1, chart2]
    if gamma:
        bent = Poly(8, {tuple([0] * 7 + [1]): 1.0 + gamma,
                        tuple([0] * 7 + [2]): -gamma}, exact=False)
        images = [Poly.variable(8, k, exact=False) for k in range(7)] + [bent]
        polys = [p.substitute(images) for p in polys]
    return SegmentSystem(polys, 7)


def fiber_state_from_record(y: CubicFourfold, record: FiberRecord, a, b, r1, r2,
                            opts: TrackOptions | None = None) -> np.ndarray:
    """Coordinates (t, w) of the fiber lines in the given anchor charts."""
    opts = opts or TrackOptions()
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    r1 = np.array(r1, dtype=complex)
    r2 = np.array(r2, dtype=complex)
    system = fiber_system(y, a, b, r1, r2)
    rows = []
    for line in record.lines:
        m = line.matrix()
        p1, p2 = m[0], m[1]
        # meeting point with span(a, b): solve [a b | -p1 -p2] null combo
        stack = np.column_stack([a, b, p1, p2])
        _, _, vh = np.linalg.svd(stack)
        null = vh[-1].conj()
        q = null[0] * a + null[1] * b  # == -(null[2] p1 + null[3] p2)
        t = null[1] / null[0]
        # direction: a point of the line independent of q
        w0 = p1 if abs(np.vdot(p1, q)) / (np.linalg.norm(p1) * np.linalg.norm(q)) < 0.999 else p2
        # representative with r2.w = 0 (mod q) and r1.w = 1
        mu = -(r2 @ w0) / (r2 @ q)
        w = w0 + mu * q
        w = w / (r1 @ w)
        sol = np.concatenate([[t], w])
        sol, res = newton_polish(list(system.equations), sol, iters=40, tol=1e-13)
        rows.append(sol)
    state = np.array(rows)
    vals = CompiledSystem(list(system.equations), 7).eval(state)
    resid = np.max(np.abs(vals))
    if resid > 1e-7:
        raise RuntimeError(f"fiber state residual too large: {resid:.2e}")
    return state


def monodromy_context(y: CubicFourfold, target: Subspace, seed: int = 0,
                      opts: TrackOptions | None = None,
                      record: FiberRecord | None = None) -> MonodromyContext:
    from .voisin import _fiber_anchor_charts
    if record is None:
        record = psi_fiber(y, target, seed=seed, opts=opts)
    a, b, r1, r2 = _fiber_anchor_charts(target, seed)
    a, b = project_anchors(y, a, b)
    state = fiber_state_from_record(y, record, a, b, r1, r2, opts)
    return MonodromyContext(y=y, record=record, a=np.array(a), b=np.array(b),
                            r1=np.array(r1), r2=np.array(r2), state=state)


def transport(ctx: MonodromyContext, waypoints: Sequence, opts: TrackOptions | None = None,
              max_refinements: int = 5) -> Permutation:
    """Track the fiber along consecutive anchor waypoints and match back.

    Any segment whose matching fails triggers waypoint-doubling refinement of
    that leg (the permutation is discrete, so a fine enough polygon on the
    honest locus determines it); persistent collisions raise CollisionOnLoop.
    """
    opts = opts or TRANSPORT_OPTS
    state = ctx.state.copy()
    n = state.shape[0]
    wps = [(np.array(a, dtype=complex), np.array(b, dtype=complex)) for a, b in waypoints]
    if np.linalg.norm(wps[0][0] - ctx.a) > 1e-9 or np.linalg.norm(wps[0][1] - ctx.b) > 1e-9:
        raise ValueError("loop must start at the context anchors")

    tensor = ctx.dense_tensor()

    def run_leg(s0, s1, cur, depth):
        # legs detour through the complex parameter plane (gamma trick); a
        # graze of the branch divisor is retried with fresh detours before
        # subdividing the leg
        from .continuation import HomotopyTracker
        statuses = set()
        for attempt in range(3):
            phase = cmath.exp(2j * math.pi * (0.13 + 0.37 * attempt + 0.05 * depth))
            gamma = 0.35 * phase
            sys_ = FiberTransportSystem(tensor, s0[0], s0[1], s1[0], s1[1],
                                        ctx.r1, ctx.r2, gamma=gamma)
            results = HomotopyTracker(sys_, opts).track(cur)
            bad = [r for r in results if r.status not in (CONVERGED,)]
            if not bad:
                out = cur.copy()
                for r in results:
                    out[r.start_index] = r.endpoint
                return out
            statuses |= {r.status for r in bad}
        if depth >= max_refinements:
            raise CollisionOnLoop(f"segment failed with statuses {statuses}")
        mid_a, mid_b = project_anchors(ctx.y, (s0[0] + s1[0]) / 2, (s0[1] + s1[1]) / 2)
        cur2 = run_leg(s0, (mid_a, mid_b), cur, depth + 1)
        return run_leg((mid_a, mid_b), s1, cur2, depth + 1)

    cur = state
    for k in range(len(wps) - 1):
        cur = run_leg(wps[k], wps[k + 1], cur, 0)
    # final polish at the base system and matching
    base_sys = fiber_system(ctx.y, ctx.a, ctx.b, ctx.r1, ctx.r2)
    polished = []
    for row in cur:
        sol, _ = newton_polish(list(base_sys.equations), row, iters=30, tol=1e-13)
        polished.append(sol)
    cur = np.array(polished)
    try:
        perm = match_endpoints(ctx.state, cur, ratio=0.1)
    except MatchingAmbiguous as err:
        raise CollisionOnLoop(f"endpoint matching ambiguous: {err}") from err
    return Permutation(tuple(perm))


def circle_waypoints(ctx: MonodromyContext, direction: np.ndarray, center: complex,
                     radius: float, n_points: int = 24) -> list:
    """Closed loop: base -> circle entry -> around the circle -> back to base.

    The parameter s moves along anchors + s * direction; every waypoint is
    projected onto the honest lines-on-Y locus.
    """
    svals = [0.0 + 0j]
    entry = center + radius
    svals.append(entry)
    for k in range(1, n_points + 1):
        svals.append(center + radius * cmath.exp(2j * math.pi * k / n_points))
    svals.append(0.0 + 0j)
    out = []
    base = np.concatenate([ctx.a, ctx.b])
    for s in svals:
        vec = base + s * direction
        if s == 0:
            out.append((ctx.a.copy(), ctx.b.copy()))
        else:
            pa, pb = project_anchors(ctx.y, vec[:6], vec[6:])
            out.append((pa, pb))
    return out


def random_loop(ctx: MonodromyContext, seed: int, radius: float | None = None,
                n_points: int = 16) -> LoopSpec:
    rng = random.Random(seed)
    direction = np.array([complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(12)])
    direction /= np.linalg.norm(direction)
    r = radius if radius is not None else 0.12 + 0.5 * rng.random()
    wps = circle_waypoints(ctx, direction, center=0.0 + 0j, radius=r, n_points=n_points)
    return LoopSpec(base_target=ctx.record.target, waypoints=tuple(wps),
                    provenance=f"random circle seed={seed} radius={r:.3f}")


def loop_permutation(ctx: MonodromyContext, loop: LoopSpec,
                     opts: TrackOptions | None = None) -> Permutation:
    return transport(ctx, loop.waypoints, opts)


# ---------------------------------------------------------------------------
# branch-point search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchPoint:
    parameter: complex
    direction: np.ndarray
    colliding_pair: tuple[int, int]
    min_separation: float
    quintic_counts: dict | None = None


def _fiber_at_parameter(ctx: MonodromyContext, direction: np.ndarray, s: complex,
                        cache: dict, opts: TrackOptions):
    """Track the base fiber to parameter s (from the nearest cached value)."""
    key = (round(s.real, 12), round(s.imag, 12))
    if key in cache:
        return cache[key]
    base = np.concatenate([ctx.a, ctx.b])
    anchors_of = {}

    def anchors(sv):
        k2 = (round(sv.real, 12), round(sv.imag, 12))
        if k2 not in anchors_of:
            if sv == 0:
                anchors_of[k2] = (ctx.a, ctx.b)
            else:
                vec = base + sv * direction
                anchors_of[k2] = project_anchors(ctx.y, vec[:6], vec[6:])
        return anchors_of[k2]

    nearest_key = min(cache, key=lambda k: abs(complex(k[0], k[1]) - s)) if cache else None
    if nearest_key is None:
        s0, state0 = 0.0 + 0j, ctx.state
    else:
        s0 = complex(nearest_key[0], nearest_key[1])
        state0 = cache[nearest_key][0]
    from .continuation import HomotopyTracker
    a0, b0 = anchors(s0)
    a1, b1 = anchors(s)
    sys_ = FiberTransportSystem(ctx.dense_tensor(), a0, b0, a1, b1, ctx.r1, ctx.r2,
                                gamma=0.21j)
    results = HomotopyTracker(sys_, opts).track(state0)
    state = state0.copy()
    ok = True
    for r in results:
        state[r.start_index] = r.endpoint
        if r.status != CONVERGED:
            ok = False
    seps = _pairwise_separations(state)
    cache[key] = (state, seps, ok)
    return cache[key]


def _pairwise_separations(state: np.ndarray):
    n = state.shape[0]
    best = (math.inf, (0, 1))
    prod = 1.0 + 0j
    for i in range(n):
        for j in range(i + 1, n):
            d = np.linalg.norm(state[i] - state[j])
            prod *= d if d < 10 else 10.0
            if d < best[0]:
                best = (float(d), (i, j))
    return best, prod


def find_branch_loop(y: CubicFourfold, target: Subspace, pencil_seed: int = 0,
                     opts: TrackOptions | None = None,
                     verify_quintic: bool = True,
                     record: FiberRecord | None = None):
    """Locate a branch parameter on a seeded pencil and build a circle loop.

    Sweeps the real interval of the pencil parameter recording the minimum
    fiber separation, then runs complex Newton on the holomorphic product of
    pairwise differences to a collision point s*; the circle radius is a
    tenth of the distance to the next-nearest located branch parameter.  The
    discriminant-quintic singularity counts at s* certify the simple-branch
    structure ({A1: 14, A3: 1}).
    """
    opts = opts or TrackOptions()
    ctx = monodromy_context(y, target, seed=pencil_seed, opts=opts, record=record)
    rng = random.Random(pencil_seed ^ 0xB4A2C4)
    direction = np.array([complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(12)])
    direction /= np.linalg.norm(direction)

    cache: dict = {}

    def fiber(s):
        return _fiber_at_parameter(ctx, direction, s, cache, opts)

    # collision functional: product of pairwise differences of a random
    # linear functional of the solutions (holomorphic in s)
    lam = np.array([complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(7)])

    def functional(s):
        state, (sep, pair), ok = fiber(s)
        z = state @ lam
        prod = 1.0 + 0j
        n = len(z)
        for i in range(n):
            for j in range(i + 1, n):
                prod *= (z[i] - z[j])
        return prod, sep, pair

    samples = [0.12 + 0.25j * math.sin(2.2 * k) + 0.85 * k / 11 for k in range(12)]
    evals = []
    for s in samples:
        try:
            val, sep, pair = functional(s)
            evals.append((abs(val), s, sep, pair))
        except Exception:
            continue
    if not evals:
        raise NoCollapseFound("pencil sweep failed everywhere")
    evals.sort(key=lambda t: t[0])

    found: list[tuple[complex, tuple[int, int], float]] = []
    for _, s_start, _, _ in evals[:4]:
        s = s_start
        try:
            for _ in range(25):
                val, sep, pair = functional(s)
                if abs(val) < 1e-30 or sep < 1e-9:
                    break
                h = 1e-5 * max(abs(s), 0.05)
                val2, _, _ = functional(s + h)
                dv = (val2 - val) / h
                if dv == 0:
                    break
                step = val / dv
                if abs(step) > 0.25:
                    step *= 0.25 / abs(step)
                s = s - step
            val, sep, pair = functional(s)
        except Exception:
            continue
        if sep < 1e-4:
            if all(abs(s - s2) > 1e-6 for s2, _, _ in found):
                found.append((s, pair, sep))
        if len(found) >= 2:
            break
    if not found:
        raise NoCollapseFound("no fiber collapse located on this pencil")

    s_star, pair, sep = found[0]
    if len(found) >= 2:
        radius = 0.1 * abs(s_star - found[1][0])
    else:
        radius = max(0.02, 0.05 * abs(s_star))
    radius = max(radius, 1e-4)

    counts = None
    if verify_quintic:
        from .quintic import build_quintic, quintic_singularities
        base = np.concatenate([ctx.a, ctx.b])
        vec = base + s_star * direction
        pa, pb = project_anchors(y, vec[:6], vec[6:])
        r_branch = Subspace([list(pa), list(pb)], exact=False)
        dq = build_quintic(y, r_branch)
        rep = quintic_singularities(dq, seed=pencil_seed + 11, opts=opts)
        counts = dict(rep.counts_by_type)

    wps = circle_waypoints(ctx, direction, center=s_star, radius=radius, n_points=24)
    loop = LoopSpec(base_target=target, waypoints=tuple(wps),
                    provenance=f"branch circle at s*={s_star:.6g} radius={radius:.3g}")
    branch = BranchPoint(parameter=s_star, direction=direction, colliding_pair=pair,
                         min_separation=sep, quintic_counts=counts)
    return ctx, loop, branch


# ---------------------------------------------------------------------------
# the full group computation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PermGroupReport:
    generators: tuple[Permutation, ...]
    provenance: tuple[str, ...]
    order: int
    transitive: bool
    two_transitive: bool
    has_transposition: bool
    is_full_symmetric: bool
    n_loops_attempted: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "generators": [g.cycle_notation() for g in self.generators],
            "provenance": list(self.provenance),
            "order": str(self.order),
            "transitive": self.transitive,
            "two_transitive": self.two_transitive,
            "has_transposition": self.has_transposition,
            "is_full_symmetric": self.is_full_symmetric,
            "n_loops_attempted": self.n_loops_attempted,
            "seed": self.seed,
            "composition_convention":
                "loop A then loop B gives compose(B, A); indices follow the "
                "base fiber sorted by canonical Pluecker keys (1-based in "
                "cycle notation)",
        }


def monodromy_group(y: CubicFourfold, target: Subspace | None = None, seed: int = 0,
                    n_loops: int = 12, opts: TrackOptions | None = None,
                    include_branch_loop: bool = True,
                    stop_at_full: bool = True) -> PermGroupReport:
    """Generate the monodromy group from random loops (plus one branch circle).

    The verdict "full symmetric" is the exact Schreier-Sims order reaching
    16!; it is numerical evidence organized deterministically by the seed,
    not a symbolic certificate.
    """
    opts = opts or TrackOptions()
    if target is None:
        if not y.known_lines:
            raise ValueError("no target line available")
        target = y.known_lines[0]
    ctx = monodromy_context(y, target, seed=seed, opts=opts)
    gens: list[Permutation] = []
    provenance: list[str] = []
    attempts = 0
    max_attempts = 3 * n_loops + 6

    def current_order():
        return group_order(gens) if gens else 1

    loop_seed = seed * 977 + 13
    while attempts < max_attempts and len(gens) < n_loops:
        attempts += 1
        loop = random_loop(ctx, seed=loop_seed + attempts)
        try:
            perm = loop_permutation(ctx, loop, opts)
        except CollisionOnLoop:
            continue
        if perm.is_identity():
            provenance.append(f"{loop.provenance} -> identity (discarded)")
            continue
        gens.append(perm)
        provenance.append(loop.provenance)
        if stop_at_full and current_order() == FACT16:
            break

    has_transposition = any(g.is_transposition() for g in gens)
    if include_branch_loop and (not has_transposition or current_order() != FACT16):
        try:
            bctx, bloop, branch = find_branch_loop(y, target, pencil_seed=seed,
                                                   opts=opts, verify_quintic=False,
                                                   record=ctx.record)
            perm = loop_permutation(bctx, bloop, opts)
            if not perm.is_identity():
                gens.append(perm)
                provenance.append(bloop.provenance)
        except (NoCollapseFound, CollisionOnLoop) as err:
            provenance.append(f"branch loop failed: {err}")

    order = current_order()
    transitive, two_transitive = transitivity_flags(gens)
    has_transposition = any(g.is_transposition() for g in gens)
    return PermGroupReport(
        generators=tuple(gens), provenance=tuple(provenance), order=order,
        transitive=transitive, two_transitive=two_transitive,
        has_transposition=has_transposition,
        is_full_symmetric=(order == FACT16),
        n_loops_attempted=attempts, seed=seed)
