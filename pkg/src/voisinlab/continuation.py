"""Homotopy continuation: total-degree starts, squaring-up, batched
predictor-corrector path tracking, endpoint refinement, collision diagnostics.

The tracker follows the Davidenko ODE dx/ds = -H_x^{-1} H_s with a classical
RK4 predictor under step-doubling error control and a Newton corrector at
fixed s (at most ``max_newton_iters`` per step; the step halves on corrector
failure and grows by 1.5 after four consecutive successes).  All paths of one
homotopy are tracked simultaneously as numpy batches with per-path step sizes
and masks; this is what keeps the 64- and 243-path solves fast in pure Python.

Homotopies are plain polynomial systems in (x_0..x_{n-1}, s): the total-degree
homotopy gamma*(1-s)*G + s*F is built that way, and parameter families are
compiled per segment with coefficients polynomial in s.
"""

from __future__ import annotations

import cmath
import itertools
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .polynomials import Poly

CONVERGED = "Converged"
DIVERGED = "Diverged"
TRUNCATED = "Truncated"
COLLISION = "CollisionSuspected"


class StepUnderflow(RuntimeError):
    pass


class NoContraction(RuntimeError):
    pass


class MatchingAmbiguous(RuntimeError):
    pass


@dataclass(frozen=True)
class TrackOptions:
    initial_step: float = 0.08
    min_step: float = 1e-7
    max_step: float = 0.4
    corrector_tol: float = 1e-10
    endpoint_tol: float = 1e-10
    max_newton_iters: int = 3
    max_steps: int = 3000
    precision_escalation: bool = True
    predictor_tol: float = 3e-5
    divergence_radius: float = 1e8
    threads: int = 1

    def __post_init__(self):
        if not (0 < self.min_step <= self.initial_step <= self.max_step):
            raise ValueError("need 0 < min_step <= initial_step <= max_step")
        if self.corrector_tol <= 0 or self.endpoint_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class PathResult:
    endpoint: np.ndarray
    status: str
    residual: float
    condition: float
    steps: int
    start_index: int
    winding: int | None = None
    s_final: float = 1.0

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass(frozen=True)
class PolySystem:
    """A list of polynomial equations in ``n_unknowns`` variables.

    ``originals`` carries the pre-squared equations of a squared-up system so
    endpoint filtering can re-check them.
    """

    equations: tuple[Poly, ...]
    n_unknowns: int
    originals: tuple[Poly, ...] = ()

    def __post_init__(self):
        for p in self.equations:
            if p.n != self.n_unknowns:
                raise ValueError("equation variable count mismatch")

    @property
    def is_square(self) -> bool:
        return len(self.equations) == self.n_unknowns

    def degrees(self) -> list[int]:
        return [max(1, p.degree()) for p in self.equations]


class CompiledSystem:
    """Batched numpy evaluation of a polynomial system and its Jacobian.

    All equations (and, for the combined call, all Jacobian entries) are
    flattened into one exponent matrix so a call costs one power-table build,
    one gathered monomial product and one segmented sum, independent of the
    equation count.
    """

    def __init__(self, polys: Sequence[Poly], n_vars: int):
        self.n_vars = n_vars
        self.n_eqs = len(polys)
        self._polys = list(polys)
        self.scales = np.array([max(1.0, p.coeff_norm()) for p in polys])
        self._val_flat = self._flatten([p.compiled() for p in polys])
        self._all_flat = None  # values + jacobian, built lazily

    @staticmethod
    def _flatten(slots):
        es_parts, cs_parts, bounds = [], [], [0]
        for es, cs in slots:
            if es.shape[0] == 0:
                es = np.zeros((1, es.shape[1]), dtype=np.int64)
                cs = np.zeros((1,), dtype=np.complex128)
            es_parts.append(es)
            cs_parts.append(cs)
            bounds.append(bounds[-1] + es.shape[0])
        e_all = np.vstack(es_parts)
        c_all = np.concatenate(cs_parts)
        starts = np.array(bounds[:-1], dtype=np.int64)
        maxdeg = e_all.max(axis=0)
        active = [j for j in range(e_all.shape[1]) if maxdeg[j] > 0]
        cols = {j: e_all[:, j].copy() for j in active}
        return e_all, c_all, starts, maxdeg, active, cols

    def _ensure_all(self):
        if self._all_flat is None:
            slots = [p.compiled() for p in self._polys]
            for p in self._polys:
                for j in range(self.n_vars):
                    slots.append(p.partial(j).compiled())
            self._all_flat = self._flatten(slots)
        return self._all_flat

    @staticmethod
    def _flat_eval(x: np.ndarray, flat) -> np.ndarray:
        e_all, c_all, starts, maxdeg, active, cols = flat
        b = x.shape[0]
        monos = None
        for j in active:
            d = int(maxdeg[j])
            t = np.empty((b, d + 1), dtype=np.complex128)
            t[:, 0] = 1.0
            xj = x[:, j]
            for k in range(1, d + 1):
                np.multiply(t[:, k - 1], xj, out=t[:, k])
            gathered = t[:, cols[j]]
            if monos is None:
                monos = gathered
            else:
                monos *= gathered
        if monos is None:
            monos = np.ones((b, e_all.shape[0]), dtype=np.complex128)
        monos *= c_all[None, :]
        return np.add.reduceat(monos, starts, axis=1)

    def eval(self, x: np.ndarray) -> np.ndarray:
        return self._flat_eval(np.asarray(x, dtype=np.complex128), self._val_flat)

    def eval_and_jac(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        flat = self._ensure_all()
        out = self._flat_eval(np.asarray(x, dtype=np.complex128), flat)
        b = x.shape[0]
        vals = out[:, : self.n_eqs]
        jac = out[:, self.n_eqs:].reshape(b, self.n_eqs, self.n_vars)
        return vals, jac

    def jac(self, x: np.ndarray) -> np.ndarray:
        return self.eval_and_jac(x)[1]


def _batch_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        out = np.empty_like(b)
        for i in range(a.shape[0]):
            try:
                if not (np.all(np.isfinite(a[i])) and np.all(np.isfinite(b[i]))):
                    out[i] = np.nan
                    continue
                out[i] = np.linalg.solve(a[i], b[i])
            except np.linalg.LinAlgError:
                try:
                    out[i] = np.linalg.pinv(a[i]) @ b[i]
                except np.linalg.LinAlgError:
                    out[i] = np.nan
        return out


class HomotopyTracker:
    """Tracks a batch of paths of H(x, s) = 0 from s=0 to s=1.

    H is a CompiledSystem in n+1 variables whose last variable is the path
    parameter; it must be square in the first n.
    """

    def __init__(self, hsys: CompiledSystem, opts: TrackOptions):
        if hsys.n_eqs != hsys.n_vars - 1:
            raise ValueError("homotopy must be square in the x variables")
        self.h = hsys
        self.opts = opts
        self.n = hsys.n_vars - 1

    def _split_jac(self, x: np.ndarray, s: np.ndarray):
        pts = np.concatenate([x, s[:, None]], axis=1)
        vals, jac = self.h.eval_and_jac(pts)
        return vals, jac[:, :, : self.n], jac[:, :, self.n]

    def _velocity(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        _, hx, hs = self._split_jac(x, s)
        return -_batch_solve(hx, hs[:, :, None])[:, :, 0]

    def _rk4(self, x: np.ndarray, s: np.ndarray, h: np.ndarray) -> np.ndarray:
        hcol = h[:, None]
        k1 = self._velocity(x, s)
        k2 = self._velocity(x + 0.5 * hcol * k1, s + 0.5 * h)
        k3 = self._velocity(x + 0.5 * hcol * k2, s + 0.5 * h)
        k4 = self._velocity(x + hcol * k3, s + h)
        return x + (hcol / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    def _newton(self, x: np.ndarray, s: np.ndarray, iters: int, tol: float):
        resid = None
        for _ in range(iters):
            vals, hx, _ = self._split_jac(x, s)
            dx = _batch_solve(hx, vals[:, :, None])[:, :, 0]
            x = x - dx
            resid = np.linalg.norm(self.h.eval(np.concatenate([x, s[:, None]], axis=1)), axis=1)
            if np.all(resid < tol):
                break
        if resid is None:
            vals = self.h.eval(np.concatenate([x, s[:, None]], axis=1))
            resid = np.linalg.norm(vals, axis=1)
        return x, resid

    def track(self, starts: np.ndarray) -> list[PathResult]:
        opts = self.opts
        b = starts.shape[0]
        x = np.array(starts, dtype=np.complex128)
        s = np.zeros(b)
        h = np.full(b, opts.initial_step)
        streak = np.zeros(b, dtype=np.int64)
        steps = np.zeros(b, dtype=np.int64)
        status = np.array([""] * b, dtype=object)
        active = np.ones(b, dtype=bool)
        # norm recorded when s first crosses 0.9, for divergence classification
        norm_mark = np.full(b, -1.0)

        guard = 0
        while active.any() and guard < opts.max_steps * 4:
            guard += 1
            idx = np.nonzero(active)[0]
            xa, sa = x[idx], s[idx]
            ha = np.minimum(h[idx], 1.0 - sa)

            # step-doubling predictor error control
            full = self._rk4(xa, sa, ha)
            half = self._rk4(self._rk4(xa, sa, ha / 2), sa + ha / 2, ha / 2)
            err = np.linalg.norm(full - half, axis=1) / np.maximum(1.0, np.linalg.norm(half, axis=1))
            bad_pred = err > opts.predictor_tol

            # corrector on the fine prediction
            xc, resid = self._newton(half, sa + ha, opts.max_newton_iters,
                                     opts.corrector_tol)
            ok = (~bad_pred) & (resid < opts.corrector_tol * (1 + np.linalg.norm(xc, axis=1)))

            # accept
            acc = idx[ok]
            x[acc] = xc[ok]
            s[acc] = sa[ok] + ha[ok]
            streak[acc] += 1
            grow = acc[streak[acc] >= 4]
            h[grow] = np.minimum(h[grow] * 1.5, opts.max_step)
            streak[grow] = 0

            # reject
            rej = idx[~ok]
            h[rej] = h[rej] / 2.0
            streak[rej] = 0

            crossed = acc[(s[acc] >= 0.9) & (norm_mark[acc] < 0)]
            norm_mark[crossed] = np.maximum(1.0, np.linalg.norm(x[crossed], axis=1))

            steps[idx] += 1

            # terminal conditions
            norms = np.linalg.norm(x[idx], axis=1)
            blown = idx[(norms > opts.divergence_radius) | ~np.isfinite(norms)]
            status[blown] = DIVERGED
            active[blown] = False
            under = idx[(h[idx] < opts.min_step) & (s[idx] < 1.0 - 1e-14)]
            status[under] = TRUNCATED
            active[under] = False
            capped = idx[steps[idx] >= opts.max_steps]
            status[capped] = TRUNCATED
            active[capped] = False
            done = np.nonzero(active & (s >= 1.0 - 1e-14))[0]
            active[done] = False
            status[done] = "endgame"

        status[np.nonzero(active)[0]] = TRUNCATED

        # rescue paths that stalled within a whisker of the endpoint: Newton
        # at s = 1 either certifies them or leaves them truncated
        for i in range(b):
            if status[i] == TRUNCATED and s[i] > 1.0 - 1e-4 and \
                    np.all(np.isfinite(x[i])):
                status[i] = "endgame"

        results = []
        end_idx = [i for i in range(b) if status[i] == "endgame"]
        if end_idx:
            ei = np.array(end_idx)
            xe, resid = self._newton(x[ei], np.ones(len(ei)), 6, opts.endpoint_tol)
            _, hx, _ = self._split_jac(xe, np.ones(len(ei)))
            conds = np.linalg.cond(hx)
            for pos, i in enumerate(end_idx):
                scale = 1 + np.linalg.norm(xe[pos])
                good = resid[pos] < opts.endpoint_tol * scale
                results.append(PathResult(
                    endpoint=xe[pos].copy(),
                    status=CONVERGED if good else TRUNCATED,
                    residual=float(resid[pos]),
                    condition=float(conds[pos]),
                    steps=int(steps[i]),
                    start_index=int(i),
                ))
                x[i] = xe[pos]
        for i in range(b):
            if status[i] != "endgame":
                pts = np.concatenate([x[i], [1.0]])[None, :]
                res = float(np.linalg.norm(self.h.eval(pts)))
                st = str(status[i])
                final_norm = float(np.linalg.norm(x[i]))
                escaping = final_norm > 1e6 or (
                    norm_mark[i] > 0 and final_norm > 10 * norm_mark[i] and final_norm > 100)
                if st == TRUNCATED and escaping:
                    st = DIVERGED  # step underflow while escaping to infinity
                results.append(PathResult(
                    endpoint=x[i].copy(), status=st, residual=res,
                    condition=math.inf, steps=int(steps[i]), start_index=i,
                    s_final=float(s[i]),
                ))
        results.sort(key=lambda r: r.start_index)
        return results


def _extend_vars(p: Poly, extra: int = 1) -> Poly:
    return Poly(p.n + extra, {e + (0,) * extra: c for e, c in p.terms.items()},
                exact=False)


def build_linear_homotopy(start: Sequence[Poly], target: Sequence[Poly],
                          gamma: complex) -> list[Poly]:
    """gamma*(1-s)*G + s*F as polynomials in (x, s)."""
    n = start[0].n
    s_var = Poly.variable(n + 1, n, exact=False)
    one = Poly.constant(n + 1, 1.0 + 0j, exact=False)
    out = []
    for g, f in zip(start, target):
        gg = _extend_vars(g.to_approx())
        ff = _extend_vars(f.to_approx())
        out.append(gg.scale(gamma) * (one - s_var) + ff * s_var)
    return out


def total_degree_start(degrees: Sequence[int], seed: int) -> tuple[list[Poly], np.ndarray]:
    """Start system x_i^d_i = c_i (|c_i|=1 random) and its full solution set."""
    rng = random.Random(seed)
    n = len(degrees)
    cs = [cmath.exp(2j * math.pi * rng.random()) for _ in range(n)]
    polys = []
    for i, (d, c) in enumerate(zip(degrees, cs)):
        e = [0] * n
        e[i] = d
        polys.append(Poly(n, {tuple(e): 1.0 + 0j, tuple([0] * n): -c}, exact=False))
    roots_per_var = []
    for d, c in zip(degrees, cs):
        base = c ** (1.0 / d)
        roots_per_var.append([base * cmath.exp(2j * math.pi * k / d) for k in range(d)])
    starts = np.array([list(combo) for combo in itertools.product(*roots_per_var)],
                      dtype=np.complex128)
    return polys, starts


def solve_total_degree(system: PolySystem, opts: TrackOptions | None = None,
                       seed: int = 0, batch: int = 512) -> list[PathResult]:
    """Track all prod(deg) total-degree paths of a square system."""
    if not system.is_square:
        raise ValueError("total-degree solve needs a square system")
    opts = opts or TrackOptions()
    degrees = system.degrees()
    start_polys, starts = total_degree_start(degrees, seed)
    rng = random.Random(seed ^ 0xDEAD)
    gamma = cmath.exp(2j * math.pi * rng.random())
    # scale target equations to unit coefficient norm so the homotopy is not
    # dominated by either end (solutions are unchanged)
    targets = [p.to_approx().scale(1.0 / (p.coeff_norm() or 1.0))
               for p in system.equations]
    hpolys = build_linear_homotopy(start_polys, targets, gamma)
    tracker = HomotopyTracker(CompiledSystem(hpolys, system.n_unknowns + 1), opts)

    chunks = [starts[i:i + batch] for i in range(0, len(starts), batch)]
    offsets = list(range(0, len(starts), batch))
    if opts.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            parts = list(pool.map(tracker.track, chunks))
    else:
        parts = [tracker.track(c) for c in chunks]
    results = []
    for off, part in zip(offsets, parts):
        for r in part:
            r.start_index += off
            results.append(r)
    results.sort(key=lambda r: r.start_index)
    return results


def square_up(system: PolySystem, seed: int = 0, filter_tol: float = 1e-8,
              n_out: int | None = None) -> tuple[PolySystem, Callable[[np.ndarray], np.ndarray]]:
    """Random-combination squaring of an overdetermined system.

    Returns the combined system (n_out equations, default the unknown count)
    and a residual filter re-checking every original equation at candidate
    endpoints (True = passes, i.e. not extraneous).
    """
    m = len(system.equations)
    n = system.n_unknowns
    n_out = n if n_out is None else n_out
    if m <= n_out:
        raise ValueError("square_up needs more equations than outputs")
    rng = random.Random(seed)
    combo = [[cmath.exp(2j * math.pi * rng.random()) for _ in range(m)] for _ in range(n_out)]
    eqs = []
    for i in range(n_out):
        acc = Poly.zero(n, exact=False)
        for j, p in enumerate(system.equations):
            acc = acc + p.to_approx().scale(combo[i][j])
        eqs.append(acc)
    squared = PolySystem(tuple(eqs), n, originals=tuple(system.equations))
    originals = CompiledSystem([p.to_approx() for p in system.equations], n)
    scales = np.array([max(1.0, p.coeff_norm()) for p in system.equations])

    def residual_filter(points: np.ndarray) -> np.ndarray:
        vals = originals.eval(np.asarray(points, dtype=np.complex128))
        return np.all(np.abs(vals) < filter_tol * scales[None, :], axis=1)

    return squared, residual_filter


@dataclass
class SegmentSystem:
    """One leg of a parameter path: polynomials in (x, s) with s in [0,1]."""

    polys: list[Poly]
    n_unknowns: int

    def compiled(self) -> CompiledSystem:
        return CompiledSystem(self.polys, self.n_unknowns + 1)


def track_segment(seg: SegmentSystem, starts: np.ndarray,
                  opts: TrackOptions | None = None) -> list[PathResult]:
    opts = opts or TrackOptions()
    # unit coefficient norms keep the absolute corrector tolerances meaningful
    polys = [p.scale(1.0 / (p.coeff_norm() or 1.0)) for p in seg.polys]
    tracker = HomotopyTracker(CompiledSystem(polys, seg.n_unknowns + 1), opts)
    return tracker.track(np.asarray(starts, dtype=np.complex128))


def track_family(segments: Sequence[SegmentSystem], starts: np.ndarray,
                 opts: TrackOptions | None = None) -> list[PathResult]:
    """Track a batch through consecutive segments, keeping start order.

    CollisionSuspected is flagged when two tracked points approach within
    10 * endpoint_tol at any segment boundary.
    """
    opts = opts or TrackOptions()
    cur = np.array(starts, dtype=np.complex128, copy=True)
    b = cur.shape[0]
    statuses = [CONVERGED] * b
    residuals = [0.0] * b
    conditions = [0.0] * b
    total_steps = [0] * b
    for seg in segments:
        results = track_segment(seg, cur, opts)
        for r in results:
            i = r.start_index
            total_steps[i] += r.steps
            residuals[i] = r.residual
            conditions[i] = max(conditions[i], r.condition)
            if statuses[i] == CONVERGED and r.status != CONVERGED:
                statuses[i] = r.status
            cur[i] = r.endpoint
        # collision scan at the boundary
        live = [i for i in range(b) if statuses[i] == CONVERGED]
        for ii in range(len(live)):
            for jj in range(ii + 1, len(live)):
                d = np.linalg.norm(cur[live[ii]] - cur[live[jj]])
                if d < 10 * opts.endpoint_tol * (1 + np.linalg.norm(cur[live[ii]])):
                    statuses[live[ii]] = COLLISION
                    statuses[live[jj]] = COLLISION
    return [PathResult(endpoint=cur[i].copy(), status=statuses[i], residual=residuals[i],
                       condition=conditions[i], steps=total_steps[i], start_index=i)
            for i in range(b)]


def match_endpoints(reference: np.ndarray, ends: np.ndarray,
                    ratio: float = 0.1) -> list[int]:
    """Match each end to its nearest reference with a best/second ratio test.

    Returns a permutation list ``perm`` with ``perm[i] = j`` meaning path i
    ended at reference point j.  Raises MatchingAmbiguous when the ratio test
    fails or the assignment is not a bijection.
    """
    b = len(reference)
    perm = []
    for i in range(len(ends)):
        d = np.linalg.norm(reference - ends[i][None, :], axis=1)
        order = np.argsort(d)
        best, second = d[order[0]], d[order[1]] if b > 1 else math.inf
        if second > 0 and best / max(second, 1e-300) > ratio:
            raise MatchingAmbiguous(
                f"endpoint {i}: best {best:.3e} vs second {second:.3e}")
        perm.append(int(order[0]))
    if sorted(perm) != list(range(b)):
        raise MatchingAmbiguous("endpoint matching is not a bijection")
    return perm


def newton_polish(system: Sequence[Poly], point: np.ndarray, iters: int = 50,
                  tol: float = 1e-13) -> tuple[np.ndarray, float]:
    n = len(point)
    comp = CompiledSystem([p.to_approx() for p in system], n)
    x = np.array(point, dtype=np.complex128)[None, :]
    if not np.all(np.isfinite(x)):
        return x[0], math.inf
    res = math.inf
    prev = x
    for _ in range(iters):
        vals, jac = comp.eval_and_jac(x)
        if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(jac)):
            x = prev
            break
        res = float(np.linalg.norm(vals))
        if res < tol:
            break
        if jac.shape[1] == n:
            dx = _batch_solve(jac, vals[:, :, None])[:, :, 0]
        else:
            dx = np.linalg.lstsq(jac[0], vals[0], rcond=None)[0][None, :]
        if not np.all(np.isfinite(dx)):
            break
        prev = x
        x = x - dx
        if np.linalg.norm(dx) < 1e-16 * (1 + np.linalg.norm(x)):
            break
    vals = comp.eval(x)
    if not np.all(np.isfinite(vals)):
        return x[0], math.inf
    return x[0], float(np.linalg.norm(vals))


def polish_projective_zero(polys: Sequence[Poly], pt: Sequence[complex],
                           iters: int = 80) -> tuple[np.ndarray, float]:
    """Least-squares Newton for a common projective zero of homogeneous polys.

    The largest coordinate is frozen (chart) and the rest are corrected; works
    for degenerate zeros too (linear convergence).  Returns (point, residual
    of all polys at the point), with the input's normalization preserved.
    """
    x = np.array(pt, dtype=np.complex128)
    piv = int(np.argmax(np.abs(x)))
    pivval = x[piv]
    n = len(x)
    rest = [i for i in range(n) if i != piv]
    images = []
    for i in range(n):
        if i == piv:
            images.append(Poly.constant(n - 1, complex(pivval), exact=False))
        else:
            images.append(Poly.variable(n - 1, rest.index(i), exact=False))
    charted = [p.to_approx().substitute(images) for p in polys]
    # degenerate zeros converge linearly with residuals quadratic in the
    # offset, so run to step exhaustion rather than a residual target
    y, res = newton_polish(charted, x[rest], iters=iters, tol=1e-300)
    out = x.copy()
    out[rest] = y
    return out, res


def refine(system: PolySystem, point: Sequence[complex], target_tol: float = 1e-12,
           opts: TrackOptions | None = None) -> PathResult:
    """Newton-refine an approximate solution, recording a contraction certificate.

    Escalates to 40-digit mpmath Newton when the Jacobian condition exceeds
    1e12 and precision escalation is enabled.  Raises NoContraction when the
    residual sequence fails to contract to the target.
    """
    opts = opts or TrackOptions()
    polys = [p.to_approx() for p in system.equations]
    n = system.n_unknowns
    comp = CompiledSystem(polys, n)
    x = np.array(point, dtype=np.complex128)[None, :]
    residue_track = []
    for _ in range(60):
        vals, jac = comp.eval_and_jac(x)
        res = float(np.linalg.norm(vals))
        residue_track.append(res)
        scale = 1 + float(np.linalg.norm(x))
        if res < target_tol * scale:
            cond = float(np.linalg.cond(jac[0])) if jac.shape[1] == jac.shape[2] else math.inf
            return PathResult(endpoint=x[0].copy(), status=CONVERGED, residual=res,
                              condition=cond, steps=len(residue_track), start_index=0)
        if jac.shape[1] == n:
            dx = _batch_solve(jac, vals[:, :, None])[:, :, 0]
        else:
            dx = np.linalg.lstsq(jac[0], vals[0], rcond=None)[0][None, :]
        x = x - dx
        if len(residue_track) >= 3 and residue_track[-1] > 0.5 * residue_track[-3]:
            break
    cond = float(np.linalg.cond(comp.jac(x)[0])) if system.is_square else math.inf
    if opts.precision_escalation and (cond > 1e12 or not np.isfinite(cond)):
        xe, res = _mpmath_newton(polys, x[0], target_tol)
        if res < target_tol * (1 + np.linalg.norm(xe)):
            return PathResult(endpoint=xe, status=CONVERGED, residual=res,
                              condition=cond, steps=len(residue_track), start_index=0)
    vals = comp.eval(x)
    res = float(np.linalg.norm(vals))
    if res < target_tol * (1 + float(np.linalg.norm(x))):
        return PathResult(endpoint=x[0].copy(), status=CONVERGED, residual=res,
                          condition=cond, steps=len(residue_track), start_index=0)
    raise NoContraction(f"residuals {residue_track[-3:]} did not contract below "
                        f"{target_tol:.1e} (condition {cond:.2e})")


def _mpmath_newton(polys: Sequence[Poly], x0: np.ndarray, tol: float,
                   dps: int = 40) -> tuple[np.ndarray, float]:
    import mpmath as mp

    n = len(x0)
    with mp.workdps(dps):
        x = [mp.mpc(complex(v)) for v in x0]
        parts = [[p.partial(j) for j in range(n)] for p in polys]
        for _ in range(80):
            vals = mp.matrix([p.evaluate(x) for p in polys])
            if mp.norm(vals) < tol * 1e-4:
                break
            jac = mp.matrix(len(polys), n)
            for i in range(len(polys)):
                for j in range(n):
                    jac[i, j] = parts[i][j].evaluate(x)
            try:
                dx = mp.lu_solve(jac, vals)
            except Exception:
                break
            x = [xi - di for xi, di in zip(x, dx)]
        res = float(mp.norm(mp.matrix([p.evaluate(x) for p in polys])))
        return np.array([complex(v) for v in x]), res
