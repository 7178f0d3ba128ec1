"""Linear subspaces of projective space with canonical representations.

A subspace is stored as its row-span basis, reduced row echelon over Q in the
exact lane and orthonormalized rows with a deterministic phase convention in
the approximate lane.  Pluecker vectors are derived data used only for
deduplication, ordering and separation estimates; lines keep their 2x(n+1)
frames because restriction needs frames anyway.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polynomials import exact_kernel, exact_rref, numeric_kernel

DEFAULT_ANGLE_TOL = 1e-7


class Empty:
    """Marker for an empty intersection."""

    def __repr__(self):
        return "Empty()"

    def __eq__(self, other):
        return isinstance(other, Empty)

    def __hash__(self):
        return hash("Empty")


EMPTY = Empty()


def _orthonormal_rows(a: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    u, s, vh = np.linalg.svd(a)
    if len(s) == 0 or s[0] == 0:
        return np.zeros((0, a.shape[1]), dtype=complex)
    r = int(np.sum(s > rank_tol * s[0]))
    rows = vh[:r].copy()
    for i in range(r):
        j = int(np.argmax(np.abs(rows[i])))
        phase = rows[i][j] / abs(rows[i][j])
        rows[i] = rows[i] / phase
    return rows


class Subspace:
    """Projective subspace of P^n given by a full-row-rank basis matrix."""

    __slots__ = ("basis", "exact", "n", "_plucker")

    def __init__(self, basis: Sequence[Sequence], exact: bool | None = None):
        rows = [list(r) for r in basis]
        if not rows:
            raise ValueError("need at least one basis row")
        if exact is None:
            exact = all(isinstance(v, (int, Fraction)) for r in rows for v in r)
        if exact:
            canon, pivots = exact_rref([[Fraction(v) for v in r] for r in rows])
            if len(canon) != len(rows):
                raise ValueError("basis rows are linearly dependent")
            self.basis = tuple(tuple(v for v in r) for r in canon)
        else:
            arr = np.array([[complex(v) for v in r] for r in rows])
            canon = _orthonormal_rows(arr)
            if canon.shape[0] != len(rows):
                raise ValueError("basis rows are numerically dependent")
            self.basis = tuple(tuple(complex(v) for v in r) for r in canon)
        self.exact = exact
        self.n = len(rows[0]) - 1
        self._plucker = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(coords: Sequence) -> "Subspace":
        return Subspace([list(coords)])

    @staticmethod
    def line_through(p: Sequence, q: Sequence) -> "Subspace":
        return Subspace([list(p), list(q)])

    # -- queries -----------------------------------------------------------

    @property
    def dim(self) -> int:
        """Projective dimension."""
        return len(self.basis) - 1

    def matrix(self) -> np.ndarray:
        return np.array([[complex(v) for v in r] for r in self.basis])

    def to_approx(self) -> "Subspace":
        if not self.exact:
            return self
        return Subspace([[complex(v) for v in r] for r in self.basis], exact=False)

    def frame(self) -> list[list]:
        """Basis rows as plain lists (exact Fractions or complex)."""
        return [list(r) for r in self.basis]

    def contains_point(self, pt: Sequence, tol: float = 1e-9) -> bool:
        if self.exact and all(isinstance(v, (int, Fraction)) for v in pt):
            from .polynomials import exact_rank
            return exact_rank(list(self.frame()) + [list(pt)]) == len(self.basis)
        m = self.matrix()
        v = np.array([complex(x) for x in pt])
        nv = np.linalg.norm(v)
        if nv == 0:
            raise ValueError("zero vector is not a projective point")
        v = v / nv
        on = _orthonormal_rows(m)
        resid = v - on.T @ (on.conj() @ v)
        return float(np.linalg.norm(resid)) < tol

    def __eq__(self, other):
        if not isinstance(other, Subspace) or self.n != other.n or self.dim != other.dim:
            return False
        if self.exact and other.exact:
            return self.basis == other.basis
        return self.angle_distance(other) < DEFAULT_ANGLE_TOL

    def __hash__(self):
        if self.exact:
            return hash(self.basis)
        return hash((self.n, self.dim))

    def __repr__(self):
        kind = "exact" if self.exact else "approx"
        return f"Subspace(dim={self.dim}, P^{self.n}, {kind})"

    def angle_distance(self, other: "Subspace") -> float:
        """Largest principal angle (radians) between the two row spaces."""
        a = _orthonormal_rows(self.matrix())
        b = _orthonormal_rows(other.matrix())
        if a.shape[0] != b.shape[0]:
            return math.pi / 2
        s = np.linalg.svd(a @ b.conj().T, compute_uv=False)
        s = np.clip(s, -1.0, 1.0)
        return float(np.arccos(np.min(s)))

    def is_same(self, other: "Subspace", tol: float = DEFAULT_ANGLE_TOL) -> bool:
        if self.dim != other.dim or self.n != other.n:
            return False
        if self.exact and other.exact:
            return self.basis == other.basis
        return self.angle_distance(other) < tol

    # -- Pluecker ----------------------------------------------------------

    def plucker_vector(self) -> np.ndarray:
        """Canonical Pluecker coordinates: maximal minors, scaled so the
        normalizing entry is exactly 1 (largest magnitude, ties broken by the
        lowest index so the gauge is stable under small perturbations)."""
        if self._plucker is None:
            m = self.matrix()
            k = m.shape[0]
            cols = list(itertools.combinations(range(self.n + 1), k))
            vec = np.array([np.linalg.det(m[:, c]) for c in cols])
            mags = np.abs(vec)
            j = int(np.nonzero(mags >= (1 - 1e-6) * mags.max())[0][0])
            vec = vec / vec[j]
            self._plucker = vec
        return self._plucker

    def plucker_key(self, tol: float = 1e-9) -> tuple:
        """Hashable rounded key; equal subspaces give equal keys within ~2 tol."""
        digits = max(0, int(round(-math.log10(tol))) - 2)
        vec = self.plucker_vector()
        return tuple((round(v.real, digits), round(v.imag, digits)) for v in vec)


def plucker_distance(a: Subspace, b: Subspace) -> float:
    """Scale-invariant distance between Pluecker vectors.

    Aligns b's vector to a's gauge (divide both by the coordinate where a is
    largest) so equal subspaces score O(eps) rather than the sqrt(eps) floor
    of chordal metrics; falls back to the chordal distance when the gauge
    coordinate of b is too small to divide by.
    """
    u = a.plucker_vector()
    v = b.plucker_vector()
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    j = int(np.argmax(np.abs(u)))
    if abs(v[j]) > 0.1 * abs(u[j]):
        return float(np.linalg.norm(u / u[j] - v / v[j]) / np.linalg.norm(u / u[j]))
    inner = abs(np.vdot(u, v))
    return float(math.sqrt(max(0.0, 2.0 - 2.0 * min(1.0, inner))))


def span(*subspaces: Subspace) -> Subspace:
    """Smallest subspace containing all the inputs; exact when all are exact."""
    ns = {s.n for s in subspaces}
    if len(ns) != 1:
        raise ValueError("subspaces live in different ambient spaces")
    exact = all(s.exact for s in subspaces)
    if exact:
        rows = [list(r) for s in subspaces for r in s.basis]
        rref, pivots = exact_rref(rows)
        return Subspace(rref, exact=True)
    rows = np.vstack([s.matrix() for s in subspaces])
    on = _orthonormal_rows(rows)
    return Subspace(on, exact=False)


def meet(a: Subspace, b: Subspace):
    """Exact or numeric intersection; EMPTY when the spaces do not meet."""
    if a.n != b.n:
        raise ValueError("subspaces live in different ambient spaces")
    if a.exact and b.exact:
        ka = exact_kernel(a.frame())
        kb = exact_kernel(b.frame())
        rows = [list(v) for v in ka] + [list(v) for v in kb]
        if not rows:
            return Subspace(a.frame())
        basis = exact_kernel(rows)
        if not basis:
            return EMPTY
        return Subspace(basis, exact=True)
    ka = numeric_kernel(a.matrix())
    kb = numeric_kernel(b.matrix())
    rows = np.vstack([ka, kb]) if len(ka) and len(kb) else (ka if len(ka) else kb)
    if rows.shape[0] == 0:
        return Subspace(a.matrix(), exact=False)
    basis = numeric_kernel(rows)
    if basis.shape[0] == 0:
        return EMPTY
    return Subspace(basis, exact=False)


def dedup_by_plucker(subs: Sequence[Subspace], tol: float = 1e-6) -> list[Subspace]:
    """Keep one representative per Pluecker cluster, in input order."""
    out: list[Subspace] = []
    for s in subs:
        if all(plucker_distance(s, t) > tol for t in out):
            out.append(s)
    return out


def sort_by_plucker(subs: Sequence[Subspace]) -> list[Subspace]:
    """Deterministic order: lexicographic on the rounded canonical key."""
    return sorted(subs, key=lambda s: s.plucker_key(tol=1e-7))
