"""Sparse multivariate polynomials over exact rationals or complex floats.

Coefficients are either `fractions.Fraction` (exact lane) or python/numpy
complex (approximate lane).  A polynomial never stores zero coefficients, so
equality of exact polynomials is equality of term maps.  All values are
immutable after construction; every operation returns a fresh polynomial.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]

_EXACT_TYPES = (Fraction, int)


class DegenerateFrame(ValueError):
    """Restriction frame with linearly dependent rows."""


class NotSplit(ValueError):
    """Ternary cubic that is not a product of linear forms over its field."""


class NonConvergence(RuntimeError):
    """Root finder failed to reach the requested residual."""


def _is_exact(value) -> bool:
    return isinstance(value, _EXACT_TYPES)


def _coerce(value, exact: bool):
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        raise TypeError(f"cannot use {value!r} as an exact coefficient")
    return complex(value)


class Poly:
    """Polynomial in ``n`` variables, stored as {exponent tuple: coefficient}."""

    __slots__ = ("n", "terms", "exact", "_compiled")

    def __init__(self, n: int, terms: Mapping[Exponent, object], exact: bool | None = None):
        if exact is None:
            exact = all(_is_exact(c) for c in terms.values())
        clean: dict[Exponent, object] = {}
        for e, c in terms.items():
            c = _coerce(c, exact)
            if c == 0:
                continue
            e = tuple(int(k) for k in e)
            if len(e) != n or any(k < 0 for k in e):
                raise ValueError(f"bad exponent {e} for {n} variables")
            clean[e] = c
        self.n = n
        self.terms = clean
        self.exact = exact
        self._compiled = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(n: int, exact: bool = True) -> "Poly":
        return Poly(n, {}, exact=exact)

    @staticmethod
    def constant(n: int, c, exact: bool | None = None) -> "Poly":
        return Poly(n, {tuple([0] * n): c}, exact=exact)

    @staticmethod
    def variable(n: int, i: int, exact: bool = True) -> "Poly":
        e = [0] * n
        e[i] = 1
        return Poly(n, {tuple(e): Fraction(1) if exact else 1.0 + 0j}, exact=exact)

    @staticmethod
    def linear_form(coeffs: Sequence, exact: bool | None = None) -> "Poly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = c
        return Poly(n, terms, exact=exact)

    def to_approx(self) -> "Poly":
        if not self.exact:
            return self
        return Poly(self.n, {e: complex(c) for e, c in self.terms.items()}, exact=False)

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def coeff(self, e: Exponent):
        return self.terms.get(tuple(e), Fraction(0) if self.exact else 0j)

    def coeff_norm(self) -> float:
        return math.sqrt(sum(abs(complex(c)) ** 2 for c in self.terms.values())) if self.terms else 0.0

    def __eq__(self, other):
        return (
            isinstance(other, Poly)
            and self.n == other.n
            and self.exact == other.exact
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, self.exact, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        bits = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            bits.append(f"({c})" + ("*" + mono if mono else ""))
        return " + ".join(bits)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        if self.n != other.n:
            raise ValueError("variable count mismatch")
        exact = self.exact and other.exact
        a, b = (self, other) if exact else (self.to_approx(), other.to_approx())
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Poly(self.n, terms, exact=exact)

    def __neg__(self) -> "Poly":
        return Poly(self.n, {e: -c for e, c in self.terms.items()}, exact=self.exact)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        if self.n != other.n:
            raise ValueError("variable count mismatch")
        exact = self.exact and other.exact
        a, b = (self, other) if exact else (self.to_approx(), other.to_approx())
        terms: dict[Exponent, object] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(i + j for i, j in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Poly(self.n, terms, exact=exact)

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        exact = self.exact and _is_exact(c)
        src = self if exact else self.to_approx()
        cc = _coerce(c, exact)
        return Poly(self.n, {e: v * cc for e, v in src.terms.items()}, exact=exact)

    def pow(self, k: int) -> "Poly":
        out = Poly.constant(self.n, Fraction(1) if self.exact else 1.0 + 0j, exact=self.exact)
        for _ in range(k):
            out = out * self
        return out

    def partial(self, i: int) -> "Poly":
        terms = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = list(e)
            e2[i] -= 1
            terms[tuple(e2)] = c * e[i]
        return Poly(self.n, terms, exact=self.exact)

    def gradient(self) -> list["Poly"]:
        return [self.partial(i) for i in range(self.n)]

    # -- evaluation --------------------------------------------------------

    def evaluate(self, point: Sequence):
        exact = self.exact and all(_is_exact(v) for v in point)
        total = Fraction(0) if exact else 0j
        pt = [_coerce(v, exact) for v in point]
        for e, c in self.terms.items():
            m = _coerce(c, exact)
            for v, k in zip(pt, e):
                if k:
                    m = m * v**k
            total += m
        return total

    def compiled(self) -> tuple[np.ndarray, np.ndarray]:
        """(exponent matrix (m,n), coefficient vector (m,)) for numpy evaluation."""
        if self._compiled is None:
            if self.terms:
                es = np.array(sorted(self.terms), dtype=np.int64)
                cs = np.array([complex(self.terms[tuple(e)]) for e in es], dtype=np.complex128)
            else:
                es = np.zeros((0, self.n), dtype=np.int64)
                cs = np.zeros((0,), dtype=np.complex128)
            self._compiled = (es, cs)
        return self._compiled

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (B, n); returns shape (B,)."""
        es, cs = self.compiled()
        if len(cs) == 0:
            return np.zeros(points.shape[0], dtype=np.complex128)
        monos = np.prod(points[:, None, :] ** es[None, :, :], axis=2)
        return monos @ cs

    # -- substitution ------------------------------------------------------

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Plug images[i] in for variable i; all images share a variable count."""
        if len(images) != self.n:
            raise ValueError("need one image per variable")
        m = images[0].n
        exact = self.exact and all(p.exact for p in images)
        out = Poly.zero(m, exact=exact)
        maxdeg = [max((e[i] for e in self.terms), default=0) for i in range(self.n)]
        powers = []
        for i, img in enumerate(images):
            row = [Poly.constant(m, Fraction(1) if exact else 1.0 + 0j, exact=exact)]
            for _ in range(maxdeg[i]):
                row.append(row[-1] * (img if exact else img.to_approx()))
            powers.append(row)
        for e, c in self.terms.items():
            term = Poly.constant(m, c if exact else complex(c), exact=exact)
            for i, k in enumerate(e):
                if k:
                    term = term * powers[i][k]
            out = out + term
        return out

    # -- I/O -----------------------------------------------------------------

    def to_json_dict(self) -> dict:
        coeffs = {}
        for e, c in sorted(self.terms.items(), reverse=True):
            key = "".join(str(k) for k in e) if max(e, default=0) < 10 else ",".join(map(str, e))
            coeffs[key] = str(Fraction(c)) if self.exact else repr(complex(c))
        return {"vars": self.n, "degree": self.degree(), "coeffs": coeffs}

    @staticmethod
    def from_json_dict(d: dict) -> "Poly":
        n = int(d["vars"])
        terms = {}
        for key, val in d["coeffs"].items():
            e = tuple(int(k) for k in key.split(",")) if "," in key else tuple(int(ch) for ch in key)
            if len(e) != n:
                raise ValueError(f"exponent key {key!r} does not have {n} entries")
            terms[e] = Fraction(val)
        return Poly(n, terms, exact=True)


def restrict_to_subspace(p: Poly, frame: Sequence[Sequence]) -> Poly:
    """Restrict a homogeneous form to the subspace spanned by the frame rows.

    Returns p(sum_i s_i * frame[i]) expanded in s_0..s_k.  Exact whenever both
    the polynomial and the frame are exact.  Raises DegenerateFrame if the
    frame rows are linearly dependent.
    """
    if not p.is_homogeneous():
        raise ValueError("restriction needs a homogeneous form")
    rows = [list(r) for r in frame]
    if any(len(r) != p.n for r in rows):
        raise ValueError("frame width must match the ambient variable count")
    frame_exact = all(_is_exact(v) for r in rows for v in r)
    if frame_exact:
        full = exact_rank(rows) == len(rows)
    else:
        arr = np.array([[complex(v) for v in r] for r in rows])
        full = np.linalg.matrix_rank(arr) == len(rows)
    if not full:
        raise DegenerateFrame("frame rows are linearly dependent")
    exact = p.exact and frame_exact
    images = [Poly.linear_form([rows[i][j] for i in range(len(rows))], exact=exact)
              for j in range(p.n)]
    return p.substitute(images)


class CubicBlossom:
    """Symmetric trilinear form with blossom(x,x,x) = f(x), for a cubic f.

    Stores the symmetric coefficient tensor sparsely; arguments to the
    partial applications may be numeric vectors, producing polynomials in the
    remaining slots.
    """

    def __init__(self, f: Poly):
        if f.degree() != 3 or not f.is_homogeneous():
            raise ValueError("need a homogeneous cubic")
        self.n = f.n
        self.exact = f.exact
        tensor: dict[tuple[int, int, int], object] = {}
        for e, c in f.terms.items():
            idxs = []
            for i, k in enumerate(e):
                idxs.extend([i] * k)
            i, j, k = idxs
            distinct = len({i, j, k})
            mult = {1: 1, 2: 3, 3: 6}[distinct]
            tensor[(i, j, k)] = c / mult if self.exact else complex(c) / mult
        self.tensor = tensor

    def _sym_iter(self):
        # yield (i, j, k, T) over all permutations of the stored triples
        from itertools import permutations
        for (i, j, k), t in self.tensor.items():
            seen = set()
            for p in permutations((i, j, k)):
                if p not in seen:
                    seen.add(p)
                    yield p[0], p[1], p[2], t

    def eval3(self, a, b, c):
        """blossom(a, b, c) for three numeric vectors."""
        exact = self.exact and all(_is_exact(v) for v in list(a) + list(b) + list(c))
        total = Fraction(0) if exact else 0j
        for i, j, k, t in self._sym_iter():
            tt = t if exact else complex(t)
            total += tt * a[i] * b[j] * c[k]
        return total

    def poly_1w(self, a, b) -> Poly:
        """blossom(a, b, w) as a linear polynomial in w."""
        exact = self.exact and all(_is_exact(v) for v in list(a) + list(b))
        coeffs: dict[int, object] = {}
        for i, j, k, t in self._sym_iter():
            tt = t if exact else complex(t)
            contrib = tt * (a[i] if exact else complex(a[i])) * (b[j] if exact else complex(b[j]))
            coeffs[k] = coeffs.get(k, Fraction(0) if exact else 0j) + contrib
        return Poly.linear_form([coeffs.get(k, Fraction(0) if exact else 0j)
                                 for k in range(self.n)], exact=exact)

    def poly_2w(self, a) -> Poly:
        """blossom(a, w, w) as a quadratic polynomial in w."""
        exact = self.exact and all(_is_exact(v) for v in a)
        terms: dict[Exponent, object] = {}
        for i, j, k, t in self._sym_iter():
            tt = t if exact else complex(t)
            contrib = tt * (a[i] if exact else complex(a[i]))
            e = [0] * self.n
            e[j] += 1
            e[k] += 1
            e = tuple(e)
            terms[e] = terms.get(e, Fraction(0) if exact else 0j) + contrib
        return Poly(self.n, terms, exact=exact)


# ---------------------------------------------------------------------------
# exact linear algebra (fraction-free elimination)
# ---------------------------------------------------------------------------


def _frac_matrix(m) -> list[list[Fraction]]:
    return [[Fraction(v) for v in row] for row in m]


def exact_rref(m) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q. Returns (rref rows, pivot columns)."""
    a = _frac_matrix(m)
    if not a:
        return [], []
    rows, cols = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c]
        a[r] = [v / inv for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a[:r], pivots


def exact_rank(m) -> int:
    return len(exact_rref(m)[1])


def exact_kernel(m) -> list[list[Fraction]]:
    """Basis of the right null space {x : m x = 0}, exact."""
    a = _frac_matrix(m)
    if not a:
        return []
    cols = len(a[0])
    rref, pivots = exact_rref(a)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(v)
    return basis


def exact_solve(m, rhs) -> list[Fraction] | None:
    """One exact solution of m x = rhs, or None if inconsistent."""
    a = _frac_matrix(m)
    b = [Fraction(v) for v in rhs]
    aug = [row + [bv] for row, bv in zip(a, b)]
    cols = len(a[0])
    rref, pivots = exact_rref(aug)
    if cols in pivots:
        return None
    x = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        x[pc] = rref[r][cols]
    return x


def exact_det(m) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination."""
    a = _frac_matrix(m)
    n = len(a)
    if n == 0:
        return Fraction(1)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if piv is None:
                return Fraction(0)
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def exact_inverse(m) -> list[list[Fraction]]:
    a = _frac_matrix(m)
    n = len(a)
    aug = [row + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(a)]
    rref, pivots = exact_rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in rref]


# ---------------------------------------------------------------------------
# numeric rank with gap reporting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankReport:
    rank: int
    gap: float  # sigma_rank / sigma_{rank+1}; inf when the tail is exactly 0
    svals: tuple[float, ...]


def numeric_rank(m, rank_tol: float = 1e-8) -> RankReport:
    """Numeric rank = count of singular values above rank_tol * sigma_max.

    The gap measures how safe the decision was: sigma_r / sigma_{r+1} in the
    interior, and the margin against the threshold itself at the extremes
    (full rank: sigma_min / (rank_tol * sigma_max); rank 0 of a nonzero
    matrix cannot occur since sigma_max passes its own threshold).
    """
    a = np.asarray(m, dtype=complex)
    if a.size == 0:
        return RankReport(0, math.inf, ())
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return RankReport(0, math.inf, tuple(float(v) for v in s))
    r = int(np.sum(s > rank_tol * s[0]))
    if r == len(s):
        gap = float(s[-1] / (rank_tol * s[0]))
    elif s[r] == 0:
        gap = math.inf
    else:
        gap = float(s[r - 1] / s[r])
    return RankReport(r, gap, tuple(float(v) for v in s))


def numeric_kernel(m, rank_tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (rows) of the numeric right null space."""
    a = np.asarray(m, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    if a.shape[0] == 0 or (len(s) and s[0] == 0):
        return np.eye(a.shape[1], dtype=complex)
    r = int(np.sum(s > rank_tol * s[0])) if len(s) else 0
    return vh[r:].conj()


# ---------------------------------------------------------------------------
# univariate roots
# ---------------------------------------------------------------------------


def univariate_roots(coeffs: Sequence, tol: float = 1e-10,
                     cluster_radius: float = 1e-4) -> list[tuple[complex, int]]:
    """Roots with multiplicities of sum(coeffs[k] * x^k).

    Companion-matrix roots, clustered by relative distance to assign
    multiplicities; simple roots are Newton-polished.  Residuals of simple
    roots are checked against tol * coefficient norm (NonConvergence on
    failure); clustered roots are reported at the cluster mean.
    """
    cs = [complex(c) for c in coeffs]
    while cs and abs(cs[-1]) == 0:
        cs.pop()
    if len(cs) < 2:
        raise ValueError("need degree >= 1")
    norm = max(abs(c) for c in cs)
    raw = np.roots(list(reversed(cs)))
    order = sorted(range(len(raw)), key=lambda i: (raw[i].real, raw[i].imag))
    clusters: list[list[complex]] = []
    for i in order:
        r = complex(raw[i])
        for cl in clusters:
            # radius relative to the cluster's own magnitude, so one huge
            # root cannot blur the separation of moderate ones
            if abs(r - cl[0]) < cluster_radius * max(1.0, abs(cl[0])):
                cl.append(r)
                break
        else:
            clusters.append([r])
    p = np.polynomial.Polynomial(cs)
    dp = p.deriv()
    out = []
    for cl in clusters:
        center = sum(cl) / len(cl)
        if len(cl) == 1:
            z = center
            for _ in range(50):
                dz = dp(z)
                if abs(dz) == 0:
                    break
                step = p(z) / dz
                z -= step
                if abs(step) < 1e-15 * max(1.0, abs(z)):
                    break
            center = z
            if abs(p(center)) > 10 * tol * norm * max(1.0, abs(center)) ** (len(cs) - 1):
                raise NonConvergence(f"root {center} residual {abs(p(center)):.3e} too large")
        out.append((complex(center), len(cl)))
    return out


def binary_form_roots(p: Poly, tol: float = 1e-10,
                      inf_tol: float = 1e-11) -> list[tuple[tuple[complex, complex], int]]:
    """Projective roots (s:t) of a homogeneous binary form, with multiplicity.

    Leading t-coefficients below inf_tol * max|coeff| count as zero (roots at
    (0:1)); otherwise they would surface as spurious huge affine roots.
    """
    if p.n != 2 or not p.is_homogeneous() or p.is_zero():
        raise ValueError("need a nonzero homogeneous binary form")
    d = p.degree()
    coeffs = [complex(p.coeff((d - k, k))) for k in range(d + 1)]  # coeff of s^(d-k) t^k
    norm = max(abs(c) for c in coeffs)
    qdeg = d
    while qdeg >= 0 and abs(coeffs[qdeg]) <= inf_tol * norm:
        qdeg -= 1
    out = []
    inf_mult = d - qdeg  # multiplicity of (0:1)
    if inf_mult:
        out.append(((0.0 + 0j, 1.0 + 0j), inf_mult))
    if qdeg >= 1:
        for z, m in univariate_roots(coeffs[: qdeg + 1], tol=tol):
            out.append((((1.0 + 0j), complex(z)), m))
    return out


def _divide_out_root(ints: list[Fraction], cand: Fraction) -> list[Fraction]:
    """Quotient of sum c_k x^k by (x - cand); caller guarantees cand is a root."""
    q = [Fraction(0)] * (len(ints) - 1)
    q[-1] = Fraction(ints[-1])
    for k in range(len(ints) - 3, -1, -1):
        q[k] = ints[k + 1] + cand * q[k + 1]
    return q


def rational_roots(coeffs: Sequence[Fraction]) -> list[tuple[Fraction, int]]:
    """All rational roots (with multiplicity) of sum coeffs[k] x^k, exact."""
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) < 2:
        return []
    den = math.lcm(*[c.denominator for c in cs])
    ints = [Fraction(int(c * den)) for c in cs]
    roots: list[tuple[Fraction, int]] = []
    shift = 0
    while ints[shift] == 0:
        shift += 1
    if shift:
        roots.append((Fraction(0), shift))
        ints = ints[shift:]
    if len(ints) < 2:
        return roots

    def divisors(v: int) -> list[int]:
        v = abs(v)
        out = set()
        d = 1
        while d * d <= v:
            if v % d == 0:
                out.add(d)
                out.add(v // d)
            d += 1
        return sorted(out)

    candidates = set()
    for pnum in divisors(int(ints[0])):
        for qden in divisors(int(ints[-1])):
            candidates.add(Fraction(pnum, qden))
            candidates.add(Fraction(-pnum, qden))
    for cand in sorted(candidates):
        mult = 0
        cur = ints[:]
        while len(cur) >= 2:
            val = Fraction(0)
            for c in reversed(cur):
                val = val * cand + c
            if val != 0:
                break
            cur = _divide_out_root(cur, cand)
            mult += 1
        if mult:
            roots.append((cand, mult))
    return roots


# ---------------------------------------------------------------------------
# splitting ternary cubics into linear factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitResult:
    factors: tuple[tuple[Poly, int], ...]  # (canonically scaled linear form, multiplicity)
    scale: object  # c == scale * prod(factor^mult)


def canonical_linear(l: Poly) -> Poly:
    """Scale a linear form so its first nonzero coefficient (by variable) is 1."""
    lead = None
    if l.exact:
        for i in range(l.n):
            e = tuple(1 if j == i else 0 for j in range(l.n))
            if e in l.terms:
                lead = l.terms[e]
                break
    else:
        mx = max(abs(c) for c in l.terms.values())
        for i in range(l.n):
            e = tuple(1 if j == i else 0 for j in range(l.n))
            c = l.terms.get(e, 0j)
            if abs(c) > 1e-8 * mx:
                lead = c
                break
    if lead is None:
        raise ValueError("zero linear form")
    return l.scale(Fraction(1) / lead if l.exact else 1.0 / lead)


def _triple_factor(c: Poly) -> Poly | None:
    """For c proportional to l^3, recover l from the coefficient tensor."""
    n = c.n
    for i in range(n):
        e3 = tuple(3 if j == i else 0 for j in range(n))
        a3 = c.terms.get(e3)
        if not a3:
            continue
        lin = {tuple(1 if k == i else 0 for k in range(n)): Fraction(1) if c.exact else 1.0 + 0j}
        for j in range(n):
            if j == i:
                continue
            e = tuple((2 if k == i else 0) + (1 if k == j else 0) for k in range(n))
            cj = c.terms.get(e)
            if cj:
                lin[tuple(1 if k == j else 0 for k in range(n))] = cj / (3 * a3)
        return Poly(n, lin, exact=c.exact)
    return None


def poly_divides(l: Poly, c: Poly) -> Poly | None:
    """Exact quotient c / l for a linear form l, or None when it does not divide."""
    lead = None
    for i in range(l.n):
        e = tuple(1 if j == i else 0 for j in range(l.n))
        if e in l.terms:
            lead = i
            break
    if lead is None:
        raise ValueError("zero divisor")
    lc = l.terms[tuple(1 if j == lead else 0 for j in range(l.n))]
    rem = c
    quot = Poly.zero(c.n, exact=c.exact and l.exact)
    scale = c.coeff_norm() or 1.0
    while not rem.is_zero():
        e, cc = max(rem.terms.items(), key=lambda it: (it[0][lead], it[0]))
        if e[lead] == 0:
            return None
        qe = list(e)
        qe[lead] -= 1
        qterm = Poly(c.n, {tuple(qe): cc / lc}, exact=rem.exact and l.exact)
        quot = quot + qterm
        rem = rem - qterm * l
        if not rem.exact:
            rem = Poly(c.n, {e2: v for e2, v in rem.terms.items() if abs(v) > 1e-12 * scale},
                       exact=False)
    return quot


def _lift_factor(c: Poly, z: list, mult: int, tol: float) -> Poly | None:
    exact = c.exact and all(_is_exact(v) for v in z)
    if mult == 1:
        grad = [g.evaluate(z) for g in c.gradient()]
        if math.sqrt(sum(abs(complex(v)) ** 2 for v in grad)) <= tol * (c.coeff_norm() or 1.0):
            return None
        return Poly.linear_form(grad, exact=exact)
    if mult == 2:
        hess = [[c.partial(i).partial(j).evaluate(z) for j in range(3)] for i in range(3)]
        row = max(hess, key=lambda r: sum(abs(complex(v)) ** 2 for v in r))
        if sum(abs(complex(v)) ** 2 for v in row) == 0:
            return None
        return Poly.linear_form(row, exact=exact)
    return _triple_factor(c)


def _split_attempt(c: Poly, tol: float, rng: random.Random) -> SplitResult:
    if c.exact:
        p = [Fraction(rng.randint(-9, 9)) for _ in range(3)]
        q = [Fraction(rng.randint(-9, 9)) for _ in range(3)]
    else:
        p = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(3)]
        q = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(3)]
    b = restrict_to_subspace(c, [p, q])
    if b.is_zero() or b.degree() != 3:
        raise RuntimeError("degenerate restriction line")

    roots: list[tuple[list, int]] = []
    if c.exact:
        coeffs = [b.coeff((3 - k, k)) for k in range(4)]
        total = 0
        inf_m = 0
        k = 3
        while k >= 0 and coeffs[k] == 0:
            inf_m += 1
            k -= 1
        if inf_m:
            roots.append((list(q), inf_m))
            total += inf_m
        for val, m in rational_roots(coeffs[: 4 - inf_m]):
            roots.append(([pi + val * qi for pi, qi in zip(p, q)], m))
            total += m
        if total != 3:
            raise NotSplit("no full rational linear factorization on this line")
    else:
        for (s, t), m in binary_form_roots(b, tol=tol):
            roots.append(([s * pi + t * qi for pi, qi in zip(p, q)], m))

    factors: list[tuple[Poly, int]] = []
    for z, mult in roots:
        lf = _lift_factor(c, z, mult, tol)
        if lf is None:
            raise RuntimeError("factor lift degenerate")
        factors.append((canonical_linear(lf), mult))

    prod = Poly.constant(3, Fraction(1) if c.exact else 1.0 + 0j, exact=c.exact)
    for lf, mult in factors:
        prod = prod * lf.pow(mult)
    e0 = max(prod.terms, key=lambda e: abs(complex(prod.terms[e])))
    if e0 not in c.terms:
        raise NotSplit("re-multiplied product has different support")
    sc = c.terms[e0] / prod.terms[e0]
    diff = c - prod.scale(sc)
    if c.exact:
        if not diff.is_zero():
            raise NotSplit("exact re-multiplication mismatch")
    elif diff.coeff_norm() > tol * (c.coeff_norm() or 1.0) * 100:
        raise NotSplit(f"re-multiplication residual {diff.coeff_norm():.2e}")
    return SplitResult(tuple(factors), sc)


def split_ternary_cubic(c: Poly, tol: float = 1e-9, seed: int = 0) -> SplitResult:
    """Split a homogeneous ternary cubic into linear factors, or raise NotSplit.

    Restricts to a random line, roots the binary cubic there, lifts each root
    to a candidate linear factor (gradient for simple roots, the rank-1
    Hessian row for double roots, the symmetric tensor slice for triple
    roots), then certifies by re-multiplying.  Retries with a fresh line up to
    three times; an unlucky line (through a crossing of factor lines) fails
    certification and is retried, so NotSplit is only reported after all
    attempts fail.
    """
    if c.n != 3 or c.degree() != 3 or not c.is_homogeneous():
        raise ValueError("need a homogeneous ternary cubic")
    rng = random.Random(seed ^ 0x5EED)
    last_err: Exception | None = None
    for _ in range(3):
        try:
            return _split_attempt(c, tol, rng)
        except (NotSplit, RuntimeError, NonConvergence) as err:
            last_err = err
    raise NotSplit(f"no splitting found: {last_err}")
