"""The E6 root system and Weyl-subgroup orbit counts on the 72 roots.

The families of generalized twisted cubics on a cubic surface with ADE
singularities biject with orbits of the roots under the subgroup generated
by reflections in the effective roots of the singularity configuration;
arithmetically Cohen-Macaulay families are the orbits containing no
effective root, and the residual involution acts on orbits by negation.
Counts here are pure integer combinatorics on 72 vectors.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

# Cartan matrix of E6 (nodes 1-6, node 2 attached to node 4)
CARTAN_E6 = (
    (2, 0, -1, 0, 0, 0),
    (0, 2, 0, -1, 0, 0),
    (-1, 0, 2, -1, 0, 0),
    (0, -1, -1, 2, -1, 0),
    (0, 0, 0, -1, 2, -1),
    (0, 0, 0, 0, -1, 2),
)

CONFIG_SHAPES = {
    "empty": [],
    "A1": [1],
    "2A1": [1, 1],
    "A2": [2],
    "A3": [3],
    "4A1": [1, 1, 1, 1],
    "2A1A3": [1, 1, 3],
    "A1A5": [1, 5],
    "A5": [5],
}


class NotRealizable(ValueError):
    pass


Root = tuple[int, ...]


def _pairing_pos(x: Root, y: Root) -> int:
    return sum(x[i] * CARTAN_E6[i][j] * y[j] for i in range(6) for j in range(6))


def pairing(x: Root, y: Root) -> int:
    """Negative definite convention: pairing(alpha, alpha) = -2 for roots."""
    return -_pairing_pos(x, y)


def reflect(x: Root, beta: Root) -> Root:
    c = _pairing_pos(x, beta)  # (beta, beta) = 2
    return tuple(x[i] - c * beta[i] for i in range(6))


@dataclass(frozen=True)
class RootSystemE6:
    roots: tuple[Root, ...]

    def __len__(self):
        return len(self.roots)


def build_e6() -> RootSystemE6:
    """All 72 roots by reflection closure of the simple roots."""
    simple = [tuple(1 if j == i else 0 for j in range(6)) for i in range(6)]
    roots = set(simple) | {tuple(-v for v in s) for s in simple}
    frontier = set(roots)
    while frontier:
        new = set()
        for r in frontier:
            for s in simple:
                rr = reflect(r, s)
                if rr not in roots:
                    new.add(rr)
        roots |= new
        frontier = new
    out = tuple(sorted(roots))
    if len(out) != 72:
        raise RuntimeError(f"reflection closure produced {len(out)} roots")
    return RootSystemE6(out)


@dataclass(frozen=True)
class EffectiveConfig:
    label: str
    gamma0: tuple[Root, ...]  # one simple chain per component, concatenated
    chain_sizes: tuple[int, ...]


def _is_chain(rs_roots, cand: list[Root]) -> bool:
    """cand forms an A_k chain: consecutive pairing -1 (positive convention
    +... adjacency), others orthogonal."""
    k = len(cand)
    for i in range(k):
        for j in range(i + 1, k):
            want = -1 if j == i + 1 else 0
            if _pairing_pos(cand[i], cand[j]) != want:
                return False
    return True


def effective_set(label: str, seed: int = 0, rs: RootSystemE6 | None = None) -> EffectiveConfig:
    """A subset of roots realizing the configuration (A_k chains, mutually
    orthogonal components); the seed shuffles equivalent embeddings."""
    if label not in CONFIG_SHAPES:
        raise NotRealizable(f"configuration {label!r} is not in the supported table")
    shape = CONFIG_SHAPES[label]
    rs = rs or build_e6()
    rng = random.Random(seed)
    roots = list(rs.roots)
    rng.shuffle(roots)

    chains: list[list[Root]] = []

    def orthogonal_to_all(r: Root) -> bool:
        return all(_pairing_pos(r, c) == 0 for ch in chains for c in ch)

    def extend_chain(target: int, chain: list[Root]) -> bool:
        if len(chain) == target:
            chains.append(chain)
            if place(len(chains)):
                return True
            chains.pop()
            return False
        for r in roots:
            if r in chain:
                continue
            if not orthogonal_to_all(r):
                continue
            if chain and _pairing_pos(chain[-1], r) != -1:
                continue
            if any(_pairing_pos(c, r) != 0 for c in chain[:-1]):
                continue
            if not chain:
                pass
            if extend_chain(target, chain + [r]):
                return True
        return False

    def place(idx: int) -> bool:
        if idx == len(shape):
            return True
        return extend_chain(shape[idx], [])

    if not place(0):
        raise NotRealizable(f"no embedding of {label} found in E6")
    gamma0 = tuple(r for ch in chains for r in ch)
    return EffectiveConfig(label=label, gamma0=gamma0, chain_sizes=tuple(shape))


@dataclass(frozen=True)
class OrbitReport:
    label: str
    n_orbits: int
    n_acm: int
    n_tau_fixed_acm: int
    orbit_sizes: tuple[int, ...]


def orbit_counts(rs: RootSystemE6, config: EffectiveConfig) -> OrbitReport:
    """BFS orbit partition of the 72 roots under reflections in gamma0.

    aCM orbits are those containing no root of the sub-root-system generated
    by the configuration; the involution acts by negation and tau-fixed aCM
    orbits are the negation-closed ones among them.
    """
    gens = list(config.gamma0)
    roots = rs.roots
    index = {r: i for i, r in enumerate(roots)}
    seen = [False] * len(roots)
    orbits: list[frozenset] = []
    for i, r in enumerate(roots):
        if seen[i]:
            continue
        orb = {r}
        stack = [r]
        seen[i] = True
        while stack:
            x = stack.pop()
            for g in gens:
                y = reflect(x, g)
                if y not in orb:
                    orb.add(y)
                    seen[index[y]] = True
                    stack.append(y)
        orbits.append(frozenset(orb))

    # sub-root-system generated by the configuration: reflection closure
    sub = set(gens) | {tuple(-v for v in g) for g in gens}
    changed = True
    while changed:
        changed = False
        for x in list(sub):
            for g in gens:
                y = reflect(x, g)
                if y not in sub:
                    sub.add(y)
                    changed = True

    acm = [o for o in orbits if not (o & sub)]
    tau_fixed = [o for o in acm if {tuple(-v for v in x) for x in o} == o]
    return OrbitReport(label=config.label, n_orbits=len(orbits), n_acm=len(acm),
                       n_tau_fixed_acm=len(tau_fixed),
                       orbit_sizes=tuple(sorted(len(o) for o in orbits)))


def report_for(label: str, seed: int = 0) -> OrbitReport:
    rs = build_e6()
    return orbit_counts(rs, effective_set(label, seed=seed, rs=rs))
