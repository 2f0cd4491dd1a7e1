#!/usr/bin/env python3
"""
Exhaustive form theory over prime fields

Canonical forms (lexicographically minimal representative of the GL_n
orbit), enumeration of isometry classes, Lagrangian search and isometry
witnesses. All searches run on plain tuples for speed and hand back
UnimodularForm / Matrix values at the boundary.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import config
from errors import CapExceededError, UnsupportedError
from exactalg import Matrix
from formcore import (
    FormParameter,
    UnimodularForm,
    eval_q,
    orthogonal_sum,
    transform,
)

logger = logging.getLogger(__name__)


def require_prime_field(param: FormParameter, what: str) -> None:
    if not param.ring.is_field:
        raise UnsupportedError(f"{what} is only supported over prime fields, got {param.ring.name}")


def witt_extension_holds(param: FormParameter) -> bool:
    """
    Whether every isometry between subspaces extends to the whole space.

    True in odd characteristic and for quadratic or alternating forms in
    characteristic 2; false for symmetric bilinear forms over F_2 and for
    general Q-parameters.
    """
    if param.flavor == "general":
        return False
    if param.ring.modulus != 2:
        return True
    return param.flavor in ("quadratic", "even")


class _FormTables:
    """Precomputed B v, b(v, v) and q(v) for every vector of F_p^n"""

    def __init__(self, F: UnimodularForm):
        p = F.ring.modulus
        n = F.rank
        self.p = p
        self.n = n
        self.vectors = [v for v in itertools.product(range(p), repeat=n) if any(v)]
        B = F.gram
        self.Bv = {v: B.apply(v) for v in self.vectors}
        self.norm = {v: sum(a * b for a, b in zip(v, self.Bv[v])) % p for v in self.vectors}
        self.q = {v: eval_q(F, v) for v in self.vectors}

    def b(self, u: Tuple[int, ...], v: Tuple[int, ...]) -> int:
        return sum(a * b for a, b in zip(u, self.Bv[v])) % self.p

    def extend_span(self, span: frozenset, v: Tuple[int, ...]) -> frozenset:
        p = self.p
        return frozenset(tuple((s_i + c * v_i) % p for s_i, v_i in zip(s, v))
                         for s in span for c in range(p))


@dataclass(frozen=True)
class CanonicalForm:
    """Orbit-minimal representative; basis columns map it into the input form"""

    key: Tuple
    form: UnimodularForm
    basis: Matrix


def canonical_form(F: UnimodularForm, rank_cap: Optional[int] = None) -> CanonicalForm:
    """
    Lexicographically minimal basis description of F.

    The key of a basis v_1..v_n is the concatenation over i of
    (b(v_1, v_i), ..., b(v_{i-1}, v_i), b(v_i, v_i), q(v_i)). Minimisation is
    a backtracking search over partial bases; when Witt extension holds all
    partial bases with equal keys lie in one orbit and a single one is kept.
    """
    param = F.param
    require_prime_field(param, "canonical_form")
    prune = witt_extension_holds(param)
    cap = rank_cap if rank_cap is not None else (config.ENUM_RANK_CAP if prune else config.ORBIT_RANK_CAP)
    if F.rank > cap:
        raise CapExceededError(f"canonical_form: rank {F.rank} exceeds cap {cap}")
    n = F.rank
    if n == 0:
        return CanonicalForm((), F, Matrix.zeros(F.ring, 0, 0))
    tables = _FormTables(F)
    zero = tuple([0] * n)
    best: List = [None, None]

    def search(chosen: List[Tuple[int, ...]], span: frozenset, key: Tuple) -> None:
        level = len(chosen)
        if level == n:
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, list(chosen)
            return
        level_best = None
        ties: List[Tuple[int, ...]] = []
        for v in tables.vectors:
            if v in span:
                continue
            k = tuple(tables.b(u, v) for u in chosen) + (tables.norm[v], tables.q[v])
            if level_best is None or k < level_best:
                level_best, ties = k, [v]
            elif k == level_best:
                ties.append(v)
        new_key = key + level_best
        if best[0] is not None and new_key > best[0][:len(new_key)]:
            return
        if prune:
            ties = ties[:1]
        for v in ties:
            search(chosen + [v], tables.extend_span(span, v), new_key)

    search([], frozenset([zero]), ())
    key, basis_vectors = best
    P = Matrix.from_columns(F.ring, basis_vectors, n)
    return CanonicalForm(key, transform(F, P), P)


def isometry_matrix(F: UnimodularForm, G: UnimodularForm) -> Optional[Matrix]:
    """U with U^T B_G U = B_F and matching q-values, or None"""
    if F.rank != G.rank:
        return None
    cf = canonical_form(F)
    cg = canonical_form(G)
    if cf.key != cg.key:
        return None
    return cg.basis @ cf.basis.inverse()


def _rank_one_forms(param: FormParameter) -> List[UnimodularForm]:
    ring = param.ring
    out = []
    for q in param.q_elements():
        b = param.rho(q)
        if ring.is_unit(b):
            out.append(UnimodularForm(param, Matrix.from_rows(ring, [[b]]), (q,)))
    return out


def _rank_two_forms(param: FormParameter) -> List[UnimodularForm]:
    ring = param.ring
    eps = param.epsilon
    by_rho: Dict[int, List] = {}
    for q in param.q_elements():
        by_rho.setdefault(param.rho(q), []).append(q)
    out = []
    for a, d in itertools.product(sorted(by_rho), repeat=2):
        for c in ring.elements():
            gram = Matrix.from_rows(ring, [[a, c], [eps * c, d]])
            if not gram.is_invertible():
                continue
            for q1, q2 in itertools.product(by_rho[a], by_rho[d]):
                out.append(UnimodularForm(param, gram, (q1, q2)))
    return out


def _canonical_of(F: UnimodularForm) -> CanonicalForm:
    return canonical_form(F)


def _dedupe(forms: Sequence[UnimodularForm], jobs: int) -> List[CanonicalForm]:
    if jobs > 1 and len(forms) > 8:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            canon = list(executor.map(_canonical_of, forms, chunksize=max(1, len(forms) // (4 * jobs))))
    else:
        canon = [canonical_form(F) for F in forms]
    seen: Dict[Tuple, CanonicalForm] = {}
    for c in canon:
        seen.setdefault(c.key, c)
    return [seen[k] for k in sorted(seen)]


def enumerate_classes(param: FormParameter, rank_cap: Optional[int] = None,
                      jobs: int = 1) -> Dict[int, List[CanonicalForm]]:
    """
    All isometry classes of unimodular forms of rank <= rank_cap, by rank.

    Over a field every unimodular form splits off a rank-one piece (some
    b(v, v) is a unit) or a rank-two piece, so rank r classes are reached as
    orthogonal sums of classes of rank r-1 and 1 or r-2 and 2.
    """
    require_prime_field(param, "enumerate_classes")
    cap = rank_cap if rank_cap is not None else config.ENUM_RANK_CAP
    limit = config.ENUM_RANK_CAP if witt_extension_holds(param) else config.ORBIT_RANK_CAP
    if cap > limit:
        raise CapExceededError(f"enumerate_classes: rank cap {cap} exceeds the limit {limit} for {param.name}")
    zero = UnimodularForm(param, Matrix.zeros(param.ring, 0, 0), ())
    classes: Dict[int, List[CanonicalForm]] = {0: [canonical_form(zero)]}
    if cap >= 1:
        classes[1] = _dedupe(_rank_one_forms(param), jobs)
    if cap >= 2:
        classes[2] = _dedupe(_rank_two_forms(param), jobs)
    for r in range(3, cap + 1):
        candidates = [orthogonal_sum(a.form, b.form) for a in classes[r - 1] for b in classes[1]]
        candidates += [orthogonal_sum(a.form, b.form) for a in classes[r - 2] for b in classes[2]]
        classes[r] = _dedupe(candidates, jobs)
    for r in sorted(classes):
        logger.info(f"{param.name}: {len(classes[r])} classes of rank {r}")
    return classes


def rref_subspaces(p: int, n: int, k: int) -> Iterator[List[Tuple[int, ...]]]:
    """All k-dimensional subspaces of F_p^n as RREF row bases"""
    for pivots in itertools.combinations(range(n), k):
        free = [(r, c) for r in range(k) for c in range(pivots[r] + 1, n) if c not in pivots]
        for values in itertools.product(range(p), repeat=len(free)):
            rows = [[0] * n for _ in range(k)]
            for r, c in enumerate(pivots):
                rows[r][c] = 1
            for (r, c), x in zip(free, values):
                rows[r][c] = x
            yield [tuple(row) for row in rows]


def _is_isotropic_basis(tables: _FormTables, zero_q, basis: Sequence[Tuple[int, ...]]) -> bool:
    for i, u in enumerate(basis):
        if tables.q[u] != zero_q or tables.norm[u] != 0:
            return False
        for v in basis[i + 1:]:
            if tables.b(u, v) != 0:
                return False
    return True


def list_lagrangians(F: UnimodularForm, rank_cap: Optional[int] = None) -> List[Matrix]:
    """Every Lagrangian of F, as column bases in reduced echelon form"""
    require_prime_field(F.param, "list_lagrangians")
    cap = rank_cap if rank_cap is not None else config.ENUM_RANK_CAP
    if F.rank > cap:
        raise CapExceededError(f"list_lagrangians: rank {F.rank} exceeds cap {cap}")
    n = F.rank
    if n % 2:
        return []
    if n == 0:
        return [Matrix.zeros(F.ring, 0, 0)]
    tables = _FormTables(F)
    zero_q = F.param.q_zero()
    out = []
    for basis in rref_subspaces(F.ring.modulus, n, n // 2):
        if _is_isotropic_basis(tables, zero_q, basis):
            out.append(Matrix.from_columns(F.ring, basis, n))
    return out


def find_lagrangian_exhaustive(F: UnimodularForm, rank_cap: Optional[int] = None) -> Optional[Matrix]:
    """
    A Lagrangian of F or None; complete up to the rank cap.

    When Witt extension holds every maximal isotropic subspace has the same
    dimension, so a greedy extension decides existence.
    """
    require_prime_field(F.param, "find_lagrangian")
    cap = rank_cap if rank_cap is not None else config.ENUM_RANK_CAP
    if F.rank > cap:
        raise CapExceededError(f"find_lagrangian: rank {F.rank} exceeds cap {cap}")
    n = F.rank
    if n % 2:
        return None
    if n == 0:
        return Matrix.zeros(F.ring, 0, 0)
    if not witt_extension_holds(F.param):
        return next(iter(list_lagrangians(F, cap)), None)
    tables = _FormTables(F)
    zero_q = F.param.q_zero()
    chosen: List[Tuple[int, ...]] = []
    span = frozenset([tuple([0] * n)])
    for v in tables.vectors:
        if len(chosen) == n // 2:
            break
        if v in span or tables.q[v] != zero_q or tables.norm[v] != 0:
            continue
        if any(tables.b(u, v) for u in chosen):
            continue
        chosen.append(v)
        span = tables.extend_span(span, v)
    if len(chosen) < n // 2:
        return None
    return Matrix.from_columns(F.ring, chosen, n)
