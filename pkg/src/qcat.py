#!/usr/bin/env python3
"""
Finite categories at desk scale

Finite posets and cube diagrams of free modules with the two strongly
cocartesian tests (unit squares and left Kan extension from the axes), and
the classical Q-constructions over prime fields: the hermitian one whose
objects are unimodular forms and whose morphisms are span classes, and the
split-exact one on free modules. Components of both are computed by
union-find.
"""

import itertools
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

import config
from chaincx import ChainComplex, is_acyclic
from errors import CapExceededError, ConventionError, UnsupportedError, ValidationError
from exactalg import Matrix, RingSpec, block_matrix, hstack, random_matrix
from formcore import FormParameter, UnimodularForm, eval_q
from formfinite import enumerate_classes, require_prime_field, rref_subspaces

logger = logging.getLogger(__name__)


# Posets


class FinPoset:
    """
    A finite partial order on hashable labels, stored as a bit matrix.

    cube_shape is (a, r) for posets built by cube(a, r) and None otherwise.
    """

    __slots__ = ("elements", "index", "_leq", "cube_shape")

    def __init__(self, elements: Sequence[Hashable], leq: Sequence[Sequence[bool]],
                 cube_shape: Optional[Tuple[int, int]] = None):
        n = len(elements)
        self.elements = tuple(elements)
        self.index = {x: i for i, x in enumerate(self.elements)}
        if len(self.index) != n:
            raise ValidationError("Poset elements must be distinct")
        if len(leq) != n or any(len(row) != n for row in leq):
            raise ValidationError(f"Order matrix must be {n} x {n}")
        self._leq = tuple(tuple(bool(v) for v in row) for row in leq)
        self.cube_shape = cube_shape
        self._check_axioms()

    def _check_axioms(self) -> None:
        L = self._leq
        n = len(L)
        for i in range(n):
            if not L[i][i]:
                raise ValidationError(f"Order is not reflexive at {self.elements[i]}")
        for i, j in itertools.combinations(range(n), 2):
            if L[i][j] and L[j][i]:
                raise ValidationError(f"Order is not antisymmetric: {self.elements[i]} and {self.elements[j]}")
        for i, j, k in itertools.product(range(n), repeat=3):
            if L[i][j] and L[j][k] and not L[i][k]:
                raise ValidationError(
                    f"Order is not transitive: {self.elements[i]} <= {self.elements[j]} <= {self.elements[k]}")

    @classmethod
    def from_relation(cls, elements: Sequence[Hashable], leq: Callable[[Any, Any], bool],
                      cube_shape: Optional[Tuple[int, int]] = None) -> "FinPoset":
        return cls(elements, [[leq(x, y) for y in elements] for x in elements], cube_shape)

    @classmethod
    def cube(cls, a: int, r: int) -> "FinPoset":
        """[a]^r = {0, .., a}^r with the componentwise order"""
        if a < 0 or r < 0:
            raise ValidationError(f"Cube [{a}]^{r} needs a, r >= 0")
        elements = list(itertools.product(range(a + 1), repeat=r))
        return cls.from_relation(elements, lambda x, y: all(s <= t for s, t in zip(x, y)), (a, r))

    def __len__(self) -> int:
        return len(self.elements)

    def leq(self, x: Hashable, y: Hashable) -> bool:
        return self._leq[self.index[x]][self.index[y]]

    def below(self, x: Hashable) -> List[Hashable]:
        return [y for y in self.elements if self.leq(y, x)]

    def covering_relations(self) -> List[Tuple[Hashable, Hashable]]:
        """Pairs x < y with nothing strictly between"""
        out = []
        for x, y in itertools.permutations(self.elements, 2):
            if not self.leq(x, y):
                continue
            if any(z != x and z != y and self.leq(x, z) and self.leq(z, y) for z in self.elements):
                continue
            out.append((x, y))
        return out

    def linear_extension(self) -> List[Hashable]:
        return sorted(self.elements, key=lambda x: (len(self.below(x)), self.index[x]))

    def subposet(self, keep: Callable[[Hashable], bool]) -> "FinPoset":
        elements = [x for x in self.elements if keep(x)]
        return FinPoset.from_relation(elements, self.leq)

    def to_json(self) -> Dict:
        return {
            "elements": [list(x) if isinstance(x, tuple) else x for x in self.elements],
            "covering": [[list(x) if isinstance(x, tuple) else x, list(y) if isinstance(y, tuple) else y]
                         for x, y in self.covering_relations()],
        }


def support(x: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(i for i, c in enumerate(x) if c)


def axis_subposet(P: FinPoset) -> FinPoset:
    """Elements of a cube with at most one nonzero coordinate"""
    if P.cube_shape is None:
        raise ValidationError("axis_subposet needs a cube poset")
    return P.subposet(lambda x: len(support(x)) <= 1)


def twisted_arrows(P: FinPoset) -> FinPoset:
    """Arrows x <= y of P, with (x, y) <= (x', y') when x' <= x and y <= y'"""
    arrows = [(x, y) for x in P.elements for y in P.elements if P.leq(x, y)]
    return FinPoset.from_relation(arrows, lambda f, g: P.leq(g[0], f[0]) and P.leq(f[1], g[1]))


# Diagrams of free modules


class ModuleDiagram:
    """
    A functor from a finite poset to free modules: a rank per element and a
    transition matrix (rank y x rank x) per covering relation x < y.
    """

    def __init__(self, ring: RingSpec, poset: FinPoset, ranks: Dict[Hashable, int],
                 transitions: Dict[Tuple[Hashable, Hashable], Matrix], check: bool = True):
        self.ring = ring
        self.poset = poset
        self.ranks = {x: int(ranks.get(x, 0)) for x in poset.elements}
        covers = poset.covering_relations()
        self.transitions: Dict[Tuple[Hashable, Hashable], Matrix] = {}
        for x, y in covers:
            m = transitions.get((x, y))
            shape = (self.ranks[y], self.ranks[x])
            if m is None:
                m = Matrix.zeros(ring, *shape)
            if m.shape != shape or m.ring != ring:
                raise ValidationError(f"Transition {x} -> {y} has shape {m.shape}, expected {shape}")
            self.transitions[(x, y)] = m
        extra = set(transitions) - set(self.transitions)
        if extra:
            raise ValidationError(f"Transitions given for non-covering pairs: {sorted(extra)}")
        self._cache: Dict[Hashable, Dict[Hashable, Matrix]] = {}
        if check and not self.verify_functoriality():
            raise ValidationError("Diagram is not functorial: two chains between the same endpoints disagree")

    def _maps_from(self, x: Hashable) -> Tuple[Dict[Hashable, Matrix], bool]:
        P = self.poset
        maps = {x: Matrix.identity(self.ring, self.ranks[x])}
        consistent = True
        incoming: Dict[Hashable, List[Hashable]] = {}
        for z, y in self.transitions:
            incoming.setdefault(y, []).append(z)
        for y in P.linear_extension():
            if y == x or not P.leq(x, y):
                continue
            value = None
            for z in incoming.get(y, []):
                if z not in maps:
                    continue
                candidate = self.transitions[(z, y)] @ maps[z]
                if value is None:
                    value = candidate
                elif candidate != value:
                    consistent = False
            maps[y] = value
        return maps, consistent

    def verify_functoriality(self) -> bool:
        for x in self.poset.elements:
            maps, consistent = self._maps_from(x)
            if not consistent:
                logger.debug(f"Chains out of {x} disagree")
                return False
            self._cache[x] = maps
        return True

    def map_between(self, x: Hashable, y: Hashable) -> Matrix:
        if not self.poset.leq(x, y):
            raise ValidationError(f"{x} is not below {y}")
        if x not in self._cache:
            self._cache[x] = self._maps_from(x)[0]
        return self._cache[x][y]

    def to_json(self) -> Dict:
        def label(x):
            return list(x) if isinstance(x, tuple) else x

        return {
            "ring": self.ring.to_json(),
            "ranks": [[label(x), r] for x, r in self.ranks.items()],
            "transitions": [[label(x), label(y), m.tolist()] for (x, y), m in self.transitions.items()],
        }


def _unit(r: int, i: int, length: int = 1) -> Tuple[int, ...]:
    return tuple(length if j == i else 0 for j in range(r))


def direct_sum_cube(ring: RingSpec, ranks: Sequence[int]) -> ModuleDiagram:
    """S -> (+)_{i in S} R^{ranks[i]} on [1]^r with the summand inclusions"""
    r = len(ranks)
    P = FinPoset.cube(1, r)

    def offsets(x):
        out, pos = {}, 0
        for i in support(x):
            out[i] = pos
            pos += ranks[i]
        return out, pos

    dims = {x: offsets(x)[1] for x in P.elements}
    transitions = {}
    for x, y in P.covering_relations():
        ox, _ = offsets(x)
        oy, _ = offsets(y)
        data = [[0] * dims[x] for _ in range(dims[y])]
        for i, start in ox.items():
            for t in range(ranks[i]):
                data[oy[i] + t][start + t] = 1
        transitions[(x, y)] = Matrix(ring, dims[y], dims[x], data)
    return ModuleDiagram(ring, P, dims, transitions)


def random_cube_diagram(rng: random.Random, ring: RingSpec, a: int, r: int, max_rank: int = 2,
                        corner: Optional[Tuple[int, ...]] = None, corner_rank: int = 1) -> ModuleDiagram:
    """
    D(x) = (+)_i V_i(x_i) for random chains V_i along the axes, plus R^corner_rank
    on the upper set of corner (identity maps inside it). Strongly cocartesian
    exactly when corner is None or has at most one nonzero coordinate.
    """
    P = FinPoset.cube(a, r)
    chain_ranks = [[rng.randint(0, max_rank) for _ in range(a + 1)] for _ in range(r)]
    chain_maps = [[random_matrix(rng, ring, chain_ranks[i][t + 1], chain_ranks[i][t]) for t in range(a)]
                  for i in range(r)]

    def in_corner(x):
        return corner is not None and all(s >= c for s, c in zip(x, corner))

    def rank(x):
        return sum(chain_ranks[i][x[i]] for i in range(r)) + (corner_rank if in_corner(x) else 0)

    ranks = {x: rank(x) for x in P.elements}
    transitions = {}
    for x, y in P.covering_relations():
        axis = next(i for i in range(r) if x[i] != y[i])
        rows = [chain_ranks[i][y[i]] for i in range(r)] + [corner_rank if in_corner(y) else 0]
        cols = [chain_ranks[i][x[i]] for i in range(r)] + [corner_rank if in_corner(x) else 0]
        blocks = {}
        for i in range(r):
            blocks[(i, i)] = chain_maps[i][x[i]] if i == axis else Matrix.identity(ring, rows[i])
        if rows[r] and cols[r]:
            blocks[(r, r)] = Matrix.identity(ring, corner_rank)
        transitions[(x, y)] = block_matrix(ring, rows, cols, blocks)
    return ModuleDiagram(ring, P, ranks, transitions)


# Strongly cocartesian cubes


def _total_is_acyclic(ring: RingSpec, top: int, middle: Sequence[Tuple[int, Matrix]], d2: Matrix) -> bool:
    """Acyclicity of [bottom --d2--> (+) middle --(m_i)--> top] in degrees 2, 1, 0"""
    mid_rank = sum(rank for rank, _ in middle)
    d1 = hstack(ring, top, *[m for _, m in middle]) if middle else Matrix.zeros(ring, top, 0)
    if d1.cols != mid_rank or d2.rows != mid_rank:
        raise ConventionError("Total complex blocks do not line up")
    C = ChainComplex(ring, 0, [top, mid_rank, d2.cols], {1: d1, 2: d2})
    return is_acyclic(C)


def _require_cube(D: ModuleDiagram) -> Tuple[int, int]:
    if D.poset.cube_shape is None:
        raise ValidationError("Strongly cocartesian checks need a diagram on a cube [a]^r")
    if not D.ring.is_pid:
        raise UnsupportedError(f"Cocartesian checks need Z or a prime field, got {D.ring.name}")
    return D.poset.cube_shape


def square_check(D: ModuleDiagram) -> bool:
    """
    Every side-length-one square A -> B, C -> E is a pushout: A -> B + C -> E is short exact.

    Exactness at B + C and at E says the comparison coker(A -> B + C) -> E
    is an isomorphism. Exactness at A asks in addition that A -> B + C be
    injective, which is what a homotopy pushout of free modules needs:
    otherwise its kernel survives in degree 1 of the total complex.
    """
    a, r = _require_cube(D)
    ring = D.ring
    for x in itertools.product(range(a + 1), repeat=r):
        for i, j in itertools.combinations(range(r), 2):
            if x[i] == a or x[j] == a:
                continue
            b = tuple(c + (k == i) for k, c in enumerate(x))
            c = tuple(v + (k == j) for k, v in enumerate(x))
            e = tuple(v + (k in (i, j)) for k, v in enumerate(x))
            f_b, f_c = D.map_between(x, b), D.map_between(x, c)
            d2 = block_matrix(ring, [D.ranks[b], D.ranks[c]], [D.ranks[x]], {(0, 0): f_b, (1, 0): -f_c})
            middle = [(D.ranks[b], D.map_between(b, e)), (D.ranks[c], D.map_between(c, e))]
            if not _total_is_acyclic(ring, D.ranks[e], middle, d2):
                logger.debug(f"Square at {x} in directions {i}, {j} is not a pushout")
                return False
    return True


def kan_extension_check(D: ModuleDiagram) -> bool:
    """
    D is left Kan extended from the axes: at every x with k >= 2 nonzero
    coordinates, the homotopy colimit of the star D(0) -> D(x_i e_i) maps
    quasi-isomorphically to D(x).
    """
    a, r = _require_cube(D)
    ring = D.ring
    origin = tuple([0] * r)
    for x in D.poset.elements:
        axes = support(x)
        if len(axes) < 2:
            continue
        arms = [_unit(r, i, x[i]) for i in axes]
        to_arm = [D.map_between(origin, y) for y in arms]
        blocks = {}
        for e in range(1, len(arms)):
            blocks[(0, e - 1)] = to_arm[0]
            blocks[(e, e - 1)] = -to_arm[e]
        d2 = block_matrix(ring, [D.ranks[y] for y in arms], [D.ranks[origin]] * (len(arms) - 1), blocks)
        middle = [(D.ranks[y], D.map_between(y, x)) for y in arms]
        if not _total_is_acyclic(ring, D.ranks[x], middle, d2):
            logger.debug(f"Kan extension condition fails at {x}")
            return False
    return True


def is_strongly_cocartesian(D: ModuleDiagram) -> bool:
    return square_check(D)


# Span morphisms


Vector = Tuple[int, ...]


@dataclass(frozen=True)
class SpanMorphism:
    """
    The class of a span source <-p- W -i-> target with i split injective and
    p split surjective. Stored canonically: inclusion lists the image of i
    as RREF rows (vectors of the target) and projection lists p of those
    same basis vectors (vectors of the source).
    """

    source: int
    target: int
    modulus: int
    inclusion: Tuple[Vector, ...]
    projection: Tuple[Vector, ...]

    @property
    def middle_rank(self) -> int:
        return len(self.inclusion)

    def i_matrix(self, target_rank: int) -> Matrix:
        return Matrix.from_columns(RingSpec.mod(self.modulus), self.inclusion, target_rank)

    def p_matrix(self, source_rank: int) -> Matrix:
        return Matrix.from_columns(RingSpec.mod(self.modulus), self.projection, source_rank)

    def to_json(self) -> Dict:
        return {
            "source": self.source,
            "target": self.target,
            "inclusion": [list(v) for v in self.inclusion],
            "projection": [list(v) for v in self.projection],
        }


def _rref_pairs(rows: List[List[int]], pivot_width: int, p: int) -> List[List[int]]:
    """Row reduce over F_p choosing pivots only among the first pivot_width columns"""
    rows = [[x % p for x in row] for row in rows]
    out = []
    col = 0
    while rows and col < pivot_width:
        pivot = next((row for row in rows if row[col]), None)
        if pivot is None:
            col += 1
            continue
        rows.remove(pivot)
        inv = pow(pivot[col], -1, p)
        pivot = [(v * inv) % p for v in pivot]
        rows = [[(v - row[col] * w) % p for v, w in zip(row, pivot)] for row in rows]
        out = [[(v - row[col] * w) % p for v, w in zip(row, pivot)] for row in out]
        out.append(pivot)
        col += 1
    if any(any(row[:pivot_width]) for row in rows):
        raise ConventionError("Row reduction left a nonzero row")
    return out


def _nullspace(rows: List[List[int]], ncols: int, p: int) -> List[List[int]]:
    """Basis of {z : rows z = 0} over F_p"""
    reduced = _rref_pairs(rows, ncols, p) if rows else []
    pivots = [next(j for j, v in enumerate(row) if v) for row in reduced]
    basis = []
    for free in range(ncols):
        if free in pivots:
            continue
        z = [0] * ncols
        z[free] = 1
        for row, c in zip(reduced, pivots):
            z[c] = (-row[free]) % p
        basis.append(z)
    return basis


def canonical_span(source: int, target: int, p: int, target_rank: int,
                   pairs: Sequence[Tuple[Vector, Vector]]) -> SpanMorphism:
    """Bring (w_k in target, p(w_k) in source) pairs to RREF on the target side"""
    rows = [list(w) + list(v) for w, v in pairs]
    reduced = _rref_pairs(rows, target_rank, p)
    return SpanMorphism(source, target, p,
                        tuple(tuple(row[:target_rank]) for row in reduced),
                        tuple(tuple(row[target_rank:]) for row in reduced))


def identity_span(index: int, rank: int, p: int) -> SpanMorphism:
    basis = tuple(tuple(int(i == j) for j in range(rank)) for i in range(rank))
    return SpanMorphism(index, index, p, basis, basis)


def compose_spans(g: SpanMorphism, f: SpanMorphism, ranks: Sequence[int]) -> SpanMorphism:
    """
    g after f by pullback: the new middle is {w in W_g : p_g(w) in i_f(W_f)},
    read off from the kernel of [p_g | -i_f].
    """
    if f.target != g.source:
        raise ValidationError(f"Cannot compose: {f.target} != {g.source}")
    p = f.modulus
    mid_rank = ranks[f.target]
    k_g, k_f = g.middle_rank, f.middle_rank
    rows = [[g.projection[c][i] for c in range(k_g)] + [-f.inclusion[c][i] for c in range(k_f)]
            for i in range(mid_rank)]
    pairs = []
    for z in _nullspace(rows, k_g + k_f, p):
        cz, dz = z[:k_g], z[k_g:]
        w = tuple(sum(c * g.inclusion[t][i] for t, c in enumerate(cz)) % p for i in range(ranks[g.target]))
        v = tuple(sum(d * f.projection[t][i] for t, d in enumerate(dz)) % p for i in range(ranks[f.source]))
        pairs.append((w, v))
    return canonical_span(f.source, g.target, p, ranks[g.target], pairs)


# Hom-set enumeration


def _form_tables(F: UnimodularForm) -> Tuple[List[Vector], Dict[Vector, Vector], Dict[Vector, Any]]:
    p = F.ring.modulus
    vectors = list(itertools.product(range(p), repeat=F.rank))
    Bv = {v: F.gram.apply(v) for v in vectors}
    q = {v: eval_q(F, v) for v in vectors}
    return vectors, Bv, q


def _isometric_projections(F: UnimodularForm, gram_w: Matrix, q_w: Sequence[Any]) -> Iterator[List[Vector]]:
    """Every x_1..x_k in F with b_F(x_i, x_j) = gram_w[i, j], q_F(x_i) = q_w[i], spanning F"""
    p = F.ring.modulus
    k = len(q_w)
    vectors, Bv, q = _form_tables(F)

    def b(u, v):
        return sum(s * t for s, t in zip(u, Bv[v])) % p

    chosen: List[Vector] = []

    def extend(j: int) -> Iterator[List[Vector]]:
        if j == k:
            if F.rank == 0 or Matrix.from_columns(F.ring, chosen, F.rank).rank() == F.rank:
                yield list(chosen)
            return
        for x in vectors:
            if q[x] != q_w[j] or b(x, x) != gram_w[j, j] % p:
                continue
            if any(b(chosen[i], x) != gram_w[i, j] % p or b(x, chosen[i]) != gram_w[j, i] % p for i in range(j)):
                continue
            chosen.append(x)
            yield from extend(j + 1)
            chosen.pop()

    yield from extend(0)


def span_is_admissible(F: UnimodularForm, G: UnimodularForm, m: SpanMorphism) -> bool:
    """
    Condition (1): i*q_G = p*q_F on W. Condition (2): b_G(i(-), -) maps ker(p)
    isomorphically onto the annihilator of i(W), the dual of coker(i).
    """
    ring = G.ring
    k = m.middle_rank
    I = m.i_matrix(G.rank)
    P = m.p_matrix(F.rank)
    if k and I.rank() != k:
        return False
    if F.rank and P.rank() != F.rank:
        return False
    if I.T @ G.gram @ I != P.T @ F.gram @ P:
        return False
    if any(eval_q(G, w) != eval_q(F, v) for w, v in zip(m.inclusion, m.projection)):
        return False
    if not k:
        return G.rank == 0
    kernel = P.kernel_basis() if F.rank else Matrix.identity(ring, k)
    K = I @ kernel
    if K.cols != G.rank - k:
        return False
    pairing = K.T @ G.gram
    if K.cols and pairing.rank() != K.cols:
        return False
    return (pairing @ I).is_zero() and all(eval_q(G, K.col(c)) == G.param.q_zero() for c in range(K.cols))


def hermitian_homs(args: Tuple[int, int, UnimodularForm, UnimodularForm]) -> List[SpanMorphism]:
    """All span classes from F to G; W has rank (rank F + rank G) / 2 over a field"""
    s, t, F, G = args
    p = G.ring.modulus
    r, r2 = F.rank, G.rank
    if r > r2 or (r + r2) % 2:
        return []
    k = (r + r2) // 2
    out = []
    for basis in rref_subspaces(p, r2, k):
        I = Matrix.from_columns(G.ring, basis, r2)
        gram_w = I.T @ G.gram @ I
        q_w = [eval_q(G, w) for w in basis]
        for images in _isometric_projections(F, gram_w, q_w):
            out.append(SpanMorphism(s, t, p, tuple(basis), tuple(images)))
    return out


def split_exact_homs(args: Tuple[int, int, int, int, int]) -> List[SpanMorphism]:
    """All classes of spans R^m <<- W >-> R^m2 of free modules over F_p"""
    s, t, m, m2, p = args
    out = []
    vectors = list(itertools.product(range(p), repeat=m))
    ring = RingSpec.mod(p)
    for k in range(m, m2 + 1):
        for basis in rref_subspaces(p, m2, k):
            for images in itertools.product(vectors, repeat=k):
                if m and Matrix.from_columns(ring, images, m).rank() != m:
                    continue
                out.append(SpanMorphism(s, t, p, tuple(basis), tuple(images)))
    return out


# Finite categories


class FinCategory:
    """
    Objects are indices with labels and payloads; hom-sets are duplicate-free
    lists of SpanMorphism values. The composition table is filled on demand
    and every composite is checked to land in the enumerated hom-set.
    """

    def __init__(self, name: str, labels: Sequence[str], payloads: Sequence[Any], ranks: Sequence[int],
                 homs: Dict[Tuple[int, int], List[SpanMorphism]], modulus: int):
        self.name = name
        self.labels = tuple(labels)
        self.payloads = tuple(payloads)
        self.ranks = tuple(ranks)
        self.modulus = modulus
        self.homs = {key: list(value) for key, value in homs.items() if value}
        self._position: Dict[SpanMorphism, int] = {}
        for key, morphisms in self.homs.items():
            for pos, m in enumerate(morphisms):
                if m in self._position:
                    raise ConventionError(f"Duplicate morphism in Hom{key}")
                self._position[m] = pos
        self._table: Dict[Tuple[SpanMorphism, SpanMorphism], SpanMorphism] = {}

    @property
    def objects(self) -> range:
        return range(len(self.labels))

    def hom(self, a: int, b: int) -> List[SpanMorphism]:
        return self.homs.get((a, b), [])

    def morphism_count(self) -> int:
        return sum(len(v) for v in self.homs.values())

    def identity(self, a: int) -> SpanMorphism:
        return identity_span(a, self.ranks[a], self.modulus)

    def compose(self, g: SpanMorphism, f: SpanMorphism) -> SpanMorphism:
        key = (g, f)
        if key not in self._table:
            h = compose_spans(g, f, self.ranks)
            if h not in self._position or (h.source, h.target) not in self.homs:
                raise ConventionError(f"Composite {self.labels[f.source]} -> {self.labels[g.target]} "
                                      f"is not an enumerated morphism")
            self._table[key] = h
        return self._table[key]

    def verify_laws(self, triple_limit: Optional[int] = None, seed: int = 0) -> Dict[str, int]:
        """
        Unitality for every morphism and associativity for composable triples.
        Triples are checked exhaustively up to triple_limit, beyond that on a
        seeded sample of that size.
        """
        limit = triple_limit if triple_limit is not None else config.QCAT_LAW_TRIPLE_LIMIT
        for (a, b), morphisms in self.homs.items():
            for f in morphisms:
                if self.compose(self.identity(b), f) != f or self.compose(f, self.identity(a)) != f:
                    raise ConventionError(f"Unit law fails for a morphism {self.labels[a]} -> {self.labels[b]}")
        chains = [(a, b, c, d) for a, b, c, d in itertools.product(self.objects, repeat=4)
                  if (a, b) in self.homs and (b, c) in self.homs and (c, d) in self.homs]
        total = sum(len(self.homs[(a, b)]) * len(self.homs[(b, c)]) * len(self.homs[(c, d)])
                    for a, b, c, d in chains)
        exhaustive = total <= limit

        def triples():
            if exhaustive:
                for a, b, c, d in chains:
                    yield from itertools.product(self.homs[(a, b)], self.homs[(b, c)], self.homs[(c, d)])
                return
            rng = random.Random(seed)
            weights = [len(self.homs[(a, b)]) * len(self.homs[(b, c)]) * len(self.homs[(c, d)])
                       for a, b, c, d in chains]
            for a, b, c, d in rng.choices(chains, weights=weights, k=limit):
                yield (rng.choice(self.homs[(a, b)]), rng.choice(self.homs[(b, c)]), rng.choice(self.homs[(c, d)]))

        checked = 0
        for f, g, h in triples():
            if self.compose(h, self.compose(g, f)) != self.compose(self.compose(h, g), f):
                raise ConventionError("Associativity fails")
            checked += 1
        mode = "exhaustive" if exhaustive else f"sampled from {total}"
        logger.info(f"{self.name}: category laws hold on {checked} triples ({mode})")
        return {"triples": checked, "total_triples": total, "exhaustive": int(exhaustive)}

    def components(self) -> List[List[str]]:
        return components(self)

    def to_json(self) -> Dict:
        return {
            "name": self.name,
            "objects": [
                {"label": label, "rank": rank,
                 "form": payload.to_json() if hasattr(payload, "to_json") else payload}
                for label, rank, payload in zip(self.labels, self.ranks, self.payloads)
            ],
            "hom_sizes": [[self.labels[a], self.labels[b], len(m)] for (a, b), m in sorted(self.homs.items())],
            "morphisms": self.morphism_count(),
            "components": components(self),
        }

    def to_dot(self) -> str:
        """Component quiver: one cluster per component, edges labelled by |Hom|"""
        lines = [f"digraph \"{self.name}\" {{", "  rankdir=LR;"]
        for n, comp in enumerate(components(self)):
            lines.append(f"  subgraph cluster_{n} {{")
            lines.append(f"    label=\"component {n}\";")
            for label in comp:
                lines.append(f"    \"{label}\";")
            lines.append("  }")
        for (a, b), morphisms in sorted(self.homs.items()):
            if a != b:
                lines.append(f"  \"{self.labels[a]}\" -> \"{self.labels[b]}\" [label=\"{len(morphisms)}\"];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def discrete(cls, labels: Sequence[str], modulus: int = 2) -> "FinCategory":
        """Only identities; every object of rank 0"""
        homs = {(i, i): [identity_span(i, 0, modulus)] for i in range(len(labels))}
        return cls("discrete", labels, [None] * len(labels), [0] * len(labels), homs, modulus)


def components(C: FinCategory) -> List[List[str]]:
    """Connected components under the symmetrized Hom-nonempty relation"""
    parent = list(C.objects)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in C.homs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: Dict[int, List[str]] = {}
    for x in C.objects:
        groups.setdefault(find(x), []).append(C.labels[x])
    return [groups[k] for k in sorted(groups)]


def _collect(tasks: List, worker: Callable, jobs: int) -> List[List[SpanMorphism]]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [worker(t) for t in tasks]


def _require_cap(ring: RingSpec, rank_cap: Optional[int]) -> int:
    limit = config.qcat_cap_for(ring.modulus)
    cap = rank_cap if rank_cap is not None else limit
    if cap < 0:
        raise ValidationError(f"Rank cap must be non-negative, got {cap}")
    if cap > limit:
        raise CapExceededError(f"Q-construction rank cap {cap} exceeds the limit {limit} for {ring.name}")
    return cap


def build_hermitian_Q(param: FormParameter, rank_cap: Optional[int] = None, jobs: int = 1,
                      check_laws: bool = True, seed: int = 0) -> FinCategory:
    """
    Objects: isometry classes of unimodular forms of rank <= rank_cap.
    Morphisms F -> G: span classes F <-p- W -i-> G with i*q_G = p*q_F and
    ker(p) paired isomorphically with coker(i).
    """
    require_prime_field(param, "build_hermitian_Q")
    cap = _require_cap(param.ring, rank_cap)
    classes = enumerate_classes(param, cap, jobs)
    forms = [c.form for r in sorted(classes) for c in classes[r]]
    labels = [f"r{r}#{i}" for r in sorted(classes) for i in range(len(classes[r]))]
    tasks = [(s, t, forms[s], forms[t]) for s in range(len(forms)) for t in range(len(forms))]
    results = _collect(tasks, hermitian_homs, jobs)
    homs = {(s, t): found for (s, t, _, _), found in zip(tasks, results)}
    for (s, t), found in homs.items():
        for m in found:
            if not span_is_admissible(forms[s], forms[t], m):
                raise ConventionError(f"Enumerated span {labels[s]} -> {labels[t]} is not admissible")
    C = FinCategory(f"Q({param.name}, rank <= {cap})", labels, forms, [F.rank for F in forms], homs,
                    param.ring.modulus)
    logger.info(f"{C.name}: {len(forms)} objects, {C.morphism_count()} morphisms, "
                f"{len(components(C))} components")
    if check_laws:
        C.verify_laws(seed=seed)
    return C


def quillen_Q(ring: RingSpec, rank_cap: Optional[int] = None, jobs: int = 1, check_laws: bool = True,
              seed: int = 0) -> FinCategory:
    """Split-exact Q-construction on F_p^0, .., F_p^cap"""
    if not ring.is_field:
        raise UnsupportedError(f"quillen_Q is only supported over prime fields, got {ring.name}")
    cap = _require_cap(ring, rank_cap)
    p = ring.modulus
    ranks = list(range(cap + 1))
    labels = [f"R^{m}" for m in ranks]
    tasks = [(s, t, ranks[s], ranks[t], p) for s in ranks for t in ranks if s <= t]
    results = _collect(tasks, split_exact_homs, jobs)
    homs = {(s, t): found for (s, t, _, _, _), found in zip(tasks, results)}
    C = FinCategory(f"Q(free {ring.name}-modules, rank <= {cap})", labels, ranks, ranks, homs, p)
    logger.info(f"{C.name}: {len(ranks)} objects, {C.morphism_count()} morphisms")
    if check_laws:
        C.verify_laws(seed=seed)
    return C


def export_category(C: FinCategory, json_path: Optional[str] = None, dot_path: Optional[str] = None) -> None:
    if json_path:
        with open(json_path, "w") as f:
            json.dump(C.to_json(), f, indent=2)
        logger.info(f"Wrote {json_path}")
    if dot_path:
        with open(dot_path, "w") as f:
            f.write(C.to_dot())
        logger.info(f"Wrote {dot_path}")
