#!/usr/bin/env python3
"""
Bounded chain complexes of finitely generated free modules

Homological grading: d_k maps C_k to C_{k-1}. Sign conventions (shift, cone,
fiber, dual) are the ones listed in docs/SIGNS.md and every construction
here follows them.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from errors import ConventionError, UnsupportedError, ValidationError
from exactalg import (
    AbelianGroupPresentation,
    Matrix,
    RingSpec,
    block_matrix,
    cokernel_presentation,
    random_matrix,
    random_unimodular,
    snf,
    solve,
)

logger = logging.getLogger(__name__)


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


class ChainComplex:
    """
    C_lo <- ... <- C_hi with free modules of the given ranks.

    dim(k) and d(k) answer for every integer k; outside [lo, hi] the module
    is zero.
    """

    __slots__ = ("ring", "lo", "hi", "_dims", "_d")

    def __init__(self, ring: RingSpec, lo: int, dims: Sequence[int], differentials: Optional[Dict[int, Matrix]] = None):
        if not dims:
            dims = [0]
        if any(r < 0 for r in dims):
            raise ValidationError(f"Ranks must be non-negative, got {list(dims)}")
        self.ring = ring
        self.lo = lo
        self.hi = lo + len(dims) - 1
        self._dims = tuple(dims)
        self._d: Dict[int, Matrix] = {}
        differentials = differentials or {}
        for k in range(self.lo + 1, self.hi + 1):
            m = differentials.get(k)
            shape = (self.dim(k - 1), self.dim(k))
            if m is None:
                m = Matrix.zeros(ring, *shape)
            if m.ring != ring or m.shape != shape:
                raise ValidationError(f"d_{k} has shape {m.shape} over {m.ring.name}, expected {shape} over {ring.name}")
            self._d[k] = m
        for k in differentials:
            if not self.lo < k <= self.hi and not differentials[k].is_zero():
                raise ValidationError(f"Nonzero differential d_{k} outside degrees [{self.lo}, {self.hi}]")
        for k in range(self.lo + 2, self.hi + 1):
            if not (self._d[k - 1] @ self._d[k]).is_zero():
                raise ValidationError(f"d_{k - 1} d_{k} != 0")

    # Constructors

    @classmethod
    def zero(cls, ring: RingSpec) -> "ChainComplex":
        return cls(ring, 0, [0])

    @classmethod
    def concentrated(cls, ring: RingSpec, degree: int, rank: int) -> "ChainComplex":
        return cls(ring, degree, [rank])

    @classmethod
    def from_maps(cls, ring: RingSpec, lo: int, differentials: Sequence[Matrix]) -> "ChainComplex":
        """Complex C_lo <- C_{lo+1} <- ... from the list d_{lo+1}, d_{lo+2}, ..."""
        if not differentials:
            raise ValidationError("from_maps needs at least one differential")
        dims = [differentials[0].rows] + [m.cols for m in differentials]
        return cls(ring, lo, dims, {lo + 1 + i: m for i, m in enumerate(differentials)})

    # Access

    def dim(self, k: int) -> int:
        if self.lo <= k <= self.hi:
            return self._dims[k - self.lo]
        return 0

    def d(self, k: int) -> Matrix:
        if k in self._d:
            return self._d[k]
        return Matrix.zeros(self.ring, self.dim(k - 1), self.dim(k))

    @property
    def dims(self) -> Tuple[int, ...]:
        return self._dims

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def support(self) -> List[int]:
        return [k for k in self.degrees() if self.dim(k)]

    def total_rank(self) -> int:
        return sum(self._dims)

    def euler_characteristic(self) -> int:
        return sum(_sign(k) * self.dim(k) for k in self.degrees())

    def compact(self) -> "ChainComplex":
        """Same complex with the degree range shrunk to its support"""
        sup = self.support()
        if not sup:
            return ChainComplex.zero(self.ring)
        lo, hi = sup[0], sup[-1]
        return ChainComplex(self.ring, lo, [self.dim(k) for k in range(lo, hi + 1)],
                            {k: self.d(k) for k in range(lo + 1, hi + 1)})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainComplex):
            return NotImplemented
        a, b = self.compact(), other.compact()
        return (a.ring == b.ring and a.lo == b.lo and a.dims == b.dims
                and all(a.d(k) == b.d(k) for k in range(a.lo + 1, a.hi + 1)))

    def __hash__(self) -> int:
        c = self.compact()
        return hash((c.ring.modulus, c.lo, c.dims))

    def __repr__(self) -> str:
        return f"ChainComplex({self.ring.name}, lo={self.lo}, dims={list(self._dims)})"

    def to_json(self) -> Dict:
        return {
            "ring": self.ring.to_json(),
            "lo": self.lo,
            "hi": self.hi,
            "dims": list(self._dims),
            "differentials": [self.d(k).tolist() for k in range(self.lo + 1, self.hi + 1)],
        }

    @classmethod
    def from_json(cls, data: Dict) -> "ChainComplex":
        try:
            ring = RingSpec.parse(data["ring"])
            lo = int(data["lo"])
            dims = [int(r) for r in data["dims"]]
            if "hi" in data and int(data["hi"]) != lo + len(dims) - 1:
                raise ValidationError("hi does not match lo and dims")
            diffs = {}
            for i, entries in enumerate(data.get("differentials", [])):
                k = lo + 1 + i
                if isinstance(entries, dict):
                    entries = entries["entries"]
                rows, cols = dims[k - 1 - lo], dims[k - lo]
                diffs[k] = Matrix(ring, rows, cols, entries if rows else [])
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise ValidationError(f"Malformed complex JSON: {e}")
        return cls(ring, lo, dims, diffs)


def direct_sum(*complexes: ChainComplex) -> ChainComplex:
    ring = complexes[0].ring
    lo = min(c.lo for c in complexes)
    hi = max(c.hi for c in complexes)
    dims = [sum(c.dim(k) for c in complexes) for k in range(lo, hi + 1)]
    diffs = {}
    for k in range(lo + 1, hi + 1):
        diffs[k] = block_matrix(ring, [c.dim(k - 1) for c in complexes], [c.dim(k) for c in complexes],
                                {(i, i): c.d(k) for i, c in enumerate(complexes)})
    return ChainComplex(ring, lo, dims, diffs)


def shift(C: ChainComplex, s: int) -> ChainComplex:
    """shift(C, s)_k = C_{k-s} with differential (-1)^s d"""
    sign = _sign(s)
    return ChainComplex(C.ring, C.lo + s, list(C.dims),
                        {k + s: C.d(k).scale(sign) for k in range(C.lo + 1, C.hi + 1)})


def dual(C: ChainComplex, n: int) -> ChainComplex:
    """dual(C, n)_r = Hom(C_{n-r}, R) with differential (-1)^r d_{n-r+1}^T"""
    lo = n - C.hi
    hi = n - C.lo
    dims = [C.dim(n - r) for r in range(lo, hi + 1)]
    return ChainComplex(C.ring, lo, dims,
                        {r: C.d(n - r + 1).T.scale(_sign(r)) for r in range(lo + 1, hi + 1)})


class ChainMap:
    """Degreewise matrices f_k: C_k -> D_k commuting with the differentials"""

    __slots__ = ("source", "target", "_f")

    def __init__(self, source: ChainComplex, target: ChainComplex, components: Dict[int, Matrix], check: bool = True):
        if source.ring != target.ring:
            raise ValidationError("Chain map between complexes over different rings")
        self.source = source
        self.target = target
        self._f: Dict[int, Matrix] = {}
        for k, m in components.items():
            shape = (target.dim(k), source.dim(k))
            if m.shape != shape:
                raise ValidationError(f"f_{k} has shape {m.shape}, expected {shape}")
            if shape[0] and shape[1]:
                self._f[k] = m
        if check and not self.commutes():
            raise ValidationError("Map does not commute with the differentials")

    def f(self, k: int) -> Matrix:
        if k in self._f:
            return self._f[k]
        return Matrix.zeros(self.source.ring, self.target.dim(k), self.source.dim(k))

    def degrees(self) -> range:
        return range(min(self.source.lo, self.target.lo), max(self.source.hi, self.target.hi) + 1)

    def commutes(self) -> bool:
        for k in range(min(self.source.lo, self.target.lo), max(self.source.hi, self.target.hi) + 2):
            if self.target.d(k) @ self.f(k) != self.f(k - 1) @ self.source.d(k):
                return False
        return True

    @classmethod
    def identity(cls, C: ChainComplex) -> "ChainMap":
        return cls(C, C, {k: Matrix.identity(C.ring, C.dim(k)) for k in C.degrees()}, check=False)

    @classmethod
    def zero(cls, C: ChainComplex, D: ChainComplex) -> "ChainMap":
        return cls(C, D, {}, check=False)

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        """self after other"""
        if other.target.compact() != self.source.compact():
            raise ValidationError("Composing chain maps with mismatched complexes")
        degrees = set(self._f) & set(other._f)
        return ChainMap(other.source, self.target, {k: self.f(k) @ other.f(k) for k in degrees}, check=False)

    def _combine(self, other: "ChainMap", sign: int) -> "ChainMap":
        degrees = set(self._f) | set(other._f)
        return ChainMap(self.source, self.target,
                        {k: self.f(k) + other.f(k).scale(sign) for k in degrees}, check=False)

    def __add__(self, other: "ChainMap") -> "ChainMap":
        return self._combine(other, 1)

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        return self._combine(other, -1)

    def is_quasi_isomorphism(self) -> bool:
        return is_acyclic(cone(self))

    def to_json(self) -> Dict:
        return {str(k): m.tolist() for k, m in sorted(self._f.items())}


class Homotopy:
    """h_k: C_k -> D_{k+1} with f - g = d h + h d"""

    __slots__ = ("f", "g", "_h")

    def __init__(self, f: ChainMap, g: ChainMap, components: Dict[int, Matrix]):
        self.f = f
        self.g = g
        self._h = {}
        for k, m in components.items():
            shape = (f.target.dim(k + 1), f.source.dim(k))
            if m.shape != shape:
                raise ValidationError(f"h_{k} has shape {m.shape}, expected {shape}")
            if shape[0] and shape[1]:
                self._h[k] = m

    def h(self, k: int) -> Matrix:
        if k in self._h:
            return self._h[k]
        return Matrix.zeros(self.f.source.ring, self.f.target.dim(k + 1), self.f.source.dim(k))

    def verify(self) -> bool:
        C, D = self.f.source, self.f.target
        for k in range(min(C.lo, D.lo), max(C.hi, D.hi) + 1):
            lhs = self.f.f(k) - self.g.f(k)
            rhs = D.d(k + 1) @ self.h(k) + self.h(k - 1) @ C.d(k)
            if lhs != rhs:
                return False
        return True


def solve_homotopy(f: ChainMap, g: ChainMap) -> Optional[Homotopy]:
    """
    A homotopy h with f - g = d h + h d, solved as one linear system over
    the ring. None when f and g are not chain homotopic.
    """
    C, D = f.source, f.target
    ring = C.ring
    index: Dict[int, int] = {}
    count = 0
    for k in C.degrees():
        index[k] = count
        count += D.dim(k + 1) * C.dim(k)

    def var(k: int, i: int, j: int) -> int:
        return index[k] + i * C.dim(k) + j

    equations: List[Dict[int, int]] = []
    rhs: List[int] = []
    for k in range(min(C.lo, D.lo), max(C.hi, D.hi) + 1):
        target = f.f(k) - g.f(k)
        dD, dC = D.d(k + 1), C.d(k)
        for a in range(D.dim(k)):
            for b in range(C.dim(k)):
                row: Dict[int, int] = {}
                if k in index:
                    for c in range(D.dim(k + 1)):
                        if dD[a, c]:
                            v = var(k, c, b)
                            row[v] = row.get(v, 0) + dD[a, c]
                if k - 1 in index:
                    for c in range(C.dim(k - 1)):
                        if dC[c, b]:
                            v = var(k - 1, a, c)
                            row[v] = row.get(v, 0) + dC[c, b]
                equations.append(row)
                rhs.append(target[a, b])

    if not equations or not count:
        if any(ring.canon(b) for b in rhs):
            return None
        return Homotopy(f, g, {})
    A = Matrix(ring, len(equations), count, [[row.get(v, 0) for v in range(count)] for row in equations])
    x = solve(A, Matrix.column(ring, rhs))
    if x is None:
        return None
    values = x.col(0)
    components = {}
    for k, start in index.items():
        rows, cols = D.dim(k + 1), C.dim(k)
        components[k] = Matrix(ring, rows, cols, [values[start + i * cols:start + (i + 1) * cols]
                                                  for i in range(rows)])
    h = Homotopy(f, g, components)
    if not h.verify():
        raise ConventionError("Solved homotopy does not verify")
    return h


@dataclass
class HomotopyEquivalence:
    """f: C -> D and g: D -> C with gf - 1 = dh + hd and fg - 1 = dh' + h'd"""

    f: ChainMap
    g: ChainMap
    h: Dict[int, Matrix]
    h_prime: Dict[int, Matrix]

    @property
    def source(self) -> ChainComplex:
        return self.f.source

    @property
    def target(self) -> ChainComplex:
        return self.f.target

    def verify(self) -> bool:
        if not (self.f.commutes() and self.g.commutes()):
            return False
        C, D = self.source, self.target
        back = Homotopy(self.g @ self.f, ChainMap.identity(C), self.h)
        forth = Homotopy(self.f @ self.g, ChainMap.identity(D), self.h_prime)
        return back.verify() and forth.verify()

    @classmethod
    def isomorphism(cls, f: ChainMap, g: ChainMap) -> "HomotopyEquivalence":
        return cls(f, g, {}, {})

    def then(self, other: "HomotopyEquivalence") -> "HomotopyEquivalence":
        """
        Composite C -> D -> E: h = g1 h2 f1 + h1 and h' = f2 h1' g2 + h2'.
        """
        f1, g1, f2, g2 = self.f, self.g, other.f, other.g
        C, E = self.source, other.target
        h = {}
        for k in C.degrees():
            m = self.h.get(k, Matrix.zeros(C.ring, C.dim(k + 1), C.dim(k)))
            if k in other.h:
                m = m + g1.f(k + 1) @ other.h[k] @ f1.f(k)
            h[k] = m
        h_prime = {}
        for k in E.degrees():
            m = other.h_prime.get(k, Matrix.zeros(E.ring, E.dim(k + 1), E.dim(k)))
            if k in self.h_prime:
                m = m + f2.f(k + 1) @ self.h_prime[k] @ g2.f(k)
            h_prime[k] = m
        return HomotopyEquivalence(other.f @ f1, g1 @ other.g, h, h_prime)


def require_pid(C: ChainComplex, what: str) -> None:
    if not C.ring.is_pid:
        raise UnsupportedError(f"{what} needs Z or a prime field, got {C.ring.name}")


def _kernel_and_relations(C: ChainComplex, k: int) -> Tuple[Matrix, Matrix, Matrix]:
    """(kernel basis K, kernel-coordinate map, relation matrix) of H_k"""
    dec = snf(C.d(k))
    r = dec.rank
    m = C.dim(k)
    keep = list(range(r, m))
    K = dec.V_inv.select_cols(keep)
    coords = dec.V.select_rows(keep)
    R = coords @ C.d(k + 1)
    return K, coords, R


def homology(C: ChainComplex, k: int) -> AbelianGroupPresentation:
    """H_k(C) = ker d_k / im d_{k+1}"""
    require_pid(C, "homology")
    _, _, R = _kernel_and_relations(C, k)
    if R.rows == 0:
        return AbelianGroupPresentation(0, (), "Z" if C.ring.is_integers else C.ring.name)
    return cokernel_presentation(R)


def homology_all(C: ChainComplex) -> Dict[int, AbelianGroupPresentation]:
    return {k: homology(C, k) for k in C.degrees()}


def homology_generators(C: ChainComplex, k: int) -> List[Tuple[int, Tuple[int, ...]]]:
    """
    Cycle representatives of the nontrivial cyclic summands of H_k as
    (order, cycle) pairs, order 0 meaning infinite. Torsion summands come
    first by ascending order, then free ones, ties by index.
    """
    require_pid(C, "homology_generators")
    K, _, R = _kernel_and_relations(C, k)
    if R.rows == 0:
        return []
    dec = snf(R)
    diag = dec.diagonal
    ring = C.ring
    found = []
    for i in range(R.rows):
        d = diag[i] if i < len(diag) else 0
        if d and ring.is_unit(d):
            continue
        order = 0 if (d == 0 or ring.is_field) else d
        cycle = K @ dec.U.select_cols([i])
        found.append((order == 0, order, i, cycle.col(0)))
    found.sort(key=lambda t: (t[0], t[1], t[2]))
    return [(order, cycle) for _, order, _, cycle in found]


def is_acyclic(C: ChainComplex) -> bool:
    return all(homology(C, k).is_trivial for k in C.degrees())


def cone(f: ChainMap) -> ChainComplex:
    """cone(f)_k = D_k + C_{k-1} with d = [[d_D, f], [0, -d_C]]"""
    C, D = f.source, f.target
    ring = C.ring
    lo = min(D.lo, C.lo + 1)
    hi = max(D.hi, C.hi + 1)
    dims = [D.dim(k) + C.dim(k - 1) for k in range(lo, hi + 1)]
    diffs = {}
    for k in range(lo + 1, hi + 1):
        diffs[k] = block_matrix(ring, [D.dim(k - 1), C.dim(k - 2)], [D.dim(k), C.dim(k - 1)], {
            (0, 0): D.d(k),
            (0, 1): f.f(k - 1),
            (1, 1): C.d(k - 1).scale(-1),
        })
    return ChainComplex(ring, lo, dims, diffs)


def fiber(f: ChainMap) -> ChainComplex:
    return shift(cone(f), -1)


def dual_map(f: ChainMap, n: int) -> ChainMap:
    """dual(f)_r = f_{n-r}^T : dual(D, n) -> dual(C, n)"""
    dC, dD = dual(f.source, n), dual(f.target, n)
    return ChainMap(dD, dC, {r: f.f(n - r).T for r in dD.degrees()}, check=False)


def dual_dual_iso(C: ChainComplex, n: int) -> ChainMap:
    """C -> dual(dual(C, n), n), multiplication by (-1)^{(n+1) r} in degree r"""
    DD = dual(dual(C, n), n)
    return ChainMap(C, DD, {r: Matrix.identity(C.ring, C.dim(r)).scale(_sign((n + 1) * r)) for r in C.degrees()})


# Weight structure


def weight_connective(C: ChainComplex, a: int) -> bool:
    """Weight >= a: H_k(C) = 0 for every k < a"""
    require_pid(C, "weight_connective")
    return all(homology(C, k).is_trivial for k in C.degrees() if k < a)


def weight_coconnective(C: ChainComplex, b: int) -> bool:
    """Weight <= b: H_k(dual(C, 0)) = 0 for every k < -b"""
    require_pid(C, "weight_coconnective")
    D = dual(C, 0)
    return all(homology(D, k).is_trivial for k in D.degrees() if k < -b)


def in_heart(C: ChainComplex, a: int = 0) -> bool:
    return weight_connective(C, a) and weight_coconnective(C, a)


# Trimming


class _TrimState:
    """Current complex together with the equivalence data from the input"""

    def __init__(self, C: ChainComplex):
        self.ring = C.ring
        self.source = C
        self.lo, self.hi = C.lo, C.hi
        self.dims = {k: C.dim(k) for k in C.degrees()}
        self.d = {k: C.d(k) for k in range(C.lo + 1, C.hi + 1)}
        self.f = {k: Matrix.identity(C.ring, C.dim(k)) for k in C.degrees()}
        self.g = {k: Matrix.identity(C.ring, C.dim(k)) for k in C.degrees()}
        self.h: Dict[int, Matrix] = {}

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def diff(self, k: int) -> Matrix:
        return self.d.get(k, Matrix.zeros(self.ring, self.dim(k - 1), self.dim(k)))

    def change_basis(self, k: int, P: Matrix, P_inv: Matrix) -> None:
        """New basis of C_k: coordinates x -> P x"""
        if k + 1 in self.d:
            self.d[k + 1] = P @ self.d[k + 1]
        if k in self.d:
            self.d[k] = self.d[k] @ P_inv
        self.f[k] = P @ self.f[k]
        self.g[k] = self.g[k] @ P_inv

    def eliminate(self, k: int, r: int) -> None:
        """
        Cancel the invertible top-left r x r block u of d_k, writing
        C_{k-1} = A + B and C_k = X + Y with |A| = |X| = r.
        """
        ring = self.ring
        dk = self.diff(k)
        a, x = self.dim(k - 1), self.dim(k)
        u = dk.submatrix(0, r, 0, r)
        beta = dk.submatrix(0, r, r, x)
        alpha = dk.submatrix(r, a, 0, r)
        delta = dk.submatrix(r, a, r, x)
        u_inv = u.inverse()
        # f_{k-1} = [-alpha u^-1, I], f_k = [0, I]
        f_km1 = block_matrix(ring, [a - r], [r, a - r], {
            (0, 0): (alpha @ u_inv).scale(-1),
            (0, 1): Matrix.identity(ring, a - r),
        })
        f_k = block_matrix(ring, [x - r], [r, x - r], {(0, 1): Matrix.identity(ring, x - r)})
        # g_{k-1} = [0; I], g_k = [-u^-1 beta; I]
        g_km1 = block_matrix(ring, [r, a - r], [a - r], {(1, 0): Matrix.identity(ring, a - r)})
        g_k = block_matrix(ring, [r, x - r], [x - r], {
            (0, 0): (u_inv @ beta).scale(-1),
            (1, 0): Matrix.identity(ring, x - r),
        })
        # h_{k-1} = [[-u^-1, 0], [0, 0]] : C_{k-1} -> C_k
        h_km1 = block_matrix(ring, [r, x - r], [r, a - r], {(0, 0): u_inv.scale(-1)})

        src = self.source
        new_h = self.g[k] @ h_km1 @ self.f[k - 1]
        self.h[k - 1] = self.h.get(k - 1, Matrix.zeros(ring, src.dim(k), src.dim(k - 1))) + new_h

        if k + 1 in self.d:
            self.d[k + 1] = f_k @ self.d[k + 1]
        if k - 1 in self.d:
            self.d[k - 1] = self.d[k - 1] @ g_km1
        self.d[k] = delta - alpha @ u_inv @ beta
        self.f[k - 1] = f_km1 @ self.f[k - 1]
        self.f[k] = f_k @ self.f[k]
        self.g[k - 1] = self.g[k - 1] @ g_km1
        self.g[k] = self.g[k] @ g_k
        self.dims[k - 1] = a - r
        self.dims[k] = x - r

    def result(self) -> Tuple[ChainComplex, HomotopyEquivalence]:
        C = self.source
        T = ChainComplex(self.ring, self.lo, [self.dim(k) for k in range(self.lo, self.hi + 1)], self.d).compact()
        f = ChainMap(C, T, self.f)
        g = ChainMap(T, C, self.g)
        h = {k: m for k, m in self.h.items()}
        return T, HomotopyEquivalence(f, g, h, {})


def trim(C: ChainComplex) -> Tuple[ChainComplex, HomotopyEquivalence]:
    """
    Split off contractible pieces: sweep the degrees from the bottom, put
    each d_k in Smith form by a change of basis and cancel its unit pivots.
    The result is homotopy equivalent to C with verified equivalence data;
    its nonzero degrees are the homology support of C, plus the degree above
    each torsion group over Z.
    """
    require_pid(C, "trim")
    state = _TrimState(C)
    for k in range(C.lo + 1, C.hi + 1):
        dk = state.diff(k)
        if dk.rows == 0 or dk.cols == 0:
            continue
        dec = snf(dk)
        state.change_basis(k - 1, dec.U_inv, dec.U)
        state.change_basis(k, dec.V, dec.V_inv)
        units = sum(1 for d in dec.diagonal if d and C.ring.is_unit(d))
        if units:
            state.eliminate(k, units)
    T, eq = state.result()
    if not eq.verify():
        raise ConventionError("trim produced equivalence data that does not verify")
    logger.debug(f"Trimmed {C!r} to {T!r}")
    return T, eq


def random_complex(rng, ring: RingSpec, width: int = 3, max_rank: int = 2, lo: int = 0) -> ChainComplex:
    """
    A random complex over degrees lo..lo+width-1: a sum of random elementary
    pieces (R in one degree, R --a--> R across two degrees) in a random basis.
    """
    dims = [0] * width
    pieces = []
    for k in range(width):
        for _ in range(rng.randint(0, max_rank)):
            if k + 1 < width and rng.random() < 0.5:
                a = rng.randrange(ring.modulus) if ring.is_finite else rng.choice([1, 1, 2, 3, -2, 0])
                pieces.append((k, a))
                dims[k] += 1
                dims[k + 1] += 1
            else:
                pieces.append((k, None))
                dims[k] += 1
    diffs = {k: [[0] * dims[k] for _ in range(dims[k - 1])] for k in range(1, width)}
    used = [0] * width
    for k, a in pieces:
        if a is None:
            used[k] += 1
        else:
            diffs[k + 1][used[k]][used[k + 1]] = a
            used[k] += 1
            used[k + 1] += 1
    C = ChainComplex(ring, lo, dims, {lo + k: Matrix(ring, dims[k - 1], dims[k], rows)
                                      for k, rows in diffs.items()})
    return random_automorphism(rng, C).target


def random_automorphism(rng, C: ChainComplex) -> HomotopyEquivalence:
    """An isomorphism C -> C' given by random invertible matrices per degree"""
    P = {k: random_unimodular(rng, C.ring, C.dim(k)) for k in C.degrees()}
    P_inv = {k: P[k].inverse() for k in C.degrees()}
    diffs = {k: P[k - 1] @ C.d(k) @ P_inv[k] for k in range(C.lo + 1, C.hi + 1)}
    T = ChainComplex(C.ring, C.lo, list(C.dims), diffs)
    return HomotopyEquivalence.isomorphism(ChainMap(C, T, P), ChainMap(T, C, P_inv))


def random_chain_map(rng, C: ChainComplex, D: ChainComplex) -> ChainMap:
    """A random null-homotopic chain map d h + h d"""
    ring = C.ring
    h = {k: random_matrix(rng, ring, D.dim(k + 1), C.dim(k), bound=2) for k in range(C.lo - 1, C.hi + 1)}
    comps = {}
    for k in C.degrees():
        m = D.d(k + 1) @ h[k]
        if k - 1 in h:
            m = m + h[k - 1] @ C.d(k)
        comps[k] = m
    return ChainMap(C, D, comps)
