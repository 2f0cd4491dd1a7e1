#!/usr/bin/env python3
"""
Exact linear algebra over Z, Z/n and F_p

Everything downstream (forms, chain complexes, surgery, the hermitian
Q-construction) is built on the three types defined here:

- RingSpec: the ground ring, either the integers or Z/n
- Matrix: an immutable dense matrix with canonical entries
- SmithDecomposition: A = U * D * V with D in Smith normal form

No floating point is used anywhere. Integers are Python ints, so coefficient
growth during elimination is never truncated.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from errors import UnsupportedError, ValidationError

logger = logging.getLogger(__name__)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class RingSpec(BaseModel):
    """The ground ring: modulus 0 means Z, modulus n >= 2 means Z/n"""

    model_config = ConfigDict(frozen=True)

    modulus: int = Field(default=0, description="0 for the integers, n >= 2 for Z/n")

    @field_validator("modulus")
    @classmethod
    def _check_modulus(cls, value: int) -> int:
        if value != 0 and value < 2:
            raise ValueError(f"modulus must be 0 (integers) or >= 2, got {value}")
        return value

    # Constructors

    @classmethod
    def integers(cls) -> "RingSpec":
        return cls(modulus=0)

    @classmethod
    def mod(cls, n: int) -> "RingSpec":
        return cls(modulus=n)

    @classmethod
    def parse(cls, text) -> "RingSpec":
        """
        Parse a ring name: "Z", "F3", "Z/4", "Zmod4", or the JSON forms
        "Z" and {"Zmod": n}
        """
        if isinstance(text, dict):
            if set(text) != {"Zmod"}:
                raise ValidationError(f"Unknown ring object: {text}")
            return cls(modulus=int(text["Zmod"]))
        if isinstance(text, RingSpec):
            return text
        name = str(text).strip()
        try:
            if name in ("Z", "ZZ"):
                return cls.integers()
            if name.startswith("F"):
                p = int(name[1:])
                if not _is_prime(p):
                    raise ValidationError(f"F{p}: {p} is not prime")
                return cls(modulus=p)
            if name.startswith("Z/"):
                return cls(modulus=int(name[2:]))
            if name.startswith("Zmod"):
                return cls(modulus=int(name[4:]))
        except ValueError as e:
            raise ValidationError(f"Cannot parse ring '{name}': {e}")
        raise ValidationError(f"Cannot parse ring '{name}'")

    # Properties

    @property
    def is_integers(self) -> bool:
        return self.modulus == 0

    @property
    def is_finite(self) -> bool:
        return self.modulus != 0

    @property
    def is_field(self) -> bool:
        return _is_prime(self.modulus)

    @property
    def is_pid(self) -> bool:
        """Z or a prime field: the rings where Smith theory gives structure"""
        return self.is_integers or self.is_field

    @property
    def name(self) -> str:
        if self.is_integers:
            return "Z"
        if self.is_field:
            return f"F{self.modulus}"
        return f"Z/{self.modulus}"

    def to_json(self):
        return "Z" if self.is_integers else {"Zmod": self.modulus}

    # Element arithmetic

    def canon(self, x: int) -> int:
        return x % self.modulus if self.modulus else x

    def is_unit(self, x: int) -> bool:
        if self.modulus:
            return math.gcd(x % self.modulus, self.modulus) == 1
        return x in (1, -1)

    def inverse(self, x: int) -> int:
        if not self.is_unit(x):
            raise ValidationError(f"{x} is not a unit in {self.name}")
        if self.modulus:
            return pow(x % self.modulus, -1, self.modulus)
        return x

    def elements(self) -> range:
        if not self.modulus:
            raise UnsupportedError("Z has infinitely many elements")
        return range(self.modulus)

    def units(self) -> List[int]:
        return [x for x in self.elements() if self.is_unit(x)]

    def __str__(self) -> str:
        return self.name


ZZ = RingSpec.integers()


class Matrix:
    """
    Immutable dense matrix over a RingSpec.

    Entries are stored row-major as a tuple of row tuples and are always
    canonical (reduced into [0, n) over Z/n).
    """

    __slots__ = ("ring", "rows", "cols", "_data", "_hash")

    def __init__(self, ring: RingSpec, rows: int, cols: int, data: Iterable[Iterable[int]] = ()):
        self.ring = ring
        self.rows = rows
        self.cols = cols
        mod = ring.modulus
        if mod:
            table = tuple(tuple(int(x) % mod for x in row) for row in data)
        else:
            table = tuple(tuple(int(x) for x in row) for row in data)
        if not table and rows:
            table = tuple((0,) * cols for _ in range(rows))
        if len(table) != rows or any(len(row) != cols for row in table):
            raise ValidationError(f"Matrix data does not have shape {rows}x{cols}")
        self._data = table
        self._hash = None

    # Constructors

    @classmethod
    def from_rows(cls, ring: RingSpec, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "Matrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(ring, len(rows), cols, rows)

    @classmethod
    def zeros(cls, ring: RingSpec, rows: int, cols: int) -> "Matrix":
        return cls(ring, rows, cols, [[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, ring: RingSpec, n: int) -> "Matrix":
        return cls(ring, n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, ring: RingSpec, values: Sequence[int]) -> "Matrix":
        n = len(values)
        return cls(ring, n, n, [[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def column(cls, ring: RingSpec, values: Sequence[int]) -> "Matrix":
        return cls(ring, len(values), 1, [[v] for v in values])

    @classmethod
    def from_columns(cls, ring: RingSpec, columns: Sequence[Sequence[int]], rows: int) -> "Matrix":
        return cls(ring, rows, len(columns), [[c[i] for c in columns] for i in range(rows)])

    # Access

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self._data[i][j]

    def row(self, i: int) -> Tuple[int, ...]:
        return self._data[i]

    def col(self, j: int) -> Tuple[int, ...]:
        return tuple(row[j] for row in self._data)

    def tolist(self) -> List[List[int]]:
        return [list(row) for row in self._data]

    def flat(self) -> Tuple[int, ...]:
        return tuple(x for row in self._data for x in row)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(x == 0 for row in self._data for x in row)

    # Equality and hashing

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.ring == other.ring and self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring.modulus, self.rows, self.cols, self._data))
        return self._hash

    def __repr__(self) -> str:
        return f"Matrix({self.ring.name}, {self.rows}x{self.cols}, {self.tolist()})"

    # Arithmetic

    def _check_ring(self, other: "Matrix") -> None:
        if self.ring != other.ring:
            raise ValidationError(f"Ring mismatch: {self.ring.name} vs {other.ring.name}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_ring(other)
        if self.shape != other.shape:
            raise ValidationError(f"Shape mismatch in addition: {self.shape} vs {other.shape}")
        return Matrix(self.ring, self.rows, self.cols,
                      [[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_ring(other)
        if self.shape != other.shape:
            raise ValidationError(f"Shape mismatch in subtraction: {self.shape} vs {other.shape}")
        return Matrix(self.ring, self.rows, self.cols,
                      [[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __neg__(self) -> "Matrix":
        return self.scale(-1)

    def scale(self, c: int) -> "Matrix":
        return Matrix(self.ring, self.rows, self.cols, [[c * a for a in r] for r in self._data])

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check_ring(other)
        if self.cols != other.rows:
            raise ValidationError(f"Shape mismatch in product: {self.shape} @ {other.shape}")
        other_cols = list(zip(*other._data)) if other.rows else [()] * other.cols
        out = [[sum(a * b for a, b in zip(r, c)) for c in other_cols] for r in self._data]
        return Matrix(self.ring, self.rows, other.cols, out)

    @property
    def T(self) -> "Matrix":
        if not self.rows:
            return Matrix.zeros(self.ring, self.cols, 0)
        return Matrix(self.ring, self.cols, self.rows, list(zip(*self._data)))

    def apply(self, vector: Sequence[int]) -> Tuple[int, ...]:
        """Matrix times a plain coordinate vector"""
        if len(vector) != self.cols:
            raise ValidationError(f"Vector of length {len(vector)} does not fit {self.shape}")
        return tuple(self.ring.canon(sum(a * b for a, b in zip(r, vector))) for r in self._data)

    # Block structure

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        return Matrix(self.ring, r1 - r0, c1 - c0, [row[c0:c1] for row in self._data[r0:r1]])

    def select_rows(self, indices: Sequence[int]) -> "Matrix":
        return Matrix(self.ring, len(indices), self.cols, [self._data[i] for i in indices])

    def select_cols(self, indices: Sequence[int]) -> "Matrix":
        return Matrix(self.ring, self.rows, len(indices), [[row[j] for j in indices] for row in self._data])

    def reduce(self, ring: RingSpec) -> "Matrix":
        """Reinterpret the integer entries in another ring (Z -> Z/n reduction)"""
        return Matrix(ring, self.rows, self.cols, self._data)

    def lift(self) -> "Matrix":
        """Lift canonical representatives to Z"""
        return Matrix(ZZ, self.rows, self.cols, self._data)

    # Structure queries

    def determinant(self) -> int:
        if not self.is_square:
            raise ValidationError("Determinant of a non-square matrix")
        ring = self.ring
        if ring.is_integers:
            return _bareiss_det(self.tolist())
        if ring.is_field:
            return _field_det(self.tolist(), ring.modulus)
        return _bareiss_det(self.tolist()) % ring.modulus

    def is_invertible(self) -> bool:
        return self.is_square and self.ring.is_unit(self.determinant())

    def inverse(self) -> "Matrix":
        if not self.is_invertible():
            raise ValidationError("Matrix is not invertible over " + self.ring.name)
        dec = snf(self)
        ring = self.ring
        d_inv = [ring.inverse(dec.D[i, i]) for i in range(self.rows)]
        return dec.V_inv @ Matrix.diagonal(ring, d_inv) @ dec.U_inv

    def rank(self) -> int:
        return snf(self).rank

    def kernel_basis(self) -> "Matrix":
        """Columns spanning the kernel, as a saturated basis over Z or F_p"""
        if not self.ring.is_pid:
            raise UnsupportedError(f"Kernels over {self.ring.name} need lifting to Z")
        dec = snf(self)
        keep = list(range(dec.rank, self.cols))
        return dec.V_inv.select_cols(keep)

    def to_json(self) -> Dict:
        return {"ring": self.ring.to_json(), "rows": self.rows, "cols": self.cols, "entries": self.tolist()}


def hstack(ring: RingSpec, rows: int, *blocks: Matrix) -> Matrix:
    data = [[] for _ in range(rows)]
    cols = 0
    for b in blocks:
        if b.rows != rows:
            raise ValidationError(f"hstack: block has {b.rows} rows, expected {rows}")
        cols += b.cols
        for i in range(rows):
            data[i].extend(b.row(i))
    return Matrix(ring, rows, cols, data)


def vstack(ring: RingSpec, cols: int, *blocks: Matrix) -> Matrix:
    data = []
    for b in blocks:
        if b.cols != cols:
            raise ValidationError(f"vstack: block has {b.cols} cols, expected {cols}")
        data.extend(b.tolist())
    return Matrix(ring, len(data), cols, data)


def block_matrix(ring: RingSpec, row_sizes: Sequence[int], col_sizes: Sequence[int],
                 blocks: Dict[Tuple[int, int], Matrix]) -> Matrix:
    """Assemble a block matrix; missing blocks are zero"""
    rows = sum(row_sizes)
    cols = sum(col_sizes)
    data = [[0] * cols for _ in range(rows)]
    r_off = list(itertools.accumulate([0] + list(row_sizes)))
    c_off = list(itertools.accumulate([0] + list(col_sizes)))
    for (bi, bj), m in blocks.items():
        if m.shape != (row_sizes[bi], col_sizes[bj]):
            raise ValidationError(f"Block ({bi},{bj}) has shape {m.shape}, expected "
                                  f"{(row_sizes[bi], col_sizes[bj])}")
        for i in range(m.rows):
            row = m.row(i)
            target = data[r_off[bi] + i]
            for j in range(m.cols):
                target[c_off[bj] + j] += row[j]
    return Matrix(ring, rows, cols, data)


def block_diag(ring: RingSpec, *blocks: Matrix) -> Matrix:
    return block_matrix(ring, [b.rows for b in blocks], [b.cols for b in blocks],
                        {(i, i): b for i, b in enumerate(blocks)})


def _bareiss_det(a: List[List[int]]) -> int:
    n = len(a)
    if n == 0:
        return 1
    a = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _field_det(a: List[List[int]], p: int) -> int:
    n = len(a)
    a = [[x % p for x in row] for row in a]
    det = 1
    for k in range(n):
        pivot = next((i for i in range(k, n) if a[i][k]), None)
        if pivot is None:
            return 0
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            det = -det
        det = det * a[k][k] % p
        inv = pow(a[k][k], -1, p)
        for i in range(k + 1, n):
            c = a[i][k] * inv % p
            if c:
                a[i] = [(x - c * y) % p for x, y in zip(a[i], a[k])]
    return det % p


@dataclass(frozen=True)
class SmithDecomposition:
    """A = U * D * V with U, V invertible and D diagonal, d1 | d2 | ..."""

    U: Matrix
    D: Matrix
    V: Matrix
    U_inv: Matrix
    V_inv: Matrix

    @property
    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self.D[i, i] for i in range(min(self.D.rows, self.D.cols)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    def invariant_factors(self) -> Tuple[int, ...]:
        return tuple(d for d in self.diagonal if d != 0)


class _Tracker:
    """
    Mutable working state for elimination: keeps L * A0 * R = A together with
    L^-1 and R^-1 so the decomposition comes out without any inversion.
    """

    def __init__(self, a: List[List[int]], m: int, n: int, mod: int):
        self.a = a
        self.mod = mod
        self.m, self.n = m, n
        self.L = [[int(i == j) for j in range(m)] for i in range(m)]
        self.Linv = [[int(i == j) for j in range(m)] for i in range(m)]
        self.R = [[int(i == j) for j in range(n)] for i in range(n)]
        self.Rinv = [[int(i == j) for j in range(n)] for i in range(n)]

    def _norm(self, x: int) -> int:
        return x % self.mod if self.mod else x

    # row i += c * row j
    def add_row(self, i: int, j: int, c: int) -> None:
        if not c:
            return
        a, L, Linv = self.a, self.L, self.Linv
        a[i] = [self._norm(x + c * y) for x, y in zip(a[i], a[j])]
        L[i] = [self._norm(x + c * y) for x, y in zip(L[i], L[j])]
        for row in Linv:
            row[j] = self._norm(row[j] - c * row[i])

    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        self.a[i], self.a[j] = self.a[j], self.a[i]
        self.L[i], self.L[j] = self.L[j], self.L[i]
        for row in self.Linv:
            row[i], row[j] = row[j], row[i]

    def scale_row(self, i: int, c: int, c_inv: int) -> None:
        self.a[i] = [self._norm(c * x) for x in self.a[i]]
        self.L[i] = [self._norm(c * x) for x in self.L[i]]
        for row in self.Linv:
            row[i] = self._norm(row[i] * c_inv)

    # col j += c * col i
    def add_col(self, j: int, i: int, c: int) -> None:
        if not c:
            return
        for row in self.a:
            row[j] = self._norm(row[j] + c * row[i])
        for row in self.R:
            row[j] = self._norm(row[j] + c * row[i])
        Rinv = self.Rinv
        Rinv[i] = [self._norm(x - c * y) for x, y in zip(Rinv[i], Rinv[j])]

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for row in self.a:
            row[i], row[j] = row[j], row[i]
        for row in self.R:
            row[i], row[j] = row[j], row[i]
        self.Rinv[i], self.Rinv[j] = self.Rinv[j], self.Rinv[i]

    def pivot_key(self, x: int) -> int:
        return abs(x)

    def find_pivot(self, t: int) -> Optional[Tuple[int, int]]:
        best = None
        for i in range(t, self.m):
            row = self.a[i]
            for j in range(t, self.n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        return None if best is None else (best[1], best[2])


def _snf_integers(tr: _Tracker) -> None:
    a = tr.a
    t = 0
    while t < min(tr.m, tr.n):
        pos = tr.find_pivot(t)
        if pos is None:
            break
        tr.swap_rows(t, pos[0])
        tr.swap_cols(t, pos[1])
        while True:
            dirty = False
            for i in range(t + 1, tr.m):
                if a[i][t]:
                    tr.add_row(i, t, -(a[i][t] // a[t][t]))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, tr.n):
                if a[t][j]:
                    tr.add_col(j, t, -(a[t][j] // a[t][t]))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                # bring the smallest remainder in row/column t to the pivot
                best = (abs(a[t][t]), t, t)
                for i in range(t + 1, tr.m):
                    if a[i][t] and abs(a[i][t]) < best[0]:
                        best = (abs(a[i][t]), i, t)
                for j in range(t + 1, tr.n):
                    if a[t][j] and abs(a[t][j]) < best[0]:
                        best = (abs(a[t][j]), t, j)
                tr.swap_rows(t, best[1])
                tr.swap_cols(t, best[2])
                continue
            bad = None
            for i in range(t + 1, tr.m):
                for j in range(t + 1, tr.n):
                    if a[i][j] % a[t][t]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            tr.add_row(t, bad, 1)
        if a[t][t] < 0:
            tr.scale_row(t, -1, -1)
        t += 1


def _snf_field(tr: _Tracker) -> None:
    p = tr.mod
    a = tr.a
    t = 0
    while t < min(tr.m, tr.n):
        pos = tr.find_pivot(t)
        if pos is None:
            break
        tr.swap_rows(t, pos[0])
        tr.swap_cols(t, pos[1])
        piv = a[t][t]
        inv = pow(piv, -1, p)
        tr.scale_row(t, inv, piv)
        for i in range(t + 1, tr.m):
            if a[i][t]:
                tr.add_row(i, t, -a[i][t])
        for j in range(t + 1, tr.n):
            if a[t][j]:
                tr.add_col(j, t, -a[t][j])
        t += 1


def snf(A: Matrix) -> SmithDecomposition:
    """
    Smith normal form A = U * D * V.

    Pivot choice is the smallest absolute value among the remaining nonzero
    entries, ties broken by row-major position, so results are deterministic.
    Over composite Z/n the computation runs over Z on lifted entries and is
    reduced afterwards.
    """
    ring = A.ring
    work_mod = ring.modulus if ring.is_field else 0
    tr = _Tracker(A.tolist(), A.rows, A.cols, work_mod)
    if ring.is_field:
        _snf_field(tr)
    else:
        _snf_integers(tr)
    m, n = A.rows, A.cols
    D = Matrix(ring, m, n, tr.a)
    return SmithDecomposition(
        U=Matrix(ring, m, m, tr.Linv),
        D=D,
        V=Matrix(ring, n, n, tr.Rinv),
        U_inv=Matrix(ring, m, m, tr.L),
        V_inv=Matrix(ring, n, n, tr.R),
    )


def solve(A: Matrix, b: Matrix) -> Optional[Matrix]:
    """
    Solve A * x = b exactly (b may carry several columns).

    Returns one solution or None when the system has no solution. Over
    composite Z/n the system is solved over Z with the modulus adjoined.
    """
    if A.ring != b.ring:
        raise ValidationError(f"solve: ring mismatch {A.ring.name} vs {b.ring.name}")
    if A.rows != b.rows:
        raise ValidationError(f"solve: A has {A.rows} rows but b has {b.rows}")
    ring = A.ring
    if ring.is_finite and not ring.is_field:
        n = ring.modulus
        lifted = hstack(ZZ, A.rows, A.lift(), Matrix.identity(ZZ, A.rows).scale(n))
        x = solve(lifted, b.lift())
        if x is None:
            return None
        return x.submatrix(0, A.cols, 0, b.cols).reduce(ring)
    dec = snf(A)
    c = dec.U_inv @ b
    diag = dec.diagonal
    y = [[0] * b.cols for _ in range(A.cols)]
    for i in range(A.rows):
        d = diag[i] if i < len(diag) else 0
        for k in range(b.cols):
            ci = c[i, k]
            if d == 0:
                if ci != 0:
                    return None
                continue
            if ring.is_field:
                y[i][k] = ci * pow(d, -1, ring.modulus)
            else:
                if ci % d:
                    return None
                y[i][k] = ci // d
    x = dec.V_inv @ Matrix(ring, A.cols, b.cols, y)
    if A @ x != b:
        raise ValidationError("solve: internal verification failed")
    return x


@dataclass(frozen=True)
class AbelianGroupPresentation:
    """
    A finitely generated module over Z (or a vector space over F_p):
    base^free_rank plus the cyclic factors Z/d for d in factors.

    projection/moduli, when present, map a vector of the presenting free
    module to invariant coordinates (one row per nontrivial summand, modulus 0
    for free summands). labels attaches names to selected elements.
    """

    free_rank: int
    factors: Tuple[int, ...] = ()
    base: str = "Z"
    projection: Tuple[Tuple[int, ...], ...] = ()
    moduli: Tuple[int, ...] = ()
    labels: Tuple[Tuple[str, Tuple[int, ...]], ...] = field(default=())

    def __post_init__(self):
        for a, b in zip(self.factors, self.factors[1:]):
            if b % a:
                raise ValidationError(f"Invariant factors {self.factors} do not form a divisibility chain")

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.factors

    @property
    def order(self) -> Optional[int]:
        """Group order, None when infinite"""
        if self.free_rank:
            return None
        return math.prod(self.factors)

    def coordinates(self, vector: Sequence[int]) -> Tuple[int, ...]:
        """Invariant coordinates of an element of the presenting free module"""
        out = []
        for row, d in zip(self.projection, self.moduli):
            v = sum(a * b for a, b in zip(row, vector))
            out.append(v % d if d else v)
        return tuple(out)

    def with_labels(self, labels: Dict[str, Tuple[int, ...]]) -> "AbelianGroupPresentation":
        return AbelianGroupPresentation(self.free_rank, self.factors, self.base, self.projection,
                                        self.moduli, tuple(sorted(labels.items())))

    def describe(self) -> str:
        if self.base != "Z":
            return "0" if self.free_rank == 0 else (self.base if self.free_rank == 1
                                                    else f"{self.base}^{self.free_rank}")
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.factors]
        return " (+) ".join(parts) if parts else "0"

    def to_json(self) -> Dict:
        return {
            "description": self.describe(),
            "free_rank": self.free_rank,
            "factors": list(self.factors),
            "base": self.base,
            "labels": {k: list(v) for k, v in self.labels},
        }

    def __str__(self) -> str:
        return self.describe()


def cokernel_presentation(A: Matrix) -> AbelianGroupPresentation:
    """
    Structure of coker(A: R^cols -> R^rows) over Z or a prime field.

    The coordinate map sends the standard basis of R^rows to invariant
    coordinates; unit invariant factors are dropped.
    """
    ring = A.ring
    if not ring.is_pid:
        raise UnsupportedError(f"Cokernel structure over {ring.name}: lift to Z first")
    dec = snf(A)
    diag = dec.diagonal
    projection = []
    moduli = []
    factors = []
    free = 0
    for i in range(A.rows):
        d = diag[i] if i < len(diag) else 0
        if d != 0 and ring.is_unit(d):
            continue
        if d == 0:
            free += 1
        else:
            factors.append(d)
        projection.append(dec.U_inv.row(i))
        moduli.append(d if not ring.is_field else 0)
    # order summands: torsion first (ascending), then free, matching describe()
    order = sorted(range(len(moduli)), key=lambda k: (moduli[k] == 0, moduli[k], k))
    projection = tuple(projection[k] for k in order)
    moduli = tuple(moduli[k] for k in order)
    if ring.is_field:
        return AbelianGroupPresentation(free, (), ring.name, projection, moduli)
    return AbelianGroupPresentation(free, tuple(sorted(factors)), "Z", projection, moduli)


def hermite_rows(A: Matrix) -> Matrix:
    """
    Row-style Hermite basis of the row lattice of an integer matrix:
    echelon form, positive pivots, entries above a pivot reduced mod it.
    Zero rows are dropped.
    """
    if not A.ring.is_integers:
        raise UnsupportedError("hermite_rows works over Z")
    a = A.tolist()
    m, n = A.rows, A.cols
    r = 0
    for j in range(n):
        while True:
            nz = [i for i in range(r, m) if a[i][j]]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(a[i][j]), i))
            a[r], a[piv] = a[piv], a[r]
            done = True
            for i in range(r + 1, m):
                if a[i][j]:
                    q = a[i][j] // a[r][j]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][j]:
                        done = False
            if done:
                break
        if r < m and a[r][j]:
            if a[r][j] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                q = a[i][j] // a[r][j]
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
            r += 1
        if r == m:
            break
    rows = [row for row in a[:r]]
    return Matrix(ZZ, len(rows), n, rows)


def row_reduce(A: Matrix) -> Matrix:
    """Reduced row echelon form over a prime field, zero rows dropped"""
    ring = A.ring
    if not ring.is_field:
        raise UnsupportedError("row_reduce needs a prime field")
    p = ring.modulus
    a = A.tolist()
    m, n = A.rows, A.cols
    r = 0
    for j in range(n):
        piv = next((i for i in range(r, m) if a[i][j]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][j], -1, p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(m):
            if i != r and a[i][j]:
                c = a[i][j]
                a[i] = [(x - c * y) % p for x, y in zip(a[i], a[r])]
        r += 1
        if r == m:
            break
    return Matrix(ring, r, n, a[:r])


def enumerate_vectors(ring: RingSpec, n: int) -> Iterator[Tuple[int, ...]]:
    """All vectors of (Z/m)^n in lexicographic order"""
    return itertools.product(ring.elements(), repeat=n)


def random_matrix(rng, ring: RingSpec, rows: int, cols: int, bound: int = 9) -> Matrix:
    if ring.is_finite:
        return Matrix(ring, rows, cols, [[rng.randrange(ring.modulus) for _ in range(cols)] for _ in range(rows)])
    return Matrix(ring, rows, cols, [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)])


def random_unimodular(rng, ring: RingSpec, n: int, steps: int = 6) -> Matrix:
    """A random invertible matrix built from elementary operations"""
    a = [[int(i == j) for j in range(n)] for i in range(n)]
    if n < 2:
        if n == 1 and ring.is_finite:
            a[0][0] = rng.choice(ring.units())
        elif n == 1 and rng.random() < 0.5:
            a[0][0] = -1
        return Matrix(ring, n, n, a)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-2, 2)
        a[i] = [x + c * y for x, y in zip(a[i], a[j])]
    if rng.random() < 0.5:
        i, j = rng.sample(range(n), 2)
        a[i], a[j] = a[j], a[i]
    return Matrix(ring, n, n, a)


def is_unit(ring: RingSpec, x: int) -> bool:
    return ring.is_unit(x)


def ring_inverse(ring: RingSpec, x: int) -> int:
    return ring.inverse(x)
