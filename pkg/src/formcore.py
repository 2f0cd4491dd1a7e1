#!/usr/bin/env python3
"""
Form parameters and unimodular forms

A form parameter on M = R with involution sigma = epsilon * id is the data
(Q, tau, rho) together with the R-action on Q. Four flavors are supported:

- symmetric: Q = {m : epsilon*m = m}, rho = inclusion, tau(m) = m + epsilon*m
- quadratic: Q = R / (1 - epsilon)R, tau = projection, rho = (1 + epsilon)
- even:      Q = (1 + epsilon)R, rho = inclusion, tau(m) = m + epsilon*m
- general:   Q an explicit finite abelian group (finite rings only)

A unimodular form is (gram, qvals) on the standard basis of R^n: gram is the
bilinear part b, qvals are the values q(e_i). Everything else about q follows
from q(x + y) = q(x) + q(y) + tau(b(x, y)) and q(r x) = r.q(x).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from exactalg import (
    ZZ,
    Matrix,
    RingSpec,
    block_diag,
    snf,
)
from errors import UnsupportedError, ValidationError

logger = logging.getLogger(__name__)

FLAVORS = ("symmetric", "quadratic", "even", "general")


class FiniteQGroup:
    """
    A finite abelian group Z^g / (relation columns), with elements stored as
    tuples of invariant coordinates in Z/d_1 x ... x Z/d_k.
    """

    def __init__(self, relations: Sequence[Sequence[int]], generators: int):
        self.generators = generators
        cols = [list(c) for c in relations]
        rel = Matrix.from_columns(ZZ, cols, generators) if cols else Matrix.zeros(ZZ, generators, 0)
        dec = snf(rel)
        diag = dec.diagonal
        self.moduli: List[int] = []
        self._project: List[Tuple[int, ...]] = []
        self._lift: List[Tuple[int, ...]] = []
        for i in range(generators):
            d = diag[i] if i < len(diag) else 0
            if d == 0:
                raise ValidationError("General Q must be finite: relation matrix has free part")
            if d == 1:
                continue
            self.moduli.append(d)
            self._project.append(dec.U_inv.row(i))
            self._lift.append(dec.U.col(i))

    @property
    def order(self) -> int:
        out = 1
        for d in self.moduli:
            out *= d
        return out

    def canon(self, vector: Sequence[int]) -> Tuple[int, ...]:
        """Invariant coordinates of an integer combination of the generators"""
        if len(vector) != self.generators:
            raise ValidationError(f"Q vector has length {len(vector)}, expected {self.generators}")
        return tuple(sum(a * b for a, b in zip(row, vector)) % d
                     for row, d in zip(self._project, self.moduli))

    def lift(self, element: Sequence[int]) -> Tuple[int, ...]:
        out = [0] * self.generators
        for c, col in zip(element, self._lift):
            for k in range(self.generators):
                out[k] += c * col[k]
        return tuple(out)

    def zero(self) -> Tuple[int, ...]:
        return tuple(0 for _ in self.moduli)

    def add(self, a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.moduli))

    def neg(self, a: Sequence[int]) -> Tuple[int, ...]:
        return tuple((-x) % d for x, d in zip(a, self.moduli))

    def scale(self, c: int, a: Sequence[int]) -> Tuple[int, ...]:
        return tuple((c * x) % d for x, d in zip(a, self.moduli))

    def elements(self) -> List[Tuple[int, ...]]:
        return list(itertools.product(*[range(d) for d in self.moduli]))


@dataclass(frozen=True)
class GeneralQData:
    """
    Raw description of a general Q-module for M = R over a finite ring.

    relations: columns of the relation matrix of Q on `generators` generators
    tau_one: tau(1) as an integer combination of the generators
    rho: rho of each generator, an element of R
    action: for every r in R, the images r.g_k as integer combinations
    """

    generators: int
    relations: Tuple[Tuple[int, ...], ...]
    tau_one: Tuple[int, ...]
    rho: Tuple[int, ...]
    action: Tuple[Tuple[int, Tuple[Tuple[int, ...], ...]], ...]

    def to_json(self) -> Dict:
        return {
            "generators": self.generators,
            "relations": [list(r) for r in self.relations],
            "tau_one": list(self.tau_one),
            "rho": list(self.rho),
            "action": {str(r): [list(v) for v in imgs] for r, imgs in self.action},
        }

    @classmethod
    def from_json(cls, data: Dict) -> "GeneralQData":
        try:
            return cls(
                generators=int(data["generators"]),
                relations=tuple(tuple(int(x) for x in r) for r in data.get("relations", [])),
                tau_one=tuple(int(x) for x in data["tau_one"]),
                rho=tuple(int(x) for x in data["rho"]),
                action=tuple(sorted((int(r), tuple(tuple(int(x) for x in v) for v in imgs))
                                    for r, imgs in data["action"].items())),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed general form parameter: {e}")


@dataclass(frozen=True)
class FormParameter:
    """The form parameter (Q, tau, rho) on M = R with involution epsilon * id"""

    ring: RingSpec
    epsilon: int = 1
    flavor: str = "symmetric"
    general: Optional[GeneralQData] = None
    _q: Optional[FiniteQGroup] = field(default=None, compare=False, hash=False, repr=False)
    _action: Dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValidationError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if self.flavor not in FLAVORS:
            raise ValidationError(f"Unknown flavor '{self.flavor}', expected one of {FLAVORS}")
        if self.flavor == "general":
            if self.general is None:
                raise ValidationError("General flavor needs Q data")
            if not self.ring.is_finite:
                raise UnsupportedError("General form parameters are only supported over finite rings")
            q = FiniteQGroup(self.general.relations, self.general.generators)
            object.__setattr__(self, "_q", q)
            table = {}
            for r, images in self.general.action:
                if len(images) != self.general.generators:
                    raise ValidationError(f"Action of {r} must give an image for every generator")
                table[self.ring.canon(r)] = images
            missing = [r for r in self.ring.elements() if r not in table]
            if missing:
                raise ValidationError(f"Action table misses ring elements {missing}")
            object.__setattr__(self, "_action", table)
            if len(self.general.rho) != self.general.generators:
                raise ValidationError("rho must be given on every generator")
        elif self.general is not None:
            raise ValidationError(f"Flavor '{self.flavor}' does not take general Q data")

    # Canonical flavors

    @classmethod
    def symmetric(cls, ring: RingSpec, epsilon: int = 1) -> "FormParameter":
        return cls(ring, epsilon, "symmetric")

    @classmethod
    def quadratic(cls, ring: RingSpec, epsilon: int = 1) -> "FormParameter":
        return cls(ring, epsilon, "quadratic")

    @classmethod
    def even(cls, ring: RingSpec, epsilon: int = 1) -> "FormParameter":
        return cls(ring, epsilon, "even")

    @property
    def name(self) -> str:
        sign = "+" if self.epsilon == 1 else "-"
        return f"{self.flavor}({sign}1) over {self.ring.name}"

    @property
    def _quad_modulus(self) -> int:
        """Modulus of Q = R/(1 - epsilon)R (0 means Q = Z)"""
        g = 1 - self.epsilon
        if self.ring.is_integers:
            return abs(g)
        return math.gcd(g, self.ring.modulus) if g else self.ring.modulus

    # Q-group operations

    def is_q_element(self, x) -> bool:
        ring = self.ring
        if self.flavor == "general":
            return (isinstance(x, tuple) and len(x) == len(self._q.moduli)
                    and all(0 <= c < d for c, d in zip(x, self._q.moduli)))
        if not isinstance(x, int):
            return False
        if self.flavor == "symmetric":
            return ring.canon(self.epsilon * x) == ring.canon(x)
        if self.flavor == "quadratic":
            return True
        # even: x in (1 + epsilon)R
        if self.epsilon == -1:
            return ring.canon(x) == 0
        if ring.is_integers:
            return x % 2 == 0
        return any(ring.canon(2 * r) == ring.canon(x) for r in ring.elements())

    def q_canon(self, x):
        """Validate and canonicalize a Q-element"""
        if self.flavor == "general":
            x = tuple(int(c) for c in x)
            if len(x) != len(self._q.moduli):
                raise ValidationError(f"Q-element {x} has wrong length for Q of order {self._q.order}")
            return tuple(c % d for c, d in zip(x, self._q.moduli))
        x = int(x)
        if self.flavor == "quadratic":
            m = self._quad_modulus
            return x % m if m else x
        if not self.is_q_element(x):
            raise ValidationError(f"{x} is not an element of Q for {self.name}")
        return self.ring.canon(x)

    def q_zero(self):
        return self._q.zero() if self.flavor == "general" else 0

    def q_add(self, a, b):
        if self.flavor == "general":
            return self._q.add(a, b)
        if self.flavor == "quadratic":
            m = self._quad_modulus
            return (a + b) % m if m else a + b
        return self.ring.canon(a + b)

    def q_neg(self, a):
        if self.flavor == "general":
            return self._q.neg(a)
        if self.flavor == "quadratic":
            m = self._quad_modulus
            return (-a) % m if m else -a
        return self.ring.canon(-a)

    def q_sub(self, a, b):
        return self.q_add(a, self.q_neg(b))

    def q_act(self, r: int, q):
        """The R-action r.q on Q"""
        if self.flavor == "general":
            images = self._action[self.ring.canon(r)]
            vec = [0] * self.general.generators
            for c, img in zip(self._q.lift(q), images):
                for k in range(len(vec)):
                    vec[k] += c * img[k]
            return self._q.canon(vec)
        if self.flavor == "quadratic":
            m = self._quad_modulus
            v = r * r * q
            return v % m if m else v
        return self.ring.canon(r * r * q)

    def tau(self, m: int):
        """tau: M_{C2} -> Q"""
        if self.flavor == "general":
            return self._q.scale(m, self._q.canon(self.general.tau_one))
        if self.flavor == "quadratic":
            qm = self._quad_modulus
            return m % qm if qm else m
        return self.ring.canon(m + self.epsilon * m)

    def rho(self, q) -> int:
        """rho: Q -> M^{C2}"""
        if self.flavor == "general":
            lifted = self._q.lift(q)
            return self.ring.canon(sum(c * r for c, r in zip(lifted, self.general.rho)))
        if self.flavor == "quadratic":
            return self.ring.canon((1 + self.epsilon) * q)
        return self.ring.canon(q)

    def rho_inverse(self, m: int):
        """The unique q with rho(q) = m when rho is injective, else None"""
        m = self.ring.canon(m)
        if self.flavor in ("symmetric", "even"):
            return self.q_canon(m) if self.is_q_element(m) else None
        if self.flavor == "quadratic":
            if self.ring.is_integers:
                if self.epsilon == -1:
                    return None
                return m // 2 if m % 2 == 0 else None
            hits = [q for q in self.q_elements() if self.rho(q) == m]
            return hits[0] if len(hits) == 1 else None
        hits = [q for q in self.q_elements() if self.rho(q) == m]
        return hits[0] if len(hits) == 1 else None

    def q_elements(self) -> List:
        if self.flavor == "general":
            return self._q.elements()
        if not self.ring.is_finite:
            if self.flavor == "quadratic" and self._quad_modulus:
                return list(range(self._quad_modulus))
            if self.flavor in ("symmetric", "even") and self.epsilon == -1:
                return [0]
            raise UnsupportedError(f"Q is infinite for {self.name}")
        if self.flavor == "quadratic":
            return list(range(self._quad_modulus))
        return sorted({self.ring.canon(x) for x in self.ring.elements() if self.is_q_element(x)})

    def q_to_json(self, q):
        return list(q) if self.flavor == "general" else q

    # Axioms

    def validate_axioms(self) -> None:
        """
        Check rho(tau(m)) = m + epsilon*m, C2-invariance of tau and rho, and
        (r+s).q - r.q - s.q = tau(r s rho(q)) together with the module laws.

        Finite rings are checked exhaustively. Over Z every identity is a
        polynomial of degree at most two in r and s and linear in q, so a
        handful of sample points per variable decides it.
        """
        ring = self.ring
        if ring.is_finite:
            rs = list(ring.elements())
            qs = self.q_elements()
        else:
            rs = [-1, 0, 1, 2]
            qs = [q for q in (0, 1, 2, -1) if self.is_q_element(q)]
        eps = self.epsilon
        for m in rs:
            if self.rho(self.tau(m)) != ring.canon(m + eps * m):
                raise ValidationError(f"{self.name}: rho(tau({m})) != norm({m})")
            if self.tau(m) != self.tau(ring.canon(eps * m)):
                raise ValidationError(f"{self.name}: tau is not C2-invariant at {m}")
        for q in qs:
            if ring.canon(eps * self.rho(q)) != self.rho(q):
                raise ValidationError(f"{self.name}: rho({q}) is not C2-invariant")
            if self.q_act(1, q) != q or self.q_act(0, q) != self.q_zero():
                raise ValidationError(f"{self.name}: unit or zero action fails at {q}")
            for r in rs:
                if self.rho(self.q_act(r, q)) != ring.canon(r * r * self.rho(q)):
                    raise ValidationError(f"{self.name}: rho is not equivariant at r={r}, q={q}")
                for s in rs:
                    lhs = self.q_sub(self.q_sub(self.q_act(r + s, q), self.q_act(r, q)), self.q_act(s, q))
                    rhs = self.tau(ring.canon(r * s * self.rho(q)))
                    if lhs != rhs:
                        raise ValidationError(f"{self.name}: quadratic action axiom fails at r={r}, s={s}, q={q}")
                    if self.q_act(r * s, q) != self.q_act(r, self.q_act(s, q)):
                        raise ValidationError(f"{self.name}: action is not associative at r={r}, s={s}")
                for q2 in qs:
                    if self.q_act(r, self.q_add(q, q2)) != self.q_add(self.q_act(r, q), self.q_act(r, q2)):
                        raise ValidationError(f"{self.name}: action is not additive at r={r}")
        for m in rs:
            for r in rs:
                if self.tau(ring.canon(r * r * m)) != self.q_act(r, self.tau(m)):
                    raise ValidationError(f"{self.name}: tau is not equivariant at r={r}, m={m}")
        if self.flavor == "general":
            for rel in self.general.relations:
                if ring.canon(sum(c * x for c, x in zip(rel, self.general.rho))) != 0:
                    raise ValidationError(f"{self.name}: rho does not vanish on relation {rel}")
        logger.debug(f"Form parameter axioms hold for {self.name}")

    def to_json(self) -> Dict:
        out = {"ring": self.ring.to_json(), "flavor": self.flavor, "epsilon": self.epsilon}
        if self.general is not None:
            out["general"] = self.general.to_json()
        return out


@dataclass(frozen=True)
class UnimodularForm:
    """A unimodular lambda-form (R^n, b, q) on the standard basis"""

    param: FormParameter
    gram: Matrix
    qvals: Tuple

    def __post_init__(self):
        p = self.param
        B = self.gram
        if B.ring != p.ring:
            raise ValidationError(f"Gram matrix over {B.ring.name} but parameter over {p.ring.name}")
        if not B.is_square:
            raise ValidationError(f"Gram matrix must be square, got {B.shape}")
        if len(self.qvals) != B.rows:
            raise ValidationError(f"Need {B.rows} q-values, got {len(self.qvals)}")
        qvals = tuple(p.q_canon(q) for q in self.qvals)
        object.__setattr__(self, "qvals", qvals)
        if B.T != B.scale(p.epsilon):
            raise ValidationError(f"Gram matrix is not {p.epsilon:+d}-symmetric")
        if B.rows and not B.is_invertible():
            raise ValidationError(f"Gram matrix is not unimodular over {p.ring.name} (det {B.determinant()})")
        for i, q in enumerate(qvals):
            if p.rho(q) != B[i, i]:
                raise ValidationError(f"rho(q_{i}) = {p.rho(q)} but b(e_{i}, e_{i}) = {B[i, i]}")

    @property
    def rank(self) -> int:
        return self.gram.rows

    @property
    def ring(self) -> RingSpec:
        return self.param.ring

    def b(self, x: Sequence[int], y: Sequence[int]) -> int:
        B = self.gram
        n = self.rank
        total = 0
        for i in range(n):
            if x[i]:
                row = B.row(i)
                total += x[i] * sum(row[j] * y[j] for j in range(n))
        return self.ring.canon(total)

    def to_json(self) -> Dict:
        out = self.param.to_json()
        out["gram"] = self.gram.tolist()
        out["q"] = [self.param.q_to_json(q) for q in self.qvals]
        return out

    def __str__(self) -> str:
        return f"form(rank {self.rank}, {self.param.name}, gram={self.gram.tolist()}, q={list(self.qvals)})"


@dataclass(frozen=True)
class Isometry:
    """U with U^T B_target U = B_source and q_target(U e_i) = q_source,i"""

    source: UnimodularForm
    target: UnimodularForm
    U: Matrix

    def __post_init__(self):
        if not self.verify():
            raise ValidationError("Isometry conditions do not hold")

    def verify(self) -> bool:
        s, t, U = self.source, self.target, self.U
        if s.param != t.param or U.shape != (t.rank, s.rank) or not U.is_invertible():
            return False
        if U.T @ t.gram @ U != s.gram:
            return False
        return all(eval_q(t, U.col(i)) == s.qvals[i] for i in range(s.rank))

    def to_json(self) -> Dict:
        return {"U": self.U.tolist()}


def eval_q(F: UnimodularForm, x: Sequence[int]):
    """q(sum x_i e_i) = sum x_i.q_i + sum_{i<j} tau(x_i x_j B_ij)"""
    if len(x) != F.rank:
        raise ValidationError(f"Vector of length {len(x)} for a form of rank {F.rank}")
    p = F.param
    ring = p.ring
    total = p.q_zero()
    B = F.gram
    for i, xi in enumerate(x):
        if not xi:
            continue
        total = p.q_add(total, p.q_act(xi, F.qvals[i]))
        row = B.row(i)
        cross = sum(row[j] * x[j] for j in range(i + 1, F.rank))
        if cross:
            total = p.q_add(total, p.tau(ring.canon(xi * cross)))
    return total


# Constructions


def make_form(param: FormParameter, gram: Sequence[Sequence[int]], qvals: Optional[Sequence] = None) -> UnimodularForm:
    """Build a form; q-values are derived from the diagonal when rho is injective"""
    B = Matrix.from_rows(param.ring, gram, cols=len(gram))
    if qvals is None:
        qvals = []
        for i in range(B.rows):
            q = param.rho_inverse(B[i, i])
            if q is None:
                raise ValidationError(f"q-values cannot be derived from the Gram matrix for {param.name}")
            qvals.append(q)
    return UnimodularForm(param, B, tuple(qvals))


from_gram = make_form


def zero_form(param: FormParameter) -> UnimodularForm:
    return UnimodularForm(param, Matrix.zeros(param.ring, 0, 0), ())


def diagonal(param: FormParameter, entries: Sequence[int]) -> UnimodularForm:
    n = len(entries)
    return make_form(param, [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])


def orthogonal_sum(F: UnimodularForm, G: UnimodularForm) -> UnimodularForm:
    if F.param != G.param:
        raise ValidationError(f"Orthogonal sum of forms over {F.param.name} and {G.param.name}")
    return UnimodularForm(F.param, block_diag(F.ring, F.gram, G.gram), F.qvals + G.qvals)


def hyperbolic(param: FormParameter, k: int) -> UnimodularForm:
    """Basis e_1, f_1, ..., e_k, f_k with b(e, f) = 1 and q = 0"""
    if k < 0:
        raise ValidationError("hyperbolic rank must be non-negative")
    n = 2 * k
    gram = [[0] * n for _ in range(n)]
    for i in range(k):
        gram[2 * i][2 * i + 1] = 1
        gram[2 * i + 1][2 * i] = param.epsilon
    return UnimodularForm(param, Matrix.from_rows(param.ring, gram, cols=n), tuple([param.q_zero()] * n))


def negate(F: UnimodularForm) -> UnimodularForm:
    p = F.param
    return UnimodularForm(p, -F.gram, tuple(p.q_neg(q) for q in F.qvals))


def transform(F: UnimodularForm, U: Matrix) -> UnimodularForm:
    """The form in the basis given by the columns of U (so U is an isometry to F)"""
    if not U.is_invertible():
        raise ValidationError("transform needs an invertible matrix")
    return UnimodularForm(F.param, U.T @ F.gram @ U, tuple(eval_q(F, U.col(i)) for i in range(U.cols)))


def permute(F: UnimodularForm, perm: Sequence[int]) -> UnimodularForm:
    """Reorder the basis: new e_i = old e_{perm[i]}"""
    n = F.rank
    if sorted(perm) != list(range(n)):
        raise ValidationError(f"{perm} is not a permutation of range({n})")
    U = Matrix.from_rows(F.ring, [[1 if perm[j] == i else 0 for j in range(n)] for i in range(n)], cols=n)
    return transform(F, U)


def restrict(F: UnimodularForm, basis: Matrix) -> UnimodularForm:
    """Restriction of F to a unimodular summand spanned by the columns of basis"""
    return UnimodularForm(F.param, basis.T @ F.gram @ basis,
                          tuple(eval_q(F, basis.col(i)) for i in range(basis.cols)))


E8_GRAM = (
    (2, -1, 0, 0, 0, 0, 0, 0),
    (-1, 2, -1, 0, 0, 0, 0, 0),
    (0, -1, 2, -1, 0, 0, 0, -1),
    (0, 0, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, 0),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, 0),
    (0, 0, -1, 0, 0, 0, 0, 2),
)


def e8(param: FormParameter) -> UnimodularForm:
    """The E8 lattice (positive definite, even, unimodular)"""
    if param.epsilon != 1:
        raise UnsupportedError("E8 needs epsilon = +1")
    return make_form(param, E8_GRAM)


# Invariants


def _require_integral_symmetric(F: UnimodularForm, what: str) -> None:
    if not F.ring.is_integers or F.param.epsilon != 1:
        raise UnsupportedError(f"{what} needs a form over Z with epsilon = +1, got {F.param.name}")


def rational_inertia(rows: Sequence[Sequence[int]]) -> Tuple[int, int]:
    """(n_plus, n_minus) of a symmetric rational matrix by congruence diagonalization"""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i != j and a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # e_i <- e_i + e_j makes the diagonal entry 2 a_ij
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        d = a[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            c = a[i][piv] / d
            if c:
                for k in range(n):
                    a[i][k] -= c * a[piv][k]
                for k in range(n):
                    a[k][i] -= c * a[k][piv]
    return pos, neg


def inertia(F: UnimodularForm) -> Tuple[int, int]:
    """(n_plus, n_minus) by exact congruence diagonalization over Q"""
    _require_integral_symmetric(F, "signature")
    return rational_inertia(F.gram.tolist())


def signature(F: UnimodularForm) -> int:
    pos, neg = inertia(F)
    return pos - neg


def positive_rank(F: UnimodularForm) -> int:
    return inertia(F)[0]


def parity(F: UnimodularForm) -> str:
    """'even' when every b(x, x) is even, else 'odd' (forms over Z)"""
    if not F.ring.is_integers:
        raise UnsupportedError("parity is defined for forms over Z")
    return "even" if all(F.gram[i, i] % 2 == 0 for i in range(F.rank)) else "odd"


def is_definite(F: UnimodularForm) -> bool:
    return abs(signature(F)) == F.rank


def discriminant_class(F: UnimodularForm) -> str:
    """Square class of det(B) over F_p: 'square' or 'nonsquare' ('1' over F_2)"""
    ring = F.ring
    if not ring.is_field:
        raise UnsupportedError("discriminant_class is defined over prime fields")
    det = F.gram.determinant() if F.rank else 1
    p = ring.modulus
    if p == 2:
        return "1"
    return "square" if pow(det, (p - 1) // 2, p) == 1 else "nonsquare"


def arf(F: UnimodularForm) -> int:
    """
    Arf invariant of a quadratic form over F_2: reduce to a symplectic basis
    (e_i, f_i) and return sum q(e_i) q(f_i).
    """
    if F.ring.modulus != 2 or F.param.flavor != "quadratic":
        raise UnsupportedError(f"arf needs a quadratic form over F2, got {F.param.name}")
    n = F.rank
    if n % 2:
        raise ValidationError("arf needs even rank")
    vectors = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    total = 0
    while vectors:
        e = vectors.pop(0)
        idx = next((k for k, v in enumerate(vectors) if F.b(e, v) == 1), None)
        if idx is None:
            raise ValidationError("form is degenerate")
        f = vectors.pop(idx)
        total += eval_q(F, e) * eval_q(F, f)
        rest = []
        for x in vectors:
            bxf = F.b(x, f)
            bxe = F.b(x, e)
            rest.append(tuple((xi + bxf * ei + bxe * fi) % 2 for xi, ei, fi in zip(x, e, f)))
        vectors = rest
    return total % 2


def reduce_mod2_quadratic(F: UnimodularForm) -> UnimodularForm:
    """The mod-2 reduction of a quadratic form over Z with epsilon = -1"""
    F2 = RingSpec.mod(2)
    param = FormParameter.quadratic(F2, 1)
    return UnimodularForm(param, F.gram.reduce(F2), tuple(q % 2 for q in F.qvals))


def form_from_json(data: Dict) -> UnimodularForm:
    """Parse the form JSON schema (ring, flavor, epsilon, gram, q, general)"""
    try:
        ring = RingSpec.parse(data["ring"])
        general = GeneralQData.from_json(data["general"]) if data.get("general") else None
        param = FormParameter(ring, int(data.get("epsilon", 1)), data.get("flavor", "symmetric"), general)
        gram = data["gram"]
        qvals = data.get("q")
    except KeyError as e:
        raise ValidationError(f"Form JSON is missing field {e}")
    if qvals is not None and param.flavor == "general":
        qvals = [tuple(q) for q in qvals]
    return make_form(param, gram, qvals)
