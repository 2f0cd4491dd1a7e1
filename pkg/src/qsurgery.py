#!/usr/bin/env python3
"""
Quadratic Poincare complexes and algebraic surgery

A bilinear family of form-degree m on a complex C is a set of blocks
beta_{p,q} (p + q = m), each a matrix of shape dim C_p x dim C_q with
beta(x, y) = x^T beta_{p,q} y. On such families

    (delta beta)_{p,q} = d_p^T beta_{p-1,q} + (-1)^p beta_{p,q-1} d_q
    (T beta)_{p,q}     = epsilon (-1)^{pq} beta_{q,p}^T

An n-dimensional quadratic structure is psi_0, psi_1, ... with psi_s of
form-degree n + s and

    (-1)^s delta psi_s + (1 + (-1)^{s+1} T) psi_{s+1} = 0.

The symmetrization phi = (1 + T) psi_0 gives the chain map
phi#: C -> dual(C, n), phi#_p = (-1)^p phi_{p,n-p}^T. The full list of signs
lives in docs/SIGNS.md.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import config
from chaincx import (
    ChainComplex,
    ChainMap,
    cone,
    dual,
    dual_map,
    fiber,
    homology,
    homology_all,
    homology_generators,
    random_automorphism,
    require_pid,
    solve_homotopy,
    trim,
)
from chaincx import direct_sum as complex_direct_sum
from errors import (
    CapExceededError,
    ConventionError,
    ObstructionError,
    UnsupportedError,
    ValidationError,
)
from exactalg import Matrix, RingSpec, block_matrix, random_matrix, solve
from formcore import FormParameter, UnimodularForm, arf, rational_inertia, reduce_mod2_quadratic

logger = logging.getLogger(__name__)

# p -> block (p, m - p) of one bilinear family of form-degree m
Family = Dict[int, Matrix]


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _block(C: ChainComplex, beta: Family, p: int, m: int) -> Matrix:
    if p in beta:
        return beta[p]
    return Matrix.zeros(C.ring, C.dim(p), C.dim(m - p))


def _block_degrees(C: ChainComplex, m: int) -> List[int]:
    """Degrees p with both C_p and C_{m-p} nonzero"""
    return [p for p in C.degrees() if C.dim(p) and C.dim(m - p)]


def _clean(C: ChainComplex, beta: Family, m: int) -> Family:
    return {p: b for p, b in beta.items() if C.dim(p) and C.dim(m - p)}


def coboundary(C: ChainComplex, beta: Family, m: int) -> Family:
    """delta beta, of form-degree m + 1"""
    out = {}
    for p in _block_degrees(C, m + 1):
        q = m + 1 - p
        blk = C.d(p).T @ _block(C, beta, p - 1, m) + (_block(C, beta, p, m) @ C.d(q)).scale(_sign(p))
        out[p] = blk
    return out


def transpose(C: ChainComplex, beta: Family, m: int, epsilon: int = 1) -> Family:
    """T beta with the epsilon twist"""
    out = {}
    for p in _block_degrees(C, m):
        q = m - p
        out[p] = _block(C, beta, q, m).T.scale(epsilon * _sign(p * q))
    return out


def combine(C: ChainComplex, m: int, *terms: Tuple[int, Family]) -> Family:
    """sum of c * beta over (c, beta) pairs"""
    out = {}
    for p in _block_degrees(C, m):
        total = Matrix.zeros(C.ring, C.dim(p), C.dim(m - p))
        for c, beta in terms:
            if p in beta and c:
                total = total + beta[p].scale(c)
        out[p] = total
    return out


def restrict_family(f: ChainMap, beta: Family, m: int) -> Family:
    """f^* beta on the source of f: f_p^T beta_{p,q} f_q"""
    T, C = f.source, f.target
    return {p: f.f(p).T @ _block(C, beta, p, m) @ f.f(m - p) for p in _block_degrees(T, m)}


def is_zero_family(beta: Family) -> bool:
    return all(b.is_zero() for b in beta.values())


def families_equal(C: ChainComplex, a: Family, b: Family, m: int) -> bool:
    return all(_block(C, a, p, m) == _block(C, b, p, m) for p in _block_degrees(C, m))


class QuadraticComplex:
    """
    (C, psi) with psi_s given for s = 0 .. len(psi) - 1; missing layers and
    blocks are zero.
    """

    __slots__ = ("C", "n", "psi", "epsilon")

    def __init__(self, C: ChainComplex, n: int, psi: Sequence[Family], epsilon: int = 1):
        if epsilon not in (1, -1):
            raise ValidationError(f"epsilon must be +1 or -1, got {epsilon}")
        self.C = C
        self.n = n
        self.epsilon = epsilon
        layers = []
        for s, beta in enumerate(psi):
            m = n + s
            for p, blk in beta.items():
                shape = (C.dim(p), C.dim(m - p))
                if blk.shape != shape or blk.ring != C.ring:
                    raise ValidationError(f"psi_{s} block ({p}, {m - p}) has shape {blk.shape}, expected {shape}")
            layers.append(_clean(C, beta, m))
        while len(layers) > self.layer_count:
            if not is_zero_family(layers[-1]):
                raise ValidationError(f"psi_{len(layers) - 1} lies outside the degree range of the complex")
            layers.pop()
        self.psi: Tuple[Family, ...] = tuple(layers)

    @property
    def ring(self) -> RingSpec:
        return self.C.ring

    @property
    def layer_count(self) -> int:
        """Number of layers psi_s that can be nonzero (form-degree n + s <= 2 hi)"""
        return max(0, 2 * self.C.hi - self.n + 1)

    def layer(self, s: int) -> Family:
        if 0 <= s < len(self.psi):
            return self.psi[s]
        return {}

    def block(self, s: int, p: int) -> Matrix:
        return _block(self.C, self.layer(s), p, self.n + s)

    def __repr__(self) -> str:
        return f"QuadraticComplex({self.C!r}, n={self.n}, layers={len(self.psi)}, epsilon={self.epsilon:+d})"

    # Structure

    def relations_hold(self) -> bool:
        """(-1)^s delta psi_s + (1 + (-1)^{s+1} T) psi_{s+1} = 0 for every s"""
        C, n, eps = self.C, self.n, self.epsilon
        for s in range(self.layer_count + 1):
            m = n + s + 1
            nxt = self.layer(s + 1)
            lhs = combine(C, m,
                          (_sign(s), coboundary(C, self.layer(s), n + s)),
                          (1, nxt),
                          (_sign(s + 1), transpose(C, nxt, m, eps)))
            if not is_zero_family(lhs):
                logger.debug(f"Quadratic relation fails at s = {s}")
                return False
        return True

    def symmetrization(self) -> Family:
        """phi = (1 + T) psi_0, of form-degree n"""
        C, n = self.C, self.n
        psi0 = self.layer(0)
        return combine(C, n, (1, psi0), (1, transpose(C, psi0, n, self.epsilon)))

    def phi_sharp(self) -> ChainMap:
        """phi#: C -> dual(C, n)"""
        C, n = self.C, self.n
        phi = self.symmetrization()
        comps = {p: _block(C, phi, p, n).T.scale(_sign(p)) for p in C.degrees()}
        sharp = ChainMap(C, dual(C, n), comps, check=False)
        if not sharp.commutes():
            raise ValidationError("phi# is not a chain map; the structure relations do not hold")
        return sharp

    def is_poincare(self) -> bool:
        require_pid(self.C, "check_poincare")
        return self.phi_sharp().is_quasi_isomorphism()

    def pullback(self, g: ChainMap) -> "QuadraticComplex":
        """g^* psi on the source of g"""
        if g.target.compact() != self.C.compact():
            raise ValidationError("pullback along a map into a different complex")
        S = g.source
        psi = [restrict_family(g, self.layer(s), self.n + s) for s in range(len(self.psi))]
        layers = max(0, 2 * S.hi - self.n + 1)
        return QuadraticComplex(S, self.n, psi[:layers], self.epsilon)

    def negate(self) -> "QuadraticComplex":
        return QuadraticComplex(self.C, self.n, [{p: -b for p, b in beta.items()} for beta in self.psi], self.epsilon)

    # Forms in degree 0

    @classmethod
    def from_form(cls, F: UnimodularForm, degree: int = 0) -> "QuadraticComplex":
        """
        The form as a complex concentrated in one degree k, dimension n = 2k.
        psi_0 is upper triangular with the q-values on the diagonal; forms
        over rings where 2 is a unit may also come in the symmetric flavor.
        """
        param = F.param
        ring = F.ring
        r = F.rank
        B = F.gram
        if param.flavor == "quadratic":
            diag = [int(q) for q in F.qvals]
        elif param.flavor in ("symmetric", "even") and ring.is_finite and ring.is_unit(2):
            half = ring.inverse(2)
            diag = [B[i, i] * half for i in range(r)]
        else:
            raise UnsupportedError(f"No quadratic chain structure for {param.name}")
        rows = [[diag[i] if i == j else (B[i, j] if i < j else 0) for j in range(r)] for i in range(r)]
        C = ChainComplex.concentrated(ring, degree, r)
        psi0 = {degree: Matrix(ring, r, r, rows)} if r else {}
        X = cls(C, 2 * degree, [psi0], param.epsilon * _sign(degree))
        return X

    # Serialization

    def to_json(self) -> Dict:
        out = self.C.to_json()
        out["n"] = self.n
        out["epsilon"] = self.epsilon
        out["psi"] = [{str(p): b.tolist() for p, b in sorted(beta.items())} for beta in self.psi]
        return out

    @classmethod
    def from_json(cls, data: Dict) -> "QuadraticComplex":
        C = ChainComplex.from_json(data)
        try:
            n = int(data["n"])
            eps = int(data.get("epsilon", 1))
            layers = []
            for s, raw in enumerate(data.get("psi", [])):
                m = n + s
                beta = {}
                items = raw.items() if isinstance(raw, dict) else enumerate(raw, start=C.lo)
                for p, rows in items:
                    p = int(p)
                    if rows is None:
                        continue
                    beta[p] = Matrix(C.ring, C.dim(p), C.dim(m - p), rows if C.dim(p) else [])
                layers.append(beta)
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed quadratic complex JSON: {e}")
        X = cls(C, n, layers, eps)
        if not X.relations_hold():
            raise ValidationError("psi does not satisfy the quadratic structure relations")
        return X


def direct_sum(*items: QuadraticComplex) -> QuadraticComplex:
    first = items[0]
    if any(X.n != first.n or X.epsilon != first.epsilon or X.ring != first.ring for X in items):
        raise ValidationError("direct sum of quadratic complexes with different n, epsilon or ring")
    C = complex_direct_sum(*[X.C for X in items])
    n = first.n
    layers = []
    for s in range(max(len(X.psi) for X in items)):
        m = n + s
        beta = {}
        for p in _block_degrees(C, m):
            beta[p] = block_matrix(C.ring, [X.C.dim(p) for X in items], [X.C.dim(m - p) for X in items],
                                   {(i, i): X.block(s, p) for i, X in enumerate(items)})
        layers.append(beta)
    return QuadraticComplex(C, n, layers, first.epsilon)


def hyperbolic_complex(ring: RingSpec, degree: int, rank: int, n: int = 0, epsilon: int = 1) -> QuadraticComplex:
    """
    P = R^rank in the given degree and its dual in degree n - degree, with
    psi_0 pairing P against P^* by the identity and zero differential.
    """
    k, k2 = degree, n - degree
    lo, hi = min(k, k2), max(k, k2)
    if k == k2:
        C = ChainComplex.concentrated(ring, k, 2 * rank)
        blk = block_matrix(ring, [rank, rank], [rank, rank], {(0, 1): Matrix.identity(ring, rank)})
        return QuadraticComplex(C, n, [{k: blk}], epsilon)
    dims = [0] * (hi - lo + 1)
    dims[k - lo] = rank
    dims[k2 - lo] = rank
    C = ChainComplex(ring, lo, dims)
    return QuadraticComplex(C, n, [{k: Matrix.identity(ring, rank)}], epsilon)


def check_poincare(X: QuadraticComplex) -> Tuple[bool, Dict[int, str]]:
    """
    Whether phi# is a homology isomorphism, with the homology of its cone
    per degree as witness (all zero exactly when the answer is yes).
    """
    require_pid(X.C, "check_poincare")
    K = cone(X.phi_sharp())
    witness = {k: homology(K, k).describe() for k in K.degrees()}
    ok = all(w == "0" for w in witness.values())
    logger.debug(f"check_poincare {X!r}: {ok}")
    return ok, witness


def rational_signature(X: QuadraticComplex) -> int:
    """Signature of phi on H_{n/2}(C; Q)"""
    if X.n % 2:
        raise ValidationError(f"rational_signature needs even n, got {X.n}")
    if not X.ring.is_integers:
        raise UnsupportedError(f"rational_signature needs a complex over Z, got {X.ring.name}")
    m = X.n // 2
    if not X.C.dim(m):
        return 0
    K = X.C.d(m).kernel_basis()
    if not K.cols:
        return 0
    phi = _block(X.C, X.symmetrization(), m, X.n)
    M = K.T @ phi @ K
    sym = (M + M.T).tolist()
    pos, neg = rational_inertia(sym)
    return pos - neg


def heart_form(X: QuadraticComplex, flavor: str = "quadratic") -> UnimodularForm:
    """The form of a complex concentrated in degree 0 with n = 0"""
    if X.n != 0:
        raise ValidationError(f"heart_form needs n = 0, got {X.n}")
    sup = X.C.support()
    if any(k != 0 for k in sup):
        raise ValidationError(f"heart_form needs a complex concentrated in degree 0, support is {sup}")
    ring = X.ring
    P = X.block(0, 0)
    gram = P + P.T.scale(X.epsilon)
    if flavor == "quadratic":
        param = FormParameter.quadratic(ring, X.epsilon)
        qvals = tuple(P[i, i] for i in range(P.rows))
    elif flavor == "symmetric":
        param = FormParameter.symmetric(ring, X.epsilon)
        qvals = tuple(gram[i, i] for i in range(gram.rows))
    else:
        raise UnsupportedError(f"heart_form supports the quadratic and symmetric flavors, got {flavor}")
    return UnimodularForm(param, gram, qvals)


def arf_of_complex(X: QuadraticComplex) -> int:
    """Arf invariant of the heart form, reduced mod 2 for complexes over Z"""
    F = heart_form(X)
    if F.ring.is_integers:
        F = reduce_mod2_quadratic(F)
    return arf(F) if F.rank else 0


# Surgery data


def _nullhomotopy_layers(T: ChainComplex, n: int) -> int:
    """nu_s has form-degree n + s - 1 on T and vanishes once that exceeds 2 hi"""
    return max(0, 2 * T.hi - n + 2)


def solve_nullhomotopy(X: QuadraticComplex, f: ChainMap) -> Optional[List[Family]]:
    """
    Solve (-1)^s delta nu_s + (1 + (-1)^{s+1} T) nu_{s+1} = f^* psi_s for
    every s as one linear system over the ring of X. None when the system
    has no solution.
    """
    if f.target.ring != X.ring:
        raise ValidationError(f"Surgery map over {f.target.ring.name} into a complex over {X.ring.name}")
    if f.target.compact() != X.C.compact():
        raise ValidationError("Surgery map does not land in the complex of the structure")
    T = f.source
    require_pid(T, "solve_nullhomotopy")
    ring, n, eps = X.ring, X.n, X.epsilon
    layers = _nullhomotopy_layers(T, n)

    index: Dict[Tuple[int, int], int] = {}
    count = 0
    for s in range(layers):
        m = n + s - 1
        for p in _block_degrees(T, m):
            index[(s, p)] = count
            count += T.dim(p) * T.dim(m - p)

    def var(s: int, p: int, i: int, j: int) -> int:
        return index[(s, p)] + i * T.dim(n + s - 1 - p) + j

    equations: List[Dict[int, int]] = []
    rhs: List[int] = []
    for s in range(layers):
        m = n + s
        target = restrict_family(f, X.layer(s), m)
        sign_s = _sign(s)
        for p in _block_degrees(T, m):
            q = m - p
            dp, dq = T.d(p), T.d(q)
            for i in range(T.dim(p)):
                for j in range(T.dim(q)):
                    row: Dict[int, int] = {}

                    def add(v: int, c: int) -> None:
                        row[v] = row.get(v, 0) + c

                    if (s, p - 1) in index:
                        for k in range(T.dim(p - 1)):
                            if dp[k, i]:
                                add(var(s, p - 1, k, j), sign_s * dp[k, i])
                    if (s, p) in index:
                        for k in range(T.dim(q - 1)):
                            if dq[k, j]:
                                add(var(s, p, i, k), sign_s * _sign(p) * dq[k, j])
                    if (s + 1, p) in index:
                        add(var(s + 1, p, i, j), 1)
                        add(var(s + 1, q, j, i), _sign(s + 1) * eps * _sign(p * q))
                    equations.append(row)
                    rhs.append(target[p][i, j])

    if not equations or not count:
        if any(ring.canon(b) for b in rhs):
            return None
        return [{} for _ in range(layers)]
    A = Matrix(ring, len(equations), count, [[row.get(v, 0) for v in range(count)] for row in equations])
    x = solve(A, Matrix.column(ring, rhs))
    if x is None:
        logger.info(f"Nullhomotopy system ({A.rows} equations, {count} unknowns) has no solution")
        return None
    values = x.col(0)
    nu: List[Family] = []
    for s in range(layers):
        m = n + s - 1
        beta = {}
        for p in _block_degrees(T, m):
            rows, cols = T.dim(p), T.dim(m - p)
            start = index[(s, p)]
            beta[p] = Matrix(ring, rows, cols,
                             [values[start + i * cols:start + (i + 1) * cols] for i in range(rows)])
        nu.append(beta)
    logger.debug(f"Solved nullhomotopy with {count} unknowns")
    return nu


@dataclass
class SurgeryDatum:
    """f: T -> C with nu exhibiting f^* psi as null"""

    target: QuadraticComplex
    f: ChainMap
    nu: List[Family]

    @property
    def T(self) -> ChainComplex:
        return self.f.source

    def nu_block(self, s: int, p: int) -> Matrix:
        beta = self.nu[s] if 0 <= s < len(self.nu) else {}
        return _block(self.T, beta, p, self.target.n + s - 1)

    def verify(self) -> bool:
        X, T, eps = self.target, self.T, self.target.epsilon
        if not self.f.commutes():
            return False
        for s in range(_nullhomotopy_layers(T, X.n) + 1):
            m = X.n + s
            nu_s = self.nu[s] if s < len(self.nu) else {}
            nxt = self.nu[s + 1] if s + 1 < len(self.nu) else {}
            lhs = combine(T, m,
                          (_sign(s), coboundary(T, nu_s, m - 1)),
                          (1, nxt),
                          (_sign(s + 1), transpose(T, nxt, m, eps)))
            if not families_equal(T, lhs, restrict_family(self.f, X.layer(s), m), m):
                return False
        return True

    @classmethod
    def solve(cls, X: QuadraticComplex, f: ChainMap) -> "SurgeryDatum":
        nu = solve_nullhomotopy(X, f)
        if nu is None:
            raise ObstructionError("The restricted structure is not null: no nullhomotopy exists")
        return cls(X, f, nu)


def _homology_key(C: ChainComplex, k: int) -> Tuple[int, Tuple[int, ...]]:
    H = homology(C, k)
    return H.free_rank, H.factors


@dataclass
class Cobordism:
    """
    left <- W -> right. For surgery traces, datum is the surgery datum and
    lift is l: T -> W, so that the right end is cone(l). zigzag holds the
    traces that tie the right end back to the one it replaced.
    """

    left: QuadraticComplex
    right: QuadraticComplex
    W: ChainComplex
    to_left: ChainMap
    to_right: ChainMap
    datum: Optional[SurgeryDatum] = None
    lefschetz_checked: bool = False
    notes: List[str] = field(default_factory=list)
    lift: Optional[ChainMap] = None
    zigzag: List["Cobordism"] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.left.n

    def left_fiber(self) -> ChainComplex:
        return fiber(self.to_left)

    def right_fiber(self) -> ChainComplex:
        return fiber(self.to_right)

    def lefschetz_holds(self) -> bool:
        """fib(W -> left) and dual(fib(W -> right), n - 1) have the same homology"""
        A = self.left_fiber()
        B = dual(self.right_fiber(), self.n - 1)
        lo, hi = min(A.lo, B.lo), max(A.hi, B.hi)
        for k in range(lo, hi + 1):
            if _homology_key(A, k) != _homology_key(B, k):
                logger.debug(f"Lefschetz mismatch in degree {k}: {homology(A, k)} vs {homology(B, k)}")
                return False
        return True

    def check_lefschetz(self) -> None:
        if not self.lefschetz_holds():
            raise ConventionError("Cobordism fails the Lefschetz duality check")
        self.lefschetz_checked = True

    def reflected(self) -> "Cobordism":
        """right <- W -> left"""
        out = Cobordism(self.right, self.left, self.W, self.to_right, self.to_left, self.datum,
                        self.lefschetz_checked, list(self.notes) + ["reflected"])
        return out

    def left_fiber_profile(self) -> Dict[int, str]:
        F = self.left_fiber()
        return {k: homology(F, k).describe() for k in F.degrees() if not homology(F, k).is_trivial}

    def to_json(self) -> Dict:
        return {
            "left": self.left.to_json(),
            "right": self.right.to_json(),
            "W": self.W.to_json(),
            "to_left": self.to_left.to_json(),
            "to_right": self.to_right.to_json(),
            "lefschetz_checked": self.lefschetz_checked,
            "notes": list(self.notes),
        }


def surgery(datum: SurgeryDatum) -> Tuple[Cobordism, QuadraticComplex]:
    """
    Trace and result of surgery on f: T -> C.

    g = f^T phi#: C -> dual(T, n), trace chi = fiber(g), lift
    l_k = (h_k, f_k): T -> chi with h_k = (-1)^k mu_{k,n-1-k}^T where
    mu = (1 + T) nu_0, and result C_f = cone(l). In degree p the result is
    A_p + C_p + T_{p-1} with A_p = T_{n-p-1}^*, carrying

        psi'_0 = psi_0 on C + the evaluation pairing A x T
        psi'_s = psi_s on C + M_s + (-1)^{s+1} (-1)^p nu_{s-1} on T x T

    where M_s is -f^T psi_{s-1} on T x C for odd s and
    (-1)^p psi_{s-1} f on C x T for even s.
    """
    X, f = datum.target, datum.f
    if not datum.verify():
        raise ValidationError("Surgery datum does not verify")
    T, C, n, eps, ring = datum.T, X.C, X.n, X.epsilon, X.ring

    sharp = X.phi_sharp()
    dT = dual(T, n)
    g = dual_map(f, n) @ sharp
    chi = fiber(g)

    nu0 = datum.nu[0] if datum.nu else {}
    mu = combine(T, n - 1, (1, nu0), (1, transpose(T, nu0, n - 1, eps)))
    lift = {}
    for k in T.degrees():
        h_k = _block(T, mu, k, n - 1).T.scale(_sign(k))
        lift[k] = block_matrix(ring, [dT.dim(k + 1), C.dim(k)], [T.dim(k)], {(0, 0): h_k, (1, 0): f.f(k)})
    ell = ChainMap(T, chi, lift, check=False)
    if not ell.commutes():
        raise ConventionError("Surgery lift is not a chain map")

    to_C = ChainMap(chi, C, {k: block_matrix(ring, [C.dim(k)], [dT.dim(k + 1), C.dim(k)],
                                             {(0, 1): Matrix.identity(ring, C.dim(k))})
                             for k in chi.degrees()})
    Cf = cone(ell)
    to_Cf = ChainMap(chi, Cf, {k: block_matrix(ring, [chi.dim(k), T.dim(k - 1)], [chi.dim(k)],
                                               {(0, 0): Matrix.identity(ring, chi.dim(k))})
                               for k in chi.degrees()})

    layers = []
    for s in range(max(0, 2 * Cf.hi - n + 1)):
        m = n + s
        beta = {}
        for p in _block_degrees(Cf, m):
            q = m - p
            rows = [T.dim(n - p - 1), C.dim(p), T.dim(p - 1)]
            cols = [T.dim(n - q - 1), C.dim(q), T.dim(q - 1)]
            blocks = {(1, 1): X.block(s, p)}
            if s == 0:
                blocks[(0, 2)] = Matrix.identity(ring, rows[0])
            else:
                if s % 2:
                    blocks[(2, 1)] = -(f.f(p - 1).T @ X.block(s - 1, p - 1))
                else:
                    blocks[(1, 2)] = (X.block(s - 1, p) @ f.f(q - 1)).scale(_sign(p))
                blocks[(2, 2)] = datum.nu_block(s - 1, p - 1).scale(_sign(s + 1) * _sign(p))
            beta[p] = block_matrix(ring, rows, cols, blocks)
        layers.append(beta)
    Xf = QuadraticComplex(Cf, n, layers, eps)
    if not Xf.relations_hold():
        raise ConventionError("Surgery result violates the quadratic structure relations")
    if not check_poincare(Xf)[0]:
        raise ConventionError("Surgery result is not Poincare")

    cob = Cobordism(X, Xf, chi, to_C, to_Cf, datum, notes=[f"trace of surgery on T with ranks {list(T.dims)}"
                                                           f" from degree {T.lo}"], lift=ell)
    cob.check_lefschetz()
    logger.info(f"Surgery on {T!r}: {C!r} -> {Cf!r}")
    return cob, Xf


# Normalization to the heart


def homology_profile(C: ChainComplex) -> Dict[str, str]:
    return {str(k): H.describe() for k, H in homology_all(C).items() if not H.is_trivial}


def _lowest_negative_homology(C: ChainComplex) -> Optional[int]:
    for k in range(C.lo, 0):
        if not homology(C, k).is_trivial:
            return k
    return None


def trim_structure(X: QuadraticComplex) -> QuadraticComplex:
    """X pulled back to the trimmed complex along the homotopy equivalence"""
    _, eq = trim(X.C)
    return X.pullback(eq.g)


@dataclass
class Normalization:
    """Heart form of a Poincare complex with the cobordisms and steps that reached it"""

    form: UnimodularForm
    heart: QuadraticComplex
    cobordisms: List[Cobordism]
    steps: List[Dict]

    def steps_jsonl(self) -> str:
        return "\n".join(json.dumps(step, sort_keys=True) for step in self.steps)

    def to_json(self) -> Dict:
        return {
            "form": self.form.to_json(),
            "surgeries": len(self.cobordisms),
            "steps": self.steps,
        }


def normalize_to_heart(X: QuadraticComplex, step_cap: Optional[int] = None,
                       on_step: Optional[Callable[[Dict], None]] = None) -> Normalization:
    """
    Surgery below the middle dimension until the homology sits in degree 0.

    Each step kills the lowest negative homology group H_k with T free in
    degree k on generating cycles; Poincare duality then clears the
    positive degrees as well. The trimmed result is a complex in degree 0
    whose structure is the output form.
    """
    cap = step_cap if step_cap is not None else config.NORMALIZE_STEP_CAP
    if X.n != 0:
        raise UnsupportedError(f"normalize_to_heart handles n = 0, got n = {X.n}")
    require_pid(X.C, "normalize_to_heart")
    if not check_poincare(X)[0]:
        raise ValidationError("normalize_to_heart needs a Poincare complex")
    ring = X.ring
    current = trim_structure(X)
    cobordisms: List[Cobordism] = []
    steps: List[Dict] = []
    for step in range(cap + 1):
        k = _lowest_negative_homology(current.C)
        if k is None:
            break
        if step == cap:
            raise CapExceededError(f"normalize_to_heart did not finish within {cap} surgeries")
        C = current.C
        gens = homology_generators(C, k)
        T = ChainComplex.concentrated(ring, k, len(gens))
        f = ChainMap(T, C, {k: Matrix.from_columns(ring, [cycle for _, cycle in gens], C.dim(k))})
        nu = solve_nullhomotopy(current, f)
        if nu is None:
            raise ConventionError(f"No nullhomotopy for a surgery datum in degree {k} below the middle dimension")
        before = homology_profile(C)
        cob, result = surgery(SurgeryDatum(current, f, nu))
        cobordisms.append(cob)
        current = trim_structure(result)
        record = {
            "step": step,
            "k": k,
            "rank_T": len(gens),
            "before": before,
            "after": homology_profile(current.C),
            "dims": list(current.C.dims),
        }
        steps.append(record)
        logger.info(f"Step {step}: surgery in degree {k} on {len(gens)} generators, homology now {record['after']}")
        if on_step is not None:
            on_step(record)
    if any(d != 0 for d in current.C.support()):
        raise ConventionError(f"Normalized complex is not concentrated in degree 0: {current.C!r}")
    form = heart_form(current)
    logger.info(f"normalize_to_heart: rank {form.rank} form after {len(cobordisms)} surgeries")
    return Normalization(form, current, cobordisms, steps)


def _lowest_homology(C: ChainComplex, top: int) -> Optional[int]:
    return next((k for k in C.degrees() if k <= top and not homology(C, k).is_trivial), None)


def improve_morphism(W: Cobordism, m: int) -> Tuple[Cobordism, List[str]]:
    """
    Surgery on the morphism left <- W -> right along H_m of its left leg.

    With F = fib(W -> left) free of homology below m, T is free in degree m
    on generating cycles s of H_m(F), and t: T -> W is s followed by the
    projection F -> W. The left coordinate of s is a nullhomotopy of
    T -> W -> left, so t is a datum 0 <- T -> T over the span, and
    f = (W -> right) t is a surgery datum on the right end D. The result is

        left <- W/T -> D_f,    W/T = cone(t), D_f = cone(l)

    where W/T -> D_f is cone(t) -> cone(l) induced by a lift of W -> D to
    the trace of f. The lift comes from a nullhomotopy of
    W -> D -> dual(T, n) and a homotopy to l on T. The new left fiber is
    cone(T -> F), so H_m is gone.

    The trace D <- chi -> D_f is appended to zigzag. Its left fiber sits in
    degree n - m - 1, so for n >= 2m + 2 the zig-zag
    left ~> D_f <~ D has (m+1)-connective left legs throughout. When F has
    no homology in degrees <= m, W comes back unchanged.
    """
    if not W.lefschetz_checked:
        W.check_lefschetz()
    log: List[str] = []
    F = W.left_fiber()
    require_pid(F, "improve_morphism")
    profile = W.left_fiber_profile()
    low = _lowest_homology(F, m)
    if low is None:
        log.append(f"left leg fiber homology {profile or '0'} vanishes in degrees <= {m}")
        for note in W.notes:
            log.append(f"certificate: {note}")
        return W, log
    if low < m:
        raise ValidationError(f"left leg fiber has homology in degree {low} below {m}; improve degree {low} first")
    if W.n < 2 * m + 2:
        raise ObstructionError(f"surgery on a morphism in degree {m} needs n >= {2 * m + 2}, got n = {W.n}")

    ring, n = W.left.ring, W.n
    A, D, V = W.left.C, W.right, W.W
    a, b = W.to_left, W.to_right
    gens = homology_generators(F, m)
    r = len(gens)
    T = ChainComplex.concentrated(ring, m, r)
    s = Matrix.from_columns(ring, [cycle for _, cycle in gens], F.dim(m))
    top = A.dim(m + 1)
    t = ChainMap(T, V, {m: s.submatrix(top, F.dim(m), 0, r)})
    # a t = d G
    G = s.submatrix(0, top, 0, r).scale(-1)
    log.append(f"left leg fiber homology before: {profile}")
    log.append(f"datum 0 <- T -> T on {r} generator(s) of H_{m} of the left leg fiber")

    trace, Df = surgery(SurgeryDatum.solve(D, b @ t))
    chi, ell = trace.W, trace.lift
    dT = dual(T, n)
    g = dual_map(trace.datum.f, n) @ D.phi_sharp()
    eta = solve_homotopy(ChainMap.zero(V, dT), g @ b)
    if eta is None:
        raise ObstructionError("W -> right -> dual(T, n) is not null-homotopic")
    lift = ChainMap(V, chi, {k: block_matrix(ring, [dT.dim(k + 1), D.C.dim(k)], [V.dim(k)],
                                             {(0, 0): eta.h(k), (1, 0): b.f(k)})
                             for k in V.degrees()}, check=False)
    if not lift.commutes():
        raise ConventionError("Lift of W to the trace is not a chain map")
    K = solve_homotopy(lift @ t, ell)
    if K is None:
        raise ObstructionError("Lift of W does not restrict to the surgery lift on T")

    WT = cone(t)

    def left_leg(k: int) -> Matrix:
        blocks = {(0, 0): a.f(k)}
        if k == m + 1:
            blocks[(0, 1)] = G
        return block_matrix(ring, [A.dim(k)], [V.dim(k), T.dim(k - 1)], blocks)

    def right_leg(k: int) -> Matrix:
        return block_matrix(ring, [chi.dim(k), T.dim(k - 1)], [V.dim(k), T.dim(k - 1)], {
            (0, 0): lift.f(k),
            (0, 1): K.h(k - 1),
            (1, 1): Matrix.identity(ring, T.dim(k - 1)),
        })

    to_left = ChainMap(WT, A, {k: left_leg(k) for k in WT.degrees()}, check=False)
    to_right = ChainMap(WT, Df.C, {k: right_leg(k) for k in WT.degrees()}, check=False)
    if not (to_left.commutes() and to_right.commutes()):
        raise ConventionError("Legs of the improved cobordism are not chain maps")
    improved = Cobordism(W.left, Df, WT, to_left, to_right,
                         notes=list(W.notes) + [f"surgery on the morphism along rank {r} in degree {m}"],
                         zigzag=list(W.zigzag) + [trace])
    improved.check_lefschetz()
    if _lowest_homology(improved.left_fiber(), m) is not None:
        raise ConventionError(f"Surgery on the morphism did not clear homology in degree <= {m}")
    if _lowest_homology(trace.left_fiber(), m) is not None:
        raise ConventionError(f"Trace of the right end has left leg homology in degree <= {m}")

    log.append(f"left leg fiber homology after: {improved.left_fiber_profile() or '0'}")
    log.append(f"zig-zag: left ~> {Df!r} via W/T, {D!r} ~> {Df!r} via the trace")
    log.append(f"reflected trace {Df!r} <- chi -> {D!r}: left leg fiber {trace.reflected().left_fiber_profile()}")
    for note in trace.notes:
        log.append(f"certificate: {note}")
    logger.info(f"improve_morphism: left leg now {m + 1}-connective, right end {D.C!r} -> {Df.C!r}")
    return improved, log


def improve_through(W: Cobordism, m: int, step_cap: Optional[int] = None) -> Tuple[Cobordism, List[str]]:
    """improve_morphism degree by degree until the left leg fiber has no homology in degrees <= m"""
    cap = step_cap if step_cap is not None else config.NORMALIZE_STEP_CAP
    log: List[str] = []
    for step in range(cap + 1):
        low = _lowest_homology(W.left_fiber(), m)
        if low is None:
            return W, log
        if step == cap:
            raise CapExceededError(f"improve_through did not finish within {cap} surgeries")
        W, lines = improve_morphism(W, low)
        log.extend(lines)
    return W, log


def fatten(X: QuadraticComplex, rng, surgeries: int = 1, pad: int = 1) -> QuadraticComplex:
    """
    A cobordant, usually bigger complex: random surgeries on cycles in
    degrees -1 and -2, split contractible pads [R --1--> R] with zero
    structure, and a random change of basis in every degree.
    """
    ring = X.ring
    for _ in range(surgeries):
        k = rng.choice((-1, -2))
        r = rng.randint(1, 2)
        C = X.C
        if C.dim(k):
            Z = C.d(k).kernel_basis()
            M = Z @ random_matrix(rng, ring, Z.cols, r, bound=2) if Z.cols else Matrix.zeros(ring, C.dim(k), r)
        else:
            M = Matrix.zeros(ring, 0, r)
        T = ChainComplex.concentrated(ring, k, r)
        datum = SurgeryDatum.solve(X, ChainMap(T, C, {k: M}))
        _, X = surgery(datum)
    for _ in range(pad):
        j = rng.randint(-2, 1)
        P = ChainComplex(ring, j, [1, 1], {j + 1: Matrix.identity(ring, 1)})
        X = direct_sum(X, QuadraticComplex(P, X.n, [], X.epsilon))
    eq = random_automorphism(rng, X.C)
    return X.pullback(eq.g)
