#!/usr/bin/env python3
"""
Form theory over the integers

Isotropic vector search and hyperbolic splitting, Lagrangians decided by
invariants, the indefinite classification (rank, signature, parity) and
short-vector isometry search for small definite forms.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

import config
from errors import CapExceededError, UnsupportedError, ValidationError
from exactalg import Matrix, solve
from formcore import (
    UnimodularForm,
    arf,
    eval_q,
    inertia,
    negate,
    parity,
    reduce_mod2_quadratic,
    restrict,
    signature,
)

logger = logging.getLogger(__name__)


def require_integral(F: UnimodularForm, what: str) -> None:
    if not F.ring.is_integers:
        raise UnsupportedError(f"{what} needs a form over Z, got {F.param.name}")
    if F.param.flavor not in ("symmetric", "quadratic"):
        raise UnsupportedError(f"{what} over Z supports the symmetric and quadratic flavors, got {F.param.flavor}")


def _search_vectors(n: int, bound: int) -> Iterator[Tuple[int, ...]]:
    """Primitive vectors up to sign, by growing coefficient bound then support size"""
    for k in range(1, bound + 1):
        for size in range(1, n + 1):
            for support in itertools.combinations(range(n), size):
                for coeffs in itertools.product(range(-k, k + 1), repeat=size):
                    if 0 in coeffs or max(abs(c) for c in coeffs) != k or coeffs[0] < 0:
                        continue
                    if math.gcd(*coeffs) != 1:
                        continue
                    v = [0] * n
                    for i, c in zip(support, coeffs):
                        v[i] = c
                    yield tuple(v)


def find_isotropic_vector(F: UnimodularForm, bound: Optional[int] = None) -> Optional[Tuple[int, ...]]:
    """A primitive v with b(v, v) = 0 and q(v) = 0 inside the search box, or None"""
    bound = bound if bound is not None else config.ISOTROPIC_SEARCH_BOUND
    zero = F.param.q_zero()
    for v in _search_vectors(F.rank, bound):
        if F.b(v, v) == 0 and eval_q(F, v) == zero:
            return v
    return None


def split_hyperbolic_plane(F: UnimodularForm, v: Tuple[int, ...]) -> Tuple[Tuple[int, ...], Tuple[int, ...], Matrix]:
    """
    For an isotropic primitive v find w with b(v, w) = 1, made as close to
    hyperbolic as the form allows, and a basis of the orthogonal complement
    of span(v, w).
    """
    n = F.rank
    ring = F.ring
    row = Matrix.from_rows(ring, [F.gram.T.apply(v)], cols=n)
    sol = solve(row, Matrix.column(ring, [1]))
    if sol is None:
        raise ValidationError(f"No w with b({v}, w) = 1; v is not primitive or the form is degenerate")
    w = list(sol.col(0))
    p = F.param
    if p.epsilon == 1 and p.flavor == "symmetric":
        c = -(F.b(w, w) // 2)
    elif p.epsilon == 1:
        c = -eval_q(F, w)
    elif p.flavor == "quadratic":
        c = eval_q(F, w)
    else:
        c = 0
    w = tuple(wi + c * vi for wi, vi in zip(w, v))
    constraints = Matrix.from_rows(ring, [F.gram.T.apply(v), F.gram.T.apply(w)], cols=n)
    return v, w, constraints.kernel_basis()


def hyperbolic_decomposition(F: UnimodularForm, bound: Optional[int] = None) -> Tuple[List[Tuple], Matrix]:
    """
    Split off planes span(v_i, w_i) while isotropic vectors are found.

    Returns the planes in ambient coordinates and a basis of the remaining
    orthogonal complement (columns, ambient coordinates).
    """
    planes: List[Tuple] = []
    basis = Matrix.identity(F.ring, F.rank)
    current = F
    while current.rank:
        v = find_isotropic_vector(current, bound)
        if v is None:
            break
        v, w, K = split_hyperbolic_plane(current, v)
        planes.append((basis.apply(v), basis.apply(w)))
        basis = basis @ K
        current = restrict(F, basis)
        logger.debug(f"Split a hyperbolic plane, complement rank {current.rank}")
    return planes, basis


def lagrangian_obstruction(F: UnimodularForm) -> Optional[str]:
    """Why F has no Lagrangian, or None when the invariants allow one"""
    require_integral(F, "find_lagrangian")
    if F.rank % 2:
        return "odd rank"
    if F.param.epsilon == 1:
        sig = signature(F)
        if sig:
            return f"signature {sig} is nonzero"
        return None
    if F.param.flavor == "quadratic" and F.rank and arf(reduce_mod2_quadratic(F)):
        return "Arf invariant 1"
    return None


def find_lagrangian_invariant(F: UnimodularForm, bound: Optional[int] = None) -> Optional[Matrix]:
    """
    Decide Lagrangians over Z from invariants and construct one by splitting
    hyperbolic planes. None means no Lagrangian exists.
    """
    reason = lagrangian_obstruction(F)
    if reason is not None:
        logger.info(f"No Lagrangian: {reason}")
        return None
    if F.rank == 0:
        return Matrix.zeros(F.ring, 0, 0)
    planes, rest = hyperbolic_decomposition(F, bound)
    if rest.cols:
        raise CapExceededError(
            f"Lagrangian exists but no isotropic vector was found within the search bound "
            f"(rank {rest.cols} left)")
    return Matrix.from_columns(F.ring, [v for v, _ in planes], F.rank)


# Classification


def standard_basis(F: UnimodularForm, bound: Optional[int] = None) -> Optional[Matrix]:
    """
    A basis in which F has its standard shape: hyperbolic blocks for even or
    alternating forms, diag(1, .., 1, -1, .., -1) for odd forms. Only forms
    that split completely into planes are handled; otherwise None.
    """
    require_integral(F, "standard_basis")
    try:
        planes, rest = hyperbolic_decomposition(F, bound)
    except ValidationError:
        return None
    if rest.cols:
        return None
    if F.param.epsilon == -1 or parity(F) == "even":
        return Matrix.from_columns(F.ring, [x for plane in planes for x in plane], F.rank)
    plus: List[Tuple[int, ...]] = []
    minus: List[Tuple[int, ...]] = []
    even_planes = []
    for v, w in planes:
        if F.b(w, w) % 2:
            plus.append(w)
            minus.append(tuple(a - b for a, b in zip(w, v)))
        else:
            even_planes.append((v, w))
    for e, f in even_planes:
        # H + <1> = <1> + <-1> + <1> via (a+e, a+e-f, a-f)
        a = plus.pop()
        plus.append(tuple(x + y for x, y in zip(a, e)))
        minus.append(tuple(x + y - z for x, y, z in zip(a, e, f)))
        plus.append(tuple(x - z for x, z in zip(a, f)))
    return Matrix.from_columns(F.ring, plus + minus, F.rank)


def _short_vectors(G: UnimodularForm, norm: int, G_inv: Matrix) -> List[Tuple[int, ...]]:
    """All x with x^T B x = norm for a positive definite B"""
    n = G.rank
    bounds = []
    for i in range(n):
        limit = Fraction(norm) * Fraction(G_inv[i, i])
        r = math.isqrt(int(limit)) if limit > 0 else 0
        bounds.append(r)
    out = []
    for x in itertools.product(*[range(-r, r + 1) for r in bounds]):
        if G.b(x, x) == norm:
            out.append(x)
    return out


def definite_isometry(F: UnimodularForm, G: UnimodularForm) -> Optional[Matrix]:
    """
    Short-vector backtracking for positive or negative definite forms:
    columns u_i of U with b_G(u_i, u_j) = b_F(e_i, e_j).
    """
    if F.rank != G.rank:
        return None
    if signature(F) < 0:
        F, G = negate(F), negate(G)
    n = F.rank
    if n == 0:
        return Matrix.zeros(F.ring, 0, 0)
    G_inv = G.gram.inverse()
    candidates = {}
    for i in range(n):
        norm = F.gram[i, i]
        if norm not in candidates:
            candidates[norm] = _short_vectors(G, norm, G_inv)
    chosen: List[Tuple[int, ...]] = []

    def extend(i: int) -> bool:
        if i == n:
            return True
        for x in candidates[F.gram[i, i]]:
            if all(G.b(chosen[j], x) == F.gram[j, i] for j in range(i)):
                if eval_q(G, x) != F.qvals[i]:
                    continue
                chosen.append(x)
                if extend(i + 1):
                    return True
                chosen.pop()
        return False

    if not extend(0):
        return None
    return Matrix.from_columns(F.ring, chosen, n)


def integral_invariants(F: UnimodularForm) -> Tuple[str, ...]:
    """Human-readable classification invariants over Z"""
    require_integral(F, "classification")
    if F.param.epsilon == 1:
        pos, neg = inertia(F)
        return (f"rank {F.rank}", f"signature {pos - neg}", parity(F))
    if F.param.flavor == "quadratic":
        return (f"rank {F.rank}", f"arf {arf(reduce_mod2_quadratic(F)) if F.rank else 0}")
    return (f"rank {F.rank}",)
