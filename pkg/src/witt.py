#!/usr/bin/env python3
"""
Lagrangians, isometry decisions and the groups GW0 and W

Front door for the form theory: each operation dispatches to the exhaustive
prime-field machinery (formfinite) or the integral invariant theory
(formintegral) and verifies what comes back.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import config
from errors import ConventionError, UnsupportedError, ValidationError
from exactalg import (
    ZZ,
    AbelianGroupPresentation,
    Matrix,
    cokernel_presentation,
    hermite_rows,
    snf,
    solve,
    vstack,
)
from formcore import (
    FormParameter,
    Isometry,
    UnimodularForm,
    arf,
    diagonal,
    discriminant_class,
    e8,
    eval_q,
    hyperbolic,
    inertia,
    make_form,
    negate,
    orthogonal_sum,
    parity,
    reduce_mod2_quadratic,
    signature,
)
from formfinite import (
    canonical_form,
    enumerate_classes,
    find_lagrangian_exhaustive,
    isometry_matrix,
)
from formintegral import (
    definite_isometry,
    find_lagrangian_invariant,
    require_integral,
    standard_basis,
)

logger = logging.getLogger(__name__)

INDEFINITE_REASON = "indefinite unimodular forms over Z are classified by rank, signature and parity"


# Lagrangians


def is_lagrangian(F: UnimodularForm, L: Matrix) -> bool:
    """
    L (columns) spans a direct summand of half rank on which b and q vanish
    and for which L -> Hom(P/L, R) is an isomorphism.
    """
    n = F.rank
    if L.rows != n or 2 * L.cols != n:
        return False
    zero = F.param.q_zero()
    cols = [L.col(i) for i in range(L.cols)]
    for i, u in enumerate(cols):
        if eval_q(F, u) != zero:
            return False
        for v in cols[i:]:
            if F.b(u, v) != 0:
                return False
    if n == 0:
        return True
    ring = F.ring
    for M in (L, L.T @ F.gram):
        dec = snf(M)
        if dec.rank != L.cols or not all(ring.is_unit(d) for d in dec.invariant_factors()):
            return False
    return True


def find_lagrangian(F: UnimodularForm, mode: str = "auto", rank_cap: Optional[int] = None) -> Optional[Matrix]:
    """
    A Lagrangian of F (basis as columns) or None.

    mode 'exhaustive' searches all subspaces over a prime field and is
    complete up to the rank cap; mode 'invariant' decides over Z from
    signature, rank and Arf invariant and constructs a witness by splitting
    hyperbolic planes.
    """
    ring = F.ring
    if mode == "auto":
        mode = "invariant" if ring.is_integers else "exhaustive"
    if mode == "exhaustive":
        if not ring.is_finite:
            raise UnsupportedError("exhaustive Lagrangian search needs a finite ring")
        L = find_lagrangian_exhaustive(F, rank_cap)
    elif mode == "invariant":
        if not ring.is_integers:
            raise UnsupportedError("invariant Lagrangian search works over Z")
        L = find_lagrangian_invariant(F)
    else:
        raise ValidationError(f"Unknown Lagrangian mode '{mode}'")
    if L is not None and not is_lagrangian(F, L):
        raise ConventionError(f"Constructed subspace is not a Lagrangian of {F}")
    return L


def diagonal_lagrangian(F: UnimodularForm) -> Tuple[UnimodularForm, Matrix]:
    """(P, q) + (P, -q) together with its diagonal {(x, x)}"""
    n = F.rank
    total = orthogonal_sum(F, negate(F))
    ident = Matrix.identity(F.ring, n)
    return total, vstack(F.ring, n, ident, ident)


# Isometry


@dataclass(frozen=True)
class IsometryVerdict:
    """Outcome of is_isometric: 'yes', 'no' or 'unknown'"""

    verdict: str
    isometry: Optional[Isometry] = None
    reason: str = ""

    def to_json(self) -> Dict:
        out = {"verdict": self.verdict, "reason": self.reason}
        if self.isometry is not None:
            out["isometry"] = self.isometry.to_json()
        return out


def _finite_difference(F: UnimodularForm, G: UnimodularForm) -> str:
    if F.ring.modulus != 2 and discriminant_class(F) != discriminant_class(G):
        return "discriminant class"
    if F.param.flavor == "quadratic" and F.ring.modulus == 2 and arf(F) != arf(G):
        return "Arf invariant"
    return "canonical forms differ"


def _isometry_from_bases(F: UnimodularForm, G: UnimodularForm,
                         P_F: Optional[Matrix], P_G: Optional[Matrix]) -> Optional[Isometry]:
    if P_F is None or P_G is None:
        return None
    try:
        return Isometry(F, G, P_G @ P_F.inverse())
    except ValidationError:
        return None


def is_isometric(F: UnimodularForm, G: UnimodularForm) -> IsometryVerdict:
    if F.param != G.param:
        raise ValidationError(f"is_isometric: parameters differ ({F.param.name} vs {G.param.name})")
    if F.rank != G.rank:
        return IsometryVerdict("no", reason="rank")
    ring = F.ring
    if ring.is_field:
        U = isometry_matrix(F, G)
        if U is None:
            return IsometryVerdict("no", reason=_finite_difference(F, G))
        return IsometryVerdict("yes", Isometry(F, G, U), "orbit search")
    if ring.is_finite:
        raise UnsupportedError(f"is_isometric over {ring.name} is not supported")
    require_integral(F, "is_isometric")
    if F.param.epsilon == -1:
        if F.param.flavor == "quadratic" and F.rank:
            if arf(reduce_mod2_quadratic(F)) != arf(reduce_mod2_quadratic(G)):
                return IsometryVerdict("no", reason="Arf invariant")
        iso = _isometry_from_bases(F, G, standard_basis(F), standard_basis(G))
        return IsometryVerdict("yes", iso, "alternating unimodular forms are classified by rank and Arf invariant")
    sig_f, sig_g = signature(F), signature(G)
    if sig_f != sig_g:
        return IsometryVerdict("no", reason="signature")
    if parity(F) != parity(G):
        return IsometryVerdict("no", reason="parity")
    if abs(sig_f) == F.rank:
        if F.rank > config.ORBIT_RANK_CAP:
            return IsometryVerdict("unknown", reason=f"definite of rank {F.rank} beyond the short-vector cap")
        U = definite_isometry(F, G)
        if U is None:
            return IsometryVerdict("no", reason="no isometry among short vectors")
        return IsometryVerdict("yes", Isometry(F, G, U), "short-vector search")
    iso = None
    if sig_f == 0:
        iso = _isometry_from_bases(F, G, standard_basis(F), standard_basis(G))
    return IsometryVerdict("yes", iso, INDEFINITE_REASON)


def is_hyperbolic_summand(F: UnimodularForm, rank_cap: Optional[int] = None) -> Optional[UnimodularForm]:
    """A form G with F + G isometric to a hyperbolic form, searched up to the cap"""
    cap = rank_cap if rank_cap is not None else config.ORBIT_RANK_CAP
    classes = enumerate_classes(F.param, cap)
    for k in range((F.rank + 1) // 2, cap // 2 + 1):
        target = canonical_form(hyperbolic(F.param, k)).key
        for G in classes.get(2 * k - F.rank, []):
            if canonical_form(orthogonal_sum(F, G.form)).key == target:
                return G.form
    return None


# Groups


@dataclass(frozen=True)
class GroupComputation:
    """
    A computed group together with where its generators land: over a finite
    field the classes are generators; over Z the group is the subgroup of an
    invariant group spanned by the given forms.
    """

    group: AbelianGroupPresentation
    images: Tuple[Tuple[str, Tuple[int, ...]], ...] = ()
    invariant_names: Tuple[str, ...] = ()
    ambient: str = ""
    subgroup: str = ""
    classes: Tuple[Tuple[int, int], ...] = field(default=())

    def describe(self) -> str:
        if self.subgroup:
            return f"{self.group.describe()}  ({self.subgroup} inside {self.ambient})"
        return self.group.describe()

    def to_json(self) -> Dict:
        out = {
            "group": self.group.to_json(),
            "description": self.describe(),
            "images": {label: list(v) for label, v in self.images},
        }
        if self.invariant_names:
            out["invariants"] = list(self.invariant_names)
        if self.ambient:
            out["ambient"] = self.ambient
            out["subgroup"] = self.subgroup
        if self.classes:
            out["classes_by_rank"] = {str(r): c for r, c in self.classes}
        return out


def _describe_factor(d: int, m: int) -> str:
    if m:
        return f"Z/{m}" if d == 1 else f"{d}Z/{m}"
    return "Z" if d == 1 else f"{d}Z"


def subgroup_of_invariants(images: Sequence[Tuple[str, Tuple[int, ...]]],
                           moduli: Tuple[int, ...]) -> Tuple[AbelianGroupPresentation, str, str, Tuple]:
    """
    The subgroup of Z^a + (+)Z/m_i spanned by the image vectors (modulus 0
    marks a free coordinate), its abstract structure and descriptions.
    """
    k = len(moduli)
    ambient = " (+) ".join(_describe_factor(1, m) for m in moduli) or "0"
    rows = [list(v) for _, v in images] + [[m if i == j else 0 for j in range(k)]
                                           for i, m in enumerate(moduli) if m]
    if not rows or k == 0:
        return AbelianGroupPresentation(0), "0", ambient, tuple((lab, ()) for lab, _ in images)
    H = hermite_rows(Matrix.from_rows(ZZ, rows, cols=k))
    r = H.rows
    if r == 0:
        return AbelianGroupPresentation(0), "0", ambient, tuple((lab, ()) for lab, _ in images)
    HT = H.T
    relations = []
    for i, m in enumerate(moduli):
        if m:
            c = solve(HT, Matrix.column(ZZ, [m if j == i else 0 for j in range(k)]))
            relations.append(c.col(0))
    rel = Matrix.from_columns(ZZ, relations, r) if relations else Matrix.zeros(ZZ, r, 0)
    group = cokernel_presentation(rel)
    coords = []
    for label, v in images:
        c = solve(HT, Matrix.column(ZZ, list(v)))
        coords.append((label, group.coordinates(c.col(0))))
    if r == k and all(H[i, j] == 0 for i in range(r) for j in range(k) if i != j):
        sub = " (+) ".join(_describe_factor(H[i, i], moduli[i]) for i in range(k))
    else:
        sub = f"lattice with Hermite basis {H.tolist()}"
    return group.with_labels(dict(coords)), sub, ambient, tuple(coords)


def _integral_gw_coordinates(F: UnimodularForm) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[str, ...]]:
    p = F.param
    if p.epsilon == 1:
        pos, neg = inertia(F)
        return (pos - neg, pos), (0, 0), ("signature", "positive_rank")
    if p.flavor == "quadratic":
        return (F.rank // 2, arf(reduce_mod2_quadratic(F)) if F.rank else 0), (0, 2), ("half_rank", "arf")
    return (F.rank // 2,), (0,), ("half_rank",)


def _integral_witt_coordinates(F: UnimodularForm) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[str, ...]]:
    p = F.param
    if p.epsilon == 1:
        pos, neg = inertia(F)
        return (pos - neg,), (0,), ("signature",)
    if p.flavor == "quadratic":
        return (arf(reduce_mod2_quadratic(F)) if F.rank else 0,), (2,), ("arf",)
    return (), (), ()


def default_generators(param: FormParameter) -> List[Tuple[str, UnimodularForm]]:
    """Forms generating GW0 over Z for the canonical flavors"""
    if param.epsilon == 1 and param.flavor == "symmetric":
        return [("<1>", diagonal(param, [1])), ("<-1>", diagonal(param, [-1]))]
    if param.epsilon == 1:
        return [("E8", e8(param)), ("H", hyperbolic(param, 1))]
    gens = [("H", hyperbolic(param, 1))]
    if param.flavor == "quadratic":
        gens.append(("A", make_form(param, [[0, 1], [-1, 0]], [1, 1])))
    return gens


def _integral_group(param: FormParameter, generators, coordinates) -> GroupComputation:
    if param.flavor not in ("symmetric", "quadratic"):
        raise UnsupportedError(f"Group computations over Z support symmetric and quadratic flavors, not {param.flavor}")
    gens = list(generators) if generators else default_generators(param)
    images = []
    names: Tuple[str, ...] = ()
    moduli: Tuple[int, ...] = ()
    for label, F in gens:
        if F.param != param:
            raise ValidationError(f"Generator {label} is over {F.param.name}, expected {param.name}")
        coords, moduli, names = coordinates(F)
        images.append((label, coords))
    if not images:
        coords, moduli, names = coordinates(make_form(param, []))
    group, sub, ambient, _ = subgroup_of_invariants(images, moduli)
    return GroupComputation(group, tuple(images), names, ambient, sub)


def _finite_group(param: FormParameter, generators, rank_cap: Optional[int], jobs: int,
                  kill_metabolic: bool) -> GroupComputation:
    classes = enumerate_classes(param, rank_cap, jobs)
    index: Dict[Tuple, int] = {}
    labels: List[str] = []
    ranks: Dict[Tuple, int] = {}
    for r in sorted(classes):
        if r == 0:
            continue
        for i, c in enumerate(classes[r]):
            index[c.key] = len(labels)
            labels.append(f"r{r}#{i}")
            ranks[c.key] = r
    cap = max(classes)
    relations = []
    all_classes = [c for r in sorted(classes) if r for c in classes[r]]
    for a_pos, A in enumerate(all_classes):
        for B in all_classes[a_pos:]:
            if ranks[A.key] + ranks[B.key] > cap:
                continue
            S = canonical_form(orthogonal_sum(A.form, B.form)).key
            col = [0] * len(labels)
            col[index[A.key]] += 1
            col[index[B.key]] += 1
            col[index[S]] -= 1
            relations.append(col)
    metabolic = 0
    if kill_metabolic:
        for C in all_classes:
            if ranks[C.key] % 2 == 0 and find_lagrangian_exhaustive(C.form, cap) is not None:
                col = [0] * len(labels)
                col[index[C.key]] = 1
                relations.append(col)
                metabolic += 1
        logger.info(f"{metabolic} metabolic classes set to zero")
    rel = Matrix.from_columns(ZZ, relations, len(labels)) if relations else Matrix.zeros(ZZ, len(labels), 0)
    group = cokernel_presentation(rel)
    images = []
    for label, C in zip(labels, all_classes):
        images.append((label, group.coordinates([int(C.key == D.key) for D in all_classes])))
    for label, F in (generators or []):
        key = canonical_form(F).key
        if key not in index:
            raise ValidationError(f"Generator {label} has rank above the cap {cap}")
        images.append((label, group.coordinates([int(key == D.key) for D in all_classes])))
    counts = tuple((r, len(classes[r])) for r in sorted(classes))
    return GroupComputation(group.with_labels(dict(images)), tuple(images), classes=counts)


def gw0(param: FormParameter, generators: Optional[Sequence[Tuple[str, UnimodularForm]]] = None,
        rank_cap: Optional[int] = None, jobs: int = 1) -> GroupComputation:
    """
    Grothendieck group of the monoid of isometry classes under orthogonal sum.

    Over a prime field: generated by all classes up to rank_cap with
    relations [A] + [B] = [A + B] whenever the sum stays within the cap.
    Over Z: the subgroup spanned by the generators in invariant coordinates
    ((signature, positive rank) for epsilon = +1).
    """
    if param.ring.is_integers:
        result = _integral_group(param, generators, _integral_gw_coordinates)
    elif param.ring.is_field:
        result = _finite_group(param, generators, rank_cap, jobs, kill_metabolic=False)
    else:
        raise UnsupportedError(f"gw0 over {param.ring.name} is not supported")
    logger.info(f"GW0 for {param.name}: {result.describe()}")
    return result


def witt_group(param: FormParameter, rank_cap: Optional[int] = None, jobs: int = 1,
               generators: Optional[Sequence[Tuple[str, UnimodularForm]]] = None) -> GroupComputation:
    """gw0 modulo the classes that admit a Lagrangian"""
    if param.ring.is_integers:
        result = _integral_group(param, generators, _integral_witt_coordinates)
    elif param.ring.is_field:
        result = _finite_group(param, generators, rank_cap, jobs, kill_metabolic=True)
    else:
        raise UnsupportedError(f"witt_group over {param.ring.name} is not supported")
    logger.info(f"Witt group for {param.name}: {result.describe()}")
    return result
