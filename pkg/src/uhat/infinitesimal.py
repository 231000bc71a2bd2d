"""Infinitesimal actions, Fitting chains and the chart-level conditions.

The infinitesimal action of a filtration piece pairs ring differentials
against derivation values.  Relative maps along the weight filtration are
presented by matrices over the algebra; their Fitting ideals decide the
"semistability equals stability" and constant-relative-stabiliser-dimension
conditions on an affine chart, and evaluation at rational points recovers
stabiliser dimensions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from uhat.rings import (
    FreeModuleMap,
    Ideal,
    left_nullspace,
    matrix_rank,
    minors_ideal_generators,
    right_nullspace,
    syzygy_kernel,
    unit_certificate,
)


@dataclass(frozen=True)
class InfinitesimalMatrix:
    """Derivative values of ring generators under a filtration subspace.

    Rows follow the Lie basis order restricted to the subspace; columns are
    the ring generators (differentials of the presentation).
    """

    basis_indices: tuple  # lie basis indices, weight order
    generators: tuple  # ring generator names
    entries: tuple  # rows of Polynomial

    def row(self, k):
        return list(self.entries[k])

    def evaluate(self, point):
        return [[p.evaluate(point) for p in row] for row in self.entries]


@dataclass(frozen=True)
class PresentedModuleMap:
    """Matrix presentation of one relative map along the weight filtration.

    `domain_generators` are kernel generators of the previous filtration
    stage written over the generator differentials; `pairing[mu][j]` is the
    value of the j-th generator against the mu-th new basis vector.
    """

    domain_generators: tuple  # tuple of tuples of Polynomial, coords over dg
    target_rank: int
    pairing: tuple  # target_rank rows, one column per domain generator


@dataclass(frozen=True)
class FittingChain:
    target_rank: int
    ideals: dict  # k -> Ideal (generators stored as normal forms)

    def ideal(self, k):
        return self.ideals[max(-1, min(k, self.target_rank))]


def infinitesimal_matrix(action, upto_level=None):
    """Pairing matrix of the filtration subspace u_i on the chart algebra."""
    lie = action.lie
    if upto_level is None:
        upto_level = lie.nlevels
    rows = lie.filtration_indices(upto_level)
    names = action.ring.names
    entries = tuple(
        tuple(action.algebra.nf(action.image_of_generator(i, g)) for g in names) for i in rows
    )
    return InfinitesimalMatrix(tuple(rows), tuple(names), entries)


def kernel_generators(action, upto_level):
    """Generators of ker(differentials -> u_i-pairings) over the algebra.

    For level zero the kernel is the full differential module, free on the
    generator differentials.  Otherwise the generators come from module
    syzygies of the pairing matrix, computed modulo the relations ideal.
    """
    ring = action.ring
    n = ring.nvars
    if upto_level == 0 or not action.lie.filtration_indices(upto_level):
        return [tuple(ring.one() if i == j else ring.zero() for j in range(n)) for i in range(n)]
    mat = infinitesimal_matrix(action, upto_level)
    fmap = FreeModuleMap(n, len(mat.basis_indices), mat.entries)
    rels = action.algebra.relations.groebner()
    return [tuple(v) for v in syzygy_kernel(fmap, rels)]


def relative_map(action, i):
    """The map from the level-(i-1) kernel into the level-i dual block."""
    lie = action.lie
    if not 1 <= i <= lie.nlevels:
        raise ValueError(f"level {i} out of range")
    level_rows = lie.level_indices(i - 1)
    domain = kernel_generators(action, i - 1)
    names = action.ring.names
    pairing = []
    for mu in level_rows:
        row = []
        for gen in domain:
            val = action.ring.zero()
            for c, g in zip(gen, names):
                if c:
                    val = val + c * action.image_of_generator(mu, g)
            row.append(action.algebra.nf(val))
        pairing.append(tuple(row))
    return PresentedModuleMap(tuple(domain), len(level_rows), tuple(pairing))


def fitting_chain_from_matrix(algebra, rows, target_rank):
    """Fitting ideals of the cokernel presented by the given matrix."""
    ring = algebra.ring
    ideals = {}
    for k in range(-1, target_rank + 1):
        size = target_rank - k
        if size <= 0:
            ideals[k] = Ideal(ring, [ring.one()])
            continue
        gens = []
        for m in minors_ideal_generators([list(r) for r in rows], size):
            m = algebra.nf(m)
            if m:
                gens.append(m)
        ideals[k] = Ideal(ring, gens)
    return FittingChain(target_rank, ideals)


def fitting_chain(algebra, pmap):
    return fitting_chain_from_matrix(algebra, pmap.pairing, pmap.target_rank)


def min_nonzero_fitting(chain):
    """Smallest k with a nonzero Fitting ideal (modulo the relations)."""
    for k in range(0, chain.target_rank + 1):
        if chain.ideal(k).generators:
            return k
    return chain.target_rank


def validate_point(algebra, point):
    """Check a rational point against the relations; return violations."""
    bad = []
    for rel in algebra.relations.generators:
        v = rel.evaluate(point)
        if v != 0:
            bad.append((rel, v))
    return bad


def stabiliser_at_point(action, upto_level, point):
    """Stabiliser subspace at a rational point, via exact rank computation.

    Returns (dimension, basis) where each basis element is a coefficient
    vector over the subspace basis.  Points violating a relation are
    rejected.
    """
    bad = validate_point(action.algebra, point)
    if bad:
        raise ValueError(f"point violates relation {bad[0][0]} (value {bad[0][1]})")
    mat = infinitesimal_matrix(action, upto_level)
    if not mat.basis_indices:
        return 0, []
    rows = mat.evaluate(point)
    basis = left_nullspace(rows)
    return len(basis), basis


def relative_stabiliser_dim(action, i, point, chain=None):
    """Dimension of the relative stabiliser at a point, with a Fitting check.

    The returned value is the corank of the evaluated pairing matrix; as a
    runtime self-check it is compared against the vanishing pattern of the
    Fitting chain at the point (dim > k iff every generator of Fit_k
    vanishes there).
    """
    bad = validate_point(action.algebra, point)
    if bad:
        raise ValueError(f"point violates relation {bad[0][0]} (value {bad[0][1]})")
    pmap = relative_map(action, i)
    if pmap.target_rank == 0:
        return 0
    rows = [[p.evaluate(point) for p in row] for row in pmap.pairing]
    dim = pmap.target_rank - matrix_rank(rows)
    if chain is None:
        chain = fitting_chain(action.algebra, pmap)
    for k in range(-1, chain.target_rank + 1):
        vanish = all(g.evaluate(point) == 0 for g in chain.ideal(k).generators)
        if (dim > k) != vanish:
            raise RuntimeError(
                f"Fitting/corank mismatch at level {i}, k={k}: dim={dim}, vanishing={vanish}"
            )
    return dim


def check_ss_eq_s(action):
    """Whether semistability coincides with stability on the chart.

    True iff the zeroth Fitting ideal of the full infinitesimal action is
    the unit ideal modulo relations.  The certificate is either an exact
    cofactor expression of 1 over the maximal minors and the relations, or
    the nonunit generators of the ideal.
    """
    algebra = action.algebra
    if algebra.is_empty():
        return True, {"empty_chart": True}
    mat = infinitesimal_matrix(action)
    r = len(mat.basis_indices)
    if r == 0:
        return True, {"vacuous": True, "detail": "zero-dimensional group"}
    minors = [algebra.nf(m) for m in minors_ideal_generators([list(x) for x in mat.entries], r)]
    minors = [m for m in minors if m]
    rels = list(algebra.relations.generators)
    cert = unit_certificate(minors + rels) if minors else None
    if cert is not None:
        return True, {
            "unit_combination": {
                str(g): str(c) for g, c in zip(minors + rels, cert) if not c.is_zero()
            }
        }
    return False, {"fit0_generators": [str(m) for m in minors]}


def check_cdrs(action):
    """Per-level constant-rank report for the relative maps.

    Each level reports k_i and whether Fit_{k_i - 1} vanishes while
    Fit_{k_i} is the unit ideal; the condition holds iff both do at every
    level.  Empty charts and zero-dimensional groups are vacuous successes.
    """
    algebra = action.algebra
    report = {"holds": True, "levels": {}}
    if algebra.is_empty():
        report["empty_chart"] = True
        return report
    if action.lie.nlevels == 0:
        report["vacuous"] = True
        return report
    for i in range(1, action.lie.nlevels + 1):
        pmap = relative_map(action, i)
        chain = fitting_chain(algebra, pmap)
        k = min_nonzero_fitting(chain)
        below_zero = not chain.ideal(k - 1).generators
        unit = Ideal(algebra.ring, list(chain.ideal(k).generators) + list(algebra.relations.generators)).is_unit()
        report["levels"][i] = {
            "k": k,
            "fit_below_zero": below_zero,
            "fit_unit": unit,
            "fit_k_generators": [str(g) for g in chain.ideal(k).generators],
            "fit_below_generators": [str(g) for g in chain.ideal(k - 1).generators],
        }
        if not (below_zero and unit):
            report["holds"] = False
    return report


def enumerate_kernel_linear(action, upto_level, degree):
    """Degree-bounded kernel vectors of the filtration pairing, by linear algebra.

    Independent oracle for syzygy completeness: unknowns are the rational
    coefficients of each coordinate polynomial up to the degree bound, and
    the pairing conditions reduce to an exact linear system in them.
    """
    algebra = action.algebra
    ring = action.ring
    mat = infinitesimal_matrix(action, upto_level)
    ncols = len(mat.generators)
    monos = []
    for d in range(degree + 1):
        monos.extend(ring.monomials_of_degree(d))
    unknowns = [(j, m) for j in range(ncols) for m in monos]
    # value monomial basis: collect support of all products NF(m * entry)
    rows_eqs = []
    support = {}
    products = {}
    for ri in range(len(mat.basis_indices)):
        for j, m in unknowns:
            p = algebra.nf(mat.entries[ri][j].term_mul(Fraction(1), m))
            products[(ri, j, m)] = p
            for mm in p.terms:
                support.setdefault((ri, mm), len(support))
    unknown_col = {u: t for t, u in enumerate(unknowns)}
    if not support:
        eqs = []
    else:
        eqs = [[Fraction(0)] * len(unknowns) for _ in range(len(support))]
        for (ri, j, m), p in products.items():
            col = unknown_col[(j, m)]
            for mm, c in p.terms.items():
                eqs[support[(ri, mm)]][col] += c
    basis = right_nullspace(eqs) if eqs else [
        [Fraction(1) if t == s else Fraction(0) for t in range(len(unknowns))]
        for s in range(len(unknowns))
    ]
    out = []
    for vec in basis:
        coords = [ring.zero() for _ in range(ncols)]
        for (j, m), c in zip(unknowns, vec):
            if c:
                coords[j] = coords[j] + ring.monomial(m, c)
        out.append(tuple(coords))
    return out


def verify_snake_exactness(action, i, degree=2):
    """Exactness of coker(relative map) -> Q(u_i) -> Q(u_{i-1}) -> 0, truncated.

    Surjectivity on the right is by construction; the content checked here
    is that the kernel of the projection is exactly the image of the
    relative cokernel, i.e. that the computed kernel generators are
    complete up to the degree bound.
    """
    from uhat.rings import module_groebner, module_normal_form

    algebra = action.algebra
    ring = action.ring
    lie = action.lie
    mat_i = infinitesimal_matrix(action, i)
    rows_prev = len(lie.filtration_indices(i - 1))
    rows_all = len(mat_i.basis_indices)
    r_i = rows_all - rows_prev
    pmap = relative_map(action, i)

    # span of the full pairing columns plus relation multiples, in A^{rows_all}
    gens = []
    for j in range(len(mat_i.generators)):
        v = {k: mat_i.entries[k][j] for k in range(rows_all) if mat_i.entries[k][j]}
        if v:
            gens.append(v)
    for f in algebra.relations.groebner():
        for k in range(rows_all):
            gens.append({k: f})
    gb_big = module_groebner(gens, ring, rows_all)

    # span of the relative pairing columns plus relations, in A^{r_i}
    gens_n = []
    for col in range(len(pmap.domain_generators)):
        v = {mu: pmap.pairing[mu][col] for mu in range(r_i) if pmap.pairing[mu][col]}
        if v:
            gens_n.append(v)
    for f in algebra.relations.groebner():
        for mu in range(r_i):
            gens_n.append({mu: f})
    gb_small = module_groebner(gens_n, ring, r_i)

    # image of the relative cokernel lies in the kernel of the projection
    for col in range(len(pmap.domain_generators)):
        v = {rows_prev + mu: pmap.pairing[mu][col] for mu in range(r_i) if pmap.pairing[mu][col]}
        if module_normal_form(v, gb_big, ring, rows_all):
            return False

    # completeness: every degree-bounded kernel vector pairs into the span
    for coords in enumerate_kernel_linear(action, i - 1, degree):
        v = {}
        for mu in range(r_i):
            val = ring.zero()
            row = lie.level_indices(i - 1)[mu]
            for c, g in zip(coords, mat_i.generators):
                if c:
                    val = val + c * action.image_of_generator(row, g)
            val = algebra.nf(val)
            if val:
                v[mu] = val
        if v and module_normal_form(v, gb_small, ring, r_i):
            return False
    return True
