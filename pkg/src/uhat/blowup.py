"""One-step blow-up producing constant relative stabiliser dimensions.

The centre is cut out by the sweep ideal of the locus where the minimal
Fitting ideals vanish inside the weight-zero stratum.  Determinantal
witnesses give a distinguished degree-one element `a`; row-replacement
determinants build the recursive elements whose chart differentials carry a
unit pairing block, which is what makes the blown-up chart pass the
constant-rank condition.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from uhat.rings import (
    GradedRing,
    Ideal,
    PresentedAlgebra,
    determinant,
    groebner_basis,
    normal_form_list,
)
from uhat.rings import eliminate as ring_eliminate
from uhat.lie import DerivationAction, pbw_word
from uhat.infinitesimal import (
    check_cdrs,
    fitting_chain,
    min_nonzero_fitting,
    relative_map,
    stabiliser_at_point,
)
from uhat.quotient import BoundExhausted


class NoBlowupNeeded(Exception):
    pass


class VerificationFailed(Exception):
    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance


def negative_weight_variables(ring):
    return [n for n, w in zip(ring.names, ring.weights) if w < 0]


@dataclass(frozen=True)
class LevelWitness:
    """Row subset and weight-homogeneous functions behind one minor a^(i)."""

    level: int  # 1-based
    weight: int
    split_rows: tuple  # lie basis indices, length r_i - k_i
    rest_rows: tuple
    functions: tuple  # Polynomial, weight -w_i
    minor: tuple = ()  # (Polynomial,) boxed to keep the dataclass hashable

    @property
    def a(self):
        return self.minor[0]

    @property
    def need(self):
        return len(self.split_rows)


@dataclass
class CentreData:
    k_vector: tuple
    witnesses: list  # LevelWitness per level
    product_ideal: Ideal  # product of the minimal nonzero Fitting ideals
    centre_ideal: Ideal  # product ideal + negative weight part

    @property
    def a(self):
        out = None
        for w in self.witnesses:
            out = w.a if out is None else out * w.a
        return out

    def a_prefix(self, i):
        """Product of the witness minors of levels strictly below i."""
        ring = self.witnesses[0].a.ring
        out = ring.one()
        for w in self.witnesses:
            if w.level < i:
                out = out * w.a
        return out

    def a_suffix(self, i):
        """Product of the witness minors of levels >= i."""
        ring = self.witnesses[0].a.ring
        out = ring.one()
        for w in self.witnesses:
            if w.level >= i:
                out = out * w.a
        return out


@dataclass
class BElements:
    per_level: dict  # level -> list of Polynomial


# ---------------------------------------------------------------------------
# the Weak Unipotent Upstairs condition


def level_fitting_data(action):
    """Chains and minimal nonzero indices for every filtration level."""
    chains = {}
    ks = []
    for i in range(1, action.lie.nlevels + 1):
        chain = fitting_chain(action.algebra, relative_map(action, i))
        chains[i] = chain
        ks.append(min_nonzero_fitting(chain))
    return chains, tuple(ks)


def product_fitting_ideal(action, chains=None, ks=None):
    if chains is None:
        chains, ks = level_fitting_data(action)
    ring = action.ring
    gens = [ring.one()]
    for i, k in zip(range(1, action.lie.nlevels + 1), ks):
        level_gens = chains[i].ideal(k).generators
        gens = [action.algebra.nf(g * h) for g in gens for h in level_gens]
        gens = [g for g in gens if g]
    return Ideal(ring, gens)


def check_wuu(action, reduced=False, rng=None, sample_count=20):
    """Whether the weight-zero stratum meets the minimal-rank locus.

    Decided exactly: the product of the minimal nonzero Fitting ideals must
    not be contained in relations + negative-weight part.  With the reduced
    flag a rational witness point with the expected stabiliser dimension
    pattern is searched for by sampling the weight-zero locus.
    """
    algebra = action.algebra
    ring = action.ring
    if algebra.is_empty():
        return True, {"empty_chart": True, "k_vector": ()}
    chains, ks = level_fitting_data(action)
    prod = product_fitting_ideal(action, chains, ks)
    stratum = Ideal(
        ring,
        list(algebra.relations.generators) + [ring.var(n) for n in negative_weight_variables(ring)],
    )
    nonzero = [g for g in prod.generators if not stratum.contains(g)]
    info = {"k_vector": ks, "product_generators": [str(g) for g in prod.generators]}
    if not nonzero:
        return False, info
    info["weight_zero_generator"] = str(nonzero[0])
    if reduced:
        witness = _witness_point(action, ks, rng, sample_count)
        info["witness"] = (
            {n: str(v) for n, v in witness.items()} if witness is not None else None
        )
    return True, info


def _witness_point(action, ks, rng, sample_count):
    import random

    rng = rng or random.Random(0)
    ring = action.ring
    neg = set(negative_weight_variables(ring))
    zero_vars = [n for n in ring.names if n not in neg]
    partial = list(ks)
    targets = [sum(partial[: i + 1]) for i in range(len(ks))]
    for trial in range(sample_count):
        point = {n: Fraction(0) for n in neg}
        for n in zero_vars:
            point[n] = Fraction(rng.randint(-3, 3) if trial else 1)
        if any(rel.evaluate(point) != 0 for rel in action.algebra.relations.generators):
            continue
        ok = True
        for i in range(1, action.lie.nlevels + 1):
            dim, _ = stabiliser_at_point(action, i, point)
            if dim != targets[i - 1]:
                ok = False
                break
        if ok:
            return point
    return None


# ---------------------------------------------------------------------------
# centre of the blow-up


def centre(action, degree_bound=8):
    """Select determinantal witnesses and assemble the centre ideal.

    Witness functions are enumerated degree by degree among the standard
    monomials of the level weight, over all row subsets of the level basis;
    the first nonzero minor modulo the relations wins, and the basis is
    reordered so the chosen minor sits in the top-left block.
    """
    algebra = action.algebra
    ring = action.ring
    cdrs = check_cdrs(action)
    if cdrs["holds"]:
        raise NoBlowupNeeded("constant-rank condition already holds; no blow-up needed")
    chains, ks = level_fitting_data(action)
    witnesses = []
    for i in range(1, action.lie.nlevels + 1):
        w = action.lie.weights[i - 1]
        rows = action.lie.level_indices(i - 1)
        need = len(rows) - ks[i - 1]
        if need == 0:
            witnesses.append(LevelWitness(i, w, (), tuple(rows), (), (ring.one(),)))
            continue
        found = None
        for deg in range(1, degree_bound + 1):
            monos = algebra.standard_monomials(weight=-w, max_degree=deg)
            cands = [ring.monomial(m) for m in monos]
            for fns in itertools.combinations(cands, need):
                for split in itertools.combinations(rows, need):
                    mat = [[algebra.nf(action.apply_basis(mu, f)) for f in fns] for mu in split]
                    minor = algebra.nf(determinant(mat))
                    if minor:
                        found = (split, fns, minor)
                        break
                if found:
                    break
            if found:
                break
        if found is None:
            raise BoundExhausted(
                f"no nonzero witness minor of degree <= {degree_bound} at level {i}",
                degree_bound,
            )
        split, fns, minor = found
        if minor.weight_decompose().keys() - {0}:
            raise VerificationFailed(f"witness minor at level {i} is not weight zero", str(minor))
        chain_ideal = Ideal(
            ring,
            list(chains[i].ideal(ks[i - 1]).generators) + list(algebra.relations.generators),
        )
        if not chain_ideal.contains(minor):
            raise VerificationFailed(
                f"witness minor at level {i} does not lie in its Fitting ideal", str(minor)
            )
        rest = tuple(r for r in rows if r not in split)
        witnesses.append(LevelWitness(i, w, tuple(split), rest, tuple(fns), (minor,)))
    prod = product_fitting_ideal(action, chains, ks)
    centre_ideal = Ideal(
        ring,
        [g for g in prod.generators]
        + [ring.var(n) for n in negative_weight_variables(ring)],
    )
    return CentreData(ks, witnesses, prod, centre_ideal)


# ---------------------------------------------------------------------------
# the sweep ideal membership oracle


def j_membership(action, ideal, g, include_relations=True):
    """Whether every iterated derivative of g lies in the ideal.

    The test set is the finite family of PBW monomials whose weight does not
    exceed the negative of the minimal weight of g; grading nilpotency kills
    everything beyond.  Returns (bool, witness) with the failing monomial
    and value on the negative side.
    """
    algebra = action.algebra
    gens = list(ideal.generators)
    if include_relations:
        gens += list(algebra.relations.generators)
    test = Ideal(action.ring, gens)
    g = algebra.nf(g)
    bound = max(0, -g.min_weight())
    for p in action.lie.pbw_monomials_of_weight(bound, exact=False):
        val = action.apply_pbw(p, g)
        if not test.contains(val):
            return False, {"pbw": p, "value": str(val)}
    return True, None


# ---------------------------------------------------------------------------
# determinantal operators


def E_operator(action, witness, mu, uea_element):
    """Row-replacement determinant against the witness functions.

    `uea_element` is a map word-tuple -> Fraction acting through the
    derivation action; the empty word acts as the scalar it carries.  The
    mu-th row of the witness pairing matrix is replaced by the images of the
    witness functions.
    """
    algebra = action.algebra
    fns = witness.functions
    rows = []
    for nu in range(witness.need):
        if nu == mu:
            rows.append([algebra.nf(action.apply_uea(uea_element, f)) for f in fns])
        else:
            r = witness.split_rows[nu]
            rows.append([algebra.nf(action.apply_basis(r, f)) for f in fns])
    return algebra.nf(determinant(rows))


def uea_scalar(c):
    return {(): Fraction(c)}


def uea_letter(i, c=1):
    return {(i,): Fraction(c)}


def uea_from_lie(el):
    return {(i,): Fraction(c) for i, c in el.items() if c}


def uea_concat(el, word):
    """Right-multiply a UEA element by a fixed word."""
    return {w + tuple(word): c for w, c in el.items()}


def verify_determinantal_sum(action, witness, h, lie_element):
    """Check sum_mu (xi_mu . h) E_mu(A) = (A . h) a^(i) exactly."""
    algebra = action.algebra
    A = uea_from_lie(lie_element)
    lhs = action.ring.zero()
    for mu in range(witness.need):
        lhs = lhs + action.apply_basis(witness.split_rows[mu], h) * E_operator(
            action, witness, mu, A
        )
    rhs = action.apply_uea(A, h) * witness.a
    return algebra.equal(lhs, rhs)


# ---------------------------------------------------------------------------
# the recursive elements and their certificates


def construct_b(action, centre_data, verify=True, check_j=True, pbw_bound=None):
    """Build the level elements by the top-down determinantal recursion.

    For the lowest weight the element is the scalar-row determinant; higher
    levels correct by the lower elements so that the split pairing stays
    diagonal.  All three certificate properties are verified exactly and a
    failure aborts with the failing instance.  `pbw_bound` caps the total
    exponent of the enumerated monomials; the intrinsic weight bound already
    makes the set finite, so the cap only matters for very flat gradings.
    """
    algebra = action.algebra
    lie = action.lie
    n = lie.nlevels
    witnesses = {w.level: w for w in centre_data.witnesses}
    per_level = {}
    for i in range(n, 0, -1):
        wit = witnesses[i]
        out = []
        for mu in range(wit.need):
            total = E_operator(action, wit, mu, uea_scalar(lie.weights[i - 1]))
            total = total * centre_data.a_suffix(i + 1)
            for ip in range(i + 1, n + 1):
                wip = witnesses[ip]
                between = algebra.ring.one()
                for w2 in centre_data.witnesses:
                    if i < w2.level < ip:
                        between = between * w2.a
                for mup in range(wip.need):
                    coeff = E_operator(action, wit, mu, uea_letter(wip.split_rows[mup]))
                    total = total - coeff * between * per_level[ip][mup]
            out.append(algebra.nf(total))
        per_level[i] = out
    elements = BElements(per_level)
    if verify:
        verify_b_properties(action, centre_data, elements, check_j=check_j, pbw_bound=pbw_bound)
    return elements


def verify_b_properties(action, centre_data, elements, check_j=True, pbw_bound=None):
    """The three exact certificates behind the chart unit block."""
    algebra = action.algebra
    lie = action.lie
    witnesses = {w.level: w for w in centre_data.witnesses}
    for i, bs in elements.per_level.items():
        wit = witnesses[i]
        w = lie.weights[i - 1]
        suffix = centre_data.a_suffix(i)
        for nu, b in enumerate(bs):
            comps = b.weight_decompose()
            if set(comps) - {-w}:
                raise VerificationFailed(
                    f"element at level {i} is not weight -{w}", {"level": i, "nu": nu}
                )
            for pos, mu in enumerate(wit.split_rows):
                want = suffix * w if pos == nu else algebra.ring.zero()
                got = action.apply_basis(mu, b)
                if not algebra.equal(got, want):
                    raise VerificationFailed(
                        "diagonal pairing identity failed",
                        {"level": i, "mu": pos, "nu": nu, "got": str(got), "want": str(want)},
                    )
        prod_gens = [algebra.ring.one()]
        for w2 in centre_data.witnesses:
            if w2.level >= i:
                chain = fitting_chain(algebra, relative_map(action, w2.level))
                level_gens = chain.ideal(centre_data.k_vector[w2.level - 1]).generators
                prod_gens = [algebra.nf(g * h) for g in prod_gens for h in level_gens]
        membership = Ideal(
            algebra.ring, [g for g in prod_gens if g] + list(algebra.relations.generators)
        )
        for nu, b in enumerate(bs):
            for p in lie.pbw_monomials_of_weight(w, exact=True):
                if pbw_bound is not None and sum(p) > pbw_bound:
                    continue
                val = action.apply_pbw(p, b)
                if not membership.contains(val):
                    raise VerificationFailed(
                        "derivative left the suffix Fitting product",
                        {"level": i, "nu": nu, "pbw": p, "value": str(val)},
                    )
        if check_j:
            prefix = centre_data.a_prefix(i)
            for nu, b in enumerate(bs):
                ok, witn = j_membership(action, centre_data.centre_ideal, prefix * b)
                if not ok:
                    raise VerificationFailed(
                        "scaled element fails the sweep membership",
                        {"level": i, "nu": nu, "witness": witn},
                    )


def beta_values(action, centre_data, level, mu, p, _witnesses=None):
    """The recursion computing xi^p applied to the level element.

    Follows the complete-bracket expansion: the top term uses the weight of
    the last nonzero block of p, and lower levels are corrected through the
    binomial sum over weight-graded submonomials.
    """
    lie = action.lie
    witnesses = _witnesses or {w.level: w for w in centre_data.witnesses}
    wit = witnesses[level]
    n = lie.nlevels
    last_level = max(lie.levels[idx] for idx, e in enumerate(p) if e)
    w_last = lie.weights[last_level]
    bracket = lie.complete_bracket_pbw(p)
    total = E_operator(action, wit, mu, uea_from_lie(bracket)) * w_last
    if level == n:
        return action.algebra.nf(total)
    total = total * centre_data.a_suffix(level + 1)
    for ip in range(level + 1, n + 1):
        wip = witnesses[ip]
        between = action.ring.one()
        for w2 in centre_data.witnesses:
            if level < w2.level < ip:
                between = between * w2.a
        target = lie.weights[ip - 1]
        for q in _submonomials(p):
            if lie.pbw_weight(q) != target:
                continue
            binom = math.prod(math.comb(pe, qe) for pe, qe in zip(p, q))
            pq = tuple(pe - qe for pe, qe in zip(p, q))
            for mup in range(wip.need):
                word = pbw_word(pq) + (wip.split_rows[mup],)
                br = lie.complete_bracket_word(word)
                coeff = E_operator(action, wit, mu, uea_from_lie(br))
                if coeff.is_zero():
                    continue
                beta_sub = beta_values(action, centre_data, ip, mup, q, witnesses)
                total = total - coeff * between * beta_sub * binom
    return action.algebra.nf(total)


def _submonomials(p):
    return itertools.product(*(range(e + 1) for e in p))


def beta_check(action, centre_data, elements, level, mu, p):
    """Compare the recursion against the direct iterated derivative."""
    lie = action.lie
    if lie.pbw_weight(p) != lie.weights[level - 1]:
        raise ValueError("the monomial weight must match the level weight")
    direct = action.apply_pbw(p, elements.per_level[level][mu])
    via_beta = beta_values(action, centre_data, level, mu, p)
    return action.algebra.equal(direct, via_beta)


# ---------------------------------------------------------------------------
# charts of the blow-up


@dataclass
class BlowupChart:
    base_action: DerivationAction
    centre_data: CentreData
    a: object  # Polynomial in the base ring
    generators: list  # (chart name, base polynomial g) with t = g/a
    algebra: PresentedAlgebra
    action: DerivationAction
    scaled_b_names: dict = field(default_factory=dict)  # level -> list of chart names


def find_j_members(action, ideal, weight, degree):
    """Degree-bounded sweep members of one weight, by exact linear algebra.

    Unknown coefficients over the standard monomials of the given weight are
    constrained by membership of every iterated derivative in the ideal.
    """
    from uhat.rings import right_nullspace

    algebra = action.algebra
    ring = action.ring
    monos = algebra.standard_monomials(weight=weight, max_degree=degree)
    if not monos:
        return []
    test = Ideal(ring, list(ideal.generators) + list(algebra.relations.generators))
    gb = test.groebner()
    support = {}
    cols = []
    bound = max(0, -weight)
    pbws = action.lie.pbw_monomials_of_weight(bound, exact=False)
    for m in monos:
        residues = {}
        for p in pbws:
            val = normal_form_list(action.apply_pbw(p, ring.monomial(m)), gb)
            for mm, c in val.terms.items():
                residues[(p, mm)] = c
                support.setdefault((p, mm), len(support))
        cols.append(residues)
    if not support:
        return [ring.monomial(m) for m in monos]
    rows = [[Fraction(0)] * len(monos) for _ in range(len(support))]
    for j, residues in enumerate(cols):
        for key, c in residues.items():
            rows[support[key]][j] = c
    out = []
    for vec in right_nullspace(rows):
        g = ring.zero()
        for m, c in zip(monos, vec):
            if c:
                g = g + ring.monomial(m, c)
        if not g.is_zero():
            out.append(algebra.nf(g))
    return out


def build_chart(action, centre_data, elements, extra_generators=(), j_search_degree=0):
    """Present the affine blow-up chart at the witness product.

    Chart generators are fractions g/a for the canonical sweep members (the
    witness product itself and the prefix-scaled level elements), any extra
    certified members, closed under the basis derivations.  Relations come
    from saturating the graph ideal by `a` through an adjoined inverse.
    """
    algebra = action.algebra
    ring = action.ring
    lie = action.lie
    a = centre_data.a

    members = []

    def push(g):
        """Register g/a as a chart generator; returns (name, scale) with
        g = scale * member."""
        g = algebra.nf(g)
        if g.is_zero():
            return None
        key = g.monic()
        for name, h in members:
            if h.monic() == key:
                return name, g.lc() / h.lc()
        name = f"t{len(members)}"
        members.append((name, g))
        return name, Fraction(1)

    push(a)
    scaled_names = {}
    for i, bs in sorted(elements.per_level.items()):
        prefix = centre_data.a_prefix(i)
        names = []
        for b in bs:
            names.append(push(prefix * b))
        scaled_names[i] = names
    for g in extra_generators:
        ok, witn = j_membership(action, centre_data.centre_ideal, g)
        if not ok:
            raise VerificationFailed("extra generator fails sweep membership", witn)
        push(g)
    if j_search_degree:
        weights_seen = sorted({w for w in ring.weights if w < 0} | {0})
        for w in weights_seen:
            for g in find_j_members(action, centre_data.centre_ideal, w, j_search_degree):
                push(g)

    # close the member list under the basis derivations so the extended
    # action is expressible on chart generators
    frontier = list(members)
    while frontier:
        name, g = frontier.pop()
        for idx in range(lie.dim):
            img = action.apply_basis(idx, g)
            if img.is_zero():
                continue
            before = len(members)
            push(img)
            if len(members) > before:
                frontier.append(members[-1])

    for name, g in members:
        ok, witn = j_membership(action, centre_data.centre_ideal, g)
        if not ok:
            raise VerificationFailed(f"chart member {name} fails sweep membership", witn)
    if not any(algebra.equal(g, a) for _, g in members):
        raise VerificationFailed("the witness product must itself be a chart member")

    tnames = [name for name, _ in members]
    tweights = []
    for _, g in members:
        comps = g.weight_decompose()
        if len(comps) != 1:
            raise VerificationFailed("chart members must be weight homogeneous", str(g))
        tweights.append(next(iter(comps)))
    if any(w > 0 for w in tweights):
        raise VerificationFailed("chart weights must be nonpositive")

    inv = "@inv"
    big = ring.extended(tuple(tnames) + (inv,), tuple(tweights) + (0,))
    gens = [g.map_ring(big) for g in algebra.relations.generators]
    a_big = a.map_ring(big)
    for name, g in members:
        gens.append(a_big * big.var(name) - g.map_ring(big))
    gens.append(a_big * big.var(inv) - big.one())
    saturated = ring_eliminate(Ideal(big, gens), list(ring.names) + tnames)
    chart_ring = saturated.ring
    chart_algebra = PresentedAlgebra(chart_ring, saturated)

    # extended derivations: xi.t_g = t_{xi.g}, resolved through the member list
    table = {}
    for bi, bname in enumerate(lie.basis_names):
        row = {}
        for var in ring.names:
            img = action.image_of_generator(bi, var)
            if img:
                row[var] = img.map_ring(chart_ring)
        for name, g in members:
            img = action.apply_basis(bi, g)
            if img.is_zero():
                continue
            match = None
            for name2, h in members:
                if img.monic() == h.monic():
                    scale = img.lc() / h.lc()
                    match = chart_ring.var(name2) * scale
                    break
            if match is None:
                raise VerificationFailed(
                    f"derivative of chart member {name} left the member list", str(img)
                )
            row[name] = match
        table[bname] = row
    chart_action = DerivationAction(chart_algebra, lie, table)

    chart = BlowupChart(
        base_action=action,
        centre_data=centre_data,
        a=a,
        generators=members,
        algebra=chart_algebra,
        action=chart_action,
        scaled_b_names=scaled_names,
    )
    a_name = members[0][0]
    if not chart_algebra.equal(chart_ring.var(a_name), chart_ring.one()):
        raise VerificationFailed("the chart does not trivialise its own witness product")
    return chart


def verify_chart_cdrs(chart):
    """Constant-rank report on the chart plus the constructive certificate.

    Beyond re-running the Fitting checks, the scaled-element chart columns
    are paired against the split rows and must produce the level weight
    times the identity, exactly.
    """
    report = check_cdrs(chart.action)
    report["k_vector_base"] = chart.centre_data.k_vector
    report["certificates"] = {}
    witnesses = {w.level: w for w in chart.centre_data.witnesses}
    algebra = chart.algebra
    ring = chart.algebra.ring
    ok_cert = True
    for level, names in chart.scaled_b_names.items():
        wit = witnesses[level]
        w = wit.weight
        mat = []
        good = True
        for pos, mu in enumerate(wit.split_rows):
            row = []
            for nu, (name, scale) in enumerate(names):
                val = algebra.nf(chart.action.apply_basis(mu, ring.var(name)) * scale)
                row.append(str(val))
                want = ring.const(w) if pos == nu else ring.zero()
                if not algebra.equal(val, want):
                    good = False
            mat.append(row)
        report["certificates"][level] = {"pairing": mat, "unit_block": good}
        ok_cert = ok_cert and good
    for i, k in enumerate(chart.centre_data.k_vector, start=1):
        if i in report.get("levels", {}) and report["levels"][i]["k"] != k:
            report["holds"] = False
            report["levels"][i]["k_mismatch"] = True
    report["certificate_ok"] = ok_cert
    return report
