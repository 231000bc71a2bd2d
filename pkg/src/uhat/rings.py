"""Exact rational multivariate polynomials over weight-graded rings.

Everything downstream (derivation actions, Fitting ideals, invariant rings,
blow-up charts) computes over these primitives: sparse polynomials with
Fraction coefficients, Groebner bases with optional cofactor tracing, module
syzygies, block-order elimination and exact linear algebra over the
rationals.  Values are immutable after construction; operations are pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod


# ---------------------------------------------------------------------------
# monomial orders


def _grevlex_key(seq):
    # classic trick: revlex tie-break on all but the first exponent
    return (sum(seq), tuple(-e for e in seq[:0:-1]))


class MonomialOrder:
    """Total order on exponent tuples, encoded as a sort key."""

    def __init__(self, tag, key):
        self.tag = tag
        self.key = key

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"MonomialOrder({self.tag})"


def degrevlex_order():
    return MonomialOrder("degrevlex", _grevlex_key)


def lex_order():
    return MonomialOrder("lex", lambda e: tuple(e))


def weighted_order(weights):
    """Graded order by a nonnegative weight vector, degrevlex tie-break."""
    w = tuple(int(x) for x in weights)
    if any(x < 0 for x in w):
        raise ValueError("weighted monomial order needs nonnegative weights")

    def key(e):
        return (sum(wi * ei for wi, ei in zip(w, e)), _grevlex_key(e))

    return MonomialOrder("weighted:" + ",".join(map(str, w)), key)


def elimination_order(nfirst):
    """Block order eliminating the first `nfirst` variables."""

    def key(e):
        return (_grevlex_key(e[:nfirst]), _grevlex_key(e[nfirst:]))

    return MonomialOrder(f"elim:{nfirst}", key)


_ORDER_FACTORIES = {"degrevlex": degrevlex_order, "lex": lex_order}


def order_from_tag(tag):
    if tag in _ORDER_FACTORIES:
        return _ORDER_FACTORIES[tag]()
    if tag.startswith("weighted:"):
        return weighted_order(tag.split(":", 1)[1].split(","))
    if tag.startswith("elim:"):
        return elimination_order(int(tag.split(":", 1)[1]))
    raise ValueError(f"unknown monomial order {tag!r}")


# ---------------------------------------------------------------------------
# graded rings and polynomials


class GradedRing:
    """Polynomial ring with named variables carrying integer weights."""

    def __init__(self, names, weights, order="degrevlex"):
        names = tuple(names)
        weights = tuple(int(w) for w in weights)
        if len(names) != len(weights):
            raise ValueError("one weight per variable required")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        self.names = names
        self.weights = weights
        self.order = order_from_tag(order) if isinstance(order, str) else order
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def nvars(self):
        return len(self.names)

    def __eq__(self, other):
        return (
            isinstance(other, GradedRing)
            and self.names == other.names
            and self.weights == other.weights
            and self.order == other.order
        )

    def __hash__(self):
        return hash((self.names, self.weights, self.order.tag))

    def __repr__(self):
        vs = ", ".join(f"{n}:{w}" for n, w in zip(self.names, self.weights))
        return f"GradedRing({vs}; {self.order.tag})"

    def index(self, name):
        return self._index[name]

    def zero(self):
        return Polynomial(self, {})

    def one(self):
        return self.const(1)

    def const(self, c):
        c = Fraction(c)
        if c == 0:
            return self.zero()
        return Polynomial(self, {(0,) * self.nvars: c})

    def var(self, name):
        exp = [0] * self.nvars
        exp[self.index(name)] = 1
        return Polynomial(self, {tuple(exp): Fraction(1)})

    def monomial(self, exp, coeff=1):
        coeff = Fraction(coeff)
        if coeff == 0:
            return self.zero()
        return Polynomial(self, {tuple(exp): coeff})

    def monomial_weight(self, exp):
        return sum(w * e for w, e in zip(self.weights, exp))

    def with_order(self, order):
        return GradedRing(self.names, self.weights, order)

    def extended(self, names, weights, order=None):
        """New ring with extra variables appended."""
        return GradedRing(
            self.names + tuple(names),
            self.weights + tuple(int(w) for w in weights),
            order if order is not None else self.order.tag,
        )

    def subring(self, names, order="degrevlex"):
        keep = tuple(names)
        return GradedRing(keep, tuple(self.weights[self.index(n)] for n in keep), order)

    def monomials_of_degree(self, deg):
        """All exponent tuples of total degree exactly deg."""
        if self.nvars == 0:
            return [()] if deg == 0 else []
        out = []
        for c in itertools.combinations_with_replacement(range(self.nvars), deg):
            e = [0] * self.nvars
            for i in c:
                e[i] += 1
            out.append(tuple(e))
        return out


class Polynomial:
    """Sparse polynomial: map from exponent tuple to nonzero Fraction."""

    __slots__ = ("ring", "terms", "_lm")

    def __init__(self, ring, terms, prune=True):
        self.ring = ring
        if prune:
            self.terms = {m: Fraction(c) for m, c in terms.items() if c != 0}
        else:
            self.terms = terms
        self._lm = None

    # -- basic structure

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def lm(self):
        """Leading monomial under the ring order (None for zero)."""
        if self._lm is None and self.terms:
            key = self.ring.order.key
            self._lm = max(self.terms, key=key)
        return self._lm

    def lc(self):
        m = self.lm()
        return self.terms[m] if m is not None else Fraction(0)

    def total_degree(self):
        return max((sum(m) for m in self.terms), default=0)

    def monic(self):
        c = self.lc()
        if c in (0, 1):
            return self
        return Polynomial(self.ring, {m: v / c for m, v in self.terms.items()}, False)

    # -- arithmetic

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise ValueError("polynomials from different rings")
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial(self.ring, out, False)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {m: -c for m, c in self.terms.items()}, False)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return self.ring.zero()
            return Polynomial(self.ring, {m: v * c for m, v in self.terms.items()}, False)
        other = self._coerce(other)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Polynomial(self.ring, out, False)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = self.ring.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def term_mul(self, coeff, exp):
        if coeff == 0:
            return self.ring.zero()
        return Polynomial(
            self.ring,
            {tuple(a + b for a, b in zip(m, exp)): c * coeff for m, c in self.terms.items()},
            False,
        )

    # -- grading

    def weight_decompose(self):
        """Split into lambda-homogeneous components: weight -> Polynomial."""
        parts = {}
        for m, c in self.terms.items():
            w = self.ring.monomial_weight(m)
            parts.setdefault(w, {})[m] = c
        return {w: Polynomial(self.ring, t, False) for w, t in sorted(parts.items())}

    def weight_component(self, w):
        t = {m: c for m, c in self.terms.items() if self.ring.monomial_weight(m) == w}
        return Polynomial(self.ring, t, False)

    def min_weight(self):
        return min((self.ring.monomial_weight(m) for m in self.terms), default=0)

    def is_weight_homogeneous(self):
        return len({self.ring.monomial_weight(m) for m in self.terms}) <= 1

    # -- maps

    def evaluate(self, values):
        """Evaluate at a point given as name -> Fraction."""
        vec = [Fraction(values[n]) for n in self.ring.names]
        total = Fraction(0)
        for m, c in self.terms.items():
            total += c * prod((v**e for v, e in zip(vec, m)), start=Fraction(1))
        return total

    def map_ring(self, ring, name_map=None):
        """Reinterpret in another ring by variable name (injective on support)."""
        idx = []
        for i, n in enumerate(self.ring.names):
            target = name_map.get(n, n) if name_map else n
            idx.append(ring.index(target) if target in ring._index else None)
        out = {}
        for m, c in self.terms.items():
            e = [0] * ring.nvars
            for i, p in enumerate(m):
                if p:
                    if idx[i] is None:
                        raise ValueError(f"variable {self.ring.names[i]} not in target ring")
                    e[idx[i]] += p
            me = tuple(e)
            out[me] = out.get(me, 0) + c
        return Polynomial(ring, out)

    def substitute(self, values):
        """Substitute polynomials (or constants) for variables, by name."""
        ring = None
        for v in values.values():
            if isinstance(v, Polynomial):
                ring = v.ring
                break
        if ring is None:
            raise ValueError("need at least one polynomial value to fix the ring")
        total = ring.zero()
        for m, c in self.terms.items():
            part = ring.const(c)
            for i, e in enumerate(m):
                if e:
                    val = values[self.ring.names[i]]
                    if not isinstance(val, Polynomial):
                        val = ring.const(val)
                    part = part * val**e
            total = total + part
        return total

    # -- display

    def sorted_terms(self):
        key = self.ring.order.key
        return sorted(self.terms.items(), key=lambda mc: key(mc[0]), reverse=True)

    def __repr__(self):
        return self.__str__()

    def __str__(self):
        if not self.terms:
            return "0"
        chunks = []
        for m, c in self.sorted_terms():
            factors = []
            for name, e in zip(self.ring.names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            sign = "-" if c < 0 else "+"
            chunks.append((sign, body))
        first_sign, first_body = chunks[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in chunks[1:]:
            out += f" {sign} {body}"
        return out


# ---------------------------------------------------------------------------
# division and Buchberger


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _exp_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _exp_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def normal_form_list(p, basis):
    """Unique remainder of p under full reduction by `basis` (list of polys)."""
    ring = p.ring
    key = ring.order.key
    lead = [(g.lm(), g.lc(), g) for g in basis if g]
    rem = ring.zero()
    work = p
    while work:
        m = work.lm()
        c = work.terms[m]
        for lmg, lcg, g in lead:
            if _divides(lmg, m):
                work = work - g.term_mul(c / lcg, _exp_sub(m, lmg))
                break
        else:
            rem = rem + ring.monomial(m, c)
            work = work - ring.monomial(m, c)
        assert not work or key(work.lm()) < key(m)
    return rem


def s_polynomial(f, g):
    lf, lg = f.lm(), g.lm()
    L = _exp_lcm(lf, lg)
    return f.term_mul(1 / f.lc(), _exp_sub(L, lf)) - g.term_mul(1 / g.lc(), _exp_sub(L, lg))


def _primitive(p):
    """Scale to integer coefficients with positive leading sign and content 1."""
    from math import gcd

    if not p:
        return p
    num = 0
    den = 1
    for c in p.terms.values():
        num = gcd(num, abs(c.numerator))
        den = den * c.denominator // gcd(den, c.denominator)
    factor = Fraction(den, num)
    if p.lc() < 0:
        factor = -factor
    if factor == 1:
        return p
    return Polynomial(p.ring, {m: c * factor for m, c in p.terms.items()}, False)


def _coprime(a, b):
    return all(x == 0 or y == 0 for x, y in zip(a, b))


def _update_pairs(G, pairs, t):
    """Gebauer-Moeller pair update after appending generator index t."""
    lt = G[t].lm()
    cand = []
    for i in range(t):
        cand.append((i, _exp_lcm(G[i].lm(), lt)))
    kept = []
    for pos, (i, L) in enumerate(cand):
        if _coprime(G[i].lm(), lt):
            continue
        drop = False
        for pos2, (j, L2) in enumerate(cand):
            if pos2 == pos:
                continue
            if L2 == L and pos2 < pos:
                drop = True
                break
            if L2 != L and _divides(L2, L):
                drop = True
                break
        if not drop:
            kept.append((i, t, L))
    out = []
    for (i, j, L) in pairs:
        if not _divides(lt, L) or _exp_lcm(G[i].lm(), lt) == L or _exp_lcm(G[j].lm(), lt) == L:
            out.append((i, j, L))
    out.extend(kept)
    return out


def buchberger(gens, ring=None):
    """Groebner basis via Buchberger with Gebauer-Moeller pair pruning.

    Basis elements are kept primitive over the integers so coefficient
    growth stays bounded; pairs are processed in normal (smallest-lcm)
    order.
    """
    G = []
    pairs = []
    for g in gens:
        if g:
            G.append(_primitive(g))
            pairs = _update_pairs(G, pairs, len(G) - 1)
    if not G:
        return []
    key = G[0].ring.order.key
    while pairs:
        best = min(range(len(pairs)), key=lambda t: key(pairs[t][2]))
        i, j, _ = pairs.pop(best)
        r = normal_form_list(s_polynomial(G[i], G[j]), G)
        if r:
            G.append(_primitive(r))
            pairs = _update_pairs(G, pairs, len(G) - 1)
    return G


def reduce_groebner(G):
    """Minimal reduced Groebner basis, canonically sorted."""
    if not G:
        return []
    ring = G[0].ring
    key = ring.order.key
    # minimal: drop elements whose lead is divisible by another lead
    G = sorted((g.monic() for g in G if g), key=lambda g: key(g.lm()))
    minimal = []
    for g in G:
        if not any(_divides(h.lm(), g.lm()) for h in minimal):
            minimal.append(g)
    # reduced: fully reduce each tail against the others
    reduced = []
    for i, g in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        r = normal_form_list(g, others)
        if r:
            reduced.append(r.monic())
    return sorted(reduced, key=lambda g: key(g.lm()), reverse=True)


def groebner_basis(gens):
    return reduce_groebner(buchberger([g for g in gens if g]))


def unit_certificate(gens):
    """If <gens> is the unit ideal, return cofactors q with sum(q_i*g_i) = 1.

    Runs Buchberger carrying a representation of every basis element in
    terms of the input generators; stops as soon as a nonzero constant
    appears.  Returns None when the ideal is proper.
    """
    gens = list(gens)
    live = [(g, i) for i, g in enumerate(gens) if g]
    if not live:
        return None
    ring = live[0][0].ring
    G, reps = [], []
    for g, i in live:
        rep = [ring.zero()] * len(gens)
        rep[i] = ring.const(Fraction(1, 1) / g.lc())
        G.append(g.monic())
        reps.append(rep)

    def reduce_traced(p, rep):
        rem = ring.zero()
        while p:
            m = p.lm()
            c = p.terms[m]
            for g, grep in zip(G, reps):
                if _divides(g.lm(), m):
                    q = _exp_sub(m, g.lm())
                    p = p - g.term_mul(c, q)
                    rep = [r - gr.term_mul(c, q) for r, gr in zip(rep, grep)]
                    break
            else:
                rem = rem + ring.monomial(m, c)
                p = p - ring.monomial(m, c)
        return rem, rep

    def constant_rep():
        for g, rep in zip(G, reps):
            if g and sum(g.lm()) == 0:
                c = g.lc()
                return [r * (1 / c) for r in rep]
        return None

    found = constant_rep()
    if found:
        return found
    pairs = [(i, j) for i in range(len(G)) for j in range(i + 1, len(G))]
    key = ring.order.key
    while pairs:
        pairs.sort(key=lambda ij: key(_exp_lcm(G[ij[0]].lm(), G[ij[1]].lm())), reverse=True)
        i, j = pairs.pop()
        f, g = G[i], G[j]
        L = _exp_lcm(f.lm(), g.lm())
        if L == tuple(a + b for a, b in zip(f.lm(), g.lm())):
            continue
        qf, qg = _exp_sub(L, f.lm()), _exp_sub(L, g.lm())
        s = f.term_mul(1 / f.lc(), qf) - g.term_mul(1 / g.lc(), qg)
        srep = [
            rf.term_mul(1 / f.lc(), qf) - rg.term_mul(1 / g.lc(), qg)
            for rf, rg in zip(reps[i], reps[j])
        ]
        r, rrep = reduce_traced(s, srep)
        if r:
            c = r.lc()
            G.append(r.monic())
            reps.append([x * (1 / c) for x in rrep])
            if sum(r.lm()) == 0:
                return constant_rep()
            pairs.extend((k, len(G) - 1) for k in range(len(G) - 1))
    return None


# ---------------------------------------------------------------------------
# ideals


class Ideal:
    """Ideal with a lazily computed reduced Groebner basis."""

    def __init__(self, ring, generators):
        self.ring = ring
        self.generators = tuple(g for g in generators)
        self._gb = None

    def groebner(self):
        if self._gb is None:
            self._gb = groebner_basis(self.generators)
        return self._gb

    def normal_form(self, p):
        return normal_form_list(p, self.groebner())

    def contains(self, p):
        return self.normal_form(p).is_zero()

    def is_zero(self):
        return not self.groebner()

    def is_unit(self):
        gb = self.groebner()
        return len(gb) == 1 and sum(gb[0].lm()) == 0

    def __add__(self, other):
        gens = self.generators + tuple(other.generators if isinstance(other, Ideal) else other)
        return Ideal(self.ring, gens)

    def product(self, other):
        gens = [f * g for f in self.generators for g in other.generators]
        return Ideal(self.ring, gens)

    def equals(self, other):
        return self.groebner() == other.groebner()

    def __repr__(self):
        inner = ", ".join(str(g) for g in self.generators) or "0"
        return f"Ideal({inner})"


def eliminate(ideal, keep):
    """Intersection of `ideal` with the subring on the `keep` variables.

    Internally permutes the variables so the discarded block comes first and
    runs Buchberger under a block elimination order.
    """
    ring = ideal.ring
    keep = list(keep)
    drop = [n for n in ring.names if n not in keep]
    perm_names = drop + [n for n in ring.names if n in keep]
    work = GradedRing(
        perm_names,
        [ring.weights[ring.index(n)] for n in perm_names],
        elimination_order(len(drop)),
    )
    gb = groebner_basis([g.map_ring(work) for g in ideal.generators])
    sub = ring.subring([n for n in ring.names if n in keep])
    kept = []
    for g in gb:
        if all(all(m[i] == 0 for i in range(len(drop))) for m in g.terms):
            kept.append(g.map_ring(sub))
    return Ideal(sub, kept)


# ---------------------------------------------------------------------------
# presented algebras


class PresentedAlgebra:
    """Quotient of a graded polynomial ring by a relations ideal.

    Elements are plain Polynomials; `nf` gives the canonical representative,
    so equality in the algebra is normal-form comparison.
    """

    def __init__(self, ring, relations=None):
        self.ring = ring
        if relations is None:
            relations = Ideal(ring, [])
        elif not isinstance(relations, Ideal):
            relations = Ideal(ring, list(relations))
        self.relations = relations

    def nf(self, p):
        return self.relations.normal_form(p)

    def is_zero(self, p):
        return self.nf(p).is_zero()

    def equal(self, p, q):
        return self.is_zero(p - q)

    def is_empty(self):
        """Unit relations ideal: the empty chart."""
        return self.relations.is_unit()

    def ideal(self, gens):
        return Ideal(self.ring, [self.nf(g) for g in gens])

    def ideal_is_zero(self, gens):
        return all(self.is_zero(g) for g in gens)

    def standard_monomials(self, weight=None, max_degree=8):
        """Monomials not divisible by any leading relation monomial.

        Restricted to a fixed lambda-weight when `weight` is given; these
        form a basis of the corresponding finite-dimensional slice of the
        algebra.
        """
        leads = [g.lm() for g in self.relations.groebner()]
        out = []
        for d in range(max_degree + 1):
            for m in self.ring.monomials_of_degree(d):
                if weight is not None and self.ring.monomial_weight(m) != weight:
                    continue
                if any(_divides(l, m) for l in leads):
                    continue
                out.append(m)
        return out

    def __repr__(self):
        return f"PresentedAlgebra({self.ring!r}, {self.relations!r})"


# ---------------------------------------------------------------------------
# free module maps, module Groebner bases and syzygies


@dataclass(frozen=True)
class FreeModuleMap:
    """Map of free modules given by a matrix of polynomials (rows x cols)."""

    domain_rank: int
    codomain_rank: int
    matrix: tuple  # tuple of rows, each a tuple of Polynomial

    def __post_init__(self):
        if len(self.matrix) != self.codomain_rank:
            raise ValueError("row count must equal codomain rank")
        for row in self.matrix:
            if len(row) != self.domain_rank:
                raise ValueError("column count must equal domain rank")

    def column(self, j):
        return [self.matrix[i][j] for i in range(self.codomain_rank)]


def _mvec_lead(v, ring, rank):
    key = ring.order.key
    best = None
    for pos, p in v.items():
        for m in p.terms:
            cand = (rank - pos, key(m))
            if best is None or cand > best[0]:
                best = (cand, pos, m)
    if best is None:
        return None
    _, pos, m = best
    return pos, m, v[pos].terms[m]


def _mvec_sub_term(v, w, coeff, exp):
    # v - coeff * x^exp * w, sparse over positions
    out = dict(v)
    for pos, p in w.items():
        q = p.term_mul(coeff, exp)
        if pos in out:
            s = out[pos] - q
        else:
            s = -q
        if s.is_zero():
            out.pop(pos, None)
        else:
            out[pos] = s
    return out


def _mvec_reduce(v, basis, ring, rank):
    """Full reduction of a module vector by basis (list of (vec, lead))."""
    rem = {}
    while v:
        lead = _mvec_lead(v, ring, rank)
        if lead is None:
            break
        pos, m, c = lead
        for w, (wpos, wm, wc) in basis:
            if wpos == pos and _divides(wm, m):
                v = _mvec_sub_term(v, w, c / wc, _exp_sub(m, wm))
                break
        else:
            rem.setdefault(pos, ring.zero())
            rem[pos] = rem[pos] + ring.monomial(m, c)
            v = _mvec_sub_term(v, {pos: ring.monomial(m, c)}, Fraction(1), (0,) * ring.nvars)
    return rem


def module_groebner(gens, ring, rank):
    """Buchberger for submodules of a free module, position-over-term order."""
    G = []
    for v in gens:
        v = {p: q for p, q in v.items() if q}
        if v:
            G.append((v, _mvec_lead(v, ring, rank)))
    pairs = [(i, j) for i in range(len(G)) for j in range(i + 1, len(G))]
    while pairs:
        i, j = pairs.pop()
        (v, (vpos, vm, vc)) = G[i]
        (w, (wpos, wm, wc)) = G[j]
        if vpos != wpos:
            continue
        L = _exp_lcm(vm, wm)
        s = _mvec_sub_term(
            {p: q.term_mul(1 / vc, _exp_sub(L, vm)) for p, q in v.items()},
            w,
            Fraction(1, 1) / wc,
            _exp_sub(L, wm),
        )
        r = _mvec_reduce(s, G, ring, rank)
        if r:
            G.append((r, _mvec_lead(r, ring, rank)))
            pairs.extend((k, len(G) - 1) for k in range(len(G) - 1))
    return G


def module_normal_form(v, gb, ring, rank):
    return _mvec_reduce({p: q for p, q in v.items() if q}, gb, ring, rank)


def syzygy_kernel(fmap, relations=None):
    """Generators of the kernel of a free-module map over R or R/relations.

    Standard elimination computation: track cofactors in extra positions and
    keep the Groebner elements supported entirely on the cofactor block.
    Returns a list of vectors (length = domain rank).
    """
    r, s = fmap.codomain_rank, fmap.domain_rank
    if s == 0:
        return []
    ring = None
    for row in fmap.matrix:
        for p in row:
            ring = p.ring
            break
        if ring:
            break
    if ring is None:
        raise ValueError("empty map needs at least one entry to fix the ring")
    gens = []
    for j in range(s):
        v = {i: fmap.matrix[i][j] for i in range(r) if fmap.matrix[i][j]}
        v[r + j] = ring.one()
        gens.append(v)
    if relations:
        for f in relations:
            if not f:
                continue
            for i in range(r):
                gens.append({i: f})
    gb = module_groebner(gens, ring, r + s)
    out = []
    for v, _lead in gb:
        if all(pos >= r for pos in v):
            out.append([v.get(r + j, ring.zero()) for j in range(s)])
    # deterministic ordering: by leading data of the cofactor vector
    def sortkey(vec):
        for j, p in enumerate(vec):
            if p:
                return (j, ring.order.key(p.lm()))
        return (s, ())

    out.sort(key=sortkey)
    return out


# ---------------------------------------------------------------------------
# determinants

def determinant(rows):
    """Exact determinant of a square matrix of polynomials (cofactor expansion)."""
    n = len(rows)
    if n == 0:
        raise ValueError("empty determinant is a convention, handle at call site")
    ring = rows[0][0].ring
    cols = tuple(range(n))
    memo = {}

    def go(r, cs):
        if len(cs) == 1:
            return rows[r][cs[0]]
        key = (r, cs)
        if key in memo:
            return memo[key]
        total = ring.zero()
        sign = 1
        for k, c in enumerate(cs):
            entry = rows[r][c]
            if entry:
                sub = go(r + 1, cs[:k] + cs[k + 1 :])
                total = total + entry * sub * sign
            sign = -sign
        memo[key] = total
        return total

    return go(0, cols)


def minors_ideal_generators(matrix, size):
    """All size x size minors of a matrix (list of rows of Polynomials)."""
    nrows = len(matrix)
    ncols = len(matrix[0]) if nrows else 0
    if size <= 0 or size > nrows or size > ncols:
        return []
    out = []
    for rs in itertools.combinations(range(nrows), size):
        for cs in itertools.combinations(range(ncols), size):
            out.append(determinant([[matrix[i][j] for j in cs] for i in rs]))
    return out


# ---------------------------------------------------------------------------
# exact linear algebra over the rationals


def rref(rows):
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    rows = [list(map(Fraction, r)) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def matrix_rank(rows):
    return len(rref(rows)[1])


def right_nullspace(rows):
    """Basis of {x : M x = 0} as column vectors (lists of Fractions)."""
    if not rows:
        return []
    ncols = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for rowi, pc in enumerate(pivots):
            v[pc] = -red[rowi][fc]
        basis.append(v)
    return basis


def left_nullspace(rows):
    """Basis of {v : v M = 0}."""
    if not rows:
        return []
    t = [list(col) for col in zip(*rows)]
    return right_nullspace(t)


def solve_linear(rows, rhs):
    """One exact solution of M x = rhs (free variables zero), or None."""
    if not rows:
        return None
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if ncols in pivots:
        return None  # inconsistent: pivot in the constant column
    x = [Fraction(0)] * ncols
    for rowi, pc in enumerate(pivots):
        x[pc] = red[rowi][ncols]
    return x
