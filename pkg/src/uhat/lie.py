"""Graded Lie algebras, derivation actions, PBW words and coactions.

The Lie algebras here carry a one-parameter grading with strictly positive
weights, so every derivation action on a non-positively graded algebra is
nilpotent and all exponential series terminate.  The module also provides
the free-algebra identities used by the blow-up recursion and the
comultiplication coefficient table of the unipotent group in exponential
coordinates of the second kind.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from uhat.rings import GradedRing, Polynomial, degrevlex_order


# ---------------------------------------------------------------------------
# free associative algebra (for the bracket identities)


class FreeElement:
    """Element of a free associative algebra: map word-tuple -> Fraction."""

    __slots__ = ("terms",)

    def __init__(self, terms=None, prune=True):
        terms = terms or {}
        if prune:
            self.terms = {w: Fraction(c) for w, c in terms.items() if c != 0}
        else:
            self.terms = terms

    @classmethod
    def letter(cls, i):
        return cls({(i,): Fraction(1)})

    @classmethod
    def scalar(cls, c):
        return cls({(): Fraction(c)})

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, 0) + c
            if s:
                out[w] = s
            else:
                del out[w]
        return FreeElement(out, False)

    def __sub__(self, other):
        return self + (other * -1)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return FreeElement()
            return FreeElement({w: c * other for w, c in self.terms.items()}, False)
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                s = out.get(w, 0) + c1 * c2
                if s:
                    out[w] = s
                else:
                    del out[w]
        return FreeElement(out, False)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, FreeElement) and self.terms == other.terms

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{'.'.join(map(str, w)) or '1'}" for w, c in sorted(self.terms.items()))


def free_commutator(a, b):
    return a * b - b * a


def free_complete_bracket(word):
    """[a_1,...,a_m]] = ad_{a_1} ... ad_{a_{m-1}}(a_m) on single letters."""
    if not word:
        raise ValueError("complete bracket needs at least one letter")
    el = FreeElement.letter(word[-1])
    for i in range(len(word) - 2, -1, -1):
        el = free_commutator(FreeElement.letter(word[i]), el)
    return el


def _multi_range(k):
    return itertools.product(*(range(ki + 1) for ki in k))


def _binom_multi(k, s):
    return math.prod(math.comb(ki, si) for ki, si in zip(k, s))


def _expand_word(k):
    out = []
    for i, ki in enumerate(k):
        out.extend([i] * ki)
    return tuple(out)


def verify_weighted_bracket_identity(n, weights, k, degree_cap=8):
    """Check (sum k_i w_i) y^k = sum_{0<s<=k} C(k,s) w_max(s) [y^s]] y^{k-s}.

    Exact expansion in the free algebra on n letters; returns (ok, info)
    where info carries both sides on failure.
    """
    k = tuple(k)
    if sum(k) > degree_cap:
        raise ValueError("degree cap exceeded")
    weights = [Fraction(w) for w in weights]
    yk = FreeElement({_expand_word(k): Fraction(1)})
    lhs = yk * sum((ki * wi for ki, wi in zip(k, weights)), Fraction(0))
    rhs = FreeElement()
    for s in _multi_range(k):
        if sum(s) == 0:
            continue
        wmax = weights[max(i for i in range(n) if s[i])]
        piece = free_complete_bracket(_expand_word(s)) * FreeElement(
            {_expand_word(tuple(ki - si for ki, si in zip(k, s))): Fraction(1)}
        )
        rhs = rhs + piece * (_binom_multi(k, s) * wmax)
    ok = lhs == rhs
    return ok, None if ok else {"k": k, "weights": weights, "lhs": lhs, "rhs": rhs}


def verify_commutator_identity(n, k, degree_cap=8):
    """Check x^k y = sum_{0<=s<=k} C(k,s) [x^{k-s} y]] x^s in the free algebra.

    The letter y is represented by index n (after the x letters 0..n-1).
    """
    k = tuple(k)
    if sum(k) > degree_cap:
        raise ValueError("degree cap exceeded")
    y = n
    lhs = FreeElement({_expand_word(k) + (y,): Fraction(1)})
    rhs = FreeElement()
    for s in _multi_range(k):
        bracket_word = _expand_word(tuple(ki - si for ki, si in zip(k, s))) + (y,)
        piece = free_complete_bracket(bracket_word) * FreeElement({_expand_word(s): Fraction(1)})
        rhs = rhs + piece * _binom_multi(k, s)
    ok = lhs == rhs
    return ok, None if ok else {"k": k, "lhs": lhs, "rhs": rhs}


# ---------------------------------------------------------------------------
# graded Lie algebras


class GradedLieAlgebra:
    """Lie algebra graded by strictly decreasing positive weights.

    `basis` is one ordered list of names per weight; the flat concatenation
    fixes the PBW order.  Structure constants are stored antisymmetrically
    for index pairs i < j.
    """

    def __init__(self, weights, basis, brackets=None):
        self.weights = tuple(int(w) for w in weights)
        if any(w <= 0 for w in self.weights):
            raise ValueError("grading weights must be positive")
        if any(a <= b for a, b in zip(self.weights, self.weights[1:])):
            raise ValueError("grading weights must be strictly decreasing")
        if len(basis) != len(self.weights):
            raise ValueError("one basis block per weight required")
        self.basis_names = tuple(n for block in basis for n in block)
        if len(set(self.basis_names)) != len(self.basis_names):
            raise ValueError("basis names must be distinct")
        self.levels = tuple(i for i, block in enumerate(basis) for _ in block)
        self._index = {n: i for i, n in enumerate(self.basis_names)}
        self._bk = {}
        for (a, b), combo in (brackets or {}).items():
            i, j = self._index[a], self._index[b]
            combo = {self._index[c]: Fraction(v) for c, v in combo.items() if v}
            if i == j:
                if combo:
                    raise ValueError(f"bracket [{a},{a}] must vanish")
                continue
            if i > j:
                i, j = j, i
                combo = {k: -v for k, v in combo.items()}
            if (i, j) in self._bk and self._bk[(i, j)] != combo:
                raise ValueError(f"conflicting brackets for ({a},{b})")
            self._bk[(i, j)] = combo

    @property
    def dim(self):
        return len(self.basis_names)

    @property
    def nlevels(self):
        return len(self.weights)

    def index(self, name):
        return self._index[name]

    def weight_of(self, i):
        return self.weights[self.levels[i]]

    def level_indices(self, level):
        return [i for i, l in enumerate(self.levels) if l == level]

    def filtration_indices(self, upto_level):
        """Indices of the filtration subspace spanned by weights >= w_{upto_level}."""
        return [i for i, l in enumerate(self.levels) if l < upto_level]

    def bracket_basis(self, i, j):
        """[xi_i, xi_j] as a map basis index -> Fraction."""
        if i == j:
            return {}
        if i < j:
            return dict(self._bk.get((i, j), {}))
        return {k: -v for k, v in self._bk.get((j, i), {}).items()}

    def bracket(self, u, v):
        """Bracket of two elements given as maps basis index -> Fraction."""
        out = {}
        for i, ci in u.items():
            for j, cj in v.items():
                for k, s in self.bracket_basis(i, j).items():
                    val = out.get(k, 0) + ci * cj * s
                    if val:
                        out[k] = val
                    else:
                        del out[k]
        return out

    def element_weight(self, el):
        """Weight of a homogeneous element, None for 0, error if mixed."""
        ws = {self.weight_of(i) for i in el}
        if not ws:
            return None
        if len(ws) > 1:
            raise ValueError("element is not weight-homogeneous")
        return ws.pop()

    def structure_violations(self):
        """Antisymmetry/weight/Jacobi defects, each with a witness."""
        out = []
        for (i, j), combo in self._bk.items():
            wi, wj = self.weight_of(i), self.weight_of(j)
            target = wi + wj
            for k, c in combo.items():
                if self.weight_of(k) != target:
                    out.append(
                        {
                            "kind": "bracket-weight",
                            "pair": (self.basis_names[i], self.basis_names[j]),
                            "component": self.basis_names[k],
                            "expected_weight": target,
                            "actual_weight": self.weight_of(k),
                        }
                    )
            if target not in self.weights and combo:
                out.append(
                    {
                        "kind": "bracket-weight",
                        "pair": (self.basis_names[i], self.basis_names[j]),
                        "detail": f"no weight space of weight {target}",
                    }
                )
        for a, b, c in itertools.combinations(range(self.dim), 3):
            total = {}
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                term = self.bracket({x: Fraction(1)}, self.bracket_basis(y, z))
                for k, v in term.items():
                    s = total.get(k, 0) + v
                    if s:
                        total[k] = s
                    else:
                        del total[k]
            if total:
                out.append(
                    {
                        "kind": "jacobi",
                        "triple": tuple(self.basis_names[i] for i in (a, b, c)),
                        "defect": {self.basis_names[k]: str(v) for k, v in total.items()},
                    }
                )
        return out

    def complete_bracket_word(self, word):
        """Iterated bracket [a_1,...,a_m]] of basis letters, as an element."""
        if not word:
            raise ValueError("complete bracket needs at least one letter")
        el = {word[-1]: Fraction(1)}
        for i in range(len(word) - 2, -1, -1):
            el = self.bracket({word[i]: Fraction(1)}, el)
        return el

    def complete_bracket_pbw(self, exp):
        """Complete bracket of a PBW monomial with respect to the basis order."""
        return self.complete_bracket_word(pbw_word(exp))

    def pbw_weight(self, exp):
        return sum(self.weight_of(i) * e for i, e in enumerate(exp))

    def pbw_monomials_of_weight(self, weight, exact=True):
        """All PBW exponent tuples of given weight (or of weight <= weight)."""
        out = []

        def go(i, rem, cur):
            if i == self.dim:
                if rem == 0 or not exact:
                    out.append(tuple(cur))
                return
            w = self.weight_of(i)
            for e in range(rem // w + 1):
                go(i + 1, rem - e * w, cur + [e])

        go(0, weight, [])
        return sorted(out)


def pbw_word(exp):
    out = []
    for i, e in enumerate(exp):
        out.extend([i] * e)
    return tuple(out)


# ---------------------------------------------------------------------------
# derivation actions


class DerivationAction:
    """Action of a graded Lie algebra on a presented algebra by derivations.

    `table[name][var]` is the image of the ring generator `var` under the
    basis vector `name`; missing entries are zero.  Images are stored as
    normal forms modulo the relations.
    """

    def __init__(self, algebra, lie, table):
        self.algebra = algebra
        self.lie = lie
        ring = algebra.ring
        self.table = {}
        for name in lie.basis_names:
            row = {}
            for var, img in (table.get(name) or {}).items():
                if var not in ring._index:
                    raise ValueError(f"unknown ring generator {var!r}")
                img = algebra.nf(img)
                if img:
                    row[var] = img
            self.table[name] = row
        self._cache = {}

    @property
    def ring(self):
        return self.algebra.ring

    def image_of_generator(self, i, var):
        return self.table[self.lie.basis_names[i]].get(var, self.ring.zero())

    def apply_basis(self, i, p):
        """Leibniz extension of basis vector i applied to a polynomial."""
        ring = self.ring
        row = self.table[self.lie.basis_names[i]]
        used = [ring.index(v) for v in row]
        out = ring.zero()
        for m, c in p.terms.items():
            for vi in used:
                e = m[vi]
                if e:
                    lowered = list(m)
                    lowered[vi] -= 1
                    out = out + row[ring.names[vi]].term_mul(c * e, tuple(lowered))
        return self.algebra.nf(out)

    def apply_vector(self, vec, p):
        out = self.ring.zero()
        for i, c in vec.items():
            if c:
                out = out + self.apply_basis(i, p) * c
        return self.algebra.nf(out)

    def apply_word(self, word, p):
        """Compose basis derivations; the rightmost letter acts first."""
        for i in reversed(word):
            if p.is_zero():
                return p
            p = self.apply_basis(i, p)
        return p

    def apply_pbw(self, exp, p):
        """Apply a PBW monomial (rightmost factor first), with nilpotency cut."""
        p = self.algebra.nf(p)
        if p.is_zero():
            return p
        if self.lie.pbw_weight(exp) + p.min_weight() > 0:
            return self.ring.zero()
        return self.apply_word(pbw_word(exp), p)

    def apply_uea(self, el, p):
        """Apply a UEA element given as a map word-tuple -> Fraction."""
        out = self.ring.zero()
        for word, c in el.items():
            out = out + self.apply_word(word, p) * c
        return self.algebra.nf(out)

    def validate(self):
        """All structural invariants, each violation reported with a witness."""
        report = list(self.lie.structure_violations())
        ring = self.ring
        lie = self.lie
        for i, name in enumerate(lie.basis_names):
            w = lie.weight_of(i)
            for var, img in self.table[name].items():
                expected = ring.weights[ring.index(var)] + w
                comps = img.weight_decompose()
                if set(comps) - {expected}:
                    report.append(
                        {
                            "kind": "action-weight",
                            "vector": name,
                            "generator": var,
                            "expected_weight": expected,
                            "actual_weights": sorted(comps),
                        }
                    )
        for rel in self.algebra.relations.generators:
            for i, name in enumerate(lie.basis_names):
                img = self.apply_basis(i, rel)
                if not self.algebra.is_zero(img):
                    report.append(
                        {
                            "kind": "relations-not-preserved",
                            "vector": name,
                            "relation": str(rel),
                            "image": str(img),
                        }
                    )
        for a in range(lie.dim):
            for b in range(a + 1, lie.dim):
                combo = lie.bracket_basis(a, b)
                for var in ring.names:
                    g = ring.var(var)
                    lhs = self.apply_basis(a, self.apply_basis(b, g)) - self.apply_basis(
                        b, self.apply_basis(a, g)
                    )
                    rhs = self.apply_vector(combo, g)
                    if not self.algebra.equal(lhs, rhs):
                        report.append(
                            {
                                "kind": "bracket-compatibility",
                                "pair": (lie.basis_names[a], lie.basis_names[b]),
                                "generator": var,
                                "difference": str(self.algebra.nf(lhs - rhs)),
                            }
                        )
        return report

    def is_valid(self):
        return not self.validate()


# ---------------------------------------------------------------------------
# coaction expansion


def coaction_expand(action, f):
    """Expansion of g.f over exponential coordinates of the second kind.

    Returns the finite list of pairs (alpha, f_alpha) with
    f_alpha = (1/alpha!) xi^alpha . f, so the zeroth component is f itself
    and the expansion is exact by nilpotency of the graded action.
    """
    f = action.algebra.nf(f)
    lie = action.lie
    if f.is_zero():
        return [((0,) * lie.dim, f)]
    bound = max(0, -f.min_weight())
    out = []
    for alpha in lie.pbw_monomials_of_weight(bound, exact=False):
        if lie.pbw_weight(alpha) > bound:
            continue
        comp = action.apply_pbw(alpha, f)
        if alpha == (0,) * lie.dim or not comp.is_zero():
            fact = math.prod(math.factorial(a) for a in alpha)
            out.append((alpha, comp * Fraction(1, fact)))
    return sorted(out)


# ---------------------------------------------------------------------------
# weight-truncated universal enveloping algebra and the group law

# Elements are maps pbw-exponent-tuple -> Polynomial coefficient; components
# of lambda-weight above the cap are dropped, which is a quotient algebra
# because all basis weights are positive.


class TruncatedUEA:
    def __init__(self, lie, coeff_ring, weight_cap):
        self.lie = lie
        self.ring = coeff_ring
        self.cap = weight_cap
        self._word_cache = {}

    def one(self):
        return {(0,) * self.lie.dim: self.ring.one()}

    def _word_weight(self, word):
        return sum(self.lie.weight_of(i) for i in word)

    def word_to_pbw(self, word):
        """Normal form of a word as a map pbw-exponent -> Fraction.

        Repeatedly applies x_j x_i -> x_i x_j + [x_j, x_i] on out-of-order
        adjacent pairs; terminates by the weight filtration (brackets
        strictly shorten words).
        """
        if self._word_weight(word) > self.cap:
            return {}
        if word in self._word_cache:
            return self._word_cache[word]
        for k in range(len(word) - 1):
            if word[k] > word[k + 1]:
                swapped = word[:k] + (word[k + 1], word[k]) + word[k + 2 :]
                out = dict(self.word_to_pbw(swapped))
                combo = self.lie.bracket_basis(word[k], word[k + 1])
                for idx, c in combo.items():
                    sub = self.word_to_pbw(word[:k] + (idx,) + word[k + 2 :])
                    for e, v in sub.items():
                        s = out.get(e, 0) + c * v
                        if s:
                            out[e] = s
                        else:
                            del out[e]
                self._word_cache[word] = out
                return out
        exp = [0] * self.lie.dim
        for i in word:
            exp[i] += 1
        out = {tuple(exp): Fraction(1)}
        self._word_cache[word] = out
        return out

    def mul(self, a, b):
        out = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                if self.lie.pbw_weight(e1) + self.lie.pbw_weight(e2) > self.cap:
                    continue
                coeff = c1 * c2
                if coeff.is_zero():
                    continue
                for e, v in self.word_to_pbw(pbw_word(e1) + pbw_word(e2)).items():
                    s = out.get(e, self.ring.zero()) + coeff * v
                    if s.is_zero():
                        out.pop(e, None)
                    else:
                        out[e] = s
        return out

    def exp_basis(self, i, coeff):
        """exp(coeff * xi_i), truncated at the weight cap."""
        w = self.lie.weight_of(i)
        out = self.one()
        power = self.ring.one()
        exp = [0] * self.lie.dim
        k = 0
        while (k + 1) * w <= self.cap:
            k += 1
            power = power * coeff
            exp[i] = k
            out[tuple(exp)] = power * Fraction(1, math.factorial(k))
        return out

    def group_element(self, coords):
        """Ordered product exp(c_1 xi_1) ... exp(c_n xi_n)."""
        el = self.one()
        for i, c in enumerate(coords):
            el = self.mul(el, self.exp_basis(i, c))
        return el

    def peel_coordinates(self, el):
        """Second-kind coordinates of a group-like element.

        The coefficient of the bare basis vector xi_i stays exact during the
        left-to-right peel because xi_i times a word in later letters is
        already in PBW order.
        """
        coords = []
        for i in range(self.lie.dim):
            exp = [0] * self.lie.dim
            exp[i] = 1
            m = el.get(tuple(exp), self.ring.zero())
            coords.append(m)
            el = self.mul(self.exp_basis(i, -m), el)
        rest = {e: c for e, c in el.items() if not c.is_zero() and e != (0,) * self.lie.dim}
        one = el.get((0,) * self.lie.dim, self.ring.zero())
        if rest or one != self.ring.one():
            raise ValueError("element is not a product of basis exponentials")
        return coords


def group_law(lie):
    """Multiplication polynomials m_i(s, t) in second-kind coordinates."""
    n = lie.dim
    if n == 0:
        return GradedRing([], []), []
    names = [f"s{i}" for i in range(n)] + [f"t{i}" for i in range(n)]
    ring = GradedRing(names, [0] * 2 * n)
    cap = max(lie.weights)
    uea = TruncatedUEA(lie, ring, cap)
    gs = uea.group_element([ring.var(f"s{i}") for i in range(n)])
    gt = uea.group_element([ring.var(f"t{i}") for i in range(n)])
    return ring, uea.peel_coordinates(uea.mul(gs, gt))


def comult_coefficients(lie, degree_bound):
    """Comultiplication table c^alpha_{beta,gamma} up to the degree bound.

    Computed from the exact group law: mu*(u^alpha) is the product of the
    multiplication polynomials, read off in the two coordinate blocks.
    Returns a map alpha -> {(beta, gamma): Fraction}.
    """
    n = lie.dim
    ring, law = group_law(lie)
    table = {}
    for alpha in itertools.product(*(range(degree_bound + 1) for _ in range(n))):
        if sum(alpha) > degree_bound:
            continue
        p = ring.one()
        for i, a in enumerate(alpha):
            if a:
                p = p * law[i] ** a
        entry = {}
        for m, c in p.terms.items():
            beta, gamma = m[:n], m[n:]
            if sum(beta) <= degree_bound and sum(gamma) <= degree_bound:
                entry[(beta, gamma)] = c
        table[alpha] = entry
    return table
