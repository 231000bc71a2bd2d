"""Staged invariant-ring quotients along the weight filtration.

Each stage finds slice functions for the top remaining weight, retracts onto
the invariant subring with the alternating-sign projection, presents that
subring by elimination and rebuilds the induced action of the remaining
filtration.  Iterating exhibits the chart as an affine space over the full
invariant ring.
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
    elimination_order,
    groebner_basis,
    normal_form_list,
    solve_linear,
)
from uhat.lie import DerivationAction, GradedLieAlgebra
from uhat.infinitesimal import check_cdrs, fitting_chain, min_nonzero_fitting, relative_map


class BoundExhausted(Exception):
    """Search failed within a configured degree bound (not a refutation)."""

    def __init__(self, message, bound, condition_ok=None):
        super().__init__(message)
        self.bound = bound
        self.condition_ok = condition_ok


class StageError(Exception):
    pass


@dataclass(frozen=True)
class SliceSet:
    """Slice functions for one filtration level.

    `split` lists the Lie basis indices acting freely (the complement of the
    stabiliser directions); `functions[nu]` satisfies xi_mu . f_nu =
    delta_{mu nu} exactly for mu, nu over the split.
    """

    level: int
    weight: int
    split: tuple
    functions: tuple


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def find_slices(action, level, degree_bound, k=None):
    """Solve xi_mu . f_nu = delta_{mu nu} inside the weight -w_i slice.

    Tries basis splits in a fixed order and degrees from 1 upward, taking the
    first exact solution of the resulting rational linear system.  Raises
    BoundExhausted when nothing is found within the bound; the exception
    records whether the level Fitting ideal is a unit, which distinguishes a
    too-small bound from a failing condition.
    """
    algebra = action.algebra
    lie = action.lie
    rows = lie.level_indices(level - 1)
    w = lie.weights[level - 1]
    if k is None:
        k = min_nonzero_fitting(fitting_chain(algebra, relative_map(action, level)))
    need = len(rows) - k
    if need == 0:
        return SliceSet(level, w, (), ())
    for deg in range(1, degree_bound + 1):
        monos = algebra.standard_monomials(weight=-w, max_degree=deg)
        if not monos:
            continue
        for split in itertools.combinations(rows, need):
            fns = _solve_slice_system(action, split, monos)
            if fns is not None:
                return SliceSet(level, w, split, tuple(fns))
    chain = fitting_chain(algebra, relative_map(action, level))
    unit = Ideal(
        algebra.ring,
        list(chain.ideal(k).generators) + list(algebra.relations.generators),
    ).is_unit()
    raise BoundExhausted(
        f"no slice functions of degree <= {degree_bound} at level {level}",
        degree_bound,
        condition_ok=unit,
    )


def _solve_slice_system(action, split, monos):
    """Exact linear solve for all slice functions over the given monomials."""
    algebra = action.algebra
    ring = action.ring
    images = [[algebra.nf(action.apply_basis(mu, ring.monomial(m))) for m in monos] for mu in split]
    support = {}
    for row in images:
        for p in row:
            for mm in p.terms:
                support.setdefault(mm, len(support))
    one = (0,) * ring.nvars
    support.setdefault(one, len(support))
    fns = []
    for nu in range(len(split)):
        # one block of equations per mu, stacked into a single exact system
        rows_eq = []
        rhs = []
        for mi, mu in enumerate(split):
            block = {mm: [Fraction(0)] * len(monos) for mm in support}
            for ci, p in enumerate(images[mi]):
                for mm, c in p.terms.items():
                    block[mm][ci] += c
            for mm, row in sorted(block.items(), key=lambda kv: support[kv[0]]):
                rows_eq.append(row)
                rhs.append(Fraction(1) if (mi == nu and mm == one) else Fraction(0))
        sol = solve_linear(rows_eq, rhs)
        if sol is None:
            return None
        f = ring.zero()
        for m, c in zip(monos, sol):
            if c:
                f = f + ring.monomial(m, c)
        fns.append(algebra.nf(f))
    return fns


def _check_projection_preconditions(action, split, functions):
    algebra = action.algebra
    ring = action.ring
    problems = []
    for a, b in itertools.combinations(split, 2):
        for var in ring.names:
            g = ring.var(var)
            comm = action.apply_basis(a, action.apply_basis(b, g)) - action.apply_basis(
                b, action.apply_basis(a, g)
            )
            if not algebra.is_zero(comm):
                problems.append(("non-commuting", a, b, var))
    for mi, mu in enumerate(split):
        for ni, f in enumerate(functions):
            want = ring.one() if mi == ni else ring.zero()
            if not algebra.equal(action.apply_basis(mu, f), want):
                problems.append(("slice-identity", mu, ni))
    return problems


def _derivative_table(action, split, g, max_total=None):
    """All iterated derivatives xi^n . g over the split, indexed by n."""
    table = {(0,) * len(split): action.algebra.nf(g)}
    d = 0
    while True:
        d += 1
        if max_total is not None and d > max_total:
            break
        alive = False
        for n in _compositions(d, len(split)):
            j = next(i for i, e in enumerate(n) if e)
            prev = tuple(e - (1 if i == j else 0) for i, e in enumerate(n))
            if table.get(prev) is None or table[prev].is_zero():
                val = action.ring.zero()
            else:
                val = action.apply_basis(split[j], table[prev])
            table[n] = val
            if not val.is_zero():
                alive = True
        if not alive:
            break
    return table


def dixmier_project(action, split, functions, g, check=False):
    """Retraction onto the joint kernel of the split derivations.

    pi(g) = sum_n ((-1)^{|n|}/n!) (xi^n . g) f^n, a finite sum by graded
    nilpotency.  With commuting derivations and exact slice identities this
    is a ring homomorphism fixing invariants and killing the slices.
    """
    if check:
        problems = _check_projection_preconditions(action, split, functions)
        if problems:
            raise StageError(f"projection preconditions violated: {problems}")
    algebra = action.algebra
    table = _derivative_table(action, split, g)
    out = action.ring.zero()
    for n, deriv in table.items():
        if deriv.is_zero():
            continue
        coeff = Fraction((-1) ** sum(n), math.prod(math.factorial(e) for e in n))
        fn = action.ring.one()
        for f, e in zip(functions, n):
            if e:
                fn = fn * f**e
        out = out + deriv * fn * coeff
    return algebra.nf(out)


@dataclass
class QuotientStage:
    level: int
    weight: int
    slices: SliceSet
    algebra_in: PresentedAlgebra
    action_in: DerivationAction
    algebra_out: PresentedAlgebra
    inclusion: dict  # new generator name -> representative polynomial in algebra_in
    reconstruction: dict  # original generator -> list of (multi-index, poly over algebra_out)
    induced_action: DerivationAction | None = None


@dataclass
class QuotientChain:
    action: DerivationAction
    stages: list = field(default_factory=list)

    @property
    def final_algebra(self):
        if self.stages:
            return self.stages[-1].algebra_out
        return self.action.algebra

    @property
    def affine_dimension(self):
        return sum(len(s.slices.functions) for s in self.stages)


class _StageContext:
    """Graph-ideal elimination used to present an invariant subring.

    Old variables are placed in the eliminated block, so normal forms of
    invariant elements rewrite them over the new generators.
    """

    def __init__(self, algebra, images):
        ring = algebra.ring
        self.algebra = algebra
        self.names_new = [name for name, _ in images]
        # the invariant images may reuse input generator names, so the
        # elimination ring carries reserved internal names for the new block
        internal = [f"@{t}" for t in range(len(images))]
        self._to_public = dict(zip(internal, self.names_new))
        weights_new = []
        for _, rep in images:
            comps = rep.weight_decompose()
            weights_new.append(next(iter(comps)) if comps else 0)
        self.big = GradedRing(
            ring.names + tuple(internal),
            ring.weights + tuple(weights_new),
            elimination_order(ring.nvars),
        )
        gens = [g.map_ring(self.big) for g in algebra.relations.generators]
        for iname, (_, rep) in zip(internal, images):
            gens.append(self.big.var(iname) - rep.map_ring(self.big))
        self.gb = groebner_basis(gens)
        self.out_ring = GradedRing(self.names_new, weights_new)
        rels = []
        for g in self.gb:
            if all(all(m[i] == 0 for i in range(ring.nvars)) for m in g.terms):
                rels.append(g.map_ring(self.out_ring, self._to_public))
        self.out_algebra = PresentedAlgebra(self.out_ring, Ideal(self.out_ring, rels))

    def rewrite(self, p):
        """Express an element of the subring over the new generators, or None."""
        nf = normal_form_list(p.map_ring(self.big), self.gb)
        if all(all(m[i] == 0 for i in range(self.algebra.ring.nvars)) for m in nf.terms):
            return nf.map_ring(self.out_ring, self._to_public)
        return None


def invariant_presentation(action, slices, degree_bound=8):
    """Present the invariant ring of one level and set up reconstruction.

    Generators are the projections of the ring generators (the projection is
    a ring homomorphism onto the invariants, so these always generate);
    relations come from graph-ideal elimination.  Reconstruction data writes
    every original generator as a polynomial in the invariant generators and
    the slice functions.
    """
    algebra = action.algebra
    ring = action.ring
    split, functions = slices.split, slices.functions
    problems = _check_projection_preconditions(action, split, functions)
    if problems:
        raise StageError(f"projection preconditions violated: {problems}")

    images = []
    seen = []
    for name in ring.names:
        p = dixmier_project(action, split, functions, ring.var(name))
        if p.is_zero() or not any(sum(m) for m in p.terms):
            continue
        if any(algebra.equal(p, q) for _, q in images):
            continue
        images.append((name, p))
        seen.append(name)
    ctx = _StageContext(algebra, images)

    reconstruction = {}
    for name in ring.names:
        table = _derivative_table(action, split, ring.var(name))
        pieces = []
        for n, deriv in table.items():
            if deriv.is_zero():
                continue
            proj = dixmier_project(action, split, functions, deriv)
            if proj.is_zero():
                continue
            expr = ctx.rewrite(proj)
            if expr is None:
                raise BoundExhausted(
                    f"projection of a derivative of {name} is not expressible "
                    f"in the invariant generators",
                    degree_bound,
                    condition_ok=True,
                )
            pieces.append((n, expr))
        reconstruction[name] = pieces
    return ctx, dict(images), reconstruction


def _reconstructed(action, slices, pieces, inclusion):
    """Evaluate reconstruction data back in the input algebra."""
    ring = action.ring
    total = ring.zero()
    subs = {name: rep for name, rep in inclusion.items()}
    for n, expr in pieces:
        coeff = Fraction(1, math.prod(math.factorial(e) for e in n))
        fn = ring.one()
        for f, e in zip(slices.functions, n):
            if e:
                fn = fn * f**e
        if expr.total_degree() == 0:
            back = ring.const(expr.terms.get((0,) * expr.ring.nvars, 0))
        else:
            back = expr.substitute({**subs, **{nm: ring.zero() for nm in expr.ring.names if nm not in subs}})
        total = total + back * fn * coeff
    return action.algebra.nf(total)


def _induced_action(action, ctx, inclusion):
    """Descend the remaining filtration to the invariant presentation."""
    lie = action.lie
    if lie.nlevels <= 1:
        return None
    sub_basis = [lie.basis_names[i] for l in range(1, lie.nlevels) for i in lie.level_indices(l)]
    blocks = [[lie.basis_names[i] for i in lie.level_indices(l)] for l in range(1, lie.nlevels)]
    keep = set(sub_basis)
    brackets = {}
    for a in sub_basis:
        for b in sub_basis:
            ia, ib = lie.index(a), lie.index(b)
            if ia >= ib:
                continue
            combo = {
                lie.basis_names[k]: v
                for k, v in lie.bracket_basis(ia, ib).items()
                if lie.basis_names[k] in keep
            }
            if combo:
                brackets[(a, b)] = combo
    sub_lie = GradedLieAlgebra(lie.weights[1:], blocks, brackets)
    table = {}
    for name in sub_basis:
        i = lie.index(name)
        row = {}
        for new_name, rep in inclusion.items():
            img = action.apply_basis(i, rep)
            if action.algebra.is_zero(img):
                continue
            expr = ctx.rewrite(img)
            if expr is None:
                raise StageError(
                    f"induced image {name}.{new_name} does not descend to the invariant ring"
                )
            row[new_name] = expr
        table[name] = row
    return DerivationAction(ctx.out_algebra, sub_lie, table)


def staged_quotient(action, degree_bound=8):
    """Iterate the one-level quotient over the whole weight filtration.

    Requires the constant-rank condition on the input; the induced action is
    re-validated and re-checked at every stage, and any failure aborts with
    the stage index.
    """
    if any(w > 0 for w in action.ring.weights):
        raise StageError("chart weights must all be nonpositive")
    report = check_cdrs(action)
    if not report["holds"]:
        raise StageError("constant-rank condition fails; run the blow-up first")
    chain = QuotientChain(action)
    current = action
    level_offset = 0
    while current is not None and current.lie.nlevels > 0:
        if current.algebra.is_empty():
            break
        stage_level = level_offset + 1
        stage_report = check_cdrs(current)
        if not stage_report["holds"]:
            raise StageError(f"induced action at stage {stage_level} lost the constant-rank condition")
        slices = find_slices(current, 1, degree_bound)
        ctx, inclusion, reconstruction = invariant_presentation(current, slices, degree_bound)
        violations = []
        for name in current.ring.names:
            got = _reconstructed(current, slices, reconstruction[name], inclusion)
            if not current.algebra.equal(got, current.ring.var(name)):
                violations.append(name)
        if violations:
            raise StageError(f"reconstruction failed at stage {stage_level} for {violations}")
        induced = _induced_action(current, ctx, inclusion)
        if induced is not None:
            bad = induced.validate()
            if bad:
                raise StageError(f"induced action invalid at stage {stage_level}: {bad[:1]}")
        chain.stages.append(
            QuotientStage(
                level=stage_level,
                weight=current.lie.weights[0],
                slices=slices,
                algebra_in=current.algebra,
                action_in=current,
                algebra_out=ctx.out_algebra,
                inclusion=inclusion,
                reconstruction=reconstruction,
                induced_action=induced,
            )
        )
        current = induced
        level_offset += 1
    return chain


def verify_quotient(chain, recheck_reconstruction=True):
    """Independent checks of a computed quotient chain.

    Confirms that every invariant generator is killed by the whole level
    (not only the split directions), that the slice pairing determinant is
    the unit certificate, and that the reconstruction identities hold
    exactly.  Failures are reported, not raised.
    """
    failures = []
    for stage in chain.stages:
        action = stage.action_in
        algebra = stage.algebra_in
        level_rows = action.lie.level_indices(0)
        for name, rep in stage.inclusion.items():
            for mu in level_rows:
                img = action.apply_basis(mu, rep)
                if not algebra.is_zero(img):
                    failures.append(
                        {
                            "stage": stage.level,
                            "kind": "not-invariant",
                            "generator": name,
                            "vector": action.lie.basis_names[mu],
                            "image": str(img),
                        }
                    )
        fs = stage.slices.functions
        if fs:
            rows = [[action.apply_basis(mu, f) for f in fs] for mu in stage.slices.split]
            det = algebra.nf(determinant(rows))
            if det != algebra.ring.one():
                failures.append({"stage": stage.level, "kind": "slice-determinant", "det": str(det)})
        if recheck_reconstruction:
            for name in action.ring.names:
                got = _reconstructed(action, stage.slices, stage.reconstruction[name], stage.inclusion)
                if not algebra.equal(got, action.ring.var(name)):
                    failures.append(
                        {"stage": stage.level, "kind": "reconstruction", "generator": name}
                    )
    return {"ok": not failures, "failures": failures, "affine_dimension": chain.affine_dimension}
