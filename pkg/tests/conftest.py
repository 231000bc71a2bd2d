import random
from fractions import Fraction

import pytest

from uhat.rings import GradedRing, Ideal, PresentedAlgebra
from uhat.lie import DerivationAction, GradedLieAlgebra


def one_weight_jump():
    """Q[x,y], xi.y = x: the stabiliser jumps along x = 0."""
    R = GradedRing(["x", "y"], [0, -1])
    A = PresentedAlgebra(R)
    L = GradedLieAlgebra([1], [["xi"]])
    return DerivationAction(A, L, {"xi": {"y": R.var("x")}})


def one_weight_free():
    """Q[x,y], xi.y = 1: free translation."""
    R = GradedRing(["x", "y"], [0, -1])
    A = PresentedAlgebra(R)
    L = GradedLieAlgebra([1], [["xi"]])
    return DerivationAction(A, L, {"xi": {"y": R.one()}})


def two_weight_chain():
    """Q[x,y,z], xi2: z->y->x->0 at weight 1, xi1: z->x at weight 2."""
    R = GradedRing(["x", "y", "z"], [0, -1, -2])
    A = PresentedAlgebra(R)
    L = GradedLieAlgebra([2, 1], [["xi1"], ["xi2"]])
    return DerivationAction(
        A, L, {"xi1": {"z": R.var("x")}, "xi2": {"z": R.var("y"), "y": R.var("x")}}
    )


def heisenberg_free():
    """Heisenberg translating its own coordinate ring (free action)."""
    R = GradedRing(["p", "q", "c"], [-1, -1, -2])
    A = PresentedAlgebra(R)
    L = GradedLieAlgebra([2, 1], [["e_c"], ["e_p", "e_q"]], {("e_p", "e_q"): {"e_c": 1}})
    return DerivationAction(
        A,
        L,
        {"e_c": {"c": R.one()}, "e_p": {"p": R.one()}, "e_q": {"q": R.one(), "c": R.var("p")}},
    )


def heisenberg_scaled():
    """Heisenberg action damped by powers of a weight-zero coordinate."""
    R = GradedRing(["x", "p", "q", "c"], [0, -1, -1, -2])
    A = PresentedAlgebra(R)
    L = GradedLieAlgebra([2, 1], [["e_c"], ["e_p", "e_q"]], {("e_p", "e_q"): {"e_c": 1}})
    x = R.var("x")
    return DerivationAction(
        A,
        L,
        {
            "e_c": {"c": x * x},
            "e_p": {"p": x},
            "e_q": {"q": x, "c": x * R.var("p")},
        },
    )


def rank_drop_pair():
    """Two one-weight vectors, one acting by zero: minimal Fitting index 1."""
    R = GradedRing(["x", "y"], [0, -1])
    A = PresentedAlgebra(R)
    L = GradedLieAlgebra([1], [["xi1", "xi2"]])
    return DerivationAction(A, L, {"xi1": {"y": R.var("x")}})


def random_two_level_action(seed):
    """Random valid two-weight abelian scenario ready for the blow-up.

    One weight-2 vector and one weight-1 vector act by random linear maps
    scaled by the weight-zero coordinate, so the rank drops along its zero
    locus; commutation is automatic because images of the weight-(-1) block
    live in the weight-zero subring.  Resamples until the action validates,
    the constant-rank condition fails and the weight-zero stratum meets the
    minimal-rank locus.
    """
    from uhat.blowup import check_wuu
    from uhat.infinitesimal import check_cdrs

    while True:
        rng = random.Random(seed)
        ny = rng.randint(1, 2)
        nz = rng.randint(1, 2)
        names = ["x"] + [f"y{i}" for i in range(ny)] + [f"z{i}" for i in range(nz)]
        weights = [0] + [-1] * ny + [-2] * nz
        R = GradedRing(names, weights)
        A = PresentedAlgebra(R)
        L = GradedLieAlgebra([2, 1], [["a1"], ["b1"]])
        x = R.var("x")

        def rnd():
            return rng.choice([1, -1, 2]) * rng.randint(0, 1)

        t1 = {f"z{i}": x * rnd() for i in range(nz)}
        t2 = {f"y{i}": x * rnd() for i in range(ny)}
        for i in range(nz):
            t2[f"z{i}"] = sum((R.var(f"y{j}") * rnd() for j in range(ny)), R.zero())
        seed += 1
        if not (any(p for p in t1.values()) and any(t2[f"y{i}"] for i in range(ny))):
            continue
        action = DerivationAction(A, L, {"a1": t1, "b1": t2})
        if action.validate():
            continue
        if check_cdrs(action)["holds"]:
            continue
        if not check_wuu(action)[0]:
            continue
        return action


@pytest.fixture
def ga_jump():
    return one_weight_jump()


@pytest.fixture
def ga_free():
    return one_weight_free()


@pytest.fixture
def chain3():
    return two_weight_chain()
