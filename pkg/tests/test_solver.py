from fractions import Fraction as F

import pytest

from gennum.dsl import parse_expression as P
from gennum.exact import ExactReal
from gennum.geometry import DressedBall, EuclideanModel, PreconditionError, check_condition_E
from gennum.nets import Const
from gennum.scale import Representative, valuation
from gennum.solver import (
    NestedBallSequence,
    RationalFormula,
    align_center,
    apply_reset,
    build_proper_models,
    certify,
    check_nested,
    containment_threshold,
    intersect_diagonal,
    intersect_prefix,
    verify_chain,
)

K = 256


def geometric():
    return NestedBallSequence.partial_sums(1, RationalFormula("affine", 1, 0), RationalFormula("affine", 1, 1))


def dense():
    h = RationalFormula("harmonic", 1, 1)
    return NestedBallSequence.partial_sums(1, h, h)


def model(center, rho, c=None):
    return EuclideanModel(Representative(P(center)), F(rho), c or Const(1))


def test_check_nested_examples():
    assert check_nested(geometric(), 10).ok
    shifted = [DressedBall(P("e^(1)") * P("0") + sum((P(f"e^({j})") for j in range(1, i + 1)), P("0"))
                           + (P("1") if i >= 5 else P("0")), i) for i in range(1, 9)]
    rep = check_nested(NestedBallSequence.from_list(shifted), 8)
    assert not rep.ok and rep.failure == 5
    const = NestedBallSequence.from_list([DressedBall(P("0"), 1)] * 6)
    assert check_nested(const, 6).ok


def test_align_sphere_case():
    c1, rep2 = align_center(model("0", 1), P("e^(1)"), 2)
    assert all(c1.value(k) == ExactReal.rational(2) for k in range(1, 40))
    assert rep2.overridden_indices() == []
    check_condition_E(c1)


def test_align_interior_case():
    m1 = model("0", 1)
    c1, rep2 = align_center(m1, P("4*e^(2)"), 2)
    assert c1 == Const(1)
    assert rep2.overridden_indices() == [1, 2]
    assert rep2.base == P("4*e^(2)")
    for k in range(1, K + 1):
        assert abs(rep2.value_at(k)) <= ExactReal.power2(k).scale(F(1, 2))


def test_align_same_class():
    c1, rep2 = align_center(model("e^(1)", 1), P("e^(1)"), 3)
    assert c1 == Const(1) and rep2.overridden_indices() == []


def test_align_rejects_non_nested():
    with pytest.raises(PreconditionError):
        align_center(model("0", 1), P("1"), 2)
    with pytest.raises(PreconditionError):
        align_center(model("0", 1), P("e^(2)"), 1)


def test_threshold_examples():
    assert containment_threshold(model("0", 1), model("0", 2, Const(3))) == 3
    assert containment_threshold(model("0", 1, Const(2)), model("0", 2)) == 1
    with pytest.raises(PreconditionError):
        containment_threshold(model("0", 1), model("0", 1))


def test_apply_reset_example():
    m1 = model("0", 1)
    _, rep2 = align_center(m1, P("4*e^(2)"), 2)
    placeholder = EuclideanModel(rep2, F(2), Const(1))
    _, rep3 = align_center(placeholder, P("4*e^(2) + e^(4)"), 4)
    m2hat = EuclideanModel(rep2, F(2), Const(3))
    k0 = containment_threshold(m1, m2hat)
    assert k0 == 3
    m2, rep3b = apply_reset(m1, m2hat, rep3, k0, K)
    assert [k for k in range(1, 10) if rep3b.value_at(k) == rep2.value_at(k)][:2] == [1, 2]
    assert rep3b.base == rep3.base
    # k >= k0 is untouched
    for k in range(k0, 40):
        assert m2.cnet.value(k) == ExactReal.rational(3)
        assert rep3b.value_at(k) == rep3.value_at(k)


def test_apply_reset_trivial():
    m1 = model("0", 1, Const(2))
    m2 = model("0", 2)
    new, rep = apply_reset(m1, m2, None, 1, 64)
    assert new.cnet == m2.cnet and rep is None


def test_geometric_chain():
    chain = build_proper_models(geometric(), 5, K)
    assert len(chain.models) == 5
    assert verify_chain(chain) == 2 * K * 4


def test_single_ball_chain():
    chain = build_proper_models(geometric(), 1, K)
    assert len(chain.models) == 1
    assert chain.models[0].cnet == Const(1)
    assert intersect_prefix(geometric(), 1) == P("e^(1)")


def test_dense_chain():
    chain = build_proper_models(dense(), 10, K)
    verify_chain(chain)
    # every scaling net is 1 beyond its switch, so k0 is the least k with
    # 2**(-k/(i(i-1))) <= 1/2, i.e. k0 = i(i-1)
    assert chain.thresholds == (1,) + tuple(i * (i - 1) for i in range(2, 11))


def test_prefix_witnesses():
    x = intersect_prefix(geometric(), 20)
    assert x == geometric().ball(20).center
    for i in range(1, 21):
        assert valuation(x - geometric().ball(i).center) >= i + 1


def test_diagonal_geometric():
    w = intersect_diagonal(geometric())
    cert = certify(w, 3, 64)
    assert cert.checked == 62 and cert.exceptional_below == 3
    assert certify(w, 1, 64).exceptional_below == 1


def test_diagonal_dense_k128():
    w = intersect_diagonal(dense(), 128)
    for i in range(1, 21):
        certify(w, i, 128)


def test_diagonal_needs_rule():
    with pytest.raises(PreconditionError):
        intersect_diagonal(NestedBallSequence.from_list([DressedBall(P("0"), 1)]))


def test_duplicate_radii_skipped():
    balls = [DressedBall(P("0"), 1), DressedBall(P("e^(2)"), 1), DressedBall(P("e^(2)"), 2)]
    chain = build_proper_models(NestedBallSequence.from_list(balls), 3, 64)
    assert chain.raw_index == (1, 3)
