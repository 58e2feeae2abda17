"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT
"""

import random

import pytest
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import ring

from kernel import QTwistError, domain_order
from newton import slope_set
from ore import DimensionError, LeftGroebnerBasis, ModuleElement, OreAlgebraSignature, OreOperator, left_buchberger
from oracle import (
    SequenceTable,
    check_annihilates,
    q_binomial_table,
    q_pochhammer_table,
    rescale_operator,
    twist_table,
    unroll,
    value_field,
)
from twist import (
    ANY_PERIOD,
    Echelon,
    ResidueCoordinates,
    TwistSpec,
    exponent_summary,
    inhomogeneous_basis,
    inhomogeneous_twist,
    m_period,
    tau_omega,
    twist_substitute,
    verify_factorization,
)

from .conftest import (
    QBIN,
    QBIN_NEGATED,
    QP,
    QP_CUBE_ROOT_RATIONAL,
    QP_SQRT,
    QP_SQRT_RATIONAL,
    RUN_STRETCH,
    load,
    op,
    random_operator,
    same_up_to_content,
    zeta,
)


def test_central_qbinomial_by_minus_one():
    T = tau_omega(op(QBIN), zeta(2))
    assert same_up_to_content(T, op(QBIN_NEGATED))
    assert T.order == 2

    report = check_annihilates(T, twist_table(q_binomial_table("central", 30), TwistSpec.single(2)))
    assert report.passed
    assert report.checked == 29


def test_pochhammer_third_root():
    result = twist_substitute(LeftGroebnerBasis([op(QP)]), TwistSpec.single(3), return_before_backsub=True)
    assert same_up_to_content(result.before_backsub[0], op(QP_CUBE_ROOT_RATIONAL))
    assert domain_order(result.basis.signature.domain) == 3
    assert result.rank == 3
    assert result.rank_bound == 3

    assert check_annihilates(result.before_backsub, q_pochhammer_table(30)).passed
    assert check_annihilates(result.basis, twist_table(q_pochhammer_table(30), TwistSpec.single(3))).passed


def test_pochhammer_square_root():
    spec = TwistSpec.single(1, 2)
    result = twist_substitute(LeftGroebnerBasis([op(QP)]), spec, return_before_backsub=True)
    assert same_up_to_content(result.before_backsub[0], op(QP_SQRT_RATIONAL))
    assert same_up_to_content(result.basis[0], op(QP_SQRT))
    assert result.basis[0].order == 4
    assert result.rank_bound == 4

    T = rescale_operator(result.basis[0], spec.roots)
    assert check_annihilates(T, twist_table(q_pochhammer_table(30), spec)).passed


def test_rational_power():
    spec = TwistSpec.single(1, 1, p=2)
    result = twist_substitute(LeftGroebnerBasis([op(QP)]), spec)
    assert same_up_to_content(result.basis[0], op("L - 1 + q^2*M^2"))
    assert check_annihilates(result.basis, twist_table(q_pochhammer_table(20), spec)).passed


def test_identity_twist():
    P = op(QBIN)
    result = twist_substitute(LeftGroebnerBasis([P]), TwistSpec.single())
    assert TwistSpec.single().is_identity
    assert same_up_to_content(result.basis[0], P)
    assert same_up_to_content(tau_omega(P, zeta(1)), P)


def test_cofactors():
    P = op(QBIN)
    result = twist_substitute(LeftGroebnerBasis([P]), TwistSpec.single(2), return_before_backsub=True)
    assert result.cofactors[0] * P == result.before_backsub[0]


def test_twist_spec_validation():
    with pytest.raises(QTwistError, match="not a primitive"):
        TwistSpec.single(4, 1, zeta(4) ** 2)
    with pytest.raises(QTwistError, match="not an 3-th root"):
        TwistSpec.single(3, 1, zeta(4))
    with pytest.raises(QTwistError, match="Invalid twist parameters"):
        TwistSpec.single(2, 0)
    with pytest.raises(QTwistError, match="Unknown q-variable"):
        TwistSpec.build(OreAlgebraSignature.univariate(), {"p": {"m": 2}})


def test_twist_needs_zero_dimensional_input():
    signature = OreAlgebraSignature(("q",), ("M1", "M2"), ("L1", "L2"), (0, 0))
    G = LeftGroebnerBasis([OreOperator.shift_operator(signature, 0) - 1])
    with pytest.raises(DimensionError):
        twist_substitute(G, TwistSpec.single(2))


def test_bivariate_twist():
    signature = OreAlgebraSignature(("q",), ("M1", "M2"), ("L1", "L2"), (0, 0))
    L1, L2 = (OreOperator.shift_operator(signature, k) for k in range(2))
    M1, M2 = (OreOperator.multiplier(signature, k) for k in range(2))
    G = left_buchberger([L1 - M2, L2 - M1])
    spec = TwistSpec.single(2)
    result = twist_substitute(G, spec)
    assert result.rank_bound == 4
    assert 1 <= result.rank <= 4

    K = value_field()
    (q,) = K.gens
    table = SequenceTable(K, {(a, b): q ** (a * b) for a in range(7) for b in range(7)})
    assert check_annihilates(G, table).passed
    assert check_annihilates(result.basis, twist_table(table, spec)).passed


def test_residue_coordinates():
    aux, Q, N = ring("Q,N", QQ, lex)
    q, M = OreAlgebraSignature.univariate().field.gens
    coordinates = ResidueCoordinates((2, 2), aux)
    assert coordinates.split((q**3 + q**2 * M).numer) == {(1, 0): Q, (0, 1): Q}

    # 1 / (1 + q) = (1 - q) / (1 - q^2)
    coords, den = coordinates.of(1 / (1 + q))
    assert coords[(0, 0)] * (1 - Q) == den
    assert coords[(1, 0)] * (1 - Q) == -den


def test_echelon_finds_dependency():
    aux, Q, N = ring("Q,N", QQ, lex)
    echelon = Echelon()
    vector, weights = echelon.reduce({"a": Q, "b": aux.one}, {0: aux.one})
    echelon.insert(vector, weights)
    vector, weights = echelon.reduce({"a": Q * N, "b": N}, {1: aux.one})
    assert vector == {}
    assert weights[0] == -N * weights[1]


CASES = [(1, 2, 1), (1, 3, 1), (1, 3, 3), (1, 1, 2), (1, 2, 2), (1, 1, 3), (1, 3, 2), (2, 2, 1), (2, 1, 2), (2, 3, 1)]


@pytest.mark.parametrize("seed", range(20))
def test_random_twists_annihilate(seed):
    rng = random.Random(seed)
    order, m, k = CASES[seed % len(CASES)]
    P = random_operator(rng, order=order, degree=1)
    spec = TwistSpec.single(m, k)
    result = twist_substitute(LeftGroebnerBasis([P]), spec)
    assert result.rank <= result.rank_bound

    table = unroll(P, [1] * order, 30)
    T = [rescale_operator(g, spec.roots) for g in result.basis]
    assert all(check_annihilates(t, twist_table(table, spec)).passed for t in T)


@pytest.mark.parametrize(
    "m,k,d,bound",
    [(2, 1, 1, 2), (3, 1, 1, 3), (1, 2, 1, 4), (2, 2, 1, 4), (3, 2, 1, 12), (2, 1, 3, 6)],
)
def test_rank_bound(m, k, d, bound):
    assert TwistSpec.single(m, k).rank_bound(OreAlgebraSignature.univariate(), d) == bound


def test_m_period():
    assert m_period(op(QBIN)) == 1
    assert m_period(op("L - q^2*M^2 - 1")) == 2
    assert m_period(op("L^2 - q*M^6*L + M^4")) == 2
    assert m_period(op("L - 1")) == ANY_PERIOD


def test_factorization_central_qbinomial():
    report = verify_factorization(op(QBIN), zeta(2))
    assert report.status == "equal"
    assert report.factors == 2
    assert report.period == 1


def test_factorization_pochhammer():
    report = verify_factorization(op(QP), zeta(3))
    assert report.status == "equal"
    assert report.factors == 3
    assert report.ok


def test_exponent_summary_untwisted_figure_eight():
    element = load("fig41.qw")
    assert exponent_summary(element) == (2, 7, 7)
    twisted = inhomogeneous_twist(element[0], element[1], TwistSpec.single(1))
    assert exponent_summary(twisted) == (2, 7, 7)
    assert same_up_to_content(twisted, element)


def test_inhomogeneous_twist_pochhammer():
    # f_n = (q; q)_n + 1 solves P f = qM 1
    P, B = op(QP), op("q*M")
    assert inhomogeneous_basis(P, B).components == 2
    spec = TwistSpec.single(2)
    twisted = inhomogeneous_twist(P, B, spec)
    table = unroll(ModuleElement(P, B), [2], 30)
    assert check_annihilates(twisted, twist_table(table, spec)).passed


@pytest.mark.slow
def test_figure_eight_second_root():
    element = load("fig41.qw")
    twisted = inhomogeneous_twist(element[0], element[1], TwistSpec.single(2))
    assert exponent_summary(twisted) == (5, 22, 58)
    assert slope_set(twisted) == {-2, 0, 2}
    assert slope_set(element) <= slope_set(twisted)

    table = unroll(element, [1, 1], 20, start=1)
    assert check_annihilates(twisted, twist_table(table, TwistSpec.single(2))).passed


@pytest.mark.slow
@pytest.mark.skipif(not RUN_STRETCH, reason="set TEST_STRETCH to run the order 3 twist of the figure eight knot")
def test_figure_eight_third_root():
    element = load("fig41.qw")
    twisted = inhomogeneous_twist(element[0], element[1], TwistSpec.single(3))
    assert exponent_summary(twisted)[0] == 8
    assert slope_set(twisted) == {-2, 0, 2}
