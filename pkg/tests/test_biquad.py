from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, settings, strategies as st

from biquadeuclid.arith import factorize
from biquadeuclid.biquad import (
    HypothesisError,
    KElement,
    PrimeTriple,
    biquad_field,
    class_number_biquad,
    conductor,
    field_of_triple,
    hilbert_class_field,
    is_square_in_K,
    subfields,
    unit_index,
    verify_unramified,
)
from biquadeuclid.quadfield import PrecisionError, class_number_forms_oracle, fundamental_discriminant

from known_fields import ALL_TRIPLES, TABLE_1, TABLE_2


def test_prime_triple_validation():
    assert PrimeTriple(11, 19, 13).classes_mod4 == (3, 3, 1)
    with pytest.raises(ValueError):
        PrimeTriple(4, 6, 8)
    with pytest.raises(ValueError):
        PrimeTriple(11, 11, 13)


@pytest.mark.parametrize(
    "t, ok",
    [((11, 19, 13), True), ((13, 11, 37), True), ((11, 19, 23), False), ((2, 19, 13), False), ((3, 7, 5), False)],
)
def test_eligibility(t, ok):
    assert PrimeTriple(*t).eligible is ok


@pytest.mark.parametrize("m1, m2, ds", [(11, 247, (11, 247, 2717)), (2, 3, (2, 3, 6)), (6, 10, (6, 10, 15))])
def test_subfields_examples(m1, m2, ds):
    assert tuple(f.d for f in subfields(m1, m2)) == ds
    # the third generator is the squarefree kernel of m1*m2
    n = m1 * m2
    kernel = 1
    for p, e in factorize(n).items():
        kernel *= p ** (e % 2)
    assert kernel == ds[2]


def test_subfields_rejects_degenerate():
    with pytest.raises(ValueError, match="degenerate field"):
        subfields(7, 7)
    with pytest.raises(ValueError, match="not squarefree"):
        subfields(8, 3)


def test_subfield_class_numbers_match_oracle():
    for t in ALL_TRIPLES:
        for f in field_of_triple(PrimeTriple(*t)).subs:
            assert f.h == class_number_forms_oracle(fundamental_discriminant(f.d))


# -- exact arithmetic --


def _element(m1, m2, coeffs):
    return KElement.from_coeffs(m1, m2, coeffs)


coeff = st.fractions(min_value=-50, max_value=50, max_denominator=4)
fields = st.sampled_from([(2, 3), (6, 10), (11, 247), (13, 407), (5, 21)])


@given(fields, st.tuples(coeff, coeff, coeff, coeff), st.tuples(coeff, coeff, coeff, coeff))
@settings(max_examples=200)
def test_multiplication_matches_embeddings(mm, a, b):
    x, y = _element(*mm, a), _element(*mm, b)
    with gmpy2.context(gmpy2.get_context(), precision=200):
        for ex, ey, exy in zip(x.embeddings(200), y.embeddings(200), (x * y).embeddings(200)):
            assert abs(ex * ey - exy) <= 1e-40 * (1 + abs(ex * ey))


@given(st.tuples(coeff, coeff, coeff, coeff))
def test_multiplication_symmetric_in_generators(a):
    # swapping m1 and m2 swaps the c1 and c2 coordinates
    x = _element(6, 10, a)
    sq = x * x
    y = _element(10, 6, (a[0], a[2], a[1], a[3]))
    ysq = y * y
    assert ysq.coeffs == (sq.coeffs[0], sq.coeffs[2], sq.coeffs[1], sq.coeffs[3])


def test_power():
    x = _element(2, 3, (1, 1, 0, 0))
    assert x**0 == _element(2, 3, (1, 0, 0, 0))
    assert x**3 == x * x * x
    with pytest.raises(ValueError):
        x * _element(2, 5, (1, 0, 0, 0))


# -- square test and unit index --


def test_square_of_unit_is_found():
    fld = biquad_field(11, 247)
    u = fld.sub1.unit
    root = is_square_in_K(fld, (2, 0, 0))
    expected = _element(11, 247, (Fraction(u.x, u.denominator), Fraction(u.y, u.denominator), 0, 0))
    assert root in (expected, _element(11, 247, tuple(-c for c in expected.coeffs)))


def test_negative_embedding_is_not_a_square():
    # 1 + sqrt 2 has norm -1, so one embedding of it is negative
    fld = biquad_field(2, 3)
    assert fld.sub1.unit.norm == -1
    assert is_square_in_K(fld, (1, 0, 0)) is None


def test_square_test_precision_cap():
    fld = biquad_field(11, 247)
    with pytest.raises(PrecisionError, match="undecided at max precision"):
        is_square_in_K(fld, (400, 0, 0), max_bits=256)


def test_square_test_rejects_bad_exponents():
    fld = biquad_field(2, 3)
    with pytest.raises(ValueError):
        is_square_in_K(fld, (0, 0, 0))


def test_square_test_consistent_with_class_number_for_11_247():
    fld = biquad_field(11, 247)
    h = [f.h for f in fld.subs]
    # h_K = 2 forces Q * h1*h2*h3 = 8
    assert 8 % (h[0] * h[1] * h[2]) == 0
    index = 8 // (h[0] * h[1] * h[2])
    n_squares = sum(is_square_in_K(fld, v) is not None for v in
                    [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)])
    assert 1 + n_squares == index == unit_index(fld)


def test_unit_index_examples():
    assert unit_index(biquad_field(2, 3)) == 4
    assert unit_index(biquad_field(13, 407)) == 1  # no product of units is a square
    fld = biquad_field(11, 247)
    assert fld.unit_index * fld.sub1.h * fld.sub2.h * fld.sub3.h == 8
    fld = biquad_field(13, 407)
    assert fld.unit_index * fld.sub1.h * fld.sub2.h * fld.sub3.h == 8


@pytest.mark.parametrize("t", [(11, 19, 13), (13, 11, 37), (41, 11, 53)])
def test_class_number_biquad_examples(t):
    assert class_number_biquad(*t) == 2


def test_kubota_on_tables():
    for t in ALL_TRIPLES:
        fld = field_of_triple(PrimeTriple(*t))
        assert fld.unit_index in (1, 2, 4, 8)
        assert 4 * fld.h_K == fld.unit_index * fld.sub1.h * fld.sub2.h * fld.sub3.h
        assert fld.h_K == 2


def test_table_subfield_patterns():
    for t in TABLE_1:
        fld = field_of_triple(PrimeTriple(*t))
        assert sorted(f.h for f in fld.subs) == [1, 2, 2] and fld.unit_index == 2
    for t in TABLE_2:
        fld = field_of_triple(PrimeTriple(*t))
        assert sorted(f.h for f in fld.subs) == [1, 2, 4] and fld.unit_index == 1


def test_known_class_number_one():
    # Q(sqrt 2, sqrt 3) = Q(zeta_24)^+ has class number 1
    assert biquad_field(2, 3).h_K == 1


# -- conductor and class field --


def test_conductor_examples():
    assert conductor((11, 247)) == 4 * 11 * 13 * 19 == 10868
    assert conductor((13, 17 * 29)) == 13 * 17 * 29
    assert conductor((5,)) == 5
    assert field_of_triple(PrimeTriple(11, 19, 13)).conductor == 10868


def test_conductor_is_lcm_of_discriminants_on_tables():
    for q, k, r in ALL_TRIPLES:
        ds = [fundamental_discriminant(d) for d in (q, k * r, q * k * r)]
        f = conductor((q, k * r))
        assert all(f % D == 0 for D in ds)
        assert f == 4 * q * k * r  # some generator is 3 mod 4 in every row


def test_hilbert_class_field_examples():
    h = hilbert_class_field(11, 19, 13)
    assert set(h.generators) == {11, 19, 13}
    assert h.degree_over_K == 2
    assert set(h.quadratic_subfields) == {11, 19, 13, 209, 143, 247, 2717}
    assert set(hilbert_class_field(13, 11, 37).generators) == {13, 11, 37}


def test_hilbert_class_field_guards():
    # (11, 13, 29): eligible, but its class number is not 2
    assert PrimeTriple(11, 13, 29).eligible
    assert class_number_biquad(11, 13, 29) != 2
    with pytest.raises(HypothesisError, match="hypothesis h_K = 2 fails"):
        hilbert_class_field(11, 13, 29)
    with pytest.raises(HypothesisError):
        hilbert_class_field(2, 19, 13)


def test_verify_unramified_examples():
    rep = verify_unramified(11, 19, 13)
    by_p = {e.p: e for e in rep.evidence}
    assert by_p[2].auxiliary == 13
    assert by_p[19].auxiliary == 13
    assert verify_unramified(13, 11, 37).ok
    by_p = {e.p: e for e in verify_unramified(13, 11, 37).evidence}
    assert by_p[13].auxiliary == 11 and by_p[13].discriminant == 44


def test_verify_unramified_tables():
    for t in ALL_TRIPLES:
        rep = verify_unramified(*t)
        assert rep.ok and [e.p for e in rep.evidence] == [2, *t]
        for e in rep.evidence:
            assert e.discriminant % e.p != 0


def test_square_tests_invariant_under_relabeling():
    # (m1, m2) -> (m2, m1) swaps the first two unit slots
    a, b = biquad_field(11, 247), biquad_field(247, 11)
    for v in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]:
        assert (is_square_in_K(a, v) is None) == (is_square_in_K(b, (v[1], v[0], v[2])) is None)
    assert a.unit_index == b.unit_index and a.h_K == b.h_K


def test_conductor_divides_and_ramifies():
    for q, k, r in ALL_TRIPLES:
        f = conductor((q, k * r))
        assert (16 * q * k * r) % f == 0
        subs = [fundamental_discriminant(d) for d in (q, k * r, q * k * r)]
        for p in factorize(f):
            assert any(D % p == 0 for D in subs)
