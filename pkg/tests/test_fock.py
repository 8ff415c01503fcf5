"""Exactness and algebra laws of the creation-operator polynomials."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ghzsim.fock import (
    AH,
    AV,
    BH,
    BV,
    GH,
    GV,
    HV,
    ZV,
    Amplitude,
    Beam,
    HH,
    INV_SQRT2,
    I_UNIT,
    InvalidModeError,
    IrrationalValueError,
    Mode,
    ONE,
    OrderMixError,
    Polarization,
    SQRT2,
    StatePolynomial,
    TRIGGER,
    ZERO,
    ZH,
    amplitude,
    amplitude_from_json,
    amplitude_to_json,
    as_pattern,
    creation,
    equal_up_to_phase,
    filter_terms,
    gamma_power,
    monomial,
    multiply,
    norm_squared,
    pattern_from_json,
    pattern_to_json,
    rational,
    render_amplitude,
    render_polynomial,
    substitute,
    total_photons,
    vacuum_unit,
)


# ---------------------------------------------------------------------------
# amplitude ring
# ---------------------------------------------------------------------------


def test_sqrt2_squares_to_two():
    assert SQRT2 * SQRT2 == rational(2)
    assert INV_SQRT2 * INV_SQRT2 == Amplitude(Fraction(1, 2))
    assert INV_SQRT2 * SQRT2 == ONE


def test_imaginary_unit():
    assert I_UNIT * I_UNIT == rational(-1)
    assert I_UNIT.conjugate() == -I_UNIT


def test_mixed_product():
    a = Amplitude(1, 1)  # 1 + i
    b = Amplitude(0, 0, 1, -1)  # (1 - i) sqrt2
    # (1+i)(1-i) sqrt2 = 2 sqrt2
    assert a * b == Amplitude(0, 0, 2)


def test_abs_squared():
    assert (INV_SQRT2 * I_UNIT).abs_squared() == Amplitude(Fraction(1, 2))
    assert Amplitude(1, 1).abs_squared() == Amplitude(2)
    # |1 + sqrt2|^2 = 3 + 2 sqrt2 stays in the ring
    assert Amplitude(1, 0, 1).abs_squared() == Amplitude(3, 0, 2)


def test_inverse_and_division():
    values = [
        Amplitude(Fraction(3, 7)),
        INV_SQRT2,
        Amplitude(1, 2, Fraction(1, 3), -1),
        I_UNIT,
        Amplitude(1, 0, 1),  # 1 + sqrt2
    ]
    for value in values:
        assert value * value.inverse() == ONE
    assert (SQRT2 / SQRT2) == ONE
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


def test_order_bookkeeping():
    g = gamma_power(1)
    assert (g * g).order == 2
    with pytest.raises(OrderMixError):
        gamma_power(1) + gamma_power(2)
    # adding zero is always allowed
    assert gamma_power(2) + ZERO == gamma_power(2)
    with pytest.raises(OrderMixError):
        gamma_power(1).inverse()


def test_to_fraction():
    assert Amplitude(Fraction(5, 3)).to_fraction() == Fraction(5, 3)
    with pytest.raises(IrrationalValueError):
        SQRT2.to_fraction()
    with pytest.raises(IrrationalValueError):
        I_UNIT.to_fraction()


def test_amplitude_rendering():
    assert render_amplitude(rational(-2)) == "-2"
    assert render_amplitude(INV_SQRT2) == "1/2·√2"
    assert render_amplitude(SQRT2) == "√2"
    assert render_amplitude(-SQRT2) == "-√2"
    assert render_amplitude(I_UNIT) == "i"
    assert render_amplitude(Amplitude(1, 1)) == "(1+i)"
    assert render_amplitude(Amplitude(1, 0, Fraction(-1, 2))) == "1 - 1/2·√2"
    assert render_amplitude(ZERO) == "0"


def test_amplitude_json_roundtrip():
    value = Amplitude(Fraction(1, 3), -2, Fraction(5, 7), Fraction(0), 2)
    assert amplitude_from_json(amplitude_to_json(value)) == value


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------


def test_mode_validation():
    assert Mode(Beam.A, Polarization.H) == AH
    with pytest.raises(InvalidModeError):
        Mode(Beam.A_H, Polarization.V)  # the trigger arm carries only H
    with pytest.raises(InvalidModeError):
        Mode(Beam.A_V, Polarization.H)


def test_mode_ordering_is_total():
    modes = [ZV, AH, TRIGGER, BH, GV]
    ordered = sorted(modes)
    assert ordered == sorted(modes, key=lambda m: m.sort_key)
    assert ordered[0] == AH


def test_pattern_json_roundtrip():
    pattern = as_pattern({TRIGGER: 1, GH: 1, HV: 1, ZV: 1})
    assert pattern_from_json(pattern_to_json(pattern)) == pattern
    with pytest.raises(InvalidModeError):
        pattern_from_json({"nope": 1})


# ---------------------------------------------------------------------------
# polynomial operations: spec examples
# ---------------------------------------------------------------------------


def test_multiply_same_mode_powers():
    squared = multiply(creation(AH), creation(AH))
    assert squared == monomial({AH: 2})


def test_multiply_binomial_square():
    pair = creation(AV) * creation(BH) - creation(AH) * creation(BV)
    squared = pair * pair
    expected = StatePolynomial(
        {
            as_pattern({AV: 2, BH: 2}): ONE,
            as_pattern({AV: 1, BH: 1, AH: 1, BV: 1}): rational(-2),
            as_pattern({AH: 2, BV: 2}): ONE,
        }
    )
    assert squared == expected


def test_multiply_by_vacuum_unit_is_identity():
    poly = creation(AV) * creation(BH) * rational(3)
    assert multiply(poly, vacuum_unit()) == poly


def test_substitute_single_rule():
    rule = {BH: ((CH := Mode(Beam.C, Polarization.H), INV_SQRT2), (GH, INV_SQRT2))}
    image = substitute(creation(BH), rule)
    assert image == creation(CH) * INV_SQRT2 + creation(GH) * INV_SQRT2


def test_substitute_square_expands_multinomially():
    from ghzsim.fock import CH

    rule = {BH: ((CH, INV_SQRT2), (GH, INV_SQRT2))}
    image = substitute(monomial({BH: 2}), rule)
    half = Amplitude(Fraction(1, 2))
    expected = (
        monomial({CH: 2}, half)
        + monomial({CH: 1, GH: 1}, ONE)
        + monomial({GH: 2}, half)
    )
    assert image == expected


def test_substitute_passthrough():
    rule = {BH: ((GH, ONE),)}
    assert substitute(creation(AH), rule) == creation(AH)


def test_filter_terms_partition():
    poly = creation(AH) + creation(AV) + monomial({BH: 2})
    heavy = filter_terms(poly, lambda pat: total_photons(pat) > 1)
    light = filter_terms(poly, lambda pat: total_photons(pat) <= 1)
    assert heavy + light == poly
    assert filter_terms(poly, lambda pat: True) == poly


def test_amplitude_lookup_and_linearity():
    poly = creation(AH) * rational(2) + creation(AV) * I_UNIT
    assert amplitude(poly, {AH: 1}) == rational(2)
    assert amplitude(poly, {BH: 1}) == ZERO
    other = creation(AH) * rational(3)
    assert amplitude(poly + other, {AH: 1}) == amplitude(poly, {AH: 1}) + amplitude(
        other, {AH: 1}
    )


def test_norm_two_photon_fock():
    assert norm_squared(monomial({AH: 2})) == rational(2)  # 2!


def test_norm_right_part_is_one():
    # hand-derived: two orthogonal single-occupancy terms, each of norm 1/2
    right = (
        monomial({GH: 1, HV: 1, ZV: 1}, INV_SQRT2)
        + monomial({GV: 1, HH: 1, ZH: 1}, INV_SQRT2)
    )
    assert norm_squared(right) == ONE


def test_norm_empty_polynomial():
    assert norm_squared(StatePolynomial()) == ZERO


def test_norm_rejects_mixed_orders():
    mixed = creation(AH, gamma_power(1)) + monomial({AV: 2}, gamma_power(2))
    with pytest.raises(OrderMixError):
        norm_squared(mixed)


def test_equal_up_to_phase():
    poly = creation(AH) + creation(AV) * I_UNIT
    assert equal_up_to_phase(poly, poly * rational(-1))
    assert equal_up_to_phase(poly, poly * I_UNIT)
    # (1+i)/sqrt2 is a unit-modulus ring element
    assert equal_up_to_phase(poly, poly * (Amplitude(1, 1) * INV_SQRT2))
    assert not equal_up_to_phase(poly, poly * rational(2))
    assert not equal_up_to_phase(poly, creation(AH))
    # a relative phase between terms is not a global phase
    twisted = creation(AH) - creation(AV) * I_UNIT
    assert not equal_up_to_phase(poly, twisted)


def test_render_polynomial_golden():
    post_trigger = monomial({AH: 1, AV: 1, BH: 1, BV: 1}, rational(-2, order=2))
    assert render_polynomial(post_trigger) == "(-2)·γ^2·aH†·aV†·bH†·bV†"
    assert render_polynomial(StatePolynomial()) == "0"
    assert (
        render_polynomial(monomial({TRIGGER: 1, GH: 2}, INV_SQRT2))
        == "(1/2·√2)·a_H†·g_H†^2"
    )


# ---------------------------------------------------------------------------
# algebra laws on random small polynomials
# ---------------------------------------------------------------------------

_MODES = st.sampled_from([AH, AV, BH, BV])

_amplitudes = st.builds(
    Amplitude,
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
    st.fractions(min_value=-2, max_value=2, max_denominator=2),
    st.fractions(min_value=-2, max_value=2, max_denominator=2),
)

_patterns = st.dictionaries(_MODES, st.integers(min_value=1, max_value=2), max_size=3)

_polynomials = st.lists(
    st.tuples(_patterns, _amplitudes), min_size=0, max_size=3
).map(lambda items: StatePolynomial([(as_pattern(p), a) for p, a in items]))

_BS_RULE = {
    BH: ((Mode(Beam.C, Polarization.H), INV_SQRT2), (GH, INV_SQRT2)),
    BV: ((Mode(Beam.C, Polarization.V), INV_SQRT2), (GV, INV_SQRT2)),
}


@settings(max_examples=60, deadline=None)
@given(_polynomials, _polynomials)
def test_multiply_commutes(p, q):
    assert multiply(p, q) == multiply(q, p)


@settings(max_examples=60, deadline=None)
@given(_polynomials, _polynomials, _polynomials)
def test_multiply_distributes_and_associates(p, q, r):
    assert multiply(p, q + r) == multiply(p, q) + multiply(p, r)
    assert multiply(multiply(p, q), r) == multiply(p, multiply(q, r))


@settings(max_examples=60, deadline=None)
@given(_polynomials, _polynomials)
def test_substitute_is_linear(p, q):
    assert substitute(p + q, _BS_RULE) == substitute(p, _BS_RULE) + substitute(
        q, _BS_RULE
    )


@settings(max_examples=60, deadline=None)
@given(_patterns)
def test_substitute_preserves_photon_number(pattern):
    mono = monomial(as_pattern(pattern))
    count = total_photons(as_pattern(pattern))
    for term_pattern in substitute(mono, _BS_RULE).terms:
        assert total_photons(term_pattern) == count


@settings(max_examples=60, deadline=None)
@given(_polynomials)
def test_canonicalization_is_idempotent(p):
    assert StatePolynomial(p.terms) == p


@settings(max_examples=60, deadline=None)
@given(_polynomials)
def test_filter_complement_recovers(p):
    pred = lambda pat: total_photons(pat) % 2 == 0
    assert filter_terms(p, pred) + filter_terms(p, lambda pat: not pred(pat)) == p
