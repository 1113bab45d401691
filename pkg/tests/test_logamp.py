import cmath
import math

import pytest

from kerrsqueeze import DomainError, LogAmplitude, combine, wrap_phase


def test_wrap_phase_range():
    for x in (-10.0, -math.pi, 0.0, 1.0, math.pi, 7.0, 1e5, -1e5):
        w = wrap_phase(x)
        assert -math.pi < w <= math.pi
        # wrapped value differs from the input by a multiple of 2 pi
        k = round((x - w) / (2 * math.pi))
        assert abs(x - w - 2 * math.pi * k) < 1e-9 * max(1.0, abs(x))


def test_wrap_phase_maps_minus_pi_to_plus_pi():
    assert wrap_phase(-math.pi) == math.pi
    assert wrap_phase(math.pi) == math.pi


def test_one_and_zero():
    one = LogAmplitude.one()
    assert one.log_mag == 0.0 and one.phase == 0.0
    assert one.to_complex() == 1 + 0j

    zero = LogAmplitude.zero()
    assert zero.log_mag == -math.inf
    assert zero.to_complex() == 0j
    assert zero.magnitude == 0.0


def test_zero_absorbs_multiplication():
    z = LogAmplitude.zero() * LogAmplitude(3.0, 1.0)
    assert z.log_mag == -math.inf
    assert z.phase == 0.0


def test_multiply_adds_logs_and_wraps_phases():
    a = LogAmplitude(-1.0, 3.0)
    b = LogAmplitude(-2.0, 3.0)
    c = a * b
    assert c.log_mag == -3.0
    assert c.phase == pytest.approx(wrap_phase(6.0), abs=0)


def test_phase_stored_wrapped():
    a = LogAmplitude(0.0, 5 * math.pi / 2)
    assert a.phase == pytest.approx(math.pi / 2, rel=1e-15)


def test_from_complex_round_trip():
    for z in (0.3 - 0.7j, 1j, -2.0 + 0j, 1e-12 + 1e-12j):
        back = LogAmplitude.from_complex(z).to_complex()
        assert back == pytest.approx(z, rel=1e-14)


def test_to_complex_exact_for_small_log_mag():
    a = LogAmplitude(-0.5, 0.25)
    expected = math.exp(-0.5) * cmath.exp(0.25j)
    assert a.to_complex() == pytest.approx(expected, rel=1e-15)


def test_to_complex_overflow_is_an_error():
    with pytest.raises(OverflowError):
        LogAmplitude(701.0, 0.0).to_complex()
    # at or below 700 the conversion still works
    assert math.isfinite(abs(LogAmplitude(700.0, 0.1).to_complex()))


def test_invalid_values_rejected():
    with pytest.raises(DomainError):
        LogAmplitude(math.nan, 0.0)
    with pytest.raises(DomainError):
        LogAmplitude(math.inf, 0.0)
    with pytest.raises(DomainError):
        LogAmplitude(0.0, math.nan)
    with pytest.raises(DomainError):
        LogAmplitude.from_complex(complex(math.inf, 0.0))


def test_conjugate_negates_phase():
    a = LogAmplitude(-1.0, 0.7)
    assert a.conjugate().phase == -0.7
    assert a.conjugate().log_mag == -1.0


def test_combine_matches_plain_arithmetic():
    a = LogAmplitude.from_complex(0.3 + 0.4j)
    b = LogAmplitude.from_complex(-0.1 + 0.2j)
    got = combine([(0.5 + 0.1j, a), (1.0 - 0.3j, b)]).to_complex()
    want = (0.5 + 0.1j) * (0.3 + 0.4j) + (1.0 - 0.3j) * (-0.1 + 0.2j)
    assert got == pytest.approx(want, rel=1e-14)


def test_combine_survives_deep_underflow():
    # both terms underflow as plain floats; the relative structure survives
    a = LogAmplitude(-50000.0, 0.0)
    b = LogAmplitude(-50000.0, math.pi)
    out = combine([(1.0, a), (0.5, b)])
    assert out.log_mag == pytest.approx(-50000.0 + math.log(0.5), rel=1e-12)


def test_combine_of_nothing_is_zero():
    assert combine([]).log_mag == -math.inf
    assert combine([(0.0, LogAmplitude.one())]).log_mag == -math.inf
