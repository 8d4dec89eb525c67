"""Rational function carriers and the bilinear transform."""

import math

import numpy as np
import pytest
import scipy.signal

from ampflow.errors import SingularMapping
from ampflow.rational import (
    ContinuousRational,
    RationalFilter,
    bilinear,
    frequency_response,
)


def test_continuous_rational_normalizes_monic():
    r = ContinuousRational((2.0, 4.0), (2.0,))
    assert r.num == (1.0, 2.0)
    assert r.den == (1.0,)


def test_continuous_rational_arithmetic():
    a = ContinuousRational((1.0,), (1.0, 1.0))  # 1/(1+s)
    b = ContinuousRational((0.0, 1.0), (1.0,))  # s
    s = 0.5 + 0.25j
    assert np.isclose((a + b)(s), a(s) + b(s))
    assert np.isclose((a * b)(s), a(s) * b(s))
    assert np.isclose((a / b)(s), a(s) / b(s))
    assert np.isclose((2.0 + a)(s), 2.0 + a(s))
    assert np.isclose((3.0 * a)(s), 3.0 * a(s))
    assert np.isclose((1.0 / a)(s), 1.0 / a(s))


def test_shared_denominator_sum_stays_reduced():
    # 1 + g Zs + Zs/r with Zs = (1 + sCR)/(sC): summing terms over the same
    # denominator must not square it, or a removable s/s factor appears
    c, r = 2e-7, 140.0
    zs = ContinuousRational((1.0, c * r), (0.0, c))
    m = 1.0 + 1.7e-3 * zs + zs * (1.0 / 5e4)
    assert len(m.den) == 2  # still first order
    assert m.den[0] == 0.0  # single pole at the origin, from Zs itself


def test_compile_with_rc_degenerated_stage_is_stable():
    from ampflow.compiler import compile_netlist
    from ampflow.netlist import Netlist, RlcBlock, StageParams

    zs = ContinuousRational((1.0, 2e-7 * 140.0), (0.0, 2e-7))
    nl = Netlist(
        1e6,
        ["v1", "v2"],
        [
            StageParams("s1", "CS", 1.5e-3, 5e4, "v1", zs=zs),
            StageParams("s2", "CS", 1.5e-3, 5e4, "v2", zs=zs, input_tap=("b1", "s2")),
        ],
        [
            RlcBlock.highpass_coupler("b1", "v1", 600.0, 1e-6, 8e3, ["s2"]),
            RlcBlock.highpass_coupler("b2", "v2", 600.0, 1e-6, 8e3, []),
        ],
    )
    model = compile_netlist(nl)
    entry = model.transfers[("v2", "v1")]
    assert np.abs(entry.poles()).max() < 1.0
    # capacitive degeneration blocks DC: the response vanishes at omega -> 0
    assert abs(entry.response(1e-6)) < 1e-3 * abs(entry.response(0.3))


def test_continuous_rational_zero_denominator_rejected():
    with pytest.raises(ValueError):
        ContinuousRational((1.0,), (0.0,))
    with pytest.raises(ZeroDivisionError):
        ContinuousRational((1.0,)) / ContinuousRational((0.0,))


def test_filter_identity_response():
    f = RationalFilter((1.0,), (1.0,))
    for w in (0.0, 0.3, math.pi / 2, math.pi):
        assert frequency_response(f, w) == pytest.approx(1.0 + 0.0j)


def test_filter_one_sample_delay():
    f = RationalFilter((0.0, 1.0), (1.0,))
    assert frequency_response(f, math.pi / 2) == pytest.approx(np.exp(-1j * math.pi / 2))


def test_filter_requires_stability():
    with pytest.raises(ValueError):
        RationalFilter((1.0,), (1.0, -1.01))  # pole at z = 1.01
    with pytest.raises(ValueError):
        RationalFilter((1.0,), (1.0, -1.0))  # pole on the circle
    RationalFilter((1.0,), (1.0, -0.99))  # inside: fine


def test_filter_den_leading_normalized():
    f = RationalFilter((2.0,), (2.0, 1.0))
    assert f.den[0] == 1.0
    assert f.num == (1.0,)


def test_bilinear_constant():
    f = bilinear(ContinuousRational.constant(3.5), fs_hz=100.0)
    assert f.num == (3.5,)
    assert f.den == (1.0,)


def test_bilinear_prewarped_corner_magnitude():
    fs = 1.0e6
    fc = 12_345.0
    wc = 2 * math.pi * fc
    g = ContinuousRational((1.0,), (1.0, 1.0 / wc))  # 1/(1 + s/wc)
    filt = bilinear(g, fs, prewarp_hz=fc)
    omega = 2 * math.pi * fc / fs
    assert abs(abs(filt.response(omega)) - 1.0 / math.sqrt(2.0)) < 1e-9


def test_bilinear_maps_stable_poles_inside_circle():
    rng = np.random.default_rng(3)
    fs = 1.0e6
    for _ in range(30):
        poles = -np.exp(rng.uniform(np.log(1e2), np.log(1e6), size=2))
        den = np.polynomial.polynomial.polyfromroots(poles).real
        f = ContinuousRational((1.0,), tuple(den))
        disc = bilinear(f, fs)
        assert np.all(np.abs(disc.poles()) < 1.0)


def test_bilinear_matches_scipy():
    rng = np.random.default_rng(5)
    fs = 5.0e5
    for _ in range(20):
        p = -np.exp(rng.uniform(np.log(1e3), np.log(1e5), size=2))
        zed = -np.exp(rng.uniform(np.log(1e3), np.log(1e5), size=1))
        num = np.polynomial.polynomial.polyfromroots(zed).real
        den = np.polynomial.polynomial.polyfromroots(p).real
        ours = bilinear(ContinuousRational(tuple(num), tuple(den)), fs)
        # scipy wants descending coefficients
        b, a = scipy.signal.bilinear(num[::-1], den[::-1], fs=fs)
        w = np.linspace(0.01, 3.0, 7)
        theirs = np.polyval(b, np.exp(1j * w)) / np.polyval(a, np.exp(1j * w))
        np.testing.assert_allclose(ours.response(w), theirs, rtol=1e-9)


def test_bilinear_singular_at_mapping_point():
    fs = 100.0
    c = 2 * fs
    f = ContinuousRational((1.0,), (-c, 1.0))  # pole at s = +c
    with pytest.raises(SingularMapping):
        bilinear(f, fs)


def test_bilinear_rejects_unstable_input():
    f = ContinuousRational((1.0,), (-1.0, 1.0))  # pole at s = +1
    with pytest.raises(ValueError):
        bilinear(f, 100.0)


def test_frequency_response_flags_near_circle_denominator():
    from ampflow.errors import NumericalSingularity

    r = 1.0 - 1.5e-12  # double pole just inside the stability margin
    f = RationalFilter((1.0,), (1.0, -2 * r, r * r))
    with pytest.raises(NumericalSingularity):
        frequency_response(f, 0.0)
