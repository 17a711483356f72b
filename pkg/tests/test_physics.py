"""Scalar material laws: identities, limits, and stability at extremes."""

import numpy as np
import pytest

from ddfv import physics


def test_h_inverse_roundtrip():
    c = np.linspace(1e-6, 1.0 - 1e-6, 1001)
    assert np.allclose(physics.inverse_h(physics.h(c)), c, rtol=0, atol=1e-12)


def test_h_rejects_bounds():
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            physics.h(bad)


def test_inverse_h_extremes():
    assert physics.inverse_h(0.0) == 0.5
    assert physics.inverse_h(800.0) == 1.0
    assert physics.inverse_h(-800.0) == 0.0
    # resolves complements far below one ulp of 1.0
    assert physics.inverse_h(-100.0) == pytest.approx(np.exp(-100.0), rel=1e-12)


def test_softplus_log_sigmoid_identities():
    x = np.linspace(-700, 700, 2001)
    sp = physics.softplus(x)
    assert np.all(np.isfinite(sp)) and np.all(sp >= 0)
    # softplus(x) - softplus(-x) = x
    assert np.max(np.abs(sp - physics.softplus(-x) - x)) < 1e-12 * 700
    # log_sigmoid(x) = -softplus(-x)
    assert np.max(np.abs(physics.log_sigmoid(x) + physics.softplus(-x))) == 0.0
    # agree with the naive formulas where those are representable
    xs = np.linspace(-30, 30, 101)
    assert np.allclose(physics.softplus(xs), np.log1p(np.exp(xs)), rtol=1e-14)


def test_nu_activity_beta_r():
    c = np.linspace(0.01, 0.99, 99)
    assert np.allclose(physics.nu(c), physics.h(c) - np.log(c), atol=1e-12)
    assert np.allclose(physics.activity(c), np.exp(physics.h(c)), rtol=1e-12)
    assert np.allclose(physics.beta(c), 1.0 - c)
    assert np.allclose(physics.r(c), physics.nu(c))
    assert np.allclose(physics.r_prime(c), 1.0 / (1.0 - c))


def test_entropy_extended_by_zero():
    assert physics.entropy_H(0.0) == 0.0
    assert physics.entropy_H(1.0) == 0.0
    assert physics.entropy_H(0.5) == pytest.approx(np.log(0.5), rel=1e-14)
    # convex with minimum at 1/2
    c = np.linspace(0.01, 0.99, 99)
    vals = physics.entropy_H(c)
    assert np.min(vals) >= np.log(0.5)


def test_bernoulli_at_zero_exact():
    assert physics.bernoulli(0.0) == 1.0


def test_bernoulli_reflection_identity():
    x = np.linspace(-50.0, 50.0, 10_000)
    err = physics.bernoulli(x) - physics.bernoulli(-x) + x
    assert np.max(np.abs(err)) < 1e-13 * max(1.0, 50.0)


def test_bernoulli_finite_positive_wide():
    x = np.linspace(-700.0, 700.0, 4001)
    b = physics.bernoulli(x)
    assert np.all(np.isfinite(b))
    assert np.all(b > 0)


def test_bernoulli_branch_continuity():
    # values straddling the internal branch switches agree to rounding
    for edge in (1e-4, 40.0):
        lo = physics.bernoulli(edge * (1 - 1e-9))
        hi = physics.bernoulli(edge * (1 + 1e-9))
        assert lo == pytest.approx(hi, rel=1e-8)


def test_bernoulli_prime_matches_fd():
    x = np.concatenate([np.linspace(-30, 30, 601), [1e-5, -1e-5, 45.0]])
    fd = (physics.bernoulli(x + 1e-6) - physics.bernoulli(x - 1e-6)) / 2e-6
    assert np.allclose(physics.bernoulli_prime(x), fd, atol=1e-7)


def test_dr_symmetric_and_at_least_one():
    rng = np.random.default_rng(3)
    ck, cl = rng.uniform(0.01, 0.99, (2, 1000))
    s = physics.dr(ck, cl)
    assert np.all(s >= 1.0)
    assert np.allclose(s, physics.dr(cl, ck), rtol=1e-13)


def test_dr_coincidence_limit():
    c = 0.37
    assert physics.dr(c, c) == pytest.approx(1.0 / (1.0 - c), rel=1e-12)
    # near-coincidence switches to the midpoint limit smoothly
    assert physics.dr(c, c * (1 + 1e-13)) == pytest.approx(
        1.0 / (1.0 - c), rel=1e-9)


def test_dr_secant_value():
    ck, cl = 0.2, 0.8
    expected = ((physics.h(ck) - physics.h(cl))
                / (np.log(ck) - np.log(cl)))
    assert physics.dr(ck, cl) == pytest.approx(expected, rel=1e-13)
