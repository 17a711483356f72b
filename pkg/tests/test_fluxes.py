"""Flux kernels: structural identities, derivatives, face functionals."""

import numpy as np
import pytest

from ddfv import physics
from ddfv.fluxes import (ALL_SCHEMES, SchemeKind, coercivity_profile,
                         face_concentration, face_dissipation, flux,
                         flux_with_derivatives, flux_with_derivatives_logit,
                         mean_face_concentration)

RNG = np.random.default_rng(2024)
N = 20_000

CK = RNG.uniform(1e-3, 1.0 - 1e-3, N)
CL = RNG.uniform(1e-3, 1.0 - 1e-3, N)
PK = RNG.uniform(-10.0, 10.0, N)
PL = RNG.uniform(-10.0, 10.0, N)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_antisymmetry(scheme):
    f = np.asarray(flux(scheme, CK, CL, PK, PL))
    g = np.asarray(flux(scheme, CL, CK, PL, PK))
    scale = np.maximum(np.abs(f), 1e-30)
    assert np.max(np.abs(f + g) / scale) < 1e-12


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_equilibrium_vanishes(scheme):
    f = np.asarray(flux(scheme, CK, CK, PK, PK))
    assert np.max(np.abs(f)) == 0.0


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_gauge_invariance(scheme):
    # only potential differences enter
    f = np.asarray(flux(scheme, CK, CL, PK, PL))
    g = np.asarray(flux(scheme, CK, CL, PK + 3.7, PL + 3.7))
    assert np.allclose(f, g, rtol=1e-12, atol=1e-12)


def test_sedan_zero_field_secant():
    # at equal potentials the Sedan flux is the difference of the
    # diffusion enhancement r(c) = -log(1-c).  Where the difference is
    # heavily cancelled (cK ~ cL) even the reference itself carries a
    # relative error ~eps*r/|dr|, so there the comparison is relative
    # to the operand scale instead.
    f = np.asarray(flux(SchemeKind.SEDAN, CK, CL, PK, PK))
    expected = physics.r(CK) - physics.r(CL)
    operand_scale = np.abs(physics.r(CK)) + np.abs(physics.r(CL))
    resolved = np.abs(expected) >= 1e-3 * operand_scale
    err = np.abs(f - expected)
    assert np.max(err[resolved] / np.abs(expected[resolved])) < 1e-12
    assert np.max(err / operand_scale) < 1e-12


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_dissipation_nonnegative(scheme):
    d = np.asarray(face_dissipation(scheme, CK, CL, PK, PL))
    assert np.min(d) >= -1e-14


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_face_concentration_bounds(scheme):
    val = np.asarray(face_concentration(scheme, CK, CL, PK, PL))
    lo = np.minimum(CK, CL)
    hi = np.maximum(CK, CL)
    if scheme is SchemeKind.ACTIVITY:
        # only the halved lower bound holds for the activity kernel
        assert np.all(val >= lo / 2.0 - 1e-12)
    else:
        assert np.all(val >= lo - 1e-12)
        assert np.all(val <= hi + 1e-12)


def test_face_concentration_near_zero_jump_limit():
    # approaching equilibrium the quotient tends to the analytic limit
    for scheme in ALL_SCHEMES:
        at = face_concentration(scheme, 0.4, 0.4, 0.0, 0.0)
        nearby = face_concentration(scheme, 0.4, 0.4, 0.0, 1e-7)
        assert at == pytest.approx(nearby, rel=1e-5)


def test_mean_face_concentration_between():
    val = np.asarray(mean_face_concentration(CK, CL))
    assert np.all(val >= np.minimum(CK, CL) - 1e-12)
    assert np.all(val <= np.maximum(CK, CL) + 1e-12)
    assert mean_face_concentration(0.3, 0.3) == pytest.approx(0.3, abs=1e-14)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_derivatives_match_finite_differences(scheme):
    rng = np.random.default_rng(11)
    ck, cl = rng.uniform(0.05, 0.95, (2, 200))
    pk, pl = rng.uniform(-3.0, 3.0, (2, 200))
    f, dck, dcl, dpk, dpl = flux_with_derivatives(scheme, ck, cl, pk, pl)
    assert np.allclose(f, flux(scheme, ck, cl, pk, pl), rtol=1e-13)
    eps = 1e-6
    for analytic, args in (
            (dck, (ck + eps, cl, pk, pl, ck - eps, cl, pk, pl)),
            (dcl, (ck, cl + eps, pk, pl, ck, cl - eps, pk, pl)),
            (dpk, (ck, cl, pk + eps, pl, ck, cl, pk - eps, pl)),
            (dpl, (ck, cl, pk, pl + eps, ck, cl, pk, pl - eps))):
        hi = np.asarray(flux(scheme, *args[:4]))
        lo = np.asarray(flux(scheme, *args[4:]))
        fd = (hi - lo) / (2 * eps)
        assert np.allclose(analytic, fd, rtol=5e-5, atol=5e-6)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_logit_kernel_matches_c_kernel(scheme):
    rng = np.random.default_rng(5)
    ck, cl = rng.uniform(0.02, 0.98, (2, 500))
    pk, pl = rng.uniform(-5.0, 5.0, (2, 500))
    wk, wl = physics.h(ck), physics.h(cl)
    f_c = np.asarray(flux(scheme, ck, cl, pk, pl))
    f_w, dwk, dwl, dpk_w, dpl_w = flux_with_derivatives_logit(
        scheme, wk, wl, pk, pl)
    scale = np.maximum(np.abs(f_c), 1.0)
    assert np.max(np.abs(f_w - f_c) / scale) < 1e-11
    # chain rule: dF/dw = dF/dc * dc/dw
    _, dck, dcl, dpk_c, dpl_c = flux_with_derivatives(scheme, ck, cl, pk, pl)
    jac_k = dck * ck * (1.0 - ck)
    jac_l = dcl * cl * (1.0 - cl)
    dscale = np.maximum(np.abs(jac_k), 1.0)
    assert np.max(np.abs(dwk - jac_k) / dscale) < 1e-9
    assert np.max(np.abs(dwl - jac_l) / dscale) < 1e-9
    assert np.allclose(dpk_w, dpk_c, rtol=1e-10, atol=1e-12)
    assert np.allclose(dpl_w, dpl_c, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_logit_kernel_stable_in_deep_saturation(scheme):
    # concentrations closer to 1 than one ulp: the c variable cannot
    # represent these states, w can
    wk, wl = 45.0, 44.0
    pk, pl = -44.5, -44.2
    out = flux_with_derivatives_logit(scheme, wk, wl, pk, pl)
    assert all(np.isfinite(np.asarray(v)).all() for v in out)
    # finite-difference check in w stays meaningful at this scale
    eps = 1e-5
    f_hi = flux_with_derivatives_logit(scheme, wk + eps, wl, pk, pl)[0]
    f_lo = flux_with_derivatives_logit(scheme, wk - eps, wl, pk, pl)[0]
    fd = (f_hi - f_lo) / (2 * eps)
    assert np.asarray(out[1]) == pytest.approx(fd, rel=1e-4, abs=1e-10)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_logit_kernel_antisymmetry(scheme):
    rng = np.random.default_rng(17)
    wk, wl = rng.uniform(-40, 40, (2, 500))
    pk, pl = rng.uniform(-5, 5, (2, 500))
    f = np.asarray(flux_with_derivatives_logit(scheme, wk, wl, pk, pl)[0])
    g = np.asarray(flux_with_derivatives_logit(scheme, wl, wk, pl, pk)[0])
    scale = np.maximum(np.abs(f), 1e-30)
    assert np.max(np.abs(f + g) / scale) < 1e-11


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
@pytest.mark.parametrize("direction", ["to_zero", "to_one"])
def test_coercivity_profile_increases(scheme, direction):
    prof = coercivity_profile(scheme, fixed_c=0.5, big_m=1.0,
                              direction=direction, k_max=8)
    assert prof.shape == (8,)
    assert np.all(np.isfinite(prof))
    tail = prof[2:]  # k = 3..8
    assert np.all(np.diff(tail) > 0)


def test_coercivity_profile_rejects_bad_args():
    with pytest.raises(ValueError):
        coercivity_profile(SchemeKind.SEDAN, 0.0, 1.0, "to_zero", 4)
    with pytest.raises(ValueError):
        coercivity_profile(SchemeKind.SEDAN, 0.5, -1.0, "to_zero", 4)
    with pytest.raises(ValueError):
        coercivity_profile(SchemeKind.SEDAN, 0.5, 1.0, "sideways", 4)


def test_scheme_from_name():
    assert SchemeKind.from_name("sedan") is SchemeKind.SEDAN
    assert SchemeKind.from_name("BESSEMOULIN_CHATARD") \
        is SchemeKind.BESSEMOULIN_CHATARD
    with pytest.raises(ValueError):
        SchemeKind.from_name("upwind")
