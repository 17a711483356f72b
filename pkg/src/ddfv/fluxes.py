"""The four two-point flux kernels and the face functionals built on them.

Each kernel maps the primary unknowns on both sides of a face,
(c_left, c_right, phi_left, phi_right), to a dimensionless flux density;
the physical face flux is transmissibility * kernel value.  All kernels
are antisymmetric under exchanging the two sides, only potential
differences enter, and every kernel vanishes at equilibrium
(equal concentrations and potentials).
"""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from . import physics

__all__ = [
    "SchemeKind",
    "FaceState",
    "flux",
    "flux_with_derivatives",
    "flux_with_derivatives_logit",
    "face_concentration",
    "face_dissipation",
    "mean_face_concentration",
    "coercivity_profile",
]

# Electrochemical jumps below this magnitude use the analytic 0/0 limit.
_JUMP_GUARD = 1e-10


class SchemeKind(enum.Enum):
    """Selector among the four flux discretizations."""

    CENTERED = "centered"
    SEDAN = "sedan"
    ACTIVITY = "activity"
    BESSEMOULIN_CHATARD = "bess_ch"

    @classmethod
    def from_name(cls, name: str) -> "SchemeKind":
        for kind in cls:
            if kind.value == name or kind.name.lower() == name.lower():
                return kind
        raise ValueError(f"unknown scheme {name!r}; expected one of "
                         f"{[k.value for k in cls]}")


ALL_SCHEMES = tuple(SchemeKind)


class FaceState(NamedTuple):
    """Unknowns adjacent to one face (concentrations in (0,1))."""

    c_left: float
    c_right: float
    phi_left: float
    phi_right: float


def _electrochemical_jump(ck, cl, pk, pl):
    # grouped so the jump vanishes exactly at equilibrium
    return (physics.h(ck) - physics.h(cl)) + (np.asarray(pk, float)
                                              - np.asarray(pl, float))


def _sedan_value(q, ck, cl):
    """B(q) ck - B(-q) cl through the even part of the Bernoulli function.

    E(q) = B(|q|) + |q|/2 is even, so the rearrangement
    (ck - cl) E(q) - q (ck + cl)/2 is exactly antisymmetric under the
    face swap and, unlike the direct difference of the two O(1)
    products, loses no precision when the flux is small.
    """
    aq = np.abs(q)
    even = physics.bernoulli(aq) + 0.5 * aq
    return (ck - cl) * even - q * (0.5 * (ck + cl))


def flux(scheme: SchemeKind, ck, cl, pk, pl):
    """Dimensionless flux density from the left to the right cell."""
    ck = np.asarray(ck, float)
    cl = np.asarray(cl, float)
    pk = np.asarray(pk, float)
    pl = np.asarray(pl, float)

    if scheme is SchemeKind.CENTERED:
        jump = _electrochemical_jump(ck, cl, pk, pl)
        out = 0.5 * (ck + cl) * jump
    elif scheme is SchemeKind.SEDAN:
        q = (pl + physics.nu(cl)) - (pk + physics.nu(ck))
        out = _sedan_value(q, ck, cl)
    elif scheme is SchemeKind.ACTIVITY:
        y = pl - pk
        mean_beta = 0.5 * (physics.beta(ck) + physics.beta(cl))
        out = mean_beta * (physics.bernoulli(y) * physics.activity(ck)
                           - physics.bernoulli(-y) * physics.activity(cl))
    elif scheme is SchemeKind.BESSEMOULIN_CHATARD:
        s = physics.dr(ck, cl)
        y = (pl - pk) / s
        out = s * (physics.bernoulli(y) * ck - physics.bernoulli(-y) * cl)
    else:  # pragma: no cover
        raise ValueError(f"unhandled scheme {scheme}")
    out = np.asarray(out)
    return out if out.ndim else float(out)


def flux_with_derivatives(scheme: SchemeKind, ck, cl, pk, pl):
    """Flux density and its four partial derivatives.

    Returns (F, dF/dck, dF/dcl, dF/dpk, dF/dpl), each with the broadcast
    shape of the inputs.  Used by the Jacobian assembly; the derivatives
    are closed-form and are cross-checked against finite differences in
    the test suite.
    """
    ck, cl, pk, pl = np.broadcast_arrays(
        np.asarray(ck, float), np.asarray(cl, float),
        np.asarray(pk, float), np.asarray(pl, float))

    if scheme is SchemeKind.CENTERED:
        diff = (physics.h(cl) + pl) - (physics.h(ck) + pk)
        mean = 0.5 * (ck + cl)
        f = -mean * diff
        dck = -0.5 * diff + mean / (ck * (1.0 - ck))
        dcl = -0.5 * diff - mean / (cl * (1.0 - cl))
        dpk = mean
        dpl = -mean
        return f, dck, dcl, dpk, dpl

    if scheme is SchemeKind.SEDAN:
        q = (pl + physics.nu(cl)) - (pk + physics.nu(ck))
        bq, bmq = physics.bernoulli(q), physics.bernoulli(-q)
        slope = physics.bernoulli_prime(q) * ck + physics.bernoulli_prime(-q) * cl
        f = _sedan_value(q, ck, cl)
        dck = bq + slope * (-1.0 / (1.0 - ck))
        dcl = -bmq + slope * (1.0 / (1.0 - cl))
        return f, dck, dcl, -slope, slope

    if scheme is SchemeKind.ACTIVITY:
        y = pl - pk
        ak, al = physics.activity(ck), physics.activity(cl)
        mean_beta = 0.5 * (2.0 - ck - cl)
        by, bmy = physics.bernoulli(y), physics.bernoulli(-y)
        g = by * ak - bmy * al
        slope = physics.bernoulli_prime(y) * ak + physics.bernoulli_prime(-y) * al
        f = mean_beta * g
        dck = -0.5 * g + mean_beta * by / (1.0 - ck) ** 2
        dcl = -0.5 * g - mean_beta * bmy / (1.0 - cl) ** 2
        return f, dck, dcl, -mean_beta * slope, mean_beta * slope

    if scheme is SchemeKind.BESSEMOULIN_CHATARD:
        s = np.asarray(physics.dr(ck, cl))
        ds_ck, ds_cl = _dr_derivatives(ck, cl, s)
        y = (pl - pk) / s
        by, bmy = physics.bernoulli(y), physics.bernoulli(-y)
        g = by * ck - bmy * cl
        slope = physics.bernoulli_prime(y) * ck + physics.bernoulli_prime(-y) * cl
        f = s * g
        dck = ds_ck * (g - y * slope) + s * by
        dcl = ds_cl * (g - y * slope) - s * bmy
        return f, dck, dcl, -slope, slope

    raise ValueError(f"unhandled scheme {scheme}")  # pragma: no cover


def flux_with_derivatives_logit(scheme: SchemeKind, wk, wl, pk, pl):
    """Flux density and partials in chemical-potential variables w = h(c).

    Evaluates the same kernels as flux_with_derivatives but from
    w instead of c, so concentrations arbitrarily close to 0 or 1 keep
    full floating-point resolution (c itself saturates at one ulp from
    the bounds, which quantizes h in jumps of order 1 and makes strongly
    saturated stationary states unsolvable in the c variables).
    Returns (F, dF/dwk, dF/dwl, dF/dpk, dF/dpl).
    """
    wk, wl, pk, pl = np.broadcast_arrays(
        np.asarray(wk, float), np.asarray(wl, float),
        np.asarray(pk, float), np.asarray(pl, float))
    ck, cl = physics.inverse_h(wk), physics.inverse_h(wl)
    # sigmoid'(w) = c (1 - c), evaluated without forming 1 - c
    dck = ck * physics.inverse_h(-wk)
    dcl = cl * physics.inverse_h(-wl)

    if scheme is SchemeKind.CENTERED:
        diff = (wl + pl) - (wk + pk)
        mean = 0.5 * (ck + cl)
        f = -mean * diff
        return (f, -0.5 * dck * diff + mean, -0.5 * dcl * diff - mean,
                mean, -mean)

    if scheme is SchemeKind.SEDAN:
        q = (pl + physics.softplus(wl)) - (pk + physics.softplus(wk))
        bq, bmq = physics.bernoulli(q), physics.bernoulli(-q)
        slope = physics.bernoulli_prime(q) * ck \
            + physics.bernoulli_prime(-q) * cl
        f = bq * ck - bmq * cl
        dwk = -slope * ck + bq * dck      # dq/dwk = -sigmoid(wk) = -ck
        dwl = slope * cl - bmq * dcl
        return f, dwk, dwl, -slope, slope

    if scheme is SchemeKind.ACTIVITY:
        y = pl - pk
        by, bmy = physics.bernoulli(y), physics.bernoulli(-y)
        # beta-mean times activity, without overflowing exp(w):
        # (1 - cL) exp(wK) = exp(wK - softplus(wL)), and
        # (1 - cK) exp(wK) = sigmoid(wK).
        e_kl = np.exp(np.minimum(wk - physics.softplus(wl), 700.0))
        e_lk = np.exp(np.minimum(wl - physics.softplus(wk), 700.0))
        p_sum = ck + e_kl
        q_sum = e_lk + cl
        f = 0.5 * (by * p_sum - bmy * q_sum)
        slope = 0.5 * (physics.bernoulli_prime(y) * p_sum
                       + physics.bernoulli_prime(-y) * q_sum)
        dwk = 0.5 * (by * (dck + e_kl) + bmy * ck * e_lk)
        dwl = 0.5 * (-by * cl * e_kl - bmy * (e_lk + dcl))
        return f, dwk, dwl, -slope, slope

    if scheme is SchemeKind.BESSEMOULIN_CHATARD:
        denom = physics.log_sigmoid(wk) - physics.log_sigmoid(wl)
        # Coincidence must be detected on the h-jump: deep in saturation
        # two cells with very different w both have log c within rounding
        # of 0, where the coincidence limit would be wrong.
        near = np.abs(wk - wl) < _JUMP_GUARD
        safe_denom = np.where(near, 1.0, denom)
        # complement concentrations 1 - c with full resolution
        bk, bl = physics.inverse_h(-wk), physics.inverse_h(-wl)
        mean_b = 0.5 * (bk + bl)
        s = np.where(near, 1.0 / mean_b, (wk - wl) / safe_denom)
        # d log(sigmoid(w)) / dw = sigmoid(-w)
        ds_wk = np.where(near, 0.5 * dck / mean_b ** 2,
                         (1.0 - s * bk) / safe_denom)
        ds_wl = np.where(near, 0.5 * dcl / mean_b ** 2,
                         (s * bl - 1.0) / safe_denom)
        y = (pl - pk) / s
        by = physics.bernoulli(y)
        byp = physics.bernoulli_prime(y)
        # difference of concentrations from the better-resolved side
        dc = np.where(wk + wl > 0.0, bl - bk, ck - cl)
        ddc_wk, ddc_wl = dck, -dcl
        # F = s B(y) (cK - cL) - (pL - pK) cL, using B(-y) = B(y) + y
        f = s * by * dc - (pl - pk) * cl
        front = (by - y * byp) * dc
        dwk = ds_wk * front + s * by * ddc_wk
        dwl = ds_wl * front + s * by * ddc_wl - (pl - pk) * dcl
        dpk = -byp * dc + cl
        return f, dwk, dwl, dpk, -dpk

    raise ValueError(f"unhandled scheme {scheme}")  # pragma: no cover


def _dr_derivatives(ck, cl, s):
    """Partials of the secant diffusion coefficient dr(ck, cl)."""
    lk, ll = np.log(ck), np.log(cl)
    denom = lk - ll
    near = np.abs(denom) < 1e-10
    safe = np.where(near, 1.0, denom)
    hk = 1.0 / (ck * (1.0 - ck))
    hl = 1.0 / (cl * (1.0 - cl))
    ds_ck = (hk - s / ck) / safe
    ds_cl = (-hl + s / cl) / safe
    # coincidence limit: d/dc of r'((ck+cl)/2) on either side
    cm = 0.5 * (ck + cl)
    lim = 0.5 / (1.0 - cm) ** 2
    return np.where(near, lim, ds_ck), np.where(near, lim, ds_cl)


def face_concentration(scheme: SchemeKind, ck, cl, pk, pl):
    """Face concentration: flux divided by the electrochemical jump.

    Symmetric in the two sides.  For the centered, Sedan and
    Bessemoulin-Chatard kernels the value is an average of the adjacent
    concentrations; the activity-based kernel only guarantees a lower
    bound of min(ck, cl)/2.  Near-zero jumps return the analytic limit.
    """
    ck, cl, pk, pl = np.broadcast_arrays(
        np.asarray(ck, float), np.asarray(cl, float),
        np.asarray(pk, float), np.asarray(pl, float))
    jump = _electrochemical_jump(ck, cl, pk, pl)
    near = np.abs(jump) < _JUMP_GUARD
    safe = np.where(near, 1.0, jump)
    quotient = np.asarray(flux(scheme, ck, cl, pk, pl)) / safe
    limit = _face_concentration_limit(scheme, ck, cl)
    out = np.where(near, limit, quotient)
    return out if out.ndim else float(out)


def _face_concentration_limit(scheme: SchemeKind, ck, cl):
    """Limit of the face concentration as the electrochemical jump -> 0."""
    if scheme is SchemeKind.CENTERED:
        return 0.5 * (ck + cl)
    if scheme in (SchemeKind.SEDAN, SchemeKind.BESSEMOULIN_CHATARD):
        x = np.log(ck) - np.log(cl)
        wk = -physics.bernoulli_prime(x)
        wl = -np.asarray(physics.bernoulli_prime(-x))
        return wk * ck + wl * cl
    if scheme is SchemeKind.ACTIVITY:
        ak, al = physics.activity(ck), physics.activity(cl)
        x = physics.h(ck) - physics.h(cl)
        wk = -physics.bernoulli_prime(x)
        wl = -np.asarray(physics.bernoulli_prime(-x))
        return 0.5 * (2.0 - ck - cl) * (wk * ak + wl * al)
    raise ValueError(f"unhandled scheme {scheme}")  # pragma: no cover


def face_dissipation(scheme: SchemeKind, ck, cl, pk, pl):
    """Face dissipation: flux times the electrochemical jump (nonnegative)."""
    ck, cl, pk, pl = np.broadcast_arrays(
        np.asarray(ck, float), np.asarray(cl, float),
        np.asarray(pk, float), np.asarray(pl, float))
    jump = _electrochemical_jump(ck, cl, pk, pl)
    out = np.asarray(flux(scheme, ck, cl, pk, pl)) * jump
    return out if out.ndim else float(out)


def mean_face_concentration(ck, cl):
    """Secant ratio (r(ck) - r(cl)) / (h(ck) - h(cl)), equal to ck at coincidence.

    Always lies between min(ck, cl) and max(ck, cl).
    """
    ck = np.asarray(ck, float)
    cl = np.asarray(cl, float)
    ck, cl = np.broadcast_arrays(ck, cl)
    dh = physics.h(ck) - physics.h(cl)
    near = np.abs(dh) < _JUMP_GUARD
    safe = np.where(near, 1.0, dh)
    out = np.where(near, ck, (physics.r(ck) - physics.r(cl)) / safe)
    return out if out.ndim else float(out)


def coercivity_profile(scheme: SchemeKind, fixed_c: float, big_m: float,
                       direction: str, k_max: int, grid_points: int = 33):
    """Sampled minima of the face dissipation as one concentration degenerates.

    For k = 1..k_max the neighbor concentration is 10^-k ("to_zero") or
    1 - 10^-k ("to_one"); the dissipation is minimized over a fixed
    grid_points x grid_points grid of potentials in [-M, M]^2.  The
    resulting sequence blows up as the concentration degenerates, so it
    is eventually strictly increasing in k.
    """
    if not 0.0 < fixed_c < 1.0:
        raise ValueError("fixed_c must lie in (0, 1)")
    if big_m < 0:
        raise ValueError("big_m must be nonnegative")
    if direction not in ("to_zero", "to_one"):
        raise ValueError("direction must be 'to_zero' or 'to_one'")

    phis = np.linspace(-big_m, big_m, grid_points)
    pk, pl = np.meshgrid(phis, phis, indexing="ij")
    out = np.empty(k_max)
    for i, k in enumerate(range(1, k_max + 1)):
        cl = 10.0 ** (-k) if direction == "to_zero" else 1.0 - 10.0 ** (-k)
        diss = face_dissipation(scheme, fixed_c, cl, pk, pl)
        out[i] = float(np.min(diss))
    return out
