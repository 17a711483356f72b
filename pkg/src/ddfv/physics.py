"""Scalar material laws and numerical kernels.

The model couples the concentration c of a charged species, confined to
(0, 1), with an electric potential.  The chemical potential is
h(c) = log(c / (1 - c)); everything else (entropy, activity, diffusion
enhancement, Bernoulli function) derives from it.  All functions are
vectorized over numpy arrays and also accept plain floats.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "h",
    "inverse_h",
    "entropy_H",
    "nu",
    "activity",
    "beta",
    "r",
    "r_prime",
    "bernoulli",
    "bernoulli_prime",
    "dr",
    "softplus",
    "log_sigmoid",
]

# Relative difference below which secant quotients switch to their limits.
_SECANT_GUARD = 1e-10

# Bernoulli branch thresholds: Taylor below, asymptotic above.
_B_TAYLOR = 1e-4
_B_DIRECT = 40.0


def _check_open_unit(c, name: str = "c") -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0) or np.any(c >= 1.0):
        raise ValueError(f"{name} must lie strictly inside (0, 1)")
    return c


def h(c):
    """Chemical potential log(c / (1 - c)) for c in (0, 1)."""
    c = _check_open_unit(c)
    return np.log(c) - np.log1p(-c)


def inverse_h(x):
    """Inverse of the chemical potential, 1 / (1 + exp(-x)), overflow-free."""
    x = np.asarray(x, dtype=float)
    # Evaluate each half-line with a decaying exponential only.
    pos = x >= 0
    ex = np.exp(-np.abs(x))
    out = np.where(pos, 1.0 / (1.0 + ex), ex / (1.0 + ex))
    return out if out.ndim else float(out)


def softplus(x):
    """log(1 + exp(x)), overflow-free on the whole real line.

    With w = h(c) this is the excess chemical potential nu(c); it keeps
    full resolution for concentrations too close to 1 to represent.
    """
    x = np.asarray(x, dtype=float)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return out if out.ndim else float(out)


def log_sigmoid(x):
    """log(inverse_h(x)) = -softplus(-x), i.e. log(c) in terms of w = h(c)."""
    x = np.asarray(x, dtype=float)
    out = -(np.maximum(-x, 0.0) + np.log1p(np.exp(-np.abs(x))))
    return out if out.ndim else float(out)


def entropy_H(c):
    """Mixing entropy c log c + (1-c) log(1-c), extended by 0 at c in {0, 1}."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 0.0) or np.any(c > 1.0):
        raise ValueError("c must lie in [0, 1]")
    cc = np.clip(c, 1e-300, 1.0)
    dd = np.clip(1.0 - c, 1e-300, 1.0)
    out = np.where(
        (c > 0.0) & (c < 1.0),
        c * np.log(cc) + (1.0 - c) * np.log(dd),
        0.0,
    )
    return out if out.ndim else float(out)


def nu(c):
    """Excess chemical potential h(c) - log(c) = -log(1 - c)."""
    c = _check_open_unit(c)
    return -np.log1p(-c)


def activity(c):
    """Activity a(c) = exp(h(c)) = c / (1 - c)."""
    c = _check_open_unit(c)
    return c / (1.0 - c)


def beta(c):
    """Inverse activity coefficient c / a(c) = 1 - c."""
    c = _check_open_unit(c)
    return 1.0 - c


def r(c):
    """Diffusion enhancement -log(1 - c), the antiderivative of c h'(c)."""
    c = _check_open_unit(c)
    return -np.log1p(-c)


def r_prime(c):
    """Derivative of the diffusion enhancement, 1 / (1 - c)."""
    c = _check_open_unit(c)
    return 1.0 / (1.0 - c)


def bernoulli(u):
    """Bernoulli function B(u) = u / (exp(u) - 1) with B(0) = 1.

    Piecewise evaluation keeps the relative error near machine precision
    and avoids overflow: Taylor for |u| < 1e-4, u/expm1(u) up to u = 40,
    and u exp(-u) / (1 - exp(-u)) for large positive u.  Finite and
    positive for |u| <= 700.
    """
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _B_TAYLOR
    large = u > _B_DIRECT

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        u_mid = np.where(small | large, 1.0, u)
        mid_val = u_mid / np.expm1(u_mid)
        u_lrg = np.where(large, u, 50.0)
        e = np.exp(-u_lrg)
        lrg_val = u_lrg * e / (1.0 - e)

    taylor = 1.0 - u / 2.0 + u * u / 12.0 - u**4 / 720.0
    out = np.where(small, taylor, np.where(large, lrg_val, mid_val))
    return out if out.ndim else float(out)


def bernoulli_prime(u):
    """Derivative of the Bernoulli function, stable on the whole real line."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _B_TAYLOR
    large = u > _B_DIRECT

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        u_mid = np.where(small | large, 1.0, u)
        em = np.expm1(u_mid)
        mid_val = (em - u_mid * np.exp(u_mid)) / (em * em)
        u_lrg = np.where(large, u, 50.0)
        e = np.exp(-u_lrg)
        lrg_val = e * (1.0 - e - u_lrg) / (1.0 - e) ** 2

    taylor = -0.5 + u / 6.0 - u**3 / 180.0
    out = np.where(small, taylor, np.where(large, lrg_val, mid_val))
    return out if out.ndim else float(out)


def dr(c_left, c_right):
    """Secant approximation of r'(c) across a face.

    Equals (h(cK) - h(cL)) / (log cK - log cL) away from coincidence and
    r'((cK + cL)/2) when the logarithms nearly agree.  Always >= 1 and
    symmetric in its arguments.
    """
    ck = _check_open_unit(c_left, "c_left")
    cl = _check_open_unit(c_right, "c_right")
    ck, cl = np.broadcast_arrays(ck, cl)
    lk, ll = np.log(ck), np.log(cl)
    denom = lk - ll
    near = np.abs(denom) < _SECANT_GUARD
    safe = np.where(near, 1.0, denom)
    secant = ((lk - np.log1p(-ck)) - (ll - np.log1p(-cl))) / safe
    limit = 1.0 / (1.0 - 0.5 * (ck + cl))
    out = np.where(near, limit, secant)
    return out if out.ndim else float(out)
