"""Damped Newton solver, parameter embedding, and backward-Euler marching.

Each nonlinear step is solved by Newton's method with two globalization
devices.  First, concentration updates are clipped so every component
stays a safe distance inside (0, 1); the flux kernels are singular at
the bounds.  Second, a halving line search enforces residual decrease.  If
plain Newton fails, the boundary data (Dirichlet potentials, gate
voltage, Dirichlet concentrations) are ramped up by a scalar mu walked
from 0 to 1, warm-starting each stage from the last; failing stages are
bisected a limited number of times before the solve is declared failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (STATIONARY, DirichletC, DirichletPhi, DiscreteState,
                       FaceBC, ProblemSpec, RobinGate, _BoundaryPlan,
                       residual, residual_and_jacobian)
from .fluxes import flux_with_derivatives_logit
from . import diagnostics, physics

__all__ = [
    "SolverConfig",
    "NewtonStats",
    "SolverFailure",
    "SingularSystemError",
    "TimeGrid",
    "linear_solve",
    "newton_solve",
    "embed_and_solve",
    "solve_step",
    "solve_stationary",
    "march",
    "initial_potential",
]


class SolverFailure(RuntimeError):
    """Nonlinear solve did not converge, even with embedding."""


class SingularSystemError(RuntimeError):
    """Direct sparse factorization hit a (numerically) singular matrix."""


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10
    max_newton_iters: int = 50
    min_damping: float = 2.0 ** -20
    embedding_steps: int = 10
    max_bisections: int = 8
    safeguard_eps: float = 1e-14

    def __post_init__(self):
        if not (0 < self.newton_tol < 1):
            raise ValueError("newton_tol must be in (0, 1)")
        if min(self.max_newton_iters, self.embedding_steps,
               self.max_bisections) <= 0:
            raise ValueError("iteration counts must be positive")
        if not (0 < self.min_damping <= 1 and 0 < self.safeguard_eps < 0.5):
            raise ValueError("invalid damping or safeguard parameters")


@dataclass(frozen=True)
class NewtonStats:
    converged: bool
    iterations: int
    residual_norm: float
    used_embedding: bool = False


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time points, not including t = 0."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, float)
        if t.size == 0 or t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing and positive")
        t = np.ascontiguousarray(t)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def geometric(cls, t1: float, delta: float, t_end: float) -> "TimeGrid":
        if not (t1 > 0 and delta > 1 and t_end > t1):
            raise ValueError("need t1 > 0, delta > 1, t_end > t1")
        ts = []
        t = t1
        while t < t_end * (1.0 - 1e-12):
            ts.append(t)
            t *= delta
        ts.append(t_end)
        return cls(times=np.asarray(ts))

    @classmethod
    def uniform(cls, dt: float, t_end: float) -> "TimeGrid":
        if not (dt > 0 and t_end >= dt):
            raise ValueError("need dt > 0 and t_end >= dt")
        n = int(round(t_end / dt))
        return cls(times=dt * np.arange(1, n + 1))


def linear_solve(matrix: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Direct sparse solve with an explicit singularity check."""
    matrix = matrix.tocsc()
    try:
        lu = spla.splu(matrix)
        x = lu.solve(rhs)
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("factorization produced non-finite values")
    defect = matrix @ x - rhs
    scale = (spla.norm(matrix, np.inf) * np.linalg.norm(x, np.inf)
             + np.linalg.norm(rhs, np.inf))
    if np.linalg.norm(defect, np.inf) > 1e-10 * max(scale, 1e-300):
        raise SingularSystemError("direct solve residual too large")
    return x


def _projected_trial(u: np.ndarray, du: np.ndarray, damp: float,
                     eps: float) -> np.ndarray:
    """Damped step with concentrations clipped into [eps, 1 - eps].

    Clipping acts per component: a component heading past a bound lands
    at distance eps from it while the others (and all potentials) take
    the full damped step.  A global step scaling would stall whenever
    the solution itself saturates near a bound, as in depleted or filled
    device channels.
    """
    trial = u + damp * du
    np.clip(trial[0::2], eps, 1.0 - eps, out=trial[0::2])
    return trial


def newton_solve(spec: ProblemSpec, previous: DiscreteState, dt: float,
                 config: SolverConfig = SolverConfig()):
    """Damped Newton from the previous state; returns (state, stats)."""
    u = previous.pack()
    # keep the start point usable even if the previous state touches a bound
    eps = config.safeguard_eps
    u[0::2] = np.clip(u[0::2], eps, 1.0 - eps)

    state = DiscreteState.unpack(u)
    res, jac = residual_and_jacobian(spec, previous, state, dt)
    norm = float(np.linalg.norm(res, np.inf))
    for it in range(config.max_newton_iters):
        if norm <= config.newton_tol:
            return state, NewtonStats(True, it, norm)
        try:
            du = linear_solve(jac, -res)
        except SingularSystemError:
            return state, NewtonStats(False, it, norm)

        damp = 1.0
        accepted = False
        while damp >= config.min_damping:
            trial = _projected_trial(u, du, damp, eps)
            trial_state = DiscreteState.unpack(trial)
            trial_res = residual(spec, previous, trial_state, dt)
            trial_norm = float(np.linalg.norm(trial_res, np.inf))
            if np.isfinite(trial_norm) and (trial_norm < norm
                                            or trial_norm <= config.newton_tol):
                accepted = True
                break
            damp *= 0.5
        if not accepted:
            return state, NewtonStats(False, it + 1, norm)
        u, state, norm = trial, trial_state, trial_norm
        res, jac = residual_and_jacobian(spec, previous, state, dt)
        norm = float(np.linalg.norm(res, np.inf))
    converged = norm <= config.newton_tol
    return state, NewtonStats(converged, config.max_newton_iters, norm)


def _scaled_bcs(spec: ProblemSpec, mu: float, c_anchor: float):
    """Boundary data ramped by mu in [0, 1]; mu = 1 is the original data.

    Potentials (Dirichlet values and gate voltage) scale linearly to
    zero; Dirichlet concentrations blend toward the anchor value so the
    relaxed problems stay well inside (0, 1).
    """
    out = {}
    for group, bc in spec.bcs.items():
        carrier = bc.carrier
        potential = bc.potential
        if isinstance(carrier, DirichletC):
            carrier = DirichletC((1.0 - mu) * c_anchor + mu * carrier.value)
        if isinstance(potential, DirichletPhi):
            potential = DirichletPhi(mu * potential.value)
        elif isinstance(potential, RobinGate):
            potential = RobinGate(potential.thickness, mu * potential.u_gate)
        out[group] = FaceBC(carrier=carrier, potential=potential)
    return out


def embed_and_solve(spec: ProblemSpec, previous: DiscreteState, dt: float,
                    config: SolverConfig = SolverConfig()):
    """Parameter embedding: ramp boundary data from 0 to full strength."""
    mass_mean = float(np.sum(spec.mesh.cell_measures * previous.c)
                      / spec.mesh.domain_measure)
    c_anchor = min(max(mass_mean, 1e-6), 1.0 - 1e-6)

    state = previous
    total_iters = 0
    pending = [(k / config.embedding_steps, 0)
               for k in range(1, config.embedding_steps + 1)]
    mu_done = 0.0
    while pending:
        mu, depth = pending[0]
        sub_spec = replace(spec, bcs=_scaled_bcs(spec, mu, c_anchor))
        state_try, stats = newton_solve(sub_spec, state, dt, config)
        if stats.converged:
            pending.pop(0)
            state, mu_done = state_try, mu
            total_iters += stats.iterations
            continue
        if depth >= config.max_bisections:
            raise SolverFailure(
                f"embedding stalled at mu={mu:.6g} after "
                f"{config.max_bisections} bisections "
                f"(residual {stats.residual_norm:.3e})")
        pending.insert(0, (0.5 * (mu_done + mu), depth + 1))
    return state, NewtonStats(True, total_iters, 0.0, used_embedding=True)


def solve_step(spec: ProblemSpec, previous: DiscreteState, dt: float,
               config: SolverConfig = SolverConfig()):
    """One nonlinear solve: plain Newton first, embedding as fallback."""
    state, stats = newton_solve(spec, previous, dt, config)
    if stats.converged:
        return state, stats
    return embed_and_solve(spec, previous, dt, config)


def initial_potential(spec: ProblemSpec, c: np.ndarray) -> np.ndarray:
    """Potential consistent with a given concentration field.

    The Poisson rows are linear in phi, so a single Newton correction
    from phi = 0 is exact.
    """
    eps = 1e-14
    state = DiscreteState(c=np.clip(c, eps, 1.0 - eps),
                          phi=np.zeros(spec.mesh.n_cells))
    res, jac = residual_and_jacobian(spec, state, state, STATIONARY)
    n = spec.mesh.n_cells
    idx = 2 * np.arange(n) + 1
    sub = jac.tocsr()[idx][:, idx]
    dphi = linear_solve(sub, -res[idx])
    return dphi


def _assemble_logit(spec: ProblemSpec, w: np.ndarray, phi: np.ndarray,
                    want_jacobian: bool):
    """Stationary residual/Jacobian in (w, phi) = (h(c), phi) variables.

    Same equations as the c-based assembly with the time term dropped.
    Evaluating the fluxes directly from w keeps saturated concentrations
    resolvable: near c = 1 the c variable quantizes h in jumps of order
    one ulp / (1 - c), which puts an O(1) floor on the residual of
    strongly saturated stationary states.
    """
    mesh = spec.mesh
    n = mesh.n_cells
    lam2 = spec.lambda_squared
    res = np.zeros(2 * n)
    rows, cols, vals = [], [], []

    def add(r, cidx, v):
        rows.append(np.asarray(r, dtype=int))
        cols.append(np.asarray(cidx, dtype=int))
        vals.append(np.asarray(v, float))

    c = np.asarray(physics.inverse_h(w))
    dc_dw = c * np.asarray(physics.inverse_h(-w))

    # Poisson cell term: -m_K (c_K + doping_K)
    res[1::2] -= mesh.cell_measures * (c + spec.doping)
    if want_jacobian:
        k = np.arange(n)
        add(2 * k + 1, 2 * k, -mesh.cell_measures * dc_dw)

    K = mesh.face_cells[:, 0]
    L = mesh.face_cells[:, 1]
    tau = mesh.face_tau
    f, dwk, dwl, dpk, dpl = flux_with_derivatives_logit(
        spec.scheme, w[K], w[L], phi[K], phi[L])
    face_flux = tau * f
    np.add.at(res, 2 * K, face_flux)
    np.add.at(res, 2 * L, -face_flux)
    dphi = phi[L] - phi[K]
    np.add.at(res, 2 * K + 1, -lam2 * tau * dphi)
    np.add.at(res, 2 * L + 1, lam2 * tau * dphi)
    if want_jacobian:
        for col, d in ((2 * K, dwk), (2 * L, dwl),
                       (2 * K + 1, dpk), (2 * L + 1, dpl)):
            add(2 * K, col, tau * d)
            add(2 * L, col, -tau * d)
        add(2 * K + 1, 2 * K + 1, lam2 * tau)
        add(2 * K + 1, 2 * L + 1, -lam2 * tau)
        add(2 * L + 1, 2 * L + 1, lam2 * tau)
        add(2 * L + 1, 2 * K + 1, -lam2 * tau)

    plan = _BoundaryPlan(spec)

    for i, c_bnd, phi_bnd in plan.flux_c:
        cell = int(mesh.bface_cells[i])
        taub = mesh.bface_tau[i]
        mirror_phi = math.isnan(phi_bnd)
        p_sigma = phi[cell] if mirror_phi else phi_bnd
        fb, dwk_b, _, dpk_b, dpl_b = flux_with_derivatives_logit(
            spec.scheme, w[cell], float(physics.h(c_bnd)),
            phi[cell], p_sigma)
        res[2 * cell] += taub * fb
        if want_jacobian:
            dphi_total = dpk_b + dpl_b if mirror_phi else dpk_b
            add([2 * cell], [2 * cell], [taub * dwk_b])
            add([2 * cell], [2 * cell + 1], [taub * dphi_total])

    for i, phi_bnd in plan.flux_phi:
        cell = int(mesh.bface_cells[i])
        taub = mesh.bface_tau[i]
        res[2 * cell + 1] -= lam2 * taub * (phi_bnd - phi[cell])
        if want_jacobian:
            add([2 * cell + 1], [2 * cell + 1], [lam2 * taub])

    for i, thickness, u_gate in plan.robin:
        cell = int(mesh.bface_cells[i])
        coeff = lam2 * mesh.bface_measures[i] / thickness
        res[2 * cell + 1] += coeff * (phi[cell] - u_gate)
        if want_jacobian:
            add([2 * cell + 1], [2 * cell + 1], [coeff])

    pinned_rows = ([2 * cell for cell in plan.pin_c]
                   + [2 * cell + 1 for cell in plan.pin_phi])
    for cell, value in plan.pin_c.items():
        res[2 * cell] = w[cell] - float(physics.h(value))
    for cell, value in plan.pin_phi.items():
        res[2 * cell + 1] = phi[cell] - value

    if not want_jacobian:
        return res, None

    jac = sp.csr_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * n, 2 * n))
    if pinned_rows:
        keep = np.ones(2 * n)
        keep[pinned_rows] = 0.0
        jac = sp.diags(keep) @ jac
        eye = sp.csr_matrix(
            (np.ones(len(pinned_rows)), (pinned_rows, pinned_rows)),
            shape=(2 * n, 2 * n))
        jac = (jac + eye).tocsr()
    return res, jac


_W_STEP_MAX = 25.0  # largest per-iteration move of any w component


def _newton_logit(spec: ProblemSpec, w: np.ndarray, phi: np.ndarray,
                  config: SolverConfig):
    """Damped Newton on the stationary system in (w, phi) variables."""
    v = np.empty(2 * w.size)
    v[0::2], v[1::2] = w, phi
    res, jac = _assemble_logit(spec, v[0::2], v[1::2], True)
    norm = float(np.linalg.norm(res, np.inf))
    for it in range(config.max_newton_iters):
        if norm <= config.newton_tol:
            return v, NewtonStats(True, it, norm)
        try:
            dv = linear_solve(jac, -res)
        except SingularSystemError:
            return v, NewtonStats(False, it, norm)
        # cap the chemical-potential step: overshooting w deep into a
        # saturated region (|w| >> 50) zeroes dc/dw there, degenerates the
        # carrier rows of the Jacobian, and the next solve blows up even
        # though the residual looks small
        dw_max = float(np.max(np.abs(dv[0::2])))
        damp0 = min(1.0, _W_STEP_MAX / dw_max) if dw_max > 0.0 else 1.0
        damp = damp0
        accepted = False
        while damp >= damp0 * config.min_damping:
            trial = v + damp * dv
            # keep exp(w)-type intermediates representable; |w| beyond a
            # few hundred is far outside any solution of interest anyway
            np.clip(trial[0::2], -350.0, 350.0, out=trial[0::2])
            t_res, _ = _assemble_logit(spec, trial[0::2], trial[1::2], False)
            t_norm = float(np.linalg.norm(t_res, np.inf))
            if np.isfinite(t_norm) and (t_norm < norm
                                        or t_norm <= config.newton_tol):
                accepted = True
                break
            damp *= 0.5
        if not accepted:
            return v, NewtonStats(False, it + 1, norm)
        v, norm = trial, t_norm
        res, jac = _assemble_logit(spec, v[0::2], v[1::2], True)
        norm = float(np.linalg.norm(res, np.inf))
    return v, NewtonStats(norm <= config.newton_tol,
                          config.max_newton_iters, norm)


def _logit_state(v: np.ndarray) -> DiscreteState:
    w = v[0::2].copy()
    return DiscreteState(c=np.asarray(physics.inverse_h(w)),
                         phi=v[1::2].copy(), logit_c=w)


def solve_stationary(spec: ProblemSpec,
                     config: SolverConfig = SolverConfig(),
                     initial: DiscreteState | None = None):
    """Stationary solve (time term dropped) from a given or default start.

    Newton iterates on (h(c), phi) instead of (c, phi): the change of
    variables removes the feasibility bounds on c and keeps saturated
    concentrations (1 - c below one ulp) resolvable.  The returned state
    carries the chemical potential field in logit_c.
    """
    if initial is None:
        c0 = np.clip(spec.initial_c, 1e-6, 1.0 - 1e-6)
        initial = DiscreteState(c=c0, phi=initial_potential(spec, c0))
    if initial.logit_c is not None:
        w0 = initial.logit_c.copy()
    else:
        eps = config.safeguard_eps
        w0 = np.asarray(physics.h(np.clip(initial.c, eps, 1.0 - eps)))

    v, stats = _newton_logit(spec, w0, initial.phi.copy(), config)
    if stats.converged:
        return _logit_state(v), stats

    # fallback: ramp the boundary data from zero to full strength.  The
    # ramp starts near the relaxed (zero-data) problem, so begin from a
    # neutral flat state rather than the warm start that just failed.
    mass_mean = float(np.sum(spec.mesh.cell_measures * initial.c)
                      / spec.mesh.domain_measure)
    c_anchor = min(max(mass_mean, 1e-6), 1.0 - 1e-6)
    c_flat = np.full(spec.mesh.n_cells, c_anchor)
    cur = np.empty_like(v)
    cur[0::2] = physics.h(c_flat)
    cur[1::2] = initial_potential(spec, c_flat)
    total_iters = 0
    pending = [(k / config.embedding_steps, 0)
               for k in range(1, config.embedding_steps + 1)]
    mu_done = 0.0
    while pending:
        mu, depth = pending[0]
        sub_spec = replace(spec, bcs=_scaled_bcs(spec, mu, c_anchor))
        v_try, stats = _newton_logit(sub_spec, cur[0::2].copy(),
                                     cur[1::2].copy(), config)
        if stats.converged:
            pending.pop(0)
            cur, mu_done = v_try, mu
            total_iters += stats.iterations
            continue
        if depth >= config.max_bisections:
            raise SolverFailure(
                f"stationary embedding stalled at mu={mu:.6g} after "
                f"{config.max_bisections} bisections "
                f"(residual {stats.residual_norm:.3e})")
        pending.insert(0, (0.5 * (mu_done + mu), depth + 1))
    return _logit_state(cur), NewtonStats(True, total_iters, 0.0,
                                          used_embedding=True)


def march(spec: ProblemSpec, grid: TimeGrid,
          config: SolverConfig = SolverConfig(), callback=None):
    """Backward-Euler time marching; returns [(t, state, diagnostics)].

    The initial state (t = 0) is included, with its potential obtained
    from the Poisson equation for the initial concentration.
    """
    spec.validate()
    c0 = spec.initial_c
    state = DiscreteState(c=c0, phi=initial_potential(spec, c0))
    results = []
    t_prev = 0.0
    entry = (0.0, state, diagnostics.measure_step(spec, state, 0.0, 0))
    results.append(entry)
    if callback is not None:
        callback(*entry)
    for t in grid.times:
        dt = t - t_prev
        try:
            state, stats = solve_step(spec, state, dt, config)
        except SolverFailure as exc:
            raise SolverFailure(f"time step to t={t:.6g} failed: {exc}") from exc
        entry = (t, state, diagnostics.measure_step(spec, state, t,
                                                    stats.iterations))
        results.append(entry)
        if callback is not None:
            callback(*entry)
        t_prev = t
    return results
