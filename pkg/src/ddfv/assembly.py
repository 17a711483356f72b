"""Nonlinear residual and sparse Jacobian of one backward-Euler step.

Unknowns are interleaved per cell, u[2K] = c_K and u[2K+1] = phi_K, so
the 2x2 coupling blocks of each cell stay contiguous.  Row 2K is the
carrier continuity equation, row 2K+1 the Poisson equation

    m_K (c_K - c_K_prev) / dt + sum_sigma tau_sigma F(...) = 0,
    -lambda^2 sum_sigma tau_sigma (phi_across - phi_K) - m_K (c_K + doping_K) = 0.

Boundary handling depends on where the cell centers sit.  On 1D meshes
the centers are interior and Dirichlet data enters through mirror values
on boundary faces (distance h/2).  On the node-centered 2D meshes the
boundary cell centers lie on the boundary itself, so Dirichlet data is
imposed directly on the cell unknowns (the corresponding rows become
identities).  Robin gate faces add lambda^2 * m_sigma * (phi_K - u_gate)
/ thickness to the Poisson row using the cell value of phi.

Jacobians use the closed-form flux derivatives; entries are edge-local.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Union

import numpy as np
import scipy.sparse as sp

from .fluxes import SchemeKind, flux, flux_with_derivatives
from .mesh import AdmissibleMesh

__all__ = [
    "NeumannC",
    "DirichletC",
    "NeumannPhi",
    "DirichletPhi",
    "RobinGate",
    "FaceBC",
    "ProblemSpec",
    "DiscreteState",
    "STATIONARY",
    "residual",
    "jacobian",
]

# dt sentinel selecting the stationary residual (time term dropped)
STATIONARY = math.inf


@dataclass(frozen=True)
class NeumannC:
    """No-flux carrier boundary."""


@dataclass(frozen=True)
class DirichletC:
    """Prescribed carrier concentration on the boundary, in (0, 1)."""
    value: float


@dataclass(frozen=True)
class NeumannPhi:
    """Insulating (homogeneous Neumann) potential boundary."""


@dataclass(frozen=True)
class DirichletPhi:
    """Prescribed potential on the boundary."""
    value: float


@dataclass(frozen=True)
class RobinGate:
    """Thin-dielectric gate: flux (phi - u_gate) / thickness."""
    thickness: float
    u_gate: float


CarrierBC = Union[NeumannC, DirichletC]
PotentialBC = Union[NeumannPhi, DirichletPhi, RobinGate]


@dataclass(frozen=True)
class FaceBC:
    carrier: CarrierBC = NeumannC()
    potential: PotentialBC = NeumannPhi()


@dataclass(frozen=True)
class DiscreteState:
    """Per-cell concentration and potential vectors at one time level.

    Stationary solves additionally carry the chemical potential
    logit_c = h(c) per cell, which resolves concentrations closer to
    0 or 1 than one ulp; flux evaluations on strongly saturated states
    should prefer it over c.
    """

    c: np.ndarray
    phi: np.ndarray
    logit_c: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, float))
        object.__setattr__(self, "phi", np.asarray(self.phi, float))
        if self.c.shape != self.phi.shape or self.c.ndim != 1:
            raise ValueError("c and phi must be 1D vectors of equal length")
        if self.logit_c is not None:
            object.__setattr__(self, "logit_c",
                               np.asarray(self.logit_c, float))
            if self.logit_c.shape != self.c.shape:
                raise ValueError("logit_c must match the shape of c")

    def pack(self) -> np.ndarray:
        u = np.empty(2 * self.c.size)
        u[0::2] = self.c
        u[1::2] = self.phi
        return u

    @classmethod
    def unpack(cls, u: np.ndarray) -> "DiscreteState":
        return cls(c=u[0::2].copy(), phi=u[1::2].copy())


@dataclass(frozen=True)
class ProblemSpec:
    """Everything defining one boundary-value problem on a mesh."""

    mesh: AdmissibleMesh
    scheme: SchemeKind
    doping: np.ndarray
    bcs: Mapping[str, FaceBC]
    initial_c: np.ndarray
    lambda_squared: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "doping", np.asarray(self.doping, float))
        object.__setattr__(self, "initial_c", np.asarray(self.initial_c, float))

    def validate(self) -> None:
        n = self.mesh.n_cells
        if self.doping.shape != (n,) or self.initial_c.shape != (n,):
            raise ValueError("doping and initial_c must be per-cell vectors")
        if np.any(self.initial_c < 0) or np.any(self.initial_c > 1):
            raise ValueError("initial concentration must lie in [0, 1]")
        mean = float(np.sum(self.mesh.cell_measures * self.initial_c)
                     / self.mesh.domain_measure)
        if not 0.0 < mean < 1.0:
            raise ValueError("mean initial concentration must be in (0, 1)")
        missing = set(self.mesh.bface_groups) - set(self.bcs)
        if missing:
            raise ValueError(f"no boundary condition for groups {sorted(missing)}")
        if not any(isinstance(bc.potential, (DirichletPhi, RobinGate))
                   for g, bc in self.bcs.items() if g in self.mesh.bface_groups):
            raise ValueError("pure-Neumann Poisson problem is singular; "
                             "need a Dirichlet or Robin potential boundary")

    def initial_state(self) -> DiscreteState:
        return DiscreteState(c=self.initial_c.copy(),
                             phi=np.zeros(self.mesh.n_cells))


class _BoundaryPlan:
    """Boundary faces sorted by how they enter the equations."""

    def __init__(self, spec: ProblemSpec):
        mesh = spec.mesh
        flux_c = []      # (bface, c_value or nan, phi_value or nan)
        flux_phi = []    # (bface, phi_value) Dirichlet potential with d > 0
        robin = []       # (bface, thickness, u_gate)
        pin_c = {}       # cell -> value (d == 0 Dirichlet carrier)
        pin_phi = {}     # cell -> value (d == 0 Dirichlet potential)

        for i, group in enumerate(mesh.bface_groups):
            bc = spec.bcs[group]
            cell = int(mesh.bface_cells[i])
            nodal = mesh.bface_distances[i] == 0.0
            if isinstance(bc.potential, RobinGate):
                robin.append((i, bc.potential.thickness, bc.potential.u_gate))
            elif isinstance(bc.potential, DirichletPhi):
                if nodal:
                    pin_phi[cell] = bc.potential.value
                else:
                    flux_phi.append((i, bc.potential.value))
            if isinstance(bc.carrier, DirichletC):
                if nodal:
                    pin_c[cell] = bc.carrier.value
                else:
                    phi_mirror = (bc.potential.value
                                  if isinstance(bc.potential, DirichletPhi)
                                  else math.nan)
                    flux_c.append((i, bc.carrier.value, phi_mirror))

        self.flux_c = flux_c
        self.flux_phi = flux_phi
        self.robin = robin
        self.pin_c = pin_c
        self.pin_phi = pin_phi


def _assemble(spec: ProblemSpec, previous: DiscreteState,
              candidate: DiscreteState, dt: float, want_jacobian: bool):
    mesh = spec.mesh
    n = mesh.n_cells
    c, phi = candidate.c, candidate.phi
    lam2 = spec.lambda_squared
    res = np.zeros(2 * n)

    rows, cols, vals = [], [], []

    def add(r, cidx, v):
        rows.append(np.asarray(r, dtype=int))
        cols.append(np.asarray(cidx, dtype=int))
        vals.append(np.asarray(v, float))

    # time derivative
    transient = math.isfinite(dt)
    if transient:
        if dt <= 0:
            raise ValueError("dt must be positive")
        coeff = mesh.cell_measures / dt
        res[0::2] += coeff * (c - previous.c)
        if want_jacobian:
            k = np.arange(n)
            add(2 * k, 2 * k, coeff)

    # Poisson cell term: -m_K (c_K + doping_K)
    res[1::2] -= mesh.cell_measures * (c + spec.doping)
    if want_jacobian:
        k = np.arange(n)
        add(2 * k + 1, 2 * k, -mesh.cell_measures)

    # interior faces
    K = mesh.face_cells[:, 0]
    L = mesh.face_cells[:, 1]
    tau = mesh.face_tau
    if want_jacobian:
        f, dck, dcl, dpk, dpl = flux_with_derivatives(
            spec.scheme, c[K], c[L], phi[K], phi[L])
    else:
        f = np.asarray(flux(spec.scheme, c[K], c[L], phi[K], phi[L]))
    face_flux = tau * f
    np.add.at(res, 2 * K, face_flux)
    np.add.at(res, 2 * L, -face_flux)
    dphi = phi[L] - phi[K]
    np.add.at(res, 2 * K + 1, -lam2 * tau * dphi)
    np.add.at(res, 2 * L + 1, lam2 * tau * dphi)
    if want_jacobian:
        for col, d in ((2 * K, dck), (2 * L, dcl),
                       (2 * K + 1, dpk), (2 * L + 1, dpl)):
            add(2 * K, col, tau * d)
            add(2 * L, col, -tau * d)
        add(2 * K + 1, 2 * K + 1, lam2 * tau)
        add(2 * K + 1, 2 * L + 1, -lam2 * tau)
        add(2 * L + 1, 2 * L + 1, lam2 * tau)
        add(2 * L + 1, 2 * K + 1, -lam2 * tau)

    plan = _BoundaryPlan(spec)

    # mirror-value boundary fluxes (positive boundary distance)
    for i, c_bnd, phi_bnd in plan.flux_c:
        cell = int(mesh.bface_cells[i])
        taub = mesh.bface_tau[i]
        mirror_phi = math.isnan(phi_bnd)
        p_sigma = phi[cell] if mirror_phi else phi_bnd
        fb, dck, _, dpk, dpl = flux_with_derivatives(
            spec.scheme, c[cell], c_bnd, phi[cell], p_sigma)
        res[2 * cell] += taub * fb
        if want_jacobian:
            dphi_total = dpk + dpl if mirror_phi else dpk
            add([2 * cell], [2 * cell], [taub * dck])
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

    # nodal Dirichlet rows become identities
    pinned_rows = ([2 * cell for cell in plan.pin_c]
                   + [2 * cell + 1 for cell in plan.pin_phi])
    for cell, value in plan.pin_c.items():
        res[2 * cell] = c[cell] - value
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


def residual(spec: ProblemSpec, previous: DiscreteState,
             candidate: DiscreteState, dt: float) -> np.ndarray:
    """Residual vector of size 2 * n_cells; dt = STATIONARY drops the time term."""
    res, _ = _assemble(spec, previous, candidate, dt, want_jacobian=False)
    return res


def jacobian(spec: ProblemSpec, previous: DiscreteState,
             candidate: DiscreteState, dt: float) -> sp.csr_matrix:
    """Sparse Jacobian of the residual with respect to the packed unknowns."""
    _, jac = _assemble(spec, previous, candidate, dt, want_jacobian=True)
    return jac


def residual_and_jacobian(spec: ProblemSpec, previous: DiscreteState,
                          candidate: DiscreteState, dt: float):
    return _assemble(spec, previous, candidate, dt, want_jacobian=True)
