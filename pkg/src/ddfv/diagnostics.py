"""Discrete functionals: energy, dissipation, mass, errors, and checks.

The free energy of a state combines the mixing entropy, the Dirichlet
energy of the potential, and a boundary term carrying the Dirichlet
potential data.  A converged backward-Euler step decreases this energy
by at least dt times the total flux dissipation, which is what the
per-step checks below measure.  The module also provides grid error
norms for convergence studies, an M-matrix witness certificate and a
maximum-principle bound for the discrete Poisson operator, and terminal
current extraction for device sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import physics
from .assembly import (DirichletC, DirichletPhi, DiscreteState, ProblemSpec,
                       _BoundaryPlan)
from .fluxes import face_dissipation, flux, flux_with_derivatives_logit
from .mesh import AdmissibleMesh

__all__ = [
    "StepDiagnostics",
    "measure_step",
    "discrete_energy",
    "total_dissipation",
    "total_mass",
    "error_norms",
    "eoc",
    "mmatrix_witness_check",
    "linf_phi_check",
    "terminal_current",
]


@dataclass(frozen=True)
class StepDiagnostics:
    time: float
    energy: float
    dissipation: float
    mass: float
    c_min: float
    c_max: float
    newton_iters: int


def total_mass(spec: ProblemSpec, state: DiscreteState) -> float:
    return float(np.sum(spec.mesh.cell_measures * state.c))


def discrete_energy(spec: ProblemSpec, state: DiscreteState) -> float:
    """Entropy + Dirichlet energy + boundary potential term.

    Boundary potential jumps use mirror values on faces with positive
    distance; on node-centered meshes the Dirichlet cells sit on the
    boundary and carry zero jump, so only interior faces contribute.
    Neumann and gate faces contribute no jump by convention.
    """
    mesh = spec.mesh
    c, phi = state.c, state.phi
    energy = float(np.sum(mesh.cell_measures * physics.entropy_H(c)))

    K, L = mesh.face_cells[:, 0], mesh.face_cells[:, 1]
    dphi = phi[L] - phi[K]
    energy += 0.5 * float(np.sum(mesh.face_tau * dphi * dphi))

    plan = _BoundaryPlan(spec)
    for i, phi_bnd in plan.flux_phi:
        cell = int(mesh.bface_cells[i])
        tau = mesh.bface_tau[i]
        jump = phi_bnd - phi[cell]
        energy += 0.5 * tau * jump * jump - tau * phi_bnd * jump
    return energy


def total_dissipation(spec: ProblemSpec, state: DiscreteState) -> float:
    """Sum over interior faces of tau times the face dissipation."""
    mesh = spec.mesh
    K, L = mesh.face_cells[:, 0], mesh.face_cells[:, 1]
    diss = face_dissipation(spec.scheme, state.c[K], state.c[L],
                            state.phi[K], state.phi[L])
    return float(np.sum(mesh.face_tau * diss))


def measure_step(spec: ProblemSpec, state: DiscreteState, time: float,
                 newton_iters: int) -> StepDiagnostics:
    return StepDiagnostics(
        time=time,
        energy=discrete_energy(spec, state),
        dissipation=total_dissipation(spec, state),
        mass=total_mass(spec, state),
        c_min=float(np.min(state.c)),
        c_max=float(np.max(state.c)),
        newton_iters=newton_iters,
    )


def error_norms(coarse_values: np.ndarray, reference_values: np.ndarray,
                coarse_mesh: AdmissibleMesh,
                reference_mesh: AdmissibleMesh) -> dict:
    """L2 and H1 errors of a coarse field against a nested fine reference.

    The L2 error restricts the reference to the coarse mesh by cell
    averaging and takes the measure-weighted norm of the difference.
    The H1 error adds a gradient seminorm: both fields are turned into
    piecewise-constant two-point gradients on their face diamonds and
    compared in L2 on the fine mesh, over the part of the domain covered
    by the coarse interior diamonds.  Comparing gradient fields (rather
    than differencing restricted cell values, which superconverges on
    nested grids) makes this an honest H1-type error.
    """
    if coarse_mesh.dim != 1 or reference_mesh.dim != 1:
        raise ValueError("error norms are implemented for nested 1D meshes")
    nc, nf = coarse_mesh.n_cells, reference_mesh.n_cells
    if nf % nc != 0:
        raise ValueError("reference mesh is not a refinement of the coarse mesh")
    if abs(coarse_mesh.domain_measure - reference_mesh.domain_measure) \
            > 1e-12 * coarse_mesh.domain_measure:
        raise ValueError("meshes cover different domains")
    ratio = nf // nc
    coarse = np.asarray(coarse_values, float)
    fine = np.asarray(reference_values, float)
    restricted = fine.reshape(nc, ratio).mean(axis=1)
    e = coarse - restricted
    l2 = float(np.sqrt(np.sum(coarse_mesh.cell_measures * e * e)))

    hc = coarse_mesh.domain_measure / nc
    hf = coarse_mesh.domain_measure / nf
    grad_coarse = np.diff(coarse) / hc          # on diamonds around coarse faces
    grad_fine = np.diff(fine) / hf              # on diamonds around fine faces
    x_fine_faces = hf * np.arange(1, nf)        # fine face positions
    diamond = np.floor(x_fine_faces / hc - 0.5).astype(int)
    inside = (diamond >= 0) & (diamond < nc - 1)
    diff = grad_coarse[diamond[inside]] - grad_fine[inside]
    semi = float(np.sqrt(hf * np.sum(diff * diff)))
    return {"l2": l2, "h1": l2 + semi}


def eoc(errors) -> list:
    """Experimental orders of convergence from (h, error) pairs."""
    pairs = list(errors)
    if len(pairs) < 2:
        raise ValueError("need at least two (h, error) points")
    hs = [float(h) for h, _ in pairs]
    if any(h2 >= h1 for h1, h2 in zip(hs, hs[1:])):
        raise ValueError("mesh sizes must be strictly decreasing")
    orders = []
    for (h1, e1), (h2, e2) in zip(pairs, pairs[1:]):
        if e1 == 0.0 or e2 == 0.0:
            orders.append(float("inf"))
            continue
        orders.append(float(np.log(e1 / e2) / np.log(h1 / h2)))
    return orders


def mmatrix_witness_check(mesh: AdmissibleMesh, dirichlet_groups) -> dict:
    """Witness certificate for the discrete Poisson operator.

    Builds the operator with unknowns at the cells plus the Dirichlet
    boundary faces (identity rows there; cell rows are the transmissibility
    Laplacian divided by the cell measure), evaluates the quadratic
    witness w(x) = 1 + (sup |y|^2 - |x|^2) / d on all unknown locations,
    and returns the minimum row value of the operator applied to w.  A
    minimum >= 1 certifies that the inverse is bounded by max(w) in the
    infinity norm, uniformly in the mesh.
    """
    groups = set(dirichlet_groups)
    if not groups & set(mesh.bface_groups):
        raise ValueError("need at least one Dirichlet boundary group")
    d = mesh.dim
    centers = mesh.cell_centers
    sq_cells = np.sum(centers ** 2, axis=1)
    sq_faces = np.sum(mesh.bface_points ** 2, axis=1)
    sup = max(float(np.max(sq_cells)), float(np.max(sq_faces)))
    w_cells = 1.0 + (sup - sq_cells) / d
    w_faces = 1.0 + (sup - sq_faces) / d

    rows = np.zeros(mesh.n_cells)
    K, L = mesh.face_cells[:, 0], mesh.face_cells[:, 1]
    tau = mesh.face_tau
    np.add.at(rows, K, tau * (w_cells[K] - w_cells[L]))
    np.add.at(rows, L, tau * (w_cells[L] - w_cells[K]))

    pinned = np.zeros(mesh.n_cells, dtype=bool)
    face_rows = []
    for i, group in enumerate(mesh.bface_groups):
        if group not in groups:
            continue
        cell = int(mesh.bface_cells[i])
        if mesh.bface_distances[i] > 0:
            rows[cell] += mesh.bface_tau[i] * (w_cells[cell] - w_faces[i])
            face_rows.append(w_faces[i])
        else:
            pinned[cell] = True
    rows /= mesh.cell_measures
    rows[pinned] = w_cells[pinned]
    values = np.concatenate([rows, np.asarray(face_rows)]) if face_rows \
        else rows
    return {"min_row_value": float(np.min(values)),
            "witness_bound": 1.0 + sup / d}


def linf_phi_check(state: DiscreteState, spec: ProblemSpec) -> bool:
    """Maximum-principle bound on the potential.

    |phi_K| <= (1 + diam^2 / (4d)) * max(boundary potential data,
    max |c_K + doping_K|).  Gate voltages count as boundary data.
    """
    from .assembly import RobinGate  # local import keeps the header light
    data = 0.0
    for group in set(spec.mesh.bface_groups):
        bc = spec.bcs[group].potential
        if isinstance(bc, DirichletPhi):
            data = max(data, abs(bc.value))
        elif isinstance(bc, RobinGate):
            data = max(data, abs(bc.u_gate))
    source = float(np.max(np.abs(state.c + spec.doping)))
    diam = spec.mesh.domain_diameter
    bound = (1.0 + diam * diam / (4.0 * spec.mesh.dim)) * max(data, source)
    return bool(np.all(np.abs(state.phi) <= bound * (1.0 + 1e-12) + 1e-300))


def terminal_current(state: DiscreteState, spec: ProblemSpec,
                     contact_group: str) -> float:
    """Net carrier flux out of the domain through one contact.

    On meshes where the contact faces carry positive distances the
    current is the sum of boundary face fluxes.  On node-centered meshes
    the contact consists of boundary cells; the current is the flux from
    the rest of the domain into those cells across interior faces.

    States from stationary solves carry the chemical potential field
    (logit_c); fluxes are then evaluated from it, which stays accurate
    when the channel saturates beyond the resolution of c itself.
    """
    mesh = spec.mesh
    idx = mesh.boundary_group_indices(contact_group)
    if idx.size == 0:
        raise ValueError(f"unknown contact group {contact_group!r}")
    bc = spec.bcs[contact_group].carrier
    if not isinstance(bc, DirichletC):
        raise ValueError("contact must have a Dirichlet carrier condition")

    c, phi = state.c, state.phi
    w = state.logit_c

    def face_value(ck, cl, pk, pl, wk=None, wl=None):
        if w is None:
            return float(flux(spec.scheme, ck, cl, pk, pl))
        return float(flux_with_derivatives_logit(
            spec.scheme, wk, wl, pk, pl)[0])

    if np.all(mesh.bface_distances[idx] > 0):
        total = 0.0
        w_bnd = float(physics.h(bc.value))
        for i in idx:
            cell = int(mesh.bface_cells[i])
            pot = spec.bcs[contact_group].potential
            p_sigma = pot.value if isinstance(pot, DirichletPhi) else phi[cell]
            total += mesh.bface_tau[i] * face_value(
                c[cell], bc.value, phi[cell], p_sigma,
                None if w is None else w[cell], w_bnd)
        return total

    contact_cells = set(int(mesh.bface_cells[i]) for i in idx)
    K, L = mesh.face_cells[:, 0], mesh.face_cells[:, 1]
    if w is None:
        f = np.asarray(flux(spec.scheme, c[K], c[L], phi[K], phi[L]))
    else:
        f = np.asarray(flux_with_derivatives_logit(
            spec.scheme, w[K], w[L], phi[K], phi[L])[0])
    face_flux = mesh.face_tau * f
    total = 0.0
    for i in range(mesh.n_faces):
        k_in = int(K[i]) in contact_cells
        l_in = int(L[i]) in contact_cells
        if k_in and not l_in:
            total -= face_flux[i]
        elif l_in and not k_in:
            total += face_flux[i]
    return float(total)
