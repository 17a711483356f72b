"""Experiment presets and artifact writers.

Three desk-scale experiments are provided:

* run1d: transient 1D evolution on (0, 50) with blocking (no-flux)
  carrier boundaries, Dirichlet potentials, constant doping -1/2, and a
  geometric time grid; writes per-scheme profile and energy tables.
* converge1d: stationary 1D boundary-value problem with near-degenerate
  carrier Dirichlet data, solved on a dyadic family of grids against a
  fine reference; writes error and convergence-order tables.
* fet: a 2D field-effect transistor with source/drain contacts and a
  Robin gate, swept over the gate voltage with warm starts; writes the
  I-V table and optional field snapshots.

All CSV numbers carry 17 significant digits so reruns are bit-stable.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .assembly import (DirichletC, DirichletPhi, FaceBC, NeumannC,
                       NeumannPhi, ProblemSpec, RobinGate)
from .diagnostics import eoc, error_norms, terminal_current
from .fluxes import ALL_SCHEMES, SchemeKind, face_concentration
from .mesh import build_triangulated_rect_2d, build_uniform_1d
from .solver import SolverConfig, TimeGrid, march, solve_stationary

__all__ = [
    "PRESETS_1D",
    "make_1d_transient_spec",
    "make_1d_stationary_spec",
    "make_fet_spec",
    "run1d",
    "converge1d",
    "fet",
    "face_concentration_table",
    "selftest",
]

PRESETS_1D = {
    "evoli": {"c0": 0.5, "phi_left": 10.0, "phi_right": 0.0},
    "evolii": {"c0": 0.3, "phi_left": 0.0, "phi_right": 0.0},
    "evoliii": {"c0": 0.7, "phi_left": 0.0, "phi_right": 0.0},
}

FET_LENGTH = 1e-2
FET_HEIGHT = 1e-3


def _fmt(value) -> str:
    return f"{float(value):.17g}"


def _workers() -> int:
    raw = os.environ.get("DDFV_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_meta(outdir: str, payload: dict) -> None:
    import numpy
    import scipy
    meta = dict(payload)
    meta["versions"] = {"ddfv": __version__, "numpy": numpy.__version__,
                        "scipy": scipy.__version__}
    with open(os.path.join(outdir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def make_1d_transient_spec(scheme: SchemeKind, n_cells: int = 100,
                           length: float = 50.0, c0: float = 0.5,
                           phi_left: float = 10.0, phi_right: float = 0.0,
                           doping: float = -0.5) -> ProblemSpec:
    """Blocking carrier boundaries, Dirichlet potential at both ends."""
    mesh = build_uniform_1d(length, n_cells)
    bcs = {
        "left": FaceBC(NeumannC(), DirichletPhi(phi_left)),
        "right": FaceBC(NeumannC(), DirichletPhi(phi_right)),
    }
    return ProblemSpec(mesh=mesh, scheme=scheme,
                       doping=np.full(n_cells, doping), bcs=bcs,
                       initial_c=np.full(n_cells, c0))


def make_1d_stationary_spec(scheme: SchemeKind, n_cells: int,
                            length: float = 50.0, doping: float = -0.5,
                            c_left: float = 1e-3, c_right: float = 1.0 - 1e-3,
                            phi_left: float = 0.0,
                            phi_right: float = 0.0) -> ProblemSpec:
    """Near-degenerate carrier Dirichlet data, grounded potential."""
    mesh = build_uniform_1d(length, n_cells)
    bcs = {
        "left": FaceBC(DirichletC(c_left), DirichletPhi(phi_left)),
        "right": FaceBC(DirichletC(c_right), DirichletPhi(phi_right)),
    }
    return ProblemSpec(mesh=mesh, scheme=scheme,
                       doping=np.full(n_cells, doping), bcs=bcs,
                       initial_c=np.full(n_cells, 0.5))


def fet_boundary_segments(length: float = FET_LENGTH,
                          height: float = FET_HEIGHT) -> dict:
    return {
        "source": [("top", 0.0, 0.2 * length)],
        "gate": [("top", 0.3 * length, 0.7 * length)],
        "drain": [("top", 0.8 * length, length)],
    }


def make_fet_spec(scheme: SchemeKind, n_ref: int = 1, u_gate: float = 0.0,
                  doping: float = -0.5) -> ProblemSpec:
    """Transistor on (0, L) x (0, H): contacts on top, insulated elsewhere."""
    nx, ny = 10 * 2 ** n_ref, 5 * 2 ** n_ref
    mesh = build_triangulated_rect_2d(
        FET_LENGTH, FET_HEIGHT, nx, ny,
        boundary_segments=fet_boundary_segments())
    gate = RobinGate(thickness=0.1 * FET_HEIGHT, u_gate=u_gate)
    bcs = {
        "source": FaceBC(DirichletC(0.5), DirichletPhi(-5.0)),
        "drain": FaceBC(DirichletC(0.5), DirichletPhi(5.0)),
        "gate": FaceBC(NeumannC(), gate),
        "insulating": FaceBC(NeumannC(), NeumannPhi()),
    }
    n = mesh.n_cells
    return ProblemSpec(mesh=mesh, scheme=scheme,
                       doping=np.full(n, doping), bcs=bcs,
                       initial_c=np.full(n, 0.5))


def _select_profile_times(times: np.ndarray, count: int = 8) -> list:
    idx = np.unique(np.round(
        np.linspace(0, len(times) - 1, count)).astype(int))
    return [int(i) for i in idx]


def run1d(outdir: str, schemes=None, preset: str = "evoli",
          n_cells: int = 100, length: float = 50.0, doping: float = -0.5,
          t1: float = 1e-4, delta: float = 1.15, t_end: float = 1000.0,
          c0=None, phi_left=None, phi_right=None,
          config: SolverConfig = SolverConfig()) -> dict:
    if preset not in PRESETS_1D:
        raise ValueError(f"unknown preset {preset!r}")
    params = dict(PRESETS_1D[preset])
    if c0 is not None:
        params["c0"] = c0
    if phi_left is not None:
        params["phi_left"] = phi_left
    if phi_right is not None:
        params["phi_right"] = phi_right
    schemes = list(schemes or ALL_SCHEMES)
    os.makedirs(outdir, exist_ok=True)
    grid = TimeGrid.geometric(t1, delta, t_end)
    summary = {}
    for scheme in schemes:
        spec = make_1d_transient_spec(scheme, n_cells, length,
                                      doping=doping, **params)
        history = march(spec, grid, config)
        final_energy = history[-1][2].energy
        with open(os.path.join(outdir, f"energy_{scheme.value}.csv"), "w",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "energy_rel", "dissipation", "mass",
                             "c_min", "c_max", "newton_iters"])
            for t, _, diag in history:
                writer.writerow([_fmt(t), _fmt(diag.energy - final_energy),
                                 _fmt(diag.dissipation), _fmt(diag.mass),
                                 _fmt(diag.c_min), _fmt(diag.c_max),
                                 diag.newton_iters])
        xs = spec.mesh.cell_centers[:, 0]
        picks = _select_profile_times(np.array([t for t, _, _ in history]))
        with open(os.path.join(outdir, f"profiles_{scheme.value}.csv"), "w",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x", "c", "phi"])
            for i in picks:
                t, state, _ = history[i]
                for k in range(n_cells):
                    writer.writerow([_fmt(t), _fmt(xs[k]),
                                     _fmt(state.c[k]), _fmt(state.phi[k])])
        summary[scheme.value] = {"steps": len(history) - 1,
                                 "final_energy": final_energy}
    _write_meta(outdir, {
        "experiment": "run1d", "preset": preset, "n_cells": n_cells,
        "length": length, "doping": doping, "t1": t1, "delta": delta,
        "t_end": t_end, "schemes": [s.value for s in schemes],
        "boundary": params, "solver": vars(config) | {},
        "summary": summary,
    })
    return summary


def converge1d(outdir: str, schemes=None, grids=(40, 80, 160, 320, 640),
               reference_cells: int = 10240, length: float = 50.0,
               doping: float = -0.5, c_left: float = 1e-3,
               c_right: float = 1.0 - 1e-3,
               config: SolverConfig = SolverConfig()) -> dict:
    schemes = list(schemes or ALL_SCHEMES)
    grids = sorted(int(g) for g in grids)
    if any(reference_cells % g for g in grids):
        raise ValueError("reference grid must be a common refinement")
    os.makedirs(outdir, exist_ok=True)

    ref_spec = make_1d_stationary_spec(SchemeKind.SEDAN, reference_cells,
                                       length, doping, c_left, c_right)
    ref_state, _ = solve_stationary(ref_spec, config)

    def solve_case(case):
        scheme, n = case
        spec = make_1d_stationary_spec(scheme, n, length, doping,
                                       c_left, c_right)
        state, _ = solve_stationary(spec, config)
        norms = error_norms(state.c, ref_state.c, spec.mesh, ref_spec.mesh)
        return scheme, n, length / n, norms

    cases = [(s, n) for s in schemes for n in grids]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = list(pool.map(solve_case, cases))

    by_scheme: dict = {s: [] for s in schemes}
    for scheme, n, h, norms in results:
        by_scheme[scheme].append((n, h, norms))

    with open(os.path.join(outdir, "errors.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "n_cells", "h", "l2", "h1"])
        for scheme in schemes:
            for n, h, norms in by_scheme[scheme]:
                writer.writerow([scheme.value, n, _fmt(h),
                                 _fmt(norms["l2"]), _fmt(norms["h1"])])

    summary = {}
    with open(os.path.join(outdir, "eoc.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "h_coarse", "h_fine",
                         "l2_order", "h1_order"])
        for scheme in schemes:
            rows = by_scheme[scheme]
            l2_orders = eoc([(h, norms["l2"]) for _, h, norms in rows])
            h1_orders = eoc([(h, norms["h1"]) for _, h, norms in rows])
            for i, (l2o, h1o) in enumerate(zip(l2_orders, h1_orders)):
                writer.writerow([scheme.value, _fmt(rows[i][1]),
                                 _fmt(rows[i + 1][1]), _fmt(l2o), _fmt(h1o)])
            summary[scheme.value] = {
                "l2_orders": l2_orders, "h1_orders": h1_orders,
                "l2_errors": [norms["l2"] for _, _, norms in rows],
                "h1_errors": [norms["h1"] for _, _, norms in rows],
            }
    _write_meta(outdir, {
        "experiment": "converge1d", "grids": grids,
        "reference_cells": reference_cells, "length": length,
        "doping": doping, "c_left": c_left, "c_right": c_right,
        "schemes": [s.value for s in schemes], "solver": vars(config) | {},
        "summary": summary,
    })
    return summary


def fet(outdir: str, schemes=None, n_ref: int = 1, gate_max: float = 50.0,
        gate_min: float = -50.0, gate_points: int = 21,
        snapshots: bool = False,
        config: SolverConfig = SolverConfig()) -> dict:
    """Gate sweep, descending from gate_max with warm starts."""
    schemes = list(schemes or ALL_SCHEMES)
    os.makedirs(outdir, exist_ok=True)
    gates = np.linspace(gate_max, gate_min, gate_points)
    summary = {}
    rows = []
    snapshot_values = {gates[0], gates[-1], min(gates, key=abs)}
    for scheme in schemes:
        state = None
        currents = []
        imbalance = 0.0
        scale = 1e-300
        for u in gates:
            spec = make_fet_spec(scheme, n_ref=n_ref, u_gate=float(u))
            state, _ = solve_stationary(spec, config, initial=state)
            i_source = terminal_current(state, spec, "source")
            i_drain = terminal_current(state, spec, "drain")
            imbalance = max(imbalance, abs(i_source + i_drain))
            scale = max(scale, abs(i_source), abs(i_drain))
            currents.append(i_source)
            rows.append((scheme.value, float(u), i_source))
            if snapshots and float(u) in snapshot_values:
                _write_fields(outdir, scheme, spec, state, float(u))
        # relative to the sweep's current scale: at the closed gate both
        # currents are round-off sized, so per-point ratios carry no signal
        summary[scheme.value] = {"currents": currents,
                                 "max_balance_error": imbalance / scale,
                                 "c_max_final": float(np.max(state.c))}
    with open(os.path.join(outdir, "iv.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "u_gate", "current"])
        for scheme_name, u, current in rows:
            writer.writerow([scheme_name, _fmt(u), _fmt(current)])
    _write_meta(outdir, {
        "experiment": "fet", "n_ref": n_ref,
        "gate_sweep": [float(g) for g in gates],
        "schemes": [s.value for s in schemes],
        "gate_model": "Robin with cell-value potential, thickness 0.1*H",
        "solver": vars(config) | {}, "summary": summary,
    })
    return summary


def _write_fields(outdir, scheme, spec, state, u_gate) -> None:
    name = f"fields_{scheme.value}_{u_gate:g}.csv"
    with open(os.path.join(outdir, name), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "c", "phi"])
        for k in range(spec.mesh.n_cells):
            x, y = spec.mesh.cell_centers[k]
            writer.writerow([_fmt(x), _fmt(y),
                             _fmt(state.c[k]), _fmt(state.phi[k])])


def face_concentration_table(outdir: str, c_left: float = 0.3,
                             c_right: float = 0.7, dphi_max: float = 10.0,
                             steps: int = 401) -> str:
    """Face concentration of all four schemes across a potential sweep."""
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "face_concentration.csv")
    dphis = np.linspace(-dphi_max, dphi_max, steps)
    columns = {
        scheme: face_concentration(scheme, c_left, c_right,
                                   np.zeros_like(dphis), dphis)
        for scheme in ALL_SCHEMES
    }
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dphi", "centered", "sedan", "activity", "bess_ch"])
        for i, dphi in enumerate(dphis):
            writer.writerow([_fmt(dphi)] + [
                _fmt(columns[scheme][i]) for scheme in ALL_SCHEMES])
    _write_meta(outdir, {
        "experiment": "face_concentration", "c_left": c_left,
        "c_right": c_right, "dphi_max": dphi_max, "steps": steps,
    })
    return path


def selftest() -> list:
    """Quick structural checks; returns [(name, passed)]."""
    from . import physics
    from .fluxes import flux
    from .assembly import DiscreteState, residual, STATIONARY
    results = []

    rng = np.random.default_rng(7)
    c1, c2 = rng.uniform(0.05, 0.95, (2, 1000))
    p1, p2 = rng.uniform(-5, 5, (2, 1000))
    anti = max(
        float(np.max(np.abs(np.asarray(flux(s, c1, c2, p1, p2))
                            + np.asarray(flux(s, c2, c1, p2, p1)))))
        for s in ALL_SCHEMES)
    results.append(("flux antisymmetry", anti < 1e-11))

    x = np.linspace(-50, 50, 1001)
    ident = float(np.max(np.abs(physics.bernoulli(x)
                                - physics.bernoulli(-x) + x)))
    results.append(("bernoulli identity", ident < 1e-13))

    spec = make_1d_transient_spec(SchemeKind.SEDAN, n_cells=10,
                                  phi_left=0.0, phi_right=0.0)
    state = DiscreteState(c=np.full(10, 0.5), phi=np.zeros(10))
    res = residual(spec, state, state, STATIONARY)
    results.append(("equilibrium residual",
                    float(np.max(np.abs(res))) < 1e-14))

    grid = TimeGrid.uniform(0.1, 0.2)
    history = march(spec, grid, SolverConfig())
    energies = [diag.energy for _, _, diag in history]
    results.append(("short march energy decay",
                    all(e2 <= e1 + 1e-9
                        for e1, e2 in zip(energies, energies[1:]))))
    return results
