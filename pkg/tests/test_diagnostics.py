"""Energy, dissipation, error norms, certificates, terminal currents."""

import numpy as np
import pytest

from ddfv.assembly import (DirichletC, DirichletPhi, DiscreteState, FaceBC,
                           NeumannC, NeumannPhi, ProblemSpec)
from ddfv.diagnostics import (discrete_energy, eoc, error_norms,
                              linf_phi_check, mmatrix_witness_check,
                              terminal_current, total_dissipation, total_mass)
from ddfv.fluxes import SchemeKind
from ddfv.mesh import build_triangulated_rect_2d, build_uniform_1d
from ddfv.experiments import (fet_boundary_segments, make_1d_transient_spec,
                              make_fet_spec)
from ddfv.solver import TimeGrid, march, solve_stationary


def test_total_mass():
    spec = make_1d_transient_spec(SchemeKind.SEDAN, n_cells=10, length=5.0)
    state = DiscreteState(c=np.full(10, 0.3), phi=np.zeros(10))
    assert total_mass(spec, state) == pytest.approx(0.3 * 5.0, rel=1e-14)


def test_energy_decreases_by_at_least_dissipation():
    spec = make_1d_transient_spec(SchemeKind.SEDAN, n_cells=50)
    grid = TimeGrid.geometric(1e-3, 1.3, 5.0)
    history = march(spec, grid)
    for (t0, s0, d0), (t1, s1, d1) in zip(history, history[1:]):
        dt = t1 - t0
        assert d1.energy - d0.energy <= -dt * d1.dissipation + 1e-9


def test_dissipation_nonnegative_along_run():
    spec = make_1d_transient_spec(SchemeKind.ACTIVITY, n_cells=30)
    history = march(spec, TimeGrid.uniform(0.25, 1.0))
    for _, _, diag in history:
        assert diag.dissipation >= -1e-14


def test_error_norms_exact_for_matching_fields():
    coarse = build_uniform_1d(1.0, 10)
    fine = build_uniform_1d(1.0, 40)
    # linear field: cell averages of the fine field restrict exactly
    vc = coarse.cell_centers[:, 0]
    vf = fine.cell_centers[:, 0]
    norms = error_norms(vc, vf, coarse, fine)
    assert norms["l2"] < 1e-14
    assert norms["h1"] < 1e-12


def test_error_norms_detect_gradient_mismatch():
    coarse = build_uniform_1d(1.0, 10)
    fine = build_uniform_1d(1.0, 40)
    vc = np.zeros(10)                  # flat coarse field
    vf = fine.cell_centers[:, 0]       # unit slope fine field
    norms = error_norms(vc, vf, coarse, fine)
    assert norms["h1"] > norms["l2"]
    assert norms["h1"] > 0.5           # gradient error of order 1


def test_error_norms_rejects_non_nested():
    a = build_uniform_1d(1.0, 10)
    b = build_uniform_1d(1.0, 15)
    with pytest.raises(ValueError):
        error_norms(np.zeros(10), np.zeros(15), a, b)


def test_eoc_values():
    orders = eoc([(0.1, 1e-2), (0.05, 2.5e-3)])
    assert orders == [pytest.approx(2.0, abs=1e-12)]
    with pytest.raises(ValueError):
        eoc([(0.1, 1.0)])
    with pytest.raises(ValueError):
        eoc([(0.05, 1.0), (0.1, 2.0)])


def test_mmatrix_witness_1d():
    m = build_uniform_1d(50.0, 100)
    out = mmatrix_witness_check(m, {"left", "right"})
    assert out["min_row_value"] >= 1.0 - 1e-12
    assert out["witness_bound"] > 1.0


def test_mmatrix_witness_2d_all_dirichlet():
    m = build_triangulated_rect_2d(1e-2, 1e-3, 20, 10,
                                   boundary_segments=fet_boundary_segments())
    groups = set(m.bface_groups)
    out = mmatrix_witness_check(m, groups)
    assert out["min_row_value"] >= 1.0 - 1e-12


def test_mmatrix_witness_needs_dirichlet():
    m = build_uniform_1d(1.0, 4)
    with pytest.raises(ValueError):
        mmatrix_witness_check(m, {"nowhere"})


def test_linf_phi_check_on_converged_state():
    spec = make_fet_spec(SchemeKind.SEDAN, n_ref=1, u_gate=5.0)
    state, _ = solve_stationary(spec)
    assert linf_phi_check(state, spec)


def test_linf_phi_check_fails_on_absurd_potential():
    spec = make_1d_transient_spec(SchemeKind.SEDAN, n_cells=10,
                                  phi_left=1.0, phi_right=0.0)
    state = DiscreteState(c=np.full(10, 0.5), phi=np.full(10, 1e9))
    assert not linf_phi_check(state, spec)


def test_terminal_currents_balance_2d():
    spec = make_fet_spec(SchemeKind.SEDAN, n_ref=1, u_gate=-10.0)
    state, _ = solve_stationary(spec)
    i_s = terminal_current(state, spec, "source")
    i_d = terminal_current(state, spec, "drain")
    scale = max(abs(i_s), abs(i_d))
    assert abs(i_s + i_d) <= 1e-8 * scale


def test_terminal_current_1d_against_interior_flux():
    # on a 1D mesh with positive boundary distances the current uses
    # boundary faces directly; a stationary state carries the same flux
    # through every cross-section
    mesh = build_uniform_1d(1.0, 20)
    bcs = {"left": FaceBC(DirichletC(0.2), DirichletPhi(0.0)),
           "right": FaceBC(DirichletC(0.8), DirichletPhi(0.0))}
    spec = ProblemSpec(mesh=mesh, scheme=SchemeKind.SEDAN,
                       doping=np.full(20, -0.5), bcs=bcs,
                       initial_c=np.full(20, 0.5))
    state, _ = solve_stationary(spec)
    i_l = terminal_current(state, spec, "left")
    i_r = terminal_current(state, spec, "right")
    assert abs(i_l + i_r) <= 1e-8 * max(abs(i_l), abs(i_r))


def test_terminal_current_requires_contact():
    spec = make_fet_spec(SchemeKind.SEDAN, n_ref=1)
    state = spec.initial_state()
    with pytest.raises(ValueError):
        terminal_current(state, spec, "gate")  # carrier BC is Neumann
    with pytest.raises(ValueError):
        terminal_current(state, spec, "no-such-group")


def test_discrete_energy_zero_field_reference():
    # flat half concentration, grounded contacts: entropy term only
    spec = make_1d_transient_spec(SchemeKind.SEDAN, n_cells=10, length=5.0,
                                  phi_left=0.0, phi_right=0.0)
    state = DiscreteState(c=np.full(10, 0.5), phi=np.zeros(10))
    assert discrete_energy(spec, state) == pytest.approx(5.0 * np.log(0.5),
                                                         rel=1e-13)
    assert total_dissipation(spec, state) == pytest.approx(0.0, abs=1e-16)
