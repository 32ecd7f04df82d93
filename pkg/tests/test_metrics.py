import numpy as np
import pytest

import sal
from sal.counterdiabatic import (
    cd_controlled,
    cd_generic,
    cd_teleport_block,
    cd_tensor_sum,
    spectral_frame,
)
from sal.dynamics import controlled_initial_state, teleport_initial_state
from sal.hamiltonians import ControlledSpec, TimeDepHamiltonian, teleport_sector_hamiltonian
from sal.linalg import random_state
from sal.metrics import (
    angle_feasible,
    cae_single_gate_cost,
    energy_cost,
    mean_repetitions,
    probabilistic_cost,
    qsl_check,
    qsl_ground_chi,
    sce_controlled_cost,
    sce_single_gate_cost,
    stationarity_residual,
    superadiabatic_cost,
    teleport_cost_scale,
    teleport_sigma_sing,
    theta_opt,
    theta_opt_adiabatic,
)
from sal.schedules import make_schedule

# independent adaptive-quadrature values of int_0^1 sqrt(eta_i^2 + eta_f^2) ds
CHI_INTEGRAL = {"linear": 0.8116126200701153, "trig": 1.0, "exp": 0.7023756594167425}


# --- energy cost -----------------------------------------------------------------


def test_energy_cost_constant_pauli():
    h = TimeDepHamiltonian(dim=2, func=lambda s: -sal.Z.astype(complex))
    assert abs(energy_cost(h, grid=101) - np.sqrt(2.0)) < 1e-12


@pytest.mark.parametrize("family", ["linear", "trig", "exp"])
def test_teleport_adiabatic_cost_closed_form(family):
    sch = make_schedule(family)
    h = teleport_sector_hamiltonian(sch)
    # ||H(s)|| = 4 omega chi(s), so Sigma_ad = 4 * int chi
    assert abs(energy_cost(h) - 4.0 * CHI_INTEGRAL[family]) < 1e-8
    assert abs(teleport_sigma_sing(sch, None) - 4.0 * CHI_INTEGRAL[family]) < 1e-8


@pytest.mark.parametrize("omega_tau", [0.1, 0.5, 2.0, 25.0, 100.0])
def test_sce_single_gate_cost_matches_quadrature(omega_tau):
    spec = ControlledSpec(n_controls=0, axis="x", phi=np.pi, theta0=np.pi, tau=omega_tau)
    hsa = cd_controlled(spec)
    quad = energy_cost(hsa, grid=101)
    closed = sce_single_gate_cost(omega_tau, np.pi)
    assert abs(quad - closed) < 1e-8  # the integrand is constant in s


@pytest.mark.parametrize("n_controls", [1, 2, 3])
def test_sce_controlled_cost_scaling(n_controls):
    tau, theta0 = 0.7, 2.0
    spec = ControlledSpec(n_controls=n_controls, axis="x", phi=np.pi, theta0=theta0, tau=tau)
    quad = energy_cost(cd_controlled(spec), grid=101)
    closed = sce_controlled_cost(tau, theta0, n_controls)
    assert abs(quad / closed - 1.0) < 1e-6
    assert abs(closed / sce_single_gate_cost(tau, theta0) - np.sqrt(2.0**n_controls)) < 1e-12


def test_teleport_cost_scale_values():
    assert teleport_cost_scale(1) == 1.0
    assert abs(teleport_cost_scale(2) - 4.0) < 1e-12
    assert abs(teleport_cost_scale(3) - 8.0 * np.sqrt(3.0)) < 1e-12


def test_teleport_sector_cost_ratio_by_quadrature():
    sch = make_schedule("linear")
    tau = 0.8
    single = cd_teleport_block(sch, tau)
    joint = cd_tensor_sum([single] * 2)
    grid = 501
    ratio = energy_cost(joint, grid=grid) / energy_cost(single, grid=grid)
    assert abs(ratio - 4.0) < 1e-6


def test_teleport_sigma_sing_matches_full_quadrature():
    sch = make_schedule("trig")
    tau = 0.6
    hsa = cd_teleport_block(sch, tau)
    assert abs(teleport_sigma_sing(sch, tau) / energy_cost(hsa) - 1.0) < 1e-6


def test_superadiabatic_cost_report():
    sch = make_schedule("linear")
    h = teleport_sector_hamiltonian(sch)
    tau = 0.5
    frame = spectral_frame(h, grid=2001)
    report = superadiabatic_cost(frame, tau)
    hsa = cd_generic(h, tau, grid=2001)
    assert abs(report.sigma_sa / energy_cost(hsa) - 1.0) < 1e-6
    assert report.sigma_sa > report.sigma_ad
    assert abs(report.sigma_ad - 4.0 * CHI_INTEGRAL["linear"]) < 1e-6


def test_cost_decreases_with_runtime():
    sch = make_schedule("linear")
    vals = [teleport_sigma_sing(sch, tau, grid=501) for tau in (0.1, 0.5, 2.0, 10.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_adiabatic_limit_recovers_base_cost():
    sch = make_schedule("linear")
    ratio = teleport_sigma_sing(sch, 1e4) / teleport_sigma_sing(sch, None)
    assert abs(ratio - 1.0) < 1e-4
    spec_ratio = sce_single_gate_cost(1e4, np.pi) / cae_single_gate_cost()
    assert abs(spec_ratio - 1.0) < 1e-4


# --- probabilistic computation -----------------------------------------------------


def test_probabilistic_cost_adiabatic_at_pi():
    assert abs(probabilistic_cost(np.pi, mode="adiabatic") - 2.0) < 1e-12


def test_probabilistic_cost_superadiabatic_limits():
    assert abs(probabilistic_cost(np.pi, tau=1e9) - 2.0) < 1e-8
    # at omega*tau = theta0/2 the correction doubles the squared norm
    assert abs(probabilistic_cost(np.pi, tau=np.pi / 2) - 2.0 * np.sqrt(2.0)) < 1e-12


def test_probabilistic_cost_rejects_vanishing_angle():
    with pytest.raises(ValueError):
        probabilistic_cost(0.0, tau=1.0)
    with pytest.raises(ValueError):
        mean_repetitions(0.0)


def test_probabilistic_cost_needs_tau_for_shortcut():
    with pytest.raises(ValueError):
        probabilistic_cost(np.pi)


# --- optimal success angle -----------------------------------------------------------


def test_theta_opt_residual_and_feasibility():
    for omega_tau in (0.2, 1.0, 3.0, 50.0):
        theta = theta_opt(omega_tau)
        assert abs(stationarity_residual(theta, omega_tau)) <= 1e-5
        assert angle_feasible(theta)
        assert theta < np.pi


def test_theta_opt_inverts_the_closed_relation():
    # at a critical angle, omega*tau = (sqrt(theta)/2) sqrt(tan(theta/2) - theta)
    for theta in (2.5, 2.8, 3.0, 3.1):
        omega_tau = 0.5 * np.sqrt(theta) * np.sqrt(np.tan(theta / 2) - theta)
        assert abs(theta_opt(omega_tau) - theta) < 1e-6


def test_theta_opt_monotone_toward_pi():
    grid = [1.0, 2.0, 4.0, 8.0, 30.0, 200.0]
    thetas = [theta_opt(w) for w in grid]
    assert thetas == sorted(thetas)
    assert np.pi - thetas[-1] < 1e-2


def test_theta_half_pi_not_feasible():
    assert np.tan(np.pi / 4) == pytest.approx(1.0)
    assert not angle_feasible(np.pi / 2)


def test_adiabatic_optimum_is_pi():
    assert theta_opt_adiabatic() == np.pi
    grid = np.linspace(0.5, np.pi, 200)
    costs = np.array([probabilistic_cost(t, mode="adiabatic") for t in grid])
    assert np.argmin(costs) == len(grid) - 1


def test_mean_cost_convex_in_theta0():
    for omega_tau in (0.5, 2.0):
        grid = np.linspace(0.3, np.pi, 400)
        vals = np.array([probabilistic_cost(t, tau=omega_tau) for t in grid])
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        assert second.min() > 0


# --- quantum speed limit ---------------------------------------------------------------


def test_qsl_stationary_evolution():
    h = TimeDepHamiltonian(dim=2, func=lambda s: np.zeros((2, 2), dtype=complex))
    rep = qsl_check(h, np.array([1.0, 0.0]), tau=1.0, steps=200)
    assert rep.e_tau == 0.0
    assert rep.bound == 0.0
    assert rep.satisfied


def test_qsl_satisfied_for_fast_teleport_shortcut():
    sch = make_schedule("linear")
    hsa = cd_teleport_block(sch, 0.1)
    rng = np.random.default_rng(0)
    psi0 = teleport_initial_state(random_state(1, rng), 1)
    rep = qsl_check(hsa, psi0, 0.1)
    assert rep.satisfied
    assert rep.bound <= 0.1 + 1e-9


def test_qsl_satisfied_for_adiabatic_run():
    sch = make_schedule("linear")
    h = teleport_sector_hamiltonian(sch)
    rng = np.random.default_rng(1)
    psi0 = teleport_initial_state(random_state(1, rng), 1)
    rep = qsl_check(h, psi0, 0.5)
    assert rep.satisfied


def test_qsl_ground_chi_inequality():
    sch = make_schedule("linear")
    frame = spectral_frame(teleport_sector_hamiltonian(sch), grid=2001)
    chi, rhs = qsl_ground_chi(frame)
    assert chi >= rhs - 1e-6
    # traversal turns the tracked ground vector by 60 degrees: cos L = 1/2
    assert abs(rhs - 0.5) < 1e-6


def test_qsl_satisfied_for_sce():
    spec = ControlledSpec(n_controls=1, axis="x", phi=np.pi, theta0=np.pi, tau=0.25)
    hsa = cd_controlled(spec)
    rng = np.random.default_rng(2)
    psi0 = controlled_initial_state(random_state(2, rng))
    rep = qsl_check(hsa, psi0, 0.25)
    assert rep.satisfied
