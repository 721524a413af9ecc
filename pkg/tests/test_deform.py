import numpy as np
import pytest

from circlebops.deform import (
    LinearTrajectory,
    deformation_rates,
    extract_connection_coefficient,
    flow_convergence,
    flow_invariants,
    integrate_flow,
    isomonodromy_check,
    moment_rebuild,
    rates_fd_check,
    schlesinger_component_check,
    schlesinger_rhs,
    state_gap,
    transfer_rate_check,
    weight_rate_check,
)
from circlebops.errors import SingularResidueError, WeightValidationError
from circlebops.lax import assemble_residues
from circlebops.weight import SemiClassicalWeight, Singularity


@pytest.fixture(scope="module")
def traj(strict_weight_module):
    return LinearTrajectory(strict_weight_module, moving=1, target=2.1, t0=0.0, t1=0.1)


@pytest.fixture(scope="module")
def strict_weight_module():
    return SemiClassicalWeight(
        (Singularity(0, -1), Singularity(2, 0.5), Singularity(3, 1.0 / 3.0))
    )


@pytest.fixture(scope="module")
def start(traj):
    state, bundle = moment_rebuild(traj, 0.0, 2)
    return state, bundle


class TestTrajectory:
    def test_origin_cannot_move(self, strict_weight_module):
        with pytest.raises(WeightValidationError):
            LinearTrajectory(strict_weight_module, moving=0, target=0.5)

    def test_locations_and_velocity(self, traj):
        assert traj.locations(0.05)[1] == pytest.approx(2.05)
        assert traj.velocities(0.03)[1] == pytest.approx(1.0)
        assert traj.velocities(0.03)[0] == 0
        assert traj.weight_at(0.1).singularities[1].location == pytest.approx(2.1)

    def test_collision_detected(self, strict_weight_module):
        bad = LinearTrajectory(strict_weight_module, moving=1, target=3.0, t0=0.0, t1=1.0)
        with pytest.raises(WeightValidationError):
            bad.weight_at(1.0)

    def test_weight_rate_formula(self, traj):
        assert weight_rate_check(traj, 0.03, [0.5 + 0.2j, 1.8 + 0.9j]) < 1e-5


class TestRates:
    def test_frozen_trajectory_rates_vanish(self, strict_weight_module, start):
        state, bundle = start
        frozen = LinearTrajectory(
            strict_weight_module, moving=1, target=2.0 + 0j, t0=0.0, t1=1.0
        )
        rates = deformation_rates(
            bundle.sys, bundle.asys, bundle.quads, bundle.vw, frozen, 2, 0.0
        )
        assert rates.kdot_over_k == 0
        assert rates.rdot == 0
        assert rates.rbardot == 0

    def test_two_kappa_routes_agree(self, traj, start):
        state, bundle = start
        rates = deformation_rates(
            bundle.sys, bundle.asys, bundle.quads, bundle.vw, traj, 2, 0.0
        )
        assert rates.route_gap < 1e-7

    def test_fd_oracle(self, traj):
        errs = rates_fd_check(traj, 2, 0.02)
        assert all(v < 1e-4 for v in errs.values()), errs

    def test_reflection_rate_routes_consistent(self, traj, start):
        state, bundle = start
        rates = deformation_rates(
            bundle.sys, bundle.asys, bundle.quads, bundle.vw, traj, 2, 0.0
        )
        alt = state.r * (rates.dlog_phi0 - rates.kdot_over_k)
        assert abs(rates.rdot - alt) < 1e-8


class TestSchlesingerRhs:
    def test_matches_moment_route(self, traj, start):
        state, bundle = start
        rates = deformation_rates(
            bundle.sys, bundle.asys, bundle.quads, bundle.vw, traj, 2, 0.0
        )
        rhs = schlesinger_rhs(state, traj, 0.0)
        assert abs(rhs.kappadot - rates.kdot_over_k * state.kappa) < 1e-8
        assert abs(rhs.rdot - rates.rdot) < 1e-7
        assert abs(rhs.rbardot - rates.rbardot) < 1e-8
        assert np.max(np.abs(rhs.b_inf - rates.b_inf)) < 1e-8

    def test_trace_of_infinity_rate_vanishes(self, traj, start):
        state, _ = start
        rhs = schlesinger_rhs(state, traj, 0.0)
        assert abs(np.trace(rhs.da_inf)) < 1e-12  # commutator RHS

    def test_shared_velocity_pair_drops_from_commutators(self, strict_weight_module, start):
        # rigid shift of z_2 and z_3 with the same velocity: the (2,3)
        # commutator coefficient (zdot_j - zdot_k)/(z_j - z_k) vanishes,
        # leaving only the pairs with the pinned origin
        state, _ = start

        class RigidPair:
            weight0 = strict_weight_module

            def locations(self, t):
                locs = strict_weight_module.locations.copy()
                locs[1] += t
                locs[2] += t
                return locs

            def velocities(self, t):
                return np.array([0.0, 1.0, 1.0], dtype=complex)

        rhs = schlesinger_rhs(state, RigidPair(), 0.0)

        def comm(x, y):
            return x @ y - y @ x

        locs = strict_weight_module.locations
        manual = comm(rhs.b_inf, state.a[1]) + (1.0 / (locs[1] - locs[0])) * comm(
            state.a[0], state.a[1]
        )
        assert np.max(np.abs(rhs.da[1] - manual)) < 1e-12

    def test_component_forms(self, traj, start):
        state, bundle = start
        rates = deformation_rates(
            bundle.sys, bundle.asys, bundle.quads, bundle.vw, traj, 2, 0.0
        )
        res = assemble_residues(
            bundle.quads[2], bundle.vw, bundle.sys, 2, traj.weight_at(0.0)
        )
        rep = schlesinger_component_check(
            bundle.sys, bundle.quads, bundle.vw, traj, 2, 0.0, rates, res
        )
        assert rep.passed, [(e.name, e.where, e.residual) for e in rep.failures()]


class TestFlow:
    def test_zero_length_span(self, start):
        state, _ = start
        out = integrate_flow(state, None, (0.0, 0.0), 16)
        assert out == [state]

    def test_endpoint_matches_rebuild(self, traj, start):
        state, _ = start
        states = integrate_flow(state, traj, (0.0, 0.1), 64)
        target, _ = moment_rebuild(traj, 0.1, 2)
        assert state_gap(states[-1], target) < 1e-5

    def test_invariants_along_flow(self, traj, start):
        state, _ = start
        states = integrate_flow(state, traj, (0.0, 0.1), 64)
        inv = flow_invariants(states)
        assert inv["trace_drift"] < 1e-8
        assert inv["det_max"] < 1e-7

    def test_richardson_fourth_order(self, traj, start):
        state, _ = start
        conv = flow_convergence(state, traj, (0.0, 0.1), 64)
        assert conv["fine"] < 1e-7
        assert 12.0 <= conv["ratio"] <= 20.0

    def test_transfer_compatibility(self, traj):
        res = transfer_rate_check(traj, 2, 0.05, [0.4 + 0.2j, 2.6 + 1.0j])
        assert res < 1e-6

    def test_moving_origin_rejected(self, strict_weight_module, start):
        state, _ = start

        class BadTraj:
            weight0 = strict_weight_module

            def locations(self, t):
                return strict_weight_module.locations

            def velocities(self, t):
                return np.array([1.0, 0.0, 0.0], dtype=complex)

        with pytest.raises(SingularResidueError):
            schlesinger_rhs(state, BadTraj(), 0.0)


class TestMonodromy:
    def test_constancy_along_flow(self, traj, start):
        state, _ = start
        states = integrate_flow(state, traj, (0.0, 0.1), 64)
        records = isomonodromy_check(states, traj)
        assert len(records) == 2
        for rec in records:
            assert rec.asserted  # both moving-weight exponents have Re > 0
            assert rec.drift < 1e-5
            assert rec.refinement_drift < 1e-7

    def test_monodromy_matrix_entry(self, traj, start):
        state, _ = start
        records = isomonodromy_check([state], traj)
        by_j = {rec.j: rec for rec in records}
        # rho_3 = 1/3: the diagonal entry is e^{-2 pi i / 3}
        want = np.exp(-2j * np.pi / 3.0)
        assert abs(by_j[2].m_matrix[1, 1] - want) < 1e-14
        assert by_j[2].m_matrix[0, 0] == 1.0

    def test_level_independence(self, traj):
        # C_j depends only on F and w, not on the polynomial level n
        state2, _ = moment_rebuild(traj, 0.0, 2)
        state4, _ = moment_rebuild(traj, 0.0, 4)
        rec2 = isomonodromy_check([state2], traj)
        rec4 = isomonodromy_check([state4], traj)
        for a, b in zip(rec2, rec4):
            assert a.c0 == b.c0

    def test_direct_extraction_agrees_with_check(self, traj, strict):
        c_direct = extract_connection_coefficient(
            strict["weight"], strict["asys"].F, 1
        )
        state, _ = moment_rebuild(traj, 0.0, 2)
        rec = isomonodromy_check([state], traj)[0]
        assert abs(c_direct - rec.c0) < 1e-7
