import numpy as np
import pytest

from rodeqc import (
    ControlHamiltonian,
    NoiseTrajectory,
    apply_to_state,
    ensemble_density,
    error_process,
    evaluate_control,
    expm_skew,
    interaction_transform,
    propagate,
    propagate_interaction,
    purity,
    uniform_grid,
    zero_control,
)
from rodeqc.integrator import require_density, schrodinger_to_interaction
from rodeqc.noise_process import MaternConfig, NoiseModelSpec, build_noise_trajectory
from rodeqc.su_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z

from conftest import random_hermitian


def cos_y_noise(grid):
    """Time-dependent Hamiltonian cos(t) sigma_y packaged as a noise path."""
    vals = np.array([np.cos(t) * SIGMA_Y for t in grid])
    return NoiseTrajectory(grid, vals, np.ones(len(grid)) * 1.5, None)


class TestEvaluateControl:
    def test_zero_coefficients_give_drift(self, frame2):
        ctrl = zero_control(frame2, 1.0, drift=0.5 * SIGMA_Y)
        np.testing.assert_allclose(evaluate_control(ctrl, 0.3), 0.5 * SIGMA_Y)

    def test_unit_first_direction(self, frame2):
        coeffs = np.zeros((3, 6))
        coeffs[0, 0] = 1.0
        ctrl = ControlHamiltonian(frame2, np.zeros((2, 2)), coeffs, 1.0)
        np.testing.assert_allclose(evaluate_control(ctrl, 0.9), frame2.basis[0])

    def test_polynomial_matches_power_sum_oracle(self, frame2):
        rng = np.random.default_rng(12)
        coeffs = rng.normal(size=(3, 6))
        ctrl = ControlHamiltonian(frame2, np.zeros((2, 2)), coeffs, 1.0)
        for t in rng.uniform(0, 1, size=100):
            direct = sum(
                sum(coeffs[j, k] * t**k for k in range(6)) * frame2.basis[j]
                for j in range(3)
            )
            assert np.max(np.abs(evaluate_control(ctrl, t) - direct)) < 1e-14

    def test_out_of_horizon(self, frame2):
        ctrl = zero_control(frame2, 1.0)
        with pytest.raises(ValueError):
            evaluate_control(ctrl, 1.5)


class TestPropagate:
    def test_zero_hamiltonian(self, frame2):
        ctrl = zero_control(frame2, 1.0)
        traj = propagate(ctrl, grid=uniform_grid(1.0, 50))
        assert np.max(np.abs(traj.values - np.eye(2))) < 1e-14

    def test_constant_rotation(self, frame2):
        ctrl = zero_control(frame2, 1.0, drift=(np.pi / 2) * SIGMA_X)
        traj = propagate(ctrl, grid=uniform_grid(1.0, 200))
        assert np.linalg.norm(traj.values[-1] - (-1j * SIGMA_X)) < 1e-8

    def test_cos_y_closed_form(self, frame2):
        # commuting family: U(T) = exp(-i sin(T) sigma_y); at T = pi, U = 1
        zc = zero_control(frame2, np.pi)
        grid = uniform_grid(np.pi, 400)
        traj = propagate(zc, noise=cos_y_noise(grid))
        assert np.linalg.norm(traj.values[-1] - np.eye(2)) < 1e-6

    def test_order_at_least_1p9(self, frame2):
        zc = zero_control(frame2, 1.0)
        errs = []
        for steps in (100, 200, 400):
            grid = uniform_grid(1.0, steps)
            traj = propagate(zc, noise=cos_y_noise(grid))
            exact = expm_skew(SIGMA_Y, np.sin(1.0))
            errs.append(np.linalg.norm(traj.values[-1] - exact))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 1.9)

    def test_unitarity_everywhere(self, frame2):
        rng = np.random.default_rng(3)
        coeffs = rng.normal(size=(3, 6))
        ctrl = ControlHamiltonian(frame2, 0.5 * SIGMA_Y, coeffs, 1.0)
        traj = propagate(ctrl, grid=uniform_grid(1.0, 300))
        traj.validate()

    def test_general_dimension_path(self):
        # 3-level system goes through the eigendecomposition stepper
        from rodeqc import orthonormal_frame

        f3 = orthonormal_frame(3)
        rng = np.random.default_rng(4)
        H = random_hermitian(rng, 3)
        ctrl = zero_control(f3, 1.0, drift=H)
        traj = propagate(ctrl, grid=uniform_grid(1.0, 100))
        traj.validate()
        np.testing.assert_allclose(traj.values[-1], expm_skew(H, 1.0), atol=1e-10)

    def test_pathwise_additivity(self, frame2):
        # noise enters only additively: affine control plus noise equals
        # zero control plus the pointwise sum (affine interpolation is exact)
        rng = np.random.default_rng(5)
        grid = uniform_grid(1.0, 60)
        coeffs = np.zeros((3, 6))
        coeffs[:, 0] = rng.normal(size=3)
        coeffs[:, 1] = rng.normal(size=3)
        ctrl = ControlHamiltonian(frame2, 0.3 * SIGMA_Z, coeffs, 1.0)
        nvals = np.array([random_hermitian(rng, 2, 0.4) for _ in grid])
        env = np.linalg.norm(nvals, axis=(1, 2)).max() * np.ones(len(grid))
        noise = NoiseTrajectory(grid, nvals, env, None)
        combined_vals = np.array(
            [evaluate_control(ctrl, t) + nvals[k] for k, t in enumerate(grid)]
        )
        combined = NoiseTrajectory(
            grid, combined_vals, env + 2.0 * np.ones(len(grid)), None
        )
        a = propagate(ctrl, noise=noise)
        b = propagate(zero_control(frame2, 1.0), noise=combined)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_grid_mismatch(self, frame2):
        ctrl = zero_control(frame2, 1.0)
        noise = cos_y_noise(uniform_grid(1.0, 50))
        with pytest.raises(ValueError):
            propagate(ctrl, noise=noise, grid=uniform_grid(1.0, 60))


class TestInteractionPicture:
    def test_identity_frame_is_noop(self, frame2):
        grid = uniform_grid(1.0, 40)
        u0 = propagate(zero_control(frame2, 1.0), grid=grid)
        noise = cos_y_noise(grid)
        out = interaction_transform(u0, noise)
        assert np.max(np.abs(out.values - noise.values)) < 1e-14

    def test_norm_invariance(self, frame2):
        grid = uniform_grid(1.0, 80)
        ctrl = zero_control(frame2, 1.0, drift=0.7 * SIGMA_X)
        u0 = propagate(ctrl, grid=grid)
        noise = cos_y_noise(grid)
        out = interaction_transform(u0, noise)
        np.testing.assert_allclose(
            out.amplitudes(), noise.amplitudes(), atol=1e-12
        )

    def test_z_conjugation_oracle(self, frame2):
        # U0 = exp(-i theta sz), H1 = sx -> cos(2 theta) sx - sin(2 theta) sy
        theta = np.pi / 8
        grid = np.array([0.0, 1.0])
        u0vals = np.array([np.eye(2), expm_skew(SIGMA_Z, theta)])
        from rodeqc.integrator import UnitaryTrajectory

        u0 = UnitaryTrajectory(grid, u0vals, "noiseless")
        noise = NoiseTrajectory(grid, np.array([SIGMA_X, SIGMA_X]), 2 * np.ones(2), None)
        out = interaction_transform(u0, noise)
        expected = np.cos(2 * theta) * SIGMA_X - np.sin(2 * theta) * SIGMA_Y
        assert np.max(np.abs(out.values[1] - expected)) < 1e-10

    def test_direct_vs_transformed_integration(self, frame2):
        # Schrodinger propagation + transform vs direct interaction
        # integration, within twice the integrator's own error
        ctrl = zero_control(frame2, 1.0, drift=0.5 * SIGMA_Y)
        spec = NoiseModelSpec(
            kind="squashed-matern",
            matern=MaternConfig(nu=0.6, length_scale=0.2, amplitude=1.0),
        )
        grid = uniform_grid(1.0, 400)
        fine = uniform_grid(1.0, 800)
        noise = build_noise_trajectory(spec, ctrl, None, 1.0, grid, 8)
        noise_fine = build_noise_trajectory(spec, ctrl, None, 1.0, fine, 8)
        u0 = propagate(ctrl, grid=grid)
        us = propagate(ctrl, noise=noise)
        ui_a = schrodinger_to_interaction(u0, us)
        ui_b = propagate_interaction(interaction_transform(u0, noise))
        # integrator tolerance measured by step halving of the same path
        us_fine = propagate(ctrl, noise=noise_fine)
        tol = max(np.linalg.norm(us.values[-1] - us_fine.values[-1]), 1e-9)
        diff = np.max(np.linalg.norm(ui_a.values - ui_b.values, axis=(1, 2)))
        assert diff < 2 * 4 * tol  # halving reduces error 4x, two routes


class TestEnsembleStatistics:
    def test_single_state_purity(self):
        rho = ensemble_density([np.array([1.0, 0.0])])
        require_density(rho)
        assert purity(rho) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_mixture(self):
        rho = ensemble_density([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-14)
        assert purity(rho) == pytest.approx(0.5, abs=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ensemble_density([])

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            ensemble_density([np.array([2.0, 0.0])])

    def test_mixedness_from_noise(self, frame2):
        # any ensemble with distinct trajectories becomes genuinely mixed
        ctrl = zero_control(frame2, 1.0, drift=0.5 * SIGMA_Y)
        spec = NoiseModelSpec(
            kind="squashed-matern",
            matern=MaternConfig(nu=0.6, length_scale=0.2, amplitude=1.0),
        )
        grid = uniform_grid(1.0, 100)
        psi0 = np.array([1.0, 0.0])
        states = []
        for seed in range(8):
            noise = build_noise_trajectory(spec, ctrl, None, 1.0, grid, seed)
            states.append(propagate(ctrl, noise=noise).values[-1] @ psi0)
        rho = ensemble_density(states)
        require_density(rho)
        assert purity(rho) < 1.0 - 1e-6

    def test_state_path_shape(self, frame2):
        ctrl = zero_control(frame2, 1.0, drift=SIGMA_X)
        traj = propagate(ctrl, grid=uniform_grid(1.0, 30))
        states = apply_to_state(traj, np.array([1.0, 0.0]))
        assert states.shape == (31, 2)
        np.testing.assert_allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-10)


class TestErrorProcess:
    def _ensemble(self, frame2, n, steps=100):
        ctrl = zero_control(frame2, 1.0, drift=0.5 * SIGMA_Y)
        spec = NoiseModelSpec(
            kind="squashed-matern",
            matern=MaternConfig(nu=0.6, length_scale=0.2, amplitude=1.0),
        )
        grid = uniform_grid(1.0, steps)
        u0 = propagate(ctrl, grid=grid)
        trajs = [
            propagate(ctrl, noise=build_noise_trajectory(spec, ctrl, None, 1.0, grid, s))
            for s in range(n)
        ]
        return ctrl, u0, trajs

    def test_zero_noise_zero_error(self, frame2):
        ctrl = zero_control(frame2, 1.0, drift=0.5 * SIGMA_Y)
        grid = uniform_grid(1.0, 50)
        u0 = propagate(ctrl, grid=grid)
        stats = error_process([u0], u0, norm="frobenius")
        assert np.max(stats.max) < 1e-12

    def test_error_zero_at_t0(self, frame2):
        _, u0, trajs = self._ensemble(frame2, 4)
        stats = error_process(trajs, u0)
        assert stats.max[0] == 0.0

    def test_nested_sample_max_monotone(self, frame2):
        _, u0, trajs = self._ensemble(frame2, 8)
        small = error_process(trajs[:4], u0)
        big = error_process(trajs, u0)
        assert np.all(big.max >= small.max - 1e-15)

    def test_rejects_empty(self, frame2):
        _, u0, _ = self._ensemble(frame2, 1)
        with pytest.raises(ValueError):
            error_process([], u0)
