import numpy as np
import pytest

from ddmsim import (
    DickeLadderState,
    MeanFieldState,
    ModelParams,
    critical_drive,
    evolve,
    mf_evolve,
    mf_rhs,
    mf_steady,
    observables,
    omega_eff,
    solve_x,
)
from ddmsim.meanfield import (
    ABOVE_THRESHOLD,
    BELOW_THRESHOLD,
    _screening_residual,
)


def bisect_x(beta, n, iters=200):
    """Independent bisection oracle for the screening equation."""
    lo, hi = 0.0, beta
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        val = mid**2 + (n**2 * mid**2 / 2) / (1 + n**2 * mid**2 / 2) - beta**2
        if val > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestMfRhs:
    def test_locked_dipole_stationary(self):
        params = ModelParams(n_atoms=10, rabi=3.0)
        state = MeanFieldState(dipole=-3.0j, sz=-2.7, n_atoms=10)
        d_dipole, _ = mf_rhs(state, params)
        assert abs(d_dipole) == 0.0

    def test_saturated_branch_fixed_point(self):
        # sz = 0, dipole = -iN/(2 beta)
        n, beta = 10.0, 2.0
        params = ModelParams(n_atoms=10, rabi=0.5 * beta * n)
        state = MeanFieldState(dipole=-1j * n / (2 * beta), sz=0.0, n_atoms=n)
        d_dipole, d_sz = mf_rhs(state, params)
        assert abs(d_dipole) == 0.0
        assert d_sz == pytest.approx(0.0, abs=1e-12)

    def test_undriven_ground_fixed_point(self):
        params = ModelParams(n_atoms=10, rabi=0.0)
        state = MeanFieldState.ground(10)
        d_dipole, d_sz = mf_rhs(state, params)
        assert abs(d_dipole) == 0.0
        assert d_sz == 0.0


class TestMfSteady:
    def test_critical_point(self):
        state = mf_steady(1.0, 14.0)
        assert abs(state.dipole) == pytest.approx(7.0, abs=1e-12)
        assert state.sz == 0.0

    def test_magnetized_branch(self):
        state = mf_steady(0.6, 10.0)
        assert state.sz == pytest.approx(-4.0, abs=1e-12)
        assert abs(state.dipole) == pytest.approx(3.0, abs=1e-12)
        assert state.dipole.real == 0.0
        assert state.dipole.imag < 0

    def test_saturated_branch(self):
        state = mf_steady(2.0, 10.0)
        assert state.dipole == pytest.approx(-2.5j, abs=1e-12)
        assert state.sz == 0.0

    @pytest.mark.parametrize("beta", [0.3, 0.9, 1.0, 1.5, 4.0])
    def test_zeroes_rhs(self, beta):
        n = 12.0
        state = mf_steady(beta, n)
        params = ModelParams(n_atoms=12, rabi=0.5 * beta * n)
        d_dipole, d_sz = mf_rhs(state, params)
        assert abs(d_dipole) < 1e-13
        assert abs(d_sz) < 1e-12

    @pytest.mark.parametrize("beta", [0.1, 0.5, 0.8, 0.99])
    def test_bloch_angle(self, beta):
        state = mf_steady(beta, 20.0)
        tan_theta = abs(state.dipole) / abs(state.sz)
        assert tan_theta == pytest.approx(beta / np.sqrt(1 - beta**2), rel=1e-12)

    def test_spin_length_on_sphere(self):
        for beta in (0.4, 1.0, 3.0):
            state = mf_steady(beta, 8.0)
            assert state.spin_length_sq() <= 16.0 + 1e-9


class TestOmegaEff:
    def test_perfect_screening(self):
        assert omega_eff(3.0, -3.0j) == pytest.approx(0.0, abs=1e-15)

    def test_no_dipole(self):
        assert omega_eff(2.5, 0.0) == 2.5

    def test_consistent_with_screening_solver(self):
        # The fixed-point dipole gives |w_eff|/w_c = beta - 1/beta while
        # the screening root is x = sqrt(beta^2 - 1); the two closures
        # only coincide deep in the saturated regime, where both recover
        # the bare drive.
        n, beta = 1e6, 20.0
        rabi = 0.5 * beta * n
        w_eff = abs(omega_eff(rabi, mf_steady(beta, n).dipole))
        x_drive = 0.5 * n * solve_x(beta, n).x
        assert w_eff <= x_drive <= rabi
        assert w_eff == pytest.approx(rabi, rel=5e-3)
        assert x_drive == pytest.approx(rabi, rel=5e-3)


class TestCriticalDrive:
    def test_values(self):
        assert critical_drive(10.0) == 5.0
        assert critical_drive(7.0) == 3.5

    def test_round_trip_beta_one(self):
        n = 9.0
        rabi = critical_drive(n)
        assert 2 * rabi / n == 1.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            critical_drive(0.0)


class TestSolveX:
    def test_against_bisection_oracle(self):
        sol = solve_x(2.0, 20)
        assert sol.x == pytest.approx(1.732530800077735, abs=1e-10)
        assert sol.x == pytest.approx(bisect_x(2.0, 20), abs=1e-10)
        assert sol.branch == ABOVE_THRESHOLD

    def test_small_x_scaling(self):
        beta, n = 0.5, 1000.0
        sol = solve_x(beta, n)
        approx = np.sqrt(2) / n * beta / np.sqrt(1 - beta**2)
        assert sol.x == pytest.approx(approx, rel=1e-2)
        assert abs(_screening_residual(n * sol.x, beta, n)) < 1e-10
        assert sol.branch == BELOW_THRESHOLD

    def test_large_n_limit(self):
        sol = solve_x(1.5, 1e6)
        assert abs(sol.x - np.sqrt(1.25)) < 1e-5

    def test_residual_grid(self):
        for beta in np.linspace(0.05, 5.0, 50):
            for n in (5, 20, 100, 1e6):
                sol = solve_x(beta, n)
                assert abs(_screening_residual(n * sol.x, beta, n)) < 1e-12

    def test_monotone_in_beta(self):
        betas = np.linspace(0.05, 5.0, 50)
        xs = [solve_x(b, 50).x for b in betas]
        assert np.all(np.diff(xs) > 0)

    def test_one_over_n_scaling_below_threshold(self):
        x3 = solve_x(0.5, 1e3).x
        x4 = solve_x(0.5, 1e4).x
        assert x3 / x4 == pytest.approx(10.0, rel=0.01)


class TestMfEvolve:
    def test_undriven_ground_constant(self):
        params = ModelParams(n_atoms=10, rabi=0.0)
        _, states = mf_evolve(MeanFieldState.ground(10.0), params, 5.0)
        assert abs(states[-1].dipole) < 1e-12
        assert states[-1].sz == pytest.approx(-5.0, abs=1e-10)

    def test_relaxes_to_steady_state(self):
        n, beta = 50.0, 0.5
        params = ModelParams(n_atoms=50, rabi=0.5 * beta * n)
        t_relax = 20.0 / (n * beta) + 10.0
        _, states = mf_evolve(MeanFieldState.ground(n), params, t_relax, tol=1e-12)
        target = mf_steady(beta, n)
        assert abs(states[-1].dipole - target.dipole) < 1e-6
        assert abs(states[-1].sz - target.sz) < 1e-6

    def test_spin_length_conserved(self):
        n = 30.0
        params = ModelParams(n_atoms=30, rabi=10.0)
        _, states = mf_evolve(MeanFieldState.ground(n), params, 5.0, tol=1e-11)
        lengths = [s.spin_length_sq() for s in states]
        assert np.max(np.abs(np.array(lengths) - (n / 2) ** 2)) < 1e-6

    @pytest.mark.parametrize("beta", [1.5, 2.0])
    def test_tracks_quantum_oscillation_count(self, beta):
        # Above threshold the mean field oscillates with the same number
        # of population maxima as the ladder solver. (Below threshold it
        # is overdamped while the quantum trace keeps a single maximum,
        # so no comparison is made there.)
        n = 10
        params = ModelParams(n_atoms=n, rabi=0.5 * beta * n)
        t, states = mf_evolve(
            MeanFieldState.ground(float(n)), params, 8.0, tol=1e-10, n_samples=801
        )
        ne_mf = np.array([s.sz / n + 0.5 for s in states])
        tq, qstates = evolve(
            DickeLadderState.ground(n), params, 8.0, tol=1e-9, n_samples=801
        )
        ne_q = np.array([observables(s).n_e for s in qstates])

        def n_maxima(v):
            return int(np.sum((v[1:-1] > v[:-2] + 1e-9) & (v[1:-1] > v[2:] + 1e-9)))

        assert n_maxima(ne_mf) == n_maxima(ne_q)
