"""Permutation-symmetric collective-spin dynamics.

The density matrix of N driven two-level atoms that couple identically to
the field stays inside the maximal-spin ladder |S = N/2, m>, m = -S..S.
This module evolves rho_{m,m'} under the driven-dissipative master
equation, computes exact steady states, and extracts the collective
observables (magnetization, dipole, emission rate, intensity
correlations).

Storage convention: rho is a dense (N+1) x (N+1) complex array, index
i = m + S running from 0 (all atoms in the ground state) to N (all
excited).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from ddmsim.params import ModelParams


class NonConvergenceError(RuntimeError):
    """Integrator failed; carries the last successfully reached time."""

    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class DegenerateSteadyStateError(RuntimeError):
    """The Liouvillian null space has dimension > 1."""


class UndefinedCorrelationError(ValueError):
    """g2(0) requested for a state with vanishing emission rate."""


def coupling_coeff(spin: float, m: float) -> float:
    """Ladder coupling A_m = sqrt(S(S+1) - m(m+1)).

    S+|S,m> = A_m |S,m+1>, S-|S,m> = A_{m-1}|S,m-1>.
    """
    n = 2 * spin
    if abs(n - round(n)) > 1e-9 or n < 1:
        raise ValueError(f"spin must be half-integer N/2 with N >= 1, got {spin}")
    if m < -spin - 1e-9 or m > spin + 1e-9:
        raise ValueError(f"m = {m} outside [-S, S] with S = {spin}")
    val = spin * (spin + 1) - m * (m + 1)
    return float(np.sqrt(max(val, 0.0)))


def _coupling_array(n_atoms: int) -> np.ndarray:
    """A[i] = A_{m = i - S} for i = 0..N; A[N] = A_S = 0."""
    s = n_atoms / 2.0
    m = np.arange(n_atoms + 1) - s
    return np.sqrt(np.maximum(s * (s + 1) - m * (m + 1), 0.0))


@dataclass
class DickeLadderState:
    """Density matrix on the symmetric ladder of n_atoms spins."""

    n_atoms: int
    rho: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        dim = self.n_atoms + 1
        if self.rho is None:
            self.rho = np.zeros((dim, dim), dtype=complex)
        else:
            self.rho = np.asarray(self.rho, dtype=complex)
            if self.rho.shape != (dim, dim):
                raise ValueError(
                    f"rho shape {self.rho.shape} incompatible with N = {self.n_atoms}"
                )

    @classmethod
    def ground(cls, n_atoms: int) -> "DickeLadderState":
        """All atoms in |g>, i.e. the projector on |S, -S>."""
        state = cls(n_atoms)
        state.rho[0, 0] = 1.0
        return state

    @classmethod
    def uniform_diagonal(cls, n_atoms: int) -> "DickeLadderState":
        """Fully saturated ladder: rho_{m,m} = 1/(N+1)."""
        state = cls(n_atoms)
        np.fill_diagonal(state.rho, 1.0 / (n_atoms + 1))
        return state

    @property
    def spin(self) -> float:
        return self.n_atoms / 2.0

    def m_values(self) -> np.ndarray:
        return np.arange(self.n_atoms + 1) - self.spin

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.rho + self.rho.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def check(self, trace_tol=1e-10, herm_tol=1e-12, psd_tol=1e-8):
        """Raise if the state violates its physical invariants."""
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from 1 by {self.trace() - 1.0:.3e}")
        if self.hermiticity_defect() > herm_tol:
            raise ValueError(
                f"hermiticity defect {self.hermiticity_defect():.3e} > {herm_tol:.1e}"
            )
        if self.min_eigenvalue() < -psd_tol:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.3e}")

    def copy(self) -> "DickeLadderState":
        return DickeLadderState(self.n_atoms, self.rho.copy())


@dataclass
class ObservableSet:
    """Collective observables extracted from a ladder state.

    s_z is the normalized magnetization <S_z>/S in [-1, 1] (ground state
    -> -1), n_e the excited-state fraction, dipole the complex <S->,
    gamma_sr the collective emission rate gamma*<S+ S->, and
    g2_numerator the fourth-order moment <S+ S+ S- S->.
    """

    s_z: float
    n_e: float
    dipole: complex
    gamma_sr: float
    g2_numerator: float


def _rhs_matrix(rho: np.ndarray, a: np.ndarray, params: ModelParams) -> np.ndarray:
    """drho/dt for the ladder matrix elements.

    Drive couples rho_{m,m'} to its four nearest neighbours through the
    ladder coefficients; collective decay feeds each element from
    rho_{m+1,m'+1} and drains it at rate (A_{m-1}^2 + A_{m'-1}^2)/2.
    """
    omega = params.rabi
    gamma = params.gamma
    am1 = np.concatenate(([0.0], a[:-1]))  # am1[i] = A_{m-1}

    drive = np.zeros_like(rho)
    drive[1:, :] += am1[1:, None] * rho[:-1, :]  # A_{m-1} rho_{m-1,m'}
    drive[:-1, :] += a[:-1, None] * rho[1:, :]  # A_m rho_{m+1,m'}
    drive[:, 1:] -= am1[None, 1:] * rho[:, :-1]  # A_{m'-1} rho_{m,m'-1}
    drive[:, :-1] -= a[None, :-1] * rho[:, 1:]  # A_{m'} rho_{m,m'+1}

    decay = -(am1[:, None] ** 2 + am1[None, :] ** 2) * rho
    decay[:-1, :-1] += 2.0 * (a[:-1, None] * a[None, :-1]) * rho[1:, 1:]

    out = -0.5j * omega * drive + 0.5 * gamma * decay
    if params.detuning != 0.0:
        # Rotating-frame extension beyond the resonant ladder equations:
        # H contains -(detuning/2) S_z, contributing
        # +i(detuning/2)(m - m') rho_{m,m'}.
        idx = np.arange(rho.shape[0])
        out += 0.5j * params.detuning * (idx[:, None] - idx[None, :]) * rho
    return out


def liouvillian_rhs(state: DickeLadderState, params: ModelParams) -> np.ndarray:
    """Time derivative of the ladder density matrix."""
    if params.n_atoms != state.n_atoms:
        raise ValueError(
            f"state has N = {state.n_atoms} but params have N = {params.n_atoms}"
        )
    a = _coupling_array(state.n_atoms)
    return _rhs_matrix(state.rho, a, params)


def evolve(
    state0: DickeLadderState,
    params: ModelParams,
    t_final: float,
    tol: float = 1e-8,
    n_samples: int | None = None,
):
    """Integrate the master equation from state0 up to t_final.

    Returns (times, states) with strictly increasing times ending at
    t_final. With n_samples the output is sampled on a uniform grid
    (including t = 0), otherwise at the solver's own steps. No trace
    renormalization is applied: trace drift is a diagnostic.
    """
    if t_final <= 0:
        raise ValueError(f"t_final must be > 0, got {t_final}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    n = state0.n_atoms
    if params.n_atoms != n:
        raise ValueError(
            f"state has N = {n} but params have N = {params.n_atoms}"
        )
    a = _coupling_array(n)
    dim = n + 1

    def rhs_flat(_t, y):
        return _rhs_matrix(y.reshape(dim, dim), a, params).ravel()

    t_eval = None
    if n_samples is not None:
        t_eval = np.linspace(0.0, t_final, n_samples)
    sol = solve_ivp(
        rhs_flat,
        (0.0, t_final),
        state0.rho.ravel().astype(complex),
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise NonConvergenceError(
            f"integration failed at t = {sol.t[-1]:.6g}: {sol.message}",
            last_time=float(sol.t[-1]),
        )
    times = sol.t
    states = [
        DickeLadderState(n, sol.y[:, k].reshape(dim, dim)) for k in range(len(times))
    ]
    return times, states


def _superoperator(params: ModelParams) -> sparse.csc_matrix:
    """Sparse Liouvillian acting on vec(rho) (column-major stacking)."""
    n = params.n_atoms
    a = _coupling_array(n)
    dim = n + 1
    sm = sparse.diags(a[:-1], 1, format="csr")  # <i-1|S-|i> = A[i-1]
    sp_op = sm.T.tocsr()
    m_diag = np.arange(dim) - n / 2.0
    ham = 0.5 * params.rabi * (sp_op + sm) - 0.5 * params.detuning * sparse.diags(m_diag)
    ident = sparse.identity(dim, format="csr")
    spsm = (sp_op @ sm).tocsr()
    liou = -1j * (sparse.kron(ident, ham) - sparse.kron(ham.T, ident))
    liou = liou + 0.5 * params.gamma * (
        2.0 * sparse.kron(sp_op.T, sm)
        - sparse.kron(ident, spsm)
        - sparse.kron(spsm.T, ident)
    )
    return liou.tocsc()


def _solve_with_trace_row(liou, dim, row):
    """Solve L v = 0 with the given row replaced by the trace condition."""
    d2 = dim * dim
    mat = liou.tolil(copy=True)
    trace_cols = np.arange(dim) * dim + np.arange(dim)
    mat[row, :] = 0.0
    for c in trace_cols:
        mat[row, c] = 1.0
    b = np.zeros(d2, dtype=complex)
    b[row] = 1.0
    return spla.spsolve(mat.tocsc(), b)


def steady_state(params: ModelParams, resid_tol: float = 1e-10) -> DickeLadderState:
    """Exact steady state of the master equation.

    Solves the trace-constrained linear system for the null vector of
    the Liouvillian. Tested up to N = 100; the cost is dominated by a
    sparse LU of an (N+1)^2-dimensional system. Solving with two
    different trace-row placements detects a degenerate (dimension > 1)
    null space, which would make the steady state ambiguous.
    """
    n = params.n_atoms
    dim = n + 1
    if params.rabi == 0.0:
        return DickeLadderState.ground(n)

    liou = _superoperator(params)
    v0 = _solve_with_trace_row(liou, dim, row=0)
    v1 = _solve_with_trace_row(liou, dim, row=dim * dim - 1)
    if np.max(np.abs(v0 - v1)) > 1e-8:
        raise DegenerateSteadyStateError(
            "steady state depends on the trace-row placement: "
            "the Liouvillian null space has dimension > 1"
        )

    rho = v0.reshape(dim, dim, order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.real(np.trace(rho))
    state = DickeLadderState(n, rho)

    resid = np.max(np.abs(liouvillian_rhs(state, params)))
    if resid > resid_tol:
        # Ill-conditioned solve; fall back to long-time integration.
        t_relax = 50.0 / (params.beta * params.gamma * n) + 20.0 / params.gamma
        _, states = evolve(
            DickeLadderState.ground(n), params, t_relax, tol=1e-12
        )
        state = states[-1]
        rho = 0.5 * (state.rho + state.rho.conj().T)
        rho /= np.real(np.trace(rho))
        state = DickeLadderState(n, rho)
        resid = np.max(np.abs(liouvillian_rhs(state, params)))
        if resid > resid_tol:
            raise NonConvergenceError(
                f"steady-state residual {resid:.3e} exceeds {resid_tol:.1e}",
                last_time=t_relax,
            )
    return state


def observables(state: DickeLadderState) -> ObservableSet:
    """Collective observables from the ladder density matrix.

    All four moments are diagonal or first-off-diagonal sums weighted by
    the ladder coefficients.
    """
    n = state.n_atoms
    s = state.spin
    a = _coupling_array(n)
    am1 = np.concatenate(([0.0], a[:-1]))
    am2 = np.concatenate(([0.0, 0.0], a[:-2]))
    pops = np.real(np.diag(state.rho))
    m = state.m_values()

    s_z = float(np.sum(m * pops) / s)
    n_e = 0.5 * (s_z + 1.0)
    # <S-> = sum_m A_{m-1} rho_{m,m-1}
    dipole = complex(np.sum(am1[1:] * np.diag(state.rho, -1)))
    spsm = float(np.sum(am1**2 * pops))
    g2_num = float(np.sum(am1**2 * am2**2 * pops))
    return ObservableSet(
        s_z=s_z,
        n_e=n_e,
        dipole=dipole,
        gamma_sr=spsm,  # gamma = 1: rate in units of gamma
        g2_numerator=g2_num,
    )


def g2_zero(state: DickeLadderState) -> float:
    """Equal-time intensity correlation <S+S+S-S-> / <S+S->^2."""
    obs = observables(state)
    if obs.gamma_sr < 1e-14:
        raise UndefinedCorrelationError(
            f"<S+S-> = {obs.gamma_sr:.3e} too small to define g2(0)"
        )
    return obs.g2_numerator / obs.gamma_sr**2
