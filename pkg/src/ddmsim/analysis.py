"""Fitting utilities: damped-Rabi model traces and power-law exponents.

The excited-state population of a resonantly driven two-level atom has a
closed-form damped-Rabi solution; fitting it to collective-dynamics
traces extracts the effective Rabi frequency felt inside the cloud.
Log-log regression of the steady emission rate against the effective
atom number gives the superradiance exponent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

POPULATION = "population"
EMISSION_RATE = "emission_rate"


class FitConvergenceError(RuntimeError):
    """Least-squares fit did not converge; carries the best iterate."""

    def __init__(self, message, best_params):
        super().__init__(message)
        self.best_params = best_params


class UnderdeterminedFitError(ValueError):
    """The trace carries too little structure to constrain the fit."""


@dataclass
class TimeTrace:
    """Sampled observable trace, times in units of 1/gamma."""

    times: np.ndarray
    values: np.ndarray
    kind: str = POPULATION

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError(
                f"times and values lengths differ: {self.times.shape} vs "
                f"{self.values.shape}"
            )
        if self.times.size >= 2 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.kind not in (POPULATION, EMISSION_RATE):
            raise ValueError(f"unknown trace kind {self.kind!r}")

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass
class FitResult:
    """Damped-Rabi fit output: effective Rabi frequency and decay rate
    in units of gamma, with the residual r.m.s. and the 2x2 parameter
    covariance estimated from the Jacobian."""

    omega_eff: float
    decay: float
    residual_rms: float
    covariance: np.ndarray


def obe_excited_population(omega: float, gamma: float, t):
    """Excited population of a resonantly driven two-level atom, started
    in the ground state.

    n_e(t) = n_inf [1 - e^{-3 gamma t/4}(cos(w t) + (3 gamma/(4 w)) sin(w t))]
    with w = sqrt(omega^2 - gamma^2/16) and saturation value
    n_inf = omega^2/(2 omega^2 + gamma^2). For omega < gamma/4, w is
    imaginary and the trigonometric terms become hyperbolic.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if omega < 0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    n_inf = omega**2 / (2.0 * omega**2 + gamma**2)
    w_sq = omega**2 - gamma**2 / 16.0
    if abs(w_sq) < 1e-14 * gamma**2:
        cos_term = np.ones_like(t)
        sinc_term = t  # sin(w t)/w -> t as w -> 0
    elif w_sq > 0:
        w = np.sqrt(w_sq)
        cos_term = np.cos(w * t)
        sinc_term = np.sin(w * t) / w
    else:
        w = np.sqrt(-w_sq)
        cos_term = np.cosh(w * t)
        sinc_term = np.sinh(w * t) / w
    out = n_inf * (
        1.0 - np.exp(-0.75 * gamma * t) * (cos_term + 0.75 * gamma * sinc_term)
    )
    return out if out.ndim else float(out)


def obe_integrate(omega: float, gamma: float, times) -> np.ndarray:
    """Numerically integrated two-level optical Bloch equations
    (resonant, ground start); reference for the closed form above."""
    times = np.asarray(times, dtype=float)

    def rhs(_t, y):
        n_e, re_c, im_c = y
        return [
            -gamma * n_e + omega * im_c,
            -0.5 * gamma * re_c,
            -0.5 * gamma * im_c - 0.5 * omega * (2.0 * n_e - 1.0),
        ]

    sol = solve_ivp(
        rhs,
        (0.0, float(times[-1])),
        [0.0, 0.0, 0.0],
        method="RK45",
        rtol=1e-12,
        atol=1e-14,
        t_eval=times,
    )
    return sol.y[0]


def _initial_rabi_guess(trace: TimeTrace, gamma0: float) -> float:
    values = trace.values
    interior = np.flatnonzero(
        (values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])
    )
    if interior.size:
        t_peak = trace.times[interior[0] + 1]
        if t_peak > 0:
            return np.pi / t_peak
    # No oscillation: invert the saturation value of the final samples.
    tail = float(np.mean(values[-max(3, values.size // 10) :]))
    tail = min(max(tail, 1e-6), 0.499999)
    return gamma0 * np.sqrt(tail / (1.0 - 2.0 * tail))


def fit_omega_eff(trace: TimeTrace, gamma: float = 1.0) -> FitResult:
    """Fit the damped-Rabi model to a population trace.

    Free parameters are the effective Rabi frequency and the decay rate.
    The initial Rabi guess comes from the first local maximum of the
    trace (pi/t_peak); the decay starts at the single-atom value.
    """
    if trace.kind != POPULATION:
        raise ValueError(f"expected a population trace, got kind={trace.kind!r}")
    if trace.times.size < 10:
        raise ValueError(f"need at least 10 samples, got {trace.times.size}")
    if trace.span < 1.0 / gamma:
        raise ValueError(
            f"trace spans {trace.span:.3g}/gamma, need at least one decay time"
        )
    if float(np.max(trace.values) - np.min(trace.values)) < 1e-6:
        raise UnderdeterminedFitError(
            "trace is flat to 1e-6; the fit is underdetermined"
        )

    def residuals(p):
        return obe_excited_population(p[0], p[1], trace.times) - trace.values

    x0 = [_initial_rabi_guess(trace, gamma), gamma]
    res = least_squares(
        residuals,
        x0,
        bounds=([0.0, 1e-6], [np.inf, np.inf]),
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=2000,
    )
    if not res.success:
        raise FitConvergenceError(
            f"damped-Rabi fit did not converge: {res.message}", best_params=res.x
        )
    n_pts = trace.times.size
    rms = float(np.sqrt(2.0 * res.cost / n_pts))
    jtj = res.jac.T @ res.jac
    dof = max(n_pts - 2, 1)
    try:
        cov = np.linalg.inv(jtj) * (2.0 * res.cost / dof)
    except np.linalg.LinAlgError:
        cov = np.full((2, 2), np.inf)
    return FitResult(
        omega_eff=float(res.x[0]),
        decay=float(res.x[1]),
        residual_rms=rms,
        covariance=cov,
    )


def fit_power_law(n_values, y_values):
    """Exponent and prefactor of y = c * n^alpha via log-log regression.

    Returns (alpha, prefactor, alpha_stderr), the standard error coming
    from the regression residuals.
    """
    n_values = np.asarray(n_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    if n_values.size != y_values.size:
        raise ValueError("n_values and y_values lengths differ")
    if n_values.size < 3:
        raise ValueError(f"need at least 3 points, got {n_values.size}")
    if np.any(n_values <= 0) or np.any(y_values <= 0):
        raise ValueError("power-law fit requires strictly positive inputs")
    x = np.log(n_values)
    y = np.log(y_values)
    x_mean = x.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    if sxx == 0.0:
        raise ValueError("all n_values identical")
    alpha = float(np.sum((x - x_mean) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - alpha * x_mean)
    resid = y - (alpha * x + intercept)
    dof = x.size - 2
    sigma_sq = float(np.sum(resid**2) / dof) if dof > 0 else 0.0
    stderr = float(np.sqrt(sigma_sq / sxx))
    return alpha, float(np.exp(intercept)), stderr
