"""Time evolution: exact (time-ordered) and stroboscopic Floquet propagation.

The master equation is integrated in vectorized form, ``d vec(rho)/dt =
L(t) vec(rho)``, with an adaptive embedded Runge-Kutta pair (Dormand-Prince
8(5,3) from :func:`scipy.integrate.solve_ivp`).  Explicit Runge-Kutta steps
preserve the linear trace invariant up to round-off, so population sums stay
at 1 independent of the step-size controller.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .io import write_rows
from .liouvillian import SplitLiouvillian, unvec, vec
from .model import DensityMatrix

__all__ = [
    "IntegrationError",
    "PositivityWarning",
    "Trajectory",
    "propagate_exact",
    "propagator",
    "matrix_exponential",
    "matrix_exponential_apply",
    "propagate_stroboscopic",
    "trace_distance",
]

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-11
EXPM_NORM_LIMIT = 1e4
POSITIVITY_TOL = 1e-8


class IntegrationError(RuntimeError):
    """The ODE solver failed (step size underflow or tolerance failure)."""


class PositivityWarning(UserWarning):
    """A propagated state has a negative eigenvalue beyond round-off."""


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Density matrices sampled at ``times``; ``states`` has shape ``(T, d, d)``."""

    times: np.ndarray
    states: np.ndarray

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def n_sites(self) -> int:
        return self.dim - 2

    @property
    def populations(self) -> np.ndarray:
        """``p_n(t)`` table with shape ``(T, N + 2)``; column ``N + 1`` is the trap."""
        return np.einsum("tii->ti", self.states).real

    def state(self, i: int) -> DensityMatrix:
        return DensityMatrix(self.states[i], check=False)

    @property
    def final(self) -> DensityMatrix:
        return self.state(-1)

    def min_eigenvalues(self) -> np.ndarray:
        herm = 0.5 * (self.states + np.conj(np.swapaxes(self.states, 1, 2)))
        return np.linalg.eigvalsh(herm)[:, 0]

    def to_csv(self, target=None, coherences: bool = False) -> str:
        """Write ``t,p0,...,pN,ptrap`` rows (15 significant digits).

        With ``coherences`` the real and imaginary parts of every site-site
        coherence ``rho_ij`` (``i < j``) are appended.
        """
        n = self.n_sites
        header = ["t"] + [f"p{k}" for k in range(n + 1)] + ["ptrap"]
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)] if coherences else []
        for i, j in pairs:
            header += [f"re_rho_{i}{j}", f"im_rho_{i}{j}"]
        rows = []
        for t, state, p in zip(self.times, self.states, self.populations):
            row = [t, *p]
            for i, j in pairs:
                row += [state[i, j].real, state[i, j].imag]
            rows.append(row)
        return write_rows(header, rows, target)


def _as_array(rho) -> np.ndarray:
    return np.asarray(rho.data if isinstance(rho, DensityMatrix) else rho, dtype=complex)


def _check_positivity(traj: Trajectory, what: str) -> None:
    worst = traj.min_eigenvalues().min()
    if worst < -POSITIVITY_TOL:
        warnings.warn(f"{what}: density matrix eigenvalue {worst:.3e} < 0", PositivityWarning, stacklevel=3)


def _solve(fun, t_span, y0, t_eval, rtol, atol):
    sol = solve_ivp(fun, t_span, y0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"integration over {t_span} failed: {sol.message}")
    return sol


def propagate_exact(split: SplitLiouvillian, rho0, t_end: float, samples: int = 201,
                    rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                    times=None, monitor_positivity: bool = True) -> Trajectory:
    """Integrate ``rho' = L(t) rho`` from ``t = 0`` to ``t_end``.

    Output is sampled on ``samples`` equally spaced times (or on explicit
    ``times``) through the solver's dense output.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    rho0 = _as_array(rho0)
    d = rho0.shape[0]
    if times is None:
        times = np.linspace(0.0, t_end, int(samples))
    times = np.asarray(times, dtype=float)
    if not np.any(split.static_part) and not split.is_driven:
        states = np.repeat(rho0[None], len(times), axis=0)
        return Trajectory(times, states)
    sol = _solve(split.rhs, (0.0, float(t_end)), vec(rho0).astype(complex), times, rtol, atol)
    states = np.stack([unvec(y, d) for y in sol.y.T])
    traj = Trajectory(sol.t, states)
    if monitor_positivity:
        _check_positivity(traj, "exact propagation")
    return traj


def propagator(split: SplitLiouvillian, t_end: float, t_start: float = 0.0,
               rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
               indices=None) -> np.ndarray:
    """Superoperator ``V(t_end, t_start)`` of the time-ordered evolution.

    ``indices`` restricts the evolution to an invariant block of the
    vectorized space (rows and columns), e.g. the site block.
    """
    static, drive = split.static_part, split.drive_part
    if indices is not None:
        ix = np.ix_(indices, indices)
        static, drive = static[ix], drive[ix]
    n = static.shape[0]
    if t_end == t_start:
        return np.eye(n, dtype=complex)
    if not split.is_driven or split.omega == 0:
        gen = static + drive if split.omega == 0 else static
        return matrix_exponential(gen, t_end - t_start)
    omega = split.omega

    def rhs(t, y):
        u = y.reshape(n, n)
        return ((static + np.cos(omega * t) * drive) @ u).ravel()

    sol = _solve(rhs, (t_start, t_end), np.eye(n, dtype=complex).ravel(), [t_end], rtol, atol)
    return sol.y[:, -1].reshape(n, n)


def matrix_exponential(s, t: float = 1.0) -> np.ndarray:
    """``exp(s t)`` by Pade scaling and squaring."""
    s = np.asarray(s)
    if not np.all(np.isfinite(s)):
        raise ValueError("matrix exponential of a matrix with non-finite entries")
    scaled = np.linalg.norm(s, 1) * abs(t)
    if scaled > EXPM_NORM_LIMIT:
        raise OverflowError(f"||S||_1 * t = {scaled:.3e} exceeds {EXPM_NORM_LIMIT:g}; split the interval")
    return scipy.linalg.expm(s * t)


def matrix_exponential_apply(s, t: float, rho) -> DensityMatrix:
    """``unvec(exp(s t) vec(rho))``."""
    arr = _as_array(rho)
    out = unvec(matrix_exponential(s, t) @ vec(arr), arr.shape[0])
    return DensityMatrix(out, check=False)


def propagate_stroboscopic(gen, rho0, n_periods: int, monitor_positivity: bool = False) -> Trajectory:
    """Sample ``exp(L_F n T) rho0`` for ``n = 0 .. n_periods``.

    ``gen`` is a :class:`~qtransport.floquet_magnus.FloquetGenerator` or any
    object with ``matrix`` and ``omega``.  Positivity is not guaranteed beyond
    the zeroth order, so it is only checked on request.
    """
    if not gen.omega > 0:
        raise ValueError("stroboscopic propagation needs omega > 0")
    rho0 = _as_array(rho0)
    d = rho0.shape[0]
    period = 2 * np.pi / gen.omega
    step = matrix_exponential(gen.matrix, period)
    v = vec(rho0).astype(complex)
    out = [v]
    for _ in range(int(n_periods)):
        v = step @ v
        out.append(v)
    states = np.stack([unvec(x, d) for x in out])
    traj = Trajectory(period * np.arange(int(n_periods) + 1), states)
    if monitor_positivity:
        _check_positivity(traj, "stroboscopic propagation")
    return traj


def trace_distance(a, b) -> float:
    """``||a - b||_1 / 2`` for Hermitian ``a``, ``b``."""
    diff = _as_array(a) - _as_array(b)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())
