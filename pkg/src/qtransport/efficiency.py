"""Transport efficiency, driving-assisted enhancement and parameter sweeps.

The efficiency ``eta`` is the asymptotic trap population.  Because the vacuum
and the trap are absorbing, the site block of any generator used here evolves
autonomously, and the total trap inflow is a single linear solve::

    eta = p_trap(0) + r_trap . (-L_site)^{-1} vec(rho0)_site

where ``r_trap`` is the trap-population row restricted to site-block columns
(``2 kappa`` on ``rho_mm`` for the bare Liouvillian; the second-order Floquet
generator adds further entries).  This resolvent route is primary; an
injection-regularised solve of the full generator serves as cross-check.
For the time-dependent problem :func:`efficiency_exact` steps the exact
one-period map until the populations have drained from the sites.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .dynamics import matrix_exponential, propagator
from .floquet_magnus import FloquetRegimeWarning, floquet_generator
from .io import write_rows
from .liouvillian import assemble, vec
from .model import DensityMatrix, DriveKind, SimulationConfig, localized_state

__all__ = [
    "Method",
    "NoSteadyFluxError",
    "NonConvergedError",
    "IllConditionedWarning",
    "EfficiencyResult",
    "SweepResult",
    "ContourResult",
    "eta0_closed_form",
    "baseline_eta0",
    "site_block_indices",
    "efficiency_steady_state",
    "efficiency_epsilon_injection",
    "efficiency_exact",
    "efficiency_fmm",
    "efficiency_static",
    "efficiency",
    "daoqt_sweep",
    "amplitude_sweep",
    "parameter_sweep",
    "contour_grid",
    "homogeneous_drive_check",
    "golden_section_refine",
]

EPSILON = 1e-8
ETA_SLACK = 1e-8
REFINE_RTOL = 1e-3


class Method(enum.Enum):
    RESOLVENT = "resolvent"
    EPSILON_INJECTION = "epsilon_injection"
    LONG_TIME_EXACT = "exact"
    CLOSED_FORM = "closed_form"
    FMM = "fmm"


class NoSteadyFluxError(ArithmeticError):
    """No loss or trapping channel: the site block never empties."""


class NonConvergedError(RuntimeError):
    """Long-time integration hit ``t_max``; ``result`` holds the partial answer."""

    def __init__(self, message: str, result: "EfficiencyResult"):
        super().__init__(message)
        self.result = result


class IllConditionedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EfficiencyResult:
    eta: float
    method: Method
    residual: float
    eta0: float = math.nan
    p_loss: float = math.nan
    t_final: float = math.nan
    cross_check: "EfficiencyResult | None" = None

    @property
    def daoqt(self) -> float:
        """Enhancement ``eta - eta0`` over the undriven baseline."""
        return self.eta - self.eta0


# ---------------------------------------------------------------------------
# closed form

def eta0_closed_form(gamma: float, mu: float, kappa: float, nu: float = 1.0) -> float:
    """Undriven efficiency of the ordered three-site chain.

    Excitation starts on the middle site, the trap hangs off an end site and
    all rates are uniform.  Valid for any uniform site energy.
    """
    g, m, k, v = float(gamma), float(mu), float(kappa), float(nu)
    if min(g, m, k) < 0:
        raise ValueError("rates must be nonnegative")
    v2 = v * v
    a0 = (k + 2 * m) * (v2 + 2 * m**2)
    a1 = 2 * (m * (k + 4 * m) + v2)
    a2 = 4 * m
    b0 = ((k + 2 * m) * v2 + m**2 * (k + m)) * (2 * m * (k + 2 * m) ** 2 + (k + 4 * m) * v2)
    b1 = 2 * (m**2 * (k + m) * (k + 2 * m) * (k + 6 * m)
              + m * (5 * k**2 + 20 * k * m + 18 * m**2) * v2 + (k + 3 * m) * v2**2)
    b2 = 4 * m * (2 * k * m * (k + m) + 6 * m**2 * (k + m) + 3 * k * v2 + 4 * m * v2)
    b3 = 8 * m**2 * (k + m)
    den = ((b3 * g + b2) * g + b1) * g + b0
    if den == 0:
        raise ZeroDivisionError("closed-form efficiency undefined with all rates zero")
    return k * v2 * ((a2 * g + a1) * g + a0) / den


def _closed_form_applies(config: SimulationConfig) -> bool:
    net, noise = config.network, config.noise
    return (
        net.n_sites == 3
        and set(net.couplings) == {(1, 2), (2, 3)}
        and len(set(net.couplings.values())) == 1
        and len(set(net.site_energies)) == 1
        and len(set(noise.dephasing)) == 1
        and len(set(noise.dissipation)) == 1
        and config.initial_site == 2
        and noise.trap_site in (1, 3)
    )


def baseline_eta0(config: SimulationConfig) -> float:
    """Undriven efficiency: closed form where it applies, else a resolvent solve."""
    if _closed_form_applies(config):
        nu = next(iter(config.network.couplings.values()))
        return eta0_closed_form(config.noise.dephasing[0], config.noise.dissipation[0], config.noise.trap_rate, abs(nu))
    split = assemble(config)
    return efficiency_steady_state(split.static_part, localized_state(config, config.initial_site), cross_check=False).eta


# ---------------------------------------------------------------------------
# steady-state solves

def site_block_indices(dim: int) -> np.ndarray:
    """Positions of ``rho_ij`` (``1 <= i, j <= N``) in the column-stacked vector."""
    sites = range(1, dim - 1)
    return np.array([i + dim * j for j in sites for i in sites])


def _absorbing_indices(dim: int) -> np.ndarray:
    ends = (0, dim - 1)
    return np.array([i + dim * j for j in ends for i in ends])


def _generator_matrix(generator) -> np.ndarray:
    return np.asarray(getattr(generator, "matrix", generator))


def _rho_array(rho0) -> np.ndarray:
    return np.asarray(rho0.data if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)


def efficiency_steady_state(generator, rho0, *, cross_check: bool = True,
                            residual_tol: float = 1e-8, eta0: float = math.nan) -> EfficiencyResult:
    """Asymptotic trap population under a time-independent generator.

    Solves ``(-L_site) x = vec(rho0)_site`` by LU with partial pivoting; ``x``
    is the time-integrated site-block state.  With ``cross_check`` the
    injection-regularised full solve is attached as ``result.cross_check``.
    """
    gen = _generator_matrix(generator)
    rho = _rho_array(rho0)
    d = rho.shape[0]
    site = site_block_indices(d)
    block = -gen[np.ix_(site, site)]
    rhs = vec(rho)[site]
    with warnings.catch_warnings():
        # singularity is detected from the pivots below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(block, check_finite=True)
    udiag = np.abs(np.diag(lu))
    if udiag.min() <= 1e3 * np.finfo(float).eps * max(udiag.max(), 1.0):
        raise NoSteadyFluxError("site-block generator is singular: no loss or trapping channel drains the sites")
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    residual = float(np.linalg.norm(block @ x - rhs))
    if residual > residual_tol:
        warnings.warn(f"steady-state residual {residual:.2e} above {residual_tol:.0e}", IllConditionedWarning, stacklevel=2)
    trap, vac = (d - 1) * (d + 1), 0
    eta = float((rho[d - 1, d - 1] + gen[trap, site] @ x).real)
    p_loss = float((rho[0, 0] + gen[vac, site] @ x).real)
    check = efficiency_epsilon_injection(gen, rho) if cross_check else None
    return EfficiencyResult(eta, Method.RESOLVENT, residual, eta0, p_loss, cross_check=check)


def efficiency_epsilon_injection(generator, rho0, epsilon: float = EPSILON) -> EfficiencyResult:
    """Full-space solve with ``rho0`` injected and the absorbing block drained at ``epsilon``.

    ``(-L + epsilon P_abs) x = epsilon vec(rho0)``, where ``P_abs`` projects on
    the vacuum/trap block.  The site block then carries ``epsilon`` times the
    time-integrated state and the trap entry of ``x`` is the efficiency,
    independent of ``epsilon`` up to round-off.
    """
    gen = _generator_matrix(generator)
    rho = _rho_array(rho0)
    d = rho.shape[0]
    mat = -np.array(gen, dtype=complex)
    absorbing = _absorbing_indices(d)
    mat[absorbing, absorbing] += epsilon
    rhs = epsilon * vec(rho)
    try:
        x = scipy.linalg.solve(mat, rhs)
    except scipy.linalg.LinAlgError as exc:
        raise NoSteadyFluxError(f"injection system singular: {exc}") from exc
    residual = float(np.linalg.norm(mat @ x - rhs) / epsilon)
    trap = (d - 1) * (d + 1)
    return EfficiencyResult(float(x[trap].real), Method.EPSILON_INJECTION, residual, p_loss=float(x[0].real))


def _has_drain(config: SimulationConfig) -> bool:
    return config.noise.trap_rate > 0 or any(m > 0 for m in config.noise.dissipation)


def efficiency_static(config: SimulationConfig, cross_check: bool = False) -> EfficiencyResult:
    """Efficiency under the frozen Liouvillian ``L(0)`` (static disorder)."""
    split = assemble(config)
    gen = split.static_part + split.drive_part
    return efficiency_steady_state(gen, localized_state(config, config.initial_site),
                                   cross_check=cross_check, eta0=baseline_eta0(config))


def efficiency_fmm(config: SimulationConfig, cross_check: bool = False, coherent_terms: bool = True) -> EfficiencyResult:
    """Efficiency from the second-order Floquet-Magnus generator."""
    split = assemble(config)
    if split.omega == 0 or not split.is_driven:
        return efficiency_static(config, cross_check)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FloquetRegimeWarning)
        gen = floquet_generator(split, coherent_terms=coherent_terms)
    res = efficiency_steady_state(gen, localized_state(config, config.initial_site),
                                  cross_check=cross_check, eta0=baseline_eta0(config))
    return EfficiencyResult(res.eta, Method.FMM, res.residual, res.eta0, res.p_loss, cross_check=res.cross_check)


def efficiency_exact(config: SimulationConfig, *, t_max: float | None = None,
                     threshold: float | None = None, rtol: float | None = None,
                     atol: float | None = None, static_step: float = 1.0) -> EfficiencyResult:
    """Long-time trap population of the exact time-dependent dynamics.

    The one-period map ``V(T, 0)`` is integrated once and applied repeatedly
    (for undriven or ``omega = 0`` configs a fixed step ``static_step`` is
    exponentiated instead).  Stepping stops once ``p0 + p_trap > 1 -
    threshold``; past ``t_max`` a :class:`NonConvergedError` is raised.
    """
    tol = config.tolerances
    t_max = tol.t_max if t_max is None else t_max
    threshold = tol.convergence if threshold is None else threshold
    rtol = tol.rtol if rtol is None else rtol
    atol = tol.atol if atol is None else atol
    if not _has_drain(config):
        raise NoSteadyFluxError("no loss or trapping channel; the excitation never leaves the sites")
    split = assemble(config)
    d = split.dim
    if split.is_driven and split.omega > 0:
        step = split.period
        u = propagator(split, step, rtol=rtol, atol=atol)
    else:
        step = static_step
        u = matrix_exponential(split.evaluate(0.0), step)
    x = vec(localized_state(config, config.initial_site).data).astype(complex)
    trap = d * d - 1
    t = 0.0
    eta0 = baseline_eta0(config)
    while True:
        x = u @ x
        t += step
        p0, pt = x[0].real, x[trap].real
        residual = 1.0 - p0 - pt
        if residual < threshold:
            return EfficiencyResult(float(pt), Method.LONG_TIME_EXACT, float(residual), eta0, float(p0), t)
        if t > t_max:
            partial_result = EfficiencyResult(float(pt), Method.LONG_TIME_EXACT, float(residual), eta0, float(p0), t)
            raise NonConvergedError(f"site population {residual:.2e} left at t = {t:.4g}", partial_result)


def efficiency(config: SimulationConfig, method: str | Method = "exact") -> EfficiencyResult:
    """Dispatch on ``method``: ``exact``, ``fmm``, ``resolvent`` (of ``L(0)``) or ``closed_form``."""
    method = Method(method)
    if method is Method.LONG_TIME_EXACT:
        return efficiency_exact(config)
    if method is Method.FMM:
        return efficiency_fmm(config)
    if method is Method.RESOLVENT:
        return efficiency_static(config, cross_check=True)
    if method is Method.CLOSED_FORM:
        if not _closed_form_applies(config):
            raise ValueError("closed form only covers the uniform three-site chain started on site 2")
        e = baseline_eta0(config)
        return EfficiencyResult(e, Method.CLOSED_FORM, 0.0, e)
    raise ValueError(f"unsupported method {method}")


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True, eq=False)
class SweepResult:
    """Efficiency along one parameter axis.

    ``eta`` holds NaN where a point failed to converge and ``eta0`` the
    undriven baseline at each point (constant unless a rate is swept).
    ``opt_*`` and ``min_*`` are the refined extrema (grid extrema when
    refinement is off or the extremum sits on the grid edge); ties go to the
    smallest axis value.  ``opt_eta0`` is the baseline at ``opt_value``.
    """

    axis: str
    values: np.ndarray
    eta: np.ndarray
    eta0: np.ndarray
    method: Method
    residuals: np.ndarray
    opt_value: float
    opt_eta: float
    opt_eta0: float
    min_value: float
    min_eta: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.ndim != 1 or len(self.values) < 2 or np.any(np.diff(self.values) <= 0):
            raise ValueError("sweep grid must be strictly increasing with at least 2 points")
        if not (len(self.eta) == len(self.eta0) == len(self.values)):
            raise ValueError("eta, eta0 and grid lengths differ")

    @property
    def gamma_max(self) -> float:
        """Largest enhancement over the undriven baseline, ``max eta - eta0``."""
        return self.opt_eta - self.opt_eta0

    @property
    def daoqt(self) -> np.ndarray:
        return self.eta - self.eta0

    @property
    def argmax_index(self) -> int:
        return int(np.nanargmax(self.eta))

    @property
    def argmin_index(self) -> int:
        return int(np.nanargmin(self.eta))

    def to_csv(self, target=None) -> str:
        rows = [[v, e, b, e - b] for v, e, b in zip(self.values, self.eta, self.eta0)]
        return write_rows([self.axis, "eta", "eta0", "daoqt"], rows, target)

    def summary(self) -> dict:
        finite = self.residuals[np.isfinite(self.residuals)]
        return {
            f"{self.axis}_opt": self.opt_value,
            "gamma_max": self.gamma_max,
            "eta0": self.opt_eta0,
            "method": self.method.value,
            "residual_max": float(finite.max()) if finite.size else math.nan,
            "eta_max": self.opt_eta,
            f"{self.axis}_min": self.min_value,
            "eta_min": self.min_eta,
            "n_points": int(len(self.values)),
            "n_failed": int(self.extra.get("n_failed", np.sum(~np.isfinite(self.eta)))),
            **{k: v for k, v in self.extra.items() if np.isscalar(v)},
        }


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _point_status(config: SimulationConfig, axis: str, method: Method, value: float) -> tuple[float, float, str]:
    cfg = config.replace(**{axis: value})
    try:
        if method is Method.FMM:
            res = efficiency_fmm(cfg)
        elif method is Method.RESOLVENT or cfg.drive.omega == 0 or cfg.drive.is_trivial:
            res = efficiency_static(cfg)
        else:
            res = efficiency_exact(cfg)
    except (NonConvergedError, NoSteadyFluxError):
        return math.nan, math.nan, "failed"
    if not -ETA_SLACK <= res.eta <= 1 + ETA_SLACK:
        # truncated generators can leave the physical range at low frequency
        return math.nan, res.residual, "unphysical"
    return res.eta, res.residual, "ok"


def _point(config: SimulationConfig, axis: str, method: Method, value: float) -> tuple[float, float]:
    return _point_status(config, axis, method, value)[:2]


def golden_section_refine(fn: Callable[[float], float], values: np.ndarray, etas: np.ndarray, index: int,
                          maximize: bool = True, rtol: float = REFINE_RTOL) -> tuple[float, float]:
    """Refine a grid extremum inside its neighbouring cells by golden-section search.

    Returns ``(location, value)``; edge extrema and non-improving searches fall
    back to the grid point.
    """
    x0, y0 = float(values[index]), float(etas[index])
    if index == 0 or index == len(values) - 1:
        return x0, y0
    sign = -1.0 if maximize else 1.0
    lo, hi = float(values[index - 1]), float(values[index + 1])

    def objective(x):
        y = fn(x)
        return sign * y if np.isfinite(y) else np.inf

    try:
        res = minimize_scalar(objective, bracket=(lo, x0, hi), method="golden",
                              options={"xtol": rtol})
    except ValueError:
        return x0, y0
    x, y = float(res.x), sign * float(res.fun)
    if not (lo <= x <= hi) or not np.isfinite(y) or sign * y > sign * y0:
        return x0, y0
    return x, y


def _validate_grid(grid, positive: bool) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least 2 points")
    if positive and np.any(grid <= 0):
        raise ValueError("frequency grid must be positive")
    return grid


def parameter_sweep(config: SimulationConfig, axis: str, grid, method: str | Method = "exact",
                    workers: int = 1, refine: bool = True) -> SweepResult:
    """Efficiency along ``axis`` (``omega``, ``delta``, ``gamma``, ``mu`` or ``kappa``)."""
    if axis not in ("omega", "delta", "gamma", "mu", "kappa"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    method = Method(method)
    grid = _validate_grid(grid, positive=False)
    if np.any(grid < 0):
        raise ValueError(f"{axis} grid must be nonnegative")
    results = _map(partial(_point_status, config, axis, method), list(grid), workers)
    eta = np.array([r[0] for r in results])
    residuals = np.array([r[1] for r in results])
    status = [r[2] for r in results]
    counts = {"n_failed": status.count("failed"), "n_unphysical": status.count("unphysical")}
    rate_axis = axis in ("gamma", "mu", "kappa")
    if rate_axis:
        eta0 = np.array([baseline_eta0(config.replace(**{axis: v})) for v in grid])
    else:
        eta0 = np.full(len(grid), baseline_eta0(config))

    def base(x):
        return baseline_eta0(config.replace(**{axis: x})) if rate_axis else float(eta0[0])

    if np.all(~np.isfinite(eta)):
        nan = math.nan
        return SweepResult(axis, grid, eta, eta0, method, residuals, nan, nan, nan, nan, nan, counts)
    imax, imin = int(np.nanargmax(eta)), int(np.nanargmin(eta))

    def fn(x):
        return _point(config, axis, method, x)[0]

    if refine and np.ptp(eta[np.isfinite(eta)]) > 0:
        opt = golden_section_refine(fn, grid, eta, imax, maximize=True)
        low = golden_section_refine(fn, grid, eta, imin, maximize=False)
    else:
        opt = (float(grid[imax]), float(eta[imax]))
        low = (float(grid[imin]), float(eta[imin]))
    return SweepResult(axis, grid, eta, eta0, method, residuals, opt[0], opt[1], base(opt[0]), low[0], low[1], counts)


def daoqt_sweep(config: SimulationConfig, omega_grid, method: str | Method = "exact",
                workers: int = 1, refine: bool = True) -> SweepResult:
    """Efficiency against drive frequency with the enhancement over ``eta0``.

    The baseline is the undriven efficiency (the infinite-frequency limit).
    ``extra['eta_static']`` records the ``omega = 0`` efficiency as a second
    reference.
    """
    grid = _validate_grid(omega_grid, positive=True)
    res = parameter_sweep(config, "omega", grid, method, workers, refine)
    res.extra["eta_static"] = efficiency_static(config.replace(omega=0.0)).eta
    return res


def amplitude_sweep(config: SimulationConfig, delta_grid, method: str | Method = "exact",
                    workers: int = 1) -> SweepResult:
    """Efficiency against on-site drive amplitude at the config's frequency.

    ``omega = 0`` uses the frozen Liouvillian ``L(0)``.
    """
    if config.drive.kind is not DriveKind.ON_SITE:
        raise ValueError("amplitude sweep needs an on-site drive")
    grid = _validate_grid(delta_grid, positive=False)
    return parameter_sweep(config, "delta", grid, method, workers, refine=False)


@dataclass(frozen=True, eq=False)
class ContourResult:
    """Efficiency on a (mu, kappa) grid; ``eta[i, j]`` is at ``mu[i]``, ``kappa[j]``."""

    mu: np.ndarray
    kappa: np.ndarray
    eta: np.ndarray
    eta0: np.ndarray
    omega: float
    method: Method

    @property
    def daoqt(self) -> np.ndarray:
        return self.eta - self.eta0

    def to_csv(self, target=None) -> str:
        rows = [[self.omega, m, k, self.eta[i, j], self.eta0[i, j], self.eta[i, j] - self.eta0[i, j]]
                for i, m in enumerate(self.mu) for j, k in enumerate(self.kappa)]
        return write_rows(["omega", "mu", "kappa", "eta", "eta0", "daoqt"], rows, target)


def _contour_point(config: SimulationConfig, method: Method, mk: tuple[float, float]) -> tuple[float, float]:
    cfg = config.replace(mu=mk[0], kappa=mk[1])
    eta = _point(cfg, "omega", method, cfg.drive.omega)[0]
    return eta, baseline_eta0(cfg)


def contour_grid(config: SimulationConfig, mu_grid, kappa_grid, method: str | Method = "fmm",
                 workers: int = 1) -> ContourResult:
    method = Method(method)
    mu = _validate_grid(mu_grid, positive=True)
    kappa = _validate_grid(kappa_grid, positive=True)
    pairs = [(m, k) for m in mu for k in kappa]
    out = _map(partial(_contour_point, config, method), pairs, workers)
    eta = np.array([o[0] for o in out]).reshape(len(mu), len(kappa))
    eta0 = np.array([o[1] for o in out]).reshape(len(mu), len(kappa))
    return ContourResult(mu, kappa, eta, eta0, config.drive.omega, method)


def homogeneous_drive_check(config: SimulationConfig) -> tuple[EfficiencyResult, EfficiencyResult]:
    """Exact efficiency with a uniform on-site drive and the undriven baseline.

    A drive that shifts every site equally is removed by a gauge
    transformation, so the two efficiencies coincide.
    """
    drive = config.drive
    if drive.kind is not DriveKind.ON_SITE or len(set(drive.amplitudes)) != 1:
        raise ValueError("homogeneous check needs an on-site drive with equal amplitudes")
    eta0 = baseline_eta0(config)
    if drive.omega == 0:
        driven = efficiency_static(config)
    else:
        driven = efficiency_exact(config)
    return driven, EfficiencyResult(eta0, Method.CLOSED_FORM if _closed_form_applies(config) else Method.RESOLVENT, 0.0, eta0)
