"""Effective time-independent generator of a periodically driven Lindbladian.

For ``L(t) = L0 + cos(omega t) L1`` the Floquet-Magnus series of the one-period
propagator (starting phase ``t0 = 0``) is truncated after the second order::

    L_F = L_F^(0) + L_F^(1) + L_F^(2) + O(omega^-3)

Two independent routes to the second-order term are provided: a closed form
built from commutator and dissipator superoperators, and direct nested
Gauss-Legendre quadrature of the Magnus integrals.  The two must agree; the
quadrature is the arbiter.

The truncated generator is trace annihilating and Hermiticity preserving but
is not of Lindblad form beyond zeroth order, so positivity of the propagated
state is not guaranteed.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .dynamics import DEFAULT_ATOL, DEFAULT_RTOL, matrix_exponential, propagator
from .liouvillian import SplitLiouvillian, assemble
from .model import SimulationConfig

__all__ = [
    "UndefinedPeriodError",
    "QuadratureError",
    "MagnusConsistencyError",
    "FloquetRegimeWarning",
    "FloquetGenerator",
    "gauss_legendre",
    "period_average",
    "magnus_term0",
    "magnus_term1",
    "magnus_term1_quadrature",
    "magnus_term2_closed_form",
    "magnus_term2_quadrature",
    "floquet_generator",
    "micromotion_kick",
    "AppendixCase",
    "appendix_reference_generator",
    "appendix_rows",
    "compare_with_appendix",
    "SUSPECTED_TYPOS",
]

TERM1_TOL = 1e-8


class UndefinedPeriodError(ValueError):
    """Floquet quantities need ``omega > 0``; use the static Liouvillian instead."""


class QuadratureError(RuntimeError):
    """Nested quadrature did not converge within the allowed order."""


class MagnusConsistencyError(RuntimeError):
    """A quadrature self-check contradicted an analytic identity."""


class FloquetRegimeWarning(UserWarning):
    """Drive frequency below the coupling scale; the truncated series is unreliable."""


def _require_period(split: SplitLiouvillian) -> float:
    if not split.omega > 0:
        raise UndefinedPeriodError("omega = 0 has no period; evaluate the static Liouvillian L(0) instead")
    return 2 * np.pi / split.omega


def gauss_legendre(order: int, a: float, b: float):
    """Nodes and weights of the ``order``-point rule on ``[a, b]``."""
    x, w = leggauss(order)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def _com(a, b):
    return a @ b - b @ a


def _com_batched(a, b):
    return np.matmul(a, b) - np.matmul(b, a)


def period_average(split: SplitLiouvillian, order: int = 32) -> np.ndarray:
    """``(1/T) int_0^T L(t) dt`` by quadrature."""
    period = _require_period(split)
    t, w = gauss_legendre(order, 0.0, period)
    return np.einsum("k,kij->ij", w, _lt(split, t)) / period


def _lt(split: SplitLiouvillian, t) -> np.ndarray:
    """Stack of ``L(t_k)``."""
    c = np.cos(split.omega * np.asarray(t))
    return split.static_part[None] + c[:, None, None] * split.drive_part[None]


def magnus_term0(split: SplitLiouvillian) -> np.ndarray:
    """Zeroth order: the period average, i.e. the undriven Liouvillian."""
    _require_period(split)
    return np.array(split.static_part)


def magnus_term1_quadrature(split: SplitLiouvillian, order: int = 32) -> np.ndarray:
    """``(1/2T) int_0^T dt1 int_0^t1 dt2 [L(t1), L(t2)]`` by quadrature."""
    period = _require_period(split)
    t1s, w1s = gauss_legendre(order, 0.0, period)
    acc = np.zeros_like(split.static_part)
    for t1, w1 in zip(t1s, w1s):
        t2s, w2s = gauss_legendre(order, 0.0, t1)
        inner = np.einsum("k,kij->ij", w2s, _lt(split, t2s))
        acc += w1 * _com(split.evaluate(t1), inner)
    return acc / (2 * period)


def magnus_term1(split: SplitLiouvillian, order: int = 32, check: bool = True) -> np.ndarray:
    """First order, identically zero for a cosine drive.

    With ``check`` the double integral is evaluated numerically and a norm
    above ``1e-8`` raises :class:`MagnusConsistencyError`.
    """
    _require_period(split)
    if check and split.is_driven:
        norm = np.linalg.norm(magnus_term1_quadrature(split, order))
        if norm > TERM1_TOL:
            raise MagnusConsistencyError(f"first-order Magnus quadrature has norm {norm:.3e}")
    return np.zeros_like(split.static_part)


def _adjoint(h) -> np.ndarray:
    """``rho -> [h, rho]`` (no factor of -i)."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    return np.kron(eye, h) - np.kron(h.T, eye)


def magnus_term2_closed_form(h0, h1, dissipators, omega: float, coherent_terms: bool = True) -> np.ndarray:
    """Second-order term from ``H0``, ``H1`` and the summed dissipator.

    The twelve dissipator-dependent compositions are written out one by one.
    With ``coherent_terms`` (default) the two purely Hamiltonian double
    commutators ``-[H0,[H0,H1]]`` and ``-[H1,[H1,H0]]/4`` (over ``omega**2``)
    are added as an effective Hamiltonian; without them the result does not
    match the Magnus integral whenever ``[H0, H1] != 0``.

    ``dissipators`` is a single superoperator or a sequence to be summed.
    """
    if not omega > 0:
        raise UndefinedPeriodError("second-order Floquet term needs omega > 0")
    if isinstance(dissipators, np.ndarray) and dissipators.ndim == 2:
        dis = dissipators
    else:
        dis = sum(np.asarray(x) for x in dissipators)
    a0, a1 = _adjoint(h0), _adjoint(h1)
    if a0.shape != dis.shape:
        raise ValueError(f"Hamiltonian superoperators {a0.shape} and dissipator {dis.shape} differ in size")
    dd = dis @ dis
    terms = (
        -1j * a1 @ dd
        + 2j * dis @ a1 @ dis
        - 1j * dd @ a1
        + 2 * a0 @ a1 @ dis
        - a1 @ a0 @ dis
        - 0.25 * a1 @ a1 @ dis
        - a0 @ dis @ a1
        - a1 @ dis @ a0
        + 0.5 * a1 @ dis @ a1
        - dis @ a0 @ a1
        + 2 * dis @ a1 @ a0
        - 0.25 * dis @ a1 @ a1
    )
    if coherent_terms:
        h_eff = -(_com(h0, _com(h0, h1)) + 0.25 * _com(h1, _com(h1, h0)))
        terms = terms - 1j * _adjoint(h_eff)
    return terms / omega**2


def _term2_at_order(split: SplitLiouvillian, order: int) -> np.ndarray:
    period = split.period
    t1s, w1s = gauss_legendre(order, 0.0, period)
    acc = np.zeros_like(split.static_part)
    for t1, w1 in zip(t1s, w1s):
        l1 = split.evaluate(t1)
        t2s, w2s = gauss_legendre(order, 0.0, t1)
        l2 = _lt(split, t2s)
        # both commutator forms are linear in L(t3): integrate it first
        x3, w3 = leggauss(order)
        frac = 0.5 * (x3 + 1.0)
        t3 = t2s[:, None] * frac[None, :]
        c3 = np.einsum("m,km->k", 0.5 * w3, np.cos(split.omega * t3)) * t2s
        s3 = t2s[:, None, None] * split.static_part[None] + c3[:, None, None] * split.drive_part[None]
        inner = _com_batched(l2, s3)
        outer = _com_batched(l1[None], l2)
        integrand = _com_batched(l1[None], inner) + _com_batched(outer, s3)
        acc += w1 * np.einsum("k,kij->ij", w2s, integrand)
    return acc / (6 * period)


def magnus_term2_quadrature(split: SplitLiouvillian, order: int = 32, max_order: int = 256,
                            rtol: float = 1e-10) -> np.ndarray:
    """Second-order term by nested quadrature over ``0 < t3 < t2 < t1 < T``.

    The order is doubled until successive results agree to ``rtol`` in
    Frobenius norm; :class:`QuadratureError` if ``max_order`` is exceeded.
    """
    _require_period(split)
    if not split.is_driven:
        return np.zeros_like(split.static_part)
    prev = _term2_at_order(split, order)
    while order * 2 <= max_order:
        order *= 2
        cur = _term2_at_order(split, order)
        scale = max(np.linalg.norm(cur), np.finfo(float).tiny)
        if np.linalg.norm(cur - prev) <= rtol * scale:
            return cur
        prev = cur
    raise QuadratureError(f"second-order Magnus quadrature not converged at order {order}")


@dataclass(frozen=True, eq=False)
class FloquetGenerator:
    """Truncated Floquet generator and its pieces.

    ``truncation`` is ``||order2|| / ||order0||`` (Frobenius), a rough measure
    of how far the series has been pushed.
    """

    order0: np.ndarray
    order1: np.ndarray
    order2: np.ndarray
    omega: float
    truncation: float

    @property
    def matrix(self) -> np.ndarray:
        return self.order0 + self.order1 + self.order2

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    def zeroth_order(self) -> "FloquetGenerator":
        """Generator keeping only the (completely positive) period average."""
        zero = np.zeros_like(self.order0)
        return FloquetGenerator(self.order0, zero, zero, self.omega, 0.0)


def _max_coupling(h0) -> float:
    off = np.asarray(h0) - np.diag(np.diag(h0))
    return float(np.max(np.abs(off))) if off.size else 0.0


def floquet_generator(system, *, coherent_terms: bool = True, check_first_order: bool = False,
                      order: int = 32) -> FloquetGenerator:
    """Second-order Floquet-Magnus generator of a config or split Liouvillian.

    Emits :class:`FloquetRegimeWarning` when ``omega`` is below the largest
    coupling, where the truncated series is not expected to converge.
    """
    split = assemble(system) if isinstance(system, SimulationConfig) else system
    _require_period(split)
    order0 = magnus_term0(split)
    order1 = magnus_term1(split, order=order, check=check_first_order)
    if split.is_driven:
        order2 = magnus_term2_closed_form(split.h0, split.h1, split.dissipators.total, split.omega, coherent_terms)
    else:
        order2 = np.zeros_like(order0)
    nu = _max_coupling(split.h0)
    if split.omega < nu:
        warnings.warn(f"omega = {split.omega:g} is below the coupling {nu:g}; the second-order Floquet "
                      "generator is outside its fast-driving regime", FloquetRegimeWarning, stacklevel=2)
    norm0 = np.linalg.norm(order0)
    truncation = float(np.linalg.norm(order2) / norm0) if norm0 else 0.0
    return FloquetGenerator(order0, order1, order2, split.omega, truncation)


def micromotion_kick(split: SplitLiouvillian, gen: FloquetGenerator, t: float,
                     rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> np.ndarray:
    """``K(t) = V(t, 0) exp(-L_F t)`` for ``0 <= t <= T``."""
    period = _require_period(split)
    if not 0 <= t <= period * (1 + 1e-12):
        raise ValueError(f"kick time {t} outside [0, {period}]")
    if t == 0:
        return np.eye(split.static_part.shape[0], dtype=complex)
    return propagator(split, t, rtol=rtol, atol=atol) @ matrix_exponential(gen.matrix, -t)


# ---------------------------------------------------------------------------
# Hand-written rate equations for the three-site chain (drive on site 1 or on
# both couplings, trap on site 3, excitation starts on site 2).  Kept only as
# an external reference for the generic construction above.

class AppendixCase(enum.Enum):
    ON_SITE_N3 = "on_site"
    OFF_DIAG_N3 = "off_diagonal"


_D3 = 5  # vacuum, three sites, trap


def _ix(i: int, j: int) -> int:
    return i + _D3 * j


class _Lin(dict):
    """Linear form over density-matrix entries, keyed by ``(i, j)``."""

    def __add__(self, other):
        out = _Lin(self)
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
        return out

    def __neg__(self):
        return _Lin({k: -v for k, v in self.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return _Lin({k: c * v for k, v in self.items()})

    __rmul__ = __mul__


def _r(i, j) -> _Lin:
    return _Lin({(i, j): 1.0})


def _re(i, j) -> _Lin:
    return (_r(i, j) + _r(j, i)) * 0.5


def _im(i, j) -> _Lin:
    return (_r(i, j) - _r(j, i)) * (-0.5j)


#: Printed coefficients that disagree with the Magnus construction.  The
#: on-site rho12 row carries i*Delta*nu/(2 Omega^2) in front of its
#: second-order bracket; the generic generator gives twice that.
SUSPECTED_TYPOS = {
    AppendixCase.ON_SITE_N3: ("rho12", "second-order prefactor i*Delta*nu/(2*Omega^2); generic value i*Delta*nu/Omega^2"),
    AppendixCase.OFF_DIAG_N3: ("rho13", "bracket (rho11 + 2 rho13 + rho13) has a duplicated term"),
}


def _on_site_rows(gamma, mu, kappa, nu, delta, omega, corrected=False) -> dict:
    g, m, k, v, dl = gamma, mu, kappa, nu, delta
    w2 = omega**2
    rows = {}
    # first row's prefactor is printed with f; there is no f in this case, delta is used
    rows[(1, 1)] = (-2 * m) * _r(1, 1) - 2 * v * _im(1, 2) + (dl * v / (2 * w2)) * (
        dl * _im(1, 2) + 8 * g * _re(1, 2) + 4 * v * _im(1, 3))
    rows[(2, 2)] = (-2 * m) * _r(2, 2) + 2 * v * (_im(1, 2) - _im(2, 3)) - (dl * v / (2 * w2)) * (
        dl * _im(1, 2) + 8 * g * _re(1, 2))
    rows[(3, 3)] = (-2 * (m + k)) * _r(3, 3) + 2 * v * _im(2, 3) - (2 * dl * v**2 / w2) * _im(1, 3)
    rows[(4, 4)] = (2 * k) * _r(3, 3)
    pref12 = 1j * dl * v / (w2 if corrected else 2 * w2)
    rows[(1, 2)] = (-2 * (g + m)) * _r(1, 2) + 1j * v * (_r(1, 1) - _r(2, 2) + _r(1, 3)) + pref12 * (
        v * (4 * _r(1, 2) + _r(3, 2)) - ((8j * g + dl) / 4) * (_r(1, 1) - _r(2, 2)))
    rows[(1, 3)] = (-(2 * (g + m) + k)) * _r(1, 3) + 1j * v * (_r(1, 2) - _r(2, 3)) + (1j * dl * v / (4 * w2)) * (
        dl * _r(2, 3) + 4 * v * (_r(3, 3) - _r(1, 1) + 2 * _r(1, 3)))
    # same printed-f issue in this row's last bracket
    rows[(2, 3)] = (-(2 * (g + m) + k)) * _r(2, 3) - 1j * v * (_r(3, 3) - _r(2, 2) + _r(1, 3)) + (1j * dl * v / (4 * w2)) * (
        dl * _r(1, 3) - 4 * v * (_r(2, 1) + 2 * _r(2, 3)))
    return rows


def _off_diag_rows(gamma, mu, kappa, nu, f, omega, corrected=False) -> dict:
    g, m, k, v = gamma, mu, kappa, nu
    w2 = omega**2
    p = f * v / w2
    rows = {}
    rows[(1, 1)] = (-2 * m) * _r(1, 1) - 2 * v * _im(1, 2) + p * (
        -8 * g**2 * _im(1, 2)
        + (v / 2) * (f - 4) * (k * _re(1, 3) - 2 * g * (2 * _r(1, 1) - 2 * _r(2, 2) + _re(2, 3))))
    rows[(2, 2)] = (-2 * m) * _r(2, 2) + 2 * v * (_im(1, 2) - _im(2, 3)) + p * (
        8 * g**2 * _im(1, 2) - 2 * (2 * g + k) ** 2 * _im(2, 3)
        + v * (f - 4) * (-k * _re(2, 2) + 2 * g * (_r(1, 1) - 2 * _r(2, 2) + _r(3, 3) + _re(1, 3))))
    rows[(3, 3)] = (-2 * (m + k)) * _r(3, 3) + 2 * v * _im(2, 3) - p * (
        2 * (-2 * g + k) ** 2 * _im(2, 3)
        + (v / 2) * (f - 4) * (4 * g * _r(2, 2) + (k - 2 * g) * (2 * _r(3, 3) + _re(1, 3))))
    rows[(4, 4)] = (2 * k) * _r(3, 3) - (p * k) * (
        k**2 * _im(1, 3) - (k / 4) * (f - 4) * (_re(2, 3) - 2 * _re(1, 2)))
    q = 1j * f * v / (4 * w2)
    rows[(1, 2)] = (-2 * (g + m)) * _r(1, 2) + 1j * v * (_r(1, 1) - _r(2, 2) + _r(1, 3)) + q * (
        4 * (k**2 * _r(1, 3) + 4 * g**2 * (_r(1, 1) - _r(2, 2)))
        - 1j * v * (f - 4) * (8 * g * (2 * _r(1, 2) - _r(2, 3)) + k * (_r(3, 2) - 2 * _r(1, 2))
                              + 8 * g * (_re(2, 3) - 2 * _re(1, 2))))
    # printed "(rho11 + 2 rho13 + rho13)" transcribed as is
    rows[(1, 3)] = (-(2 * (g + m) + k)) * _r(1, 3) + 1j * v * (_r(1, 2) - _r(2, 3)) + q * (
        k**2 * _r(1, 2)
        - (1j * v / 4) * (f - 4) * (k * (_r(1, 1) + 2 * _r(1, 3) + _r(1, 3))
                                    - 2 * g * (_r(1, 1) - 2 * _r(2, 2) + _r(3, 3))))
    rows[(2, 3)] = (-(2 * (g + m) + k)) * _r(2, 3) - 1j * v * (_r(3, 3) - _r(2, 2) + _r(1, 3)) + q * (
        (2 * g + k) ** 2 * _r(2, 2) - (-2 * g + k) ** 2 * _r(3, 3)
        - (1j * v / 4) * (f - 4) * (k * _r(3, 2) + 8j * g * (2 * _im(2, 3) - _im(1, 2))))
    return rows


def appendix_rows(case: AppendixCase | str, *, gamma: float, mu: float, kappa: float, nu: float,
                  drive: float, omega: float, corrected: bool = False) -> dict:
    """Printed rate equations as ``{(i, j): linear form}``, conjugate rows included.

    Indices follow the package basis (1..3 sites, 4 trap).  ``drive`` is the
    on-site amplitude or the coupling modulation fraction.  ``corrected``
    replaces the on-site rho12 prefactor listed in :data:`SUSPECTED_TYPOS`;
    it has no effect on the off-diagonal equations.
    """
    case = AppendixCase(case)
    if not omega > 0:
        raise UndefinedPeriodError("the reference equations need omega > 0")
    build = _on_site_rows if case is AppendixCase.ON_SITE_N3 else _off_diag_rows
    rows = build(gamma, mu, kappa, nu, drive, omega, corrected)
    for (i, j), form in list(rows.items()):
        if i != j:
            rows[(j, i)] = _Lin({(b, a): np.conj(c) for (a, b), c in form.items()})
    return rows


def appendix_reference_generator(case: AppendixCase | str, *, gamma: float, mu: float, kappa: float,
                                 nu: float = 1.0, drive: float, omega: float, corrected: bool = False) -> np.ndarray:
    """Superoperator (25 x 25) whose populated rows are the printed equations.

    Rows not covered by the equations (vacuum, coherences with vacuum or
    trap) are left at zero.
    """
    rows = appendix_rows(case, gamma=gamma, mu=mu, kappa=kappa, nu=nu, drive=drive, omega=omega, corrected=corrected)
    out = np.zeros((_D3 * _D3, _D3 * _D3), dtype=complex)
    for (i, j), form in rows.items():
        for (a, b), c in form.items():
            out[_ix(i, j), _ix(a, b)] += c
    return out


def _label(i, j) -> str:
    return f"rho{i}{j}"


def compare_with_appendix(generator, case: AppendixCase | str, *, gamma: float, mu: float, kappa: float,
                          nu: float = 1.0, drive: float, omega: float, tol: float = 1e-10,
                          corrected: bool = False) -> list[dict]:
    """Entries where ``generator`` and the printed equations disagree.

    Only rows present in the printed equations are compared.  Each mismatch is
    a dict with the row and column labels and both values.
    """
    kw = dict(gamma=gamma, mu=mu, kappa=kappa, nu=nu, drive=drive, omega=omega, corrected=corrected)
    ref = appendix_reference_generator(case, **kw)
    rows = appendix_rows(case, **kw)
    gen = np.asarray(generator)
    mismatches = []
    for (i, j) in sorted(rows):
        r = _ix(i, j)
        for col in range(_D3 * _D3):
            a, b = col % _D3, col // _D3
            if abs(gen[r, col] - ref[r, col]) > tol:
                mismatches.append({"row": _label(i, j), "column": _label(a, b),
                                   "generic": complex(gen[r, col]), "printed": complex(ref[r, col])})
    return mismatches
