"""Hamiltonians, Lindblad dissipators and the time-periodic Liouvillian.

Superoperators are dense complex arrays acting on column-stacked density
matrices, ``vec(A X B) = (B.T kron A) vec(X)``.  With that convention

* ``-i[H, .]``        is ``-i (I kron H - H.T kron I)``
* ``D_L`` (rate ``r``) is ``r (2 conj(L) kron L - I kron L^+L - (L^+L).T kron I)``

The factor 2 on the jump term is kept as written for the transport model, so
populations decay at ``2 * rate``.  Dense storage costs ``O(d**4)`` memory and
a dense solve ``O(d**6)`` for ``d = N + 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .model import HERMITIAN_TOL, DriveKind, DriveSpec, NetworkSpec, NoiseSpec, SimulationConfig

__all__ = [
    "vec",
    "unvec",
    "apply_superop",
    "build_static_hamiltonian",
    "build_drive_hamiltonian",
    "commutator_superop",
    "lindblad_dissipator",
    "Dissipators",
    "dissipator_superops",
    "SplitLiouvillian",
    "assemble",
]


def vec(rho) -> np.ndarray:
    """Column-stack a square matrix."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def apply_superop(s, rho) -> np.ndarray:
    rho = np.asarray(rho)
    return unvec(np.asarray(s) @ vec(rho), rho.shape[0])


def _projector(d: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


def build_static_hamiltonian(network: NetworkSpec) -> np.ndarray:
    """Undriven tight-binding Hamiltonian on the extended space.

    Vacuum and trap rows and columns are zero.
    """
    d = network.dim
    h = np.zeros((d, d), dtype=complex)
    for k, w in enumerate(network.site_energies, start=1):
        h[k, k] = w
    for (k, l), v in network.couplings.items():
        h[k, l] = v
        h[l, k] = v
    return h


def build_drive_hamiltonian(network: NetworkSpec, drive: DriveSpec) -> np.ndarray:
    """Operator multiplying ``cos(omega t)`` in ``H(t)``."""
    d = network.dim
    h = np.zeros((d, d), dtype=complex)
    if drive.kind is DriveKind.ON_SITE:
        if len(drive.amplitudes) != network.n_sites:
            raise ValueError(f"{len(drive.amplitudes)} on-site amplitudes for {network.n_sites} sites")
        for k, a in enumerate(drive.amplitudes, start=1):
            h[k, k] = a
    elif drive.kind is DriveKind.OFF_DIAGONAL:
        for (k, l), f in drive.fractions.items():
            if (k, l) not in network.couplings:
                raise ValueError(f"drive fraction for uncoupled pair ({k}, {l})")
            h[k, l] = h[l, k] = f * network.couplings[(k, l)]
    return h


def commutator_superop(h) -> np.ndarray:
    """Superoperator of ``rho -> -i [h, rho]``."""
    h = np.asarray(h, dtype=complex)
    if not np.allclose(h, h.conj().T, rtol=0, atol=HERMITIAN_TOL):
        raise ValueError("commutator_superop expects a Hermitian matrix")
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def lindblad_dissipator(jump, rate: float = 1.0) -> np.ndarray:
    """``rate * (2 L rho L^+ - {L^+ L, rho})`` as a superoperator."""
    jump = np.asarray(jump, dtype=complex)
    eye = np.eye(jump.shape[0])
    ldl = jump.conj().T @ jump
    return rate * (2 * np.kron(jump.conj(), jump) - np.kron(eye, ldl) - np.kron(ldl.T, eye))


class Dissipators(NamedTuple):
    diss: np.ndarray
    deph: np.ndarray
    trap: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.diss + self.deph + self.trap


def dissipator_superops(network: NetworkSpec, noise: NoiseSpec) -> Dissipators:
    """Loss to vacuum, pure dephasing and trapping superoperators."""
    d = network.dim
    zero = np.zeros((d * d, d * d), dtype=complex)
    diss, deph = zero.copy(), zero.copy()
    for k in range(1, network.n_sites + 1):
        mu, gamma = noise.dissipation[k - 1], noise.dephasing[k - 1]
        if mu:
            diss += lindblad_dissipator(_projector(d, 0, k), mu)
        if gamma:
            deph += lindblad_dissipator(_projector(d, k, k), gamma)
    trap = zero.copy()
    if noise.trap_rate:
        trap = lindblad_dissipator(_projector(d, d - 1, noise.trap_site), noise.trap_rate)
    return Dissipators(diss, deph, trap)


@dataclass(frozen=True, eq=False)
class SplitLiouvillian:
    """``L(t) = static_part + cos(omega t) * drive_part``.

    ``h0``, ``h1`` and ``dissipators`` are kept for the closed-form Floquet
    terms, which are written in terms of them rather than of the two parts.
    """

    static_part: np.ndarray
    drive_part: np.ndarray
    omega: float
    h0: np.ndarray
    h1: np.ndarray
    dissipators: Dissipators

    def __post_init__(self):
        for arr in (self.static_part, self.drive_part, self.h0, self.h1):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega if self.omega > 0 else np.inf

    @cached_property
    def is_driven(self) -> bool:
        return bool(np.any(self.drive_part))

    def evaluate(self, t: float) -> np.ndarray:
        """Fresh array holding ``L(t)``."""
        return self.static_part + np.cos(self.omega * t) * self.drive_part

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        """``dy/dt = L(t) y``; the drive term is skipped when absent."""
        out = self.static_part @ y
        if self.is_driven:
            out += np.cos(self.omega * t) * (self.drive_part @ y)
        return out


def assemble(config: SimulationConfig) -> SplitLiouvillian:
    h0 = build_static_hamiltonian(config.network)
    h1 = build_drive_hamiltonian(config.network, config.drive)
    dissipators = dissipator_superops(config.network, config.noise)
    static = commutator_superop(h0) + dissipators.total
    drive = commutator_superop(h1)
    return SplitLiouvillian(static, drive, config.drive.omega, h0, h1, dissipators)
