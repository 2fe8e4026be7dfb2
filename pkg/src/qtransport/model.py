"""Domain types for single-excitation transport on a driven qubit network.

Basis convention for every matrix in the package (dimension ``N + 2``):

====================  =====================
index                 state
====================  =====================
``0``                 vacuum (excitation lost)
``1 .. N``            localized excitation on site ``k``
``N + 1``             trap (excitation collected)
====================  =====================

Energies, rates and frequencies are in units of the nearest-neighbour coupling
``nu`` (set to 1 by the presets), times in units of ``1/nu``.

The local master equation used downstream is only physically justified when
the bare site energies are much larger than the couplings; the package does
not check this regime.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "HERMITIAN_TOL",
    "InvalidConfigError",
    "NetworkSpec",
    "DriveKind",
    "DriveSpec",
    "NoiseSpec",
    "Tolerances",
    "SimulationConfig",
    "DensityMatrix",
    "make_linear_chain",
    "localized_state",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "dump_config",
]

HERMITIAN_TOL = 1e-12


class InvalidConfigError(ValueError):
    """Raised for malformed networks, drives, noise settings or config files."""


def _as_float_tuple(values, n: int, name: str) -> tuple[float, ...]:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise InvalidConfigError(f"{name} must be a scalar or have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidConfigError(f"{name} contains non-finite entries")
    return tuple(float(x) for x in arr)


def _check_rates(values: Sequence[float], name: str) -> None:
    if any(v < 0 for v in values):
        raise InvalidConfigError(f"{name} must be nonnegative, got {tuple(values)}")


def _freeze_pairs(pairs: Mapping[tuple[int, int], float], n_sites: int, name: str) -> Mapping[tuple[int, int], float]:
    out = {}
    for key, value in pairs.items():
        k, l = (int(i) for i in key)
        if k == l:
            raise InvalidConfigError(f"{name}: diagonal entry ({k}, {l}) is not a coupling")
        if not (1 <= k <= n_sites and 1 <= l <= n_sites):
            raise InvalidConfigError(f"{name}: pair ({k}, {l}) outside sites 1..{n_sites}")
        k, l = min(k, l), max(k, l)
        if (k, l) in out:
            raise InvalidConfigError(f"{name}: pair ({k}, {l}) given twice")
        v = float(value)
        if not math.isfinite(v):
            raise InvalidConfigError(f"{name}: non-finite value for ({k}, {l})")
        out[(k, l)] = v
    return MappingProxyType(dict(sorted(out.items())))


@dataclass(frozen=True)
class NetworkSpec:
    """Sites, on-site energies and real symmetric couplings.

    Sites are numbered ``1..n_sites`` so that site ``k`` is basis index ``k``.
    ``couplings`` maps ``(k, l)`` with ``k < l`` to the hopping rate.
    """

    n_sites: int
    site_energies: tuple[float, ...]
    couplings: Mapping[tuple[int, int], float]

    def __post_init__(self):
        if not isinstance(self.n_sites, (int, np.integer)) or self.n_sites < 2:
            raise InvalidConfigError(f"a network needs at least 2 sites, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "site_energies", _as_float_tuple(self.site_energies, self.n_sites, "site_energies"))
        object.__setattr__(self, "couplings", _freeze_pairs(self.couplings, self.n_sites, "couplings"))

    @property
    def dim(self) -> int:
        """Dimension of the extended Hilbert space (vacuum + sites + trap)."""
        return self.n_sites + 2

    @property
    def max_coupling(self) -> float:
        return max((abs(v) for v in self.couplings.values()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        return (self.n_sites, self.site_energies, dict(self.couplings)) == (
            other.n_sites, other.site_energies, dict(other.couplings))

    def __hash__(self):
        return hash((self.n_sites, self.site_energies, tuple(self.couplings.items())))

    def __reduce__(self):
        # mapping proxies do not pickle
        return (NetworkSpec, (self.n_sites, self.site_energies, dict(self.couplings)))


class DriveKind(enum.Enum):
    NONE = "none"
    ON_SITE = "on_site"
    OFF_DIAGONAL = "off_diagonal"


@dataclass(frozen=True)
class DriveSpec:
    """Periodic modulation ``cos(omega * t)`` of site energies or couplings.

    For ``ON_SITE`` the drive Hamiltonian is ``sum_k amplitudes[k-1] |k><k|``.
    For ``OFF_DIAGONAL`` each coupling ``nu_kl`` is modulated by
    ``1 + fractions[(k, l)] * cos(omega t)``.  ``omega = 0`` is allowed and
    freezes the modulation at its ``t = 0`` value (static disorder).
    """

    kind: DriveKind = DriveKind.NONE
    omega: float = 0.0
    amplitudes: tuple[float, ...] = ()
    fractions: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        kind = DriveKind(self.kind) if not isinstance(self.kind, DriveKind) else self.kind
        object.__setattr__(self, "kind", kind)
        omega = float(self.omega)
        if not math.isfinite(omega) or omega < 0:
            raise InvalidConfigError(f"drive frequency must be finite and >= 0, got {self.omega!r}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in np.atleast_1d(np.asarray(self.amplitudes, dtype=float))))
        fr = {}
        for key, v in dict(self.fractions).items():
            k, l = (int(i) for i in key)
            if k == l:
                raise InvalidConfigError(f"fractions: ({k}, {l}) is not a coupling")
            fr[(min(k, l), max(k, l))] = float(v)
        object.__setattr__(self, "fractions", MappingProxyType(dict(sorted(fr.items()))))
        if kind is DriveKind.ON_SITE and not self.amplitudes:
            raise InvalidConfigError("on-site drive needs amplitudes")
        if kind is DriveKind.OFF_DIAGONAL and not self.fractions:
            raise InvalidConfigError("off-diagonal drive needs coupling fractions")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega if self.omega > 0 else math.inf

    def modulation(self, t):
        """``F(t) = cos(omega t)``."""
        return np.cos(self.omega * t)

    @property
    def is_trivial(self) -> bool:
        """True when the drive Hamiltonian vanishes identically."""
        if self.kind is DriveKind.NONE:
            return True
        if self.kind is DriveKind.ON_SITE:
            return not any(self.amplitudes)
        return not any(self.fractions.values())

    def __eq__(self, other):
        if not isinstance(other, DriveSpec):
            return NotImplemented
        return (self.kind, self.omega, self.amplitudes, dict(self.fractions)) == (
            other.kind, other.omega, other.amplitudes, dict(other.fractions))

    def __hash__(self):
        return hash((self.kind, self.omega, self.amplitudes, tuple(self.fractions.items())))

    def __reduce__(self):
        return (DriveSpec, (self.kind, self.omega, self.amplitudes, dict(self.fractions)))


@dataclass(frozen=True)
class NoiseSpec:
    """Dephasing ``gamma_k``, loss ``mu_k`` and trapping ``kappa`` from ``trap_site``.

    Rates enter the dissipators with a factor 2 on the jump term, so a site
    population decays as ``exp(-2 mu t)``.
    """

    dephasing: tuple[float, ...]
    dissipation: tuple[float, ...]
    trap_rate: float
    trap_site: int

    def __post_init__(self):
        object.__setattr__(self, "dephasing", tuple(float(x) for x in np.atleast_1d(self.dephasing)))
        object.__setattr__(self, "dissipation", tuple(float(x) for x in np.atleast_1d(self.dissipation)))
        object.__setattr__(self, "trap_rate", float(self.trap_rate))
        object.__setattr__(self, "trap_site", int(self.trap_site))
        _check_rates(self.dephasing, "dephasing")
        _check_rates(self.dissipation, "dissipation")
        _check_rates((self.trap_rate,), "trap_rate")
        if not all(map(math.isfinite, self.dephasing + self.dissipation + (self.trap_rate,))):
            raise InvalidConfigError("noise rates must be finite")
        if len(self.dephasing) != len(self.dissipation):
            raise InvalidConfigError("dephasing and dissipation must have the same length")

    @classmethod
    def uniform(cls, n_sites: int, gamma: float, mu: float, kappa: float, trap_site: int | None = None) -> "NoiseSpec":
        return cls((gamma,) * n_sites, (mu,) * n_sites, kappa, n_sites if trap_site is None else trap_site)


@dataclass(frozen=True)
class Tolerances:
    rtol: float = 1e-9
    atol: float = 1e-11
    steady_residual: float = 1e-8
    quadrature_order: int = 32
    t_max: float = 1e4
    convergence: float = 1e-6

    def __post_init__(self):
        for name in ("rtol", "atol", "steady_residual", "t_max", "convergence"):
            v = float(getattr(self, name))
            if not (v > 0 and math.isfinite(v)):
                raise InvalidConfigError(f"tolerance {name} must be positive, got {v}")
            object.__setattr__(self, name, v)
        if int(self.quadrature_order) < 2:
            raise InvalidConfigError("quadrature_order must be >= 2")
        object.__setattr__(self, "quadrature_order", int(self.quadrature_order))


@dataclass(frozen=True)
class SimulationConfig:
    network: NetworkSpec
    drive: DriveSpec
    noise: NoiseSpec
    initial_site: int = 2
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        n = self.network.n_sites
        if not 1 <= int(self.initial_site) <= n:
            raise InvalidConfigError(f"initial_site must be in 1..{n}, got {self.initial_site}")
        object.__setattr__(self, "initial_site", int(self.initial_site))
        if len(self.noise.dephasing) != n:
            raise InvalidConfigError(f"noise rates have length {len(self.noise.dephasing)}, network has {n} sites")
        if not 1 <= self.noise.trap_site <= n:
            raise InvalidConfigError(f"trap_site must be in 1..{n}, got {self.noise.trap_site}")
        if self.drive.kind is DriveKind.ON_SITE and len(self.drive.amplitudes) != n:
            if len(self.drive.amplitudes) == 1:
                object.__setattr__(self, "drive", DriveSpec(DriveKind.ON_SITE, self.drive.omega, self.drive.amplitudes * n))
            else:
                raise InvalidConfigError(f"on-site amplitudes have length {len(self.drive.amplitudes)}, network has {n} sites")
        if self.drive.kind is DriveKind.OFF_DIAGONAL:
            missing = set(self.drive.fractions) - set(self.network.couplings)
            if missing:
                raise InvalidConfigError(f"off-diagonal fractions given for uncoupled pairs {sorted(missing)}")

    @property
    def n_sites(self) -> int:
        return self.network.n_sites

    @property
    def dim(self) -> int:
        return self.network.dim

    def replace(self, **changes) -> "SimulationConfig":
        """Copy with top-level fields or shortcut parameters replaced.

        Shortcuts: ``omega``, ``delta`` (uniform on-site amplitude on the
        sites already driven), ``gamma``, ``mu``, ``kappa`` (uniform rates).
        """
        import dataclasses

        drive, noise = self.drive, self.noise
        if "omega" in changes:
            drive = dataclasses.replace(drive, omega=changes.pop("omega"))
        if "delta" in changes:
            delta = float(changes.pop("delta"))
            if drive.kind is not DriveKind.ON_SITE:
                raise InvalidConfigError("delta only applies to on-site drives")
            if any(drive.amplitudes):
                amps = tuple(delta if a != 0 else 0.0 for a in drive.amplitudes)
            else:
                amps = (delta,) + (0.0,) * (self.n_sites - 1)
            drive = dataclasses.replace(drive, amplitudes=amps)
        n = self.n_sites
        if "gamma" in changes:
            noise = dataclasses.replace(noise, dephasing=(float(changes.pop("gamma")),) * n)
        if "mu" in changes:
            noise = dataclasses.replace(noise, dissipation=(float(changes.pop("mu")),) * n)
        if "kappa" in changes:
            noise = dataclasses.replace(noise, trap_rate=float(changes.pop("kappa")))
        changes.setdefault("drive", drive)
        changes.setdefault("noise", noise)
        return dataclasses.replace(self, **changes)


class DensityMatrix:
    """Hermitian density matrix on vacuum + sites + trap.

    The underlying array is copied and made read-only; use :attr:`data`.
    """

    __slots__ = ("_data",)

    def __init__(self, data, *, check: bool = True):
        arr = np.array(data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {arr.shape}")
        if check and not np.allclose(arr, arr.conj().T, rtol=0, atol=HERMITIAN_TOL):
            err = np.max(np.abs(arr - arr.conj().T))
            raise ValueError(f"density matrix is not Hermitian (max deviation {err:.3e})")
        arr.setflags(write=False)
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def n_sites(self) -> int:
        return self.dim - 2

    def trace(self) -> complex:
        return complex(np.trace(self._data))

    def populations(self) -> np.ndarray:
        """Diagonal ``p_0 .. p_{N+1}`` (real part)."""
        return self._data.diagonal().real.copy()

    def hermitize(self) -> "DensityMatrix":
        return DensityMatrix(0.5 * (self._data + self._data.conj().T), check=False)

    def vec(self) -> np.ndarray:
        """Column-stacked vector."""
        return self._data.reshape(-1, order="F").copy()

    @classmethod
    def from_vec(cls, v, *, check: bool = False) -> "DensityMatrix":
        v = np.asarray(v)
        d = math.isqrt(v.size)
        if d * d != v.size:
            raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
        return cls(v.reshape(d, d, order="F"), check=check)

    def __array__(self, dtype=None, copy=None):
        return self._data if dtype is None else self._data.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self._data, other._data)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, populations={np.round(self.populations(), 6).tolist()})"


def make_linear_chain(n: int, coupling: float = 1.0, site_energies=0.0) -> NetworkSpec:
    """Open chain ``1 - 2 - ... - n`` with equal nearest-neighbour couplings."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidConfigError(f"a chain needs at least 2 sites, got {n!r}")
    couplings = {(k, k + 1): float(coupling) for k in range(1, n)}
    return NetworkSpec(int(n), _as_float_tuple(site_energies, int(n), "site_energies"), couplings)


def localized_state(system, site: int) -> DensityMatrix:
    """Projector ``|site><site|``.

    ``system`` is a :class:`SimulationConfig`, :class:`NetworkSpec` or the
    number of sites.  ``site`` ranges over ``0`` (vacuum) to ``N + 1`` (trap).
    """
    n = system if isinstance(system, (int, np.integer)) else system.n_sites
    d = int(n) + 2
    if not 0 <= site < d:
        raise IndexError(f"site index {site} outside 0..{d - 1}")
    rho = np.zeros((d, d), dtype=complex)
    rho[site, site] = 1.0
    return DensityMatrix(rho, check=False)


# ---------------------------------------------------------------------------
# JSON config format

def _is_uniform_chain(net: NetworkSpec) -> bool:
    expected = {(k, k + 1) for k in range(1, net.n_sites)}
    vals = set(net.couplings.values())
    return set(net.couplings) == expected and len(vals) == 1


def _per_site(values: Sequence[float]):
    return values[0] if len(set(values)) == 1 else list(values)


def config_to_dict(config: SimulationConfig) -> dict[str, Any]:
    """Inverse of :func:`config_from_dict`; floats survive a JSON round trip exactly."""
    net = config.network
    network: dict[str, Any] = {"n_sites": net.n_sites}
    if _is_uniform_chain(net):
        network["coupling"] = next(iter(net.couplings.values()))
    else:
        network["couplings"] = [[k, l, v] for (k, l), v in net.couplings.items()]
    if any(net.site_energies):
        network["site_energies"] = list(net.site_energies)
    drive: dict[str, Any] = {"kind": config.drive.kind.value, "omega": config.drive.omega}
    if config.drive.amplitudes:
        drive["amplitudes"] = list(config.drive.amplitudes)
    if config.drive.fractions:
        drive["fractions"] = [[k, l, v] for (k, l), v in config.drive.fractions.items()]
    noise = {
        "gamma": _per_site(config.noise.dephasing),
        "mu": _per_site(config.noise.dissipation),
        "kappa": config.noise.trap_rate,
        "trap_site": config.noise.trap_site,
    }
    tol = config.tolerances
    return {
        "network": network,
        "drive": drive,
        "noise": noise,
        "initial_site": config.initial_site,
        "tolerances": {
            "rtol": tol.rtol, "atol": tol.atol, "steady_residual": tol.steady_residual,
            "quadrature_order": tol.quadrature_order, "t_max": tol.t_max, "convergence": tol.convergence,
        },
    }


def _pairs(raw, name) -> dict[tuple[int, int], float]:
    if isinstance(raw, Mapping):
        out = {}
        for key, v in raw.items():
            k, l = (int(s) for s in str(key).replace("(", "").replace(")", "").split(","))
            out[(k, l)] = float(v)
        return out
    try:
        return {(int(k), int(l)): float(v) for k, l, v in raw}
    except (TypeError, ValueError) as exc:
        raise InvalidConfigError(f"{name} must be a list of [k, l, value] triples") from exc


def config_from_dict(doc: Mapping[str, Any]) -> SimulationConfig:
    """Build a validated config from the JSON document layout.

    Scalars given for per-site quantities are broadcast to every site.  For
    off-diagonal drives a scalar ``fractions`` applies to every coupling.
    """
    try:
        net_doc = doc["network"]
        n = int(net_doc["n_sites"])
        if "couplings" in net_doc:
            network = NetworkSpec(n, net_doc.get("site_energies", 0.0), _pairs(net_doc["couplings"], "couplings"))
        else:
            network = make_linear_chain(n, float(net_doc.get("coupling", 1.0)), net_doc.get("site_energies", 0.0))

        drive_doc = doc.get("drive", {"kind": "none"})
        kind = DriveKind(drive_doc.get("kind", "none"))
        omega = float(drive_doc.get("omega", 0.0))
        amplitudes: tuple = ()
        fractions: dict = {}
        if kind is DriveKind.ON_SITE:
            amplitudes = _as_float_tuple(drive_doc["amplitudes"], n, "amplitudes")
        elif kind is DriveKind.OFF_DIAGONAL:
            raw = drive_doc["fractions"]
            fractions = {pair: float(raw) for pair in network.couplings} if np.ndim(raw) == 0 and not isinstance(raw, Mapping) else _pairs(raw, "fractions")
        drive = DriveSpec(kind, omega, amplitudes, fractions)

        noise_doc = doc["noise"]
        noise = NoiseSpec(
            _as_float_tuple(noise_doc.get("gamma", 0.0), n, "gamma"),
            _as_float_tuple(noise_doc.get("mu", 0.0), n, "mu"),
            float(noise_doc["kappa"]),
            int(noise_doc.get("trap_site", n)),
        )
        tolerances = Tolerances(**doc.get("tolerances", {}))
        return SimulationConfig(network, drive, noise, int(doc.get("initial_site", 2)), tolerances)
    except InvalidConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfigError(f"malformed config: {exc!r}") from exc


def load_config(path) -> SimulationConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(doc)


def dump_config(config: SimulationConfig, path=None) -> str:
    text = json.dumps(config_to_dict(config), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
