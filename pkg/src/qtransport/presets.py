"""Named experiments: parameter sets and grids for each reproduced figure.

Every preset pins its physical parameters in ``params`` so that a registry
test can compare them against the published values.  :func:`build_figure`
turns a preset into CSV text, an SVG document and a summary dict.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .dynamics import propagate_exact
from .efficiency import contour_grid, daoqt_sweep, parameter_sweep
from .io import write_rows
from .liouvillian import assemble
from .model import DriveKind, DriveSpec, NoiseSpec, SimulationConfig, localized_state, make_linear_chain
from .plotting import LineSeries, contour_svg, emit_plot, line_svg

__all__ = ["ExperimentPreset", "PRESETS", "get_preset", "onsite_config", "offdiag_config", "build_figure", "FigureOutput"]


def onsite_config(delta=2.0, omega=1.0, gamma=0.0, mu=0.1, kappa=0.8, n_sites=3) -> SimulationConfig:
    """Chain with site 1 driven, excitation starting on site 2 and the trap on site N."""
    amps = (float(delta),) + (0.0,) * (n_sites - 1)
    return SimulationConfig(make_linear_chain(n_sites), DriveSpec(DriveKind.ON_SITE, omega, amps),
                            NoiseSpec.uniform(n_sites, gamma, mu, kappa), initial_site=2)


def offdiag_config(f=1.0, omega=1.0, gamma=0.0, mu=0.05, kappa=0.1, n_sites=3) -> SimulationConfig:
    """Chain with every coupling modulated by ``1 + f cos(omega t)``."""
    net = make_linear_chain(n_sites)
    fractions = {pair: float(f) for pair in net.couplings}
    return SimulationConfig(net, DriveSpec(DriveKind.OFF_DIAGONAL, omega, (), fractions),
                            NoiseSpec.uniform(n_sites, gamma, mu, kappa), initial_site=2)


@dataclass(frozen=True)
class ExperimentPreset:
    """A figure reproduction recipe.

    ``kind`` selects the builder: ``frequency`` (eta against omega),
    ``amplitude`` (eta against delta at several omegas), ``contour`` (mu-kappa
    grid at several omegas) or ``dynamics`` (populations against time at
    several omegas).  ``series`` holds the per-curve variations.
    """

    name: str
    kind: str
    config: SimulationConfig | None
    description: str
    params: Mapping[str, float] = field(default_factory=dict)
    grid: tuple[float, ...] = ()
    grid2: tuple[float, ...] = ()
    series: tuple[Mapping[str, float], ...] = ()
    methods: tuple[str, ...] = ("exact",)
    log: bool = False
    t_end: float = 50.0
    columns: tuple[str, ...] = ()

    def with_config(self, config: SimulationConfig) -> "ExperimentPreset":
        return dataclasses.replace(self, config=config)


def _freeze(d):
    return MappingProxyType(dict(d))


_FIG3 = dict(delta=2.0, gamma=0.0, mu=0.1, kappa=0.8)
_FIG5A = dict(f=1.0, gamma=0.0, mu=0.05, kappa=0.1)

PRESETS: Mapping[str, ExperimentPreset] = MappingProxyType({p.name: p for p in (
    ExperimentPreset(
        "fig2_contour", "contour", onsite_config(delta=2.0, omega=2.0, gamma=0.0),
        "FMM efficiency and enhancement over the mu-kappa plane, on-site drive",
        _freeze(dict(delta=2.0, gamma=0.0)),
        grid=tuple(np.round(np.linspace(0.02, 1.0, 25), 10)),
        grid2=tuple(np.round(np.linspace(0.05, 5.0, 25), 10)),
        series=(_freeze({"omega": 2.0}), _freeze({"omega": 5.0})),
        methods=("fmm",),
    ),
    ExperimentPreset(
        "fig3_frequency", "frequency", onsite_config(**_FIG3),
        "Efficiency against drive frequency, on-site drive, exact and FMM",
        _freeze(_FIG3), grid=tuple(np.geomspace(0.3, 30.0, 201)), methods=("exact", "fmm"), log=True,
    ),
    ExperimentPreset(
        "fig4_amplitude", "amplitude", onsite_config(**_FIG3),
        "Exact efficiency against drive amplitude at fixed frequencies",
        _freeze(_FIG3), grid=tuple(np.geomspace(0.1, 200.0, 41)),
        series=(_freeze({"omega": 0.0}), _freeze({"omega": 2.0}), _freeze({"omega": 5.0})), log=True,
    ),
    ExperimentPreset(
        "fig5_offdiag", "frequency", offdiag_config(**_FIG5A),
        "Enhancement against frequency, off-diagonal drive, slow and fast trapping",
        _freeze(_FIG5A), grid=tuple(np.geomspace(0.1, 30.0, 241)),
        series=(_freeze({"kappa": 0.1}), _freeze({"kappa": 5.0})), methods=("exact", "fmm"), log=True,
    ),
    ExperimentPreset(
        "fig6_coherence", "dynamics", offdiag_config(**_FIG5A),
        "Site 2 and site 3 populations at selected frequencies, off-diagonal drive",
        _freeze(_FIG5A), grid=tuple(np.linspace(0.0, 40.0, 801)),
        series=tuple(_freeze({"omega": w}) for w in (0.0, 1.41, 2.8, 30.0)), t_end=40.0,
        columns=("p2", "p3"),
    ),
    ExperimentPreset(
        "dynamics", "dynamics", onsite_config(**_FIG3),
        "Trap population for static disorder, the optimum and the fast-drive limit, on-site drive",
        _freeze(_FIG3), grid=tuple(np.linspace(0.0, 50.0, 501)),
        series=tuple(_freeze({"omega": w}) for w in (0.0, 0.746, 30.0)), columns=("ptrap",),
    ),
    ExperimentPreset(
        "custom", "frequency", None, "Frequency sweep of a user-supplied config (--config)",
        grid=tuple(np.geomspace(0.3, 30.0, 101)), methods=("exact", "fmm"), log=True,
    ),
)})


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


@dataclass
class FigureOutput:
    csv: str
    svg: str
    summary: dict
    extra_files: dict = field(default_factory=dict)


def _frequency(preset, methods, workers) -> FigureOutput:
    grid = np.asarray(preset.grid)
    variants = preset.series or ({},)
    header, cols, series, markers, summary = ["omega"], [grid], [], [], {}
    for variant in variants:
        cfg = preset.config.replace(**variant)
        tag = "".join(f"_{k}{v:g}" for k, v in variant.items())
        for method in methods:
            res = daoqt_sweep(cfg, grid, method=method, workers=workers)
            label = f"eta_{method}{tag}"
            header.append(label)
            cols.append(res.eta)
            series.append(LineSeries(label, grid, res.eta))
            markers += [(res.opt_value, res.opt_eta, "max", len(series) - 1),
                        (res.min_value, res.min_eta, "min", len(series) - 1)]
            summary[label] = res.summary()
        header.append(f"eta0{tag}")
        cols.append(res.eta0)
    csv = write_rows(header, np.column_stack(cols), None)
    svg = line_svg(series, xlabel="omega / nu", ylabel="eta", title=preset.name, log_x=preset.log, markers=markers)
    return FigureOutput(csv, svg, summary)


def _amplitude(preset, methods, workers) -> FigureOutput:
    grid = np.asarray(preset.grid)
    header, cols, series, summary = ["delta"], [grid], [], {}
    for variant in preset.series:
        cfg = preset.config.replace(**variant)
        res = parameter_sweep(cfg, "delta", grid, method="exact", workers=workers, refine=False)
        label = f"eta_omega{variant['omega']:g}"
        header.append(label)
        cols.append(res.eta)
        series.append(LineSeries(label, grid, res.eta))
        summary[label] = res.summary()
    csv = write_rows(header, np.column_stack(cols), None)
    svg = line_svg(series, xlabel="delta / nu", ylabel="eta", title=preset.name, log_x=preset.log)
    return FigureOutput(csv, svg, summary)


def _contour(preset, methods, workers) -> FigureOutput:
    mu, kappa = np.asarray(preset.grid), np.asarray(preset.grid2)
    texts, svgs, summary = [], [], {}
    extra = {}
    for variant in preset.series:
        cfg = preset.config.replace(**variant)
        res = contour_grid(cfg, mu, kappa, method=methods[0], workers=workers)
        texts.append(res.to_csv())
        tag = f"omega{variant['omega']:g}"
        extra[f"{tag}_eta.svg"] = contour_svg(kappa, mu, res.eta, title=f"eta at omega = {variant['omega']:g} nu")
        svgs.append(emit_plot(res, "contour"))
        i, j = np.unravel_index(np.nanargmax(res.daoqt), res.daoqt.shape)
        summary[tag] = {"daoqt_max": float(res.daoqt[i, j]), "mu_at_max": float(mu[i]), "kappa_at_max": float(kappa[j]),
                        "fraction_enhanced": float(np.mean(res.daoqt > 0))}
    csv = texts[0] + "".join(t.split("\n", 1)[1] for t in texts[1:])
    for k, s in enumerate(svgs[1:], start=1):
        extra[f"omega{preset.series[k]['omega']:g}_daoqt.svg"] = s
    return FigureOutput(csv, svgs[0], summary, extra)


def _dynamics(preset, methods, workers) -> FigureOutput:
    times = np.asarray(preset.grid)
    cols, header, series = [times], ["t"], []
    for variant in preset.series:
        cfg = preset.config.replace(**variant)
        traj = propagate_exact(assemble(cfg), localized_state(cfg, cfg.initial_site), times[-1], times=times)
        pops = traj.populations
        for name in preset.columns:
            idx = cfg.dim - 1 if name == "ptrap" else int(name[1:])
            label = f"{name}_omega{variant['omega']:g}"
            header.append(label)
            cols.append(pops[:, idx])
            series.append(LineSeries(label, times, pops[:, idx]))
    csv = write_rows(header, np.column_stack(cols), None)
    svg = line_svg(series, xlabel="t nu", ylabel="population", title=preset.name)
    return FigureOutput(csv, svg, {"final": {s.label: float(s.y[-1]) for s in series}})


_BUILDERS = {"frequency": _frequency, "amplitude": _amplitude, "contour": _contour, "dynamics": _dynamics}


def build_figure(preset: ExperimentPreset, methods=None, workers: int = 1) -> FigureOutput:
    """Compute a preset's data; ``methods`` overrides the preset's method list."""
    if preset.config is None:
        raise ValueError(f"preset {preset.name!r} needs a config")
    return _BUILDERS[preset.kind](preset, tuple(methods or preset.methods), workers)
