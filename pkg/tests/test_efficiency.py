import numpy as np
import pytest

from qtransport.efficiency import (EfficiencyResult, Method, NonConvergedError, NoSteadyFluxError, amplitude_sweep,
                                   baseline_eta0, contour_grid, daoqt_sweep, efficiency, efficiency_epsilon_injection,
                                   efficiency_exact, efficiency_fmm, efficiency_static, efficiency_steady_state,
                                   eta0_closed_form, golden_section_refine, homogeneous_drive_check,
                                   parameter_sweep, site_block_indices)
from qtransport.floquet_magnus import floquet_generator
from qtransport.liouvillian import assemble
from qtransport.model import DriveSpec, NoiseSpec, SimulationConfig, localized_state, make_linear_chain
from qtransport.presets import offdiag_config, onsite_config
from qtransport.validation import random_config

from conftest import FIG3, FIG5A

# frozen values (resolvent and long-time routes agree with these independently)
ETA0_FIG3 = 0.5776582188871584
ETA0_FIG5A = 0.32997340512854184
ETA0_FIG5B = 0.6425575412362367
ETA_EXACT_FIG3_OPT = 0.6591359037432563
ETA_STATIC_FIG3 = 0.6111883177199968


def _undriven(gamma, mu, kappa, nu=1.0):
    return SimulationConfig(make_linear_chain(3, coupling=nu), DriveSpec(), NoiseSpec.uniform(3, gamma, mu, kappa))


def _resolvent(cfg, **kw):
    return efficiency_steady_state(assemble(cfg).static_part, localized_state(cfg, cfg.initial_site), **kw)


def test_closed_form_limits():
    assert eta0_closed_form(0.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert eta0_closed_form(0.7, 0.2, 0.0) == 0.0
    with pytest.raises(ZeroDivisionError):
        eta0_closed_form(0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        eta0_closed_form(-1.0, 0.1, 0.1)


def test_closed_form_frozen_values():
    assert eta0_closed_form(0.0, 0.1, 0.8) == pytest.approx(ETA0_FIG3, abs=1e-14)
    assert eta0_closed_form(0.0, 0.05, 0.1) == pytest.approx(ETA0_FIG5A, abs=1e-14)
    assert eta0_closed_form(0.0, 0.05, 5.0) == pytest.approx(ETA0_FIG5B, abs=1e-14)


@pytest.mark.parametrize("gamma,mu,kappa,nu", [(0.0, 0.1, 0.8, 1.0), (0.5, 0.2, 1.0, 0.7), (2.0, 0.01, 0.05, 1.3),
                                               (0.03, 1.5, 3.0, 1.0)])
def test_closed_form_matches_resolvent(gamma, mu, kappa, nu):
    assert _resolvent(_undriven(gamma, mu, kappa, nu)).eta == pytest.approx(eta0_closed_form(gamma, mu, kappa, nu), abs=1e-8)


def test_closed_form_independent_of_site_energy():
    cfg = SimulationConfig(make_linear_chain(3, site_energies=0.4), DriveSpec(), NoiseSpec.uniform(3, 0.3, 0.1, 0.6))
    assert _resolvent(cfg).eta == pytest.approx(eta0_closed_form(0.3, 0.1, 0.6), abs=1e-10)


def test_resolvent_records_cross_check_and_loss():
    res = _resolvent(_undriven(0.2, 0.1, 0.8))
    assert res.method is Method.RESOLVENT
    assert res.cross_check.method is Method.EPSILON_INJECTION
    assert abs(res.eta - res.cross_check.eta) < 1e-7
    assert res.eta + res.p_loss == pytest.approx(1.0, abs=1e-10)
    assert res.residual < 1e-12


def test_resolvent_vs_injection_random(rng, quiet_regime):
    for k in range(50):
        cfg = random_config(rng, ("on_site", "off_diagonal", "none")[k % 3])
        split = assemble(cfg)
        gen = split.static_part if k % 2 else floquet_generator(split).matrix if split.is_driven else split.static_part
        res = efficiency_steady_state(gen, localized_state(cfg, cfg.initial_site))
        assert abs(res.eta - res.cross_check.eta) < 1e-7


def test_injection_is_insensitive_to_epsilon():
    cfg = _undriven(0.1, 0.2, 0.4)
    gen, rho0 = assemble(cfg).static_part, localized_state(cfg, 2)
    a = efficiency_epsilon_injection(gen, rho0, 1e-8).eta
    b = efficiency_epsilon_injection(gen, rho0, 1e-4).eta
    assert a == pytest.approx(b, abs=1e-10)


def test_no_loss_channel_is_singular():
    cfg = _undriven(0.3, 0.0, 0.0)
    with pytest.raises(NoSteadyFluxError):
        _resolvent(cfg)
    with pytest.raises(NoSteadyFluxError):
        efficiency_exact(cfg)


def test_vanishing_trap_rate():
    assert _resolvent(_undriven(0.1, 0.2, 1e-9)).eta < 1e-8


def test_site_block_indices():
    idx = site_block_indices(5)
    assert len(idx) == 9
    assert 0 not in idx and 24 not in idx and 6 in idx


def test_exact_without_loss_reaches_trap(quiet_regime):
    for cfg in (onsite_config(delta=2.0, omega=1.3, mu=0.0, kappa=0.8), offdiag_config(f=1.0, omega=2.0, mu=0.0, kappa=0.5)):
        assert efficiency_exact(cfg).eta == pytest.approx(1.0, abs=1e-5)


def test_exact_undriven_matches_closed_form():
    res = efficiency_exact(onsite_config(delta=0.0, omega=1.0, **{k: v for k, v in FIG3.items() if k != "delta"}))
    assert res.eta == pytest.approx(ETA0_FIG3, abs=1e-5)
    assert res.eta + res.p_loss == pytest.approx(1.0, abs=1e-6)
    assert res.residual < 1e-6


def test_exact_fig3_optimum_frozen(fig3_config):
    res = efficiency_exact(fig3_config)
    assert res.eta == pytest.approx(ETA_EXACT_FIG3_OPT, abs=1e-6)
    assert res.daoqt == pytest.approx(0.0814, abs=0.005)
    assert res.method is Method.LONG_TIME_EXACT


def test_exact_nonconvergence_carries_partial(fig3_config):
    with pytest.raises(NonConvergedError) as info:
        efficiency_exact(fig3_config, t_max=5.0)
    partial = info.value.result
    assert isinstance(partial, EfficiencyResult)
    assert partial.residual > 1e-6 and partial.t_final > 5.0


def test_three_way_agreement_undriven(rng):
    for _ in range(5):
        cfg = random_config(rng, "none")
        res = _resolvent(cfg)
        ex = efficiency_exact(cfg)
        assert abs(res.eta - ex.eta) < 1e-5
        assert abs(res.cross_check.eta - ex.eta) < 1e-5


def test_static_uses_frozen_liouvillian():
    res = efficiency_static(onsite_config(omega=0.0, **FIG3))
    assert res.eta == pytest.approx(ETA_STATIC_FIG3, abs=1e-12)
    # same as an undriven chain with site 1 detuned by delta
    detuned = SimulationConfig(make_linear_chain(3, site_energies=(2.0, 0.0, 0.0)), DriveSpec(),
                               NoiseSpec.uniform(3, 0.0, 0.1, 0.8))
    assert _resolvent(detuned).eta == pytest.approx(res.eta, abs=1e-12)


def test_fmm_close_to_exact_at_high_frequency():
    for w in (5.0, 10.0, 20.0):
        cfg = onsite_config(omega=w, **FIG3)
        assert abs(efficiency_fmm(cfg).eta - efficiency_exact(cfg).eta) < 0.02


def test_eta_monotone_in_loss():
    etas = [eta0_closed_form(0.3, mu, 0.8) for mu in np.linspace(0.01, 2.0, 10)]
    assert all(b <= a for a, b in zip(etas, etas[1:]))


def test_homogeneous_drive_has_no_effect():
    for delta, omega in ((2.0, 2.0), (10.0, 0.7), (0.0, 1.0)):
        cfg = SimulationConfig(make_linear_chain(3), DriveSpec("on_site", omega, (delta,) * 3),
                               NoiseSpec.uniform(3, 0.0, 0.1, 0.8))
        driven, base = homogeneous_drive_check(cfg)
        assert abs(driven.eta - base.eta) < 1e-5
    with pytest.raises(ValueError):
        homogeneous_drive_check(onsite_config())


def test_dispatch():
    cfg = onsite_config(omega=3.0, **FIG3)
    assert efficiency(cfg, "closed_form").eta == pytest.approx(ETA0_FIG3)
    assert efficiency(cfg, "fmm").method is Method.FMM
    with pytest.raises(ValueError):
        efficiency(offdiag_config(kappa=0.1).replace(initial_site=1), "closed_form")


def test_baseline_falls_back_to_numeric():
    cfg = SimulationConfig(make_linear_chain(4), DriveSpec(), NoiseSpec.uniform(4, 0.1, 0.1, 0.5))
    assert baseline_eta0(cfg) == pytest.approx(_resolvent(cfg).eta, abs=1e-14)


def test_golden_refinement_finds_parabola_peak():
    f = lambda x: 1 - (x - 0.73) ** 2
    grid = np.linspace(0, 2, 11)
    x, y = golden_section_refine(f, grid, f(grid), int(np.argmax(f(grid))))
    assert x == pytest.approx(0.73, rel=1e-3)
    assert golden_section_refine(f, grid, -grid, 0) == (0.0, 0.0)


def test_sweep_on_flat_drive_is_flat():
    cfg = onsite_config(delta=0.0, **{k: v for k, v in FIG3.items() if k != "delta"})
    res = daoqt_sweep(cfg, np.geomspace(0.5, 10, 6))
    assert np.ptp(res.eta) < 1e-12
    assert abs(res.gamma_max) < 1e-12
    assert res.argmax_index == 0


def test_sweep_grid_validation():
    cfg = onsite_config(**FIG3)
    for grid in ([1.0], [1.0, 0.5], [0.0, 1.0]):
        with pytest.raises(ValueError):
            daoqt_sweep(cfg, grid)
    with pytest.raises(ValueError):
        parameter_sweep(cfg, "nu", [1, 2])
    with pytest.raises(ValueError):
        amplitude_sweep(offdiag_config(), [0, 1])


def test_sweep_locates_fig3_extrema():
    res = daoqt_sweep(onsite_config(**FIG3), np.geomspace(0.3, 30, 40))
    assert res.opt_value == pytest.approx(0.746, abs=0.02)
    assert res.min_value == pytest.approx(1.56, abs=0.05)
    assert res.eta0[0] == pytest.approx(ETA0_FIG3)
    assert res.extra["eta_static"] == pytest.approx(ETA_STATIC_FIG3)
    text = res.to_csv()
    assert text.splitlines()[0] == "omega,eta,eta0,daoqt"
    assert len(text.splitlines()) == 41
    summary = res.summary()
    assert {"omega_opt", "gamma_max", "eta0", "method", "residual_max"} <= set(summary)


def test_sweep_worker_independence():
    cfg = offdiag_config(**FIG5A)
    grid = np.geomspace(1.0, 4.0, 9)
    a = parameter_sweep(cfg, "omega", grid, workers=1, refine=False)
    b = parameter_sweep(cfg, "omega", grid, workers=3, refine=False)
    assert a.to_csv() == b.to_csv()


def test_fmm_sweep_flags_unphysical_points(quiet_regime):
    res = daoqt_sweep(offdiag_config(**FIG5A), np.geomspace(0.1, 5.0, 12), method="fmm", refine=False)
    assert res.summary()["n_unphysical"] > 0
    finite = res.eta[np.isfinite(res.eta)]
    assert finite.min() >= -1e-8 and finite.max() <= 1 + 1e-8


def test_rate_axis_sweep_tracks_baseline():
    cfg = onsite_config(omega=2.0, **FIG3)
    res = parameter_sweep(cfg, "mu", np.linspace(0.05, 0.5, 4), method="fmm", refine=False)
    np.testing.assert_allclose(res.eta0, [eta0_closed_form(0.0, m, 0.8) for m in res.values])


def test_amplitude_sweep_static_curve():
    res = amplitude_sweep(onsite_config(omega=0.0, **FIG3), [0.0, 2.0, 100.0, 200.0])
    assert res.eta[0] == pytest.approx(ETA0_FIG3, abs=1e-12)
    assert res.eta[1] == pytest.approx(ETA_STATIC_FIG3, abs=1e-12)
    assert res.eta[2] == pytest.approx(0.73, abs=0.02)


def test_contour_grid_shapes():
    res = contour_grid(onsite_config(omega=5.0, **FIG3), [0.1, 0.3], [0.5, 1.0, 2.0])
    assert res.eta.shape == (2, 3)
    assert res.eta0[0, 0] == pytest.approx(eta0_closed_form(0.0, 0.1, 0.5))
    assert res.to_csv().splitlines()[0] == "omega,mu,kappa,eta,eta0,daoqt"
