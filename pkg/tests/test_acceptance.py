"""Exit criteria, one test each, at their stated tolerances.

Every test prints one ``PASS``/``FAIL`` line (visible with ``-s``) and the
lines are repeated in the terminal summary.  Run standalone with
``python tests/test_acceptance.py``.
"""

import sys
import warnings

import numpy as np
import pytest
from scipy.signal import find_peaks

from qtransport.dynamics import DEFAULT_RTOL, propagate_exact, propagate_stroboscopic, trace_distance
from qtransport.efficiency import (amplitude_sweep, daoqt_sweep, efficiency_exact, efficiency_static,
                                   efficiency_steady_state, eta0_closed_form, homogeneous_drive_check)
from qtransport.floquet_magnus import (AppendixCase, FloquetRegimeWarning, SUSPECTED_TYPOS, compare_with_appendix,
                                       floquet_generator, magnus_term1_quadrature, magnus_term2_closed_form,
                                       magnus_term2_quadrature)
from qtransport.liouvillian import assemble
from qtransport.model import DriveSpec, NoiseSpec, SimulationConfig, localized_state, make_linear_chain
from qtransport.presets import PRESETS, offdiag_config, onsite_config
from qtransport.validation import random_config

pytestmark = pytest.mark.acceptance

RESULTS: list[str] = []

FIG3 = dict(delta=2.0, gamma=0.0, mu=0.1, kappa=0.8)
FIG5A = dict(f=1.0, gamma=0.0, mu=0.05, kappa=0.1)


def report(number: int, title: str, checks: dict[str, bool], detail: str) -> None:
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    if failed:
        line += f"  [failed: {', '.join(failed)}]"
    print(line)
    RESULTS.append(line)
    assert ok, line


def _within(x, target, tol):
    return abs(x - target) <= tol


def test_criterion_01_onsite_frequency_sweep():
    grid = np.asarray(PRESETS["fig3_frequency"].grid)
    res = daoqt_sweep(onsite_config(**FIG3), grid, method="exact", workers=2)
    report(1, "on-site frequency sweep (exact)", {
        "omega_opt": _within(res.opt_value, 0.746, 0.02),
        "gamma": _within(res.gamma_max, 0.0814, 0.005),
        "omega_min": _within(res.min_value, 1.56, 0.05),
    }, f"omega_opt={res.opt_value:.4f}, Gamma={res.gamma_max:.4f}, omega_min={res.min_value:.4f} ({len(grid)} points)")


def test_criterion_02_offdiag_slow_trapping():
    grid = np.asarray(PRESETS["fig5_offdiag"].grid)
    res = daoqt_sweep(offdiag_config(**FIG5A), grid, method="exact", workers=2)
    eta0 = res.opt_eta0
    report(2, "off-diagonal slow trapping (exact)", {
        "omega_opt": _within(res.opt_value, 2.8, 0.1),
        "gamma": _within(res.gamma_max, 0.0825, 0.005),
        "eta0": _within(eta0, 0.33, 0.01),
        "omega_min": _within(res.min_value, 1.41, 0.05),
    }, f"omega_opt={res.opt_value:.4f}, Gamma={res.gamma_max:.4f}, eta0={eta0:.4f}, omega_min={res.min_value:.4f}")


def test_criterion_03_offdiag_fast_trapping():
    cfg = offdiag_config(**dict(FIG5A, kappa=5.0))
    grid = np.geomspace(0.1, 30.0, 241)
    res = daoqt_sweep(cfg, grid, method="exact", workers=2, refine=False)
    static = efficiency_static(cfg.replace(omega=0.0)).eta
    excess = float(np.max(res.eta - static))
    report(3, "off-diagonal fast trapping", {
        "eta0": _within(res.eta0[0], 0.64, 0.01),
        "no_gain_over_static": excess <= 1e-3,
    }, f"eta0={res.eta0[0]:.4f}, max eta(omega) - eta(0) = {excess:.2e}")


def test_criterion_04_closed_form_oracle():
    axis = np.geomspace(0.01, 2.0, 5)
    worst = 0.0
    for g in axis:
        for m in axis:
            for k in axis:
                cfg = SimulationConfig(make_linear_chain(3), DriveSpec(), NoiseSpec.uniform(3, g, m, k))
                num = efficiency_steady_state(assemble(cfg).static_part, localized_state(cfg, 2), cross_check=False).eta
                worst = max(worst, abs(num - eta0_closed_form(g, m, k)))
    report(4, "closed-form undriven efficiency", {"max_error": worst < 1e-8}, f"max |diff| = {worst:.2e} on 125 points")


def test_criterion_05_magnus_cross_validation():
    rng = np.random.default_rng(5)
    rel2, norm1 = 0.0, 0.0
    for kind in ("on_site", "off_diagonal"):
        for _ in range(10):
            split = assemble(random_config(rng, kind))
            closed = magnus_term2_closed_form(split.h0, split.h1, split.dissipators.total, split.omega)
            quad = magnus_term2_quadrature(split)
            rel2 = max(rel2, float(np.linalg.norm(closed - quad) / np.linalg.norm(quad)))
            norm1 = max(norm1, float(np.linalg.norm(magnus_term1_quadrature(split))))
    report(5, "Magnus closed form vs quadrature", {"second_order": rel2 < 1e-6, "first_order": norm1 < 1e-8},
           f"max rel. error {rel2:.2e}, max first-order norm {norm1:.2e} (20 configs)")


def test_criterion_06_onsite_rate_equations():
    gamma, mu, kappa, delta, omega = 0.3, 0.1, 0.8, 2.0, 3.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FloquetRegimeWarning)
        gen = floquet_generator(onsite_config(delta=delta, omega=omega, gamma=gamma, mu=mu, kappa=kappa)).matrix
    kw = dict(gamma=gamma, mu=mu, kappa=kappa, drive=delta, omega=omega)
    mismatches = compare_with_appendix(gen, AppendixCase.ON_SITE_N3, tol=1e-10, **kw)
    flagged = {"rho12", "rho21"}
    outside = [m for m in mismatches if m["row"] not in flagged]
    corrected = compare_with_appendix(gen, AppendixCase.ON_SITE_N3, tol=1e-10, corrected=True, **kw)
    reported = ", ".join(f"{m['row']}<-{m['column']}" for m in mismatches)
    report(6, "on-site printed rate equations", {"outside_flagged": not outside, "corrected": not corrected},
           f"{len(outside)} mismatches outside the flagged row; flagged: "
           f"{SUSPECTED_TYPOS[AppendixCase.ON_SITE_N3][1]} ({reported})")


def test_criterion_07_conservation():
    rng = np.random.default_rng(7)
    trace_dev, trap_drop, budget = 0.0, 0.0, 0.0
    for k in range(100):
        cfg = random_config(rng, ("on_site", "off_diagonal")[k % 2], omega_range=(0.3, 10.0))
        traj = propagate_exact(assemble(cfg), localized_state(cfg, cfg.initial_site), 50.0, samples=501,
                               monitor_positivity=False)
        trace_dev = max(trace_dev, float(np.abs(np.einsum("tii->t", traj.states) - 1).max()))
        trap_drop = max(trap_drop, float(-np.diff(traj.populations[:, -1]).min()))
        res = efficiency_exact(cfg)
        budget = max(budget, abs(res.eta + res.p_loss - 1))
    report(7, "conservation on 100 random configs", {
        # monotonicity holds to the integrator's relative tolerance
        "trace": trace_dev < 1e-9, "trap_monotone": trap_drop <= DEFAULT_RTOL, "budget": budget < 1e-6,
    }, f"max trace deviation {trace_dev:.2e}, max trap decrease {trap_drop:.2e}, max |eta + p_loss - 1| {budget:.2e}")


def test_criterion_08_averaging_out():
    fast = efficiency_exact(onsite_config(omega=100.0, **FIG3))
    gap = abs(fast.eta - eta0_closed_form(0.0, 0.1, 0.8))
    cfg = SimulationConfig(make_linear_chain(3), DriveSpec("on_site", 2.0, (2.0, 2.0, 2.0)), NoiseSpec.uniform(3, 0.0, 0.1, 0.8))
    driven, base = homogeneous_drive_check(cfg)
    homog = abs(driven.eta - base.eta)
    report(8, "averaging-out limit", {"fast_drive": gap < 1e-3, "homogeneous": homog < 1e-5},
           f"|eta(100) - eta0| = {gap:.2e}, homogeneous |eta - eta0| = {homog:.2e}")


def test_criterion_09_amplitude_saturation():
    res = amplitude_sweep(onsite_config(omega=0.0, **FIG3), [100.0, 200.0])
    e100, e200 = res.eta
    report(9, "static-disorder amplitude saturation", {"eta100": _within(e100, 0.73, 0.02), "saturated": abs(e200 - e100) < 0.01},
           f"eta(100) = {e100:.4f}, eta(200) - eta(100) = {e200 - e100:.2e}")


def _p2_fit(kappa):
    cfg = offdiag_config(**dict(FIG5A, omega=0.0, kappa=kappa))
    t = np.linspace(0.0, 20.0, 8001)
    p2 = propagate_exact(assemble(cfg), localized_state(cfg, 2), 20.0, times=t).populations[:, 2]
    peaks, _ = find_peaks(p2)
    period = float(np.mean(np.diff(t[peaks])))
    rate = -float(np.polyfit(t[peaks], np.log(p2[peaks]), 1)[0])
    return period, rate


@pytest.mark.xfail(strict=True, reason="envelope decays at 2 mu + kappa / 2, not 2 mu; see the decisions ledger")
def test_criterion_10_dynamics_signatures():
    period, rate = _p2_fit(0.1)
    target_period, target_rate = np.pi / (2 * np.sqrt(2)), 2 * 0.05
    report(10, "static off-diagonal dynamics", {
        "period": _within(period, target_period, 0.02 * target_period),
        "decay": _within(rate, target_rate, 0.05 * target_rate),
    }, f"period {period:.4f} (target {target_period:.4f}), decay rate {rate:.4f} (target {target_rate:.4f})")


def test_p2_envelope_includes_trap_leakage():
    # companion to criterion 10: the fitted rate is 2 mu + kappa / 2 and tends to 2 mu as kappa -> 0
    period, rate = _p2_fit(0.1)
    assert period == pytest.approx(np.pi / (2 * np.sqrt(2)), rel=0.02)
    assert rate == pytest.approx(2 * 0.05 + 0.1 / 2, rel=0.01)
    assert _p2_fit(1e-6)[1] == pytest.approx(2 * 0.05, rel=0.01)


def test_criterion_11_stroboscopic_convergence():
    t_fixed = 2 * np.pi
    dists = []
    for omega in (5.0, 10.0, 20.0):
        cfg = onsite_config(omega=omega, **FIG3)
        split = assemble(cfg)
        rho0 = localized_state(cfg, 2)
        n = int(round(t_fixed * omega / (2 * np.pi)))
        exact = propagate_exact(split, rho0, n * split.period, samples=2).final
        strob = propagate_stroboscopic(floquet_generator(split), rho0, n).final
        dists.append(trace_distance(exact, strob))
    report(11, "stroboscopic convergence", {"decreasing": dists[0] > dists[1] > dists[2]},
           "trace distance at nT = 2 pi: " + ", ".join(f"omega={w:g}: {d:.2e}" for w, d in zip((5, 10, 20), dists)))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
