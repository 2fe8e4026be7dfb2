import dataclasses

import numpy as np
import pytest

from qtransport.dynamics import (Trajectory, matrix_exponential, matrix_exponential_apply, propagate_exact,
                                 propagate_stroboscopic, propagator, trace_distance)
from qtransport.floquet_magnus import floquet_generator
from qtransport.liouvillian import assemble, vec
from qtransport.model import DriveSpec, NoiseSpec, SimulationConfig, localized_state, make_linear_chain
from qtransport.presets import onsite_config


def test_trace_conserved_and_trap_monotone(fig3_config):
    split = assemble(fig3_config)
    traj = propagate_exact(split, localized_state(fig3_config, 2), 30.0, samples=301)
    traces = np.einsum("tii->t", traj.states)
    assert np.abs(traces - 1).max() < 1e-9
    assert np.all(np.diff(traj.populations[:, -1]) >= -1e-12)
    assert traj.min_eigenvalues().min() > -1e-8


def test_exact_matches_expm_for_static_generator():
    cfg = SimulationConfig(make_linear_chain(3), DriveSpec(), NoiseSpec.uniform(3, 0.2, 0.1, 0.5))
    split = assemble(cfg)
    rho0 = localized_state(cfg, 2)
    traj = propagate_exact(split, rho0, 7.0, samples=3)
    expected = matrix_exponential_apply(split.static_part, 7.0, rho0)
    np.testing.assert_allclose(traj.final.data, expected.data, atol=1e-9)


def test_two_site_rabi_oracle():
    # coherent hopping between two sites: p1 = cos^2(nu t)
    cfg = SimulationConfig(make_linear_chain(2, coupling=0.8), DriveSpec(), NoiseSpec.uniform(2, 0, 0, 0),
                           initial_site=1)
    traj = propagate_exact(assemble(cfg), localized_state(cfg, 1), 5.0, samples=51)
    np.testing.assert_allclose(traj.populations[:, 1], np.cos(0.8 * traj.times) ** 2, atol=1e-8)


def test_propagator_composes(fig3_config):
    split = assemble(fig3_config)
    v1 = propagator(split, 1.0)
    v21 = propagator(split, 2.5, t_start=1.0)
    np.testing.assert_allclose(v21 @ v1, propagator(split, 2.5), atol=1e-8)
    np.testing.assert_array_equal(propagator(split, 0.0), np.eye(25))


def test_propagator_agrees_with_state_propagation(fig5a_config):
    split = assemble(fig5a_config)
    rho0 = localized_state(fig5a_config, 2)
    v = propagator(split, 3.3)
    traj = propagate_exact(split, rho0, 3.3, samples=2)
    np.testing.assert_allclose(v @ rho0.vec(), vec(traj.final.data), atol=1e-8)


def test_zero_frequency_uses_frozen_generator():
    cfg = onsite_config(delta=2.0, omega=0.0)
    split = assemble(cfg)
    np.testing.assert_allclose(propagator(split, 2.0), matrix_exponential(split.static_part + split.drive_part, 2.0))


def test_expm_overflow_guard():
    with pytest.raises(OverflowError):
        matrix_exponential(np.eye(3) * 1e3, 100.0)
    with pytest.raises(ValueError):
        matrix_exponential(np.array([[np.nan]]))


def test_stroboscopic_samples_periods(quiet_regime):
    cfg = onsite_config(delta=2.0, omega=20.0)
    gen = floquet_generator(cfg)
    traj = propagate_stroboscopic(gen, localized_state(cfg, 2), 5)
    assert len(traj.times) == 6
    np.testing.assert_allclose(traj.times[-1], 5 * 2 * np.pi / 20.0)
    with pytest.raises(ValueError):
        propagate_stroboscopic(dataclasses.replace(gen, omega=0.0), localized_state(cfg, 2), 1)


def test_csv_export(fig3_config, tmp_path):
    traj = propagate_exact(assemble(fig3_config), localized_state(fig3_config, 2), 1.0, samples=3)
    text = traj.to_csv(tmp_path / "t.csv", coherences=True)
    lines = text.splitlines()
    assert lines[0] == "t,p0,p1,p2,p3,ptrap,re_rho_12,im_rho_12,re_rho_13,im_rho_13,re_rho_23,im_rho_23"
    assert len(lines) == 4
    assert lines[1].startswith("0,0,0,1,0,0")
    assert (tmp_path / "t.csv").read_text() == text
    assert traj.to_csv().splitlines()[0] == "t,p0,p1,p2,p3,ptrap"


def test_trace_distance():
    a, b = localized_state(3, 1).data, localized_state(3, 2).data
    assert trace_distance(a, b) == pytest.approx(1.0)
    assert trace_distance(a, a) == 0.0


def test_undriven_noiseless_state_is_constant():
    cfg = SimulationConfig(make_linear_chain(3, coupling=0.0), DriveSpec(), NoiseSpec.uniform(3, 0, 0, 0))
    traj = propagate_exact(assemble(cfg), localized_state(cfg, 2), 5.0, samples=4)
    assert isinstance(traj, Trajectory)
    np.testing.assert_array_equal(traj.states[-1], localized_state(cfg, 2).data)
