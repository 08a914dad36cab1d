import numpy as np
import pytest

from rbprop.beams import ControlBeamSpec, ProbeSpec, make_probe
from rbprop.params import GridSpec, PhysicalParams
from rbprop.solver import (ComplexField2D, NumericsError, StepPlan,
                           _medium_subflow, diffraction_step, edge_window,
                           medium_step, propagate)
from rbprop.susceptibility import build_resolved_quadrature

PARAMS = PhysicalParams()
K = PARAMS.wavenumber
QUAD = build_resolved_quadrature(PARAMS.doppler_width, PARAMS.delta_p)


def gaussian_field(grid, w=48e-4, g0=0.2):
    X, Y = grid.mesh()
    return ComplexField2D(g0 * np.exp(-(X**2 + Y**2) / w**2), grid, 0.0)


class TestDiffraction:
    def test_zero_distance_is_identity(self):
        grid = GridSpec(nx=64, ny=64, extent=0.1)
        f = gaussian_field(grid)
        out = diffraction_step(f, 0.0, K)
        np.testing.assert_allclose(out.values, f.values, rtol=0, atol=1e-15)

    def test_power_conserved(self):
        grid = GridSpec(nx=128, ny=128, extent=0.2)
        f = gaussian_field(grid)
        out = diffraction_step(f, 3.7, K)
        assert out.power() == pytest.approx(f.power(), rel=1e-12)

    def test_two_half_steps_equal_one_full(self):
        grid = GridSpec(nx=64, ny=64, extent=0.1)
        plan = StepPlan(grid, dz=0.02)
        f = gaussian_field(grid)
        full = diffraction_step(f, 0.5, K, plan)
        halves = diffraction_step(diffraction_step(f, 0.25, K, plan), 0.25, K, plan)
        np.testing.assert_allclose(halves.values, full.values, rtol=0, atol=1e-14)

    def test_gaussian_spreading_law(self):
        from rbprop.analysis import beam_width
        grid = GridSpec(nx=256, ny=256, extent=0.24)
        w0 = 48e-4
        f = gaussian_field(grid, w=w0)
        z = 2.0
        out = diffraction_step(f, z, K)
        zr = np.pi * w0**2 / PARAMS.wavelength
        expect = w0 * np.sqrt(1.0 + (z / zr) ** 2)
        assert beam_width(out) == pytest.approx(expect, rel=1e-3)


class TestMedium:
    def test_zero_susceptibility_is_identity(self):
        grid = GridSpec(nx=32, ny=32, extent=0.1)
        f = gaussian_field(grid)
        out = medium_step(f, np.zeros((32, 32)), 0.5, K)
        np.testing.assert_array_equal(out.values, f.values)

    def test_absorption_strictly_decreases_power(self):
        grid = GridSpec(nx=32, ny=32, extent=0.1)
        f = gaussian_field(grid)
        chi = np.full((32, 32), 1e-7j)
        out = medium_step(f, chi, 0.5, K)
        assert out.power() < f.power()

    def test_uniform_real_chi_is_pure_phase(self):
        grid = GridSpec(nx=32, ny=32, extent=0.1)
        f = gaussian_field(grid)
        chi0 = 3.3e-6
        out = medium_step(f, np.full((32, 32), chi0), 0.25, K)
        np.testing.assert_allclose(np.abs(out.values), np.abs(f.values),
                                   rtol=1e-14)
        phase = out.values / np.where(f.values == 0, 1, f.values)
        expect = np.exp(2j * np.pi * K * chi0 * 0.25)
        np.testing.assert_allclose(phase[np.abs(f.values) > 1e-6], expect,
                                   rtol=1e-12)


class TestStepPlan:
    def test_orders(self):
        grid = GridSpec(nx=32, ny=32)
        assert StepPlan(grid, dz=0.01, order=2).substeps() == (1.0,)
        subs = StepPlan(grid, dz=0.01, order=4).substeps()
        assert len(subs) == 3 and subs[0] == subs[2]
        assert sum(subs) == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ValueError):
            StepPlan(grid, dz=0.01, order=3)

    def test_cached_phases_unimodular(self):
        grid = GridSpec(nx=32, ny=32)
        plan = StepPlan(grid, dz=0.01)
        phase = plan.diffraction_phase(0.005, K)
        np.testing.assert_allclose(np.abs(phase), 1.0, rtol=1e-14)


class TestMediumSubflow:
    def test_constant_chi_matches_exponential(self):
        grid = GridSpec(nx=32, ny=32, extent=0.1)
        f = gaussian_field(grid)
        chi0 = (2.0 + 1.0j) * 1e-6
        got = _medium_subflow(f.values, lambda g2: chi0, 0.01, K)
        expect = f.values * np.exp(2j * np.pi * K * chi0 * 0.01)
        # classical RK4 on the linear flow: local error (2 pi k chi d)^5 / 120
        np.testing.assert_allclose(got, expect, rtol=1e-10)

    def test_zero_chi_is_exact_identity(self):
        grid = GridSpec(nx=32, ny=32, extent=0.1)
        f = gaussian_field(grid)
        got = _medium_subflow(f.values, lambda g2: np.zeros_like(g2), 0.01, K)
        np.testing.assert_array_equal(got, f.values)


class TestPropagate:
    def test_control_off_equals_pure_diffraction(self):
        grid = GridSpec(nx=128, ny=128, extent=0.24, dz=0.01, cell_length=0.5)
        probe = gaussian_field(grid)
        plan = StepPlan(grid, dz=grid.dz)
        res = propagate(probe, ControlBeamSpec(G0=0.0), PARAMS, grid, plan,
                        QUAD, snapshot_every=10**9)
        direct = probe
        for _ in range(grid.n_steps):
            direct = diffraction_step(direct, grid.dz, K, plan)
        scale = np.linalg.norm(direct.values)
        assert np.linalg.norm(res.field.values - direct.values) / scale < 1e-10

    def test_preserves_x_symmetry(self):
        grid = GridSpec(nx=64, ny=64, extent=0.12, dz=0.01, cell_length=0.2)
        probe = gaussian_field(grid)
        plan = StepPlan(grid, dz=grid.dz)
        res = propagate(probe, ControlBeamSpec(waist_position_z0=0.2), PARAMS,
                        grid, plan, QUAD, snapshot_every=10**9)
        intensity = np.abs(res.field.values) ** 2
        mirrored = intensity[1:, :][::-1, :]
        assert np.max(np.abs(intensity[1:, :] - mirrored)) / intensity.max() < 1e-10

    def test_snapshots_cadence(self):
        grid = GridSpec(nx=32, ny=32, extent=0.12, dz=0.01, cell_length=0.1)
        probe = gaussian_field(grid)
        plan = StepPlan(grid, dz=grid.dz)
        res = propagate(probe, ControlBeamSpec(G0=0.0), PARAMS, grid, plan,
                        QUAD, snapshot_every=4)
        assert res.snapshot_steps == [0, 4, 8, 10]
        assert res.snapshots[-1].z == pytest.approx(0.1)

    def test_non_finite_fields_abort_with_z(self):
        grid = GridSpec(nx=32, ny=32, extent=0.12, dz=0.01, cell_length=0.1)
        bad = gaussian_field(grid)
        bad.values[3, 3] = np.nan
        plan = StepPlan(grid, dz=grid.dz)
        with pytest.raises(NumericsError) as err:
            propagate(bad, ControlBeamSpec(G0=0.0), PARAMS, grid, plan, QUAD)
        assert err.value.z == pytest.approx(0.01)

    def test_order4_runs_and_agrees_with_order2(self):
        grid = GridSpec(nx=64, ny=64, extent=0.12, dz=0.01, cell_length=0.1)
        probe = gaussian_field(grid)
        res2 = propagate(probe, ControlBeamSpec(waist_position_z0=0.1), PARAMS,
                         grid, StepPlan(grid, dz=grid.dz, order=2), QUAD,
                         snapshot_every=10**9)
        res4 = propagate(probe, ControlBeamSpec(waist_position_z0=0.1), PARAMS,
                         grid, StepPlan(grid, dz=grid.dz, order=4), QUAD,
                         snapshot_every=10**9)
        scale = np.linalg.norm(res2.field.values)
        assert np.linalg.norm(res2.field.values - res4.field.values) / scale < 1e-4


def test_edge_window_profile():
    grid = GridSpec(nx=64, ny=64)
    w = edge_window(grid, fraction=0.1)
    assert w.max() <= 1.0 and w.min() >= 0.0
    assert w[32, 32] == 1.0
    assert w[0, 32] == 0.0
