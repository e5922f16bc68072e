"""Radial oracle: shell-theorem Poisson solve and radial descent."""

import math

import numpy as np
import pytest

from spgs.minimize import SolverConfig, GaussianBlob
from spgs.potential import Composite, Constant, CoulombSingular
from spgs.radial import (
    RadialProfile,
    radial_energy_breakdown,
    radial_ground_state,
    radial_kinetic_energy,
    radial_quadrature,
    radial_solve_phi,
    write_radial_csv,
)


def gaussian_profile(r_max=30.0, n_r=4096, width=1.0):
    dr = r_max / n_r
    nodes = (np.arange(n_r) + 0.5) * dr
    return RadialProfile(r_max, n_r, np.exp(-(nodes**2) / (2.0 * width**2)))


class TestRadialProfile:
    def test_validation(self):
        with pytest.raises(ValueError):
            RadialProfile(-1.0, 16, np.zeros(16))
        with pytest.raises(ValueError):
            RadialProfile(1.0, 16, np.zeros(15))
        bad = np.zeros(16)
        bad[0] = np.inf
        with pytest.raises(ValueError):
            RadialProfile(1.0, 16, bad)

    def test_staggered_nodes(self):
        prof = RadialProfile(10.0, 16, np.zeros(16))
        assert prof.nodes[0] == pytest.approx(prof.dr / 2.0)
        assert prof.nodes[-1] == pytest.approx(10.0 - prof.dr / 2.0)


class TestRadialSolvePhi:
    def test_zero(self):
        prof = RadialProfile(10.0, 64, np.zeros(64))
        phi = radial_solve_phi(prof)
        assert np.all(phi.values == 0.0)

    def test_exterior_shell_theorem(self):
        # compactly supported charge: phi(r) = M / r outside the support,
        # with M the discrete enclosed-mass integral itself
        r_max, n_r = 20.0, 2048
        dr = r_max / n_r
        nodes = (np.arange(n_r) + 0.5) * dr
        vals = np.where(nodes < 2.0, (1.0 - (nodes / 2.0) ** 2) ** 2, 0.0)
        u = RadialProfile(r_max, n_r, vals)
        phi = radial_solve_phi(u)
        q = u.values**2
        f = nodes**2 * q
        m_total = q[0] * nodes[0] ** 3 / 3.0 + np.sum(0.5 * dr * (f[:-1] + f[1:]))
        outside = nodes > 2.5
        assert np.allclose(phi.values[outside], m_total / nodes[outside], rtol=1e-8)

    def test_gaussian_center_value(self):
        u = gaussian_profile(r_max=30.0, n_r=16384)
        phi = radial_solve_phi(u)
        # phi(0) = 1/2 for the unit gaussian charge exp(-r^2)
        assert phi.values[0] == pytest.approx(0.5, abs=1e-6)

    def test_erf_closed_form(self):
        u = gaussian_profile(r_max=30.0, n_r=16384)
        phi = radial_solve_phi(u)
        r = u.nodes
        exact = math.sqrt(math.pi) / 4.0 * np.array([math.erf(x) for x in r]) / r
        assert np.max(np.abs(phi.values - exact)) < 1e-6

    def test_nonnegative_and_nonincreasing(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            r_max, n_r = 15.0, 512
            dr = r_max / n_r
            nodes = (np.arange(n_r) + 0.5) * dr
            w = rng.uniform(0.5, 3.0)
            c = rng.uniform(0.0, 3.0)
            vals = np.exp(-((nodes - c) ** 2) / (2 * w * w))
            phi = radial_solve_phi(RadialProfile(r_max, n_r, vals))
            assert phi.values.min() >= 0.0
            assert np.all(np.diff(phi.values) <= 1e-14)


class TestRadialEnergies:
    def test_kinetic_closed_form(self):
        # integral |u'|^2 over R^3 for exp(-r^2/2) is (3/2) pi^(3/2)
        u = gaussian_profile(r_max=20.0, n_r=8192)
        assert radial_kinetic_energy(u) == pytest.approx(1.5 * math.pi**1.5, rel=1e-5)

    def test_quadrature_closed_form(self):
        u = gaussian_profile(r_max=20.0, n_r=8192)
        mass = radial_quadrature(u, u.values**2)
        assert mass == pytest.approx(math.pi**1.5, rel=1e-8)

    def test_breakdown_identity(self):
        u = gaussian_profile(r_max=20.0, n_r=1024)
        phi = radial_solve_phi(u)
        eb = radial_energy_breakdown(u, np.ones(u.n_r), 4.0, phi)
        assert abs(eb.I - eb.J - eb.G / 5.0) <= 1e-12 * max(abs(eb.I), 1.0)


class TestRadialGroundState:
    def test_level_and_refinement_stability(self):
        cfg = SolverConfig(p=4.0, tol_residual=1e-8, max_iters=600)
        _, _, c1 = radial_ground_state(Constant(1.0), 4.0, r_max=30.0, n_r=2048, cfg=cfg)
        _, _, c2 = radial_ground_state(Constant(1.0), 4.0, r_max=30.0, n_r=4096, cfg=cfg)
        assert abs(c1 - c2) / abs(c2) < 0.005

    def test_lambda_ordering(self):
        cfg = SolverConfig(p=4.0, tol_residual=1e-7, max_iters=600)
        _, _, c1 = radial_ground_state(Constant(1.0), 4.0, r_max=30.0, n_r=1024, cfg=cfg)
        _, _, c2 = radial_ground_state(Constant(2.0), 4.0, r_max=30.0, n_r=1024, cfg=cfg)
        assert c1 < c2

    def test_residual_and_manifold_contracts(self):
        cfg = SolverConfig(p=4.0, tol_residual=1e-8, max_iters=600)
        u, phi, c = radial_ground_state(Constant(1.0), 4.0, r_max=30.0, n_r=2048, cfg=cfg)
        eb = radial_energy_breakdown(u, np.ones(u.n_r), 4.0, phi)
        assert abs(eb.G) <= 1e-9 * eb.magnitude
        assert eb.I == pytest.approx(c)

    def test_singular_potential_supported(self):
        cfg = SolverConfig(p=4.0, tol_residual=1e-7, max_iters=600)
        _, _, c_sing = radial_ground_state(
            CoulombSingular(1.0, 0.05, 1), 4.0, r_max=30.0, n_r=1024, cfg=cfg
        )
        _, _, c_one = radial_ground_state(Constant(1.0), 4.0, r_max=30.0, n_r=1024, cfg=cfg)
        assert c_sing < c_one

    def test_rejects_nonradial_potential(self):
        comp = Composite(Constant(1.0), lambda x, y, z: x, 0.1)
        with pytest.raises(ValueError):
            radial_ground_state(comp, 4.0, n_r=128)

    def test_rejects_bad_exponent(self):
        with pytest.raises(ValueError):
            radial_ground_state(Constant(1.0), 5.5, n_r=128)

    def test_init_width_from_config(self):
        cfg = SolverConfig(
            p=4.0, tol_residual=1e-7, max_iters=600, init=GaussianBlob(width=0.7)
        )
        _, _, c = radial_ground_state(Constant(1.0), 4.0, r_max=30.0, n_r=1024, cfg=cfg)
        assert c == pytest.approx(9.8635, rel=0.01)


class TestRadialDump:
    def test_csv_header_and_rows(self, tmp_path):
        u = gaussian_profile(r_max=5.0, n_r=32)
        phi = radial_solve_phi(u)
        path = tmp_path / "profile.csv"
        write_radial_csv(u, phi, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "r,u,phi"
        assert len(lines) == 33
        r0, u0, p0 = lines[1].split(",")
        assert float(r0) == pytest.approx(u.nodes[0])
        assert float(u0) == pytest.approx(u.values[0])
        assert float(p0) == pytest.approx(phi.values[0])
