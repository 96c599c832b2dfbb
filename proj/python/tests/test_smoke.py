import math
import os
from pathlib import Path

import pytest

import jumpflux as jf

CONFIG_DIR = Path(os.environ.get("JUMPFLUX_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def test_matern_exponential_kernel():
    spec = jf.CovarianceSpec(smoothness=0.5, variance=1.0, correlation_length=0.1)
    assert jf.matern_kernel(spec, 0.0, 0.1) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert jf.matern_kernel(spec, 0.3, 0.3) == 1.0


def test_nystrom_energy_cutoff():
    spec = jf.CovarianceSpec(smoothness=0.5, variance=1.0, correlation_length=0.5)
    basis = jf.nystrom_eigenpairs(spec, n_quad=128, energy_fraction=0.9)
    ev = basis.eigenvalues
    assert len(ev) == basis.cutoff
    assert all(a >= b for a, b in zip(ev, ev[1:]))
    assert sum(ev) <= 1.0 + 1e-12


def test_presets_sample_positive():
    for preset in jf.preset_ids():
        a = jf.sample_coefficient(preset, seed=3, n_quad=64)
        assert a.lower_bound > 0.0
        for x in (0.1, 0.5, 0.9):
            assert a(x) > 0.0


def test_godunov_flux_examples():
    assert jf.burgers_godunov_flux(1.0, 1.0, 1.0, -1.0) == 0.5
    assert jf.burgers_godunov_flux(1.0, 1.0, -1.0, 1.0) == 0.0
    assert jf.burgers_godunov_flux(2.0, 1.0, 1.0, 2.0) == 1.0


def test_solve_conserves_mass():
    a = jf.sample_coefficient("two_level")
    mesh = jf.build_mesh("wave_cell", 64, a.discontinuities)
    assert mesh.cells >= 64
    assert set(mesh.flagged)
    u0 = jf.sine_initial_state(mesh, 0.3)
    cfg = jf.SolverConfig()
    cfg.t_end = 0.25
    sol = jf.solve(a, mesh, u0, cfg)
    assert sol.times[-1] == 0.25
    m0 = sol.mass[0]
    assert max(abs(m - m0) for m in sol.mass) <= 1e-12
    assert len(sol.final_state) == mesh.cells


def test_run_convergence_from_config():
    rep = jf.run_convergence(CONFIG_DIR / "smoke_constant.json", ["mesh.levels=[32,64]"])
    assert not rep["failures"]
    assert [r["level"] for r in rep["errors"]] == [32, 64]
    assert all(r["L1"] >= 0.0 for r in rep["errors"])


def test_bad_config_raises():
    with pytest.raises(Exception, match="absent.json"):
        jf.run_convergence(CONFIG_DIR / "absent.json")
