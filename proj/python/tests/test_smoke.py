import math

import numpy as np
import pytest

import memkernel as mk


def test_expr():
    e = mk.Expr("x^3*(1-x)^3")
    assert e(0.5) == 0.015625
    assert abs(e.derivative()(0.0)) < 1e-15
    with pytest.raises(ValueError):
        mk.Expr("x^(1/2)")


def test_grid_and_direct():
    pd = mk.Problem(nx=40, nt=80)
    assert pd.grid.x.shape == (42,)
    sol = mk.solve_direct(pd, "0.5*exp(-t)")
    assert sol["u"].shape == (81, 42)
    assert np.all(np.isfinite(sol["f"]))


def test_twin_roundtrip():
    pd = mk.Problem(nx=100, nt=200)
    f = mk.synthesize_f(pd, "0.4*cos(2*t)")
    checks = mk.check_compatibility(pd, f, 0.4)
    assert all(ok for _, _, ok in checks.values())
    rec = mk.reconstruct(pd, f)
    t = pd.grid.t
    exact = 0.4 * np.cos(2 * t)
    err = math.sqrt(np.trapezoid((rec["k"] - exact) ** 2, t) / np.trapezoid(exact**2, t))
    assert err < 1e-2


def test_noise_is_seeded():
    f = np.linspace(0.0, 1.0, 11)
    assert np.array_equal(mk.add_noise(f, 0.0), f)
    assert np.array_equal(mk.add_noise(f, 1e-3, 5), mk.add_noise(f, 1e-3, 5))


def test_run_command(tmp_path):
    code, out, _ = mk.run("invert", "[grid]\nnx = 30\nnt = 60\n[data]\nk_true = 0.5*exp(-t)\n", str(tmp_path), twin=True)
    assert code == 0
    assert "rel_L2_error=" in out
    assert (tmp_path / "k.csv").exists()
    code, _, err = mk.run("direct", "[grid]\nnx = many\n")
    assert code == 2
