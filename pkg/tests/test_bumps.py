"""Recipe algebra checked against independent finite-difference and
refined-quadrature oracles."""

import numpy as np
import pytest

from lightray.bumps import BumpFactor, FieldRecipe, profile_value


def fd_derivative(fn, s, h=1e-5):
    return (fn(s + h) - fn(s - h)) / (2 * h)


def test_profile_supported_on_unit_interval():
    u = np.array([-2.0, -1.0, -0.999999, 0.0, 0.5, 1.0, 3.0])
    v = profile_value(u)
    assert v[0] == 0.0 and v[1] == 0.0 and v[-2] == 0.0 and v[-1] == 0.0
    assert v[3] == pytest.approx(1.0)
    assert np.all(v >= 0.0)


@pytest.mark.parametrize("lam", [0.0, 4.0])
@pytest.mark.parametrize("order", [0, 1])
def test_factor_derivative_matches_finite_differences(lam, order):
    f = BumpFactor(center=0.3, width=0.7, lam=lam, order=order)
    df = f.derivative()
    s = np.linspace(-0.6, 1.1, 57)
    fd = fd_derivative(f, s)
    assert np.max(np.abs(df(s) - fd)) < 2e-6 * max(1.0, np.max(np.abs(df(s))))


def test_factor_fourier_against_dense_trapezoid():
    f = BumpFactor(center=-0.2, width=0.5, lam=2.0, order=1)
    s = np.linspace(-0.7, 0.3, 20001)
    kappas = np.array([0.0, 0.75, 3.0, -11.0])
    direct = np.array([np.trapezoid(f(s) * np.exp(-1j * k * s), s) for k in kappas])
    assert np.max(np.abs(f.fourier(kappas) - direct)) < 1e-9


def test_factor_fourier_complex_frequency():
    f = BumpFactor(center=0.1, width=0.4, lam=0.0, order=0)
    s = np.linspace(-0.3, 0.5, 20001)
    k = 2.0 - 1.5j
    direct = np.trapezoid(f(s) * np.exp(-1j * k * s), s)
    assert abs(f.fourier(np.array([k]))[0] - direct) < 1e-9


def test_recipe_partial_matches_finite_differences():
    r = FieldRecipe.bump(1.3, (0.0, 0.1, -0.2), (0.5, 0.4, 0.6), lam=3.0)
    rx = r.partial(1)
    pts = np.random.default_rng(0).uniform(-0.5, 0.5, size=(40, 3))
    h = 1e-5
    plus = pts.copy()
    minus = pts.copy()
    plus[:, 1] += h
    minus[:, 1] -= h
    fd = (r(plus) - r(minus)) / (2 * h)
    assert np.max(np.abs(rx(pts) - fd)) < 5e-6


def test_on_axes_matches_pointwise():
    r = FieldRecipe.bump(0.7, (0.0, 0.0, 0.0), (0.8, 0.5, 0.5)) + FieldRecipe.bump(
        -0.4, (0.2, -0.1, 0.1), (0.5, 0.3, 0.3), lam=1.0
    )
    axes = [np.linspace(-1, 1, 11), np.linspace(-1, 1, 9), np.linspace(-1, 1, 7)]
    grid_vals = r.on_axes(axes)
    T, X, Y = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([T, X, Y], axis=-1)
    assert np.allclose(grid_vals, r(pts), atol=1e-14)


def test_simplify_cancels_identical_terms():
    a = FieldRecipe.bump(1.0, (0, 0, 0), (0.5, 0.5, 0.5))
    b = FieldRecipe.bump(-1.0, (0, 0, 0), (0.5, 0.5, 0.5))
    assert (a + b).simplify().terms == ()


def test_line_integral_against_doubled_quadrature():
    rng = np.random.default_rng(4)
    r = FieldRecipe.bump(1.0, (0.05, -0.1, 0.2), (0.45, 0.35, 0.3), lam=2.0)
    base = rng.uniform(-0.4, 0.4, size=(25, 3))
    direction = np.array([1.0, 0.6, 0.8])
    direction[1:] /= np.hypot(0.6, 0.8)
    coarse = r.line_integral(base, direction)
    fine = r.line_integral(base, direction, quad_nodes=128, panels=4)
    assert np.max(np.abs(coarse - fine)) < 1e-10


def test_line_integral_upper_limit_and_additivity():
    r1 = FieldRecipe.bump(0.8, (0.0, 0.0, 0.0), (0.4, 0.4, 0.4))
    r2 = FieldRecipe.bump(-0.5, (0.1, 0.1, -0.1), (0.3, 0.5, 0.4), lam=1.5)
    base = np.array([[0.0, -0.05, 0.1], [0.05, 0.0, 0.0]])
    e = np.array([1.0, 1.0, 0.0])
    e[1:] /= np.linalg.norm(e[1:])
    upper = np.array([0.1, -0.05])
    lhs = (r1 + r2).line_integral(base, e, upper=upper)
    rhs = r1.line_integral(base, e, upper=upper) + r2.line_integral(base, e, upper=upper)
    # per-term integration makes additivity exact in floating point
    assert np.array_equal(lhs, rhs)
    full = (r1 + r2).line_integral(base, e)
    assert np.all(np.abs(full - lhs) > 0)  # upper limit actually truncates


def test_fourier_on_axes_matches_fft_of_samples():
    # wide mollified bump on a fine lattice: aliasing must be far below 1e-8
    r = FieldRecipe.bump(1.0, (0.0, 0.0), (0.8, 0.8), lam=8.0)
    n = 192
    axes = [np.linspace(-1.2, 1.2, n, endpoint=False)] * 2
    h = axes[0][1] - axes[0][0]
    vals = r.on_axes(axes)
    fft = np.fft.fftn(vals) * h * h
    freqs = [2 * np.pi * np.fft.fftfreq(n, d=h)] * 2
    # lattice starts at -1.2, not 0: apply the first-node phase
    ph0 = np.exp(-1j * freqs[0] * axes[0][0])
    fft = fft * np.multiply.outer(ph0, ph0)
    exact = r.fourier_on_axes(freqs)
    assert np.max(np.abs(fft - exact)) < 1e-8 * np.max(np.abs(exact))


def test_recipe_roundtrip_serialization():
    r = FieldRecipe.bump(1.0, (0.0, 0.1, 0.2), (0.5, 0.4, 0.3), lam=2.0) + FieldRecipe.bump(
        -2.0, (0.3, 0.0, 0.0), (0.6, 0.5, 0.4), orders=(1, 0, 2)
    )
    r2 = FieldRecipe.from_dict(r.to_dict())
    pts = np.random.default_rng(1).uniform(-0.5, 0.5, size=(30, 3))
    assert np.array_equal(r(pts), r2(pts))
