"""Direction frames, the frequency-domain solve, truncation-radius selection,
and the inverse transforms."""

import numpy as np
import pytest

from lightray.grids import SpaceTimeGrid
from lightray.potentials import make_test_potential
from lightray.spectral import (
    ExactSliceProvider,
    cone_complement_mask,
    direction_frame,
    exact_spectral_potential,
    frame_batch_2d,
    invert_to_physical,
    reconstruct_ball_quadrature,
    reconstruct_masked_lattice,
    rho_select,
    solve_spectral,
)


def unit_sphere_cone_points(n_pts, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(4 * n_pts, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    keep = np.abs(pts[:, 0]) <= 0.5 * np.hypot(pts[:, 1], pts[:, 2])
    return pts[keep][:n_pts]


def test_frame_orthogonal_axis_case():
    f = direction_frame(0.0, np.array([1.0, 0.0]))
    assert np.allclose(sorted(f.omegas[:, 1]), [-1.0, 1.0])
    assert np.allclose(f.omegas[:, 0], 0.0)
    assert abs(f.detM) > 0
    assert f.r == pytest.approx(1.0)


def test_frame_homogeneity():
    f1 = direction_frame(0.3, np.array([1.0, -0.7]))
    f2 = direction_frame(0.3 * 7.5, np.array([7.5, -0.7 * 7.5]))
    assert np.allclose(f1.omegas, f2.omegas, atol=1e-14)


def test_frame_invariants_bulk():
    pts = unit_sphere_cone_points(10000)
    om1, om2, M, detM, V = frame_batch_2d(pts[:, 0], pts[:, 1], pts[:, 2])
    # unit directions, orthogonality to (tau, xi), radius range
    assert np.max(np.abs(np.linalg.norm(om1, axis=1) - 1)) < 1e-12
    assert np.max(np.abs(pts[:, 0] + np.sum(om1 * pts[:, 1:], axis=1))) < 1e-12
    assert np.max(np.abs(pts[:, 0] + np.sum(om2 * pts[:, 1:], axis=1))) < 1e-12
    nxi = np.hypot(pts[:, 1], pts[:, 2])
    r = np.sqrt(1 - (pts[:, 0] / nxi) ** 2)
    assert np.all(r >= np.sqrt(3) / 2 - 1e-12) and np.all(r <= 1 + 1e-12)
    # determinant bound (the frame rows are orthogonal to the frequency
    # vector, so |det M| actually equals the row volume)
    assert np.all(np.abs(detM) >= V * np.sin(np.pi / 8))
    assert np.max(np.abs(np.abs(detM) - V)) < 1e-12


def test_frame_three_dimensional():
    f = direction_frame(0.25, np.array([0.8, -0.3, 0.5]))
    assert f.omegas.shape == (3, 3)
    for om in f.omegas:
        assert abs(np.linalg.norm(om) - 1) < 1e-12
        assert abs(0.25 + np.dot(om, [0.8, -0.3, 0.5])) < 1e-12
    assert abs(f.detM) >= f.row_volume * np.sin(np.pi / 8) - 1e-12


def test_frame_rejects_cone_interior():
    with pytest.raises(ValueError):
        direction_frame(1.0, np.array([1.0, 0.0]))


def test_solve_spectral_zero_rhs():
    pts = unit_sphere_cone_points(50)
    _, _, M, _, _ = frame_batch_2d(pts[:, 0], pts[:, 1], pts[:, 2])
    sol = solve_spectral(np.zeros((len(pts), 2), dtype=complex), M)
    assert np.max(np.abs(sol)) == 0.0


def test_pure_gauge_violates_divergence_row():
    """Transforms of the form (tau Phi, xi Phi) solve the direction rows but
    not the divergence row, so the solved field is Phi-free: only Phi = 0 is
    consistent with the full system."""
    tau, xi = 0.3, np.array([1.0, -0.4])
    f = direction_frame(tau, xi)
    phi = 0.7 - 0.2j
    pure_gauge = np.array([tau * phi, xi[0] * phi, xi[1] * phi])
    resid = f.M @ pure_gauge
    assert np.max(np.abs(resid[:2])) < 1e-14  # direction rows annihilate it
    assert abs(resid[2]) > 0.1 * abs(phi)  # divergence row does not
    sol = solve_spectral(np.zeros((1, 2), dtype=complex), f.M[None])
    assert np.max(np.abs(sol)) == 0.0


def sweep_grid(nt=160):
    hx = 2.0 / 63
    ht = hx / np.sqrt(2) * 0.99
    T = ht * (nt - 1) / 2
    return SpaceTimeGrid(t_range=(-T, T), box=((-1, 1), (-1, 1)), shape=(nt, 64, 64))


def test_solve_spectral_recovers_exact_transforms():
    """Exact slice data through the frame system reproduces the component
    transforms on cone-complement nodes."""
    grid = sweep_grid()
    A, _ = make_test_potential(grid, seed=2, mode="cone_concentrated")
    S = exact_spectral_potential(A)
    mask = S.cone_mask
    tt, x1, x2 = np.meshgrid(*S.freq_axes, indexing="ij")
    sel = mask & (tt**2 + x1**2 + x2**2 < 40.0**2)
    idx = np.flatnonzero(sel.ravel())[::37][:400]
    tau = tt.ravel()[idx]
    xi = np.stack([x1.ravel()[idx], x2.ravel()[idx]], axis=-1)
    om1, om2, M, _, _ = frame_batch_2d(tau, xi[:, 0], xi[:, 1])
    prov = ExactSliceProvider(A)
    g = np.stack([prov.value_at(tau, xi, om1), prov.value_at(tau, xi, om2)], axis=-1)
    sol = solve_spectral(g, M)
    truth = np.stack([c.ravel()[idx] for c in S.values], axis=-1)
    scale = np.abs(truth).max()
    assert np.max(np.abs(sol - truth)) < 1e-6 * scale


def test_hermitian_symmetry_of_exact_transforms():
    grid = sweep_grid(96)
    A, _ = make_test_potential(grid, seed=4)
    S = exact_spectral_potential(A)
    assert S.hermitian_defect() < 1e-10 * np.abs(S.values).max()


def test_rho_select_monotone_and_identity():
    rhos = [rho_select(eps, 2, 4.0) for eps in (1e-4, 1e-5, 1e-6)]
    assert rhos[0] < rhos[1] < rhos[2]
    rho = rho_select(1e-6, 2, 4.0, 1.0)
    assert abs(2 * np.log(1e6) - 11 * np.log(rho) - 8 * rho) < 1e-8
    # claimed upper bound on 1/rho
    assert 1 / rho <= (3 * 2 + 5 + 2 * 4.0) / 2 / np.log(1e6)


def test_rho_select_against_independent_bisection():
    """Fresh bisection at 10x tighter tolerance as the oracle."""
    n, a, C, eps = 2, 4.0, 1.0, 1e-6
    target = 2 * np.log(C / eps)
    lo, hi = 1.0, 64.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (3 * n + 5) * np.log(mid) + 2 * a * mid < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-11:
            break
    oracle = 0.5 * (lo + hi)
    assert abs(rho_select(eps, n, a, C) - oracle) < 1e-9


def test_rho_select_regime_errors():
    with pytest.raises(ValueError):
        rho_select(1.5, 2, 4.0)  # eps >= 1
    with pytest.raises(ValueError):
        rho_select(0.5, 2, 8.0)  # root below 1 for this accuracy
    with pytest.raises(ValueError):
        rho_select(1e-4, 2, -1.0)


def test_invert_to_physical_zero_and_nyquist_guard():
    grid = sweep_grid(96)
    A, _ = make_test_potential(grid, seed=5)
    S = exact_spectral_potential(A)
    S.values[:] = 0.0
    out = invert_to_physical(S, 10.0, grid)
    assert np.max(np.abs(out.values)) == 0.0
    with pytest.raises(ValueError):
        invert_to_physical(S, 10 * grid.nyquist(), grid)


def test_oracle_reconstruction_large_rho():
    """Exact cone-complement data at 0.8 Nyquist: sup error well below 5%."""
    grid = sweep_grid(224)
    A, _ = make_test_potential(grid, seed=3, mode="cone_concentrated",
                               cone_eps=0.05, temporal_width=1.6, spatial_width=0.28)
    rec = reconstruct_masked_lattice(ExactSliceProvider(A), grid,
                                     0.8 * grid.nyquist(), pad=1)
    err = np.max(np.abs(rec.values - A.values)) / A.max_norm()
    assert err < 0.05


def test_reconstruction_tail_decays_superlinearly():
    """Doubling rho shrinks the truncation error by more than 2x for smooth
    truth (spectral tails beat any fixed power)."""
    grid = sweep_grid(224)
    A, _ = make_test_potential(grid, seed=3, mode="cone_concentrated",
                               cone_eps=0.05, temporal_width=1.6, spatial_width=0.28)
    prov = ExactSliceProvider(A)
    xs = np.linspace(-0.8, 0.8, 9)
    ts = np.linspace(-1.2, 1.2, 9)
    T, X, Y = np.meshgrid(ts, xs, xs, indexing="ij")
    pts = np.stack([T, X, Y], axis=-1).reshape(-1, 3)
    truth = np.stack([A.recipes[j](pts) for j in range(3)])
    sup = np.abs(truth).max()
    errs = {}
    for rho in (12.0, 24.0):
        rec = reconstruct_ball_quadrature(prov, rho, pts, n_r=36, n_th=20, n_psi=40)
        errs[rho] = np.abs(rec - truth).max() / sup
    assert errs[24.0] < errs[12.0] / 2.0


def test_pipeline_linearity():
    grid = sweep_grid(96)
    A, _ = make_test_potential(grid, seed=6, mode="cone_concentrated")
    pts = np.array([[0.0, 0.1, -0.2], [0.2, -0.3, 0.4], [-0.1, 0.0, 0.1]])
    r1 = reconstruct_ball_quadrature(ExactSliceProvider(A), 8.0, pts)
    r2 = reconstruct_ball_quadrature(ExactSliceProvider(A.scaled(0.5)), 8.0, pts)
    assert np.max(np.abs(r2 - 0.5 * r1)) < 1e-8 * np.abs(r1).max()


def test_cone_mask_definition():
    axes = (np.array([-1.0, 0.0, 1.0]), np.array([0.0, 2.0]), np.array([0.0, 2.0]))
    mask = cone_complement_mask(axes)
    # tau = 0, xi = (2, 2): inside; tau = +-1, |xi| = 2 >= 2|tau|: inside
    assert mask[1, 1, 1] and mask[0, 1, 1] and mask[2, 1, 1]
    # xi = 0 excluded everywhere
    assert not mask[:, 0, 0].any()