"""Frequency-domain recovery of the vector potential off the light cone.

At a frequency point (tau, xi) with |tau| <= |xi|/2 there are unit spatial
directions omega with tau + omega.xi = 0; they form a sphere of radius
r = sqrt(1 - tau^2/|xi|^2) in [sqrt(3)/2, 1] around -(tau/|xi|) xi_hat.
Stacking n such directions as rows (1, omega^(k)) together with the
normalized divergence row (tau, xi)/|(tau, xi)| gives an (n+1) x (n+1)
matrix M whose determinant is bounded away from zero (|det M| >= V sin(pi/8)
with V the row-volume; the rows are in fact exactly orthogonal to the last
one, so the bound holds with a wide margin).  Solving

    M(tau, xi) (A_0^, ..., A_n^) = (G(xi; omega^(1)), ..., G(xi; omega^(n)), 0)

recovers the component transforms from slice data.  Truncating the inverse
Fourier integral to a ball of radius rho, with the interior of the cone
zero-filled, produces the physical-space reconstruction; rho is chosen from a
data-accuracy proxy eps by balancing the algebraic and exponential error
terms: 2 log(C/eps) = (3n+5) log(rho) + 2 a rho.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import VectorPotential

__all__ = [
    "DirectionFrame",
    "direction_frame",
    "frame_batch_2d",
    "SpectralPotential",
    "exact_spectral_potential",
    "solve_spectral",
    "rho_select",
    "invert_to_physical",
    "ExactSliceProvider",
    "reconstruct_masked_lattice",
    "reconstruct_ball_quadrature",
    "cone_complement_mask",
]


# ---------------------------------------------------------------------------
# direction frames
# ---------------------------------------------------------------------------

@dataclass
class DirectionFrame:
    tau: float
    xi: np.ndarray
    omegas: np.ndarray  # (n, n)
    r: float
    M: np.ndarray  # (n+1, n+1)
    detM: float
    row_volume: float  # n-volume spanned by the rows (1, omega^(k))


def _perp_basis(xi_hat):
    """Deterministic orthonormal basis of the complement of xi_hat: start
    from the lowest-index coordinate axes and project."""
    n = len(xi_hat)
    basis = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        v = e - np.dot(e, xi_hat) * xi_hat
        for b in basis:
            v -= np.dot(v, b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-10:
            basis.append(v / nv)
        if len(basis) == n - 1:
            break
    return basis


def direction_frame(tau, xi):
    """Frame at one frequency point; requires |tau| <= |xi|/2 and xi != 0."""
    xi = np.asarray(xi, dtype=float)
    n = len(xi)
    nxi = np.linalg.norm(xi)
    if nxi == 0.0 or abs(tau) > 0.5 * nxi * (1 + 1e-12):
        raise ValueError("frequency point outside the cone complement |tau| <= |xi|/2")
    xi_hat = xi / nxi
    c = -tau / nxi
    r = np.sqrt(max(1.0 - c * c, 0.0))
    perp = _perp_basis(xi_hat)
    if n == 2:
        u = perp[0]
        omegas = np.stack([c * xi_hat + r * u, c * xi_hat - r * u])
    else:
        e1, e2 = perp[0], perp[1]
        angles = 2 * np.pi * np.arange(n) / n
        omegas = np.stack([
            c * xi_hat + r * (np.cos(a) * e1 + np.sin(a) * e2) for a in angles
        ])
    rows = np.concatenate([np.ones((n, 1)), omegas], axis=1)
    last = np.concatenate(([tau], xi)) / np.sqrt(tau * tau + nxi * nxi)
    M = np.concatenate([rows, last[None, :]], axis=0)
    gram = rows @ rows.T
    row_volume = float(np.sqrt(max(np.linalg.det(gram), 0.0)))
    return DirectionFrame(tau=float(tau), xi=xi, omegas=omegas, r=float(r),
                          M=M, detM=float(np.linalg.det(M)), row_volume=row_volume)


def frame_batch_2d(tau, xi1, xi2):
    """Vectorized n = 2 frames: returns (omega1, omega2, M, detM, row_volume)
    with omega arrays shaped (..., 2) and M shaped (..., 3, 3)."""
    tau = np.asarray(tau, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    nxi = np.hypot(xi1, xi2)
    if np.any(nxi == 0) or np.any(np.abs(tau) > 0.5 * nxi * (1 + 1e-12)):
        raise ValueError("frequency points must satisfy 0 < 2|tau| <= |xi|")
    xh1, xh2 = xi1 / nxi, xi2 / nxi
    c = -tau / nxi
    r = np.sqrt(np.maximum(1.0 - c * c, 0.0))
    # u perp to xi_hat: deterministic right-handed choice
    u1, u2 = -xh2, xh1
    om1 = np.stack([c * xh1 + r * u1, c * xh2 + r * u2], axis=-1)
    om2 = np.stack([c * xh1 - r * u1, c * xh2 - r * u2], axis=-1)
    nrm = np.sqrt(tau**2 + nxi**2)
    M = np.empty(tau.shape + (3, 3))
    M[..., 0, 0] = 1.0
    M[..., 0, 1:] = om1
    M[..., 1, 0] = 1.0
    M[..., 1, 1:] = om2
    M[..., 2, 0] = tau / nrm
    M[..., 2, 1] = xi1 / nrm
    M[..., 2, 2] = xi2 / nrm
    detM = np.linalg.det(M)
    # gram of the rows (1, om1), (1, om2): [[2, 1+om1.om2], [1+om1.om2, 2]]
    d12 = 1.0 + np.sum(om1 * om2, axis=-1)
    row_volume = np.sqrt(np.maximum(4.0 - d12**2, 0.0))
    return om1, om2, M, detM, row_volume


# ---------------------------------------------------------------------------
# spectral potential on a lattice
# ---------------------------------------------------------------------------

def cone_complement_mask(freq_axes):
    """Boolean lattice mask of {0 < |xi|, |tau| <= |xi|/2}."""
    tau = freq_axes[0].reshape(-1, *([1] * (len(freq_axes) - 1)))
    xi2 = np.zeros(tuple(len(a) for a in freq_axes[1:]))
    for d, ax in enumerate(freq_axes[1:]):
        shape = [1] * (len(freq_axes) - 1)
        shape[d] = len(ax)
        xi2 = xi2 + ax.reshape(shape) ** 2
    nxi = np.sqrt(xi2)[None]
    return (np.abs(tau) <= 0.5 * nxi) & (nxi > 0)


@dataclass
class SpectralPotential:
    freq_axes: tuple  # (tau_nodes, xi1_nodes, xi2_nodes)
    values: np.ndarray  # (n+1, Nt, N1, N2) complex transforms
    cone_mask: np.ndarray  # boolean, True where data is trusted

    def hermitian_defect(self):
        """Max |F(-k) - conj(F(k))| over components; zero for real fields.
        Unpaired Nyquist planes of even-length axes are excluded (their
        mirror frequency is not on the fftfreq lattice)."""
        paired = np.ones(self.values.shape[1:], dtype=bool)
        for ax, n in enumerate(self.values.shape[1:]):
            if n % 2 == 0:
                sl = [slice(None)] * len(self.values.shape[1:])
                sl[ax] = n // 2
                paired[tuple(sl)] = False
        worst = 0.0
        for comp in self.values:
            flipped = comp.copy()
            for ax in range(comp.ndim):
                flipped = np.flip(flipped, axis=ax)
                flipped = np.roll(flipped, 1, axis=ax)
            worst = max(worst, float(np.max(np.abs((np.conj(flipped) - comp)[paired]))))
        return worst


def exact_spectral_potential(A, pad=1):
    """Continuum transforms of a recipe-backed potential on the lattice of its
    grid (optionally padded: finer frequency spacing)."""
    if A.recipes is None:
        raise ValueError("exact transforms need a recipe-backed potential")
    freq_axes = tuple(A.grid.frequency_axes(pad=pad))
    values = np.stack([r.fourier_on_axes(freq_axes) for r in A.recipes])
    return SpectralPotential(freq_axes=freq_axes, values=values,
                             cone_mask=cone_complement_mask(freq_axes))


# ---------------------------------------------------------------------------
# the linear solve
# ---------------------------------------------------------------------------

def solve_spectral(G_rows, M, det_floor=1e-6):
    """Solve M Ahat = (G_1..G_n, 0) for batched frames.

    `G_rows`: (..., n) complex slice values matching the first n rows of M;
    the divergence row is appended as zero.  Raises on |det M| below the
    floor (unreachable for valid frames) and verifies the solve residual.
    """
    M = np.asarray(M)
    G_rows = np.asarray(G_rows)
    dets = np.linalg.det(M)
    if np.any(np.abs(dets) < det_floor):
        raise ValueError("degenerate direction frame encountered")
    rhs = np.concatenate([G_rows, np.zeros(G_rows.shape[:-1] + (1,))], axis=-1)
    sol = np.linalg.solve(M, rhs[..., None])[..., 0]
    resid = np.abs(np.einsum("...ij,...j->...i", M, sol) - rhs).max()
    scale = max(float(np.abs(rhs).max()), 1e-300)
    if resid > 1e-10 * scale:
        raise RuntimeError(f"spectral solve residual {resid:.2e} exceeds tolerance")
    return sol


# ---------------------------------------------------------------------------
# truncation radius
# ---------------------------------------------------------------------------

def rho_select(eps, n, a, C=1.0, tol=1e-10):
    """Unique root rho > 1 of 2 log(C/eps) = (3n+5) log(rho) + 2 a rho.

    The balance equates the spectral-tail term with the exponentially
    amplified two-constants term; its root grows like log(C/eps)/a, which is
    what produces the logarithmic overall error law.  `eps` must sit in the
    smallness regime and satisfy log(C/eps) > a so the root exceeds 1.
    """
    if a <= 0:
        raise ValueError("the cone-estimate rate a must be positive")
    lim = min(2 * a * np.e, np.exp(min(2 * a, 700.0)), 1.0)
    if not 0 < eps < lim:
        raise ValueError(
            f"eps = {eps:.3e} outside the smallness regime (need 0 < eps < {lim:.3e})"
        )
    target = 2.0 * np.log(C / eps)

    def F(rho):
        return (3 * n + 5) * np.log(rho) + 2 * a * rho - target

    if F(1.0) >= 0.0:
        raise ValueError(
            "requested accuracy too loose for this geometry: need log(C/eps) > a "
            "for a truncation radius above 1"
        )
    hi = 1.0
    while F(hi) < 0.0:
        hi *= 2.0
    lo = hi / 2.0 if hi > 1.0 else 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if F(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# inverse transforms
# ---------------------------------------------------------------------------

def _radial_taper(rr, rho, taper):
    w = np.ones_like(rr)
    if taper > 0:
        r0 = rho * (1.0 - taper)
        band = (rr > r0) & (rr <= rho)
        w[band] = 0.5 * (1.0 + np.cos(np.pi * (rr[band] - r0) / (rho - r0)))
    w[rr > rho] = 0.0
    return w


def invert_to_physical(S, rho, grid, taper=0.0):
    """Inverse lattice transform of the spectral data restricted to
    {|(tau,xi)| <= rho} intersected with the cone complement, zero elsewhere;
    Hermitian-symmetrized so the output fields are real.

    The cone interior carries no recovered data (it is zero-filled by design;
    the stability experiments measure exactly the cost of that choice), and
    rho past the lattice Nyquist is rejected.
    """
    if rho > grid.nyquist() * (1 + 1e-12):
        raise ValueError(f"rho = {rho:.3f} exceeds the lattice Nyquist {grid.nyquist():.3f}")
    freq_axes = S.freq_axes
    pad_shape = tuple(len(a) for a in freq_axes)
    rr = np.sqrt(
        freq_axes[0].reshape(-1, 1, 1) ** 2
        + freq_axes[1].reshape(1, -1, 1) ** 2
        + freq_axes[2].reshape(1, 1, -1) ** 2
    )
    weight = _radial_taper(rr, rho, taper) * S.cone_mask
    hs = grid.spacings
    z0 = [grid.t_range[0]] + [b[0] for b in grid.box]
    phases = [np.exp(1j * ax * z) for ax, z in zip(freq_axes, z0)]
    crop = tuple(slice(0, s) for s in grid.shape)
    comps = []
    cell = 1.0
    for pn, h in zip(pad_shape, hs):
        cell *= pn * h
    for comp in S.values:
        masked = comp * weight
        # enforce Hermitian symmetry (real fields)
        flipped = masked.copy()
        for ax in range(3):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        masked = 0.5 * (masked + np.conj(flipped))
        spec = masked * phases[0][:, None, None] * phases[1][None, :, None] * phases[2][None, None, :]
        vals = np.fft.ifftn(spec) / (hs[0] * hs[1] * hs[2])
        comps.append(vals.real[crop])
    return VectorPotential(grid, values=np.stack(comps), divergence_free=False)


# ---------------------------------------------------------------------------
# slice providers and reconstruction drivers
# ---------------------------------------------------------------------------

class ExactSliceProvider:
    """Slice values from a recipe-backed ground truth: G(xi; omega) is the
    combination transform at (tau = -omega.xi, xi), evaluated exactly."""

    def __init__(self, A, noise=0.0, seed=0):
        if A.recipes is None:
            raise ValueError("exact slices need a recipe-backed potential")
        self.A = A
        self.noise = float(noise)
        self.rng = np.random.default_rng(seed)

    def value_at(self, tau, xi, omegas):
        """G for scattered nodes: tau (...,), xi (..., 2), omegas (..., 2)."""
        freqs = np.concatenate([np.asarray(tau)[..., None], np.asarray(xi)], axis=-1)
        vals = self.A.recipes[0].fourier_at(freqs)
        vals = vals + omegas[..., 0] * self.A.recipes[1].fourier_at(freqs)
        vals = vals + omegas[..., 1] * self.A.recipes[2].fourier_at(freqs)
        if self.noise > 0:
            r = np.sqrt(self.rng.uniform(0.0, 1.0, vals.shape)) * self.noise
            th = self.rng.uniform(0.0, 2 * np.pi, vals.shape)
            vals = vals + r * np.exp(1j * th)
        return vals

    combination_at = value_at


def reconstruct_masked_lattice(provider, grid, rho, pad=1, taper=0.0):
    """Lattice pipeline: frames and slice data on every cone-complement node
    within the ball of radius rho, followed by the inverse lattice transform."""
    freq_axes = tuple(grid.frequency_axes(pad=pad))
    mask = cone_complement_mask(freq_axes)
    rr = np.sqrt(
        freq_axes[0].reshape(-1, 1, 1) ** 2
        + freq_axes[1].reshape(1, -1, 1) ** 2
        + freq_axes[2].reshape(1, 1, -1) ** 2
    )
    mask = mask & (rr <= rho)
    tt, x1, x2 = np.meshgrid(*freq_axes, indexing="ij")
    tau = tt[mask]
    xi = np.stack([x1[mask], x2[mask]], axis=-1)
    om1, om2, M, detM, _ = frame_batch_2d(tau, xi[:, 0], xi[:, 1])
    g1 = provider.value_at(tau, xi, om1)
    g2 = provider.value_at(tau, xi, om2)
    sol = solve_spectral(np.stack([g1, g2], axis=-1), M)
    shape = tuple(len(a) for a in freq_axes)
    values = np.zeros((3,) + shape, dtype=complex)
    for j in range(3):
        comp = np.zeros(shape, dtype=complex)
        comp[mask] = sol[:, j]
        values[j] = comp
    S = SpectralPotential(freq_axes=freq_axes, values=values, cone_mask=mask)
    return invert_to_physical(S, rho, grid, taper=taper)


def _ball_cone_nodes(rho, n_r=28, n_th=24, n_psi=48):
    """Gauss-Legendre x trapezoid quadrature nodes and weights over the set
    {|k| <= rho, |tau| <= |xi|/2} in spherical coordinates (n = 2)."""
    from numpy.polynomial.legendre import leggauss

    theta0 = np.arctan(2.0)  # |tau| = |xi|/2 boundary: tan(theta) = 2
    xr, wr = leggauss(n_r)
    r = 0.5 * rho * (xr + 1.0)
    wr = 0.5 * rho * wr
    xt, wt = leggauss(n_th)
    th = theta0 + (np.pi - 2 * theta0) * 0.5 * (xt + 1.0)
    wt = (np.pi - 2 * theta0) * 0.5 * wt
    psi = np.linspace(0.0, 2 * np.pi, n_psi, endpoint=False)
    wp = 2 * np.pi / n_psi
    R, TH, PS = np.meshgrid(r, th, psi, indexing="ij")
    WR, WT, _ = np.meshgrid(wr, wt, psi, indexing="ij")
    w = WR * WT * wp * R**2 * np.sin(TH)
    tau = R * np.cos(TH)
    nxi = R * np.sin(TH)
    xi = np.stack([nxi * np.cos(PS), nxi * np.sin(PS)], axis=-1)
    return tau.ravel(), xi.reshape(-1, 2), w.ravel()


def reconstruct_ball_quadrature(provider, rho, points, n_r=28, n_th=24, n_psi=48):
    """Continuous-frequency reconstruction: solve the frame system on a
    quadrature grid over the truncated cone complement and evaluate the
    inverse Fourier integral at the given space-time points.

    Bypasses lattice granularity entirely, which matters when rho is small
    compared to the lattice frequency spacing (the stability sweeps live in
    that regime).  Returns an array (3, len(points)).
    """
    tau, xi, w = _ball_cone_nodes(rho, n_r, n_th, n_psi)
    om1, om2, M, detM, _ = frame_batch_2d(tau, xi[:, 0], xi[:, 1])
    g1 = provider.value_at(tau, xi, om1)
    g2 = provider.value_at(tau, xi, om2)
    sol = solve_spectral(np.stack([g1, g2], axis=-1), M)  # (K, 3)
    pts = np.asarray(points, dtype=float)
    phase = np.exp(
        1j * (
            np.outer(pts[:, 0], tau)
            + np.outer(pts[:, 1], xi[:, 0])
            + np.outer(pts[:, 2], xi[:, 1])
        )
    )
    out = (phase * w) @ sol  # (P, 3)
    return (out.real / (2 * np.pi) ** 3).T
