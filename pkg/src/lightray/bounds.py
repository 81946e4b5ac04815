"""Numerical verification of the analytic ingredients behind the stability
chain: the harmonic measure of the cut strip, the two-constants interpolation
inequality for the analytically-continued transforms, and the sinc lower
bound that converts modulus estimates on exp(i beta) - 1 into estimates on
beta.

Geometry of the harmonic-measure problem: the strip {|Im z| < 2|tau0| pi}
with cuts along the real rays {|Re z| >= 2|tau0|}.  After scaling by
1/(2|tau0|) the domain is universal (strip half-width pi, cuts from +-1).
The map

    zeta = e * i * sqrt((e^w - 1/e) / (e - e^w))

takes the normalized cut strip conformally onto the upper half plane; the
cuts land exactly on E' = {|t| <= 1} union {|t| >= e} of the real axis and
the strip edges on {1 < |t| < e}, so the harmonic measure is the half-plane
Poisson integral of the indicator of E' evaluated at the image point.  A
literal evaluation of that Poisson integral at the *unmapped* point is also
provided (the formula as printed reads that way), and a reflected random
walk in the physical cut-strip geometry arbitrates between the two readings;
the mapped evaluation is the one the walk confirms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bumps import FieldRecipe

__all__ = [
    "StripGeometry",
    "harmonic_measure",
    "two_constants_check",
    "sinc_lower_bound",
]


@dataclass(frozen=True)
class StripGeometry:
    """Strip {|Im z| < 2|tau0| pi} with cuts {|Re z| >= 2|tau0|, Im z = 0}."""

    tau0: float

    def __post_init__(self):
        if self.tau0 == 0:
            raise ValueError("tau0 must be nonzero")

    @property
    def half_width(self):
        return 2.0 * abs(self.tau0) * np.pi

    @property
    def cut_start(self):
        return 2.0 * abs(self.tau0)

    def normalize(self, z):
        """Scale to the universal strip (half-width pi, cuts from +-1)."""
        return np.asarray(z, dtype=complex) / self.cut_start

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        inside = np.abs(z.imag) < self.half_width
        on_cut = (np.abs(z.imag) < 1e-14) & (np.abs(z.real) >= self.cut_start)
        return inside & ~on_cut


def _halfplane_image(w):
    """Conformal image of a normalized cut-strip point in the upper half
    plane."""
    ew = np.exp(w)
    T = (ew - np.exp(-1.0)) / (np.e - ew)
    return 1j * np.e * np.sqrt(T)


def _poisson_E_prime(zeta, adaptive=True):
    """Half-plane harmonic measure of E' = {|t|<=1} u {|t|>e} at zeta."""
    x, y = float(np.real(zeta)), float(np.imag(zeta))
    if y <= 0:
        raise ValueError("image point must lie in the open upper half plane")
    kernel = lambda t: (y / np.pi) / ((t - x) ** 2 + y * y)
    if adaptive:
        inner, _ = quad(kernel, -1.0, 1.0)
        left, _ = quad(kernel, -np.inf, -np.e)
        right, _ = quad(kernel, np.e, np.inf)
        return inner + left + right
    at = lambda t: np.arctan((t - x) / y) / np.pi
    return (at(1.0) - at(-1.0)) + (at(-np.e) + 0.5) + (0.5 - at(np.e))


def _walk_on_spheres(w, n_paths, seed, shell=1e-4, max_steps=2000):
    """Reflected Brownian paths in the normalized cut strip, realized as
    walk-on-spheres in the full (two-sided) domain: absorbing value 1 on the
    cuts, 0 on the strip edges.  Returns (estimate, standard error)."""
    rng = np.random.default_rng(seed)
    x = np.full(n_paths, float(np.real(w)))
    y = np.full(n_paths, float(np.imag(w)))
    value = np.zeros(n_paths)
    alive = np.ones(n_paths, dtype=bool)
    for _ in range(max_steps):
        if not np.any(alive):
            break
        xa, ya = x[alive], y[alive]
        d_edge = np.pi - np.abs(ya)
        # distance to a cut: |y| beside/past its tip, distance to the tip
        # otherwise
        d_left = np.where(xa <= -1.0, np.abs(ya), np.hypot(xa + 1.0, ya))
        d_right = np.where(xa >= 1.0, np.abs(ya), np.hypot(xa - 1.0, ya))
        d_cut = np.minimum(d_left, d_right)
        d = np.minimum(d_edge, d_cut)
        absorbed = d < shell
        if np.any(absorbed):
            hit_cut = d_cut[absorbed] <= d_edge[absorbed]
            idx = np.flatnonzero(alive)[absorbed]
            value[idx] = hit_cut.astype(float)
            keep = ~absorbed
            sub = np.flatnonzero(alive)[keep]
            alive = np.zeros_like(alive)
            alive[sub] = True
            xa, ya, d = xa[keep], ya[keep], d[keep]
        if xa.size == 0:
            break
        th = rng.uniform(0.0, 2 * np.pi, xa.size)
        x[alive] = xa + d * np.cos(th)
        y[alive] = ya + d * np.sin(th)
    if np.any(alive):
        # unresolved paths: assign by nearest boundary (bias far below the
        # statistical error for the default shell)
        xa, ya = x[alive], y[alive]
        d_edge = np.pi - np.abs(ya)
        d_left = np.where(xa <= -1.0, np.abs(ya), np.hypot(xa + 1.0, ya))
        d_right = np.where(xa >= 1.0, np.abs(ya), np.hypot(xa - 1.0, ya))
        value[alive] = (np.minimum(d_left, d_right) <= d_edge).astype(float)
    est = float(np.mean(value))
    stderr = float(np.sqrt(max(est * (1 - est), 1e-12) / n_paths))
    return est, stderr


def harmonic_measure(z, geom, method="poisson", n_paths=100_000, seed=0):
    """Harmonic measure of the cuts with respect to the cut strip at z.

    method:
      * "poisson"          half-plane Poisson integral at the conformal image
                           of z (adaptive quadrature);
      * "poisson_literal"  the same integral evaluated at the unmapped
                           (normalized) point, reported for comparison with
                           the printed formula, which is meaningful only under
                           the mapped reading;
      * "montecarlo"       reflected random walk in the physical geometry;
                           returns (estimate, stderr).
    """
    z = complex(z)
    if not geom.contains(z):
        raise ValueError("evaluation point must lie inside the cut strip")
    w = complex(geom.normalize(z))
    if method == "poisson":
        zeta = _halfplane_image(w)
        if np.imag(zeta) <= 0 and abs(np.imag(w)) < 1e-14:
            # real points between the cuts map to the positive imaginary axis;
            # guard roundoff
            zeta = complex(np.real(zeta), max(np.imag(zeta), 1e-300))
        return _poisson_E_prime(zeta)
    if method == "poisson_literal":
        if np.imag(w) == 0:
            raise ValueError("the literal formula degenerates at real points")
        return _poisson_E_prime(complex(w.real, abs(w.imag)))
    if method == "montecarlo":
        return _walk_on_spheres(w, n_paths, seed)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# two-constants inequality
# ---------------------------------------------------------------------------

def _component_transform_line(recipe, tau, nu):
    """hat A(tau, 0, nu) along the last frequency axis, nu possibly complex."""
    nu = np.atleast_1d(nu)
    freqs = np.zeros(nu.shape + (3,), dtype=complex)
    freqs[..., 0] = tau
    freqs[..., 2] = nu
    return recipe.fourier_at(freqs)


def _partial_transform_sup(recipe, tau, xn_samples):
    """sup over x_n of |W(x_n)|, W the transform in (t, x_1) at (tau, 0)."""
    vals = np.zeros(len(xn_samples), dtype=complex)
    for term in recipe.terms:
        ft = term.amplitude
        ft = ft * term.factors[0].fourier(np.array([tau]))[0]
        ft = ft * term.factors[1].fourier(np.array([0.0]))[0]
        vals += ft * term.factors[2](xn_samples)
    return float(np.max(np.abs(vals)))


def two_constants_check(recipe, tau0, nu_points=512, ray_points=2048):
    """Verify the two-constants chain for one potential component.

    With v(nu) = hat A(2 tau0, 0, nu): m = sup |v| on the real rays
    |nu| >= 2|tau0|, M = sup |v| on the horizontal lines Im nu = +-2|tau0| pi
    (finite because the component is compactly supported in x_n).  Checks

      * |v(nu)| <= m^(2/3) M^(1/3) for real |nu| < 2|tau0| (harmonic measure
        of the cuts exceeds 2/3 there),
      * M <= sup|W| e^(2|tau0| a) / (pi |tau0|) with a = pi * (x_n support
        radius) and W the partial transform: the computable constant behind
        the exponential cone estimate.

    Returns a report dict with margins; `ok` collects both verdicts.
    """
    tau0 = float(tau0)
    if tau0 == 0:
        raise ValueError("tau0 must be nonzero")
    if not recipe.terms:
        return {"ok": True, "m": 0.0, "M": 0.0, "sup_ratio": 0.0, "M_bound": 0.0,
                "max_violation": 0.0}
    bb = recipe.bounding_box()
    a_tilde = max(abs(bb[2][0]), abs(bb[2][1])) * 1.001
    a = np.pi * a_tilde
    tau = 2.0 * tau0
    cut = 2.0 * abs(tau0)

    nu_in = np.linspace(-cut, cut, nu_points + 2)[1:-1]
    v_in = np.abs(_component_transform_line(recipe, tau, nu_in))

    reach = cut + 12.0 / min(f.width for t in recipe.terms for f in [t.factors[2]])
    nu_ray = np.concatenate([
        np.linspace(cut, reach, ray_points // 2),
        np.linspace(-reach, -cut, ray_points // 2),
    ])
    m = float(np.max(np.abs(_component_transform_line(recipe, tau, nu_ray))))

    nu_line = np.linspace(-reach, reach, ray_points) + 1j * cut * np.pi
    M = float(max(
        np.max(np.abs(_component_transform_line(recipe, tau, nu_line))),
        np.max(np.abs(_component_transform_line(recipe, tau, np.conj(nu_line)))),
    ))

    bound_in = m ** (2.0 / 3.0) * M ** (1.0 / 3.0)
    max_violation = float(np.max(v_in - bound_in))

    xg = np.linspace(bb[2][0], bb[2][1], 2001)
    sup_w = _partial_transform_sup(recipe, tau, xg)
    M_bound = sup_w * np.exp(2.0 * abs(tau0) * a) / (np.pi * abs(tau0))

    return {
        "ok": (max_violation <= 1e-12 * max(bound_in, 1e-300)) and (M <= M_bound * (1 + 1e-9)),
        "m": m,
        "M": M,
        "M_bound": float(M_bound),
        "sup_ratio": float(np.max(v_in) / max(bound_in, 1e-300)),
        "max_violation": max_violation,
        "a": float(a),
        "interior_values": v_in,
        "interior_bound": bound_in,
    }


def sinc_lower_bound(alpha):
    """sin(alpha/2)/(alpha/2): the uniform lower bound of
    |e^{i beta} - 1| / |beta| over |beta| < alpha, valid for alpha < 2 pi."""
    if not 0 < alpha < 2 * np.pi:
        raise ValueError("alpha must lie in (0, 2 pi)")
    return float(np.sin(alpha / 2.0) / (alpha / 2.0))
