"""Vector and scalar potentials, gauge transforms, divergence fixing.

The vector potential is the (n+1)-component field (A_0, A_1, ..., A_n) on the
space-time cylinder, time component first.  Synthetic potentials are backed by
analytic bump recipes (see :mod:`lightray.bumps`) so that line integrals and
continuum Fourier transforms can be evaluated off-lattice; potentials produced
by grid operations (e.g. the divergence projection) are grid-only and lose
those abilities.
"""

from __future__ import annotations

import numpy as np

from .bumps import FieldRecipe
from .grids import SpaceTimeGrid

__all__ = [
    "VectorPotential",
    "ScalarPotential",
    "GaugeFunction",
    "gauge_apply",
    "divergence_residual",
    "divergence_project",
    "make_test_potential",
]


def _covering_radius(grid):
    dom = [grid.t_range] + list(grid.box)
    return float(np.sqrt(sum(max(a * a, b * b) for a, b in dom)))


class ScalarPotential:
    def __init__(self, grid, recipe=None, values=None, support_radius=None):
        if recipe is None and values is None:
            raise ValueError("need a recipe or grid values")
        self.grid = grid
        self.recipe = recipe
        self._values = None if values is None else np.asarray(values, dtype=float)
        if recipe is not None and not grid.contains_box(recipe.bounding_box()):
            raise ValueError("scalar potential support exceeds the domain")
        if support_radius is None:
            support_radius = (
                recipe.bounding_radius() if recipe is not None else _covering_radius(grid)
            )
        self.support_radius = float(support_radius)

    @staticmethod
    def zero(grid):
        return ScalarPotential(grid, recipe=FieldRecipe.zero(grid.n + 1))

    @property
    def values(self):
        if self._values is None:
            self._values = self.recipe.on_axes(self.grid.axes())
        return self._values

    def max_norm(self):
        return float(np.max(np.abs(self.values)))

    def __sub__(self, other):
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        if self.recipe is not None and other.recipe is not None:
            return ScalarPotential(self.grid, recipe=self.recipe + (-1.0) * other.recipe)
        return ScalarPotential(self.grid, values=self.values - other.values)


class VectorPotential:
    """Fields (A_0 .. A_n); `recipes` is a tuple of n+1 FieldRecipe or None."""

    def __init__(self, grid, recipes=None, values=None, divergence_free=False,
                 support_radius=None):
        self.grid = grid
        self.recipes = tuple(recipes) if recipes is not None else None
        self._values = None if values is None else np.asarray(values, dtype=float)
        if self.recipes is not None and len(self.recipes) != grid.n + 1:
            raise ValueError("need n+1 component recipes")
        if self._values is not None and self._values.shape != (grid.n + 1,) + grid.shape:
            raise ValueError("component values must have shape (n+1, *grid.shape)")
        if self.recipes is None and self._values is None:
            raise ValueError("need recipes or grid values")
        if self.recipes is not None:
            for r in self.recipes:
                if r.terms and not grid.contains_box(r.bounding_box()):
                    raise ValueError("potential support exceeds the domain")
        self.divergence_free = bool(divergence_free)
        if support_radius is None:
            if self.recipes is not None:
                support_radius = max(
                    [r.bounding_radius() for r in self.recipes if r.terms] or [0.0]
                )
            else:
                support_radius = _covering_radius(grid)
        self.support_radius = float(support_radius)

    @staticmethod
    def zero(grid):
        z = FieldRecipe.zero(grid.n + 1)
        return VectorPotential(grid, recipes=(z,) * (grid.n + 1), divergence_free=True)

    @property
    def values(self):
        if self._values is None:
            axes = self.grid.axes()
            self._values = np.stack([r.on_axes(axes) for r in self.recipes])
        return self._values

    def max_norm(self):
        return float(np.max(np.abs(self.values)))

    def combination(self, omega):
        """Recipe of A_0 + sum_j omega_j A_j (omega_0 = 1 implicitly)."""
        if self.recipes is None:
            raise ValueError("grid-only potential has no analytic recipe")
        out = self.recipes[0]
        for wj, r in zip(omega, self.recipes[1:]):
            out = out + float(wj) * r
        return out

    def __sub__(self, other):
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        if self.recipes is not None and other.recipes is not None:
            recs = tuple(a + (-1.0) * b for a, b in zip(self.recipes, other.recipes))
            return VectorPotential(
                self.grid, recipes=recs,
                divergence_free=self.divergence_free and other.divergence_free,
            )
        return VectorPotential(
            self.grid, values=self.values - other.values,
            divergence_free=self.divergence_free and other.divergence_free,
        )

    def scaled(self, s):
        if self.recipes is not None:
            return VectorPotential(
                self.grid, recipes=tuple(float(s) * r for r in self.recipes),
                divergence_free=self.divergence_free,
                support_radius=self.support_radius,
            )
        return VectorPotential(
            self.grid, values=float(s) * self.values,
            divergence_free=self.divergence_free,
            support_radius=self.support_radius,
        )


class GaugeFunction:
    """Phase phi(t,x), compactly supported in the open cylinder, so that
    g = exp(i*phi) equals 1 on the lateral boundary."""

    def __init__(self, grid, recipe):
        if not grid.contains_box(recipe.bounding_box()):
            raise ValueError("gauge phase must vanish on and outside the boundary")
        self.grid = grid
        self.recipe = recipe

    def gradient_recipes(self):
        return tuple(self.recipe.partial(d) for d in range(self.grid.n + 1))

    def negated(self):
        return GaugeFunction(self.grid, (-1.0) * self.recipe)


def gauge_apply(A, phi):
    """A'_j = A_j + d_j phi  (j = 0 is the time derivative).

    Preserves compact support since phi vanishes near the boundary.
    """
    if A.grid != phi.grid:
        raise ValueError("potential and gauge phase live on different grids")
    grads = phi.gradient_recipes()
    axes = A.grid.axes()
    grad_vals = np.stack([g.on_axes(axes) for g in grads])
    values = A.values + grad_vals
    recipes = None
    if A.recipes is not None:
        recipes = tuple(r + g for r, g in zip(A.recipes, grads))
    return VectorPotential(
        A.grid, recipes=recipes, values=values, divergence_free=False,
    )


# ---------------------------------------------------------------------------
# discrete divergence and the divergence gauge
# ---------------------------------------------------------------------------

def _pad_shape(grid, pad=2):
    return tuple(pad * s for s in grid.shape)


def _padded_freqs(grid, pad=2):
    return [
        2.0 * np.pi * np.fft.fftfreq(pad * s, d=h)
        for s, h in zip(grid.shape, grid.spacings)
    ]


def _deriv_freqs(grid, pad=2):
    """Frequencies for spectral differentiation of real fields: the unpaired
    Nyquist mode is zeroed so that i*kappa*F stays Hermitian."""
    out = []
    for s, h in zip(grid.shape, grid.spacings):
        k = 2.0 * np.pi * np.fft.fftfreq(pad * s, d=h)
        if (pad * s) % 2 == 0:
            k = k.copy()
            k[(pad * s) // 2] = 0.0
        out.append(k)
    return out


def _embed(values, pshape):
    out = np.zeros(pshape, dtype=values.dtype)
    sl = tuple(slice(0, s) for s in values.shape)
    out[sl] = values
    return out


def divergence_residual(A):
    """Max-norm of the toolkit's discrete divergence d_t A_0 + sum_j d_j A_j.

    Recipe-backed potentials use the exact analytic divergence (identical
    separable terms cancel symbolically).  Grid-only potentials use the
    spectral divergence of their zero-padded samples; a potential returned by
    :func:`divergence_project` keeps its padded representation so this check
    sees exactly the field the projection produced.
    """
    if A.recipes is not None:
        div = FieldRecipe.zero(A.grid.n + 1)
        for d, r in enumerate(A.recipes):
            div = div + r.partial(d)
        div = div.simplify()
        if not div.terms:
            return 0.0
        return float(np.max(np.abs(div.on_axes(A.grid.axes()))))
    padded = getattr(A, "_padded_values", None)
    if padded is None:
        pshape = _pad_shape(A.grid)
        padded = np.stack([_embed(c, pshape) for c in A.values])
    freqs = _deriv_freqs(A.grid)
    kgrids = np.meshgrid(*freqs, indexing="ij", sparse=True)
    div_hat = np.zeros(padded.shape[1:], dtype=complex)
    for d in range(padded.shape[0]):
        div_hat += 1j * kgrids[d] * np.fft.fftn(padded[d])
    div = np.fft.ifftn(div_hat).real
    return float(np.max(np.abs(div)))


def divergence_project(A, pad=2):
    """Return a divergence-free potential gauge-equivalent to A.

    Solves the free-space (n+1)-dimensional Poisson equation
    Delta phi = -div A spectrally on a zero-padded lattice and applies the
    gauge correction grad phi.  The output is grid-only (the correction has no
    bump recipe) and its discrete spectral divergence vanishes to roundoff.
    """
    if A.recipes is not None:
        for r in A.recipes:
            if r.terms and not A.grid.contains_box(r.bounding_box()):
                raise ValueError("potential must be compactly supported inside the domain")
        div = FieldRecipe.zero(A.grid.n + 1)
        for d, r in enumerate(A.recipes):
            div = div + r.partial(d)
        if not div.simplify().terms:
            # already in the divergence gauge: the projection is the identity
            return VectorPotential(
                A.grid, recipes=A.recipes, values=A._values,
                divergence_free=True, support_radius=A.support_radius,
            )
    pshape = _pad_shape(A.grid, pad)
    freqs = _deriv_freqs(A.grid, pad)
    kgrids = np.meshgrid(*freqs, indexing="ij", sparse=True)
    prev_padded = getattr(A, "_padded_values", None)
    if prev_padded is not None:
        comp_hat = [np.fft.fftn(c) for c in prev_padded]
    else:
        comp_hat = [np.fft.fftn(_embed(c, pshape)) for c in A.values]
    div_hat = np.zeros(pshape, dtype=complex)
    for d, ch in enumerate(comp_hat):
        div_hat += 1j * kgrids[d] * ch
    k2 = np.zeros(pshape)
    for d in range(len(kgrids)):
        k2 = k2 + kgrids[d] ** 2
    # zero-frequency nodes (DC and pure zeroed-Nyquist combinations) carry no
    # divergence content; leave phi untouched there
    singular = k2 == 0.0
    phi_hat = div_hat / np.where(singular, 1.0, k2)
    phi_hat[singular] = 0.0

    crop = tuple(slice(0, s) for s in A.grid.shape)
    padded_new = np.empty((A.grid.n + 1,) + pshape)
    values_new = np.empty((A.grid.n + 1,) + A.grid.shape)
    for d in range(A.grid.n + 1):
        corr_hat = 1j * kgrids[d] * phi_hat
        comp_new = np.fft.ifftn(comp_hat[d] + corr_hat).real
        padded_new[d] = comp_new
        values_new[d] = comp_new[crop]
    out = VectorPotential(
        A.grid, values=values_new, divergence_free=True,
        support_radius=A.support_radius,
    )
    out._padded_values = padded_new
    return out


# ---------------------------------------------------------------------------
# synthetic test potentials
# ---------------------------------------------------------------------------

def _random_stream_recipe(rng, grid, n_terms, w_t, w_x, lam, amp, budget):
    """One separable stream component inside the support budget, which is a
    list of (center, halfwidth) per axis (time first)."""
    terms = FieldRecipe.zero(grid.n + 1)
    for _ in range(n_terms):
        wt = w_t * rng.uniform(0.8, 1.0)
        wxs = [w_x * rng.uniform(0.8, 1.0) for _ in range(grid.n)]
        widths = [wt] + wxs
        centers = [
            c + rng.uniform(-1, 1) * max(hw - w, 0.0)
            for (c, hw), w in zip(budget, widths)
        ]
        a = amp * rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
        terms = terms + FieldRecipe.bump(a, centers, widths, lam=lam)
    return terms


def _alpha_estimate(A, n_dirs=12, n_base=7):
    """Sampled sup of |int (A_0 + sum omega_j A_j) ds| over rays; the quantity
    the ray-argument extraction needs below pi."""
    grid = A.grid
    thetas = np.linspace(0.0, 2 * np.pi, n_dirs, endpoint=False)
    t_half = 0.5 * (grid.t_range[1] - grid.t_range[0])
    best = 0.0
    for th in thetas:
        omega = np.array([np.cos(th), np.sin(th)])
        comb = A.combination(omega)
        ts = np.linspace(-t_half, t_half, n_base)
        xs = np.linspace(grid.box[0][0], grid.box[0][1], n_base)
        ys = np.linspace(grid.box[1][0], grid.box[1][1], n_base)
        T, X, Y = np.meshgrid(ts, xs, ys, indexing="ij")
        base = np.stack([T, X, Y], axis=-1).reshape(-1, 3)
        vals = comb.line_integral(base, np.array([1.0, *omega]))
        best = max(best, float(np.max(np.abs(vals))))
    return best


def make_test_potential(grid, seed, mode="generic", alpha_target=2.5,
                        mollify_ratio=0.3, spatial_width=None, temporal_width=None,
                        cone_eps=0.2, amplitude=1.0, support_center=None,
                        support_halfwidth=None):
    """Random smooth compactly supported (VectorPotential, ScalarPotential).

    The vector part is built as the space-time curl of a random stream field,
    so it is exactly divergence free.  `mode="cone_concentrated"` slows the
    temporal variation (wide time bumps, suppressed time-derivative streams)
    so that most spectral energy sits where |tau| <= |xi|/2.  Amplitudes are
    rescaled so the sampled sup of light-ray integrals stays below
    `alpha_target` (default 2.5 < pi).

    `support_center` / `support_halfwidth` (per axis, time first) confine the
    support budget, e.g. to keep it on a probe ray's chord.
    """
    if grid.n != 2:
        raise ValueError("synthetic divergence-free potentials are built for n = 2")
    rng = np.random.default_rng(seed)
    margin = 3.0 * grid.h_x
    t_mid = 0.5 * (grid.t_range[0] + grid.t_range[1])
    mids = [t_mid] + [0.5 * (a + b) for a, b in grid.box]
    halves = [0.5 * (grid.t_range[1] - grid.t_range[0])] + [
        0.5 * (b - a) for a, b in grid.box
    ]
    if support_center is None:
        support_center = mids
    if support_halfwidth is None:
        support_halfwidth = [
            h - abs(c - m) - margin for h, c, m in zip(halves, support_center, mids)
        ]
    budget = list(zip(support_center, support_halfwidth))
    t_half, x_half = budget[0][1], min(b[1] for b in budget[1:])
    lam = 1.0 / (2.0 * mollify_ratio**2)

    if mode == "generic":
        w_t = temporal_width or 0.55 * t_half
        w_x = spatial_width or 0.5 * x_half
        eps = 1.0
    elif mode == "cone_concentrated":
        w_t = temporal_width or 0.85 * t_half
        w_x = spatial_width or 0.45 * x_half
        eps = cone_eps
    else:
        raise ValueError(f"unknown mode {mode!r}")

    psi0 = _random_stream_recipe(rng, grid, 2, w_t, w_x, lam, amplitude, budget)
    psi1 = _random_stream_recipe(rng, grid, 1, w_t, w_x, lam, eps * amplitude, budget)
    psi2 = _random_stream_recipe(rng, grid, 1, w_t, w_x, lam, eps * amplitude, budget)

    # space-time curl in coordinates (t, x1, x2): exactly divergence free
    a0 = psi2.partial(1) + (-1.0) * psi1.partial(2)
    a1 = psi0.partial(2) + (-1.0) * psi2.partial(0)
    a2 = psi1.partial(0) + (-1.0) * psi0.partial(1)
    A = VectorPotential(grid, recipes=(a0, a1, a2), divergence_free=True)

    scale = 1.0
    alpha = _alpha_estimate(A)
    if alpha > 0:
        scale = min(1.0, alpha_target / alpha)
    A = A.scaled(scale)

    v_recipe = _random_stream_recipe(
        rng, grid, 2, w_t, w_x, lam, 0.6 * amplitude * scale, budget
    )
    V = ScalarPotential(grid, recipe=v_recipe)
    return A, V


def spectral_energy_cone_fraction(A, pad=2):
    """Fraction of FFT energy of the components inside {|tau| <= |xi|/2}."""
    pshape = _pad_shape(A.grid, pad)
    freqs = _padded_freqs(A.grid, pad)
    tau = freqs[0].reshape(-1, *([1] * A.grid.n))
    xi2 = np.zeros(pshape[1:])
    for d in range(1, A.grid.n + 1):
        shape = [1] * A.grid.n
        shape[d - 1] = pshape[d]
        xi2 = xi2 + freqs[d].reshape(shape) ** 2
    mask = np.abs(tau) <= 0.5 * np.sqrt(xi2)
    tot = 0.0
    inside = 0.0
    for c in A.values:
        e = np.abs(np.fft.fftn(_embed(c, pshape))) ** 2
        tot += float(e.sum())
        inside += float(e[mask].sum())
    return inside / tot if tot > 0 else 1.0
