"""Boundary/volume pairing identity used to read ray data out of boundary
measurements.

For forward u (potentials 1, data f) and backward v (potentials 2, data g),
integration by parts of the equation pair gives the exact identity

    <(L1 - L2) f, g>_lateral =
        sum_j eps_j [ <a_j u, D_j v> + <a_j D_j u, v> ]
        + <(s_0 - sum_{j>=1} s_j) u, v>  +  <w u, v>,

with D_j = -i d_j (j = 0 the time derivative), eps_0 = +1, eps_j = -1 for the
spatial terms, a_j = A_j^(2) - A_j^(1), s_j = (A_j^(2))^2 - (A_j^(1))^2 and
w = V^(2) - V^(1); all potentials real and compactly supported inside the
cylinder, inner products conjugating the second argument.

Both sides are evaluated by lattice quadrature.  The left side is computed in
two equivalent forms: applying both simulated boundary maps to f, and the
adjoint form that pairs f against the Neumann trace of the backward field
(the two agree exactly in the continuum and to O(h^2) on the lattice).
"""

from __future__ import annotations

import numpy as np

from .boundary import FACES, BoundaryTrace, face_geometry
from .solver import neumann_trace

__all__ = [
    "volume_inner",
    "minus_i_gradient",
    "neumann_trace_highorder",
    "greens_rhs",
    "greens_gap",
]


def volume_inner(grid, a, b):
    """Trapezoid <a, b> = int a conj(b) over the space-time cylinder."""
    w = grid.trapezoid_weights()
    return complex(np.sum(w * a * np.conj(b)))


# interior central first-derivative stencils (half-width -> coefficients)
_CENTRAL = {
    1: np.array([-0.5, 0.0, 0.5]),
    2: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    4: np.array([3.0, -32.0, 168.0, -672.0, 0.0, 672.0, -168.0, 32.0, -3.0]) / 840.0,
}

# one-sided first-derivative stencils at the boundary node
_ONESIDED = {
    2: np.array([-3.0, 4.0, -1.0]) / 2.0,
    6: np.array([-49.0 / 20, 6.0, -15.0 / 2, 20.0 / 3, -15.0 / 4, 6.0 / 5, -1.0 / 6]),
}


def minus_i_gradient(values, grid, axis, order=2):
    """D_j = -i d_j.  `order` 2 uses centered differences with one-sided
    ends; 8 uses an eighth-order interior stencil (edge bands fall back to
    second order, which is harmless when the integrand vanishes there)."""
    h = grid.spacings[axis]
    if order <= 2:
        return -1j * np.gradient(values, h, axis=axis)
    half = 4
    coef = _CENTRAL[half]
    out = np.gradient(values, h, axis=axis)
    acc = np.zeros_like(values[(slice(None),) * axis + (slice(half, -half),)])
    npts = values.shape[axis]
    for k, ck in enumerate(coef):
        if ck == 0.0:
            continue
        sl = (slice(None),) * axis + (slice(k, npts - 2 * half + k),)
        acc = acc + ck * values[sl]
    out[(slice(None),) * axis + (slice(half, -half),)] = acc / h
    return -1j * out


def neumann_trace_highorder(field, A=None, order=6):
    """Outward normal derivative trace with a higher-order one-sided stencil;
    used when pairing strongly oscillatory probe fields."""
    grid = field.grid
    u = field.values
    h = grid.h_x
    # stencil differentiates inward along the face normal direction; the
    # outward normal derivative is its negative on both sides
    coef = -_ONESIDED[order if order in _ONESIDED else 2]
    faces = {}
    for f in FACES:
        axis, _, _, _, normal = face_geometry(grid, f)
        val = np.zeros((grid.shape[0], u.shape[2 if axis == 1 else 1]), dtype=complex)
        for k, ck in enumerate(coef):
            sl = [slice(None)] * 3
            sl[axis] = -1 - k if normal > 0 else k
            val += ck * u[tuple(sl)]
        val /= h
        if A is not None:
            sl = [slice(None)] * 3
            sl[axis] = -1 if normal > 0 else 0
            a_nu = normal * A.values[axis][tuple(sl)]
            val = val + 1j * a_nu * u[tuple(sl)]
        faces[f] = val
    return BoundaryTrace(grid, faces, "neumann")


def greens_rhs(A1, V1, A2, V2, u, v, order=2):
    """Volume side of the pairing identity for the given solution fields."""
    grid = u.grid
    eps = [1.0] + [-1.0] * grid.n
    a_diff = A2.values - A1.values
    s_diff = A2.values**2 - A1.values**2
    w_diff = V2.values - V1.values

    total = 0.0 + 0.0j
    for j in range(grid.n + 1):
        dv = minus_i_gradient(v.values, grid, j, order)
        du = minus_i_gradient(u.values, grid, j, order)
        term = volume_inner(grid, a_diff[j] * u.values, dv)
        term += volume_inner(grid, a_diff[j] * du, v.values)
        total += eps[j] * term
    s_comb = s_diff[0] - np.sum(s_diff[1:], axis=0)
    total += volume_inner(grid, s_comb * u.values, v.values)
    total += volume_inner(grid, w_diff * u.values, v.values)
    return total


def greens_gap_discrete(op1, op2, f, g, fields=None):
    """Both sides of the pairing identity in the lattice's own dual form.

    The boundary side pairs the scheme's natural two-point fluxes of the
    forward field u (potentials 1) and the adjoint backward field v
    (potentials 2) over the lateral faces; the volume side applies the
    potential-difference part of the marching operator to u and pairs it with
    v.  Both are uniform-weight lattice quadratures of the two sides of the
    continuum formula; because the discretizations are exactly dual, the
    identity holds to roundoff whenever u and v solve their schemes, so the
    residual checks the solver, the traces and the sign structure of every
    potential-difference term rather than quadrature resolution (the
    independent-quadrature residual of :func:`greens_gap` measures the
    latter).
    """
    grid = op1.grid
    if fields is None:
        u = op1.solve(f).values
        v = op2.solve_backward_adjoint(g).values
    else:
        u, v = fields[0].values, fields[1].values
    ht, hx = grid.h_t, grid.h_x
    vb = np.conj(v)

    # --- boundary side: natural flux pairing over the four faces -------------
    def face_flux(axis, side):
        sl_b = [slice(1, -1)] * 3
        sl_i = [slice(1, -1)] * 3
        sl_b[axis] = -1 if side else 0
        sl_i[axis] = -2 if side else 1
        ub, ui = u[tuple(sl_b)], u[tuple(sl_i)]
        vbb, vbi = vb[tuple(sl_b)], vb[tuple(sl_i)]
        # (boundary - inward)/h is the outward derivative on either side
        du = (ub - ui) / hx
        dv = (vbb - vbi) / hx
        return np.sum(du * vbb - ub * dv) * ht * hx

    lhs = sum(face_flux(axis, side) for axis in (1, 2) for side in (0, 1))

    # --- volume side: potential-difference terms of the marching operator ----
    a1 = op1.A.values
    a2 = op2.A.values
    c1 = _march_zeroth_order(op1.A, op1.V, grid)
    c2 = _march_zeroth_order(op2.A, op2.V, grid)
    sl = (slice(1, -1), slice(1, -1), slice(1, -1))
    dtu = (u[2:, 1:-1, 1:-1] - u[:-2, 1:-1, 1:-1]) / (2 * ht)
    dxu = (u[1:-1, 2:, 1:-1] - u[1:-1, :-2, 1:-1]) / (2 * hx)
    dyu = (u[1:-1, 1:-1, 2:] - u[1:-1, 1:-1, :-2]) / (2 * hx)
    diff_op = (
        2j * (a1[0] - a2[0])[sl] * dtu
        - 2j * ((a1[1] - a2[1])[sl] * dxu + (a1[2] - a2[2])[sl] * dyu)
        - (c1 - c2)[sl] * u[sl]
    )
    rhs = np.sum(diff_op * vb[sl]) * ht * hx * hx
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return {
        "lhs_flux": complex(lhs),
        "rhs": complex(rhs),
        "residual": abs(lhs - rhs) / scale,
    }


def _march_zeroth_order(A, V, grid):
    """The zeroth-order coefficient of the marched equation (same c as the
    solver uses)."""
    from .solver import _coefficients

    _, _, c = _coefficients(A, V, grid)
    return c


def greens_gap(op1, op2, f, g, fields=None, order=2):
    """Evaluate both sides of the pairing identity.

    Returns a dict with the two boundary-side variants, the volume side, and
    relative residuals.  `fields`, when given, is a (u, v) pair to reuse
    solves.  `order` > 2 switches the traces and volume derivatives to
    high-order stencils, needed when the probes oscillate near the lattice
    resolution.
    """
    if fields is None:
        u = op1.solve(f)
        v = op2.solve_backward_adjoint(g) if order > 2 else op2.solve_backward(g)
    else:
        u, v = fields
    if order <= 2:
        tr = lambda fld, A: neumann_trace(fld, A)
    else:
        tr = lambda fld, A: neumann_trace_highorder(fld, A)
    u2 = op2.solve(f)
    lam1_f = tr(u, op1.A)
    lam2_f = tr(u2, op2.A)
    lhs_dtn = (lam1_f - lam2_f).inner(g)
    lhs_adj = lam1_f.inner(g) - f.inner(tr(v, op2.A))
    rhs = greens_rhs(op1.A, op1.V, op2.A, op2.V, u, v, order)
    scale = max(abs(lhs_dtn), abs(lhs_adj), abs(rhs), 1e-300)
    return {
        "lhs_dtn": lhs_dtn,
        "lhs_adjoint": lhs_adj,
        "rhs": rhs,
        "residual_dtn": abs(lhs_dtn - rhs) / scale,
        "residual_adjoint": abs(lhs_adj - rhs) / scale,
        "fields": (u, v),
    }
