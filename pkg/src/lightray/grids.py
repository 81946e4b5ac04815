"""Space-time grids and complex lattice fields.

The computational domain is the cylinder [T1, T2] x Omega with Omega an
axis-aligned box in R^n.  Lattices are node-centered and include both
endpoints of every axis, so h = (b - a) / (N - 1).
"""

from __future__ import annotations

import numpy as np

__all__ = ["SpaceTimeGrid", "ComplexField"]


class SpaceTimeGrid:
    """Uniform lattice on [T1,T2] x Omega, Omega = prod_d [a_d, b_d] in R^n.

    Invariants enforced at construction:
      * n >= 2 spatial dimensions,
      * T1 < 0 < T2,
      * all spatial spacings equal (within roundoff),
      * h_t <= h_x / sqrt(n), the CFL bound of the unit-speed principal part.
    """

    def __init__(self, t_range, box, shape):
        t_range = (float(t_range[0]), float(t_range[1]))
        box = tuple((float(a), float(b)) for a, b in box)
        shape = tuple(int(s) for s in shape)
        n = len(box)
        if n < 2:
            raise ValueError("spatial dimension must be >= 2")
        if len(shape) != n + 1:
            raise ValueError("shape must have n+1 entries (t, x1..xn)")
        if any(s < 4 for s in shape):
            raise ValueError("need at least 4 nodes per axis")
        if not (t_range[0] < 0.0 < t_range[1]):
            raise ValueError("time interval must contain 0 in its interior")
        for a, b in box:
            if not a < b:
                raise ValueError("degenerate box axis")

        self.n = n
        self.t_range = t_range
        self.box = box
        self.shape = shape
        self.h_t = (t_range[1] - t_range[0]) / (shape[0] - 1)
        hs = [(b - a) / (s - 1) for (a, b), s in zip(box, shape[1:])]
        if max(hs) - min(hs) > 1e-12 * max(hs):
            raise ValueError("spatial spacings must be equal on all axes")
        self.h_x = hs[0]
        if self.h_t > self.h_x / np.sqrt(n) * (1 + 1e-12):
            raise ValueError(
                f"CFL violated: h_t={self.h_t:.3e} > h_x/sqrt(n)={self.h_x / np.sqrt(n):.3e}"
            )

    # ----- coordinates ------------------------------------------------------------

    def axes(self):
        """List of n+1 coordinate arrays, time first."""
        t0, t1 = self.t_range
        out = [np.linspace(t0, t1, self.shape[0])]
        for (a, b), s in zip(self.box, self.shape[1:]):
            out.append(np.linspace(a, b, s))
        return out

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self):
        """All lattice nodes, shape (*shape, n+1)."""
        return np.stack(self.meshgrid(), axis=-1)

    @property
    def spacings(self):
        return (self.h_t,) + (self.h_x,) * self.n

    @property
    def num_nodes(self):
        return int(np.prod(self.shape))

    def trapezoid_weights(self):
        """Tensor trapezoid quadrature weights over the full cylinder."""
        ws = []
        for h, s in zip(self.spacings, self.shape):
            w = np.full(s, h)
            w[0] *= 0.5
            w[-1] *= 0.5
            ws.append(w)
        out = ws[0]
        for w in ws[1:]:
            out = np.multiply.outer(out, w)
        return out

    # ----- frequency lattice --------------------------------------------------------

    def frequency_axes(self, pad=1):
        """Angular-frequency lattice (2*pi*fftfreq) per axis, padded by `pad`."""
        out = []
        for h, s in zip(self.spacings, self.shape):
            out.append(2.0 * np.pi * np.fft.fftfreq(pad * s, d=h))
        return out

    def nyquist(self):
        """Smallest per-axis Nyquist angular frequency pi/h."""
        return float(np.pi / max(self.spacings))

    # ----- support checks -------------------------------------------------------------

    def contains_box(self, bbox, margin=0.0):
        """True when the per-axis interval bbox sits strictly inside the domain."""
        dom = [self.t_range] + list(self.box)
        for (lo, hi), (a, b) in zip(bbox, dom):
            if lo < a + margin or hi > b - margin:
                return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, SpaceTimeGrid)
            and self.t_range == other.t_range
            and self.box == other.box
            and self.shape == other.shape
        )

    def __hash__(self):
        return hash((self.t_range, self.box, self.shape))

    def __repr__(self):
        return f"SpaceTimeGrid(t_range={self.t_range}, box={self.box}, shape={self.shape})"


class ComplexField:
    """Complex scalar sampled on every node of a SpaceTimeGrid."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise ValueError(f"field shape {values.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        self.grid = grid
        self.values = values

    @staticmethod
    def zeros(grid):
        return ComplexField(grid, np.zeros(grid.shape, dtype=complex))

    def norm_l2(self):
        """Lattice L2 norm over the cylinder (trapezoid weights)."""
        w = self.grid.trapezoid_weights()
        return float(np.sqrt(np.sum(w * np.abs(self.values) ** 2)))

    def __sub__(self, other):
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        return ComplexField(self.grid, self.values - other.values)

    def __add__(self, other):
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        return ComplexField(self.grid, self.values + other.values)
