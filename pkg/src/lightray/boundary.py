"""Lateral-boundary traces on the box domain.

The lateral boundary of [T1,T2] x Omega for a box Omega in R^2 consists of
four faces, one per (spatial axis, side).  A trace stores one complex array of
shape (Nt, N_edge) per face, nodes including the shared corners;
trapezoid-in-face quadrature then reproduces the periodic trapezoid rule on
the closed boundary curve.
"""

from __future__ import annotations

import numpy as np

__all__ = ["FACES", "BoundaryTrace", "face_geometry"]

# (spatial_axis, side): axis is 1-based into (t, x1, x2); side 0 = min, 1 = max
FACES = ((1, 0), (1, 1), (2, 0), (2, 1))


def face_geometry(grid, face):
    """Coordinates of a face: (fixed axis, fixed value, edge axis, edge nodes,
    outward normal component)."""
    axis, side = face
    a, b = grid.box[axis - 1]
    fixed = b if side else a
    normal = 1.0 if side else -1.0
    edge_axis = 2 if axis == 1 else 1
    edge_nodes = grid.axes()[edge_axis]
    return axis, fixed, edge_axis, edge_nodes, normal


class BoundaryTrace:
    def __init__(self, grid, faces, kind="dirichlet"):
        if grid.n != 2:
            raise ValueError("boundary traces implemented for n = 2 box domains")
        if kind not in ("dirichlet", "neumann"):
            raise ValueError("kind must be dirichlet or neumann")
        self.grid = grid
        self.kind = kind
        self.faces = {}
        for f in FACES:
            arr = np.asarray(faces[f], dtype=complex)
            _, _, edge_axis, edge_nodes, _ = face_geometry(grid, f)
            want = (grid.shape[0], len(edge_nodes))
            if arr.shape != want:
                raise ValueError(f"face {f} has shape {arr.shape}, want {want}")
            self.faces[f] = arr

    # ----- constructors ---------------------------------------------------------

    @staticmethod
    def zeros(grid, kind="dirichlet"):
        faces = {}
        for f in FACES:
            _, _, _, edge_nodes, _ = face_geometry(grid, f)
            faces[f] = np.zeros((grid.shape[0], len(edge_nodes)), dtype=complex)
        return BoundaryTrace(grid, faces, kind)

    @staticmethod
    def from_function(grid, fn, kind="dirichlet"):
        """fn(t, x1, x2) -> complex, vectorized over broadcast arrays."""
        t = grid.axes()[0][:, None]
        faces = {}
        for f in FACES:
            axis, fixed, _, edge_nodes, _ = face_geometry(grid, f)
            e = edge_nodes[None, :]
            if axis == 1:
                faces[f] = np.asarray(fn(t, np.full_like(e, fixed), e), dtype=complex)
            else:
                faces[f] = np.asarray(fn(t, e, np.full_like(e, fixed)), dtype=complex)
        return BoundaryTrace(grid, faces, kind)

    def points(self, face):
        """Space-time coordinates of the face nodes, shape (Nt, N_edge, 3)."""
        axis, fixed, _, edge_nodes, _ = face_geometry(self.grid, face)
        t = self.grid.axes()[0]
        T, E = np.meshgrid(t, edge_nodes, indexing="ij")
        F = np.full_like(T, fixed)
        cols = [T, F, E] if axis == 1 else [T, E, F]
        return np.stack(cols, axis=-1)

    # ----- algebra ---------------------------------------------------------------

    def _binary(self, other, op):
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        return BoundaryTrace(
            self.grid, {f: op(self.faces[f], other.faces[f]) for f in FACES}, self.kind
        )

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def scaled(self, s):
        return BoundaryTrace(self.grid, {f: s * self.faces[f] for f in FACES}, self.kind)

    def conj_time_reversed(self):
        return BoundaryTrace(
            self.grid, {f: np.conj(self.faces[f][::-1]) for f in FACES}, self.kind
        )

    # ----- quadrature ---------------------------------------------------------------

    def _face_weights(self, face):
        nt, ne = self.faces[face].shape
        wt = np.full(nt, self.grid.h_t)
        wt[0] *= 0.5
        wt[-1] *= 0.5
        ws = np.full(ne, self.grid.h_x)
        ws[0] *= 0.5
        ws[-1] *= 0.5
        return np.multiply.outer(wt, ws)

    def inner(self, other):
        """L2 pairing <self, other> = int self * conj(other) over the lateral
        boundary."""
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        tot = 0.0 + 0.0j
        for f in FACES:
            w = self._face_weights(f)
            tot += np.sum(w * self.faces[f] * np.conj(other.faces[f]))
        return complex(tot)

    def norm_l2(self):
        return float(np.sqrt(self.inner(self).real))

    def norm_h1(self):
        """Lattice H1 norm: L2 of the trace plus its temporal and tangential
        first differences."""
        tot = 0.0
        for f in FACES:
            w = self._face_weights(f)
            v = self.faces[f]
            dt = np.gradient(v, self.grid.h_t, axis=0)
            ds = np.gradient(v, self.grid.h_x, axis=1)
            tot += np.sum(w * (np.abs(v) ** 2 + np.abs(dt) ** 2 + np.abs(ds) ** 2)).real
        return float(np.sqrt(tot))

    def max_abs(self):
        return max(float(np.max(np.abs(self.faces[f]))) for f in FACES)

    def early_time_mass(self, levels=2, end="start"):
        """Max modulus over the first (or last) time levels; used to check the
        vanishing-near-T1 / T2 invariants."""
        sl = slice(0, levels) if end == "start" else slice(-levels, None)
        return max(float(np.max(np.abs(self.faces[f][sl]))) for f in FACES)
