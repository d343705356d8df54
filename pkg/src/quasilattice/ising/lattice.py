"""Finite spin graphs for the oracles, and rhombic Z-invariant embeddings.

A rhombic lattice is built from two families of rapidity lines: columns with
edge directions exp(i alpha_i) and rows with directions exp(i beta_j). Tiling
vertices sit at z(i, j) = sum_{i' < i} exp(i alpha_i') + sum_{j' < j} exp(i beta_j');
spins occupy the vertices with (i + j) % 2 == parity, and every rhombus
contributes the coupling along its spin diagonal.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .couplings import angle_couplings


@dataclass
class SpinGraph:
    """Ising spins with nearest-neighbour couplings beta J.

    ``boundary`` lists spins, in cyclic order along the outer face, that are
    all forced to the same value (plus boundary conditions). ``layers`` gives
    a column index per spin for transfer-matrix sweeps; couplings may only
    join equal or adjacent layers. ``coords`` holds the integer (i, j) labels
    when the graph comes from a rhombic lattice.
    """

    positions: np.ndarray
    edges: np.ndarray
    couplings: np.ndarray
    boundary: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    layers: np.ndarray = None
    coords: np.ndarray = None

    @property
    def n_spins(self):
        return len(self.positions)

    @property
    def n_free(self):
        return self.n_spins - len(self.boundary)

    def index_of(self, i, j):
        hit = np.flatnonzero((self.coords[:, 0] == i) & (self.coords[:, 1] == j))
        if not len(hit):
            raise KeyError(f"no spin at ({i}, {j})")
        return int(hit[0])


def two_spin_graph(beta_j):
    return SpinGraph(np.array([0j, 1 + 0j]), np.array([[0, 1]]), np.array([float(beta_j)]))


def rhombic_lattice(params, column_angles, row_angles, parity=0, boundary="free"):
    """Spin graph of the rhombic lattice spanned by the given column and row directions.

    Every row direction must exceed every column direction by an angle in
    (0, pi). ``boundary`` is "free" or "plus".
    """
    alphas = np.asarray(column_angles, dtype=float)
    betas = np.asarray(row_angles, dtype=float)
    gap = betas[None, :] - alphas[:, None]
    if np.any(gap <= 0) or np.any(gap >= math.pi):
        raise ValueError("row directions must lie strictly between 0 and pi counter-clockwise of columns")
    n1, n2 = len(alphas), len(betas)
    ca = np.concatenate([[0], np.cumsum(np.exp(1j * alphas))])
    cb = np.concatenate([[0], np.cumsum(np.exp(1j * betas))])
    ii, jj = np.meshgrid(np.arange(n1 + 1), np.arange(n2 + 1), indexing="ij")
    spin = (ii + jj) % 2 == parity
    coords = np.stack([ii[spin], jj[spin]], axis=1)
    ids = -np.ones((n1 + 1, n2 + 1), dtype=int)
    ids[coords[:, 0], coords[:, 1]] = np.arange(len(coords))
    positions = ca[coords[:, 0]] + cb[coords[:, 1]]

    ri, rj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    ri, rj = ri.ravel(), rj.ravel()
    on = (ri + rj) % 2 == parity
    a = np.where(on, ids[ri, rj], ids[ri + 1, rj])
    b = np.where(on, ids[ri + 1, rj + 1], ids[ri, rj + 1])
    theta = np.where(on, gap[ri, rj], math.pi - gap[ri, rj])
    edges = np.stack([a, b], axis=1)
    couplings = angle_couplings(params, theta)

    if boundary == "plus":
        ring = []
        for i in range(n1 + 1):
            ring.append((i, 0))
        for j in range(1, n2 + 1):
            ring.append((n1, j))
        for i in range(n1 - 1, -1, -1):
            ring.append((i, n2))
        for j in range(n2 - 1, 0, -1):
            ring.append((0, j))
        bnd = np.array([ids[i, j] for i, j in ring if ids[i, j] >= 0])
    elif boundary == "free":
        bnd = np.zeros(0, dtype=int)
    else:
        raise ValueError("boundary must be 'free' or 'plus'")
    return SpinGraph(positions, edges, couplings, bnd, coords[:, 0].copy(), coords)


def embedding_angles(rapidity_angles, margin):
    """Column and row directions that embed the given crossing pattern with square margins.

    The pattern's columns are flanked by ``margin`` columns on each side, and
    ``2 * margin`` rows run across; all angles in radians.
    """
    angs = np.asarray(rapidity_angles, dtype=float)
    lo, hi = float(angs.min()), float(angs.max())
    if hi - lo >= math.pi:
        raise ValueError("crossing directions must fit in an open half-turn")
    beta = lo + 0.5 * math.pi + 0.5 * (hi - lo)
    side = np.full(margin, beta - 0.5 * math.pi)
    return np.concatenate([side, angs, side]), np.full(2 * margin, beta)
