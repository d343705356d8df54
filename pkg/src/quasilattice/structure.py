"""Connected correlations on the tiling and the susceptibility and Bragg maps.

Ising spins sit on the even vertices (index 2 or 4). For two spins a and b the
lines crossing between them are fixed by Delta K = K(b) - K(a): grid j
contributes |Delta K_j| lines whose rapidity is the direction of the step
sign(Delta K_j) e_j, converted to rapidity units. So the correlation depends
on Delta K alone, and the susceptibility sum collapses onto distinct Delta K.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .elliptic import HIGH, LOW
from .errors import MixedParity, TruncationExceedsPatch
from .ising.correlations import CorrelationTable, RapidityMultiset, g_correlation
from .ising.couplings import grid_rapidity, order_parameter


@dataclass(frozen=True)
class RapidityAssignment:
    """Rapidity of each grid from its direction; a reversed grid gains K(k')."""

    quarter_period: float
    n: int = 5

    @classmethod
    def for_params(cls, params, n=5):
        return cls(params.quarter_period, n)

    def rapidity(self, j, flipped=False):
        step = 2.0 * math.pi / self.n if self.n % 2 else math.pi / self.n
        u = j * step * self.quarter_period / math.pi
        return u + self.quarter_period if flipped else u


def crossing_from_delta(assign, delta):
    """Rapidity multiset of the lines crossed when the integer vector changes by ``delta``."""
    raps = []
    for j, dk in enumerate(delta):
        dk = int(dk)
        if dk:
            raps.extend([assign.rapidity(j, flipped=dk < 0)] * abs(dk))
    return RapidityMultiset.normalized(raps, assign.quarter_period)


def crossing_rapidities(patch, assign, a, b):
    """Crossing multiset between tiling vertices a and b of the same parity."""
    if a.parity != b.parity:
        raise MixedParity(f"vertices of index {a.index} and {b.index} lie on different sublattices")
    delta = np.array(b.kvec.components) - np.array(a.kvec.components)
    return crossing_from_delta(assign, delta)


@dataclass(frozen=True)
class SpinPair:
    a: object
    b: object
    crossing: RapidityMultiset
    displacement: complex


def spin_pair(patch, assign, a, b):
    return SpinPair(a, b, crossing_rapidities(patch, assign, a, b), b.position - a.position)


def connected_correlation(pair, params, table):
    """g(crossing) minus the squared order parameter."""
    rap = pair.crossing if isinstance(pair, SpinPair) else pair
    return g_correlation(table, params, rap) - order_parameter(params) ** 2


def q_axis(qmin, qmax, n):
    """n samples over [qmin, qmax], placed exactly symmetric about the midpoint."""
    h = (qmax - qmin) / (n - 1)
    mid = 0.5 * (qmin + qmax)
    return mid + (np.arange(n) - 0.5 * (n - 1)) * h


@dataclass(frozen=True)
class QGrid:
    qmin: float = -4.0 * math.pi
    qmax: float = 4.0 * math.pi
    n: int = 128

    @property
    def axis(self):
        return q_axis(self.qmin, self.qmax, self.n)

    @property
    def spacing(self):
        return (self.qmax - self.qmin) / (self.n - 1)


@dataclass
class PairSummary:
    """Spin pairs within the truncation radius, grouped by integer-vector difference.

    ``deltas`` holds each distinct Delta K once (both orientations appear),
    ``counts`` the number of ordered pairs with that difference and
    ``displacements`` the physical separation.
    """

    n_spins: int
    truncation: float
    deltas: np.ndarray
    counts: np.ndarray
    displacements: np.ndarray
    spin_positions: np.ndarray


def spin_sites(patch, parity="even"):
    mask = patch.even_mask if parity == "even" else ~patch.even_mask
    return patch.positions[mask], patch.kvecs[mask]


def _ordered_pairs(pos, truncation):
    tree = cKDTree(np.c_[pos.real, pos.imag])
    pairs = tree.query_pairs(truncation, output_type="ndarray")
    return pairs


def pair_summary(patch, truncation, parity="even"):
    """Group all ordered spin pairs (including a spin with itself) by Delta K."""
    pos, kv = spin_sites(patch, parity)
    extent = float(np.abs(pos).max()) if len(pos) else 0.0
    if truncation > extent:
        raise TruncationExceedsPatch(f"truncation {truncation} exceeds the patch extent {extent:.2f}")
    pairs = _ordered_pairs(pos, truncation)
    d = kv[pairs[:, 1]] - kv[pairs[:, 0]]
    d = np.concatenate([d, -d, np.zeros((1, kv.shape[1]), dtype=kv.dtype)])
    weights = np.concatenate([np.ones(2 * len(pairs), dtype=np.int64), [len(pos)]])
    uniq, inverse = np.unique(d, axis=0, return_inverse=True)
    counts = np.bincount(np.ravel(inverse), weights=weights).astype(np.int64)
    disp = uniq.astype(float) @ patch.pentagrid.directions
    return PairSummary(len(pos), float(truncation), uniq, counts, disp, pos)


def class_correlations(summary, params, table, n=5):
    """Connected correlation for every distinct Delta K, grouped by the (Delta K_0, Delta K_1) class.

    Each translation class of the grid 0/1 lattice is handled together; within
    it every distinct crossing multiset is evaluated separately.
    """
    assign = RapidityAssignment.for_params(params, n)
    m2 = order_parameter(params) ** 2
    out = np.empty(len(summary.deltas))
    classes = {}
    for i, dk in enumerate(summary.deltas):
        classes.setdefault((int(dk[0]), int(dk[1])), []).append(i)
    for members in classes.values():
        for i in members:
            rap = crossing_from_delta(assign, summary.deltas[i])
            out[i] = g_correlation(table, params, rap) - m2
    return out, classes


def _chi_on_points(displacements, weights, qx, qy, threads=1, chunk=4096):
    """sum_d w_d cos(q . d) at arbitrary q points (flattened)."""
    qx = np.ravel(qx)
    qy = np.ravel(qy)
    dx, dy = displacements.real, displacements.imag
    out = np.empty(len(qx))

    def work(lo):
        hi = min(lo + chunk, len(qx))
        phase = np.outer(qx[lo:hi], dx) + np.outer(qy[lo:hi], dy)
        out[lo:hi] = np.cos(phase) @ weights

    starts = range(0, len(qx), chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return out


@dataclass
class ChiMap:
    q_grid: QGrid
    values: np.ndarray               # (n, n), axis 0 = q_x, axis 1 = q_y
    params: object
    patch_descriptor: dict
    truncation: float
    truncation_error: float
    summary: PairSummary = field(repr=False, default=None)
    correlations: np.ndarray = field(repr=False, default=None)

    def evaluate(self, qx, qy):
        """The same estimator at arbitrary wavevectors."""
        w = self.summary.counts * self.correlations / self.summary.n_spins
        shape = np.shape(qx)
        return _chi_on_points(self.summary.displacements, w, qx, qy).reshape(shape)


def patch_descriptor(patch):
    return {"n": patch.pentagrid.n, "gamma": list(patch.pentagrid.offsets),
            "radius": patch.radius, "rhombi": patch.n_rhombi, "vertices": patch.n_vertices}


def chi_map(patch, params, q_grid=None, truncation=8.0, table=None, threads=1, summary=None):
    """Finite-patch estimate of beta chi(q) from pairs within ``truncation``.

    chi(q) = (1/N) sum_{pairs} cos(q . (r' - r)) [g - M^2], N the spin count.
    The error estimate is the absolute weight of the outermost unit shell.
    """
    q_grid = q_grid or QGrid()
    summary = summary or pair_summary(patch, truncation)
    if table is None:
        n_max = max(1, int(np.abs(summary.deltas).sum(axis=1).max()) // 2)
        table = CorrelationTable(n_max=n_max)
    corr, _ = class_correlations(summary, params, table, patch.pentagrid.n)
    w = summary.counts * corr / summary.n_spins
    ax = q_grid.axis
    qx, qy = np.meshgrid(ax, ax, indexing="ij")
    vals = _chi_on_points(summary.displacements, w, qx, qy, threads).reshape(qx.shape)
    dist = np.abs(summary.displacements)
    shell = dist > truncation - 1.0
    err = float(np.abs(w[shell]).sum())
    return ChiMap(q_grid, vals, params, patch_descriptor(patch), float(truncation), err, summary, corr)


def chi_naive(patch, params, qx, qy, truncation, table):
    """Pair-by-pair double sum at the given wavevectors; reference for the grouped path."""
    pos, kv = spin_sites(patch)
    assign = RapidityAssignment.for_params(params, patch.pentagrid.n)
    qx = np.ravel(np.asarray(qx, dtype=float))
    qy = np.ravel(np.asarray(qy, dtype=float))
    m2 = order_parameter(params) ** 2
    total = np.zeros(len(qx))
    pairs = _ordered_pairs(pos, truncation)
    for a, b in pairs:
        rap = crossing_from_delta(assign, kv[b] - kv[a])
        c = g_correlation(table, params, rap) - m2
        d = pos[b] - pos[a]
        # the reversed pair has the same correlation and opposite displacement
        total += 2.0 * c * np.cos(qx * d.real + qy * d.imag)
    total += len(pos) * (1.0 - m2)
    return total / len(pos)


def bragg_map(patch, params, q_grid=None, threads=1, chunk=1024):
    """k'^(1/2) |sum_r exp(i q . r)|^2 / N over the even spins; zero above criticality."""
    q_grid = q_grid or QGrid()
    ax = q_grid.axis
    if params.regime == HIGH:
        return np.zeros((len(ax), len(ax)))
    pos, _ = spin_sites(patch)
    qx, qy = np.meshgrid(ax, ax, indexing="ij")
    qx, qy = qx.ravel(), qy.ravel()
    out = np.empty(len(qx))

    def work(lo):
        hi = min(lo + chunk, len(qx))
        amp = np.exp(1j * (np.outer(qx[lo:hi], pos.real) + np.outer(qy[lo:hi], pos.imag))).sum(axis=1)
        out[lo:hi] = np.abs(amp) ** 2

    starts = range(0, len(qx), chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return (order_parameter(params) ** 2 * out / len(pos)).reshape(len(ax), len(ax))


def local_maxima(values):
    """Indices of strict-or-equal 3x3 local maxima away from the border."""
    v = values
    core = v[1:-1, 1:-1]
    ok = np.ones_like(core, dtype=bool)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx or dy:
                ok &= core >= v[1 + dx:v.shape[0] - 1 + dx, 1 + dy:v.shape[1] - 1 + dy]
    idx = np.argwhere(ok) + 1
    return idx


def peak_rotation_check(chi, top=20, angle=math.pi / 5, radius=None):
    """Fraction of the strongest peaks whose rotation by ``angle`` lands within one cell of a local maximum.

    Only peaks inside the inscribed disk are used, so rotated positions stay in the window.
    """
    g = chi.q_grid
    ax = g.axis
    radius = radius if radius is not None else min(abs(g.qmin), abs(g.qmax)) - g.spacing
    peaks = local_maxima(chi.values)
    qxy = ax[peaks]
    inside = np.hypot(qxy[:, 0], qxy[:, 1]) <= radius
    peaks, qxy = peaks[inside], qxy[inside]
    order = np.argsort(-chi.values[peaks[:, 0], peaks[:, 1]])
    chosen = order[:top]
    c, s = math.cos(angle), math.sin(angle)
    hits = 0
    for i in chosen:
        x, y = qxy[i]
        rx, ry = c * x - s * y, s * x + c * y
        fx = (rx - ax[0]) / g.spacing
        fy = (ry - ax[0]) / g.spacing
        near = np.max(np.abs(peaks - np.array([fx, fy])), axis=1) <= 1.0 + 1e-9
        hits += bool(near.any())
    return hits / max(len(chosen), 1), len(chosen)
