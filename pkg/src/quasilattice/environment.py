"""Parallelogram environments of the pentagrid.

Grids 0 and 1 cut the plane into parallelograms P(k0, k1), bounded by lines
k0 - 1, k0 of grid 0 and k1 - 1, k1 of grid 1. Lines of grids 2, 3, 4 split
each parallelogram in one of 24 combinatorially distinct ways. Which one
depends only on the fractional parts of two affine labels (alpha, beta), so
configuration probabilities are areas in the unit square.

Local coordinates: p = x0 - k0 and q = x1 - k1, both in [-1, 0]. With these,
grid 2 lines are alpha + q/tau - p in Z, grid 4 lines beta + p/tau - q in Z and
grid 3 lines alpha + beta + (p + q)/tau in Z.
"""

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import IrregularPentagrid
from .pentagrid import EVEN, ODD, IntegerVector
from .sequences import TAU

TAU_INV = 1.0 / TAU
N_CLASSES = 24
FAMILIES = (2, 3, 4)
_EDGE_TOL = 1e-12
_SCAN_RESOLUTION = 256

# corners in boundary order, starting at the extreme corner z_c, as (p, q)
_CORNERS = ((0.0, 0.0), (-1.0, 0.0), (-1.0, -1.0), (0.0, -1.0))


def alpha_beta(grid, k0, k1):
    """The affine labels (alpha, beta) of P(k0, k1). Vectorizes over k0, k1."""
    g = grid.offsets
    alpha = TAU_INV * (np.asarray(k1) - g[1]) + g[0] + g[2]
    beta = TAU_INV * (np.asarray(k0) - g[0]) + g[1] + g[4]
    if np.ndim(alpha) == 0:
        return float(alpha), float(beta)
    return alpha, beta


def frac(x):
    return np.asarray(x) - np.floor(x)


def corner_parity(alpha, beta):
    """Sublattice of the mesh at the extreme corner: even iff {alpha} + {beta} < 1."""
    return EVEN if float(frac(alpha) + frac(beta)) < 1.0 else ODD


def reference_vector(grid, k0, k1):
    """The index-2 reference integer vector of P(k0, k1)."""
    a, b = alpha_beta(grid, k0, k1)
    ca, cb = math.ceil(a), math.ceil(b)
    return IntegerVector((k0, k1, ca - k0, -math.floor(a) - math.floor(b), cb - k1))


def corner_vector(grid, k0, k1):
    """Integer vector of the mesh touching the extreme corner z_c from inside P."""
    a, b = alpha_beta(grid, k0, k1)
    return IntegerVector((k0, k1, math.ceil(a) - k0, math.ceil(-a - b), math.ceil(b) - k1))


def _local_corner_values(fa, fb):
    """Grid 2, 3, 4 phases at the four corners, shape (N, 3, 4), from fractional labels."""
    fa = np.atleast_1d(np.asarray(fa, dtype=float))
    fb = np.atleast_1d(np.asarray(fb, dtype=float))
    out = np.empty((len(fa), 3, 4))
    for c, (p, q) in enumerate(_CORNERS):
        out[:, 0, c] = fa + TAU_INV * q - p
        out[:, 1, c] = -fa - fb - TAU_INV * (p + q)
        out[:, 2, c] = fb + TAU_INV * p - q
    return out


def _grid_corner_values(grid, k0, k1):
    """Grid 2, 3, 4 phases at the actual corners of P(k0, k1), shape (N, 3, 4)."""
    k0 = np.atleast_1d(np.asarray(k0))
    k1 = np.atleast_1d(np.asarray(k1))
    d = grid.directions
    det = d[0].real * d[1].imag - d[0].imag * d[1].real
    out = np.empty((len(k0), 3, 4))
    for c, (p, q) in enumerate(_CORNERS):
        a = k0 + p - grid.offsets[0]
        b = k1 + q - grid.offsets[1]
        z = ((a * d[1].imag - b * d[0].imag) + 1j * (d[0].real * b - d[1].real * a)) / det
        coords = grid.coordinates(z)
        out[:, :, c] = coords[:, list(FAMILIES)]
    return out


@dataclass(frozen=True)
class _Arrangement:
    signatures: np.ndarray   # (N, 12) int tokens, -1 padded
    mesh_counts: np.ndarray  # (N,)


def _arrangement(vals, tol=None):
    """Boundary signature of the chord arrangement for each row of corner values.

    Each line crossing P is a chord with two endpoints on the boundary. Walking
    the boundary from z_c, every endpoint is written as side * 100 + grid * 10 +
    label, where label numbers chords in order of first appearance. Straight
    chords in a convex region cross iff their endpoints interleave, so this
    sequence fixes the arrangement up to isotopy.
    """
    n = vals.shape[0]
    if tol is not None:
        dist = np.abs(vals - np.round(vals))
        bad = np.argwhere(dist <= tol)
        if len(bad):
            i, f, c = bad[0]
            raise IrregularPentagrid(
                f"a line of grid {FAMILIES[f]} passes through corner {c} of the parallelogram "
                f"(row {i})")
    lo = np.floor(vals.min(axis=2))
    hi = vals.max(axis=2)
    # at most two lines of each family cross P
    chord_t = np.full((n, 6, 2), np.nan)
    chord_fam = np.repeat(np.array(FAMILIES), 2)
    for f in range(3):
        for slot in range(2):
            level = lo[:, f] + 1 + slot
            valid = level < hi[:, f]
            ends = []
            for side in range(4):
                v0 = vals[:, f, side]
                v1 = vals[:, f, (side + 1) % 4]
                with np.errstate(divide="ignore", invalid="ignore"):
                    frac_pos = (level - v0) / (v1 - v0)
                hit = valid & (frac_pos > 0) & (frac_pos < 1)
                ends.append(np.where(hit, side + frac_pos, np.nan))
            ends = np.stack(ends, axis=1)
            ends.sort(axis=1)
            chord_t[:, 2 * f + slot, :] = ends[:, :2]
    present = ~np.isnan(chord_t[:, :, 0])
    # label chords by first appearance along the boundary
    first = np.where(present, chord_t[:, :, 0], np.inf)
    order = np.argsort(first, axis=1, kind="stable")
    label = np.empty_like(order)
    np.put_along_axis(label, order, np.arange(6)[None, :].repeat(n, 0), axis=1)
    t_all = chord_t.reshape(n, 12)
    chord_of = np.tile(np.repeat(np.arange(6), 2), (n, 1))
    key = np.where(np.isnan(t_all), np.inf, t_all)
    ev = np.argsort(key, axis=1, kind="stable")
    t_sorted = np.take_along_axis(key, ev, axis=1)
    ch = np.take_along_axis(chord_of, ev, axis=1)
    side = np.floor(np.where(np.isfinite(t_sorted), t_sorted, 0)).astype(int)
    tok = side * 100 + chord_fam[ch] * 10 + np.take_along_axis(label, ch, axis=1)
    tok = np.where(np.isfinite(t_sorted), tok, -1)
    # interior crossings: chords i, j cross iff exactly one endpoint of j lies inside i
    crossings = np.zeros(n, dtype=int)
    for i in range(6):
        a1, a2 = chord_t[:, i, 0], chord_t[:, i, 1]
        for j in range(i + 1, 6):
            b1, b2 = chord_t[:, j, 0], chord_t[:, j, 1]
            both = present[:, i] & present[:, j]
            x = ((a1 < b1) & (b1 < a2)) != ((a1 < b2) & (b2 < a2))
            crossings += both & x
    meshes = 1 + present.sum(axis=1) + crossings
    return _Arrangement(tok, meshes)


def signature_string(tokens):
    return " ".join(f"{t:03d}" for t in tokens if t >= 0)


@dataclass(frozen=True)
class EnvConfig:
    id: int
    mesh_count: int
    signature: str
    corner_parity: str
    reference_inside: bool


def _reference_inside(fa, fb):
    """Whether the reference mesh (index 2) lies inside the unit parallelogram.

    Solved as a small linear feasibility problem on the open cell.
    """
    from scipy.optimize import linprog

    ca, cb = math.ceil(fa), math.ceil(fb)
    k3 = -math.floor(fa) - math.floor(fb)
    # maximize slack s subject to each phase staying inside (ceil - 1 + s, ceil - s)
    rows, rhs = [], []

    def interval(coef_p, coef_q, const, target):
        # target - 1 + s <= const + cp p + cq q <= target - s
        rows.append([coef_p, coef_q, 1.0])
        rhs.append(target - const)
        rows.append([-coef_p, -coef_q, 1.0])
        rhs.append(const - target + 1)

    interval(-1.0, TAU_INV, fa, ca)
    interval(TAU_INV, -1.0, fb, cb)
    interval(-TAU_INV, -TAU_INV, -fa - fb, k3)
    res = linprog([0, 0, -1], A_ub=rows, b_ub=rhs,
                  bounds=[(-1, 0), (-1, 0), (None, 1)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9)


def _build_table(resolution=_SCAN_RESOLUTION):
    """First-encounter scan over pixel centres of the ({alpha}, {beta}) square, row-major in alpha."""
    c = (np.arange(resolution) + 0.5) / resolution
    fa, fb = np.meshgrid(c, c, indexing="ij")
    fa, fb = fa.ravel(), fb.ravel()
    arr = _arrangement(_local_corner_values(fa, fb))
    _, first_idx = np.unique(arr.signatures, axis=0, return_index=True)
    entries = []
    for cid, i in enumerate(sorted(first_idx), start=1):
        entries.append({
            "id": cid,
            "signature": signature_string(arr.signatures[i]),
            "mesh_count": int(arr.mesh_counts[i]),
            "corner_parity": corner_parity(fa[i], fb[i]),
            "reference_inside": _reference_inside(float(fa[i]), float(fb[i])),
            "sample": [float(fa[i]), float(fb[i])],
        })
    return {"scan_resolution": resolution, "classes": entries}


@lru_cache(maxsize=1)
def config_table():
    """The frozen id <-> signature table shipped with the package."""
    text = resources.files("quasilattice.data").joinpath("config_classes.json").read_text()
    data = json.loads(text)
    return tuple(EnvConfig(e["id"], e["mesh_count"], e["signature"], e["corner_parity"],
                           e["reference_inside"]) for e in data["classes"])


@lru_cache(maxsize=1)
def _token_lookup():
    keys = {}
    for cfg in config_table():
        toks = [int(t) for t in cfg.signature.split()]
        keys[tuple(toks + [-1] * (12 - len(toks)))] = cfg.id
    return keys


def _row_hash(sigs):
    h = np.zeros(len(sigs), dtype=np.uint64)
    mult = np.uint64(1099511628211)
    with np.errstate(over="ignore"):
        for col in (sigs + 1).astype(np.uint64).T:
            h = h * mult + col
    return h


def _ids_from_signatures(sigs):
    # hash rows for speed, then confirm every row equals its group representative
    uniq, first, inverse = np.unique(_row_hash(sigs), return_index=True, return_inverse=True)
    inverse = np.ravel(inverse)
    reps = sigs[first]
    if not np.array_equal(sigs, reps[inverse]):
        raise RuntimeError("signature hash collision")
    lookup = _token_lookup()
    ids = np.empty(len(uniq), dtype=int)
    for i, row in enumerate(reps):
        key = tuple(int(t) for t in row)
        if key not in lookup:
            raise KeyError(f"signature {signature_string(row)!r} not in the frozen table")
        ids[i] = lookup[key]
    return ids[np.ravel(inverse)]


def classify_fractional(fa, fb):
    """Class ids for fractional labels ({alpha}, {beta}); vectorized."""
    return _ids_from_signatures(_arrangement(_local_corner_values(fa, fb)).signatures)


def classify_many(grid, k0, k1):
    """Class ids and mesh counts of P(k0, k1), computed from the actual line arrangement."""
    vals = _grid_corner_values(grid, k0, k1)
    arr = _arrangement(vals, tol=grid.regularity_tolerance)
    return _ids_from_signatures(arr.signatures), arr.mesh_counts


def classify(grid, k0, k1):
    ids, _ = classify_many(grid, [k0], [k1])
    return config_table()[int(ids[0]) - 1]


@dataclass(frozen=True)
class RegionMap:
    resolution: int
    ids: np.ndarray     # (resolution, resolution), axis 0 = {alpha}, axis 1 = {beta}
    areas: np.ndarray   # (24,) indexed by id - 1


def _pixel_centres(resolution):
    c = (np.arange(resolution) + 0.5) / resolution
    fa, fb = np.meshgrid(c, c, indexing="ij")
    return fa.ravel(), fb.ravel()


def config_regions(grid=None, resolution=512):
    """Rasterized class map of the unit square and the per-class areas.

    The map itself does not depend on the offsets; ``grid`` is accepted for
    interface symmetry.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    fa, fb = _pixel_centres(resolution)
    ids = classify_fractional(fa, fb)
    areas = np.bincount(ids - 1, minlength=N_CLASSES) / ids.size
    return RegionMap(resolution, ids.reshape(resolution, resolution), areas)


@dataclass(frozen=True)
class JointProbMatrix:
    delta: tuple
    probs: np.ndarray
    resolution_error: float
    shift: tuple


def _joint(resolution, shift):
    fa, fb = _pixel_centres(resolution)
    a = classify_fractional(fa, fb)
    b = classify_fractional(frac(fa + shift[0]), frac(fb + shift[1]))
    m = np.zeros((N_CLASSES, N_CLASSES))
    np.add.at(m, (a - 1, b - 1), 1.0)
    return m / a.size


def joint_probability(grid=None, dk0=0, dk1=0, resolution=512):
    """24 x 24 matrix of P(config(k0, k1) = a, config(k0 + dk0, k1 + dk1) = b).

    The error estimate is the largest entry change against half resolution.
    """
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    shift = (float(frac(TAU_INV * dk1)), float(frac(TAU_INV * dk0)))
    probs = _joint(resolution, shift)
    coarse = _joint(resolution // 2, shift)
    err = float(np.abs(probs - coarse).max())
    return JointProbMatrix((int(dk0), int(dk1)), probs, err, shift)


def census(grid, samples, seed=1, span=10**6):
    """Classify ``samples`` random parallelograms; returns (ids, mesh_counts, k0, k1)."""
    rng = np.random.default_rng(seed)
    k0 = rng.integers(-span, span, size=samples)
    k1 = rng.integers(-span, span, size=samples)
    ids, meshes = classify_many(grid, k0, k1)
    return ids, meshes, k0, k1
