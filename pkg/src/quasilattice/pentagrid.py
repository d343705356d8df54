"""Pentagrids, n-fold multigrids and their dual rhombus tilings.

Grid j consists of the lines Re(z * conj(e_j)) + gamma_j = k, k integer,
where e_j is the j-th unit direction. A mesh (face) of the arrangement
carries the integer vector K_j(z) = ceil(Re(z * conj(e_j)) + gamma_j); the
tiling vertex of that mesh is sum_j K_j e_j. Every pairwise line
intersection becomes a unit rhombus spanned by e_r and e_s.
"""

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import IrregularIntersection, IrregularPentagrid, OnGridLine

DEFAULT_OFFSETS = (0.17, 0.23, -0.37, 0.11, -0.14)
DEFAULT_TOLERANCE = 1e-9

FAT, SKINNY = "fat", "skinny"
EVEN, ODD = "even", "odd"


def grid_directions(n):
    """Unit normals of the n grids.

    Odd n uses the n-th roots of unity (so n = 5 gives zeta**j with
    zeta = exp(2 pi i / 5)); even n uses exp(i pi j / n), because the roots of
    unity would pair up into parallel grids.
    """
    if n < 4:
        raise ValueError("symmetry order must be at least 4")
    step = 2.0 * math.pi / n if n % 2 else math.pi / n
    return np.exp(1j * step * np.arange(n))


@dataclass(frozen=True)
class Pentagrid:
    """n families of unit-spaced parallel lines with phase offsets.

    For n = 5 the offsets must sum to zero (the Penrose condition).
    Regularity is not assumed; patch generation checks it.
    """

    offsets: tuple = DEFAULT_OFFSETS
    symmetry_order: int = 5
    regularity_tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(float(g) for g in self.offsets))
        if len(self.offsets) != self.symmetry_order:
            raise ValueError(
                f"need {self.symmetry_order} offsets, got {len(self.offsets)}")
        if self.symmetry_order == 5 and abs(sum(self.offsets)) > 1e-9:
            raise ValueError(f"pentagrid offsets must sum to 0, got {sum(self.offsets)!r}")
        if self.regularity_tolerance <= 0:
            raise ValueError("regularity_tolerance must be positive")

    @property
    def n(self):
        return self.symmetry_order

    @cached_property
    def directions(self):
        return grid_directions(self.symmetry_order)

    @cached_property
    def gamma(self):
        return np.array(self.offsets)

    def coordinates(self, z):
        """Grid-phase coordinates Re(z conj(e_j)) + gamma_j, shape (..., n)."""
        z = np.asarray(z, dtype=complex)[..., None]
        return (z * np.conj(self.directions)).real + self.gamma

    def intersection(self, r, k_r, s, k_s):
        """Point where line k_r of grid r meets line k_s of grid s."""
        er, es = self.directions[r], self.directions[s]
        a, b = k_r - self.offsets[r], k_s - self.offsets[s]
        det = er.real * es.imag - er.imag * es.real
        if abs(det) < 1e-15:
            raise ValueError(f"grids {r} and {s} are parallel")
        x = (a * es.imag - b * er.imag) / det
        y = (er.real * b - es.real * a) / det
        return complex(x, y)


@dataclass(frozen=True)
class IntegerVector:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(int(c) for c in self.components))

    @property
    def index(self):
        return sum(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, j):
        return self.components[j]

    def __iter__(self):
        return iter(self.components)


def parity_of_index(index):
    return EVEN if index % 2 == 0 else ODD


@dataclass(frozen=True)
class TilingVertex:
    kvec: IntegerVector
    position: complex

    @property
    def index(self):
        return self.kvec.index

    @property
    def parity(self):
        return parity_of_index(self.kvec.index)


@dataclass(frozen=True)
class Rhombus:
    """Dual of the intersection of line lines[0] of grid grids[0] and lines[1] of grids[1].

    Corners are in cyclic order K, K+e_r, K+e_r+e_s, K+e_s.
    """

    grids: tuple
    lines: tuple
    shape: str
    corners: tuple
    acute_angle: float = field(default=0.0, compare=False)

    def polygon(self):
        return np.array([c.position for c in self.corners])

    def side_lengths(self):
        p = self.polygon()
        return np.abs(np.roll(p, -1) - p)

    def area(self):
        p = self.polygon()
        return 0.5 * abs(np.sum(p.real * np.roll(p.imag, -1) - np.roll(p.real, -1) * p.imag))


def rhombus_shape(directions, r, s):
    """Shape label and acute interior angle of the rhombus spanned by e_r, e_s."""
    ang = abs(cmath.phase(directions[s] / directions[r]))
    acute = min(ang, math.pi - ang)
    n = len(directions)
    if n == 5:
        label = SKINNY if acute < 0.3 * math.pi else FAT
    else:
        label = f"angle{round(acute * n / math.pi)}"
    return label, acute


def _check_modulo(coords, tol, what):
    dist = np.abs(coords - np.round(coords))
    return dist <= tol


def mesh_vector(grid, point):
    """Integer vector of the mesh containing ``point``."""
    coords = grid.coordinates(complex(point))
    on_line = _check_modulo(coords, grid.regularity_tolerance, "mesh")
    if on_line.any():
        j = int(np.flatnonzero(on_line)[0])
        raise OnGridLine(f"point {point!r} lies on a line of grid {j}")
    return IntegerVector(np.ceil(coords).astype(int))


def vertex_position(kvec, directions=None):
    """Tiling vertex sum_j K_j e_j (default: the pentagrid directions)."""
    comps = np.asarray(tuple(kvec), dtype=float)
    if directions is None:
        directions = grid_directions(len(comps))
    return complex(np.dot(comps, directions))


def _unit(n, j):
    e = np.zeros(n, dtype=int)
    e[j] = 1
    return e


def dualize_intersection(grid, r, k_r, s, k_s):
    """Rhombus dual to the crossing of line k_r (grid r) and line k_s (grid s)."""
    if r == s:
        raise ValueError("need two distinct grids")
    z0 = grid.intersection(r, k_r, s, k_s)
    coords = grid.coordinates(z0)
    others = [t for t in range(grid.n) if t not in (r, s)]
    bad = _check_modulo(coords[others], grid.regularity_tolerance, "dual")
    if bad.any():
        t = others[int(np.flatnonzero(bad)[0])]
        raise IrregularIntersection(
            f"line {int(round(coords[t]))} of grid {t} passes through the crossing "
            f"of grids {r},{s} at {z0!r}")
    base = np.ceil(coords).astype(int)
    base[r], base[s] = k_r, k_s
    er, es = _unit(grid.n, r), _unit(grid.n, s)
    corners = []
    for off in (0 * er, er, er + es, es):
        kv = IntegerVector(base + off)
        corners.append(TilingVertex(kv, vertex_position(kv, grid.directions)))
    shape, acute = rhombus_shape(grid.directions, r, s)
    return Rhombus((r, s), (int(k_r), int(k_s)), shape, tuple(corners), acute)


@dataclass
class TilingPatch:
    """Rhombi dual to every line crossing with |z0| <= radius.

    Arrays are the primary storage; ``vertices`` and ``rhombi`` build the
    object views on demand.
    """

    pentagrid: Pentagrid
    radius: float
    kvecs: np.ndarray          # (V, n) int
    positions: np.ndarray      # (V,) complex
    rhombus_grids: np.ndarray  # (R, 2) int
    rhombus_lines: np.ndarray  # (R, 2) int
    corner_ids: np.ndarray     # (R, 4) int, cyclic order
    crossings: np.ndarray      # (R,) complex, intersection points z0

    @property
    def indices(self):
        return self.kvecs.sum(axis=1)

    @property
    def even_mask(self):
        return self.indices % 2 == 0

    @cached_property
    def shapes(self):
        d = self.pentagrid.directions
        table = {}
        out = []
        for r, s in map(tuple, self.rhombus_grids):
            if (r, s) not in table:
                table[(r, s)] = rhombus_shape(d, r, s)
            out.append(table[(r, s)][0])
        return np.array(out, dtype=object)

    def shape_counts(self):
        labels, counts = np.unique(self.shapes.astype(str), return_counts=True) if len(self.shapes) else ([], [])
        return dict(zip(map(str, labels), map(int, counts)))

    @property
    def n_vertices(self):
        return len(self.kvecs)

    @property
    def n_rhombi(self):
        return len(self.corner_ids)

    @cached_property
    def vertices(self):
        return [TilingVertex(IntegerVector(k), complex(p)) for k, p in zip(self.kvecs, self.positions)]

    @cached_property
    def vertex_lookup(self):
        return {tuple(map(int, k)): i for i, k in enumerate(self.kvecs)}

    @cached_property
    def rhombi(self):
        d = self.pentagrid.directions
        verts = self.vertices
        out = []
        for (r, s), lines, ids in zip(self.rhombus_grids, self.rhombus_lines, self.corner_ids):
            shape, acute = rhombus_shape(d, int(r), int(s))
            out.append(Rhombus((int(r), int(s)), (int(lines[0]), int(lines[1])), shape,
                               tuple(verts[i] for i in ids), acute))
        return out

    def edges(self):
        """Unique undirected tiling edges as an (E, 2) array of vertex ids."""
        c = self.corner_ids
        e = np.concatenate([c[:, [0, 1]], c[:, [1, 2]], c[:, [2, 3]], c[:, [3, 0]]])
        e = np.sort(e, axis=1)
        return np.unique(e, axis=0) if len(e) else e.reshape(0, 2)

    def rhombus_polygons(self):
        return self.positions[self.corner_ids]


def _grid_pair_crossings(grid, r, s, radius):
    gam = grid.offsets
    kr = np.arange(math.ceil(gam[r] - radius), math.floor(gam[r] + radius) + 1)
    ks = np.arange(math.ceil(gam[s] - radius), math.floor(gam[s] + radius) + 1)
    KR, KS = np.meshgrid(kr, ks, indexing="ij")
    KR, KS = KR.ravel(), KS.ravel()
    er, es = grid.directions[r], grid.directions[s]
    a, b = KR - gam[r], KS - gam[s]
    det = er.real * es.imag - er.imag * es.real
    z = ((a * es.imag - b * er.imag) + 1j * (er.real * b - es.real * a)) / det
    keep = np.abs(z) <= radius
    return KR[keep], KS[keep], z[keep]


def generate_patch(grid, radius):
    """Dualize every pairwise crossing inside |z| <= radius.

    Raises IrregularPentagrid when a third line passes within the regularity
    tolerance of a crossing.
    """
    n = grid.n
    all_k, all_grids, all_lines, all_z = [], [], [], []
    if radius > 0:
        for r in range(n):
            for s in range(r + 1, n):
                kr, ks, z = _grid_pair_crossings(grid, r, s, radius)
                if not len(z):
                    continue
                coords = grid.coordinates(z)
                others = [t for t in range(n) if t not in (r, s)]
                near = _check_modulo(coords[:, others], grid.regularity_tolerance, "patch")
                if near.any():
                    i, t = np.argwhere(near)[0]
                    t = others[t]
                    raise IrregularPentagrid(
                        f"lines of grids {r}, {s} and {t} meet within tolerance at {z[i]!r}",
                        point=complex(z[i]),
                        lines=((r, int(kr[i])), (s, int(ks[i])), (t, int(round(coords[i, t])))))
                base = np.ceil(coords).astype(np.int64)
                base[:, r], base[:, s] = kr, ks
                all_k.append(base)
                all_grids.append(np.tile([r, s], (len(z), 1)))
                all_lines.append(np.stack([kr, ks], axis=1))
                all_z.append(z)
    if not all_k:
        return TilingPatch(grid, radius, np.zeros((0, n), dtype=np.int64), np.zeros(0, complex),
                           np.zeros((0, 2), int), np.zeros((0, 2), int), np.zeros((0, 4), int),
                           np.zeros(0, complex))
    base = np.concatenate(all_k)
    grids = np.concatenate(all_grids)
    lines = np.concatenate(all_lines)
    crossings = np.concatenate(all_z)
    rows = np.arange(len(base))
    er = np.zeros_like(base)
    es = np.zeros_like(base)
    er[rows, grids[:, 0]] = 1
    es[rows, grids[:, 1]] = 1
    corners = np.stack([base, base + er, base + er + es, base + es], axis=1)
    flat = corners.reshape(-1, n)
    kvecs, inverse = np.unique(flat, axis=0, return_inverse=True)
    corner_ids = inverse.reshape(-1, 4)
    positions = kvecs.astype(float) @ grid.directions
    return TilingPatch(grid, radius, kvecs, positions, grids, lines, corner_ids, crossings)


def multigrid_patch(offsets, n, radius, regularity_tolerance=DEFAULT_TOLERANCE):
    return generate_patch(Pentagrid(tuple(offsets), n, regularity_tolerance), radius)


# Ammann decoration. On each Penrose rhombus the mirror axis joins the two
# corners of index (1, 3) or (2, 4); X is the one of index 1 or 4, Y the
# other. The X sides carry one split point at cos(pi/5) from X; the Y sides
# carry two, cut into the pieces 1/2, (1 - cos(2pi/5))/2, cos(2pi/5)/2 in the
# order listed from Y for skinny rhombi and in reverse order for fat ones.
# Bars cross each other at the X-side points.
_C36 = math.cos(math.pi / 5)
_C72 = math.cos(2 * math.pi / 5)
_Y_SPLITS = {FAT: (_C72 / 2, 0.5), SKINNY: (0.5, 1.0 - _C72 / 2)}
_SEGMENTS = {
    FAT: (("a0", "a1"), ("a0", "c0"), ("a1", "c1"), ("b0", "c1"), ("b1", "c0")),
    SKINNY: (("a0", "b0"), ("a0", "c0"), ("a1", "b1"), ("a1", "c1"), ("b0", "b1")),
}


def ammann_points(r):
    """Labelled split points on the sides of a Penrose rhombus.

    a0/a1 lie on the X sides, b and c on the Y sides (b nearer Y); the suffix
    says which of the two remaining corners the side runs to.
    """
    c = r.corners
    if len(c[0].kvec.components) != 5:
        raise ValueError("Ammann decoration is defined for Penrose (n = 5) rhombi only")
    if c[0].kvec.index in (1, 4):
        x, w0, y, w1 = c
    else:
        y, w0, x, w1 = c
    x, y, w = x.position, y.position, (w0.position, w1.position)
    near, far = _Y_SPLITS[r.shape]
    pts = {}
    for m in (0, 1):
        pts[f"a{m}"] = x + _C36 * (w[m] - x)
        pts[f"b{m}"] = y + near * (w[m] - y)
        pts[f"c{m}"] = y + far * (w[m] - y)
    return pts


def ammann_decorate(r):
    """Ammann line segments of one rhombus as a list of (start, end) complex pairs."""
    pts = ammann_points(r)
    return [(pts[p], pts[q]) for p, q in _SEGMENTS[r.shape]]
