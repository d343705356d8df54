"""Fraunhofer pattern of pinholes on the vertices of a regular polygon.

A(x, y) = sum_j exp(i (x cos(2 pi j / n) + y sin(2 pi j / n))), an almost
periodic function; the map shows -log |A|^2, so bright spots are dark.
"""

import math
from dataclasses import dataclass

import numpy as np

LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class PinholeSpec:
    count: int = 5
    half_width: float = 50.0
    raster: int = 400

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("need at least two pinholes")
        if self.raster < 2:
            raise ValueError("raster must be at least 2")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def wavevectors(self):
        ang = 2.0 * math.pi * np.arange(1, self.count + 1) / self.count
        return np.cos(ang), np.sin(ang)


def amplitude(spec, x, y):
    """Complex amplitude at (x, y); vectorizes over arrays."""
    cx, cy = spec.wavevectors
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phase = x[..., None] * cx + y[..., None] * cy
    out = np.exp(1j * phase).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def raster_axis(spec):
    """Sample coordinates: g points over the closed interval [-d, d], exactly symmetric about 0."""
    g = spec.raster
    return (np.arange(g) - 0.5 * (g - 1)) * (2.0 * spec.half_width / (g - 1))


def intensity(spec, x, y):
    return np.abs(amplitude(spec, x, y)) ** 2


def intensity_map(spec=None):
    """Raster of -log|A|^2, axis 0 = x, axis 1 = y. Returns (values, axis)."""
    spec = spec or PinholeSpec()
    ax = raster_axis(spec)
    x, y = np.meshgrid(ax, ax, indexing="ij")
    vals = -np.log(np.maximum(intensity(spec, x, y), LOG_FLOOR))
    return vals, ax


def map_metadata(spec, values):
    return {
        "function": "-log|A|^2",
        "count": spec.count,
        "half_width": spec.half_width,
        "raster": spec.raster,
        "log_floor": LOG_FLOOR,
        "convention": "darker = higher intensity",
        "min": float(values.min()),
        "max": float(values.max()),
    }


def _disk_offsets(radius, step):
    r = np.arange(-radius, radius + step / 2, step)
    dx, dy = np.meshgrid(r, r, indexing="ij")
    keep = dx ** 2 + dy ** 2 <= radius ** 2
    return dx[keep], dy[keep]


def near_repeats(spec=None, radius=5.0, count=10, exclude=None, step=0.25, search_step=0.125):
    """Off-centre disks whose intensity pattern best matches the central disk.

    Candidates are local maxima of |A|^2 on a fine search grid (peaks near 25
    mark places where all phases nearly align). Returns a list of
    (x, y, correlation) sorted by correlation, best first.
    """
    spec = spec or PinholeSpec()
    d = spec.half_width - radius
    exclude = 2.0 * radius if exclude is None else exclude
    ax = np.arange(-d, d + search_step / 2, search_step)
    x, y = np.meshgrid(ax, ax, indexing="ij")
    inten = intensity(spec, x, y)
    core = inten[1:-1, 1:-1]
    ok = np.ones_like(core, dtype=bool)
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if a or b:
                ok &= core >= inten[1 + a:inten.shape[0] - 1 + a, 1 + b:inten.shape[1] - 1 + b]
    idx = np.argwhere(ok) + 1
    cx, cy = x[idx[:, 0], idx[:, 1]], y[idx[:, 0], idx[:, 1]]
    far = np.hypot(cx, cy) > exclude
    cx, cy = cx[far], cy[far]
    order = np.argsort(-intensity(spec, cx, cy))[: 4 * count]
    ox, oy = _disk_offsets(radius, step)
    ref = intensity(spec, ox, oy)
    out = []
    for i in order:
        pat = intensity(spec, cx[i] + ox, cy[i] + oy)
        out.append((float(cx[i]), float(cy[i]), float(np.corrcoef(ref, pat)[0, 1])))
    out.sort(key=lambda t: -t[2])
    return out[:count]
