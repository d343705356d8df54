"""File output: tiling JSON and SVG, PGM rasters with JSON sidecars, CSV tables and figures."""

import csv
import json
from pathlib import Path

import numpy as np

from .pentagrid import FAT, ammann_decorate

SVG_FILL = {FAT: "#e8c872", "skinny": "#6f9fd8"}


def tiling_dict(patch):
    """Plain-data form of a patch following the tiling JSON schema."""
    idx = patch.indices
    verts = [{"k": [int(x) for x in k], "index": int(i), "pos": [float(p.real), float(p.imag)]}
             for k, i, p in zip(patch.kvecs, idx, patch.positions)]
    rh = [{"grids": [int(g) for g in grids], "lines": [int(l) for l in lines], "shape": str(shape),
           "corners": [int(c) for c in ids]}
          for grids, lines, shape, ids in zip(patch.rhombus_grids, patch.rhombus_lines,
                                              patch.shapes, patch.corner_ids)]
    return {"n": patch.pentagrid.n, "gamma": list(patch.pentagrid.offsets),
            "radius": float(patch.radius), "vertices": verts, "rhombi": rh}


def write_tiling_json(patch, path):
    Path(path).write_text(json.dumps(tiling_dict(patch)))


def tiling_svg(patch, ammann=False, scale=20.0, margin=1.0):
    """SVG document of the patch; y grows upward as in the complex plane."""
    poly = patch.rhombus_polygons()
    lo_x, hi_x = poly.real.min() - margin, poly.real.max() + margin
    lo_y, hi_y = poly.imag.min() - margin, poly.imag.max() + margin
    w, h = (hi_x - lo_x) * scale, (hi_y - lo_y) * scale

    def xy(z):
        return f"{(z.real - lo_x) * scale:.3f},{(hi_y - z.imag) * scale:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" '
           f'viewBox="0 0 {w:.1f} {h:.1f}">',
           '<g id="rhombi" stroke="#333" stroke-width="0.6">']
    for corners, shape in zip(poly, patch.shapes):
        pts = " ".join(xy(z) for z in corners)
        out.append(f'<polygon points="{pts}" fill="{SVG_FILL.get(shape, "#ccc")}"/>')
    out.append("</g>")
    if ammann:
        out.append('<g id="ammann" stroke="#c0262d" stroke-width="1.0">')
        for r in patch.rhombi:
            for a, b in ammann_decorate(r):
                (x1, y1), (x2, y2) = (xy(a).split(","), xy(b).split(","))
                out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out)


def write_pgm(path, values, metadata=None):
    """8-bit binary PGM with min-max normalization (minimum black) plus a JSON sidecar.

    Row r of the image is the last axis-1 index minus r, column c is axis-0
    index c, so axis 0 runs left to right and axis 1 bottom to top.
    """
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo if hi > lo else 1.0
    img = np.round(255.0 * (v - lo) / span).astype(np.uint8).T[::-1]
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    meta = dict(metadata or {})
    meta.update({"normalization": "min-max", "value_min": lo, "value_max": hi,
                 "layout": "column = axis 0 ascending, row = axis 1 descending"})
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2))
    return path


def read_pgm(path):
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def write_grid_csv(path, axis, values, names=("qx", "qy", "value")):
    """Long-format CSV of a square map sampled on axis x axis."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i, x in enumerate(axis):
            for j, y in enumerate(axis):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(values[i, j]))])


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_matrix_csv(path, matrix):
    np.savetxt(path, np.asarray(matrix), delimiter=",", fmt="%.12g")


def plot_map(path, values, axis, title, label, cmap="viridis"):
    """Heat map of a square raster (axis 0 horizontal) saved to ``path``."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.2, 4.4), dpi=120)
    ext = [axis[0], axis[-1], axis[0], axis[-1]]
    im = ax.imshow(np.asarray(values).T, origin="lower", extent=ext, cmap=cmap)
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label=label)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_tiling(path, patch, ammann=False):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.collections import LineCollection, PolyCollection

    fig, ax = plt.subplots(figsize=(6, 6), dpi=120)
    poly = patch.rhombus_polygons()
    verts = [np.c_[p.real, p.imag] for p in poly]
    colors = [SVG_FILL.get(s, "#ccc") for s in patch.shapes]
    ax.add_collection(PolyCollection(verts, facecolors=colors, edgecolors="#333", linewidths=0.3))
    if ammann:
        segs = [[(a.real, a.imag), (b.real, b.imag)] for r in patch.rhombi for a, b in ammann_decorate(r)]
        ax.add_collection(LineCollection(segs, colors="#c0262d", linewidths=0.5))
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
