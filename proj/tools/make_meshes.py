#!/usr/bin/env python3
"""Regenerates the bundled meshes in data/meshes."""

import json
import math
import pathlib

import numpy as np
from shapely.geometry import MultiPoint, Polygon, box
from shapely.ops import voronoi_diagram

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "meshes"


def dump(name, doc):
    doc = {"name": name, **doc}
    lines = ["{"]
    items = list(doc.items())
    for i, (key, value) in enumerate(items):
        end = "," if i + 1 < len(items) else ""
        if isinstance(value, list) and value and isinstance(value[0], list):
            rows = ",\n    ".join(json.dumps(r) for r in value)
            lines.append(f'  "{key}": [\n    {rows}\n  ]{end}')
        else:
            lines.append(f'  "{key}": {json.dumps(value)}{end}')
    lines.append("}")
    (OUT / f"{name}.json").write_text("\n".join(lines) + "\n")


def grid_2d(nx, ny):
    verts = [[i / nx, j / ny] for j in range(ny + 1) for i in range(nx + 1)]
    vid = lambda i, j: j * (nx + 1) + i
    faces = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)] for j in range(ny) for i in range(nx)]
    return {"dim": 2, "vertices": verts, "faces": faces, "simply_connected": True}


def voronoi_5():
    square = box(0, 0, 1, 1)
    seeds = np.array([[0.15, 0.3], [0.72, 0.12], [0.85, 0.66], [0.35, 0.85], [0.45, 0.45]])
    for _ in range(2):  # a few Lloyd steps towards a centroidal tessellation
        cells = [c.intersection(square) for c in voronoi_diagram(MultiPoint(seeds.tolist()), envelope=square).geoms]
        order = [min(range(len(cells)), key=lambda c: cells[c].distance(MultiPoint([s]))) for s in seeds.tolist()]
        seeds = np.array([[cells[c].centroid.x, cells[c].centroid.y] for c in order])
    cells = [c.intersection(square) for c in voronoi_diagram(MultiPoint(seeds.tolist()), envelope=square).geoms]
    verts, faces = [], []

    def index(p):
        p = [round(p[0], 6), round(p[1], 6)]
        for i, q in enumerate(verts):
            if abs(q[0] - p[0]) < 1e-9 and abs(q[1] - p[1]) < 1e-9:
                return i
        verts.append(p)
        return len(verts) - 1

    for c in sorted(cells, key=lambda c: (round(c.centroid.y, 3), round(c.centroid.x, 3))):
        c = Polygon(c.exterior.coords).normalize()
        ring = list(c.exterior.coords)[:-1]
        if Polygon(ring).exterior.is_ccw is False:
            ring.reverse()
        faces.append([index(p) for p in ring])
    return {"dim": 2, "vertices": verts, "faces": faces, "simply_connected": True}


def pentagon():
    verts = [[math.cos(2 * math.pi * i / 5 + math.pi / 2), math.sin(2 * math.pi * i / 5 + math.pi / 2)] for i in range(5)]
    return {"dim": 2, "vertices": verts, "faces": [[0, 1, 2, 3, 4]], "simply_connected": True}


def hexahedra(nz):
    verts = [[x, y, z] for z in range(nz + 1) for y in (0, 1) for x in (0, 1)]
    v = lambda x, y, z: 4 * z + 2 * y + x
    faces, cells = [], []
    horizontal = [[v(0, 0, z), v(0, 1, z), v(1, 1, z), v(1, 0, z)] for z in range(nz + 1)]  # normal -z
    faces.extend(horizontal)
    for z in range(nz):
        side = len(faces)
        faces.extend([
            [v(0, 0, z), v(1, 0, z), v(1, 0, z + 1), v(0, 0, z + 1)],  # -y
            [v(1, 0, z), v(1, 1, z), v(1, 1, z + 1), v(1, 0, z + 1)],  # +x
            [v(1, 1, z), v(0, 1, z), v(0, 1, z + 1), v(1, 1, z + 1)],  # +y
            [v(0, 1, z), v(0, 0, z), v(0, 0, z + 1), v(0, 1, z + 1)],  # -x
        ])
        cells.append([z, -(z + 1) - 1, side, side + 1, side + 2, side + 3])
    return {"dim": 3, "vertices": verts, "faces": faces, "cells": cells, "simply_connected": True}


def prism():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1]]
    faces = [[0, 2, 1], [3, 4, 5], [0, 1, 4, 3], [1, 2, 5, 4], [2, 0, 3, 5]]
    return {"dim": 3, "vertices": verts, "faces": faces, "cells": [[0, 1, 2, 3, 4]], "simply_connected": True}


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    dump("unit_square", grid_2d(1, 1))
    dump("squares_2x2", grid_2d(2, 2))
    dump("voronoi_5", voronoi_5())
    dump("pentagon", pentagon())
    dump("unit_cube", hexahedra(1))
    dump("two_cubes", hexahedra(2))
    dump("prism", prism())
    bad = hexahedra(1)
    bad["faces"][2] = list(reversed(bad["faces"][2]))
    dump("cube_reversed_face", bad)
