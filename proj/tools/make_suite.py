#!/usr/bin/env python3
"""Writes the test PLC suite into tests/data (2D .poly, 3D .smesh)."""
import math
import os
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "tests", "data")


def fmt(x):
    return repr(float(x))


def loop(ids):
    return [(ids[i], ids[(i + 1) % len(ids)]) for i in range(len(ids))]


def write_poly(name, pts, segs, holes=(), comment=""):
    with open(os.path.join(OUT, name + ".poly"), "w") as f:
        if comment:
            f.write(f"# {comment}\n")
        f.write(f"{len(pts)} 2 0 0\n")
        for i, (x, y) in enumerate(pts, 1):
            f.write(f"{i} {fmt(x)} {fmt(y)}\n")
        f.write(f"{len(segs)} 0\n")
        for i, (a, b) in enumerate(segs, 1):
            f.write(f"{i} {a + 1} {b + 1}\n")
        f.write(f"{len(holes)}\n")
        for i, (x, y) in enumerate(holes, 1):
            f.write(f"{i} {fmt(x)} {fmt(y)}\n")


def write_smesh(name, pts, facets, holes=(), comment=""):
    with open(os.path.join(OUT, name + ".smesh"), "w") as f:
        if comment:
            f.write(f"# {comment}\n")
        f.write(f"{len(pts)} 3 0 0\n")
        for i, (x, y, z) in enumerate(pts):
            f.write(f"{i} {fmt(x)} {fmt(y)} {fmt(z)}\n")
        f.write(f"{len(facets)} 0\n")
        for poly in facets:
            f.write(f"{len(poly)} " + " ".join(str(v) for v in poly) + "\n")
        f.write(f"{len(holes)}\n")
        for i, (x, y, z) in enumerate(holes):
            f.write(f"{i} {fmt(x)} {fmt(y)} {fmt(z)}\n")
        f.write("0\n")


def rect(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


def ngon(n, r, cx=0.0, cy=0.0, phase=0.0):
    return [(cx + r * math.cos(phase + 2 * math.pi * k / n), cy + r * math.sin(phase + 2 * math.pi * k / n)) for k in range(n)]


def box(x0, y0, z0, x1, y1, z1, base=0):
    p = [(x, y, z) for z in (z0, z1) for y in (y0, y1) for x in (x0, x1)]
    q = lambda a, b, c, d: [base + a, base + b, base + c, base + d]
    f = [q(0, 1, 3, 2), q(4, 5, 7, 6), q(0, 1, 5, 4), q(2, 3, 7, 6), q(0, 2, 6, 4), q(1, 3, 7, 5)]
    return p, f


def suite_2d():
    write_poly("square", rect(0, 0, 1, 1), loop([0, 1, 2, 3]), comment="unit square")
    pts = rect(0, 0, 1, 1) + [(0.5, 0.5), (0.53, 0.5), (0.3, 0.72), (0.8, 0.2)]
    write_poly("square_points", pts, loop([0, 1, 2, 3]), comment="free vertices at mixed spacing")
    pts = rect(0, 0, 4, 1) + [(1.0, 0.5), (1.1, 0.5)]
    write_poly("rectangle_slit", pts, loop([0, 1, 2, 3]) + [(4, 5)])
    pts = rect(0, 0, 4, 4) + rect(1.0, 1.0, 1.3, 1.3)
    write_poly("square_hole", pts, loop([0, 1, 2, 3]) + loop([4, 5, 6, 7]), holes=[(1.15, 1.15)])
    pts = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2), (1.1, 1.1)]
    write_poly("l_shape", pts, loop(list(range(6))), comment="free vertex near the reflex corner")
    pts = [(0, 0), (3, 0), (3, 3), (2, 3), (2, 1), (1, 1), (1, 3), (0, 3), (1.5, 0.9)]
    write_poly("u_shape", pts, loop(list(range(8))))
    pts = ngon(6, 1.0) + ngon(6, 0.08, 0.4, 0.1)
    write_poly("hexagon_hole", pts, loop(list(range(6))) + loop(list(range(6, 12))), holes=[(0.4, 0.1)])
    pts = ngon(8, 2.0, phase=math.pi / 8) + ngon(8, 0.7, phase=math.pi / 8) + [(0.0, 1.2), (0.05, 1.2)]
    write_poly("octagon_hole", pts, loop(list(range(8))) + loop(list(range(8, 16))), holes=[(0, 0)])
    # Square spiral wall inside a square.
    spiral = [(2, 2), (8, 2), (8, 8), (3, 8), (3, 3), (7, 3), (7, 7), (4, 7), (4, 4), (6, 4), (6, 6), (5, 6)]
    pts = rect(0, 0, 10, 10) + spiral
    segs = loop([0, 1, 2, 3]) + [(4 + i, 5 + i) for i in range(len(spiral) - 1)]
    write_poly("spiral", pts, segs, comment="square spiral wall")
    # Two rooms joined by a narrow doorway.
    pts = rect(0, 0, 4, 2) + [(2, 0), (2, 0.95), (2, 2), (2, 1.05)]
    segs = [(0, 4), (4, 1), (1, 2), (2, 6), (6, 3), (3, 0), (4, 5), (6, 7)]
    write_poly("two_rooms", pts, segs)
    pts = [(0, 0), (2, 0), (2, 2), (1, 3), (0, 2)] + rect(1.4, 2.0, 1.5, 2.1)
    write_poly("house", pts, loop(list(range(5))) + loop([5, 6, 7, 8]), holes=[(1.45, 2.05)])
    pts = rect(0, 0, 3, 2) + rect(0.5, 0.5, 1.45, 1.5) + rect(1.55, 0.5, 2.5, 1.5)
    write_poly("two_holes", pts, loop([0, 1, 2, 3]) + loop([4, 5, 6, 7]) + loop([8, 9, 10, 11]),
               holes=[(1.0, 1.0), (2.0, 1.0)], comment="holes separated by a thin wall")
    # Input vertices encroaching a boundary segment.
    write_poly("encroach_a", rect(0, 0, 1, 1) + [(0.3, 0.1)], loop([0, 1, 2, 3]), comment="projection kept")
    write_poly("encroach_b", rect(0, 0, 1, 1) + [(0.2, 0.24)], loop([0, 1, 2, 3]), comment="projection slid")


def suite_3d():
    # Cube given as 12 triangles.
    p, _ = box(0, 0, 0, 1, 1, 1)
    tris = []
    for a, b, c, d in [(0, 1, 3, 2), (4, 5, 7, 6), (0, 1, 5, 4), (2, 3, 7, 6), (0, 2, 6, 4), (1, 3, 7, 5)]:
        tris += [[a, b, c], [a, c, d]]
    write_smesh("cube", p, tris, comment="unit cube as triangles")
    p, f = box(0, 0, 0, 2, 1, 1)
    write_smesh("box", p, f)
    p, f = box(0, 0, 0, 3, 3, 3)
    p2, f2 = box(1, 1, 1, 2, 2, 2, base=8)
    write_smesh("box_hole", p + p2, f + f2, holes=[(1.5, 1.5, 1.5)], comment="box with a box-shaped cavity")
    hexa = ngon(6, 1.0)
    p = [(x, y, 0.0) for x, y in hexa] + [(x, y, 1.5) for x, y in hexa]
    f = [list(range(6)), list(range(6, 12))] + [[i, (i + 1) % 6, 6 + (i + 1) % 6, 6 + i] for i in range(6)]
    write_smesh("hex_prism", p, f)
    # L-shaped block: the L faces are split into two rectangles each.
    xy = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2), (1, 0)]
    p = [(x, y, 0.0) for x, y in xy] + [(x, y, 1.0) for x, y in xy]
    top = lambda l: [v + 7 for v in l]
    f = [[0, 6, 3, 4, 5], [6, 1, 2, 3], top([0, 6, 3, 4, 5]), top([6, 1, 2, 3])]
    ring = [0, 6, 1, 2, 3, 4, 5]
    f += [[ring[i], ring[(i + 1) % 7], ring[(i + 1) % 7] + 7, ring[i] + 7] for i in range(7)]
    write_smesh("l_block", p, f)
    p, f = box(0, 0, 0, 1, 1, 3)
    write_smesh("tower", p, f)
    p, f = box(0, 0, 0, 1, 1, 1)
    p += [(0.5, 0.5, 0.5), (0.56, 0.5, 0.5), (0.3, 0.7, 0.4), (0.75, 0.25, 0.7)]
    write_smesh("cube_points", p, f, comment="free vertices at mixed spacing")
    p, f = box(0, 0, 0, 2, 2, 2)
    p2, f2 = box(0.4, 0.4, 0.4, 0.7, 0.7, 0.7, base=8)
    write_smesh("box_small_hole", p + p2, f + f2, holes=[(0.55, 0.55, 0.55)], comment="small cavity near a corner")


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    suite_2d()
    suite_3d()
