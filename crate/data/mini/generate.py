"""Regenerates the mini-corpus meshes: 4 spheres, 4 rods, 4 plates.

Members of a class are one base shape under different scales, rotations
and translations, so their D2 histograms differ only by sampling noise.
"""
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def icosphere(levels):
    t = (1 + math.sqrt(5)) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [tuple(c / math.sqrt(sum(x * x for x in v)) for c in v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(levels):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                p = [(x + y) / 2 for x, y in zip(verts[a], verts[b])]
                n = math.sqrt(sum(x * x for x in p))
                verts.append(tuple(x / n for x in p))
                cache[key] = len(verts) - 1
            return cache[key]

        nxt = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nxt += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = nxt
    return verts, faces


def box(sx, sy, sz):
    v = [(x * sx, y * sy, z * sz) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    return v, quads


def write(path, verts, faces):
    with open(path, "w") as f:
        f.write("OFF\n%d %d 0\n" % (len(verts), len(faces)))
        for v in verts:
            f.write("%.6f %.6f %.6f\n" % v)
        for face in faces:
            f.write("%d %s\n" % (len(face), " ".join(map(str, face))))


def rotate(verts, ax, ay, az):
    out = []
    for x, y, z in verts:
        y, z = y * math.cos(ax) - z * math.sin(ax), y * math.sin(ax) + z * math.cos(ax)
        x, z = x * math.cos(ay) + z * math.sin(ay), -x * math.sin(ay) + z * math.cos(ay)
        x, y = x * math.cos(az) - y * math.sin(az), x * math.sin(az) + y * math.cos(az)
        out.append((x, y, z))
    return out


POSES = [
    (1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    (1.5, (0.3, 0.7, 1.1), (2.0, -1.0, 0.5)),
    (2.0, (1.2, 0.1, 2.5), (-3.0, 4.0, 1.0)),
    (3.0, (2.2, 1.9, 0.4), (10.0, 0.0, -5.0)),
]


def main():
    out = os.path.join(HERE, "meshes")
    os.makedirs(out, exist_ok=True)
    bases = [icosphere(3), box(1.0, 1.0, 12.0), box(6.0, 6.0, 0.05)]
    ident = 0
    for verts, faces in bases:
        for scale, angles, shift in POSES:
            v = rotate([tuple(c * scale for c in p) for p in verts], *angles)
            v = [tuple(c + d for c, d in zip(p, shift)) for p in v]
            write(os.path.join(out, "m%d.off" % ident), v, faces)
            ident += 1


if __name__ == "__main__":
    main()
