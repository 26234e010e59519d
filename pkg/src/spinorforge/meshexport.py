"""OBJ / binary-PLY export of reconstructed surface grids.

Vertices come from the group model's R^3 embedding: abelian R^3, semidirect
coordinates (x1, x2, z) and the H^3 half-space coordinates map directly;
S^3 points are stereographically projected from a configurable pole (default
the antipode of the identity).  Quad cells of the structured grid are split
into two triangles.  OBJ uses shortest-round-trip decimal doubles and PLY
stores float64, so the two formats carry identical coordinates.
"""

import struct

import numpy as np

FORMATS = ("obj", "ply")


def grid_faces(nx, ny):
    """Triangle index array (2 (nx-1) (ny-1), 3), vertices in row-major
    (i * ny + j) order."""
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    a = i * ny + j
    b = (i + 1) * ny + j
    c = (i + 1) * ny + (j + 1)
    d = i * ny + (j + 1)
    t1 = np.stack([a, b, c], axis=-1).reshape(-1, 3)
    t2 = np.stack([a, c, d], axis=-1).reshape(-1, 3)
    return np.concatenate([t1, t2], axis=0)


def stereographic_s3(F, pole=None):
    """Project unit quaternions to R^3 from `pole` (default (-1, 0, 0, 0)):
    first rotate the pole to -identity by a left translation, then apply
    v / (1 + w)."""
    F = np.asarray(F, dtype=np.float64)
    if pole is not None:
        pole = np.asarray(pole, dtype=np.float64)
        if pole.shape != (4,) or abs(np.linalg.norm(pole) - 1.0) > 1e-8:
            raise ValueError("the projection pole must be a unit quaternion")
        from .lie_group import S3Model
        model = S3Model()
        rot = -model.inverse(pole)
        F = model.multiply(rot, F)
    denom = 1.0 + F[..., 0]
    if np.min(denom) <= 1e-12:
        raise ValueError("surface touches the projection pole; choose another")
    return F[..., 1:] / denom[..., None]


def embed_r3(F, model, pole=None):
    """The model's R^3 vertex coordinates for a payload grid."""
    F = np.asarray(F, dtype=np.float64)
    if model.name == "s3":
        return stereographic_s3(F, pole)
    if F.shape[-1] != 3:
        raise ValueError(f"no R^3 embedding for {model.name} payloads of "
                         f"dimension {F.shape[-1]}")
    return F


def write_obj(path, vertices, faces):
    with open(path, "w") as fh:
        for v in vertices:
            # shortest round-trip decimals, exact on re-parse
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for f in faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def write_ply(path, vertices, faces):
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {len(vertices)}\n"
        "property double x\nproperty double y\nproperty double z\n"
        f"element face {len(faces)}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.asarray(vertices, dtype="<f8").tobytes())
        for f in faces:
            fh.write(struct.pack("<B3i", 3, int(f[0]), int(f[1]), int(f[2])))


def read_obj_vertices(path):
    verts = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("v "):
                verts.append([float(t) for t in line.split()[1:4]])
    return np.array(verts)


def read_ply_vertices(path):
    with open(path, "rb") as fh:
        header = b""
        while not header.endswith(b"end_header\n"):
            header += fh.readline()
        nvert = int([ln for ln in header.decode().splitlines()
                     if ln.startswith("element vertex")][0].split()[-1])
        return np.frombuffer(fh.read(24 * nvert), dtype="<f8").reshape(-1, 3)


def export_mesh(F, model, fmt, path, pole=None):
    """Write the surface grid as OBJ or binary PLY; returns the vertex array."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    F = np.asarray(F, dtype=np.float64)
    nx, ny = F.shape[:2]
    vertices = embed_r3(F, model, pole=pole).reshape(-1, 3)
    faces = grid_faces(nx, ny)
    if fmt == "obj":
        write_obj(path, vertices, faces)
    else:
        write_ply(path, vertices, faces)
    return vertices
