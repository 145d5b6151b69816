"""File formats: PLY point clouds, label arrays, token files, weights.

TokenFile layout (little endian): magic b"FAS3", version u16, T u32, d u32,
row-major float64 feats (T*d) then centers (T*3), then a CRC32 of the
payload bytes.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .core import PointCloud, SeededWeights, TokenMatrix, validate_cloud
from .errors import (
    LengthMismatch,
    NoValidSuperpoints,
    ParseError,
    UnsupportedProperty,
)

TOKENFILE_MAGIC = b"FAS3"
TOKENFILE_VERSION = 1

_PLY_TYPES = {
    "float": ("f4", 4),
    "float32": ("f4", 4),
    "double": ("f8", 8),
    "float64": ("f8", 8),
    "uchar": ("u1", 1),
    "uint8": ("u1", 1),
    "char": ("i1", 1),
    "int8": ("i1", 1),
    "short": ("i2", 2),
    "ushort": ("u2", 2),
    "int": ("i4", 4),
    "int32": ("i4", 4),
    "uint": ("u4", 4),
    "uint32": ("u4", 4),
}


def _parse_ply_header(data):
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply") or end < 0:
        raise ParseError("not a PLY file", offset=0)
    header = data[: end + len(b"end_header\n")]
    body_off = len(header)
    fmt = None
    n_vertices = None
    props = []
    in_vertex = False
    for line in header.decode("ascii", errors="replace").splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            in_vertex = parts[1] == "vertex"
            if in_vertex:
                n_vertices = int(parts[2])
        elif parts[0] == "property" and in_vertex:
            if parts[1] == "list":
                raise UnsupportedProperty("list properties on vertices")
            if parts[1] not in _PLY_TYPES:
                raise UnsupportedProperty(parts[1])
            props.append((parts[2], parts[1]))
    if fmt not in ("ascii", "binary_little_endian"):
        raise UnsupportedProperty(f"format {fmt}")
    if n_vertices is None:
        raise ParseError("no vertex element", offset=0)
    return fmt, n_vertices, props, body_off


def load_ply(path) -> PointCloud:
    """Read an ASCII or binary-little-endian PLY with x,y,z and optional
    red,green,blue (u8, scaled to [0,1]) and nx,ny,nz properties.

    Missing colors fill 0.5.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    fmt, n, props, body_off = _parse_ply_header(data)
    names = [p for p, _ in props]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise ParseError(f"missing vertex property {axis}", offset=0)

    if fmt == "ascii":
        rows = data[body_off:].decode("ascii", errors="replace").split()
        expected = n * len(props)
        if len(rows) < expected:
            raise ParseError(
                f"expected {expected} ascii values, got {len(rows)}",
                offset=body_off,
            )
        try:
            table = np.array(rows[:expected], dtype=np.float64).reshape(n, len(props))
        except ValueError as exc:
            raise ParseError(str(exc), offset=body_off) from None
        cols = {name: table[:, i] for i, (name, _) in enumerate(props)}
    else:
        dtype = np.dtype(
            [(name, "<" + _PLY_TYPES[typ][0]) for name, typ in props]
        )
        needed = n * dtype.itemsize
        if len(data) - body_off < needed:
            raise ParseError(
                f"payload truncated: need {needed} bytes",
                offset=body_off + (len(data) - body_off),
            )
        table = np.frombuffer(data, dtype=dtype, count=n, offset=body_off)
        cols = {name: table[name].astype(np.float64) for name, _ in props}

    positions = np.stack([cols["x"], cols["y"], cols["z"]], axis=1)
    feats = []
    if all(c in cols for c in ("red", "green", "blue")):
        rgb = np.stack([cols["red"], cols["green"], cols["blue"]], axis=1)
        feats.append(rgb / 255.0)
    else:
        feats.append(np.full((n, 3), 0.5))
    if all(c in cols for c in ("nx", "ny", "nz")):
        feats.append(np.stack([cols["nx"], cols["ny"], cols["nz"]], axis=1))
    cloud = PointCloud(positions=positions, features=np.hstack(feats))
    validate_cloud(cloud)
    return cloud


def save_ply(path, cloud: PointCloud, binary=True):
    """Write positions (float32) and RGB (u8) for round-trip tests and dumps."""
    n = cloud.n_points
    rgb = np.clip(cloud.features[:, :3] * 255.0, 0, 255).astype(np.uint8)
    header = (
        "ply\n"
        f"format {'binary_little_endian' if binary else 'ascii'} 1.0\n"
        f"element vertex {n}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            rec = np.empty(
                n, dtype=[("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
                          ("r", "u1"), ("g", "u1"), ("b", "u1")]
            )
            rec["x"], rec["y"], rec["z"] = cloud.positions.astype(np.float32).T
            rec["r"], rec["g"], rec["b"] = rgb.T
            fh.write(rec.tobytes())
        else:
            for p, c in zip(cloud.positions, rgb):
                fh.write(
                    f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g} {c[0]} {c[1]} {c[2]}\n".encode()
                )


def _looks_like_text(data):
    sample = data[:4096]
    allowed = set(b"0123456789-+ \t\r\n")
    return len(sample) > 0 and all(byte in allowed for byte in sample)


def load_labels(path, n_points):
    """Read length-N superpoint labels (text lines or binary i32), compact
    them to dense {0..M-1} with -1 kept as the sentinel."""
    with open(path, "rb") as fh:
        data = fh.read()
    if _looks_like_text(data):
        raw = np.array(data.split(), dtype=np.int64)
    else:
        if len(data) % 4 != 0:
            raise ParseError("binary label file not a multiple of 4 bytes", offset=len(data))
        raw = np.frombuffer(data, dtype="<i4").astype(np.int64)
    if raw.shape[0] != n_points:
        raise LengthMismatch(f"{raw.shape[0]} labels for {n_points} points")
    valid = raw >= 0
    if not valid.any():
        raise NoValidSuperpoints("all labels are sentinel")
    uniq, dense = np.unique(raw[valid], return_inverse=True)
    labels = np.full(n_points, -1, dtype=np.int64)
    labels[valid] = dense
    return labels


def compact_labels_to_partition(labels, positions):
    from .core import build_partition

    return build_partition(labels, positions)


def write_token_file(path, tokens: TokenMatrix):
    feats = np.ascontiguousarray(tokens.feats, dtype="<f8")
    centers = np.ascontiguousarray(tokens.centers, dtype="<f8")
    payload = feats.tobytes() + centers.tobytes()
    header = TOKENFILE_MAGIC + struct.pack(
        "<HII", TOKENFILE_VERSION, tokens.n_tokens, tokens.width
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


def read_token_header(path):
    """Return (version, T, d) without reading the payload."""
    with open(path, "rb") as fh:
        head = fh.read(14)
    if len(head) < 14 or head[:4] != TOKENFILE_MAGIC:
        raise ParseError("bad token file magic", offset=0)
    version, t, d = struct.unpack("<HII", head[4:14])
    return version, t, d


def read_token_file(path) -> TokenMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    version, t, d = read_token_header(path)
    body = data[14:]
    expected = t * d * 8 + t * 3 * 8
    if len(body) != expected + 4:
        raise ParseError(
            f"payload length {len(body) - 4} != declared {expected}", offset=14
        )
    payload, crc_bytes = body[:expected], body[expected:]
    (crc,) = struct.unpack("<I", crc_bytes)
    if crc != (zlib.crc32(payload) & 0xFFFFFFFF):
        raise ParseError("checksum mismatch", offset=14 + expected)
    feats = np.frombuffer(payload, dtype="<f8", count=t * d).reshape(t, d)
    centers = np.frombuffer(payload, dtype="<f8", count=t * 3, offset=t * d * 8)
    return TokenMatrix(feats=feats.copy(), centers=centers.reshape(t, 3).copy())


def save_weights(path, named_weights, extra_arrays=None):
    """Persist SeededWeights (flat values + shapes) and plain arrays as .npz."""
    payload = {}
    for name, w in named_weights.items():
        payload[f"{name}.values"] = w.values
        payload[f"{name}.shapes"] = np.array(w.shapes, dtype=np.int64)
        payload[f"{name}.seed"] = np.array(w.seed, dtype=np.int64)
    for name, arr in (extra_arrays or {}).items():
        payload[name] = np.asarray(arr)
    np.savez(path, **payload)


def load_weights(path):
    """Inverse of save_weights: (dict of SeededWeights, dict of plain arrays)."""
    data = np.load(path)
    named = {}
    extras = {}
    stems = {key.rsplit(".", 1)[0] for key in data.files if key.endswith(".values")}
    for key in data.files:
        stem, _, suffix = key.rpartition(".")
        if stem in stems and suffix in ("values", "shapes", "seed"):
            continue
        extras[key] = data[key]
    for stem in sorted(stems):
        shapes = tuple(map(tuple, data[f"{stem}.shapes"]))
        named[stem] = SeededWeights(
            seed=int(data[f"{stem}.seed"]),
            shapes=shapes,
            values=data[f"{stem}.values"],
        )
    return named, extras
