"""TSSI image assembly, vertical resizing, height fitting, serialization.

A TSSI image is a T x W x 3 float array: rows are frames, columns are the
joints in tree-traversal order (joints repeat wherever the path revisits
them), and the channels hold the (x, y, z) coordinates. The raw_f32 wire
format serializes it losslessly; PNG export is a preview only.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

import numpy as np
from PIL import Image

from .errors import EmptyOrder, EmptySequence, IoFailure, ParseError, SchemaVersionMismatch
from .sequence import PreprocessedSequence
from .topology import JointOrder

CHANNEL_POLICIES = ("zero_z", "keep_z_minmax")

MAGIC = b"TSSI"
FORMAT_VERSION = 1
# magic(4) + version/height/width/channels as u16 (8) + 4 reserved bytes
HEADER_SIZE = 16
_HEADER = struct.Struct("<4sHHHH4x")


@dataclass(frozen=True)
class TssiImage:
    """Image-encoded skeleton sequence; ``data`` is float32, shape (T, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ValueError(f"expected (T, W, 3) data, got shape {self.data.shape}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def _frame_matrix(frame, joints) -> np.ndarray:
    """Coordinates of every canonical joint of one complete frame, (N, 3)."""
    rows = np.empty((len(joints), 3), dtype=np.float32)
    part_pos: dict[str, int] = {"face": 0, "left_hand": 0, "right_hand": 0}
    for j in joints:
        if j.part == "body":
            rows[j.id] = frame.pose[j.name]
        else:
            block = frame.block(j.part)
            rows[j.id] = block[part_pos[j.part]]
            part_pos[j.part] += 1
    return rows


def assemble(
    sequence: PreprocessedSequence,
    order: JointOrder,
    policy: str = "zero_z",
) -> TssiImage:
    """Stack frames into rows and lay joints out along the path columns.

    ``zero_z`` blanks the blue channel (the default); ``keep_z_minmax``
    rescales z per sequence to [0, 1], mapping a constant-z sequence to 0.5.
    """
    if policy not in CHANNEL_POLICIES:
        raise ValueError(f"unknown channel policy {policy!r}")
    if sequence.length == 0:
        raise EmptySequence("cannot assemble an image from zero frames")
    if len(order.path) == 0:
        raise EmptyOrder("joint order has no entries")

    path = np.asarray(order.path, dtype=np.intp)
    data = np.empty((sequence.length, len(path), 3), dtype=np.float32)
    for t, frame in enumerate(sequence.frames):
        data[t] = _frame_matrix(frame, order.joints)[path]

    if policy == "zero_z":
        data[:, :, 2] = 0.0
    else:
        z = data[:, :, 2]
        zmin, zmax = float(z.min()), float(z.max())
        if zmax > zmin:
            data[:, :, 2] = (z - zmin) / (zmax - zmin)
        else:
            data[:, :, 2] = 0.5
    return TssiImage(data=data)


def resize_rows(image: TssiImage, new_height: int) -> TssiImage:
    """Bilinear resize along the row (time) axis only, align-corners.

    Output row t samples source position t*(T-1)/(new_height-1); columns
    and channels are interpolated independently. A same-size resize is
    bit-identical.
    """
    if new_height < 1:
        raise ValueError("new_height must be >= 1")
    src = image.data
    t = src.shape[0]
    if new_height == 1 or t == 1:
        pos = np.zeros(new_height, dtype=np.float64)
    else:
        pos = np.arange(new_height, dtype=np.float64) * (t - 1) / (new_height - 1)
    lo = np.floor(pos).astype(np.intp)
    lo = np.minimum(lo, t - 1)
    hi = np.minimum(lo + 1, t - 1)
    frac = (pos - lo)[:, None, None]

    out = (1.0 - frac) * src[lo].astype(np.float64) + frac * src[hi].astype(np.float64)
    out = out.astype(np.float32)
    exact = frac[:, 0, 0] == 0.0
    out[exact] = src[lo[exact]]  # keep integer positions bit-exact
    return TssiImage(data=out)


def fit_height(image: TssiImage, height: int) -> TssiImage:
    """Force the image to exactly ``height`` rows.

    Taller images are resized down bilinearly; shorter ones are padded
    with all-zero rows at the bottom so frame 0 stays at row 0.
    """
    if height < 1:
        raise ValueError("height must be >= 1")
    t = image.height
    if t == height:
        return image
    if t > height:
        return resize_rows(image, height)
    pad = np.zeros((height - t, image.width, 3), dtype=np.float32)
    return TssiImage(data=np.concatenate([image.data, pad], axis=0))


def export(image: TssiImage, format: str, sink: str | Path | BinaryIO) -> int:
    """Write the image to ``sink``; returns the number of bytes written.

    ``raw_f32`` is the lossless wire format; ``png_preview`` quantizes each
    channel with round-half-up to 8 bits.
    """
    if format == "raw_f32":
        payload = _to_raw_bytes(image)
    elif format == "png_preview":
        payload = _to_png_bytes(image)
    else:
        raise ValueError(f"unknown export format {format!r}")
    try:
        if hasattr(sink, "write"):
            sink.write(payload)
        else:
            Path(sink).write_bytes(payload)
    except OSError as exc:
        raise IoFailure(f"failed to write {format} image: {exc}") from exc
    return len(payload)


def _to_raw_bytes(image: TssiImage) -> bytes:
    h, w, c = image.data.shape
    if h > 0xFFFF or w > 0xFFFF:
        raise ValueError(f"image dimensions {h}x{w} exceed the wire format's u16 range")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, h, w, c)
    return header + np.ascontiguousarray(image.data, dtype="<f4").tobytes()


def _to_png_bytes(image: TssiImage) -> bytes:
    quantized = np.clip(np.floor(image.data * 255.0 + 0.5), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(quantized, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def read_raw(source: str | Path | BinaryIO) -> TssiImage:
    """Parse a raw_f32 file back into a :class:`TssiImage` (lossless)."""
    try:
        if hasattr(source, "read"):
            blob = source.read()
        else:
            blob = Path(source).read_bytes()
    except OSError as exc:
        raise IoFailure(f"failed to read raw image: {exc}") from exc
    if len(blob) < HEADER_SIZE:
        raise ParseError(f"raw image truncated: {len(blob)} bytes is shorter than the header")
    magic, version, h, w, c = _HEADER.unpack(blob[:HEADER_SIZE])
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise SchemaVersionMismatch(f"raw image format version {version}, expected {FORMAT_VERSION}")
    expected = h * w * c * 4
    if len(blob) - HEADER_SIZE != expected:
        raise ParseError(
            f"payload is {len(blob) - HEADER_SIZE} bytes, header promises {expected}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER_SIZE).reshape(h, w, c)
    return TssiImage(data=np.array(data, dtype=np.float32))
