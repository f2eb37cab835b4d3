"""Bit-exact on-disk artifact format (``.amrc``), little-endian throughout.

Header::

    magic          4 bytes  b"AMRC"
    version        u8       1
    dim            u8       2 or 3
    extents        dim x u64
    initial_level  u8
    value_kind     u8       0=f32 1=f64 2=i16 3=i32
    criterion kind u8       0=absolute 1=relative
    criterion bound f64
    mode           u8       0=one-for-one 1=one-for-all
    packing flag   u8       0/1
    packing scale  f64      zero bytes when flag is 0
    packing offset f64      zero bytes when flag is 0
    post-pass id   u8       0=identity (only id implemented)
    variable count u16

Sections follow the header. ``one-for-one``: per variable, a bit-field
section then a payload section. ``one-for-all``: one shared bit-field
section, then one payload section per variable.

    bit-field section:  u32 byte length, then the level-wise refinement bits
    payload section:    u32 value count, then the values (value_kind, LE)

No trailing bytes are accepted, and all lengths are validated before any
allocation, so ``write(read(b)) == b`` for every valid artifact ``b``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .codec import (
    ONE_FOR_ALL,
    ONE_FOR_ONE,
    VALUE_KIND_DTYPES,
    CompressedVariable,
    Packing,
)
from .criteria import ABSOLUTE, RELATIVE, Criterion
from .errors import (
    ConfigError,
    CorruptArtifactError,
    ShapeError,
    UnsupportedFeatureError,
)
from .mesh import GridShape

MAGIC = b"AMRC"
VERSION = 1
FILE_EXTENSION = ".amrc"

_VALUE_KIND_IDS = {"f32": 0, "f64": 1, "i16": 2, "i32": 3}
_VALUE_KINDS = {v: k for k, v in _VALUE_KIND_IDS.items()}
_CRITERION_IDS = {ABSOLUTE: 0, RELATIVE: 1}
_CRITERION_KINDS = {v: k for k, v in _CRITERION_IDS.items()}
_MODE_IDS = {ONE_FOR_ONE: 0, ONE_FOR_ALL: 1}
_MODES = {v: k for k, v in _MODE_IDS.items()}


@dataclass(frozen=True)
class ArtifactHeader:
    shape: GridShape
    value_kind: str
    criterion: Criterion
    mode: str
    packing: Packing | None
    post_pass: int
    n_variables: int


def write_artifact(variables, post_pass: int = 0) -> bytes:
    """Serialize one or more compressed variables into a single byte stream."""
    if not variables:
        raise ConfigError("artifact needs at least one variable")
    if post_pass != 0:
        raise UnsupportedFeatureError(f"post-pass id {post_pass} is not implemented")
    first = variables[0]
    for v in variables:
        if (v.shape, v.value_kind, v.criterion, v.mode, v.packing) != (
            first.shape, first.value_kind, first.criterion, first.mode, first.packing
        ):
            raise ConfigError("variables in one artifact must share header fields")
    if first.mode == ONE_FOR_ALL:
        for v in variables[1:]:
            if v.mesh_bits != first.mesh_bits:
                raise ConfigError("one-for-all variables must share one mesh")
    if len(variables) > 0xFFFF:
        raise ConfigError("too many variables for one artifact")

    out = bytearray()
    out += MAGIC
    out += struct.pack("<BB", VERSION, first.shape.dim)
    for e in first.shape.extents:
        out += struct.pack("<Q", e)
    out += struct.pack(
        "<BBBd",
        first.shape.initial_level,
        _VALUE_KIND_IDS[first.value_kind],
        _CRITERION_IDS[first.criterion.kind],
        first.criterion.bound,
    )
    packing = first.packing
    out += struct.pack(
        "<BBdd",
        _MODE_IDS[first.mode],
        0 if packing is None else 1,
        0.0 if packing is None else packing.scale,
        0.0 if packing is None else packing.offset,
    )
    out += struct.pack("<BH", post_pass, len(variables))

    def emit_bits(v):
        out.extend(struct.pack("<I", len(v.mesh_bits)))
        out.extend(v.mesh_bits)

    def emit_payload(v):
        data = np.ascontiguousarray(v.payload, dtype=VALUE_KIND_DTYPES[v.value_kind])
        out.extend(struct.pack("<I", len(data)))
        out.extend(data.tobytes())

    if first.mode == ONE_FOR_ALL:
        emit_bits(first)
        for v in variables:
            emit_payload(v)
    else:
        for v in variables:
            emit_bits(v)
            emit_payload(v)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise CorruptArtifactError(f"truncated while reading {what}", self.offset)
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def read_artifact(data: bytes):
    """Parse an artifact; returns ``(variables, header)``.

    Exact inverse of :func:`write_artifact`; any deviation from the format,
    including trailing bytes, raises :class:`CorruptArtifactError`.
    """
    r = _Reader(bytes(data))
    if r.take(4, "magic") != MAGIC:
        raise CorruptArtifactError("bad magic, not an AMRC artifact", 0)
    (version,) = r.unpack("<B", "version")
    if version != VERSION:
        raise CorruptArtifactError(f"unsupported version {version}", r.offset - 1)
    (dim,) = r.unpack("<B", "dim")
    if dim not in (2, 3):
        raise CorruptArtifactError(f"dim must be 2 or 3, got {dim}", r.offset - 1)
    extents = tuple(r.unpack("<Q", "extent")[0] for _ in range(dim))
    level, kind_id, crit_id, bound = r.unpack("<BBBd", "header fields")
    mode_id, pack_flag, scale, offs = r.unpack("<BBdd", "mode/packing")
    header_pack_at = r.offset - 17
    post_pass, n_vars = r.unpack("<BH", "trailer fields")

    try:
        shape = GridShape(extents)
    except (ShapeError, OverflowError) as exc:
        raise CorruptArtifactError(f"invalid extents {extents}: {exc}", 6) from exc
    if level != shape.initial_level:
        raise CorruptArtifactError(
            f"initial level {level} does not match extents (expected {shape.initial_level})")
    if kind_id not in _VALUE_KINDS:
        raise CorruptArtifactError(f"unknown value kind id {kind_id}")
    if crit_id not in _CRITERION_KINDS:
        raise CorruptArtifactError(f"unknown criterion id {crit_id}")
    try:
        criterion = Criterion(_CRITERION_KINDS[crit_id], bound)
    except ConfigError as exc:
        raise CorruptArtifactError(str(exc)) from exc
    if mode_id not in _MODES:
        raise CorruptArtifactError(f"unknown mode id {mode_id}")
    if pack_flag not in (0, 1):
        raise CorruptArtifactError(f"packing flag must be 0/1, got {pack_flag}", header_pack_at)
    if pack_flag:
        try:
            packing = Packing(scale, offs)
        except ConfigError as exc:
            raise CorruptArtifactError(str(exc), header_pack_at) from exc
    else:
        if struct.pack("<dd", scale, offs) != b"\x00" * 16:
            raise CorruptArtifactError("packing fields must be zero when unpacked",
                                       header_pack_at)
        packing = None
    if post_pass != 0:
        raise UnsupportedFeatureError(f"post-pass id {post_pass} is not implemented")
    if n_vars < 1:
        raise CorruptArtifactError("artifact declares zero variables", r.offset - 2)

    value_kind = _VALUE_KINDS[kind_id]
    mode = _MODES[mode_id]
    dtype = np.dtype(VALUE_KIND_DTYPES[value_kind])

    def read_bits() -> bytes:
        (nbytes,) = r.unpack("<I", "bit-field length")
        return r.take(nbytes, "bit-field section")

    def read_payload() -> np.ndarray:
        at = r.offset
        (count,) = r.unpack("<I", "payload count")
        if count * dtype.itemsize > len(r.data) - r.offset:
            raise CorruptArtifactError(
                f"payload section declares {count} values but only "
                f"{len(r.data) - r.offset} bytes remain", at)
        raw = r.take(count * dtype.itemsize, "payload section")
        return np.frombuffer(raw, dtype=dtype).copy()

    def make_var(bits: bytes, payload: np.ndarray) -> CompressedVariable:
        return CompressedVariable(
            shape=shape, value_kind=value_kind, mesh_bits=bits, payload=payload,
            criterion=criterion, mode=mode, packing=packing)

    variables = []
    if mode == ONE_FOR_ALL:
        bits = read_bits()
        for _ in range(n_vars):
            variables.append(make_var(bits, read_payload()))
    else:
        for _ in range(n_vars):
            bits = read_bits()
            variables.append(make_var(bits, read_payload()))
    if r.offset != len(r.data):
        raise CorruptArtifactError(
            f"{len(r.data) - r.offset} trailing bytes after last section", r.offset)

    header = ArtifactHeader(shape, value_kind, criterion, mode, packing, post_pass, n_vars)
    return variables, header
