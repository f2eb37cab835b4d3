"""Single-tree adaptive mesh over a rectangular grid of data points.

The grid is embedded in one refinement tree whose root spans
``[0, 2^initial_level)`` per axis, where ``initial_level`` is the smallest
depth at which every data point owns its own element. Elements that lie fully
outside the grid are "dummy" leaves; they are kept as coarse as possible,
carry no data, and are recomputed from the grid shape alone.

Conventions
-----------
- ``GridShape.extents`` follows numpy shape order; linear arrays are row-major
  with the last axis fastest.
- The last (fastest) extent axis is Morton axis 0, so spatial locality in
  memory matches locality on the curve.

A :class:`ForestMesh` is an immutable snapshot: the leaf set as parallel
arrays (Morton codes, levels, dummy flags) in ascending space-filling-curve
order. Every operation returns a new mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import morton
from .errors import CorruptArtifactError, ShapeError


@dataclass(frozen=True)
class GridShape:
    """Extents of the data grid, in numpy shape order."""

    extents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(e) for e in self.extents))
        if len(self.extents) not in (2, 3):
            raise ShapeError(f"grid must be 2D or 3D, got {len(self.extents)} axes")
        if any(e < 1 for e in self.extents):
            raise ShapeError(f"every extent must be >= 1, got {self.extents}")
        if self.initial_level > morton.MAX_LEVEL[self.dim]:
            raise ShapeError(
                f"extent {max(self.extents)} needs level {self.initial_level}, "
                f"maximum is {morton.MAX_LEVEL[self.dim]} in {self.dim}D"
            )

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def npoints(self) -> int:
        n = 1
        for e in self.extents:
            n *= e
        return n

    @property
    def initial_level(self) -> int:
        """Depth at which each data point has its own element: ceil(log2(max extent))."""
        return (max(self.extents) - 1).bit_length()

    @property
    def morton_extents(self) -> tuple[int, ...]:
        """Extents reordered so index 0 is Morton axis 0 (= last numpy axis)."""
        return self.extents[::-1]


@dataclass(frozen=True)
class ForestMesh:
    """Leaf set of one refinement tree, in ascending SFC order."""

    shape: GridShape
    codes: np.ndarray  # uint64 Morton codes, each at its own level
    levels: np.ndarray  # uint8 refinement levels
    dummy: np.ndarray  # bool, True for leaves fully outside the grid

    def __post_init__(self):
        for arr in (self.codes, self.levels, self.dummy):
            arr.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def initial_level(self) -> int:
        return self.shape.initial_level

    @property
    def n_leaves(self) -> int:
        return len(self.codes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ForestMesh):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.codes, other.codes)
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.dummy, other.dummy)
        )

    def aligned_codes(self) -> np.ndarray:
        """Codes left-aligned to the initial level (strictly increasing)."""
        return _aligned(self.codes, self.levels, self.dim, self.initial_level)

    def level_histogram(self) -> dict[int, int]:
        lv, cnt = np.unique(self.levels, return_counts=True)
        return {int(a): int(b) for a, b in zip(lv, cnt)}

    def validate(self) -> None:
        """Check the partition, ordering, and dummy-flag invariants; raise on failure."""
        l0, dim = self.initial_level, self.dim
        if self.n_leaves == 0:
            raise ShapeError("mesh has no leaves")
        if int(self.levels.max(initial=0)) > l0:
            raise ShapeError("leaf level exceeds initial level")
        aligned = self.aligned_codes()
        if not np.all(aligned[1:] > aligned[:-1]):
            raise ShapeError("leaves are not strictly ascending in SFC order")
        measure = sum(1 << (dim * (l0 - int(l))) for l in self.levels)
        if measure != 1 << (dim * l0):
            raise ShapeError("leaves do not partition the root domain")
        if not np.array_equal(self.dummy, _dummy_flags(self.codes, self.levels, self.shape)):
            raise ShapeError("dummy flags do not match the grid geometry")


def _aligned(codes: np.ndarray, levels: np.ndarray, dim: int, l0: int) -> np.ndarray:
    shift = (dim * (l0 - levels.astype(np.int64))).astype(np.uint64)
    return codes.astype(np.uint64) << shift


def _dummy_flags(codes: np.ndarray, levels: np.ndarray, shape: GridShape) -> np.ndarray:
    """A leaf is dummy iff its covered cell box lies fully outside the grid."""
    l0 = shape.initial_level
    coords = morton.deinterleave(codes.astype(np.uint64), shape.dim)
    shift = (l0 - levels.astype(np.int64)).astype(np.uint64)
    dummy = np.zeros(len(codes), dtype=bool)
    for axis, ext in enumerate(shape.morton_extents):
        dummy |= (coords[axis] << shift) >= ext
    return dummy


def build_initial_mesh(shape: GridShape) -> ForestMesh:
    """Embed the grid in a single tree, one element per data point.

    Elements intersecting the grid are refined down to the initial level;
    elements fully outside are kept as coarse dummy leaves.
    """
    l0, dim = shape.initial_level, shape.dim
    ext = shape.morton_extents
    seg_codes: list[np.ndarray] = []
    seg_levels: list[np.ndarray] = []
    seg_dummy: list[np.ndarray] = []
    stack = [(0, 0)]
    while stack:
        code, level = stack.pop()
        size = 1 << (l0 - level)
        origin = [c * size for c in morton.deinterleave(code, dim)]
        if any(o >= e for o, e in zip(origin, ext)):
            seg_codes.append(np.array([code], dtype=np.uint64))
            seg_levels.append(np.array([level], dtype=np.uint8))
            seg_dummy.append(np.array([True]))
        elif all(o + size <= e for o, e in zip(origin, ext)):
            start = code << (dim * (l0 - level))
            count = 1 << (dim * (l0 - level))
            seg_codes.append(np.arange(start, start + count, dtype=np.uint64))
            seg_levels.append(np.full(count, l0, dtype=np.uint8))
            seg_dummy.append(np.zeros(count, dtype=bool))
        else:
            base = code << dim
            stack.extend((base + k, level + 1) for k in reversed(range(1 << dim)))
    return ForestMesh(
        shape,
        np.concatenate(seg_codes),
        np.concatenate(seg_levels),
        np.concatenate(seg_dummy),
    )


def _cell_codes(shape: GridShape) -> np.ndarray:
    """Morton codes of all grid cells, in row-major enumeration order."""
    idx = np.indices(shape.extents).reshape(shape.dim, -1)
    coords = tuple(idx[shape.dim - 1 - k].astype(np.uint64) for k in range(shape.dim))
    return morton.interleave(coords, shape.dim)


def map_data(shape: GridShape, values, mesh: ForestMesh | None = None) -> np.ndarray:
    """Reorder a row-major linear array into per-leaf values on the initial mesh.

    Returns a float64 array aligned with the mesh leaves; dummy leaves carry
    NaN as the missing-value marker.
    """
    arr = np.asarray(values).reshape(-1)
    if arr.size != shape.npoints:
        raise ShapeError(f"expected {shape.npoints} values, got {arr.size}")
    if mesh is None:
        mesh = build_initial_mesh(shape)
    out = np.full(mesh.n_leaves, np.nan)
    out[~mesh.dummy] = arr.astype(np.float64)[np.argsort(_cell_codes(shape))]
    return out


def expand_to_uniform(mesh: ForestMesh, leaf_values) -> np.ndarray:
    """Fan per-leaf values out to the full grid by constant interpolation.

    Returns a float64 row-major linear array; dummy regions are dropped.
    """
    vals = np.asarray(leaf_values, dtype=np.float64)
    if vals.shape != (mesh.n_leaves,):
        raise ShapeError(f"expected {mesh.n_leaves} leaf values, got shape {vals.shape}")
    pos = np.searchsorted(mesh.aligned_codes(), _cell_codes(mesh.shape), side="right") - 1
    return vals[pos]


def complete_family_starts(mesh: ForestMesh) -> np.ndarray:
    """Positions of the first members of all complete same-level leaf families."""
    return _family_starts(mesh.codes, mesh.levels, mesh.dim)


def _family_starts(codes: np.ndarray, levels: np.ndarray, dim: int) -> np.ndarray:
    fam = 1 << dim
    n = len(codes)
    if n < fam:
        return np.empty(0, dtype=np.int64)
    m = n - fam + 1
    ok = (codes[:m] % fam == 0) & (levels[:m] >= 1)
    for k in range(1, fam):
        ok &= (codes[k : m + k] == codes[:m] + k) & (levels[k : m + k] == levels[:m])
    return np.nonzero(ok)[0].astype(np.int64)


def _collapse(codes, levels, dummy, starts, dim):
    """Replace each family starting at ``starts`` by its parent; returns new arrays
    plus the keep-mask over old positions (True at surviving rows, with the start
    row rewritten as the parent)."""
    fam = 1 << dim
    keep = np.ones(len(codes), dtype=bool)
    for k in range(1, fam):
        keep[starts + k] = False
    members = starts[:, None] + np.arange(fam)
    new_codes = codes.copy()
    new_codes[starts] = codes[starts] >> np.uint64(dim)
    new_levels = levels.copy()
    new_levels[starts] = levels[starts] - 1
    new_dummy = dummy.copy()
    new_dummy[starts] = dummy[members].all(axis=1)
    return new_codes[keep], new_levels[keep], new_dummy[keep], keep


def coarsen_marked(mesh: ForestMesh, marks) -> ForestMesh:
    """Replace the marked families by their parent leaves.

    ``marks`` are leaf positions of the first member of each family. Each mark
    must address a complete family of current leaves at equal level >= 1; the
    parent of an all-dummy family is itself a dummy.
    """
    starts = np.asarray(sorted(set(int(m) for m in marks)), dtype=np.int64)
    if starts.size == 0:
        return mesh
    fam = 1 << mesh.dim
    if starts[0] < 0 or starts[-1] + fam > mesh.n_leaves:
        raise ShapeError("mark out of range")
    valid = np.zeros(mesh.n_leaves, dtype=bool)
    valid[complete_family_starts(mesh)] = True
    if not valid[starts].all():
        bad = starts[~valid[starts]][0]
        raise ShapeError(f"mark {bad} does not address a complete same-level family")
    if np.any(np.diff(starts) < fam):
        raise ShapeError("marks address overlapping families")
    codes, levels, dummy, _ = _collapse(mesh.codes, mesh.levels, mesh.dummy, starts, mesh.dim)
    return ForestMesh(mesh.shape, codes, levels, dummy)


def serialize_refinement(mesh: ForestMesh) -> bytes:
    """Encode the mesh as level-wise refinement bit-fields.

    For each level below the deepest leaf, one bit per leaf of the partially
    rebuilt mesh in SFC order: 1 = refined further, 0 = final. Bits are packed
    LSB-first; every level is padded to a byte boundary. A root-only mesh
    encodes to zero bytes.
    """
    dim = mesh.dim
    fam = 1 << dim
    aligned = mesh.aligned_codes()
    max_level = int(mesh.levels.max())
    fcodes = np.zeros(1, dtype=np.uint64)
    flevels = np.zeros(1, dtype=np.int64)
    out = bytearray()
    for _ in range(max_level):
        pos = np.searchsorted(aligned, _aligned(fcodes, flevels, dim, mesh.initial_level))
        refine = mesh.levels[pos].astype(np.int64) != flevels
        out += np.packbits(refine, bitorder="little").tobytes()
        counts = np.where(refine, fam, 1)
        base = np.repeat(np.where(refine, fcodes << np.uint64(dim), fcodes), counts)
        offsets = np.arange(len(base)) - np.repeat(np.cumsum(counts) - counts, counts)
        fcodes = base + offsets.astype(np.uint64)
        flevels = np.repeat(flevels + refine, counts)
    return bytes(out)


def deserialize_refinement(data: bytes, shape: GridShape) -> ForestMesh:
    """Rebuild a mesh from level-wise refinement bit-fields.

    Inverse of :func:`serialize_refinement` for meshes over ``shape``; dummy
    flags are recomputed from the grid geometry.
    """
    l0, dim = shape.initial_level, shape.dim
    fam = 1 << dim
    fcodes = np.zeros(1, dtype=np.uint64)
    flevels = np.zeros(1, dtype=np.int64)
    offset = 0
    while offset < len(data):
        n = len(fcodes)
        nbytes = (n + 7) // 8
        if offset + nbytes > len(data):
            raise CorruptArtifactError(
                f"bit-field truncated: level needs {nbytes} bytes, "
                f"{len(data) - offset} remain", offset)
        bits = np.unpackbits(
            np.frombuffer(data, dtype=np.uint8, count=nbytes, offset=offset),
            bitorder="little",
        )
        if bits[n:].any():
            raise CorruptArtifactError("nonzero padding bits in bit-field", offset)
        refine = bits[:n].astype(bool)
        if not refine.any():
            raise CorruptArtifactError("bit-field level refines nothing (over-long stream)", offset)
        if int(flevels[refine].max()) + 1 > l0:
            raise CorruptArtifactError(
                f"bit-field refines beyond initial level {l0}", offset)
        counts = np.where(refine, fam, 1)
        base = np.repeat(np.where(refine, fcodes << np.uint64(dim), fcodes), counts)
        offsets = np.arange(len(base)) - np.repeat(np.cumsum(counts) - counts, counts)
        fcodes = base + offsets.astype(np.uint64)
        flevels = np.repeat(flevels + refine, counts)
        offset += nbytes
    levels = flevels.astype(np.uint8)
    return ForestMesh(shape, fcodes, levels, _dummy_flags(fcodes, levels, shape))


def leaf_box(code: int, level: int, shape: GridShape) -> tuple[tuple[int, int], ...]:
    """Covered cell box of an element, in grid index space (numpy axis order).

    Half-open ``(lo, hi)`` per axis, unclipped against the extents.
    """
    size = 1 << (shape.initial_level - level)
    coords = morton.deinterleave(int(code), shape.dim)
    return tuple((c * size, (c + 1) * size) for c in reversed(coords))
