"""Compression driver: iterate coarsening to a fixpoint, then package.

One coarsening iteration gathers every complete same-level leaf family,
interpolates each candidate parent value, and checks it against the most
restrictive bound touching the parent. All accepted collapses commit at once
(a Jacobi-style sweep), so newly formed parents only become eligible in the
next iteration. Iteration stops when nothing is accepted.

The initial data is discarded after mapping onto the mesh; only per-leaf
inaccuracy trackers persist, and they guarantee the end-to-end point-wise
bound of the decompressed output.

Candidate values are rounded into the storage type (f32, or nearest-even for
integer kinds) *before* the compliance check, so the tracker bounds the
deviation of the value that is actually stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import (
    ABSOLUTE,
    Criterion,
    ErrorSpec,
    batch_check_absolute,
    batch_check_relative,
    family_means,
    resolve_bounds_batch,
)
from .errors import ConfigError, CorruptArtifactError, DataError, ShapeError
from .mesh import (
    ForestMesh,
    GridShape,
    _collapse,
    _family_starts,
    build_initial_mesh,
    deserialize_refinement,
    expand_to_uniform,
    map_data,
    serialize_refinement,
)

ONE_FOR_ONE = "one-for-one"
ONE_FOR_ALL = "one-for-all"

# storage kinds: little-endian on disk, float64 as the working type
VALUE_KIND_DTYPES = {"f32": "<f4", "f64": "<f8", "i16": "<i2", "i32": "<i4"}
_KIND_BY_DTYPE = {("f", 4): "f32", ("f", 8): "f64", ("i", 2): "i16", ("i", 4): "i32"}


def value_kind_of(dtype) -> str:
    dt = np.dtype(dtype)
    try:
        return _KIND_BY_DTYPE[(dt.kind, dt.itemsize)]
    except KeyError:
        raise ConfigError(f"unsupported value dtype {dt}; use f32/f64/i16/i32") from None


@dataclass(frozen=True)
class Packing:
    """Affine record for integer-packed data: value = scale * packed + offset."""

    scale: float
    offset: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError(f"scale factor must be positive, got {self.scale}")


@dataclass(frozen=True)
class CompressionConfig:
    spec: ErrorSpec
    mode: str = ONE_FOR_ONE
    split_axis: int | None = None
    packing: Packing | None = None

    def __post_init__(self):
        if self.mode not in (ONE_FOR_ONE, ONE_FOR_ALL):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.split_axis is not None and self.split_axis < 0:
            raise ConfigError("split_axis must be a non-negative axis index")


@dataclass
class CompressStats:
    iterations: int
    leaf_count: int
    max_tracker: float


@dataclass
class CompressedVariable:
    """One compressed variable: encoded mesh plus non-dummy leaf payload."""

    shape: GridShape
    value_kind: str
    mesh_bits: bytes
    payload: np.ndarray
    criterion: Criterion
    mode: str = ONE_FOR_ONE
    packing: Packing | None = None
    stats: CompressStats | None = None  # not serialized


@dataclass
class CoarsenResult:
    """Full engine state after coarsening; values/trackers are per variable."""

    mesh: ForestMesh
    values: list[np.ndarray]
    trackers: list[np.ndarray]
    iterations: int


def _quantize(means: np.ndarray, value_kind: str) -> np.ndarray:
    if value_kind == "f64":
        return means
    if value_kind == "f32":
        return means.astype(np.float32).astype(np.float64)
    return np.rint(means)


def packed_bound(eps_unpacked: float, scale_factor: float) -> float:
    """Transform an absolute bound into packed-data units."""
    if not scale_factor > 0:
        raise ConfigError(f"scale factor must be positive, got {scale_factor}")
    return eps_unpacked / scale_factor


def coarsen_forest(
    variables,
    shape: GridShape,
    spec: ErrorSpec,
    value_kind: str,
    max_iterations: int | None = None,
) -> CoarsenResult:
    """Coarsen one shared mesh under ``spec`` until no family is accepted.

    A family collapses only if the check passes for *every* variable; trackers
    are maintained per variable. Pass a single-element list for solo
    compression.
    """
    if value_kind not in VALUE_KIND_DTYPES:
        raise ConfigError(f"unknown value kind {value_kind!r}")
    arrays = [np.asarray(v) for v in variables]
    if not arrays:
        raise ConfigError("no variables given")
    for arr in arrays:
        if arr.dtype.kind == "f" and not np.isfinite(arr).all():
            raise DataError("input contains non-finite values")

    mesh0 = build_initial_mesh(shape)
    codes = mesh0.codes.copy()
    levels = mesh0.levels.copy()
    dummy = mesh0.dummy.copy()
    work = [map_data(shape, arr, mesh0) for arr in arrays]
    trackers = [np.zeros(mesh0.n_leaves) for _ in arrays]
    check = batch_check_absolute if spec.kind == ABSOLUTE else batch_check_relative
    dim = shape.dim
    fam = 1 << dim

    iterations = 0
    while max_iterations is None or iterations < max_iterations:
        starts = _family_starts(codes, levels, dim)
        if starts.size == 0:
            break
        members = starts[:, None] + np.arange(fam)
        dmask = dummy[members]
        bounds = resolve_bounds_batch(
            codes[starts] >> np.uint64(dim), levels[starts] - 1, spec, shape)
        ok = np.ones(starts.size, dtype=bool)
        cands, newtrs = [], []
        for vals_leaf, trk_leaf in zip(work, trackers):
            vals = vals_leaf[members]
            trs = trk_leaf[members]
            means, _ = family_means(vals, dmask)
            cand = _quantize(means, value_kind)
            acc, ntr = check(vals, trs, dmask, cand, bounds)
            # Directed rounding: once prior inaccuracy enters the sum, pad the
            # stored tracker by a few ulps so it upper-bounds the deviation in
            # float arithmetic too, not only in exact arithmetic. First-round
            # trackers stay bit-exact (no prior term, single rounded op).
            prior = np.where(dmask, 0.0, trs).max(axis=1) > 0.0
            ntr = np.where(prior, ntr + 4.0 * np.spacing(ntr), ntr)
            if spec.kind == ABSOLUTE:
                acc = ntr <= bounds  # the stored tracker itself meets the bound
            ok &= acc
            cands.append(cand)
            newtrs.append(ntr)
        acc = starts[ok]
        if acc.size == 0:
            break
        new_codes, new_levels, new_dummy, keep = _collapse(codes, levels, dummy, acc, dim)
        for v in range(len(work)):
            work[v][acc] = cands[v][ok]
            trackers[v][acc] = newtrs[v][ok]
            work[v] = work[v][keep]
            trackers[v] = trackers[v][keep]
        codes, levels, dummy = new_codes, new_levels, new_dummy
        iterations += 1

    mesh = ForestMesh(shape, codes, levels, dummy)
    return CoarsenResult(mesh, work, trackers, iterations)


def _package(res: CoarsenResult, index: int, value_kind: str,
             config: CompressionConfig, mesh_bits: bytes) -> CompressedVariable:
    nondummy = ~res.mesh.dummy
    payload = res.values[index][nondummy].astype(VALUE_KIND_DTYPES[value_kind])
    trk = res.trackers[index]
    stats = CompressStats(
        iterations=res.iterations,
        leaf_count=res.mesh.n_leaves,
        max_tracker=float(trk[nondummy].max()) if nondummy.any() else 0.0,
    )
    return CompressedVariable(
        shape=res.mesh.shape,
        value_kind=value_kind,
        mesh_bits=mesh_bits,
        payload=payload,
        criterion=config.spec.default,
        mode=config.mode,
        packing=config.packing,
        stats=stats,
    )


def compress(values, shape: GridShape, config: CompressionConfig) -> CompressedVariable:
    """Compress one linear row-major array under the configured error bounds."""
    arr = np.asarray(values)
    kind = value_kind_of(arr.dtype)
    res = coarsen_forest([arr], shape, config.spec, kind)
    return _package(res, 0, kind, config, serialize_refinement(res.mesh))


def compress_many(variables, shape: GridShape, config: CompressionConfig) -> list[CompressedVariable]:
    """Compress several same-shape variables.

    ``one-for-all`` coarsens a single shared mesh (a family collapses only if
    every variable tolerates it); ``one-for-one`` is a loop of solo runs.
    """
    arrays = [np.asarray(v) for v in variables]
    if not arrays:
        raise ConfigError("no variables given")
    kinds = {value_kind_of(a.dtype) for a in arrays}
    if len(kinds) != 1:
        raise ConfigError(f"variables must share one value kind, got {sorted(kinds)}")
    kind = kinds.pop()
    if config.mode == ONE_FOR_ONE:
        return [compress(a, shape, config) for a in arrays]
    res = coarsen_forest(arrays, shape, config.spec, kind)
    bits = serialize_refinement(res.mesh)
    return [_package(res, i, kind, config, bits) for i in range(len(arrays))]


def decompress(var: CompressedVariable) -> np.ndarray:
    """Reconstruct the full row-major array by constant interpolation.

    Values are reported in stored (packed) space; unpacking via the affine
    record is the caller's transform.
    """
    mesh = deserialize_refinement(var.mesh_bits, var.shape)
    nondummy = ~mesh.dummy
    n_data = int(nondummy.sum())
    if len(var.payload) != n_data:
        raise CorruptArtifactError(
            f"payload holds {len(var.payload)} values, mesh has {n_data} data leaves")
    leaf_values = np.full(mesh.n_leaves, np.nan)
    leaf_values[nondummy] = var.payload.astype(np.float64)
    flat = expand_to_uniform(mesh, leaf_values)
    return flat.astype(VALUE_KIND_DTYPES[var.value_kind])


def split_axis(values: np.ndarray, axis: int) -> list[np.ndarray]:
    """Slice a 3D array into independent 2D arrays along ``axis``."""
    arr = np.asarray(values)
    if arr.ndim != 3:
        raise ShapeError(f"split_axis needs a 3D array, got {arr.ndim}D")
    if not 0 <= axis < 3:
        raise ShapeError(f"axis {axis} out of range for 3D data")
    return [np.ascontiguousarray(np.take(arr, i, axis=axis)) for i in range(arr.shape[axis])]


def stack_axis(slices, axis: int) -> np.ndarray:
    """Inverse of :func:`split_axis`."""
    return np.stack(slices, axis=axis)
