"""Command-line front end: compress/decompress raw arrays, inspect artifacts,
and run synthetic error-vs-size sweeps.

Raw inputs are flat binary files described by a text sidecar of ``key=value``
lines (``#`` starts a comment)::

    dims=64,64                     # numpy shape order, last axis fastest
    value_kind=f32                 # f32 | f64 | i16 | i32
    order=row-major-last-fastest   # the only accepted order
    scale_factor=0.01              # optional packing record
    offset=150.0                   # optional, defaults to 0 with scale_factor

Exit codes: 0 success, 2 usage error, 3 data error, 4 corrupt artifact.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import (
    ONE_FOR_ALL,
    ONE_FOR_ONE,
    VALUE_KIND_DTYPES,
    CompressionConfig,
    Packing,
    compress,
    compress_many,
    decompress,
    packed_bound,
    split_axis,
    stack_axis,
)
from .container import read_artifact, write_artifact
from .criteria import ABSOLUTE, RELATIVE, Criterion, ErrorDomain, ErrorSpec
from .errors import (
    ConfigError,
    CorruptArtifactError,
    DataError,
    ShapeError,
    UnsupportedFeatureError,
)
from .fields import GENERATORS
from .mesh import GridShape, deserialize_refinement


@dataclass
class SidecarMeta:
    dims: tuple[int, ...]
    value_kind: str
    scale_factor: float | None = None
    offset: float = 0.0


_SIDECAR_KEYS = {"dims", "value_kind", "order", "scale_factor", "offset"}
_ORDER = "row-major-last-fastest"


def read_sidecar(path) -> SidecarMeta:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise DataError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        if key in ("missing_value", "missing-value"):
            raise DataError(
                f"{path}:{lineno}: missing-value markers inside the domain are not supported")
        if key not in _SIDECAR_KEYS:
            raise DataError(f"{path}:{lineno}: unknown sidecar key {key!r}")
        if key in fields:
            raise DataError(f"{path}:{lineno}: duplicate sidecar key {key!r}")
        fields[key] = value
    for required in ("dims", "value_kind", "order"):
        if required not in fields:
            raise DataError(f"{path}: sidecar is missing required key {required!r}")
    if fields["order"] != _ORDER:
        raise DataError(f"{path}: order must be {_ORDER!r}, got {fields['order']!r}")
    if fields["value_kind"] not in VALUE_KIND_DTYPES:
        raise DataError(f"{path}: unknown value_kind {fields['value_kind']!r}")
    try:
        dims = tuple(int(d) for d in fields["dims"].split(","))
    except ValueError as exc:
        raise DataError(f"{path}: bad dims {fields['dims']!r}") from exc
    scale = float(fields["scale_factor"]) if "scale_factor" in fields else None
    offset = float(fields.get("offset", 0.0))
    if scale is None and "offset" in fields:
        raise DataError(f"{path}: offset given without scale_factor")
    return SidecarMeta(dims, fields["value_kind"], scale, offset)


def _parse_domain(text: str, dim: int) -> tuple[tuple[tuple[int, int], ...], float]:
    """Parse ``x0:x1,y0:y1[,z0:z1]=bound`` (ranges follow the dims order)."""
    body, sep, bound_text = text.rpartition("=")
    if not sep:
        raise ConfigError(f"domain {text!r} is missing '=bound'")
    try:
        bound = float(bound_text)
        ranges = []
        for part in body.split(","):
            lo, _, hi = part.partition(":")
            ranges.append((int(lo), int(hi)))
    except ValueError as exc:
        raise ConfigError(f"bad domain {text!r}") from exc
    if len(ranges) != dim:
        raise ConfigError(f"domain {text!r} has {len(ranges)} ranges for {dim}D data")
    return tuple(ranges), bound


def _check_domain_in_grid(box, shape: GridShape) -> None:
    for (lo, hi), ext in zip(box, shape.extents):
        if hi <= 0 or lo >= ext:
            raise ConfigError(f"domain box {box} does not intersect the grid {shape.extents}")


def cmd_compress(args) -> int:
    meta = read_sidecar(args.meta)
    shape = GridShape(meta.dims)
    raw = np.fromfile(args.input, dtype=VALUE_KIND_DTYPES[meta.value_kind])
    if raw.size != shape.npoints:
        raise DataError(
            f"{args.input}: holds {raw.size} values, sidecar dims need {shape.npoints}")

    kind = ABSOLUTE if args.abs is not None else RELATIVE
    bound = args.abs if args.abs is not None else args.rel
    packing = None
    if meta.scale_factor is not None:
        if kind == RELATIVE:
            raise ConfigError("relative bounds on packed data are not supported; "
                              "use --abs with the unpacked-units bound")
        packing = Packing(meta.scale_factor, meta.offset)
        bound = packed_bound(bound, meta.scale_factor)

    domains = []
    for text in args.domain or []:
        box, dbound = _parse_domain(text, shape.dim)
        _check_domain_in_grid(box, shape)
        if packing is not None:
            dbound = packed_bound(dbound, meta.scale_factor)
        domains.append(ErrorDomain(box, Criterion(kind, dbound)))
    if domains and args.split_axis is not None:
        raise ConfigError("error domains cannot be combined with --split-axis")

    spec = ErrorSpec(Criterion(kind, bound), tuple(domains))
    config = CompressionConfig(spec, mode=args.mode, split_axis=args.split_axis,
                               packing=packing)

    if args.split_axis is not None:
        slices = split_axis(raw.reshape(shape.extents), args.split_axis)
        variables = compress_many(slices, GridShape(slices[0].shape), config)
    else:
        variables = compress_many([raw], shape, config)

    blob = write_artifact(variables)
    Path(args.output).write_bytes(blob)
    leaves = sum(v.stats.leaf_count for v in variables)
    iterations = max(v.stats.iterations for v in variables)
    max_tracker = max(v.stats.max_tracker for v in variables)
    print(f"input_bytes={raw.nbytes} output_bytes={len(blob)} "
          f"ratio={raw.nbytes / len(blob):.4g} leaves={leaves} "
          f"iterations={iterations} max_tracker={max_tracker!r}")
    return 0


def cmd_decompress(args) -> int:
    variables, header = read_artifact(Path(args.input).read_bytes())
    arrays = [decompress(v).reshape(v.shape.extents) for v in variables]
    if len(arrays) == 1:
        out = arrays[0]
    else:
        if not 0 <= args.split_axis <= arrays[0].ndim:
            raise ConfigError(f"--split-axis {args.split_axis} out of range")
        out = stack_axis(arrays, args.split_axis)
    np.ascontiguousarray(out).tofile(args.output)
    return 0


def cmd_info(args) -> int:
    variables, header = read_artifact(Path(args.input).read_bytes())
    extents = "x".join(str(e) for e in header.shape.extents)
    print(f"artifact: {args.input}")
    print(f"dim: {header.shape.dim}  extents: {extents}  "
          f"initial_level: {header.shape.initial_level}")
    print(f"value_kind: {header.value_kind}  "
          f"criterion: {header.criterion.kind} {header.criterion.bound!r}  "
          f"mode: {header.mode}")
    if header.packing is None:
        print("packing: none")
    else:
        print(f"packing: scale={header.packing.scale!r} offset={header.packing.offset!r}")
    print(f"post_pass: {header.post_pass}")
    print(f"variables: {header.n_variables}")
    for i, v in enumerate(variables):
        mesh = deserialize_refinement(v.mesh_bits, v.shape)
        hist = mesh.level_histogram()
        print(f"variable {i}: levels: {hist}  leaves={mesh.n_leaves} "
              f"payload_values={len(v.payload)} payload_bytes={v.payload.nbytes} "
              f"bitfield_bytes={len(v.mesh_bits)}")
    return 0


def cmd_sweep(args) -> int:
    dims = tuple(int(d) for d in args.dims.split(","))
    shape = GridShape(dims)
    errors = [float(e) for e in args.errors.split(",")]
    field = GENERATORS[args.generator](dims, seed=args.seed)
    flat = field.reshape(-1)
    kind = ABSOLUTE if args.criterion == "abs" else RELATIVE
    print("error,bytes,ratio,max_observed_error")
    for bound in errors:
        config = CompressionConfig(ErrorSpec(Criterion(kind, bound)),
                                   split_axis=args.split_axis)
        if args.split_axis is not None:
            slices = split_axis(field, args.split_axis)
            variables = compress_many(slices, GridShape(slices[0].shape), config)
            recon = stack_axis(
                [decompress(v).reshape(v.shape.extents) for v in variables],
                args.split_axis).reshape(-1)
        else:
            variables = [compress(flat, shape, config)]
            recon = decompress(variables[0]).astype(np.float64)
        blob = write_artifact(variables)
        dev = np.abs(recon - flat)
        if kind == ABSOLUTE:
            observed = float(dev.max())
        else:
            nonzero = flat != 0.0
            observed = float((dev[nonzero] / np.abs(flat[nonzero])).max())
        print(f"{bound!r},{len(blob)},{flat.nbytes / len(blob):.6g},{observed!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amrc",
        description="Error-bounded lossy compression of gridded data by adaptive "
                    "mesh coarsening.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a raw array described by a sidecar")
    p.add_argument("--input", required=True, help="raw binary input file")
    p.add_argument("--meta", required=True, help="sidecar metadata file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--abs", type=float, help="absolute point-wise error bound")
    group.add_argument("--rel", type=float, help="relative point-wise error bound (fraction <= 1)")
    p.add_argument("--domain", action="append", metavar="x0:x1,y0:y1[,z0:z1]=BOUND",
                   help="region-wise bound (ranges follow the dims order); repeatable")
    p.add_argument("--mode", choices=[ONE_FOR_ONE, ONE_FOR_ALL], default=ONE_FOR_ONE)
    p.add_argument("--split-axis", type=int, default=None,
                   help="split 3D data along this axis into independent 2D slices")
    p.add_argument("--output", required=True, help="artifact output file (.amrc)")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="reconstruct the raw array from an artifact")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--split-axis", type=int, default=0,
                   help="axis along which to re-stack a multi-variable artifact")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("info", help="print artifact header and mesh summary")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("sweep", help="error-vs-size sweep on a synthetic field (CSV)")
    p.add_argument("--generator", choices=sorted(GENERATORS), required=True)
    p.add_argument("--dims", required=True, help="comma-separated extents")
    p.add_argument("--errors", required=True, help="comma-separated error bounds")
    p.add_argument("--criterion", choices=["abs", "rel"], required=True)
    p.add_argument("--split-axis", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ShapeError, DataError, ConfigError) as exc:
        print(f"amrc: error: {exc}", file=sys.stderr)
        return 3
    except (CorruptArtifactError, UnsupportedFeatureError) as exc:
        print(f"amrc: error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"amrc: error: {exc}", file=sys.stderr)
        return 3
