"""Compressing packed short-integer data directly.

Archive formats often pack floats into small integers via
``value = scale * packed + offset``. The coarsening works on any arithmetic
type, so the packed integers are compressed as-is; only the absolute bound
has to be transformed into packed units by dividing by the scale factor.
Interpolated means are rounded to the integer type before the compliance
check, so the rounding cost is covered by the bound.
"""

import numpy as np

from amrc import (
    CompressionConfig,
    Criterion,
    ErrorSpec,
    GridShape,
    Packing,
    compress,
    decompress,
    packed_bound,
    write_artifact,
)
from amrc.fields import smooth

extents = (128, 128)
scale, offset = 1.0 / 64.0, 250.0
truth = smooth(extents, seed=5) * 6.0 + offset        # "physical" values
packed = np.rint((truth - offset) / scale).astype(np.int16)

eps = 0.5  # bound in physical units
config = CompressionConfig(
    ErrorSpec(Criterion("abs", packed_bound(eps, scale))),
    packing=Packing(scale, offset),
)
var = compress(packed.reshape(-1), GridShape(extents), config)
blob = write_artifact([var])

out = decompress(var)                                  # still packed integers
unpacked = scale * out.astype(np.float64) + offset
reference = scale * packed.reshape(-1).astype(np.float64) + offset
dev = float(np.abs(unpacked - reference).max())

print(f"packed input: {packed.nbytes} bytes of i16, bound {eps} -> "
      f"{packed_bound(eps, scale)} packed units")
print(f"artifact: {len(blob)} bytes ({packed.nbytes / len(blob):.1f}x), "
      f"payload dtype {var.payload.dtype}")
print(f"max unpacked deviation: {dev:.4f} <= {eps}")
assert dev <= eps
