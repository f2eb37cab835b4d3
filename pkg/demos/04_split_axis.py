"""Why splitting a high-variability dimension helps.

The layered field jumps by 1000 between consecutive layers, so in 3D every
family that straddles two layers is rejected and almost nothing coarsens.
Splitting the layer axis turns the data into independent smooth 2D slices
that compress well. Octree families are also twice the size of quadtree
families (8 members vs 4), which makes the 3D check stricter to begin with.
"""

import numpy as np

from amrc import (
    CompressionConfig,
    Criterion,
    ErrorSpec,
    GridShape,
    compress,
    compress_many,
    decompress,
    split_axis,
    stack_axis,
    write_artifact,
)
from amrc.fields import layered

extents = (8, 64, 64)
field = layered(extents, seed=4)  # 1000*layer + smooth(x, y)
flat = field.reshape(-1)
config = CompressionConfig(ErrorSpec(Criterion("abs", 1.0)))

whole = compress(flat, GridShape(extents), config)
blob3d = write_artifact([whole])

slices = split_axis(field, 0)
parts = compress_many(slices, GridShape(extents[1:]), config)
blob2d = write_artifact(parts)

recon = stack_axis([decompress(v).reshape(v.shape.extents) for v in parts], 0)
assert np.abs(recon - field).max() <= 1.0

print(f"3D run:    payload {len(whole.payload):6d} values, artifact {len(blob3d)} bytes")
print(f"split run: payload {sum(len(v.payload) for v in parts):6d} values, "
      f"artifact {len(blob2d)} bytes")
print("\nsplitting the layer axis beats compressing the 3D block directly")
