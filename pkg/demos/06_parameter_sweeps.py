"""
Choosing d and the position grid
================================

AP over the hypervector dimensionality, and over the horizontal grid
resolution when query views are shifted sideways by a quarter image.
"""

from dataclasses import replace

from hdcagg.experiments import PINNED, dimension_sweep, grid_sweep, summarize

small = replace(PINNED, n_places=60)

recs = dimension_sweep((64, 256, 1024, 4096), seeds=range(4), bench=small)
for row in summarize(recs, "d"):
    print(f"d={row['d']:5d}  AP {row['mean']:.3f} +- {row['std']:.3f}")

# a coarse x grid tolerates the shift, a fine one does not
recs = grid_sweep((1, 2, 4, 7), (6,), seeds=range(2), bench=replace(small, shift=0.25), d=2048)
for row in summarize(recs, "n_x"):
    print(f"n_x={row['n_x']}  AP {row['mean']:.3f}")
