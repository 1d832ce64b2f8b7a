"""
Encoding image positions
========================

Nearby coordinates get similar vectors, distant ones get unrelated vectors.
"""

import numpy as np

from hdcagg import SymbolTable, cosine, encode_pose, encode_scalar, make_basis_bank

table = SymbolTable(master_seed=3, d=4096)
bx = make_basis_bank(table, "X", (1, 640), n=4)
by = make_basis_bank(table, "Y", (1, 480), n=6)
L = bx.width
print(f"x axis: {bx.n} subintervals of width {L}")

# similarity falls linearly and reaches zero one subinterval away
x0 = 90.0
for frac in (0.0, 0.25, 0.5, 0.75, 1.0, 2.0):
    c = cosine(encode_scalar(bx, x0), encode_scalar(bx, x0 + frac * L))
    print(f"  separation {frac:4.2f} L: cos = {c:+.3f}   ideal {max(0.0, 1 - frac):.3f}")

# a value at a border is exactly that border's basis vector
border = bx.range_lo + L
print(f"x={border} equals basis 1:", bool(np.array_equal(encode_scalar(bx, border), bx.basis[1])))

# 2-D poses bind the two axes; similarity is roughly the product of both
p, q = (120, 200), (160, 240)
cx = cosine(encode_scalar(bx, p[0]), encode_scalar(bx, q[0]))
cy = cosine(encode_scalar(by, p[1]), encode_scalar(by, q[1]))
cp = cosine(encode_pose(bx, by, *p).vector, encode_pose(bx, by, *q).vector)
print(f"pose {p} vs {q}: cos = {cp:.3f}, product of axes = {cx * cy:.3f}")
