"""
Hypervector basics
==================

Random bipolar symbols, binding and bundling.
"""

import numpy as np

from hdcagg import SymbolTable, bind, bundle, cosine

# every symbol is derived from (seed, name), so lookups are reproducible
table = SymbolTable(master_seed=7, d=4096)
car, tree = table.get("car"), table.get("tree")
print("car vs tree:", round(cosine(car, tree), 4))

# random symbols are almost orthogonal; the spread shrinks like 1/sqrt(d)
sims = [cosine(table.get(f"a{i}"), table.get(f"b{i}")) for i in range(1000)]
print(f"1000 random pairs: mean {np.mean(sims):+.4f}, std {np.std(sims):.4f} (1/sqrt(d) = {1 / 64:.4f})")

# binding is self-inverse for bipolar vectors
print("bind(car, car) is all ones:", bool(np.all(bind(car, car) == 1)))

# a bound pair looks unrelated to its parts ...
pair = bind(car, tree)
print("bound pair vs car:", round(cosine(pair, car), 4))

# ... but binding both sides with the same key keeps their similarity
x = table.get("key")
a = np.random.default_rng(0).normal(size=4096)
b = a + np.random.default_rng(1).normal(size=4096)
print(f"cos(a, b) = {cosine(a, b):.6f}, cos(x*a, x*b) = {cosine(bind(x, a), bind(x, b)):.6f}")

# bundling keeps each member recognisable, at about 1/sqrt(k)
members = [table.get(f"m{i}") for i in range(4)]
s = bundle(members)
print("member vs bundle of 4:", [round(cosine(m, s), 3) for m in members])
print("non-member vs bundle:", round(cosine(table.get("other"), s), 3))
