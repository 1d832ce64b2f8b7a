"""
How many features fit in one vector
===================================

One true match is bundled with a growing number of other features. Its
similarity decays like 1/sqrt(n) yet stays well above chance.
"""

import numpy as np

from hdcagg.experiments import capacity_experiment

recs = capacity_experiment(d=4096, ns=(1, 2, 5, 10, 50, 200), trials=10)
noise = recs[0]["random_bound_std"]
print(f"random-pair std: {noise:.4f}")
print("   n   with binding   1/sqrt(n)   without binding")
for r in recs:
    print(f"{r['n']:4d}   {r['with_binding']:12.4f}   {1 / np.sqrt(r['n']):9.4f}   {r['without_binding']:15.4f}")

# without binding the centered descriptors of one image sum to zero, so the
# last column collapses once every feature has been added
