"""
From local features to one holistic vector
==========================================

Each descriptor is bound to the encoding of its position and all of them
are bundled. Two images are then compared with a single cosine.
"""

import numpy as np

from hdcagg import Encoder, FeatureSet, OpCounter, compare, exhaustive_similarity

rng = np.random.default_rng(0)
n, dim = 60, 128
desc = rng.normal(size=(n, dim))
xy = np.column_stack([rng.uniform(1, 640, n), rng.uniform(1, 480, n)])
image = FeatureSet("place", 640, 480, desc, xy, rng.uniform(size=n))

# the same place seen again: noisy descriptors, slightly moved keypoints
revisit = FeatureSet("revisit", 640, 480, desc + 0.7 * rng.normal(size=(n, dim)),
                     np.clip(xy + rng.normal(scale=10, size=(n, 2)), 1, [640, 480]), image.scores)
# the same descriptors, scrambled over the image
scrambled = FeatureSet("scrambled", 640, 480, desc, rng.permutation(xy), image.scores)
# a different place
other = FeatureSet("other", 640, 480, rng.normal(size=(n, dim)), xy, image.scores)

enc = Encoder(d=4096, seed=1)
counter = OpCounter()
h = enc.encode(image, counter=counter)
print(f"{n} features -> one {h.d}-D vector with {counter.multiplications} multiplications, {counter.sums} sums")

for fs in (revisit, scrambled, other):
    hdc = compare(h, enc.encode(fs))
    full = exhaustive_similarity(image, fs, "positional", standardize=True)
    print(f"{fs.image_id:>9}: holistic {hdc:+.3f}   exhaustive positional {full:+.3f}")
