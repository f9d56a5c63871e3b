"""Agglomerate planted clouds with Ward's method, cut the tree, and read
the group profiles.
"""

import numpy as np

from arealstat.cluster import cut, profile, ward_cluster
from arealstat.stats import zscore

rng = np.random.default_rng(5)

# three well separated clouds in two standardized features
centers = [(-2.0, 0.5), (0.0, -1.5), (2.5, 1.0)]
points = np.vstack([
    rng.normal(loc=c, scale=0.3, size=(30, 2)) for c in centers
])
points = np.column_stack([zscore(points[:, 0]), zscore(points[:, 1])])

dendro = ward_cluster(points)
print(f"{dendro.n} points, {len(dendro.merges)} merges")
print("last three merge heights:",
      [round(m[2], 2) for m in dendro.merges[-3:]])

labels = cut(dendro, 3)
for profile_row in profile(labels, points, ["feature_a", "feature_b"]):
    means = ", ".join(
        f"{name} {m:+.2f} ({lab})"
        for name, m, lab in zip(
            profile_row.feature_names, profile_row.means, profile_row.labels
        )
    )
    print(f"group {profile_row.group} (n={profile_row.count}): {means}")

# heights never decrease on the way up the tree
heights = [m[2] for m in dendro.merges]
print("monotone heights:", all(a <= b for a, b in zip(heights, heights[1:])))
