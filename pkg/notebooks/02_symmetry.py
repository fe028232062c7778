# %% [markdown]
# # Rotation axes of a cluster
#
# Candidate axes come from the smallest distance shell; each candidate is
# verified by rotating the whole cluster and matching it back onto itself.

# %%
import numpy as np

from delone6 import build_point_set, cluster_at, detect_axes, group_info, local_group
from delone6.generators import lattice_points
from delone6.pointset import ToleranceModel
from delone6.symmetry import brute_force_axes

# %% [markdown]
# The 2R-cluster of a cubic lattice point: 27 points, 13 axes.

# %%
z3 = build_point_set(lattice_points("cubic", (8, 8, 8)), 2)
i = int(z3.tree.query([4, 4, 4])[1])
info = local_group(z3, i, np.sqrt(3) / 2 + 1e-6)
for a in info.axes:
    print(a.order, np.round(a.direction, 4))

# %% [markdown]
# A heptagon with two poles has one seven-fold axis and seven two-fold
# axes in the ring plane.

# %%
t = 2 * np.pi * np.arange(7) / 7
pts = np.vstack([[0, 0, 0], np.column_stack([np.cos(t), np.sin(t), np.zeros(7)]), [[0, 0, 1.3], [0, 0, -1.3]]])
hept = build_point_set(pts, tol=ToleranceModel(1e-9, 1e-9, 1e-8))
c = cluster_at(hept, int(hept.tree.query([0, 0, 0])[1]), 1.31)
g = group_info(c)
print("n_max", g.n_max, "orders", g.orders())

# %% [markdown]
# The oracle builds candidates from every shell and tries every order; it
# agrees with the fast detector.

# %%
print([a.order for a in detect_axes(c)] == [a.order for a in brute_force_axes(c)])
