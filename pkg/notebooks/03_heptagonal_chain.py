# %% [markdown]
# # A seven-fold point and its off-axial chain
#
# Points whose 2R-cluster has an axis of order 7 or more are rare but not
# impossible.  The heptagonal column sample builds one: rings of 7k points
# about a vertical axis, alternating in phase from layer to layer, inside a
# cubic filler.  From such a point the chain steps to the nearest point off
# the axis; each link is shorter than the last by a factor below 0.87 until
# the walk reaches a point with no axis above order 6.

# %%
import math

from delone6 import GeneratorSpec, build_chain, generate, local_group, verify_decay

sample = generate(GeneratorSpec("heptagonal_column", (36, 36, 36)))
ps, meta = sample.pset, sample.info
print(len(ps), "points; column parameters", {k: meta[k] for k in ("spacing", "gap", "rings")})
print(f"r = {meta['r']:.4f}, R in [{meta['R']:.4f}, {meta['R'] + meta['R_error']:.4f}]")

# %%
R_up = meta["R"] + meta["R_error"]
start = meta["seven_fold_index"]
info = local_group(ps, start, R_up)
print("n_max at the column point:", info.n_max, "principal axis", info.principal_axis.direction.round(6))

# %%
chain = build_chain(ps, start, R_up, meta["r"])
print("chain", chain.indices, "orders", chain.orders, "links", [round(x, 4) for x in chain.link_lengths])
print("length bound M =", round(chain.M_bound, 3), "so at most", math.ceil(chain.M_bound) + 1, "points")
print(verify_decay(chain, meta["R"], ps.points).to_dict())
