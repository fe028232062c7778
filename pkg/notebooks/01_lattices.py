# %% [markdown]
# # Delone parameters of the standard lattices
#
# Packing radius r is half the shortest distance; covering radius R is the
# deepest hole.  The estimator returns a certified bracket [R, R + R_error].

# %%
import math

from delone6 import GeneratorSpec, estimate_params, generate

expected = {
    "cubic": (0.5, math.sqrt(3) / 2),
    "bcc": (math.sqrt(3) / 4, math.sqrt(5) / 4),
    "fcc": (math.sqrt(2) / 4, 0.5),
    "hexagonal": (0.5, math.sqrt(1 / 3 + 1 / 4)),
}

# %%
for kind, (r, R) in expected.items():
    sample = generate(GeneratorSpec(kind, (8, 8, 8), {"margin": "2"}))
    p = estimate_params(sample.pset, 1e-4)
    print(f"{kind:10s} r = {p.r:.6f} ({r:.6f})   R in [{p.R:.6f}, {p.R_upper:.6f}]  exact {R:.6f}")

# %% [markdown]
# A perturbed lattice keeps r' >= r - 2 delta and R' <= R + delta.

# %%
for delta in (0.02, 0.05, 0.1):
    s = generate(GeneratorSpec("perturbed", (10, 10, 10), {"delta": str(delta), "seed": "1", "margin": "2"}))
    p = estimate_params(s.pset, 1e-3)
    bound = math.sqrt(3) / 2 + delta
    print(f"delta {delta:.2f}: r' = {p.r:.4f} >= {0.5 - 2 * delta:.2f},  R' = {p.R:.4f} <= {bound:.4f}")
