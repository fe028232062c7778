# %% [markdown]
# # Five-fold points in an icosahedral quasicrystal
#
# Points of Z^6 whose internal-space image falls in a ball are projected to
# physical space.  Five-fold local symmetry removes points from K and Y but
# not from X6, and X6 stays far denser than its worst-case bound.

# %%
from delone6 import GeneratorSpec, analyze, generate
from delone6.analysis import run_probes

s = generate(GeneratorSpec("cut_project_icosahedral", (12, 12, 12), {"window_radius": "0.85", "margin": "2.8"}))
an = analyze(s.pset)
rep = an.report
print(len(s.pset), "points,", rep.counts["total_window_points"], "in the window")
print("n_max histogram", rep.histogram)
print("fractions", {k: round(v, 3) for k, v in rep.fractions.items()})

# %%
bc = rep.bound_check
print(f"R(X6) = {bc['R_X6']:.4f}, host R = {bc['R_host']:.4f}, margins: "
      f"16.4R {bc['margin_16.4R']:.2f}, 15.4R {bc['margin_15.4R']:.2f}")
probe = run_probes(an, 1000, seed=0)
print("largest probe distance to X6", round(probe["max_distance"], 4), "vs 16.4R", round(probe["bound_16.4R"], 2))
