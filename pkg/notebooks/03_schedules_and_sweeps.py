# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Schedules and seeded sweeps
#
# The grid loop visits the family round-robin and activates one cover per
# visit under an activation policy, until a full pass finds nothing.

# %%
from kweak.barrier import strip_half_width
from kweak.field import generate_field, lifetime_upper_bound
from kweak.grids import effective_granularity, shift_family
from kweak.harness import ExperimentConfig, aggregates_csv, run_sweep
from kweak.random_seeds import random_seeds_lifetime
from kweak.scheduling import grid_based_lifetime

L, kappa = 30.0, 10.0
field = generate_field(L, 2.0, seed=7)
print("bound", lifetime_upper_bound(field, kappa))
for eps in (0.0, 0.3):
    w = strip_half_width(eps, kappa)
    fam = shift_family("square", L, kappa, effective_granularity(2.0, w))
    for alg, pol in (("bfs", "uniform"), ("bfs", "nonuniform"), ("minmax", "nonuniform")):
        res = grid_based_lifetime(field, fam, alg, pol, {"m": 2}, strip_half_width=w, epsilon=eps)
        print(f"eps={eps} {alg:7s} {pol:11s} lifetime {res.lifetime:.3f} in {len(res)} covers")

# %% [markdown]
# The location-free variant puts hop balls around random seeds to sleep.

# %%
print("random seeds", random_seeds_lifetime(field, kappa, seed=7).lifetime)

# %% [markdown]
# A small sweep; the same config and base seed always give the same CSV.

# %%
cfg = ExperimentConfig(L=20.0, epsilon=[0.0, 0.3], algorithms=["bfs", "minmax"], trials=3)
rows, aggs = run_sweep(cfg)
print(aggregates_csv(aggs))
