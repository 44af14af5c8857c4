# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Sensor fields and grid families
#
# A field is a Poisson process of unit disks in `[0, L]^2`. Its depth (the
# largest number of disks over one point) times kappa bounds any schedule's
# lifetime. Grids are square or hexagonal tilings whose cells have diameter
# kappa; a family is a set of shifted copies.

# %%
import math

from kweak.field import generate_field, lifetime_upper_bound, region_depth
from kweak.grids import shift_family, tiling_edge_length

L, kappa = 30.0, 10.0
field = generate_field(L, 2.0, seed=1)
depth = region_depth(field)
print(f"{field.n} sensors, depth {depth.d_R}, lifetime bound {lifetime_upper_bound(field, kappa):g}")

# %% [markdown]
# Family sizes depend on the shift granularity.

# %%
for kind in ("square", "hexagonal"):
    for g in (1.0, 2.0):
        print(kind, g, len(shift_family(kind, L, kappa, g)))

# %% [markdown]
# Total edge length of one tiling against its closed form at L = 50.

# %%
sq = tiling_edge_length(shift_family("square", 50, kappa, 2.0)[0])
hx = tiling_edge_length(shift_family("hexagonal", 50, kappa, 2.0)[0])
print(f"square {sq:.1f} vs {4 * math.sqrt(2) * 2500 / kappa:.1f}")
print(f"hex    {hx:.1f} vs {8 / math.sqrt(3) * 2500 / kappa:.1f}")

# %% [markdown]
# Depth histogram: how many raster points sit under k disks.

# %%
print(dict(sorted(depth.depth_histogram.items())))
