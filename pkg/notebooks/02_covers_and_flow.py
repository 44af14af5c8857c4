# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Grid covers: BFS, Min-Max and the flow LP
#
# A grid cover holds one barrier of overlapping disks along every grid line.
# Each cover is certified by rasterising the active disks and measuring the
# largest uncovered component.

# %%
from kweak.barrier import bfs_cover, minmax_cover, strip_half_width
from kweak.field import generate_field
from kweak.flow import build_flow_network, decompose_paths, flow_covers, max_flow_oracle, to_standard_lp
from kweak.grids import effective_granularity, shift_family
from kweak.lp import solve_lp
from kweak.verification import verify_kappa_weak

L, kappa, eps = 30.0, 10.0, 0.1
w = strip_half_width(eps, kappa)
field = generate_field(L, 2.0, seed=4)
grid = shift_family("square", L, kappa, effective_granularity(2.0, w))[0]

# %%
bfs = bfs_cover(field, grid, w, epsilon=eps)
mm = minmax_cover(field, grid, w, epsilon=eps)
for name, cover in (("bfs", bfs[0] if bfs else None), ("minmax", mm)):
    if cover is None:
        print(name, "no cover")
        continue
    rep = verify_kappa_weak(field, cover.sensor_ids, kappa, eps)
    print(f"{name}: {len(cover)} sensors, largest hole {rep.max_diameter:.2f}, pass {rep.passed}")

# %% [markdown]
# The flow LP routes horizontal flow through every horizontal line, converts
# it at `mu`, then routes it through every vertical line. The per-commodity
# oracle counts a mixed sensor's battery once per layer, so it bounds the LP
# from above.

# %%
net = build_flow_network(field, grid, w)
flp = to_standard_lp(net)
sol = solve_lp(flp.problem)
dec = decompose_paths(flp, sol)
print(f"{flp.problem.n_vars} variables, LP {sol.objective:.4f}, oracle {max_flow_oracle(net):.4f}")
for cover, delta in flow_covers(dec, eps)[:5]:
    rep = verify_kappa_weak(field, cover.sensor_ids, kappa, eps)
    print(f"  path of {len(cover)} sensors for {delta:.3f}, hole {rep.max_diameter:.2f}")
