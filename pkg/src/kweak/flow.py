"""Max-flow formulation of square-grid covers.

Each sensor meeting a grid strip becomes an ``in -> out`` arc with capacity
equal to its battery. Horizontal flow enters at the left end of the lowest
horizontal line, snakes through every horizontal line via the region
boundary, reaches the converter node ``mu``, and continues as vertical flow
through every vertical line to the sink. One unit of ``s -> d`` flow is
therefore one unit of time of a grid cover.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .barrier import DEPLETED, Cover, GridContext
from .field import SensorField
from .geometry import EPS_GEOM
from .lp import LPProblem, LPSolution

H, V = "h", "v"
FLOW_TOL = 1e-9


@dataclass
class Arc:
    tail: int
    head: int
    commodities: tuple              # subset of ("h", "v")
    capacity: float                 # math.inf for unconstrained arcs
    kind: str                       # internal | link | boundary | source | sink | to_mu | from_mu


@dataclass
class FlowNetwork:
    sensor_ids: list                # local index -> global sensor id
    classes: list                   # "horizontal" | "vertical" | "mixed" per local sensor
    arcs: list
    s: int
    d: int
    mu: int
    internal: dict = field(default_factory=dict)     # global id -> arc index

    @property
    def n_nodes(self) -> int:
        return 2 * len(self.sensor_ids) + 3

    def node_sensor(self, node: int):
        if node < 2 * len(self.sensor_ids):
            return self.sensor_ids[node // 2]
        return None

    def node_name(self, node: int) -> str:
        if node == self.s:
            return "s"
        if node == self.d:
            return "d"
        if node == self.mu:
            return "mu"
        return f"s{self.sensor_ids[node // 2]}_{'in' if node % 2 == 0 else 'out'}"

    def arc_list(self):
        return [(self.node_name(a.tail), self.node_name(a.head), a.commodities) for a in self.arcs]


def _ordered_lines(ctx: GridContext):
    horiz, vert = [], []
    for ls in ctx.lines:
        x1, y1, x2, y2 = ls.seg
        if abs(y1 - y2) <= EPS_GEOM:
            # anchors: start is the left end, end the right end
            if x1 <= x2:
                horiz.append((y1, ls.start, ls.end, ls))
            else:
                horiz.append((y1, ls.end, ls.start, ls))
        else:
            if y1 <= y2:
                vert.append((x1, ls.start, ls.end, ls))
            else:
                vert.append((x1, ls.end, ls.start, ls))
    horiz.sort(key=lambda t: t[0])
    vert.sort(key=lambda t: t[0])
    return horiz, vert


def build_flow_network(field: SensorField, grid, strip_half_width: float = 0.0) -> FlowNetwork:
    """Vertex-split flow network of a square grid at current batteries.

    Horizontal lines are chained bottom to top, entering line 1 from the left;
    line ``i`` hands over to line ``i + 1`` through right-boundary sensors for
    odd ``i`` and left-boundary sensors for even ``i``. The exit end of the
    last horizontal line feeds ``mu``; vertical lines are chained the same way
    left to right, starting at the bottom of line 1, and the exit end of the
    last one feeds ``d``.
    """
    ctx = grid if isinstance(grid, GridContext) else GridContext(field, grid, strip_half_width)
    if ctx.grid.kind != "square":
        raise ValueError("the flow formulation is defined for square grids only")
    bat = field.battery
    alive = lambda s: bat[s] > DEPLETED  # noqa: E731
    horiz, vert = _ordered_lines(ctx)

    in_h, in_v = set(), set()
    for _, _, _, ls in horiz:
        in_h.update(s for s in ls.candidates.tolist() if alive(s))
    for _, _, _, ls in vert:
        in_v.update(s for s in ls.candidates.tolist() if alive(s))
    ids = sorted(in_h | in_v)
    local = {s: k for k, s in enumerate(ids)}
    K = len(ids)
    s_node, d_node, mu = 2 * K, 2 * K + 1, 2 * K + 2
    din = lambda s: 2 * local[s]          # noqa: E731
    dout = lambda s: 2 * local[s] + 1     # noqa: E731

    classes = []
    arcs: list[Arc] = []
    internal = {}
    for s in ids:
        com = tuple(c for c, S in ((H, in_h), (V, in_v)) if s in S)
        classes.append({(H,): "horizontal", (V,): "vertical"}.get(com, "mixed"))
        internal[s] = len(arcs)
        arcs.append(Arc(din(s), dout(s), com, float(bat[s]), "internal"))

    # sensor-to-sensor arcs between disks overlapping inside a common strip
    shared: dict[tuple, set] = {}
    nbrs = field.graph.neighbors
    for com, lines in ((H, horiz), (V, vert)):
        for _, _, _, ls in lines:
            members = set(s for s in ls.candidates.tolist() if alive(s))
            for u in sorted(members):
                for v in nbrs[u]:
                    if v > u and v in members:
                        shared.setdefault((u, v), set()).add(com)
    for (u, v) in sorted(shared):
        com = tuple(c for c in (H, V) if c in shared[(u, v)])
        arcs.append(Arc(dout(u), din(v), com, math.inf, "link"))
        arcs.append(Arc(dout(v), din(u), com, math.inf, "link"))

    def chain(lines, com, first_tail, last_head):
        if not lines:
            return
        # entry side of line i alternates: 0 -> start anchors, 1 -> end anchors
        entry = [sorted(s for s in lines[0][1] if alive(s))]
        for s in entry[0]:
            arcs.append(Arc(first_tail, din(s), (com,), math.inf, "source" if com == H else "from_mu"))
        for i in range(len(lines) - 1):
            exit_end = 2 if i % 2 == 0 else 1
            a_set = sorted(s for s in lines[i][exit_end] if alive(s))
            b_set = sorted(s for s in lines[i + 1][exit_end] if alive(s))
            for a in a_set:
                for b in b_set:
                    if a != b:
                        arcs.append(Arc(dout(a), din(b), (com,), math.inf, "boundary"))
        last_exit = 2 if (len(lines) - 1) % 2 == 0 else 1
        for s in sorted(s for s in lines[-1][last_exit] if alive(s)):
            arcs.append(Arc(dout(s), last_head, (com,), math.inf, "to_mu" if com == H else "sink"))

    chain(horiz, H, s_node, mu)
    chain(vert, V, mu, d_node)
    return FlowNetwork(ids, classes, arcs, s_node, d_node, mu, internal)


@dataclass
class FlowLP:
    problem: LPProblem
    var_arc: np.ndarray           # arc index per variable
    var_com: list                 # commodity per variable
    network: FlowNetwork


def to_standard_lp(network: FlowNetwork) -> FlowLP:
    """One variable per (arc, permitted commodity); rows as in the max-flow LP.

    Rows: per-node, per-commodity conservation at every sensor node; one
    shared battery row per sensor; ``mu`` conversion; source/sink balance.
    Unconstrained arcs get the finite bound ``sum(batteries) + 1``.
    """
    var_arc, var_com = [], []
    for k, a in enumerate(network.arcs):
        for c in a.commodities:
            var_arc.append(k)
            var_com.append(c)
    n = len(var_arc)
    total_battery = sum(a.capacity for a in network.arcs if a.kind == "internal")
    big_m = total_battery + 1.0
    names = []
    for k, c in zip(var_arc, var_com):
        a = network.arcs[k]
        names.append(f"{'x' if c == H else 'y'}_{network.node_name(a.tail)}_{network.node_name(a.head)}")

    rows: dict[tuple, dict] = {}
    cap_rows: dict[int, dict] = {}
    mu_row: dict = {}
    sd_row: dict = {}
    c = np.zeros(n)
    upper = np.full(n, big_m)
    for j, (k, com) in enumerate(zip(var_arc, var_com)):
        a = network.arcs[k]
        for node, sign in ((a.tail, -1.0), (a.head, 1.0)):
            if node < network.s:
                rows.setdefault((node, com), {})[j] = sign
        if a.kind == "internal":
            cap_rows.setdefault(k, {})[j] = 1.0
            upper[j] = a.capacity
        if a.tail == network.s:
            c[j] = 1.0
            sd_row[j] = 1.0
        if a.head == network.d:
            sd_row[j] = sd_row.get(j, 0.0) - 1.0
        if a.head == network.mu:
            mu_row[j] = 1.0
        if a.tail == network.mu:
            mu_row[j] = mu_row.get(j, 0.0) - 1.0

    eq, eq_names = [], []
    for (node, com) in sorted(rows):
        eq.append(rows[(node, com)])
        eq_names.append(f"cons_{com}_{network.node_name(node)}")
    eq.append(mu_row)
    eq_names.append("mu_conversion")
    eq.append(sd_row)
    eq_names.append("source_sink")
    ub, ub_names, b_ub = [], [], []
    for k in sorted(cap_rows):
        ub.append(cap_rows[k])
        ub_names.append(f"cap_{network.node_name(network.arcs[k].tail)[:-3]}")
        b_ub.append(network.arcs[k].capacity)

    def to_csr(rowdicts):
        data, ri, ci = [], [], []
        for i, r in enumerate(rowdicts):
            for j, v in r.items():
                ri.append(i)
                ci.append(j)
                data.append(v)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rowdicts), n))

    problem = LPProblem(c, to_csr(eq), np.zeros(len(eq)), to_csr(ub), np.array(b_ub, dtype=float),
                        upper, names, eq_names, ub_names)
    return FlowLP(problem, np.array(var_arc, dtype=np.int64), var_com, network)


def arc_flows(flp: FlowLP, solution: LPSolution) -> dict:
    """``(arc index, commodity) -> flow`` for positive flows."""
    out = {}
    for j, v in enumerate(solution.x.tolist()):
        if v > FLOW_TOL:
            out[(int(flp.var_arc[j]), flp.var_com[j])] = v
    return out


# --- augmenting-path oracle ---------------------------------------------

class _Dinic:
    def __init__(self, n):
        self.n = n
        self.head, self.cap, self.nxt, self.first = [], [], [], [-1] * n
        self.to = []

    def add(self, u, v, c):
        for a, b, cc in ((u, v, c), (v, u, 0.0)):
            self.to.append(b)
            self.cap.append(cc)
            self.nxt.append(self.first[a])
            self.first[a] = len(self.to) - 1

    def maxflow(self, s, t) -> float:
        total = 0.0
        to, cap, nxt, first = self.to, self.cap, self.nxt, self.first
        while True:
            level = [-1] * self.n
            level[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                e = first[u]
                while e != -1:
                    if cap[e] > FLOW_TOL and level[to[e]] < 0:
                        level[to[e]] = level[u] + 1
                        q.append(to[e])
                    e = nxt[e]
            if level[t] < 0:
                return total
            it = list(first)
            while True:
                pushed = self._augment(s, t, level, it)
                if pushed <= FLOW_TOL:
                    break
                total += pushed

    def _augment(self, s, t, level, it) -> float:
        # iterative DFS along the level graph, returns bottleneck pushed
        to, cap, nxt = self.to, self.cap, self.nxt
        stack = [s]
        edges = []
        while stack:
            u = stack[-1]
            if u == t:
                f = min(cap[e] for e in edges)
                for e in edges:
                    cap[e] -= f
                    cap[e ^ 1] += f
                return f
            e = it[u]
            advanced = False
            while e != -1:
                v = to[e]
                if cap[e] > FLOW_TOL and level[v] == level[u] + 1:
                    stack.append(v)
                    edges.append(e)
                    advanced = True
                    break
                e = nxt[e]
                it[u] = e
            if not advanced:
                it[u] = -1
                level[u] = -2          # dead end
                stack.pop()
                if edges:
                    e_back = edges.pop()
                    w = stack[-1]
                    it[w] = nxt[it[w]] if it[w] != -1 else -1
        return 0.0


def max_flow_oracle(network: FlowNetwork) -> float:
    """Max ``s -> d`` flow by augmenting paths, commodities as separate layers.

    Each sensor node is split per commodity it may carry, so horizontal flow
    can only turn vertical at ``mu``. A mixed sensor gets its full battery in
    each layer (the LP shares it between layers), so this value is an upper
    bound on the LP optimum and equals it whenever no mixed sensor is used by
    both layers.
    """
    idx = {}

    def node(v, com):
        key = (v, com) if v < network.s else (v, None)
        if key not in idx:
            idx[key] = len(idx)
        return idx[key]

    edges = []
    for a in network.arcs:
        for c in a.commodities:
            edges.append((node(a.tail, c), node(a.head, c), a.capacity))
    src, dst = node(network.s, H), node(network.d, V)
    g = _Dinic(len(idx))
    finite_total = sum(a.capacity for a in network.arcs if a.kind == "internal")
    for u, v, cap in edges:
        g.add(u, v, cap if math.isfinite(cap) else finite_total + 1.0)
    return g.maxflow(src, dst)


# --- flow decomposition ---------------------------------------------------

@dataclass
class FlowPath:
    nodes: list                     # layered path, e.g. [s, 0, 1, ..., mu, ..., d]
    delta: float
    sensors: tuple


@dataclass
class FlowDecomposition:
    paths: list
    residual: dict

    @property
    def total(self) -> float:
        return float(sum(p.delta for p in self.paths))


def decompose_paths(flp: FlowLP, solution: LPSolution) -> FlowDecomposition:
    """Greedy path extraction from an optimal flow.

    From ``s`` repeatedly follow the outgoing arc carrying the most flow
    (ties: smallest head node, then commodity), cancel any loop met on the
    way, and deaugment the loop-free path by its bottleneck.
    """
    net = flp.network
    flow = arc_flows(flp, solution)
    out: dict[tuple, list] = {}
    for (k, c) in flow:
        a = net.arcs[k]
        key = (a.tail, c) if a.tail < net.s else (a.tail, None)
        out.setdefault(key, []).append((k, c))

    def layered_head(k, c):
        a = net.arcs[k]
        return (a.head, c) if a.head < net.s else (a.head, None)

    def source_flow():
        return sum(v for v in (flow.get(e, 0.0) for e in out.get((net.s, None), [])) if v > FLOW_TOL)

    paths = []
    guard = 0
    while source_flow() > FLOW_TOL:
        guard += 1
        if guard > 100_000:
            raise RuntimeError("flow decomposition did not terminate")
        nodes = [(net.s, None)]
        used = []
        pos = {(net.s, None): 0}
        while nodes[-1] != (net.d, None):
            cur = nodes[-1]
            cands = [e for e in out.get(cur, []) if flow.get(e, 0.0) > FLOW_TOL]
            if not cands:
                # numerical crumbs: drop the thinnest arc that led here and restart
                flow[min(used, key=lambda x: flow[x])] = 0.0
                break
            e = min(cands, key=lambda e: (-flow[e], net.arcs[e[0]].head, e[1]))
            nxt = layered_head(*e)
            if nxt in pos:
                i = pos[nxt]
                loop = used[i:] + [e]
                f = min(flow[x] for x in loop)
                for x in loop:
                    flow[x] -= f
                for nd in nodes[i + 1:]:
                    del pos[nd]
                nodes = nodes[:i + 1]
                used = used[:i]
                continue
            used.append(e)
            pos[nxt] = len(nodes)
            nodes.append(nxt)
        else:
            f = min(flow[x] for x in used)
            for x in used:
                flow[x] -= f
            sensors = sorted({net.node_sensor(n) for n, _ in nodes if n < net.s})
            paths.append(FlowPath([n for n, _ in nodes], f, tuple(sensors)))
    residual = {e: v for e, v in flow.items() if v > FLOW_TOL}
    # cancel leftover circulations so the residual is empty after deaugmentation
    residual = _cancel_cycles(net, residual)
    return FlowDecomposition(paths, residual)


def _cancel_cycles(net: FlowNetwork, flow: dict) -> dict:
    flow = dict(flow)
    while flow:
        start = min(flow, key=lambda e: (e[0], e[1]))
        a = net.arcs[start[0]]
        out: dict[tuple, list] = {}
        for (k, c), v in flow.items():
            t = net.arcs[k].tail
            out.setdefault((t, c) if t < net.s else (t, None), []).append((k, c))
        cur = (a.tail, start[1]) if a.tail < net.s else (a.tail, None)
        seen = {cur: 0}
        walk = []
        while True:
            cands = out.get(cur, [])
            if not cands:
                for e in walk:
                    flow.pop(e, None)
                flow.pop(start, None)
                break
            e = max(cands, key=lambda x: flow[x])
            walk.append(e)
            h = net.arcs[e[0]].head
            cur = (h, e[1]) if h < net.s else (h, None)
            if cur in seen:
                loop = walk[seen[cur]:]
                f = min(flow[x] for x in loop)
                for x in loop:
                    flow[x] -= f
                    if flow[x] <= FLOW_TOL:
                        del flow[x]
                break
            seen[cur] = len(walk)
    return flow


def flow_covers(decomp: FlowDecomposition, epsilon: float = 0.0, grid_index=None):
    """``(Cover, delta)`` pairs from a decomposition."""
    ref = grid_index if grid_index is not None else "none"
    return [(Cover(p.sensors, ref, epsilon, "lp", None), p.delta) for p in decomp.paths]
