"""Road-network instances: generation, file I/O, and metric precomputation.

Trucks drive on the road graph; drones fly straight lines between nodes
except while servicing a required arc, where they follow the arc's road
geometry.  Distances are kilometers, times are hours.
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

DEFAULT_GRID_KM = 10.0
DEFAULT_TRUCK_KMH = 40.0
DEFAULT_DRONE_KMH = 80.0
DEFAULT_TAU_H = 1.0

# Cap on stored co-optimal shortest paths per node pair.
COOPT_CAP = 8
# Path lengths within this many km of the shortest count as co-optimal.
PATH_TOL = 1e-9

FILE_HEADER = "RPPMTD 1"


class InstanceError(ValueError):
    """Invalid instance data or generator configuration."""


class InstanceFormatError(InstanceError):
    """Malformed instance file; the message names the offending line."""


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float
    required: bool


@dataclass(frozen=True)
class Instance:
    """An undirected road graph with a required-edge subset and fleet speeds."""

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    depot: int
    required_ids: tuple[int, ...]
    truck_speed: float
    drone_speed: float
    tau: float
    name: str

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_required(self) -> int:
        return len(self.required_ids)

    def euclidean(self, a: int, b: int) -> float:
        na, nb = self.nodes[a], self.nodes[b]
        return math.hypot(na.x - nb.x, na.y - nb.y)

    def validate(self) -> None:
        ids = [n.id for n in self.nodes]
        if ids != list(range(len(self.nodes))):
            raise InstanceError("node ids must be unique and contiguous from 0")
        if self.depot != 0:
            raise InstanceError("depot must be node 0")
        if self.truck_speed <= 0 or self.drone_speed <= 0:
            raise InstanceError("speeds must be positive")
        if self.tau <= 0:
            raise InstanceError("endurance tau must be positive")
        seen_pairs = set()
        for i, e in enumerate(self.edges):
            if e.u == e.v:
                raise InstanceError(f"edge {i} is a self-loop")
            if not (0 <= e.u < self.n_nodes and 0 <= e.v < self.n_nodes):
                raise InstanceError(f"edge {i} references an unknown node")
            if e.length <= 0:
                raise InstanceError(f"edge {i} has non-positive length")
            key = (min(e.u, e.v), max(e.u, e.v))
            if key in seen_pairs:
                raise InstanceError(f"duplicate edge between {key[0]} and {key[1]}")
            seen_pairs.add(key)
        if not self.required_ids:
            raise InstanceError("instance needs at least one required edge")
        for r in self.required_ids:
            if not (0 <= r < self.n_edges):
                raise InstanceError(f"required edge index {r} out of range")
        if sorted(set(self.required_ids)) != sorted(self.required_ids):
            raise InstanceError("required edge indices must be distinct")
        if not _is_connected(self.n_nodes, [(e.u, e.v) for e in self.edges]):
            raise InstanceError("road graph is not connected")


def _is_connected(n: int, pairs: list[tuple[int, int]]) -> bool:
    if n == 0:
        return False
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def generate_instance(
    n_nodes: int,
    n_edges: int,
    n_required: int,
    grid_size: float = DEFAULT_GRID_KM,
    seed: int = 0,
    *,
    truck_speed: float = DEFAULT_TRUCK_KMH,
    drone_speed: float = DEFAULT_DRONE_KMH,
    tau: float = DEFAULT_TAU_H,
) -> Instance:
    """Sample a random connected instance on a square grid.

    Nodes are uniform on the grid, edges are distinct uniform node pairs,
    and only the largest connected component is kept.  The surviving node
    nearest the grid origin becomes the depot (relabeled 0) and edge
    lengths are the Manhattan distance of their endpoints.  The realized
    node/edge/required counts are recorded in the instance name.
    """
    if n_nodes < 2:
        raise InstanceError("need at least 2 nodes")
    if n_required <= 0:
        raise InstanceError("n_required must be positive")
    if n_edges < n_nodes - 1:
        raise InstanceError("n_edges must be at least n_nodes - 1")

    rng = random.Random(seed)
    coords = [(rng.uniform(0.0, grid_size), rng.uniform(0.0, grid_size)) for _ in range(n_nodes)]

    all_pairs = list(itertools.combinations(range(n_nodes), 2))
    pairs = rng.sample(all_pairs, min(n_edges, len(all_pairs)))

    # Largest connected component; ties broken toward the lowest node id.
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    comp = [-1] * n_nodes
    comp_sizes = []
    for start in range(n_nodes):
        if comp[start] >= 0:
            continue
        label = len(comp_sizes)
        comp[start] = label
        stack = [start]
        size = 1
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if comp[w] < 0:
                    comp[w] = label
                    size += 1
                    stack.append(w)
        comp_sizes.append(size)
    best_label = max(range(len(comp_sizes)), key=lambda c: (comp_sizes[c], -c))
    kept = [i for i in range(n_nodes) if comp[i] == best_label]

    depot_old = min(kept, key=lambda i: (coords[i][0] ** 2 + coords[i][1] ** 2, i))
    order = [depot_old] + [i for i in kept if i != depot_old]
    relabel = {old: new for new, old in enumerate(order)}

    nodes = tuple(Node(new, coords[old][0], coords[old][1]) for new, old in enumerate(order))
    kept_set = set(kept)
    edge_pairs = sorted(
        (min(relabel[u], relabel[v]), max(relabel[u], relabel[v]))
        for u, v in pairs
        if u in kept_set and v in kept_set
    )

    def manhattan(a: int, b: int) -> float:
        return abs(nodes[a].x - nodes[b].x) + abs(nodes[a].y - nodes[b].y)

    n_req = min(n_required, len(edge_pairs))
    if n_req < n_required:
        warnings.warn(
            f"only {len(edge_pairs)} edges survive; marking all of them required",
            stacklevel=2,
        )
    required = sorted(rng.sample(range(len(edge_pairs)), n_req))
    required_set = set(required)
    edges = tuple(
        Edge(u, v, manhattan(u, v), i in required_set) for i, (u, v) in enumerate(edge_pairs)
    )

    name = f"N{len(nodes)}E{len(edges)}R{n_req}_s{seed}"
    inst = Instance(
        nodes=nodes,
        edges=edges,
        depot=0,
        required_ids=tuple(required),
        truck_speed=truck_speed,
        drone_speed=drone_speed,
        tau=tau,
        name=name,
    )
    inst.validate()
    return inst


def save_instance(instance: Instance, path) -> None:
    """Write an instance in the line-oriented text format (see load_instance)."""
    lines = [FILE_HEADER, f"N {instance.n_nodes}"]
    for n in instance.nodes:
        lines.append(f"node {n.id} {n.x!r} {n.y!r}")
    lines.append(f"E {instance.n_edges}")
    for e in instance.edges:
        lines.append(f"edge {e.u} {e.v} {e.length!r} {1 if e.required else 0}")
    lines.append(f"depot {instance.depot}")
    lines.append(f"speeds {instance.truck_speed!r} {instance.drone_speed!r}")
    lines.append(f"tau {instance.tau!r}")
    lines.append(f"name {instance.name}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_instance(path) -> Instance:
    """Parse and validate an instance file.

    Format (one record per line, floats at full precision)::

        RPPMTD 1
        N <count>
        node <id> <x> <y>          (count times)
        E <count>
        edge <u> <v> <length> <0|1 required>   (count times)
        depot <id>
        speeds <truck_kmh> <drone_kmh>
        tau <hours>
        name <text>
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    pos = 0

    def fail(msg: str, lineno: int | None = None) -> InstanceFormatError:
        where = pos + 1 if lineno is None else lineno
        return InstanceFormatError(f"{path}:{where}: {msg}")

    def next_line() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise fail("unexpected end of file", len(lines))
        line = lines[pos]
        pos += 1
        return line

    if next_line().strip() != FILE_HEADER:
        raise fail(f"expected header '{FILE_HEADER}'", 1)

    def expect(tag: str, nfields: int) -> list[str]:
        line = next_line()
        parts = line.split()
        if not parts or parts[0] != tag or len(parts) != nfields + 1:
            raise fail(f"expected '{tag}' record with {nfields} fields, got '{line}'", pos)
        return parts[1:]

    def to_int(tok: str) -> int:
        try:
            return int(tok)
        except ValueError:
            raise fail(f"expected integer, got '{tok}'", pos) from None

    def to_float(tok: str) -> float:
        try:
            val = float(tok)
        except ValueError:
            raise fail(f"expected number, got '{tok}'", pos) from None
        return val

    n_nodes = to_int(expect("N", 1)[0])
    nodes = []
    for _ in range(n_nodes):
        nid, x, y = expect("node", 3)
        nodes.append(Node(to_int(nid), to_float(x), to_float(y)))
    n_edges = to_int(expect("E", 1)[0])
    edges = []
    required_ids = []
    for i in range(n_edges):
        u, v, length, req = expect("edge", 4)
        ui, vi = to_int(u), to_int(v)
        if not (0 <= ui < n_nodes and 0 <= vi < n_nodes):
            raise fail(f"edge endpoint out of range 0..{n_nodes - 1}", pos)
        flag = to_int(req)
        if flag not in (0, 1):
            raise fail("required flag must be 0 or 1", pos)
        edges.append(Edge(ui, vi, to_float(length), bool(flag)))
        if flag:
            required_ids.append(i)
    depot = to_int(expect("depot", 1)[0])
    ts, ds = expect("speeds", 2)
    tau = to_float(expect("tau", 1)[0])
    name_line = next_line()
    if not name_line.startswith("name "):
        raise fail("expected 'name <text>' record", pos)
    name = name_line[len("name "):]

    inst = Instance(
        nodes=tuple(nodes),
        edges=tuple(edges),
        depot=depot,
        required_ids=tuple(required_ids),
        truck_speed=to_float(ts),
        drone_speed=to_float(ds),
        tau=tau,
        name=name,
    )
    try:
        inst.validate()
    except InstanceError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None
    return inst


@dataclass
class MetricTables:
    """Precomputed lookup tables for decoding routes.

    ``truck_node_dist`` holds all-pairs shortest road distances.  For node
    pairs among the depot and required-edge endpoints, ``truck_path_choices``
    stores up to COOPT_CAP co-optimal shortest paths (node sequences); other
    pairs fall back to a single predecessor-reconstructed path.
    """

    truck_node_dist: list[list[float]]
    truck_path_choices: dict[tuple[int, int], tuple[tuple[int, ...], ...]]
    req_endpoint_index: dict[int, tuple[int, int]]
    req_length: dict[int, float]
    euclid_dist: list[list[float]]
    edge_length: dict[tuple[int, int], float]
    predecessors: np.ndarray = field(repr=False)

    def shortest_paths(self, u: int, v: int) -> tuple[tuple[int, ...], ...]:
        """Co-optimal shortest paths from u to v (at least one)."""
        if u == v:
            return ((u,),)
        stored = self.truck_path_choices.get((u, v))
        if stored is not None:
            return stored
        path = [v]
        cur = v
        while cur != u:
            cur = int(self.predecessors[u, cur])
            path.append(cur)
        path.reverse()
        return (tuple(path),)


def build_metrics(instance: Instance) -> MetricTables:
    """All-pairs road distances plus co-optimal path sets for service endpoints."""
    n = instance.n_nodes
    rows, cols, vals = [], [], []
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    edge_length: dict[tuple[int, int], float] = {}
    for e in instance.edges:
        rows.extend((e.u, e.v))
        cols.extend((e.v, e.u))
        vals.extend((e.length, e.length))
        adj[e.u].append((e.v, e.length))
        adj[e.v].append((e.u, e.length))
        edge_length[(e.u, e.v)] = e.length
        edge_length[(e.v, e.u)] = e.length
    for neighbors in adj:
        neighbors.sort()
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    dist_mat, pred = dijkstra(graph, directed=False, return_predecessors=True)
    # Per-source runs can disagree by an ulp; enforce exact symmetry.
    dist_mat = np.minimum(dist_mat, dist_mat.T)

    coords = np.array([(node.x, node.y) for node in instance.nodes])
    diff = coords[:, None, :] - coords[None, :, :]
    euclid = np.sqrt((diff * diff).sum(axis=2))

    req_endpoint_index = {}
    req_length = {}
    interesting = {instance.depot}
    for task, eid in enumerate(instance.required_ids, start=1):
        e = instance.edges[eid]
        req_endpoint_index[task] = (e.u, e.v)
        req_length[task] = e.length
        interesting.add(e.u)
        interesting.add(e.v)

    dist = dist_mat.tolist()
    paths: dict[tuple[int, int], tuple[tuple[int, ...], ...]] = {}
    for s in sorted(interesting):
        ds = dist[s]
        for t in sorted(interesting):
            if t == s:
                continue
            if (t, s) in paths:
                paths[(s, t)] = tuple(tuple(reversed(p)) for p in paths[(t, s)])
            else:
                paths[(s, t)] = tuple(_cooptimal_paths(s, t, ds, adj))

    return MetricTables(
        truck_node_dist=dist,
        truck_path_choices=paths,
        req_endpoint_index=req_endpoint_index,
        req_length=req_length,
        euclid_dist=euclid.tolist(),
        edge_length=edge_length,
        predecessors=pred,
    )


def _cooptimal_paths(
    s: int, t: int, dist_from_s: list[float], adj: list[list[tuple[int, float]]]
) -> list[tuple[int, ...]]:
    """Enumerate up to COOPT_CAP shortest s-t paths over the shortest-path DAG."""
    out: list[tuple[int, ...]] = []
    stack: list[tuple[int, tuple[int, ...]]] = [(t, (t,))]
    while stack and len(out) < COOPT_CAP:
        node, suffix = stack.pop()
        if node == s:
            out.append(suffix)
            continue
        dn = dist_from_s[node]
        preds = [
            u for u, w in adj[node] if abs(dist_from_s[u] + w - dn) <= PATH_TOL
        ]
        # Reversed push so the lowest-id predecessor is explored first.
        for u in reversed(preds):
            stack.append((u, (u,) + suffix))
    return out


def drone_leg_time(instance: Instance, a: int, b: int) -> float:
    """Straight-line flight time between two nodes, in hours."""
    return instance.euclidean(a, b) / instance.drone_speed


def drone_service_time(instance: Instance, required_edge_id: int) -> float:
    """Time for a drone to service a required arc along its road geometry."""
    if not (0 <= required_edge_id < instance.n_edges):
        raise InstanceError(f"edge index {required_edge_id} out of range")
    edge = instance.edges[required_edge_id]
    if not edge.required:
        raise InstanceError(f"edge {required_edge_id} is not required")
    return edge.length / instance.drone_speed


def tau_from_beta(instance: Instance, beta: float) -> float:
    """Endurance limit derived from the mean straight-line node distance.

    tau = (beta / drone_speed) * mean over all unordered node pairs of the
    Euclidean distance, i.e. the average edge length of the complete flight
    graph.
    """
    if beta <= 0:
        raise InstanceError("beta must be positive")
    coords = np.array([(node.x, node.y) for node in instance.nodes])
    diff = coords[:, None, :] - coords[None, :, :]
    euclid = np.sqrt((diff * diff).sum(axis=2))
    n = instance.n_nodes
    iu = np.triu_indices(n, k=1)
    mean_edge = float(euclid[iu].mean())
    return beta / instance.drone_speed * mean_edge
