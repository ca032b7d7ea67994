"""Generate road-network instances and poke at their structure.

Shows the generator contract: nodes uniform on a 10 km grid, random
distinct edges, largest connected component kept, Manhattan edge lengths,
depot relabeled to node 0 nearest the origin.
"""

import tempfile

from rppmtd import build_metrics, generate_instance, load_instance, save_instance

print("=" * 60)
print("Instance generation")
print("=" * 60)

for n, e, r in [(50, 100, 15), (100, 200, 25), (200, 400, 50)]:
    inst = generate_instance(n, e, r, grid_size=10.0, seed=1)
    req_km = sum(inst.edges[i].length for i in inst.required_ids)
    print(f"\nrequested N{n}E{e}R{r} -> realized {inst.name}")
    print(f"  nodes {inst.n_nodes}, edges {inst.n_edges}, required {inst.n_required}")
    print(f"  required length total {req_km:.1f} km")
    print(f"  speeds: truck {inst.truck_speed} km/h, drone {inst.drone_speed} km/h,"
          f" endurance {inst.tau} h")

print("\n" + "=" * 60)
print("File round trip")
print("=" * 60)
inst = generate_instance(20, 40, 6, seed=7)
with tempfile.NamedTemporaryFile(suffix=".rpp", delete=False) as fh:
    path = fh.name
save_instance(inst, path)
again = load_instance(path)
print(f"saved to {path}; load equals original: {again == inst}")

print("\n" + "=" * 60)
print("Metric tables")
print("=" * 60)
metrics = build_metrics(inst)
u, v = metrics.req_endpoint_index[1]
print(f"first required arc runs {u} -> {v}, length {metrics.req_length[1]:.3f} km")
print(f"shortest road distance depot -> {u}: {metrics.truck_node_dist[0][u]:.3f} km")
paths = metrics.shortest_paths(0, u)
print(f"co-optimal depot -> {u} paths ({len(paths)}):")
for p in paths:
    print("   ", " -> ".join(map(str, p)))
