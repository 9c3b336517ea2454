"""Load the bundled graph, inspect its schema, and match paths against patterns."""

from hinfill import MetaPath, derive_schema, load_hin, path_matches

hin = load_hin("data/synthetic/nodes.tsv", "data/synthetic/edges.tsv")
print(f"{len(hin.nodes)} nodes, {len(hin.edges)} edges")
print(f"node types: {hin.node_type_raw}")
print(f"edge types: {hin.edge_type_raw}")

schema = derive_schema(hin)
print("\nobserved type-level triples:")
for s, e, d in sorted(schema.triples):
    print(f"  {hin.node_type_raw[s]} -[{hin.edge_type_raw[e]}]-> {hin.node_type_raw[d]}")

# a 1-hop path instance and the pattern it instantiates
edge = hin.edges[0]
pattern = MetaPath((hin.node_type(edge.src), hin.node_type(edge.dst)), (edge.etype,))
path = [edge.src, edge.etype, edge.dst]
print(f"\npath {' '.join(hin.node_name(edge.src))} -> {' '.join(hin.node_name(edge.dst))}")
print("matches its own pattern:", path_matches(hin, path, pattern))

wrong = MetaPath((hin.node_type(edge.dst), hin.node_type(edge.src)), (edge.etype,))
print("matches the reversed pattern:", path_matches(hin, path, wrong))
