"""
Global and local conflict
=========================

conf(x, ..., y) = log2(P(x)...P(y) / P(x*...*y)). A positive value means the
findings are rarer together than they would be if unrelated. The trace
splits the global value over the cliques visited by the collect pass.
"""

import numpy as np

import bnconflict as bn

net = bn.holmes()
tree = bn.compile_network(net)
session = bn.open_session(tree)
session.enter("Alarm", "Y", "a")
session.enter("Seismometer", "state0", "s")

for root in range(len(tree.cliques)):
    trace = bn.conflict_trace(session, root)
    print(f"root {root}: global conf = {trace.global_conf:.3f} bits")
    for node in trace.nodes.values():
        labels = [trace.labels[k] for k in node.findings]
        print(f"   clique {node.clique} {node.variables}: local {node.local:.3f}"
              f"  subglobal {node.subglobal:.3f}  findings {labels}")

# %%
# A bigger example: five findings that meet from two sides of a tree.
rng = np.random.default_rng(4)
parents = {"X": ["H"], "Y": ["X"], "Z": ["X"], "U": ["H"], "V": ["U"]}
tables = {n: rng.dirichlet([1, 1], size=2 if n in parents else 1).ravel() for n in "HXYZUV"}
chain = bn.build_network([(n, "ab") for n in "HXYZUV"], parents, tables)
s = bn.open_session(bn.compile_network(chain))
for n in "XYZUV":
    s.enter(n, "a")
trace = bn.conflict_trace(s)
print(f"\nglobal conf {trace.global_conf:.4f}")
for node in trace.meeting_nodes():
    print(f"findings meet in clique {node.clique}: local {node.local:.4f}")
