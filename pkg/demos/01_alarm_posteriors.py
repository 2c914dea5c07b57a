"""
Posteriors in the burglar-alarm network
=======================================

Compile the alarm network into a junction tree, enter the two reports
(alarm rang, seismometer quiet) and read the posterior joint of burglary
and earthquake.
"""

import bnconflict as bn

net = bn.holmes()
tree = bn.compile_network(net)
print(tree.dump())

# Opening a session calibrates the tree with no evidence.
session = bn.open_session(tree)
for name in net.names:
    print(f"prior {name:<12}", session.marginal(name).round(4))

session.enter("Alarm", "Y")
session.enter("Seismometer", "state0")
session.propagate()

joint = session.joint_marginal(["Burglary", "Earthquake"])
print("\nP(Burglary, Earthquake | a, s), rows Burglary, columns Earthquake:")
print(joint.values.round(2))
print("P(a, s) =", session.evidence_probability())
