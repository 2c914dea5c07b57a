"""
Surprise index
==============

The surprise index of an observed configuration sums the probabilities of
every configuration that is no more likely. It needs the whole table of
configurations, so it only suits small variable sets.
"""

import numpy as np

import bnconflict as bn

net = bn.holmes()
joint = bn.enumerate_joint(net)
table = joint.values.sum(axis=(0, 1))  # P(Seismometer, Alarm)
print("P(Seismometer, Alarm):")
print(table.round(6))

index = bn.surprise_index(joint, {"Alarm": 1, "Seismometer": 0})
print(f"surprise index of (Alarm=Y, Seismometer=state0): {index:.6f}")

for s, a in np.ndindex(table.shape):
    print(net["Seismometer"].states[s], net["Alarm"].states[a],
          round(bn.surprise_index(joint, {"Seismometer": s, "Alarm": a}), 6))
