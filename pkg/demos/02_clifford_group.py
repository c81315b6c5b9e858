"""Tour of the 24-element Clifford group and its native-gate decompositions.

The group lives in exact integer quaternion arithmetic, so composition,
inversion and recovery-gate lookup carry no floating-point error at all.
"""

import numpy as np

from hqrb.cliffords import CliffordGroup
from hqrb.device import ModelKind, realize
from hqrb.pulses import DeviceParams
from hqrb.su2 import gate_fidelity

group = CliffordGroup.build()
dp = DeviceParams()
schedules = group.compile_schedules(dp)

print(f"group size: {len(group)}")
print("index  word                                duration_ns  steps")
for element, sched in zip(group.elements, schedules):
    word = "*".join(element.decomposition)
    print(f"{element.group_index:5d}  {word:34s}  {sched.duration_ns:10.4f}  {len(sched.steps):5d}")

lengths = [0 if e.decomposition == ("I",) else len(e.decomposition) for e in group.elements]
print(f"\nmean native gates per element: {np.mean(lengths):.3f}")
print(f"mean compiled duration: {np.mean([s.duration_ns for s in schedules]):.3f} ns")

worst = min(
    gate_fidelity(realize(s, None, ModelKind.ABSTRACT, dp), e.unitary)
    for e, s in zip(group.elements, schedules)
)
print(f"worst noiseless compilation fidelity: {worst:.12f}")

# closure and inverses are table lookups
i, j = 5, 17
k = group.compose(i, j)
print(f"\ncompose({i}, {j}) = {k}; inverse({k}) = {group.inverse(k)}")
rng = np.random.default_rng(1)
word = [group.sample_index(rng) for _ in range(6)]
recovery = group.inverse(group.product_index(word))
closed = group.compose(recovery, group.product_index(word))
print(f"random word {word}: recovery {recovery} closes to identity index {closed}")
