"""Walk through the exchange-pulse synthesis for x, z, y and Euler gates.

Every gate is a short sequence of exchange-coupling pulses: two steps for an
x rotation, three for a z rotation, and concatenations for everything else.
This script prints the schedules, checks the duration sum rule of the
x sequence, and compares compiled durations against the reference table the
calibration tooling uses.
"""

import math

import numpy as np

from hqrb.device import REFERENCE_GATE_TIMES_NS, ModelKind, realize
from hqrb.pulses import DeviceParams, sequence_constants, synth_hadamard, synth_rx, synth_rz, synth_y
from hqrb.su2 import PLANCK_UEV_NS, gate_fidelity

dp = DeviceParams()  # J_max = 1 ueV, E_z = 0.25 ueV
print(f"device: J_max = {dp.j_max_uev} ueV, E_z = {dp.e_z_uev} ueV, J = {dp.j_uev} ueV")
a, b, c = sequence_constants(dp)
print(f"sequence constants: a = {a:.4f}, b = {b:.4f}, c = {c:.4f} ueV\n")


def show(schedule):
    print(f"{schedule.label}  (total {schedule.duration_ns:.4f} ns)")
    for i, s in enumerate(schedule.steps):
        print(
            f"  step {i}: J1 = {s.j1_uev:.2f}  J2 = {s.j2_uev:.2f}  J = {s.j_uev:.2f} ueV"
            f"   t = {s.duration_ns:8.4f} ns   drives {s.channel}"
        )
    fid = gate_fidelity(realize(schedule, None, ModelKind.ABSTRACT, dp), schedule.target)
    print(f"  noiseless fidelity to target: {fid:.12f}\n")


show(synth_rx(math.pi, dp))
show(synth_rz(math.pi / 2, dp))
show(synth_y(math.pi, dp))
show(synth_hadamard(dp))

print("x-sequence sum rule: total duration is 2n h/c for every angle")
for theta in np.linspace(0.3, 6.0, 5):
    sched = synth_rx(float(theta), dp)
    n = round(sched.duration_ns * c / (2 * PLANCK_UEV_NS))
    print(f"  theta = {theta:.2f}: total = {sched.duration_ns:.6f} ns = 2*{n}*h/c")

print("\nreference gate times (diagnostic; see the calibrate-ez report):")
for gate, ref in REFERENCE_GATE_TIMES_NS.items():
    print(f"  {gate:8s} reference {ref:6.2f} ns")
print("run `hqrb calibrate-ez` for the best-fit E_z against this table.")
