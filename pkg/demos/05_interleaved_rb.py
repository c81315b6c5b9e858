"""Interleaved randomized benchmarking: isolate the error of one gate.

A reference RB run fixes the baseline decay p; interleaving a fixed gate
after every random Clifford gives a second decay p_i, from which the gate
error eps = (1 - p_i/p)/2 and its rigorous interval follow.  The Hadamard,
compiled as the longest pulse sequence of the three, comes out worst.

Desk scale again; expect a couple of minutes.
"""

import time

from hqrb.analysis import fit_decay, irb_result
from hqrb.noise import QsgParams
from hqrb.rb import RbConfig, run_campaign


def campaign(interleave=None):
    config = RbConfig(
        n_seq=100,
        n_rep=10,
        seed=90210,
        interleave=interleave,
        noise=QsgParams(sigma_t_ps=50.0, sigma_j_nev=20.0),
    )
    return fit_decay(run_campaign(config, threads=2))


start = time.time()
rb = campaign()
print(f"reference RB: p = {rb.p:.5f} +- {rb.se_p:.5f}, EPC = {rb.epc:.5f}")

print("\ngate   p_i        eps        interval")
for gate in ("x", "z", "h"):
    fit = campaign(interleave=gate)
    res = irb_result(rb, fit)
    lo, hi = res.interval
    print(f"  {gate}    {res.p_i:.5f}   {res.eps:.5f}   [{lo:.5f}, {hi:.5f}]")

print(f"\ntotal time: {time.time() - start:.0f}s")
