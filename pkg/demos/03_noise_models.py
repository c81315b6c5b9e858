"""Compare the two control-noise models at matched power.

Quasi-static Gaussian noise redraws every step; the 1/f model synthesizes a
colored trace whose band power is matched to the Gaussian variance, so the
two are directly comparable.  The script prints the matched amplitudes,
verifies the spectral slope, and shows the history dependence of the 1/f
samples.
"""

import numpy as np
from scipy import signal

from hqrb.noise import OneOverFParams, OneOverFSynth, QsgParams, calibrate_amplitude, sample_1f, sample_qsg
from hqrb.pulses import synth_rz

print("matched 1/f amplitudes for sigma_j = 10, 20, 30 neV:")
for sigma_j in (10.0, 20.0, 30.0):
    a_j = calibrate_amplitude(sigma_j, 1.0, 50e3, 10e9)
    print(f"  sigma_j = {sigma_j:4.1f} neV  ->  a_j = {a_j:.4f} neV")

params = OneOverFParams.from_matched_power(20.0, 1.0, 50e3, 10e9, sigma_t_ps=10.0)
synth = OneOverFSynth(params)
print(f"\ntrace: M = {synth.m} samples on a {synth.t0_ns} ns grid ({synth.m * synth.t0_ns / 1e3:.0f} us window)")

rng = np.random.default_rng(7)
traces = synth.sample(rng, 25).astype(np.float64)
print(f"time-domain variance / matched power: {traces.var(axis=1).mean() / params.sigma_eq_nev**2:.4f}")

fs = 1.0 / (synth.t0_ns * 1e-9)
freqs, psd = signal.welch(traces, fs=fs, nperseg=32768, axis=1)
band = (freqs >= 10 * params.f_min_hz) & (freqs <= params.f_max_hz / 10)
slope = np.polyfit(np.log(freqs[band]), np.log(psd.mean(axis=0)[band]), 1)[0]
print(f"mid-band periodogram slope: {slope:.3f} (expected -1)")

# history dependence: correlated step samples along a gate sequence
schedules = [synth_rz(2.0) for _ in range(30)]
rng = np.random.default_rng(11)
lags = []
for _ in range(50):
    out = sample_1f(params, schedules, rng)
    vals = np.array([n.dj_nev[2] for n in out], dtype=np.float64)
    lags.append(np.corrcoef(vals[:-1], vals[1:])[0, 1])
print(f"1/f gate-to-gate lag-1 correlation: {np.mean(lags):+.3f}")

qsg = QsgParams(sigma_t_ps=10.0, sigma_j_nev=20.0)
rng = np.random.default_rng(11)
vals = np.array([sample_qsg(qsg, schedules[0], rng).dj_nev[2] for _ in range(2000)])
rho = np.corrcoef(vals[:-1], vals[1:])[0, 1]
print(f"QSG draw-to-draw lag-1 correlation: {rho:+.3f} (memoryless)")
