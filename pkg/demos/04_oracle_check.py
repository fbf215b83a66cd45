"""
Checking the moment filter against a particle filter
====================================================

Truncating the moment hierarchy at N harmonics is an approximation. A
bootstrap particle filter with many particles approximates the same
posterior mean in a completely different way, so close agreement between
the two is evidence that the truncation is harmless at these settings.
"""

import argparse

import numpy as np

from circdetect import ScenarioConfig, pf_run, run_filter, simulate

from _plotting import figure_or_none, save

parser = argparse.ArgumentParser()
parser.add_argument("--particles", type=int, default=20_000)
args = parser.parse_args()

cfg = ScenarioConfig(scenario="II", q_theta=1e-2, steps=2000, seed=0).with_snr(0.3)
sig, meas = simulate(cfg)
moment = run_filter(meas, cfg).signal
particle = pf_run(meas, cfg, args.particles)

diff = np.abs(moment - particle.estimates)
burn = cfg.steps // 5
print(f"mean |moment - particle| after burn-in: {diff[burn:].mean():.4f}")
print(f"largest gap after burn-in: {diff[burn:].max():.4f}")
print(f"particle resampling happened on {particle.resampled.mean():.0%} of the steps")

plt = figure_or_none()
if plt is not None:
    t = particle.t
    fig, ax = plt.subplots(figsize=(9, 3.5))
    ax.plot(t, np.cos(sig.theta), "k", lw=0.8, label="cos(theta)")
    ax.plot(t, moment.real, "b", label="moment filter")
    ax.plot(t, particle.estimates.real, "g--", label=f"particles ({args.particles})")
    ax.set_xlabel("t (s)")
    ax.legend(loc="upper right")
    save(fig, "oracle.png")
