"""
Simulating circle-valued signals
================================

A phase process drives the unit-circle signal exp(i*theta). Three phase
models are available: a pure Brownian phase (I), Brownian phase with a
known drift w0 (II), and a drift that itself wanders (III). The receiver
only sees increments dz = cos(theta)*dt + noise.
"""

import numpy as np

from circdetect import ScenarioConfig, simulate

from _plotting import figure_or_none, save

# one path per scenario, all from the same seed
paths = {}
for scenario, extra in (("I", {"w0": 0.0}), ("II", {}), ("III", {"q_w": 1e-6})):
    cfg = ScenarioConfig(scenario=scenario, q_theta=0.01, steps=5000, seed=3, **extra)
    paths[scenario] = (cfg, *simulate(cfg))

# the phase wanders off; its circular mean decays like exp(-q*t/2)
for scenario, (cfg, sig, meas) in paths.items():
    print(f"scenario {scenario}: final phase {sig.theta[-1]:+.2f} rad, "
          f"final frequency {sig.omega[-1]:.4f} rad/s, "
          f"measurement std {meas.dz.std():.3f} (per-sample SNR {cfg.snr:.3f})")

# at SNR 0.1 the cosine is buried: one sample carries almost no information,
# which is why the detectors integrate over thousands of steps
cfg, sig, meas = paths["II"]
print("fraction of dz variance explained by the signal:",
      round(np.var(np.cos(sig.theta[:-1]) * cfg.dt) / np.var(meas.dz), 4))

plt = figure_or_none()
if plt is not None:
    fig, axes = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    for scenario, (cfg, sig, _) in paths.items():
        t = cfg.dt * np.arange(sig.theta.size)
        axes[0].plot(t, sig.theta, label=f"scenario {scenario}")
        axes[1].plot(t, np.cos(sig.theta), lw=0.8)
    axes[0].set_ylabel("theta (rad)")
    axes[1].set_ylabel("cos(theta)")
    axes[1].set_xlabel("t (s)")
    axes[0].legend()
    save(fig, "paths.png")
