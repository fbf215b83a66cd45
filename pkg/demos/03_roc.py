"""
Detection: estimator-correlator ROC curves
==========================================

The estimator-correlator statistic integrates h_hat*dz - h_hat**2*dt/2,
where h_hat is the filter's causal prediction of cos(theta). Running many
trials under each hypothesis and sweeping the threshold gives an empirical
ROC. The default trial count here is small so the script finishes in a
few minutes; pass ``--trials 500`` for the full-size experiment.
"""

import argparse

from circdetect import ScenarioConfig, TrialBatchSpec, run_batch, sweep_roc

from _plotting import figure_or_none, save

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=100)
parser.add_argument("--scenario", default="II")
args = parser.parse_args()

tables = {}
for snr in (0.1, 0.0816, 0.0577):
    cfg = ScenarioConfig(scenario=args.scenario, q_theta=0.1, q_w=1e-8).with_snr(snr)
    for est in ("EC", "EKF"):
        res = run_batch(TrialBatchSpec(cfg, est, args.trials, args.trials, base_seed=2024))
        tables[snr, est] = sweep_roc(res.h0, res.h1, snr)
        print(f"SNR {snr:<6} {est:>3}: Pd at Pf <= 0.01 = {tables[snr, est].pd_at_pf(0.01):.3f}")

# with n trials the smallest non-zero false-alarm rate is 1/n, so the left
# end of each curve is resolved only to that level
print(f"Pf resolution with {args.trials} trials: {1 / args.trials:.3g}")

plt = figure_or_none()
if plt is not None:
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5), sharey=True)
    for ax, snr in zip(axes, (0.1, 0.0816, 0.0577)):
        for est, color in (("EC", "b"), ("EKF", "r")):
            t = tables[snr, est]
            ax.step(t.pf, t.pd, color, where="post", label=est)
        ax.set_xscale("log")
        ax.set_xlim(1 / args.trials / 2, 1)
        ax.set_title(f"SNR {snr}")
        ax.set_xlabel("Pf")
    axes[0].set_ylabel("Pd")
    axes[0].legend()
    save(fig, f"roc_{args.scenario}.png")
