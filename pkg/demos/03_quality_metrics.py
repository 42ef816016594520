"""
Strain image-quality metrics
============================

SNR, CNR, strain ratio, RMSE, MSSIM, the 6x20-window CNR histogram with a
paired t-test, and the edge-spread-function width, demonstrated on the stiff
inclusion phantom.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from altruist import (RegParams, SeedParams, SolverConfig, WindowSpec, cnr,
                      cnr_histogram, dp_seed, esf, generate, mssim,
                      paired_ttest, preset_spec, rmse, run, snr,
                      strain_from_displacement, strain_ratio)

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

spec = preset_spec("inclusion")
pre, post, truth = generate(spec)
seed = dp_seed(pre, post, SeedParams())

strains = {}
for mode in ("altruist", "l2-baseline"):
    config = SolverConfig(params=RegParams.preset("inclusion", iterations=10), mode=mode)
    total, _ = run(pre, post, seed, config)
    strains[mode] = strain_from_displacement(total, 3)

# windows: target inside the stiff disc, background above it
target = WindowSpec(112, 28, 32, 8)
background = WindowSpec(16, 28, 32, 8)

print(f"{'metric':<14}{'altruist':>12}{'l2-baseline':>14}")
for label, fn in (("snr", lambda s: snr(s, background)),
                  ("cnr", lambda s: cnr(s, target, background)),
                  ("strain ratio", lambda s: strain_ratio(s, target, background)),
                  ("rmse", lambda s: rmse(s, truth.strain)),
                  ("mssim", lambda s: mssim(s, truth.strain))):
    print(f"{label:<14}{fn(strains['altruist']):>12.4g}"
          f"{fn(strains['l2-baseline']):>14.4g}")

# 120-value CNR histogram over 6 target / 20 background small windows,
# spread over the disc interior and the background above it
targets = [WindowSpec(108 + 16 * r, 22 + 6 * c, 16, 4)
           for r in range(2) for c in range(3)]
backgrounds = [WindowSpec(8 + 14 * r, 8 + 12 * c, 12, 4)
               for r in range(4) for c in range(5)]
hists = {mode: cnr_histogram(strains[mode], targets, backgrounds)
         for mode in strains}
test = paired_ttest(hists["altruist"], hists["l2-baseline"])
print(f"\nCNR histogram means: altruist {np.mean(hists['altruist']):.2f}, "
      f"baseline {np.mean(hists['l2-baseline']):.2f}")
print(f"paired t-test: t = {test.statistic:.2f}, p = {test.p_value:.2e}")

# edge sharpness across the top of the inclusion, center column
edge_row = spec.inclusion[0] - spec.inclusion[2]
line = ((edge_row - 16, 32.0), (edge_row + 16, 32.0))
widths = {mode: esf(strains[mode], *line).width_10_90 for mode in strains}
print(f"10-90% edge widths: altruist {widths['altruist']:.1f}, "
      f"baseline {widths['l2-baseline']:.1f} samples")

fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
bins = np.linspace(0, max(max(h) for h in hists.values()), 30)
for mode, hist in hists.items():
    axes[0].hist(hist, bins=bins, alpha=0.6, label=mode)
axes[0].set_title("CNR over 120 window pairs")
axes[0].legend()
for mode in strains:
    profile = esf(strains[mode], *line)
    axes[1].plot(profile.positions, profile.profile, label=mode)
axes[1].set_title("edge spread across inclusion top")
axes[1].legend()
fig.tight_layout()
fig.savefig(out_dir / "quality_metrics.png", dpi=110)
print(f"wrote {out_dir / 'quality_metrics.png'}")
