"""
Phantom gallery
===============

Generate the three built-in synthetic phantoms (high-contrast layers,
low-contrast layers, stiff inclusion) and look at what the simulator
produces: speckle frames, analytic displacement, and analytic strain.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from altruist import generate, preset_spec

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

fig, axes = plt.subplots(3, 3, figsize=(9, 10))
for row, name in enumerate(("layer-high", "layer-low", "inclusion")):
    spec = preset_spec(name)
    pre, post, truth = generate(spec)

    print(f"{name}: {spec.m}x{spec.n} samples, "
          f"noise {spec.noise_psnr_db} dB PSNR, "
          f"RF amplitude std {pre.samples.std():.3f}")
    print(f"  displacement range {truth.displacement.axial.min():.2f} .. "
          f"{truth.displacement.axial.max():.2f} samples")
    print(f"  strain levels {sorted(set(np.round(truth.strain.values.ravel(), 6)))}")

    axes[row, 0].imshow(pre.samples, cmap="gray", aspect="auto")
    axes[row, 0].set_title(f"{name}: RF frame")
    axes[row, 1].imshow(truth.displacement.axial, cmap="viridis", aspect="auto")
    axes[row, 1].set_title("axial displacement")
    axes[row, 2].imshow(truth.strain.values, cmap="magma", aspect="auto")
    axes[row, 2].set_title("axial strain")

for ax in axes.ravel():
    ax.set_xticks([])
    ax.set_yticks([])
fig.tight_layout()
fig.savefig(out_dir / "phantom_gallery.png", dpi=110)
print(f"\nwrote {out_dir / 'phantom_gallery.png'}")
