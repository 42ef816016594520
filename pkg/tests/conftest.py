"""Shared fixtures: small speckle frames and the full-size phantom runs."""

import time

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

import altruist as alt
from altruist.phantom import preset_spec


def speckle_frame(m, n, seed=0, sigma=(1.5, 1.0)):
    """Smooth random frame with nonzero gradients almost everywhere."""
    rng = np.random.default_rng(seed)
    return alt.RfFrame(gaussian_filter(rng.standard_normal((m, n)), sigma))


def shifted_pair(m, n, shift=2, seed=0):
    """Frame pair where frame2 equals frame1 moved ``shift`` samples deeper.

    Both frames are windows of one taller rendering, so neither has
    zero-filled edges; the true axial displacement is +shift everywhere.
    """
    spec = alt.PhantomSpec(m=m + shift, n=n, layers=((1, m + shift, 0.0),),
                           noise_psnr_db=None, rng_seed=seed,
                           psf_center_frequency=0.182, psf_axial_sigma=2.75)
    pre, _, _ = alt.generate(spec)
    big = pre.samples
    frame1 = alt.RfFrame(big[shift:shift + m], pre.sampling_rate, pre.center_frequency,
                         pre.axial_spacing, pre.lateral_spacing)
    frame2 = alt.RfFrame(big[0:m], pre.sampling_rate, pre.center_frequency,
                         pre.axial_spacing, pre.lateral_spacing)
    return frame1, frame2


@pytest.fixture(scope="session")
def layer_pipeline():
    """Layer phantom (256x64, 20 dB PSNR) run through seed + both solver modes."""
    start = time.perf_counter()
    spec = preset_spec("layer-high")
    pre, post, truth = alt.generate(spec)
    seed = alt.dp_seed(pre, post, alt.SeedParams())
    params = alt.RegParams.preset("layer", iterations=10)
    total, trace = alt.run(pre, post, seed, alt.SolverConfig(params=params))
    total_base, _ = alt.run(pre, post, seed,
                            alt.SolverConfig(params=params, mode="l2-baseline"))
    return {
        "spec": spec, "pre": pre, "post": post, "truth": truth, "seed": seed,
        "params": params, "total": total, "trace": trace, "total_base": total_base,
        "elapsed": time.perf_counter() - start,
    }


@pytest.fixture(scope="session")
def phantom_dirs(tmp_path_factory):
    """Simulated layer + inclusion phantom directories written via the CLI."""
    from click.testing import CliRunner
    from altruist.cli import main

    root = tmp_path_factory.mktemp("phantoms")
    runner = CliRunner()
    for preset in ("layer-high", "inclusion"):
        out = root / preset
        result = runner.invoke(main, ["simulate", "--preset", preset, "--out", str(out)])
        assert result.exit_code == 0, result.output
    return root
