"""Command-line pipeline: phantom simulation, strain estimation, metric
evaluation and two-solver comparison, with reproducibility manifests.

Exit codes: 0 success, 2 invalid arguments or config, 3 solver failure,
4 I/O failure.  Every option can also be set through an ``ALTRUIST_``
environment variable or a JSON config file (flag beats env beats config).
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import hashlib
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import __version__
from .admm import SolverConfig, run as run_solver
from .errors import ConvergenceError, InvalidArgumentError, SingularSystemError
from .field import RegParams, StrainImage, strain_from_displacement
from .metrics import (MetricsReport, WindowSpec, cnr, cnr_histogram, esf,
                      mssim, paired_ttest, rmse, snr, strain_ratio,
                      window_shape_from_meta)
from .phantom import generate, preset_spec
from .rasters import (frame_meta, read_displacement, read_frame, read_strain,
                      write_displacement, write_frame, write_strain)
from .seed import SeedParams, dp_seed

EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_IO = 4


@dataclass
class Manifest:
    """Reproducibility record written alongside every command's outputs."""

    tool_version: str
    command: str
    config: dict
    inputs: dict = dataclass_field(default_factory=dict)
    outputs: list = dataclass_field(default_factory=list)
    timings_s: dict = dataclass_field(default_factory=dict)
    results: dict = dataclass_field(default_factory=dict)
    error: str | None = None

    def write(self, path) -> None:
        payload = json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"
        _atomic_write_bytes(path, payload.encode())


def _atomic_write_bytes(path, payload: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _record_inputs(manifest: Manifest, *paths) -> None:
    for path in paths:
        manifest.inputs[str(path)] = _digest(path)


class _Stopwatch:
    def __init__(self, sink: dict):
        self.sink = sink

    def stage(self, name: str):
        sink = self.sink

        class _Timer:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                sink[name] = round(time.perf_counter() - self.start, 6)

        return _Timer()


def _load_config(ctx, param, value):
    """Eager --config callback: JSON keys become defaults for this command."""
    if not value:
        return None
    try:
        data = json.loads(Path(value).read_text())
    except OSError as exc:
        raise click.ClickException(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"config file {value} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config file {value} must hold a JSON object")
    known = {p.name for p in ctx.command.params if p.name}
    unknown = sorted(set(data) - known)
    if unknown:
        raise click.UsageError(f"unknown config keys {unknown}; known keys: {sorted(known)}")
    ctx.default_map = {**(ctx.default_map or {}), **data}
    return value


def _opt(*decls, **kwargs):
    """click.option with the mirrored ALTRUIST_ environment variable."""
    name = max(decls, key=len).lstrip("-").replace("-", "_")
    kwargs.setdefault("envvar", "ALTRUIST_" + name.upper())
    kwargs.setdefault("show_envvar", True)
    return click.option(*decls, **kwargs)


def _config_option(func):
    return click.option("--config", type=click.Path(exists=True, dir_okay=False),
                        is_eager=True, expose_value=False, callback=_load_config,
                        help="JSON file of option defaults (flags and env vars win).")(func)


def _handle_errors(func):
    """Map domain errors onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InvalidArgumentError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID)
        except (SingularSystemError, ConvergenceError) as exc:
            click.echo(f"solver error: {exc}", err=True)
            sys.exit(EXIT_SOLVER)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


def _reg_param_options(func):
    for option in reversed([
        _opt("--params", default="preset:layer", show_default=True,
             help="Named weight set, as preset:<name>."),
        _opt("--iterations", type=int, default=None, help="Solver iteration count K."),
        _opt("--zeta", type=float, default=None, help="Augmented-Lagrangian weight."),
        _opt("--alpha1", type=float, default=None),
        _opt("--alpha2", type=float, default=None),
        _opt("--beta1", type=float, default=None),
        _opt("--beta2", type=float, default=None),
        _opt("--theta1", type=float, default=None),
        _opt("--theta2", type=float, default=None),
        _opt("--lambda1", type=float, default=None),
        _opt("--lambda2", type=float, default=None),
        _opt("--gamma", type=float, default=None),
        _opt("--mf", type=float, default=None, help="Second-order weight multiplier."),
        _opt("--bias-mode", type=click.Choice(["zero", "mean-strain"]), default=None),
        _opt("--kernel", type=int, default=3, show_default=True,
             help="Strain differentiation kernel length (odd samples)."),
        _opt("--seed-max-lag", type=int, default=None),
        _opt("--seed-smoothness", type=float, default=None),
        _opt("--seed-median-window", type=int, default=None),
        _opt("--linear-solver", type=click.Choice(["auto", "direct", "conjugate-gradient"]),
             default="auto", show_default=True),
        _opt("--cg-tolerance", type=float, default=None),
        _opt("--cg-max-iters", type=int, default=None),
        _opt("--relinearizations", type=int, default=None),
    ]):
        func = option(func)
    return func


def _resolve_reg_params(opts: dict) -> RegParams:
    spec = opts.get("params") or "preset:layer"
    if not spec.startswith("preset:"):
        raise InvalidArgumentError(f"--params must look like preset:<name>, got {spec!r}")
    base = RegParams.preset(spec.split(":", 1)[1])
    first_order = {
        key: opts[key] if opts.get(key) is not None else getattr(base, key)
        for key in ("alpha1", "alpha2", "beta1", "beta2", "gamma", "zeta")
    }
    mf = opts["mf"] if opts.get("mf") is not None else base.mf
    second_order = {
        "theta1": mf * first_order["alpha1"],
        "theta2": mf * first_order["alpha2"],
        "lambda1": mf * first_order["beta1"],
        "lambda2": mf * first_order["beta2"],
    }
    for key in second_order:
        if opts.get(key) is not None:
            second_order[key] = opts[key]
    return RegParams(
        **first_order, **second_order, mf=mf,
        iterations=opts["iterations"] if opts.get("iterations") is not None else base.iterations,
        bias_mode=opts["bias_mode"] if opts.get("bias_mode") is not None else base.bias_mode,
    )


def _resolve_seed_params(opts: dict) -> SeedParams:
    defaults = SeedParams()
    return SeedParams(
        max_lag=opts.get("seed_max_lag") or defaults.max_lag,
        smoothness_weight=(opts["seed_smoothness"] if opts.get("seed_smoothness") is not None
                           else defaults.smoothness_weight),
        median_window=opts.get("seed_median_window") or defaults.median_window,
    )


def _resolve_solver_config(opts: dict, params: RegParams, mode: str) -> SolverConfig:
    return SolverConfig(
        params=params,
        linear_solver=opts.get("linear_solver") or "auto",
        cg_tolerance=opts["cg_tolerance"] if opts.get("cg_tolerance") is not None else 1e-8,
        cg_max_iters=opts.get("cg_max_iters"),
        mode=mode,
        relinearizations=opts.get("relinearizations") or 0,
    )


def _public_config(opts: dict) -> dict:
    return {key: value for key, value in sorted(opts.items()) if value is not None}


def _write_preview(path, values: np.ndarray, display_range) -> None:
    lo, hi = display_range
    span = hi - lo if hi > lo else 1.0
    scaled = np.clip((values - lo) / span, 0.0, 1.0)
    image = Image.fromarray(np.round(scaled * 255).astype(np.uint8), mode="L")
    tmp = str(path) + ".tmp"
    image.save(tmp, format="PNG")
    os.replace(tmp, path)


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(cell) for cell in row) for row in rows]
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise InvalidArgumentError(f"expected RxC (e.g. 6x20), got {text!r}") from None


def _read_windows(path) -> tuple[list[WindowSpec], list[WindowSpec]]:
    targets, backgrounds = [], []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"top", "left", "height", "width", "role"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise InvalidArgumentError(
                f"windows file must have columns top,left,height,width,role, got {reader.fieldnames}"
            )
        for index, row in enumerate(reader):
            window = WindowSpec(int(row["top"]), int(row["left"]),
                                int(row["height"]), int(row["width"]))
            role = row["role"].strip().lower()
            if role == "target":
                targets.append(window)
            elif role == "background":
                backgrounds.append(window)
            else:
                raise InvalidArgumentError(f"window {index}: role must be target or background")
    return targets, backgrounds


def _check_windows(strain: StrainImage, windows, label: str) -> None:
    for index, window in enumerate(windows):
        try:
            window.values(strain)
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"{label} window {index}: {exc}") from None


@click.group()
@click.version_option(version=__version__, prog_name="altruist")
def main():
    """Strain estimation between RF frame pairs, with simulation and metrics."""


@main.command()
@_config_option
@_opt("--preset", type=click.Choice(["layer-high", "layer-low", "inclusion"]),
      default="layer-high", show_default=True)
@_opt("--m", type=int, default=256, show_default=True, help="Axial samples.")
@_opt("--n", type=int, default=64, show_default=True, help="Lateral lines.")
@_opt("--noise-psnr-db", type=float, default=None,
      help="Peak SNR of added noise in dB; defaults to the preset's level.")
@_opt("--rng-seed", type=int, default=0, show_default=True)
@_opt("--scatterer-density", type=float, default=None)
@_opt("--psf-center-frequency", type=float, default=None)
@_opt("--psf-axial-sigma", type=float, default=None)
@_opt("--psf-lateral-sigma", type=float, default=None)
@_opt("--out", type=click.Path(file_okay=False), required=True)
@_handle_errors
def simulate(**opts):
    """Generate a phantom frame pair with ground-truth displacement/strain."""
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(__version__, "simulate", _public_config(opts))
    watch = _Stopwatch(manifest.timings_s)

    spec_kwargs = {"m": opts["m"], "n": opts["n"], "rng_seed": opts["rng_seed"]}
    if opts["noise_psnr_db"] is not None:
        spec_kwargs["noise_psnr_db"] = opts["noise_psnr_db"]
    spec = preset_spec(opts["preset"], **spec_kwargs)
    overrides = {key: opts[key] for key in
                 ("scatterer_density", "psf_center_frequency", "psf_axial_sigma",
                  "psf_lateral_sigma") if opts[key] is not None}
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    with watch.stage("generate"):
        pre, post, truth = generate(spec)
    with watch.stage("write"):
        meta = frame_meta(pre)
        write_frame(out / "pre.raw", pre)
        write_frame(out / "post.raw", post)
        write_displacement(out / "truth_displacement.raw", truth.displacement, meta)
        write_strain(out / "truth_strain.raw", truth.strain, meta)
    manifest.results["phantom_spec"] = {
        key: (list(value) if isinstance(value, tuple) else value)
        for key, value in dataclasses.asdict(spec).items()
    }
    manifest.outputs = [str(out / name) for name in
                        ("pre.raw", "pre.hdr", "post.raw", "post.hdr",
                         "truth_displacement.raw", "truth_displacement.hdr",
                         "truth_strain.raw", "truth_strain.hdr")]
    manifest.write(out / "manifest.json")
    click.echo(f"wrote phantom pair to {out}")


@main.command()
@click.argument("pre_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("post_path", type=click.Path(exists=True, dir_okay=False))
@_config_option
@_opt("--mode", type=click.Choice(["altruist", "l2-baseline"]), default="altruist",
      show_default=True)
@_opt("--seed-file", type=click.Path(exists=True, dir_okay=False), default=None,
      help="Displacement raster to use as the initial estimate instead of DP.")
@_reg_param_options
@_opt("--out", type=click.Path(file_okay=False), required=True)
@_handle_errors
def estimate(pre_path, post_path, **opts):
    """Estimate displacement and axial strain between two RF frames."""
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(__version__, "estimate", _public_config({**opts, "pre": pre_path,
                                                                 "post": post_path}))
    watch = _Stopwatch(manifest.timings_s)
    _record_inputs(manifest, pre_path, post_path)

    with watch.stage("read"):
        pre = read_frame(pre_path)
        post = read_frame(post_path)
    params = _resolve_reg_params(opts)
    config = _resolve_solver_config(opts, params, opts["mode"])

    with watch.stage("seed"):
        if opts.get("seed_file"):
            _record_inputs(manifest, opts["seed_file"])
            seed, _ = read_displacement(opts["seed_file"])
            if (seed.m, seed.n) != pre.shape:
                raise InvalidArgumentError(
                    f"seed grid {(seed.m, seed.n)} does not match frames {pre.shape}"
                )
        else:
            seed = dp_seed(pre, post, _resolve_seed_params(opts))

    try:
        with watch.stage("solve"):
            total, trace = run_solver(pre, post, seed, config)
    except (SingularSystemError, ConvergenceError) as exc:
        manifest.error = type(exc).__name__
        manifest.write(out / "manifest.json")
        raise

    with watch.stage("strain"):
        strain = strain_from_displacement(total, opts["kernel"])
    with watch.stage("write"):
        meta = frame_meta(pre)
        write_displacement(out / "displacement.raw", total, meta)
        write_strain(out / "strain.raw", strain, meta)
        trace.to_csv(out / "convergence.csv")
    manifest.results["strain_summary"] = {
        "min": float(strain.values.min()), "max": float(strain.values.max()),
        "mean": float(strain.values.mean()), "std": float(strain.values.std()),
    }
    manifest.results["iterations_run"] = len(trace)
    manifest.outputs = [str(out / name) for name in
                        ("displacement.raw", "displacement.hdr", "strain.raw",
                         "strain.hdr", "convergence.csv")]
    manifest.write(out / "manifest.json")
    click.echo(f"estimated strain written to {out}")


@main.command()
@click.argument("strain_path", type=click.Path(exists=True, dir_okay=False))
@_config_option
@_opt("--truth", type=click.Path(exists=True, dir_okay=False), default=None)
@_opt("--windows", type=click.Path(exists=True, dir_okay=False), required=True,
      help="CSV of top,left,height,width,role windows (role: target|background).")
@_opt("--histogram", default=None, help="RxC pair grid, e.g. 6x20.")
@_opt("--out", type=click.Path(file_okay=False), required=True)
@_handle_errors
def metrics(strain_path, **opts):
    """Evaluate strain-quality metrics over configured windows."""
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(__version__, "metrics", _public_config({**opts, "strain": strain_path}))
    watch = _Stopwatch(manifest.timings_s)
    _record_inputs(manifest, strain_path, opts["windows"])

    strain, _ = read_strain(strain_path)
    targets, backgrounds = _read_windows(opts["windows"])
    _check_windows(strain, targets, "target")
    _check_windows(strain, backgrounds, "background")
    if not backgrounds:
        raise InvalidArgumentError("windows file must contain at least one background window")

    report = MetricsReport()
    with watch.stage("metrics"):
        report.snr = snr(strain, backgrounds[0])
        if targets:
            report.cnr = cnr(strain, targets[0], backgrounds[0])
            report.sr = strain_ratio(strain, targets[0], backgrounds[0])
        if opts["truth"]:
            _record_inputs(manifest, opts["truth"])
            truth, _ = read_strain(opts["truth"])
            report.rmse = rmse(strain, truth)
            report.mssim = mssim(strain, truth)
        if opts["histogram"]:
            counts = _parse_grid(opts["histogram"])
            report.cnr_histogram = cnr_histogram(strain, targets[:counts[0]],
                                                 backgrounds[:counts[1]], counts)
    outputs = [out / "report.csv", out / "report.txt"]
    report.to_csv(outputs[0])
    report.to_text(outputs[1])
    if report.cnr_histogram is not None:
        hist_path = out / "cnr_histogram.csv"
        _atomic_write_bytes(hist_path,
                            ("\n".join(f"{v:.17g}" for v in report.cnr_histogram) + "\n").encode())
        outputs.append(hist_path)
    manifest.outputs = [str(p) for p in outputs]
    manifest.results["metrics"] = dict(report.rows())
    manifest.write(out / "manifest.json")
    click.echo(report.to_text())


def _auto_level_windows(truth: StrainImage, level: float, shape: tuple[int, int],
                        count: int) -> list[WindowSpec]:
    """First ``count`` windows (row-major) whose truth patch is purely ``level``."""
    h, w = shape
    stride_r = max(1, h // 4)
    stride_c = max(1, w // 4)
    exact, ranked = [], []
    for top in range(0, truth.m - h + 1, stride_r):
        for left in range(0, truth.n - w + 1, stride_c):
            patch = truth.values[top:top + h, left:left + w]
            purity = float(np.mean(patch == level))
            if purity == 1.0:
                exact.append(WindowSpec(top, left, h, w))
            elif purity >= 0.9:
                ranked.append((-purity, top, left))
    if len(exact) >= count:
        return exact[:count]
    ranked.sort()
    extra = [WindowSpec(top, left, h, w) for _, top, left in ranked]
    combined = exact + extra
    if len(combined) < count:
        raise InvalidArgumentError(
            f"could not place {count} windows of shape {shape} on the level {level} region"
        )
    return combined[:count]


def _truth_levels(truth: StrainImage) -> tuple[float, float]:
    """(target, background) strain levels: the stiffer region strains less."""
    levels = np.unique(truth.values)
    if levels.size < 2:
        raise InvalidArgumentError("truth image has a single strain level; no contrast to window")
    target = float(min(levels, key=abs))
    background = float(max(levels, key=abs))
    return target, background


def _auto_esf_line(truth: StrainImage, half_length: int):
    """Vertical segment across the strongest axial strain edge at center column."""
    center_col = (truth.n + 1) / 2.0
    profile = truth.values[:, int(round(center_col)) - 1]
    step = np.abs(np.diff(profile))
    if step.max() == 0.0:
        raise InvalidArgumentError("truth image has no axial strain edge for the ESF line")
    edge_row = int(step.argmax()) + 1.5          # 1-based midpoint of the jump
    y0 = max(1.0, edge_row - half_length)
    y1 = min(float(truth.m), edge_row + half_length)
    return (y0, center_col), (y1, center_col)


@main.command()
@click.argument("pre_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("post_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("truth_path", type=click.Path(exists=True, dir_okay=False))
@_config_option
@_reg_param_options
@_opt("--kernels", default="3,43,63", show_default=True,
      help="Comma-separated differentiation kernel lengths to sweep.")
@_opt("--histogram", default="6x20", show_default=True)
@_opt("--esf-line", default=None, help="ESF segment as y0,x0,y1,x1 (1-based).")
@_opt("--esf-half", type=int, default=16, show_default=True)
@_opt("--out", type=click.Path(file_okay=False), required=True)
@_handle_errors
def compare(pre_path, post_path, truth_path, **opts):
    """Run both solver modes, sweep kernels, and emit consolidated metrics."""
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(__version__, "compare",
                        _public_config({**opts, "pre": pre_path, "post": post_path,
                                        "truth": truth_path}))
    watch = _Stopwatch(manifest.timings_s)
    _record_inputs(manifest, pre_path, post_path, truth_path)

    pre = read_frame(pre_path)
    post = read_frame(post_path)
    truth, truth_meta = read_strain(truth_path)
    kernels = [int(k) for k in str(opts["kernels"]).split(",") if k.strip()]
    if not kernels:
        raise InvalidArgumentError("--kernels must list at least one odd kernel length")
    hist_counts = _parse_grid(opts["histogram"])
    params = _resolve_reg_params(opts)

    with watch.stage("seed"):
        seed = dp_seed(pre, post, _resolve_seed_params(opts))
    totals = {}
    for mode in ("altruist", "l2-baseline"):
        with watch.stage(f"solve_{mode}"):
            totals[mode], trace = run_solver(pre, post, seed,
                                             _resolve_solver_config(opts, params, mode))
            trace.to_csv(out / f"convergence_{mode}.csv")

    window_shape = window_shape_from_meta(truth_meta.get("axial_spacing_m"),
                                          truth_meta.get("lateral_spacing_m"),
                                          truth.values.shape)
    hist_shape = (max(2, window_shape[0] // 2), max(2, window_shape[1] // 2))
    manifest.results["window_shape"] = list(window_shape)
    manifest.results["histogram_window_shape"] = list(hist_shape)
    target_level, background_level = _truth_levels(truth)
    single_target = _auto_level_windows(truth, target_level, window_shape, 1)[0]
    single_background = _auto_level_windows(truth, background_level, window_shape, 1)[0]
    hist_targets = _auto_level_windows(truth, target_level, hist_shape, hist_counts[0])
    hist_backgrounds = _auto_level_windows(truth, background_level, hist_shape, hist_counts[1])
    _write_csv(out / "windows.csv", ("top", "left", "height", "width", "role"),
               [(w.top_row, w.left_col, w.height, w.width, "target") for w in hist_targets]
               + [(w.top_row, w.left_col, w.height, w.width, "background")
                  for w in hist_backgrounds])

    if opts["esf_line"]:
        coords = [float(v) for v in opts["esf_line"].split(",")]
        if len(coords) != 4:
            raise InvalidArgumentError("--esf-line must be y0,x0,y1,x1")
        line = ((coords[0], coords[1]), (coords[2], coords[3]))
    else:
        line = _auto_esf_line(truth, opts["esf_half"])
    manifest.results["esf_line"] = [list(line[0]), list(line[1])]

    display_range = (float(truth.values.min()), float(truth.values.max()))
    rows = []
    histograms: dict = {}
    with watch.stage("metrics"):
        for mode in ("altruist", "l2-baseline"):
            histograms[mode] = {}
            for kernel in kernels:
                strain = strain_from_displacement(totals[mode], kernel)
                hist = cnr_histogram(strain, hist_targets, hist_backgrounds, hist_counts)
                histograms[mode][kernel] = hist
                profile = esf(strain, *line)
                rows.append({
                    "mode": mode,
                    "kernel": kernel,
                    "rmse": rmse(strain, truth),
                    "mssim": mssim(strain, truth),
                    "snr": snr(strain, single_background),
                    "cnr": cnr(strain, single_target, single_background),
                    "sr": strain_ratio(strain, single_target, single_background),
                    "esf_width": profile.width_10_90,
                    "cnr_hist_mean": float(np.mean(hist)),
                })
                _write_preview(out / f"strain_{mode}_k{kernel}.png", strain.values,
                               display_range)
        for row in rows:
            test = paired_ttest(histograms["altruist"][row["kernel"]],
                                histograms["l2-baseline"][row["kernel"]])
            row["ttest_t"] = test.statistic
            row["ttest_p"] = test.p_value

    header = ("mode", "kernel", "rmse", "mssim", "snr", "cnr", "sr", "esf_width",
              "cnr_hist_mean", "ttest_t", "ttest_p")
    _write_csv(out / "compare.csv", header,
               [[row[key] for key in header] for row in rows])
    for mode in histograms:
        _atomic_write_bytes(out / f"cnr_histogram_{mode}.csv",
                            ("\n".join(f"{v:.17g}" for v in histograms[mode][kernels[0]])
                             + "\n").encode())

    base_kernel = kernels[0]
    alt = next(r for r in rows if r["mode"] == "altruist" and r["kernel"] == base_kernel)
    base = next(r for r in rows if r["mode"] == "l2-baseline" and r["kernel"] == base_kernel)
    manifest.results["ratios_at_kernel_%d" % base_kernel] = {
        "cnr_single": alt["cnr"] / base["cnr"] if base["cnr"] else float("inf"),
        "cnr_hist_mean": (alt["cnr_hist_mean"] / base["cnr_hist_mean"]
                          if base["cnr_hist_mean"] else float("inf")),
        "esf_width": (alt["esf_width"] / base["esf_width"]
                      if base["esf_width"] else float("nan")),
        "rmse_altruist": alt["rmse"],
        "rmse_baseline": base["rmse"],
    }
    manifest.outputs = sorted(str(p) for p in out.iterdir() if p.name != "manifest.json")
    manifest.write(out / "manifest.json")
    click.echo(f"comparison written to {out}")


if __name__ == "__main__":
    main()
