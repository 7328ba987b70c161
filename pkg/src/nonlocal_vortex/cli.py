"""Command-line entry point.

Commands::

    nonlocal-vortex coincidence-map [--plane position|mixed] ...
    nonlocal-vortex fringes [--detector1 0.2,0.4] ...
    nonlocal-vortex vortex-report ...
    nonlocal-vortex validate [--quick]

Every config key (see :data:`config.SCHEMA`) is also a ``--key`` flag.
Exit codes: 0 success, 1 config error, 2 physics or precondition error,
3 validation failure.
"""
from __future__ import annotations

import argparse
import itertools
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .biphoton import (MIXED, POSITION, AnalyticFormError, BiphotonState,
                       amplitude_map, apply_apertures, pair_mixed_analytic, pair_mixed_numeric,
                       partial_fourier_numeric, prob_map, sample_counts, schmidt_decompose)
from .config import SCHEMA, ConfigError, RunConfig, load_config
from .experiment import model_scans, predicted_shift
from .fringes import FitError
from .gauss_modes import HG1D, sample_mode
from .grid import AliasingError, Axis, fourier_transform_1d
from .io import write_csv, write_map_csv, write_pgm16, write_scan_csv
from .optics import IDENTITY, FourierStage, MapMeasurement, OpticalChannel, run_channel_pair
from .vortex import InconsistentPeriods, ResolutionWarning, fringe_shift, separability_test

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_VALIDATION = 0, 1, 2, 3

NUMERIC_BANNER = "NOTE: sigma != delta; mixed-plane amplitude computed on the numeric quadrature path"


class PhysicsError(RuntimeError):
    pass


# ----------------------------------------------------------------------------- helpers

def _grid_axes(cfg: RunConfig, plane: str):
    """Map axes from the configured sample count and span (in single-photon widths)."""
    state = cfg.state
    if plane == POSITION:
        half = cfg.span * max(state.sigma, state.delta)
        return Axis.centered(cfg.samples, half), Axis.centered(cfg.samples, half)
    w = state.photon_width if state.widths_matched else min(state.sigma, state.delta) / math.sqrt(2.0)
    wide = max(state.sigma, state.delta) / math.sqrt(2.0)
    return Axis.centered(cfg.samples, cfg.span * wide), Axis.centered(cfg.samples, cfg.span / w)


def _aperture_widths(cfg: RunConfig, plane: str):
    """Detector apertures (um at the detectors) converted to map units."""
    lab = cfg.lab
    rho_mm = lab.reference_waist_mm * lab.f3_mm / lab.f2_mm
    w1 = cfg.aperture1_um * 1e-3 / rho_mm
    if plane == POSITION:
        w2 = cfg.aperture2_um * 1e-3 / rho_mm
    else:
        w2 = cfg.aperture2_um * 1e-3 * lab.k * lab.reference_waist_mm / lab.f4_mm
    return w1, w2


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pump_label(cfg: RunConfig) -> str:
    return "HG10" if cfg.pump == "hg10" else "Gaussian"


# ----------------------------------------------------------------------------- commands

def cmd_coincidence_map(cfg: RunConfig, plane: str | None = None) -> list:
    """Write the coincidence map (and counts when noise is on) for one plane."""
    plane = plane or cfg.plane
    ax1, ax2 = _grid_axes(cfg, plane)
    cmap = prob_map(cfg.state, plane, ax1, ax2)
    w1, w2 = _aperture_widths(cfg, plane)
    if w1 > 0 or w2 > 0:
        cmap = apply_apertures(cmap, w1, w2)
    out = _out_dir(cfg)
    extra = {"pump": cfg.pump, "sigma": repr(cfg.sigma), "delta": repr(cfg.delta)}
    written = [write_map_csv(out / f"coincidence_{plane}.csv", cmap, cfg.sha256, extra)]
    if cfg.pgm:
        written.append(write_pgm16(out / f"coincidence_{plane}.pgm", cmap.values))
    if cfg.noise_events:
        counts = sample_counts(cmap, cfg.noise_events, cfg.seed)
        written.append(write_map_csv(out / f"counts_{plane}.csv", counts, cfg.sha256, extra))
        if cfg.pgm:
            written.append(write_pgm16(out / f"counts_{plane}.pgm", counts.values))
    peak = float(cmap.values.max())
    print(f"{_pump_label(cfg)} pump, {plane} plane, {ax1.n}x{ax2.n} ({cmap.meta['path']} path)")
    print(f"  integral {cmap.integral():.9f}  peak {peak:.6g}  P(0,0)/peak {cmap.value_at(0, 0) / peak:.3g}")
    for p in written:
        print(f"  wrote {p}")
    return written


def cmd_fringes(cfg: RunConfig, positions=None) -> list:
    """Per-position fringe scans, their fits, and a pairwise shift table."""
    positions = tuple(positions or cfg.detector1)
    lab = cfg.lab
    state = cfg.state
    scans = model_scans(state, lab, positions)
    out = _out_dir(cfg)
    written = []
    fit_rows = []
    for i, scan in enumerate(scans):
        written.append(write_scan_csv(out / f"fringes_{i}.csv", scan, cfg.sha256))
        f = scan.fit
        fit_rows.append([scan.detector1, f.period, f.phase, f.visibility, f.amplitude, f.center, f.width,
                         f.rms, float(f.reliable)])
    written.append(write_csv(out / "fringe_fits.csv", np.array(fit_rows), {
        "kind": "fringe-fits",
        "columns": "detector1_mm,period_mm,phase_rad,visibility,amplitude,center_mm,width_mm,rms,reliable",
        "config_sha256": cfg.sha256}))
    print(f"{_pump_label(cfg)} pump, fringe period {lab.fringe_period_mm:.6g} mm")
    for scan in scans:
        f = scan.fit
        flag = "" if f.reliable else f"  UNRELIABLE: {f.message}"
        print(f"  detector1 {scan.detector1:g} mm: period {f.period:.6g} mm  phase {f.phase:+.6f} rad  "
              f"visibility {f.visibility:.4f}{flag}")
    if len(scans) >= 2:
        rows = []
        for (i, a), (j, b) in itertools.combinations(enumerate(scans), 2):
            try:
                measured = fringe_shift(a, b)
            except InconsistentPeriods as exc:
                raise PhysicsError(str(exc)) from None
            predicted = predicted_shift(state, lab, (a.detector1, b.detector1))
            rows.append([a.detector1, b.detector1, measured, predicted])
            print(f"  shift {a.detector1:g} -> {b.detector1:g} mm: {measured:+.4f} period "
                  f"(predicted {predicted:+.4f})")
        written.append(write_csv(out / "fringe_shifts.csv", np.array(rows), {
            "kind": "fringe-shifts", "columns": "detector1_a_mm,detector1_b_mm,shift_periods,predicted_periods",
            "config_sha256": cfg.sha256}))
    for p in written:
        print(f"  wrote {p}")
    return written


def vortex_report_text(cfg: RunConfig) -> str:
    state = cfg.state
    ax1, ax2 = _grid_axes(cfg, MIXED)
    amp = amplitude_map(state, MIXED, ax1, ax2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        res = separability_test(amp)
    spectrum = schmidt_decompose(state)
    lines = []
    if amp.meta["path"] == "numeric":
        lines.append(NUMERIC_BANNER)
    lines += [
        f"pump: {_pump_label(cfg)}",
        f"sigma: {cfg.sigma!r}",
        f"delta: {cfg.delta!r}",
        f"plane: rho_x1 (rows) x q_x2 (columns), {ax1.n}x{ax2.n}",
        f"path: {amp.meta['path']}",
        f"singularities: {len(res.singularities)}",
    ]
    for (x, q), c, r in zip(res.singularities.locations, res.singularities.charges,
                            res.singularities.core_ratios):
        lines.append(f"  at rho_x1={x:+.6f} q_x2={q:+.6f} charge={c:+d} core_ratio={r:.3g}")
    lines += [
        f"total_charge: {res.singularities.total_charge:+d}",
        "schmidt_sampled: " + ", ".join(f"{v:.8f}" for v in res.schmidt_coefficients[:4]),
        f"schmidt_number: {res.schmidt_number}",
        f"schmidt_spectrum ({spectrum.method}): " + ", ".join(f"{v:.8f}" for v in spectrum.coefficients),
        f"entropy_bits: {spectrum.entropy():.8f}",
        f"converged: {res.converged}",
        f"consistent: {res.consistent}",
        f"verdict: {res.verdict}",
    ]
    for w in caught:
        lines.append(f"warning: {w.message}")
    return "\n".join(lines) + "\n"


def cmd_vortex_report(cfg: RunConfig) -> Path:
    text = vortex_report_text(cfg)
    path = _out_dir(cfg) / "vortex_report.txt"
    with open(path, "w", newline="\n") as fh:
        fh.write(f"config_sha256: {cfg.sha256}\n")
        fh.write(text)
    sys.stdout.write(text)
    print(f"wrote {path}")
    return path


# ----------------------------------------------------------------------------- validation

def _check_oracle(cfg):
    state = cfg.state
    half = cfg.span * max(state.sigma, state.delta)
    x1ax, x2ax = Axis.centered(cfg.samples, half), Axis.centered(cfg.samples, half)
    try:
        num = partial_fourier_numeric(state, x1ax, x2ax)
    except AliasingError as exc:
        return False, f"aliasing guard: {exc}"
    qax = num.axes[1]
    x1, q2 = np.meshgrid(x1ax.coords, qax.coords, indexing="ij")
    n = state.pump.mode[0]
    if state.widths_matched:
        ref = pair_mixed_analytic(n, x1, q2, state.sigma)
        label = "closed form"
    else:
        sub = (slice(None, None, max(1, cfg.samples // 16)),) * 2
        x1, q2, num_v = x1[sub], q2[sub], num.values[sub]
        ref = pair_mixed_numeric(n, x1, q2, state.sigma, state.delta)
        err = float(np.abs(num_v - ref).max() / np.abs(ref).max())
        return err <= 1e-6, f"FFT vs quadrature max error {err:.2e} of peak"
    err = float(np.abs(num.values - ref).max() / np.abs(ref).max())
    return err <= 1e-6, f"FFT vs {label} max error {err:.2e} of peak"


def _check_eigen(cfg):
    ax = Axis.centered(cfg.samples, 2.0 * cfg.span)
    worst = 0.0
    try:
        for n in range(6):
            fld = sample_mode(HG1D(n), (ax,))
            out = fourier_transform_1d(fld)
            ref = (-1j) ** n * HG1D(n)(out.axes[0].coords)
            worst = max(worst, float(np.sqrt(np.sum(np.abs(out.values - ref) ** 2) * out.axes[0].step)))
    except AliasingError as exc:
        return False, f"aliasing guard: {exc}"
    return worst <= 1e-6, f"max L2 error {worst:.2e} for n <= 5"


def _check_norm(cfg):
    errs = []
    for plane in (POSITION, MIXED):
        cmap = prob_map(cfg.state, plane, *_grid_axes(cfg, plane))
        errs.append(abs(cmap.integral() - 1.0))
    worst = max(errs)
    return worst <= 1e-6, f"max |integral - 1| {worst:.2e}"


def _check_null(cfg):
    if cfg.pump != "hg10":
        return True, "not applicable (Gaussian pump)"
    cmap = prob_map(cfg.state, MIXED, *_grid_axes(cfg, MIXED))
    r = cmap.value_at(0.0, 0.0) / cmap.values.max()
    return r <= 1e-10, f"P(0,0)/peak {r:.2e}"


def _check_node(cfg):
    if cfg.pump != "hg10":
        return True, "not applicable (Gaussian pump)"
    a1, _ = _grid_axes(cfg, POSITION)
    x = a1.coords
    from .biphoton import pair_position
    line = np.abs(pair_position(1, x, -x, cfg.sigma, cfg.delta)) ** 2
    peak = float((np.abs(prob_map(cfg.state, POSITION, a1, a1).values)).max())
    r = float(line.max() / peak)
    return r <= 1e-10, f"max on anti-sum line / peak {r:.2e}"


def _check_singularity(cfg):
    amp = amplitude_map(cfg.state, MIXED, *_grid_axes(cfg, MIXED))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        res = separability_test(amp)
    rep = res.singularities
    if cfg.pump == "hg10":
        ok = (len(rep) == 1 and abs(rep.charges[0]) == 1 and res.entangled and res.consistent
              and math.hypot(*rep.locations[0]) <= max(s.step for s in amp.axes))
        return ok, f"{len(rep)} singularity, charges {rep.charges}, verdict {res.verdict}"
    ok = len(rep) == 0 and not res.entangled
    return ok, f"{len(rep)} singularities, verdict {res.verdict}"


def _check_schmidt(cfg):
    spectrum = schmidt_decompose(cfg.state)
    coefs = spectrum.coefficients
    if not cfg.state.widths_matched:
        ok = abs(float(np.sum(coefs ** 2)) - 1.0) <= 1e-6 and spectrum.truncated_weight <= 1e-6
        return ok, f"svd spectrum {np.round(coefs[:3], 6).tolist()}, truncated {spectrum.truncated_weight:.1e}"
    want = [1 / math.sqrt(2)] * 2 if cfg.pump == "hg10" else [1.0]
    ok = len(coefs) == len(want) and np.allclose(coefs, want, atol=1e-6, rtol=0)
    return ok, f"coefficients {np.round(coefs, 8).tolist()}, entropy {spectrum.entropy():.6f} bit"


def _check_channels(cfg):
    state = cfg.state
    axes = _grid_axes(cfg, POSITION)
    ch2 = OpticalChannel((FourierStage.dimensionless(),))
    try:
        via = run_channel_pair(state, IDENTITY, ch2, MapMeasurement(), axes)
    except AliasingError as exc:
        return False, f"aliasing guard: {exc}"
    direct = prob_map(state, MIXED, via.axis1.axis, via.axis2.axis)
    err = float(np.abs(via.values - direct.values).max() / direct.values.max())
    return err <= 1e-6, f"lens-channel map vs direct map max error {err:.2e} of peak"


def _check_fringes(cfg):
    lab = cfg.lab
    if len(lab.detector1_mm) < 2:
        return True, "single detector-1 position; no shift to check"
    pa, pb = lab.detector1_mm[:2]
    hg = model_scans(BiphotonState.hg10(cfg.sigma, cfg.delta), lab, (pa, pb))
    g = model_scans(BiphotonState.gaussian(cfg.sigma, cfg.delta), lab, (pa, pb))
    shift = fringe_shift(hg[0], hg[1])
    pred = predicted_shift(BiphotonState.hg10(cfg.sigma, cfg.delta), lab, (pa, pb))
    diff = abs((shift - pred + 0.5) % 1.0 - 0.5)
    null = abs(fringe_shift(g[0], g[1]))
    ok = diff <= 0.01 and null <= 0.02
    return ok, f"HG10 shift {shift:+.4f} (predicted {pred:+.4f}), Gaussian shift {null:+.4f}"


CHECKS = [
    ("oracle equivalence", _check_oracle, True),
    ("FT eigenproperty", _check_eigen, True),
    ("normalization", _check_norm, True),
    ("vortex null", _check_null, True),
    ("anti-sum node", _check_node, True),
    ("singularity report", _check_singularity, True),
    ("Schmidt spectrum", _check_schmidt, True),
    ("channel equivalence", _check_channels, False),
    ("fringe shifts", _check_fringes, False),
]


def cmd_validate(cfg: RunConfig, quick: bool = False) -> bool:
    """Run the oracle and invariant checks; print a pass/fail table."""
    all_ok = True
    for name, check, in_quick in CHECKS:
        if quick and not in_quick:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = check(cfg)
        except (AliasingError, AnalyticFormError, FitError, InconsistentPeriods, ValueError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        all_ok &= bool(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name:<20s} {dt:6.2f}s  {detail}")
    print("validation " + ("passed" if all_ok else "FAILED"))
    return all_ok


# ----------------------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (default: $NONLOCAL_VORTEX_CONFIG)")
    for key, (section, _) in SCHEMA.items():
        flag = "--" + key.replace("_", "-")
        if key == "plane":
            common.add_argument(flag, dest=key, choices=(POSITION, MIXED))
        elif key == "pump":
            common.add_argument(flag, dest=key, choices=("hg10", "gauss"))
        elif key == "detector1":
            common.add_argument(flag, dest=key, metavar="POS[,POS...]", help="detector-1 stage readings, mm")
        else:
            common.add_argument(flag, dest=key, metavar=key.upper(), help=f"[{section}] {key}")

    parser = argparse.ArgumentParser(prog="nonlocal-vortex", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("coincidence-map", parents=[common], help="joint detection map on one plane")
    sub.add_parser("fringes", parents=[common], help="double-slit scans and fringe shifts")
    sub.add_parser("vortex-report", parents=[common], help="singularities, Schmidt spectrum, verdict")
    p = sub.add_parser("validate", parents=[common], help="oracle and invariant checks")
    p.add_argument("--quick", action="store_true", help="fast subset of the checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in SCHEMA}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = load_config(args.config, overrides)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "coincidence-map":
            cmd_coincidence_map(cfg)
        elif args.command == "fringes":
            cmd_fringes(cfg)
        elif args.command == "vortex-report":
            cmd_vortex_report(cfg)
        elif args.command == "validate":
            return EXIT_OK if cmd_validate(cfg, args.quick) else EXIT_VALIDATION
    except (PhysicsError, AliasingError, AnalyticFormError, FitError, InconsistentPeriods) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
