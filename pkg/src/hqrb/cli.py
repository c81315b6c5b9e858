"""Command-line surface: synth, run, fit, sweep, noise-check, calibrate-ez.

Exit codes: 0 on success, 2 on validation errors (bad arguments, malformed
configs), 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import FitResult, fit_decay, fit_json_dict, irb_result, sweep, sweep_rows, SWEEP_HEADER
from .config import RunConfig, load_config
from .device import ModelKind, calibrate
from .errors import ValidationError
from .noise import OneOverFParams, OneOverFSynth
from .pulses import DeviceParams, GateSchedule, synth_hadamard, synth_rx, synth_rz, synth_u, synth_y
from .rb import read_decay_csv, run_campaign, write_decay_csv


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON run configuration")


def _load(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = RunConfig(
            rb=dataclasses.replace(cfg.rb, seed=args.seed),
            sweep_sigma_t_ps=cfg.sweep_sigma_t_ps,
            sweep_sigma_j_nev=cfg.sweep_sigma_j_nev,
        )
    return cfg


def _print_schedule(schedule: GateSchedule) -> None:
    print(f"# schedule {schedule.label}")
    print(f"{'step':>4}  {'j1_ueV':>12}  {'j2_ueV':>12}  {'j_ueV':>12}  {'duration_ns':>12}")
    for i, s in enumerate(schedule.steps):
        print(
            f"{i:>4}  {s.j1_uev:>12.6f}  {s.j2_uev:>12.6f}  {s.j_uev:>12.6f}  {s.duration_ns:>12.6f}"
        )
    print(f"# total duration: {schedule.duration_ns:.6f} ns")


def _cmd_synth(args: argparse.Namespace) -> int:
    dp = DeviceParams(args.j_max, args.e_z, args.t_min)
    gate = args.gate.lower()
    if gate == "rx":
        sched = synth_rx(args.theta, dp)
    elif gate == "rz":
        sched = synth_rz(args.theta, dp)
    elif gate == "y":
        sched = synth_y(args.theta, dp)
    elif gate == "u":
        sched = synth_u(args.phi, args.theta, args.lam, dp)
    elif gate == "h":
        sched = synth_hadamard(dp)
    else:
        raise ValidationError(f"unknown gate {args.gate!r}; use rx, rz, y, u or h")
    _print_schedule(sched)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    curve = run_campaign(cfg.rb, threads=args.threads)
    with open(out / "decay.csv", "w", newline="") as fh:
        write_decay_csv(curve, fh)
    fit = fit_decay(curve)
    payload = fit_json_dict(fit)
    payload["_provenance"] = {"config": cfg.digest(), "seed": cfg.rb.seed}
    (out / "fit.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {out / 'decay.csv'} and {out / 'fit.json'}")
    return 0


def _fit_result_from_json(path: str) -> FitResult:
    raw = json.loads(Path(path).read_text())
    try:
        return FitResult(
            f_a=raw["f_a"], f_b=raw["f_b"], p=raw["p"],
            se_f_a=raw["se_f_a"], se_f_b=raw["se_f_b"], se_p=raw["se_p"],
            epc=raw["epc"], se_epc=raw["se_epc"], residual_norm=0.0,
            converged=raw["converged"], status="ok", iterations=0,
        )
    except KeyError as exc:
        raise ValidationError(f"reference fit JSON is missing key {exc}") from None


def _cmd_fit(args: argparse.Namespace) -> int:
    with open(args.decay_csv) as fh:
        curve = read_decay_csv(fh)
    fit = fit_decay(curve)
    payload = fit_json_dict(fit)
    if args.reference is not None:
        rb_fit = _fit_result_from_json(args.reference)
        payload = fit_json_dict(fit, irb_result(rb_fit, fit))
    payload["_provenance"] = {"config": curve.config_digest, "seed": curve.seed}
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    points = sweep(cfg.rb, cfg.sweep_sigma_t_ps, cfg.sweep_sigma_j_nev, threads=args.threads)
    path = out / "sweep.csv"
    with open(path, "w", newline="") as fh:
        fh.write(f"# config={cfg.digest()} seed={cfg.rb.seed}\n")
        fh.write(SWEEP_HEADER + "\n")
        for row in sweep_rows(points):
            fh.write(row + "\n")
    failed = [p for p in points if p.fit is None]
    print(f"wrote {path} ({len(points)} points, {len(failed)} failed)")
    return 0 if not failed else 1


def _cmd_noise_check(args: argparse.Namespace) -> int:
    cfg = _load(args)
    noise = cfg.rb.noise
    if not isinstance(noise, OneOverFParams):
        raise ValidationError("noise-check requires noise.model = 'one_over_f' in the config")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    synth = OneOverFSynth(noise)
    rng = np.random.default_rng([cfg.rb.seed, 17])
    trace = synth.sample(rng, 1)[0]
    header = f"# config={cfg.digest()} seed={cfg.rb.seed}\n"
    n_out = min(args.samples, synth.m)
    with open(out / "trace.csv", "w", newline="") as fh:
        fh.write(header)
        fh.write("t_ns,value_neV\n")
        for k in range(n_out):
            fh.write(f"{k * synth.t0_ns:.9g},{trace[k]:.9g}\n")
    spectrum = np.fft.rfft(trace)
    df_hz = 1.0 / (synth.m * synth.t0_ns * 1e-9)
    psd = 2.0 * np.abs(spectrum) ** 2 / (synth.m**2 * df_hz)
    with open(out / "periodogram.csv", "w", newline="") as fh:
        fh.write(header)
        fh.write("f_hz,psd\n")
        for k in range(1, len(psd)):
            fh.write(f"{k * df_hz:.9g},{psd[k]:.9g}\n")
    print(f"wrote {out / 'trace.csv'} and {out / 'periodogram.csv'}")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    report = calibrate(
        cfg.rb.device,
        cfg.rb.coeffs,
        model=ModelKind(args.model),
        max_iterations=args.max_iterations,
    )
    payload = report.to_dict()
    payload["_provenance"] = {"config": cfg.digest(), "seed": cfg.rb.seed}
    text = json.dumps(payload, indent=2) + "\n"
    Path(args.out).write_text(text)
    print(f"wrote {args.out} (certified={report.certified}, max_infidelity={report.max_infidelity:.3g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hqrb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="print the pulse schedule of one gate")
    p.add_argument("--gate", required=True, help="rx, rz, y, u or h")
    p.add_argument("--theta", type=float, default=math.pi, help="rotation angle in radians")
    p.add_argument("--phi", type=float, default=0.0, help="first z angle for gate 'u'")
    p.add_argument("--lam", type=float, default=0.0, help="last z angle for gate 'u'")
    p.add_argument("--j-max", type=float, default=1.0, help="J_max in ueV")
    p.add_argument("--e-z", type=float, default=0.25, help="Zeeman energy in ueV")
    p.add_argument("--t-min", type=float, default=100.0, help="minimum pulse duration in ps")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("run", help="run one campaign: decay CSV + fit JSON")
    _add_config_arg(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker processes (does not affect results)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("fit", help="refit an existing decay CSV")
    p.add_argument("decay_csv", help="decay CSV written by 'run'")
    p.add_argument("--reference", default=None, help="reference RB fit JSON; adds interleaved error fields")
    p.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("sweep", help="campaign + fit per noise grid point")
    _add_config_arg(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("noise-check", help="write a 1/f trace and its periodogram")
    _add_config_arg(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=20000, help="trace rows to write")
    p.set_defaults(func=_cmd_noise_check)

    p = sub.add_parser("calibrate-ez", help="two-level model calibration report (JSON)")
    _add_config_arg(p)
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument(
        "--model",
        default=ModelKind.TWO_LEVEL.value,
        choices=[m.value for m in ModelKind],
        help="model to certify",
    )
    p.add_argument("--max-iterations", type=int, default=400)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse validation failures
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
