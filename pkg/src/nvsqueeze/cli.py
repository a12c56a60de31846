"""Command-line entry point: ``nvsqueeze <command> ...`` (or ``python -m nvsqueeze``).

Exit codes: 0 success, 2 configuration error, 3 validation failure,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from .errors import (
    ConfigError,
    DegenerateKernel,
    DegenerateM,
    NoResonance,
    SingularGenerator,
    TruncationCapExceeded,
    UnknownFigure,
)
from .model import ValidityWarning, detuning_for_resonance, dressed_frame
from .reduced import coefficients_exact
from .spinsolver import spin_steady_closed
from .sweep import (
    FIGURES,
    OUTDIR_ENV,
    SweepSpec,
    figure_presets,
    load_config,
    params_from_dict,
    run_sweep,
)
from .validation import validate

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3, 4
NUMERICAL = (DegenerateKernel, TruncationCapExceeded, SingularGenerator, DegenerateM, NoResonance)


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"--set {key}: {val!r} is not a number") from exc
    return out


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    base = dict(doc.get("base", {}))
    base.update(_overrides(getattr(args, "set", None)))
    doc["base"] = base
    if getattr(args, "oracle", False):
        doc["validate_with_oracle"] = True
    return doc


def _params(args):
    doc = _apply_overrides(load_config(args.config), args)
    p = params_from_dict(doc["base"])
    if doc.get("resonance_lock", False):
        p = p.at_resonance()
    return p


def _emit(text: str, out: str | None, default_name: str | None = None):
    if out is None and default_name and os.environ.get(OUTDIR_ENV):
        out = str(Path(os.environ[OUTDIR_ENV]) / default_name)
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_sweep(result, args, stem):
    if args.json:
        _emit(result.to_json() + "\n", args.out, f"{stem}.json")
    else:
        _emit(result.to_csv(), args.out, f"{stem}.csv")


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_dict(_apply_overrides(load_config(args.config), args))
    _write_sweep(run_sweep(spec, workers=args.workers), args, Path(args.config).stem)
    return EXIT_OK


def cmd_figure(args) -> int:
    spec = figure_presets(args.name)
    _write_sweep(run_sweep(spec, workers=args.workers), args, args.name)
    return EXIT_OK


def cmd_validate(args) -> int:
    tamper = json.loads(args.tamper) if args.tamper else None
    report = validate(args.level, tamper=tamper)
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def cmd_spin_steady(args) -> int:
    p = _params(args)
    s = spin_steady_closed(p)
    doc = {
        "params": p.__dict__,
        "bare": [[[z.real, z.imag] for z in row] for row in s.bare.tolist()],
        "dressed_populations": {"aa": s.rho_aa, "bb": s.rho_bb, "cc": s.rho_cc},
        "rho_ac": [s.rho_ac.real, s.rho_ac.imag],
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_coeffs(args) -> int:
    p = _params(args)
    frame = dressed_frame(p)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ValidityWarning)
        c = coefficients_exact(frame, spin_steady_closed(p), p.Gamma1)
    doc = {
        "params": p.__dict__,
        "theta": frame.theta,
        "delta0": frame.delta0,
        "delta1": frame.delta1,
        "delta2": frame.delta2,
        "delta_shift": c.delta_shift,
        "a_minus": c.a_minus,
        "a_plus": c.a_plus,
        "s1": [c.s1.real, c.s1.imag],
        "s2": [c.s2.real, c.s2.imag],
        "warnings": [str(w.message) for w in caught],
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_resonance(args) -> int:
    delta = detuning_for_resonance(args.omega_m, args.omega0, args.omega1)
    print(format(delta, ".17g"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nvsqueeze", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def output_flags(p, json_flag=True):
        p.add_argument("--out", help="output file (default: stdout, or $%s/<name>)" % OUTDIR_ENV)
        if json_flag:
            p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
        p.add_argument("--workers", type=int, default=None, help="worker processes")

    p = sub.add_parser("sweep", help="run a parameter sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a base parameter")
    p.add_argument("--oracle", action="store_true", help="enable Fock-space spot checks")
    output_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="sweep a figure preset")
    p.add_argument("name", help="one of " + ", ".join(FIGURES))
    output_flags(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("validate", help="run the oracle self-checks")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--tamper", help='JSON object scaling coefficients, e.g. \'{"s1": 1.1}\'')
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    for name, func, text in (
        ("spin-steady", cmd_spin_steady, "pumped spin steady state"),
        ("coeffs", cmd_coeffs, "reduced master-equation coefficients"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True)
        p.add_argument("--set", action="append", metavar="KEY=VALUE")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("resonance", help="detuning that locks omega_bc to omega_m")
    p.add_argument("--omega0", type=float, required=True)
    p.add_argument("--omega1", type=float, default=0.0)
    p.add_argument("--omega-m", dest="omega_m", type=float, default=1.0)
    p.set_defaults(func=cmd_resonance)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownFigure, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
