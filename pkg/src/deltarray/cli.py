"""Command-line front end.

Usage::

    deltarray <transmit|scan|resonances|reduce|design> --config FILE
              [--energy MEV] [--target MEV] [--branch N] [--out PATH]

Exit codes: 0 success, 2 config error, 3 domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, load_config
from .core import Barrier, BarrierArray, array_transmission, compose, reflection, transmission
from .errors import ConfigError, DeltarrayError, DomainError
from .filters import design_pair_cell
from .physunits import k_from_energy, reduced_strength
from .reduction import reduce
from .resonance import (
    closed_form_residuals,
    find_perfect_tunnelling,
    scan,
    thread_count,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

CSV_HEADER = "energy_meV,k_per_nm,T,R"
RESONANCE_HEADER = (
    "energy_meV,k_per_nm,T,m21_sq,method,branch,derived_residual,printed_residual,printed_agrees"
)


class OutputError(Exception):
    pass


def fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    if x is None:
        return ""
    return repr(float(x))


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _require_energy(args, name="energy") -> float:
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"--{name} is required for this command")
    if not value > 0:
        raise DomainError(f"energy must be positive, got {value!r} meV")
    return value


def _k_range(cfg: ExperimentConfig):
    if cfg.scan is None:
        raise ConfigError("config has no 'scan' block")
    return (
        k_from_energy(cfg.scan.emin, cfg.material),
        k_from_energy(cfg.scan.emax, cfg.material),
    )


def cmd_transmit(cfg: ExperimentConfig, args) -> str:
    energy = _require_energy(args)
    k = k_from_energy(energy, cfg.material)
    tm = compose(cfg.array(), k)
    return f"{fmt(energy)},{fmt(k)},{fmt(transmission(tm))},{fmt(reflection(tm))}\n"


def scan_csv(cfg: ExperimentConfig) -> str:
    k_min, k_max = _k_range(cfg)
    spec = scan(cfg.array(), k_min, k_max, cfg.scan.points, cfg.material, thread_count())
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for e, k, T, R in zip(spec.energy, spec.k, spec.T, spec.R):
        buf.write(f"{fmt(e)},{fmt(k)},{fmt(T)},{fmt(R)}\n")
    return buf.getvalue()


def plot_script(csv_name: str) -> str:
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'Energy (meV)'\n"
        "set ylabel 'Transmission'\n"
        "set yrange [0:1.05]\n"
        f"plot '{csv_name}' using 1:3 with lines\n"
    )


def cmd_scan(cfg: ExperimentConfig, args) -> str | None:
    text = scan_csv(cfg)
    if args.out is None:
        return text
    out = Path(args.out)
    _write(str(out), text)
    _write(str(out.with_suffix(".gp")), plot_script(out.name))
    return None


def _pair_branch(cfg: ExperimentConfig, k: float) -> int | None:
    arr = cfg.array()
    if len(arr) != 2 or arr[0].g != arr[1].g or arr[0].g <= 0:
        return None
    theta = 2 * k * (arr[1].x - arr[0].x)
    n = (theta - math.pi - 2 * math.atan(arr[0].g / (2 * k))) / (2 * math.pi)
    return round(n)


def cmd_resonances(cfg: ExperimentConfig, args) -> str:
    k_min, k_max = _k_range(cfg)
    arr = cfg.array()
    report = find_perfect_tunnelling(arr, k_min, k_max, cfg.grid, cfg.tol, material=cfg.material)
    buf = io.StringIO()
    buf.write(RESONANCE_HEADER + "\n")
    for r in report.resonances:
        forms = closed_form_residuals(arr, r.k) or {}
        derived = forms.get("derived")
        printed = forms.get("printed")
        agrees = "" if printed is None else ("yes" if abs(printed) <= 1e-9 else "no")
        branch = _pair_branch(cfg, r.k)
        buf.write(
            ",".join(
                [
                    fmt(r.energy),
                    fmt(r.k),
                    fmt(r.T),
                    fmt(r.residual),
                    report.method,
                    "" if branch is None else str(branch),
                    fmt(derived),
                    fmt(printed),
                    agrees,
                ]
            )
            + "\n"
        )
    return buf.getvalue()


def cmd_reduce(cfg: ExperimentConfig, args) -> str:
    energy = _require_energy(args)
    k = k_from_energy(energy, cfg.material)
    arr = cfg.array()
    result = reduce(arr, k, cfg.reduce_tol)
    T_in = array_transmission(arr, k)
    T_eff = array_transmission(result.effective, k)
    total = float(sum(b.g for b in result.effective))

    lines = [f"{result.classification}: {len(arr)} barriers -> {result.effective_n}"]
    if result.effective_n == 1 and total == 0:
        lines[0] = f"{result.classification}, zero strength, T=1"
    if result.case:
        lines.append(f"four-barrier case {result.case}")
    for rec in result.merge_log:
        tgt = "" if rec.target is None else f" -> {rec.target}"
        lines.append(f"  {list(rec.indices)}{tgt}: {rec.note}")
    lines.append(f"T(input) = {fmt(T_in)}, T(effective) = {fmt(T_eff)}")
    print("\n".join(lines), file=sys.stderr)

    doc = {"energy_meV": energy, "k_per_nm": k, "T_input": T_in, "T_effective": T_eff}
    doc.update(result.to_dict())
    return json.dumps(doc, indent=2) + "\n"


def cmd_design(cfg: ExperimentConfig, args) -> str:
    opts = cfg.design or {}
    target = args.target if args.target is not None else opts.get("target_meV")
    if target is None:
        raise ConfigError("--target is required (or design.target_meV in the config)")
    if not target > 0:
        raise DomainError(f"target energy must be positive, got {target!r} meV")
    branch = args.branch if args.branch is not None else opts.get("branch", 0)
    if branch < 0:
        raise DomainError("branch must be nonnegative")
    J = opts.get("J_eVA")
    if J is None:
        if not cfg.barriers:
            raise ConfigError("design needs design.J_eVA or at least one barrier")
        J = cfg.barriers[0][1]
    d = design_pair_cell(target, cfg.material, J, branch)

    g = reduced_strength(J, cfg.material)
    k = k_from_energy(target, cfg.material)
    T = array_transmission(BarrierArray([Barrier(0.0, g), Barrier(d, g)]), k)
    mat = cfg.material
    doc = {
        "schema": 1,
        "material": {"effective_mass_ratio": mat.effective_mass_ratio, "label": mat.label},
        "barriers": [{"x_nm": 0.0, "J_eVA": J}, {"x_nm": d, "J_eVA": J}],
        "design": {"J_eVA": J, "target_meV": target, "branch": branch, "d_nm": d},
    }
    print(f"d = {fmt(d)} nm, T(target) = {fmt(T)}", file=sys.stderr)
    return json.dumps(doc, indent=2) + "\n"


COMMANDS = {
    "transmit": cmd_transmit,
    "scan": cmd_scan,
    "resonances": cmd_resonances,
    "reduce": cmd_reduce,
    "design": cmd_design,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="deltarray",
        description="Transmission through arrays of delta-function barriers.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, metavar="FILE", help="JSON experiment file")
    p.add_argument("--energy", type=float, metavar="MEV", help="incident energy (transmit, reduce)")
    p.add_argument("--target", type=float, metavar="MEV", help="target energy (design)")
    p.add_argument("--branch", type=int, metavar="N", help="resonance branch (design)")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        text = COMMANDS[args.command](cfg, args)
        if text is not None:
            if args.command == "scan":
                sys.stdout.write(text)
            else:
                _write(args.out, text)
    except OutputError as exc:
        print(f"deltarray: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"deltarray: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DeltarrayError as exc:
        print(f"deltarray: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
