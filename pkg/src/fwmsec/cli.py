"""Batch command-line front end.

    fwmsec simulate|bloch|holevo|keyrate|interference-map --config run.json
        [--out DIR] [--seed N] [--format csv|svg] [--dataset FILE]

Exit codes: 0 success, 1 internal error, 2 input or configuration error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import keyrate as kr
from . import qstate, response
from ._io import atomic_write_text, fmt
from .config import RunConfig, load_config
from .errors import ConfigError, FwmsecError
from .signal import format_grid, load_grid
from .svg import heatmap_svg

log = logging.getLogger("fwmsec")


def synthesize(cfg):
    """Grid from the synthesis block, with seeded complex Gaussian noise."""
    syn = cfg.synthesis
    grid = response.synthesize_field(syn.params, syn.amplitudes, syn.axes, pathway=syn.pathway)
    if syn.noise_level > 0:
        rng = np.random.default_rng(cfg.seed)
        peak = max(np.abs(grid.S_H).max(), np.abs(grid.S_V).max())
        std = syn.noise_level * peak
        # per-quadrature std / sqrt(2): the complex noise has rms modulus std
        noise = lambda: rng.normal(0.0, std / np.sqrt(2), grid.shape) + 1j * rng.normal(0.0, std / np.sqrt(2), grid.shape)  # noqa: E731
        grid = grid.with_fields(grid.S_H + noise(), grid.S_V + noise(), noise_level=fmt(syn.noise_level), seed=str(cfg.seed))
    return grid


def obtain_grid(cfg):
    cfg.require_data()
    if cfg.dataset is not None:
        return load_grid(cfg.dataset)
    return synthesize(cfg)


def cmd_simulate(cfg):
    if cfg.synthesis is None:
        raise ConfigError("simulate needs a 'synthesis' block")
    grid = synthesize(cfg)
    return [atomic_write_text(cfg.output_dir / "dataset.csv", format_grid(grid))]


def cmd_bloch(cfg):
    grid = obtain_grid(cfg)
    text = qstate.format_bloch_points(grid, cfg.dark_floor)
    return [atomic_write_text(cfg.output_dir / "bloch.csv", text)]


def cmd_holevo(cfg):
    grid = obtain_grid(cfg)
    comps = qstate.windowed_holevo_report(grid, cfg.windows, cfg.tau0, cfg.dark_floor)
    return [atomic_write_text(cfg.output_dir / "holevo.csv", qstate.format_ensemble_reports(comps))]


def cmd_keyrate(cfg):
    grid = obtain_grid(cfg)
    scheme = cfg.scheme
    if scheme.chi_mode == "toggled":
        chi = kr.toggled_chi(grid, scheme, cfg.dark_floor)
    else:
        comps = qstate.windowed_holevo_report(grid, cfg.windows, cfg.tau0, cfg.dark_floor)
        chi = kr.chi_from_windows(comps, scheme.chi_mode)
    report = kr.keyrate_spectrum(grid, scheme, chi, cfg.dark_floor)
    summary = json.dumps(report.summary(), indent=2, sort_keys=True) + "\n"
    return [
        atomic_write_text(cfg.output_dir / "keyrate.csv", kr.format_keyrate_report(report)),
        atomic_write_text(cfg.output_dir / "keyrate_summary.json", summary),
    ]


def panel_stem(lam, tau):
    return f"interference_map_{fmt(lam)}nm_tau{fmt(tau)}fs"


def cmd_interference_map(cfg):
    params = cfg.synthesis.params if cfg.synthesis is not None else response.ModelParams()
    m = cfg.interference_map
    xi, tnorm, panels = response.interference_panels(
        params, m.wavelengths_nm, m.taus_fs, m.Xi_range, m.Tnorm_range, m.grid_density
    )
    written = []
    maxima = {}
    for (lam, tau), values in panels.items():
        stem = panel_stem(lam, tau)
        text = response.format_map_panel(xi, tnorm, values, lam, tau, params)
        written.append(atomic_write_text(cfg.output_dir / f"{stem}.csv", text))
        maxima[stem] = float(values.max())
        if cfg.output_format == "svg":
            svg = heatmap_svg(values, xi, tnorm, f"|r_int| at {lam:g} nm, tau = {tau:g} fs", "Xi", "T / t_spin")
            written.append(atomic_write_text(cfg.output_dir / f"{stem}.svg", svg))
    summary = json.dumps({"panel_max": maxima}, indent=2, sort_keys=True) + "\n"
    written.append(atomic_write_text(cfg.output_dir / "interference_map_summary.json", summary))
    return written


COMMANDS = {
    "simulate": cmd_simulate,
    "bloch": cmd_bloch,
    "holevo": cmd_holevo,
    "keyrate": cmd_keyrate,
    "interference-map": cmd_interference_map,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fwmsec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="noise seed (overrides config)")
        p.add_argument("--format", choices=("csv", "svg"), help="map output format")
        p.add_argument("--dataset", type=Path, help="dataset CSV (replaces any synthesis block)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.dataset is not None:
        cfg.synthesis = None
        cfg.dataset = args.dataset
    if args.out is not None:
        cfg.output_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.format is not None:
        cfg.output_format = args.format
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = resolve_config(args)
        written = COMMANDS[args.command](cfg)
    except (FwmsecError, OSError) as exc:
        print(f"fwmsec {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"fwmsec {args.command}: internal error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
