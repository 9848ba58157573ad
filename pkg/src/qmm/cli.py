"""Command-line entry point ``qmm``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import yaml

from . import commands
from .analytics import BracketError
from .config import ConfigError, config_keys, parse_config
from .core import DiagonalizationError, SpecError
from .recipes import RECIPES
from .resonance import ResonanceError
from .tables import write_csv

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
NUMERICAL_ERRORS = (ResonanceError, BracketError, DiagonalizationError, ArithmeticError)


@contextmanager
def worker_map(threads: int):
    """Ordered ``map`` over a process pool, or the builtin for one worker."""
    if threads <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        yield pool.map


def _add_common(p: argparse.ArgumentParser, keys: bool = True) -> None:
    p.add_argument("--out", required=True, help="output CSV (directory for figures)")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    if keys:
        p.add_argument("--config", help="flat YAML key-value file")
        for key in config_keys():
            p.add_argument(f"--{key}", dest=f"key_{key}", default=argparse.SUPPRESS,
                           metavar="VALUE", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmm",
        description="Single-photon transport through a coupled-cavity array with a central qubit.",
        epilog="Config keys (file or --KEY VALUE): " + ", ".join(config_keys()))
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("spectrum", "transmission spectrum over an energy grid"),
                       ("modes", "eigenmodes of the isolated array"),
                       ("linewidths", "quasi-bound linewidths over J_over_g_list"),
                       ("occupation", "site occupation at the quasi-bound peaks")):
        _add_common(sub.add_parser(name, help=text))
    fig = sub.add_parser("figures", help="regenerate figure datasets")
    fig.add_argument("which", nargs="+", choices=sorted(RECIPES))
    _add_common(fig, keys=False)
    return parser


def _overrides(ns: argparse.Namespace) -> dict:
    out = {}
    for name, raw in vars(ns).items():
        if name.startswith("key_"):
            try:
                out[name[4:]] = yaml.safe_load(raw)
            except yaml.YAMLError:
                out[name[4:]] = raw
    return out


def run(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.threads < 1:
        parser.error("--threads must be at least 1")
    out = Path(ns.out)
    try:
        if ns.command == "figures":
            with worker_map(ns.threads) as map_fn:
                for which in ns.which:
                    RECIPES[which](out, map_fn, ns.threads)
            return 0
        cfg = parse_config(ns.config, _overrides(ns))
        status = 0
        with worker_map(ns.threads) as map_fn:
            if ns.command == "spectrum":
                cols, rows = commands.spectrum_table(cfg, map_fn, ns.threads)
            elif ns.command == "modes":
                cols, rows = commands.modes_table(cfg)
            elif ns.command == "linewidths":
                cols, rows = commands.linewidth_table(cfg, map_fn)
                failed = [r for r in rows if r["error"]]
                for r in failed:
                    print(f"qmm: J/g={r['j_over_g']:g}: {r['error']}", file=sys.stderr)
                status = EXIT_NUMERICAL if failed else 0
            else:
                cols, rows = commands.occupation_table(cfg)
        write_csv(out, cols, rows)
        return status
    except (ConfigError, SpecError) as exc:
        print(f"qmm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"qmm: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
