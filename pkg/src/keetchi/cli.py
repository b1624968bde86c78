"""Command-line entry point: ``keetchi run`` and ``keetchi validate``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .errors import KeetchiError, MalformedConfig
from .scenario import load_config, run_scenario, with_overrides
from .stats import write_stats

log = logging.getLogger("keetchi")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _run_one(cfg, out_dir):
    ledger = run_scenario(cfg)
    write_stats(ledger, out_dir)
    return out_dir, ledger.metrics


def _cmd_run(args):
    cfg = with_overrides(load_config(args.config), seed=args.seed, trace=args.trace)
    if args.replications <= 1:
        out_dir, metrics = _run_one(cfg, args.out)
        for key, value in metrics.items():
            print(f"{key},{value!r}")
        log.info("statistics written to %s", out_dir)
        return EXIT_OK
    jobs = [(replace(cfg, seed=cfg.seed + i),
             os.path.join(args.out, f"rep-{i:03d}")) for i in range(args.replications)]
    with ProcessPoolExecutor() as pool:
        results = list(pool.map(_run_one, *zip(*jobs)))
    for out_dir, metrics in results:
        print(f"{out_dir}: interested_delivery_ratio={metrics['interested_delivery_ratio']!r}")
    return EXIT_OK


def _cmd_validate(args):
    cfg = load_config(args.config)
    print(f"ok: {len(cfg.nodes)} nodes, duration {cfg.duration} s, mobility {cfg.mobility.model}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="keetchi", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write CSV statistics")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--out", default="keetchi-out", help="output directory")
    run.add_argument("--trace", help="contact trace file; replaces the configured mobility")
    run.add_argument("--replications", type=int, default=1,
                     help="run N consecutive seeds in parallel, one sub-directory each")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except MalformedConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeetchiError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
