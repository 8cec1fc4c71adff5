"""Command line driver: ``dehnlab <suite> --p --sizes --seed --config --out``."""

from __future__ import annotations

import argparse
import sys
import time

from .experiments import SUITES, ExperimentManifest, load_config, run_suite
from .moves import DEFAULT_MODEL

OPTION_KEYS = ("commuting_L", "omega_L", "render")


def _int_list(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def build_manifest(args) -> ExperimentManifest:
    """Config file first, then command line flags on top."""
    cfg = load_config(args.config) if args.config else {}
    model = DEFAULT_MODEL.replace(**{k: float(v) for k, v in cfg.items() if k.startswith("C_")})
    options = {k: cfg[k] for k in OPTION_KEYS if k in cfg}
    if args.no_render:
        options["render"] = False

    def pick(flag, key, default):
        return flag if flag is not None else cfg.get(key, default)

    sizes = pick(args.sizes, "sizes", None)
    if isinstance(sizes, int):
        sizes = (sizes,)
    return ExperimentManifest(
        suite=args.suite,
        p=pick(args.p, "p", None),
        sizes=tuple(sizes) if sizes is not None else None,
        seed=int(pick(args.seed, "seed", 0)),
        model=model,
        out=pick(args.out, "out", None),
        jobs=int(pick(args.jobs, "jobs", 1)),
        options=options,
    )


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="dehnlab", description="Run an experiment suite.")
    ap.add_argument("suite", choices=sorted(SUITES) + ["all"])
    ap.add_argument("--p", type=int, default=None, help="matrix size (suite default if omitted)")
    ap.add_argument("--sizes", type=_int_list, default=None, help="comma separated size grid")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--config", default=None, help="key=value file; flags take precedence")
    ap.add_argument("--out", default=None, help="directory for report.json, data.csv, *.svg")
    ap.add_argument("--jobs", type=int, default=None, help="worker processes")
    ap.add_argument("--no-render", action="store_true", help="skip SVG output")
    args = ap.parse_args(argv)
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        args.suite = name
        man = build_manifest(args)
        if len(names) > 1 and man.out:
            man.out = f"{man.out}/{name}"
        t0 = time.time()
        res = run_suite(man)
        print(f"[{name}] {'ok' if res.ok else 'FAILED'} in {time.time() - t0:.1f} s")
        for c in res.checks:
            print("  " + c.line())
        ok = ok and res.ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
