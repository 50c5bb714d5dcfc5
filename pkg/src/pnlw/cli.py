"""Command line entry point: ``pnlw <subcommand> --config <file> [--seed N] [--out DIR]``.

Subcommands are the catalog ids, ``all-acceptance``, ``simulate``,
``tail-experiment`` and ``scattering-fit``.  Parameters come from the
experiment defaults, then the JSON config, then explicit flags.  The exit
status is 0 only when every check passes; 1 signals a failed check and 2 an
invalid manifest.
"""

from __future__ import annotations

import argparse
import sys

from . import io
from .harness import CATALOG, SUITE, TOOLS, ManifestError, RunManifest, list_experiments, run_experiment


def _levels(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("levels take the form start:stop:count")
    return [float(parts[0]), float(parts[1]), int(parts[2])]


def _pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return [float(parts[0]), float(parts[1])]


def _common(parser):
    parser.add_argument("--config", help="JSON manifest or parameter document")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", default="runs", help="parent directory of run folders")


def build_parser():
    parser = argparse.ArgumentParser(prog="pnlw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print the experiment catalog")
    for eid, exp in {**CATALOG, SUITE.id: SUITE}.items():
        if eid == "scattering-fit":
            continue
        _common(sub.add_parser(eid, help=exp.statement))

    sim = sub.add_parser("simulate", help=TOOLS["simulate"].statement)
    _common(sim)
    sim.add_argument("--mode", choices=["full", "perturbation"])
    sim.add_argument("--sigma", type=float)
    sim.add_argument("--alpha", type=float)
    sim.add_argument("--n-max", dest="n_max", type=int)
    sim.add_argument("--dt", type=float)
    sim.add_argument("--t-span", dest="t_span", type=_pair, help="start,stop")

    tail = sub.add_parser("tail-experiment", help=TOOLS["tail-experiment"].statement)
    _common(tail)
    tail.add_argument("--regime", type=int, choices=[1, 2, 3])
    tail.add_argument("--n-cutoff", dest="n_cutoff", type=int,
                      help="N for regime 1, M for regime 3")
    tail.add_argument("--levels", type=_levels, help="start:stop:count")
    tail.add_argument("--draws", type=int)

    scat = sub.add_parser("scattering-fit", help=CATALOG["scattering-fit"].statement)
    _common(scat)
    scat.add_argument("--q", type=float)
    scat.add_argument("--t-min", dest="t_min", type=float)
    scat.add_argument("--t-max", dest="t_max", type=float)
    scat.add_argument("--t-count", dest="t_count", type=int)
    scat.add_argument("--run-manifest", dest="run_manifest",
                      help="manifest.json of a full-mode simulate run covering [0, pi]")
    return parser


_FLAGS = ("mode", "sigma", "alpha", "n_max", "dt", "t_span", "regime", "levels", "draws",
          "q", "t_min", "t_max", "t_count")


def manifest_from_args(args):
    """Defaults, then the config document, then explicit flags."""
    params, seed, statement = {}, 0, ""
    if args.config:
        doc = io.read_json(args.config)
        if "experiment" in doc:
            if doc["experiment"] != args.command:
                raise ManifestError({"experiment": f"config is for {doc['experiment']!r}"})
            params = dict(doc.get("params", {}))
            seed = doc.get("seed", 0)
            statement = doc.get("statement", "")
        else:
            params = dict(doc)
    for name in _FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    if getattr(args, "n_cutoff", None) is not None:
        key = "N" if params.get("regime", TOOLS["tail-experiment"].defaults["regime"]) == 1 else "M"
        params[key] = args.n_cutoff
    if getattr(args, "run_manifest", None):
        params["source"] = io.read_json(args.run_manifest)
    if args.seed is not None:
        seed = args.seed
    return RunManifest(args.command, params, seed, statement=statement)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for eid, (statement, op) in list_experiments().items():
            print(f"{eid:22s} {op:42s} {statement}")
        return 0
    try:
        manifest = manifest_from_args(args)
        result = run_experiment(manifest, args.out)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(result.report())
    print(f"run directory: {result.run_dir}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
