"""Command-line entry point.

Subcommands
-----------
run <config.json>            execute a config file, write CSV + JSON
scenario <name> [options]    run a named preset (fig1a fig1b fig2 fig2b
                             fig3a fig3b fig4 ratchet broad reconstruction)
validate <config.json>       check a config file without running it

Exit codes: 0 success, 1 configuration error, 2 runtime engine error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiment
from .errors import ConfigError, KickedRotorError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="krqr",
        description="Kicked-rotor quantum resonance simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config file")
    p_run.add_argument("config", help="path to a JSON config document")

    p_sc = sub.add_parser("scenario", help="run a named preset")
    p_sc.add_argument("name", help="preset name, e.g. fig2")
    p_sc.add_argument("--k", type=float, dest="K", help="kick strength")
    p_sc.add_argument("--kbar", type=float, help="reduced Planck constant")
    p_sc.add_argument("--sigma", type=float, help="gaussian rms width")
    p_sc.add_argument("--delta", type=float, help="square full width")
    p_sc.add_argument("--phi", type=float, help="ratchet / packet phase")
    p_sc.add_argument("--kicks", type=int, dest="n_kicks",
                      help="number of kicks")
    p_sc.add_argument("--out", help="output base path (default <name>.csv)")

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config", help="path to a JSON config document")
    return parser


def _load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return experiment.parse_config(doc)


def _out_paths(base):
    base = str(base)
    if base.endswith(".csv") or base.endswith(".json"):
        base = base.rsplit(".", 1)[0]
    return base + ".csv", base + ".json", base + ".slices.csv"


def _run_and_export(cfg, out_base):
    bundle = experiment.run(cfg)
    csv_path, json_path, slices_path = _out_paths(out_base)
    experiment.export_csv(bundle, csv_path)
    experiment.export_json(bundle, json_path)
    written = [csv_path, json_path]
    if cfg.scenario in (experiment.Scenario.PLANE_WAVE,
                        experiment.Scenario.ANTI_RESONANCE) \
            and cfg.params.ell is not None:
        experiment.write_slice_table(slices_path, cfg)
        written.append(slices_path)
    for path in written:
        print(path)
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK

    try:
        if args.command == "validate":
            cfg = _load_config_file(args.config)
            print(f"ok: {cfg.scenario.value}, {len(cfg.engines)} engine(s), "
                  f"{cfg.params.n_kicks} kicks")
            return EXIT_OK

        if args.command == "run":
            cfg = _load_config_file(args.config)
            if not cfg.output_path:
                raise ConfigError("config needs 'output_path' for the run "
                                  "command")
            return _run_and_export(cfg, cfg.output_path)

        if args.command == "scenario":
            out = args.out or f"{args.name}.csv"
            if args.name == experiment.FILTER_PRESET["name"]:
                overrides = {}
                if args.delta is not None:
                    overrides["delta"] = args.delta
                if args.sigma is not None:
                    overrides["sigma"] = args.sigma
                try:
                    experiment.write_filter_table(_out_paths(out)[0],
                                                  overrides)
                except KickedRotorError as exc:
                    print(f"error [{exc.code}]: {exc}", file=sys.stderr)
                    return EXIT_RUNTIME
                print(_out_paths(out)[0])
                return EXIT_OK
            overrides = {"K": args.K, "kbar": args.kbar, "sigma": args.sigma,
                         "delta": args.delta, "phi": args.phi,
                         "n_kicks": args.n_kicks}
            cfg = experiment.preset_config(args.name, overrides)
            return _run_and_export(cfg, out)
    except ConfigError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KickedRotorError, ValueError) as exc:
        code = getattr(exc, "code", "RUNTIME")
        print(f"error [{code}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_CONFIG


def main() -> int:
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
