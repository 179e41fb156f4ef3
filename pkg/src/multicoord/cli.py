"""Command-line entry point.

    multicoord build        --config run.json [--out DIR] [--jobs N]
    multicoord detect       --config run.json --mode MODE [--layer L] [--seed N]
    multicoord compare      --config run.json --ref B --other A
    multicoord characterize --config run.json --ref B --other A
    multicoord synth        --config run.json [--seed N]
    multicoord report       [--out DIR | --config run.json]

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 internal
invariant violation. --seed overrides the config's detection seed (and the
synth seed for the synth command); --out overrides the output directory.
Both overrides are part of the effective config, so they change the config
hash embedded in the reports.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, DataError, InvariantError
from .pipeline import (DETECT_MODES, RunConfig, run_build, run_characterize,
                       run_compare, run_detect, run_report, run_synth)

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1, not argparse's
    default 2 (2 is reserved for data errors here).
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="multicoord",
        description="Detect and compare multimodal coordinated behavior "
                    "in action logs.")
    parser.add_argument("--verbose", "-v", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override the configured seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker cap for independent tasks")
        p.add_argument("--out", default=None,
                       help="override the configured output directory")

    common(sub.add_parser("build", help="ingest events, build and filter the network"))
    p_detect = sub.add_parser("detect", help="run one operationalization")
    common(p_detect)
    p_detect.add_argument("--mode", required=True, choices=DETECT_MODES)
    p_detect.add_argument("--layer", default=None,
                          help="layer for --mode mono")
    p_compare = sub.add_parser("compare", help="overlap, matching, labels, NMI")
    common(p_compare)
    p_compare.add_argument("--ref", required=True,
                           help="reference approach (side B)")
    p_compare.add_argument("--other", required=True,
                           help="baseline approach (side A)")
    p_char = sub.add_parser("characterize",
                            help="metric vectors, cosine, PCA, rank tests")
    common(p_char)
    p_char.add_argument("--ref", required=True)
    p_char.add_argument("--other", required=True)
    common(sub.add_parser("synth", help="generate a synthetic log + ground truth"))
    p_report = sub.add_parser("report", help="summarize an output directory")
    common(p_report, config_required=False)
    return parser


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config)
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        cfg.detection.seed = args.seed
        if cfg.synth is not None:
            cfg.synth.seed = args.seed
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "report":
            if args.config is None and args.out is None:
                raise ConfigError("report needs --out or --config")
            out = args.out if args.out is not None else _load_config(args).out
            sys.stdout.write(run_report(out))
            return 0
        cfg = _load_config(args)
        if args.command == "build":
            run_build(cfg, jobs=args.jobs)
        elif args.command == "detect":
            for summary in run_detect(cfg, args.mode, layer=args.layer,
                                      jobs=args.jobs):
                scope = summary.get("scope")
                ncom = summary.get("n_communities")
                print(f"detect {scope}: {ncom} communities")
        elif args.command == "compare":
            summary = run_compare(cfg, args.ref, args.other)
            c = summary["communities"]
            print(f"compare {args.ref} vs {args.other}: communities "
                  f"lost/common/gained = {c['lost']}/{c['common']}/{c['gained']}, "
                  f"nmi = {summary['nmi']:.4f}")
        elif args.command == "characterize":
            summary = run_characterize(cfg, args.ref, args.other)
            print(f"characterize {summary['comparison']}: "
                  f"{summary['n_communities']} communities, "
                  f"{summary['n_nodes']} labeled nodes")
        else:  # synth
            paths = run_synth(cfg)
            print(f"synth: wrote {paths['events']} and {paths['ground_truth']}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
