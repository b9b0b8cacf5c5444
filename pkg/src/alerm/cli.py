"""Command-line front end.

JSON goes to stdout for single results, CSV for series; the resolved seed
is echoed to stderr.  Exit status: 0 on success, 1 when a certificate
fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bounds import bound_once, coverage_experiment, draw_query_sample, stream_seed
from .complexity import INNER_METHODS, rademacher
from .core import BUILTIN_TASKS, ExperimentConfig, Pool, make_builtin_task
from .hypotheses import Hypothesis, certify, setting_row, template_for
from .ipm import KANTOROVICH, TOTAL_VARIATION, Grid, estimate
from .query import al_loop, curve_to_csv

GENERATORS = {"k": KANTOROVICH, "kantorovich": KANTOROVICH, "tv": TOTAL_VARIATION,
              "total_variation": TOTAL_VARIATION}


class UsageError(Exception):
    pass


def _emit_json(doc: dict, args) -> None:
    if not args.no_timestamp:
        doc = {**doc, "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_atomic(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, target)


def _load_config(args) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.load(args.config)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}") from exc
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _announce_seed(seed: int) -> None:
    print(f"seed={seed}", file=sys.stderr)


def cmd_tasks(args) -> int:
    _announce_seed(args.seed or 0)
    listing = []
    for name in BUILTIN_TASKS:
        t = make_builtin_task(name)
        listing.append({"name": name, "dim": t.dim, "labels": t.label_space, "mx": t.mx, "my": t.my,
                        "description": t.description})
    _emit_json({"tasks": listing}, args)
    return 0


def cmd_ipm(args) -> int:
    _announce_seed(args.seed or 0)
    try:
        a = Pool.read_csv(args.a)
        b = Pool.read_csv(args.b)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    generator = GENERATORS[args.generator]
    bins = args.bins
    if generator == TOTAL_VARIATION:
        bins = Grid.covering(a.points, b.points, bins=args.bins)
    try:
        est = estimate(a.points, b.points, generator, args.method, bins)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit_json(est.to_dict(), args)
    return 0


def cmd_certify(args) -> int:
    _announce_seed(args.seed or 0)
    try:
        h = Hypothesis.from_json(Path(args.model).read_text())
        overrides = {k: v for k, v in (("mx", args.mx), ("my", args.my)) if v is not None}
        if overrides:
            h = replace(h, **overrides)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad model {args.model}: {exc}") from exc
    cert = certify(h)
    _emit_json(cert.to_dict(), args)
    return 0 if cert.passes else 1


def cmd_rademacher(args) -> int:
    cfg = _load_config(args)
    _announce_seed(cfg.seed)
    task = make_builtin_task(cfg.task, cfg.seed)
    row = setting_row(cfg.setting)
    queried = draw_query_sample(cfg, task, stream_seed(cfg.seed, 0, 2))
    template = template_for(row.id, task, cfg.model, cfg.bias_bound, seed=stream_seed(cfg.seed, 0, 3))
    num_sigma = args.num_sigma or cfg.num_sigma
    est = rademacher(template, queried, num_sigma, args.inner or cfg.inner, stream_seed(cfg.seed, 0, 4))
    _emit_json({"setting": row.id.value, **est.to_dict()}, args)
    return 0


def cmd_bound(args) -> int:
    cfg = _load_config(args)
    _announce_seed(cfg.seed)
    report = bound_once(cfg, 0)
    _emit_json({"setting": cfg.setting, "task": cfg.task, **report.to_dict()}, args)
    return 0


def cmd_al_run(args) -> int:
    cfg = _load_config(args)
    _announce_seed(cfg.seed)
    try:
        records = al_loop(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write_atomic(args.output, curve_to_csv(records))
    return 0


def cmd_coverage(args) -> int:
    cfg = _load_config(args)
    _announce_seed(cfg.seed)
    record = coverage_experiment(cfg, args.reps)
    _write_atomic(args.output, record.to_csv())
    print(record.summary(), file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="root seed; overrides the config value")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field from JSON output")

    parser = argparse.ArgumentParser(prog="alerm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tasks", parents=[common], help="list builtin synthetic tasks")
    p.set_defaults(func=cmd_tasks)

    p = sub.add_parser("ipm", parents=[common], help="IPM between two sample CSVs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--generator", choices=sorted(GENERATORS), default="k")
    p.add_argument("--method", default=None,
                   choices=["closed_form_1d", "exact_transport", "histogram_tv"])
    p.add_argument("--bins", type=int, default=10, help="histogram bins per axis (TV only)")
    p.set_defaults(func=cmd_ipm)

    p = sub.add_parser("certify", parents=[common], help="check a hypothesis against its setting's constraint")
    p.add_argument("model")
    p.add_argument("--mx", type=float, default=None, help="domain bound M_X")
    p.add_argument("--my", type=float, default=None, help="label bound M_Y")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("rademacher", parents=[common], help="Rademacher complexity on a queried sample")
    p.add_argument("config")
    p.add_argument("--num-sigma", type=int, default=None)
    p.add_argument("--inner", choices=[m for m in INNER_METHODS if m != "enumeration"], default=None)
    p.set_defaults(func=cmd_rademacher)

    p = sub.add_parser("bound", parents=[common], help="assemble one bound report")
    p.add_argument("config")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("al-run", parents=[common], help="run the active-learning loop")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_al_run)

    p = sub.add_parser("coverage", parents=[common], help="bound coverage over repetitions")
    p.add_argument("config")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"alerm {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
