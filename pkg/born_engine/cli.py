"""
Command line entry point.

    python -m born_engine derive --model data/models/rational_1_2.json
    python -m born_engine simulate --model data/models/equalnorm_d2.json --trials 1000 --seed 7
    python -m born_engine pilotwave --bias 0.7 --out data/pilotwave.csv

Library errors are reported on stderr as ``error [module:Tag]: message``.
Exit status: 0 on success, 1 on validation errors, 2 on solver failures.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from born_engine import settings
from born_engine.equivalence import transform
from born_engine.errors import BornEngineError, MalformedInputError
from born_engine.model import WeightVector, outcome_probs, realizes
from born_engine.pipelines import JsonReportPipeline, LpScanPipeline, TrialCsvPipeline
from born_engine.schemas import (
    EdgeReportSchema,
    ExperimentSchema,
    ModelSchema,
    RealizationSchema,
    ReportSchema,
    TransformationSchema,
    WeightsSchema,
    build,
    load_document,
    validate,
)
from born_engine.sim import PilotWaveConfig, goodness_of_fit, pilot_wave_run, sample
from born_engine.solvers import METHODS, derive, lp_weights

logger = logging.getLogger("born_engine.cli")


class CliParser(argparse.ArgumentParser):
    """Usage errors are validation errors (exit 1), not argparse's exit 2"""

    def error(self, message):
        raise MalformedInputError(message, pointer="argv")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="born_engine",
        description="Operational derivation of the Born rule with exact arithmetic",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        return commands.add_parser(name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = command("derive", "derive the channel weights of a model")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--tol", type=float, default=settings.DEFAULT_TOL, help="continuity tolerance (max norm)")

    p = command("equiv", "apply transformations and report each consistency edge")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument(
        "--transform",
        action="append",
        required=True,
        help="JSON object or kind[:args], e.g. permute:2,1  phase:1/4,0  refine:1,2  relabel:neg  coarsen",
    )

    p = command("simulate", "sample outcomes under a probability rule")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--rule", default="born", help="born | lp:<p> | file:<weights.json>")
    p.add_argument("--trials", type=int, default=settings.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.add_argument("--shards", type=int, default=settings.DEFAULT_SHARDS)
    p.add_argument("--out", default=None, help="CSV file (stdout if omitted)")

    p = command("pilotwave", "run the two-sided hidden-variable model")
    p.add_argument("--bias", type=float, default=0.5, help="probability that omega = +")
    p.add_argument("--trials", type=int, default=settings.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.add_argument("--shards", type=int, default=settings.DEFAULT_SHARDS)
    p.add_argument("--out", default=None, help="CSV file (stdout if omitted)")

    p = command("lpscan", "weights |c_k|^p / sum |c_j|^p for several p")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--p", type=float, nargs="+", default=[1.0, 1.5, 2.0, 3.0], dest="p_list")
    p.add_argument("--out", default=None, help="CSV file (stdout if omitted)")

    p = command("check", "check that an experiment realizes a model")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--experiment", required=True, help="experiment JSON file")
    p.add_argument("--stage", type=int, default=0, help="region index (0 = before any evolution)")
    return parser


def _load_model(path):
    return build(load_document(path, ModelSchema), lambda doc: doc.to_model())


def _require_positive(name, value):
    if not value > 0:
        raise MalformedInputError(f"must be positive, got {value}", pointer=f"--{name}")


def _emit_json(document, out=None):
    pipeline = JsonReportPipeline(out).open_run()
    pipeline.process_item(document)
    pipeline.close_run()


def _emit_fit(fit, out):
    pipeline = TrialCsvPipeline(out).open_run()
    pipeline.process_item(fit)
    pipeline.close_run()


def parse_transformation(spec: str) -> TransformationSchema:
    """JSON object, or the short form kind[:comma separated args]"""
    spec = spec.strip()
    if spec.startswith("{"):
        try:
            data = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(f"invalid JSON: {exc.msg}", pointer="--transform") from exc
        return validate(data, TransformationSchema, source="--transform")
    kind, _, args = spec.partition(":")
    values = [a.strip() for a in args.split(",") if a.strip()]
    data = {"kind": kind}
    if kind == "permute":
        data["pi"] = [int(v) if v.lstrip("-").isdigit() else v for v in values]
    elif kind == "refine":
        data["z"] = [int(v) if v.lstrip("-").isdigit() else v for v in values]
    elif kind == "phase":
        data["theta"] = values
    elif kind == "relabel":
        data["mapping"] = [] if values == ["neg"] else [v.split("=", 1) for v in values]
    return validate(data, TransformationSchema, source="--transform")


def cmd_derive(args):
    _require_positive("tol", args.tol)
    g = _load_model(args.model)
    report = derive(g, args.method, args.tol)
    schema = ReportSchema.from_report(report, {"method": args.method, "tol": args.tol})
    _emit_json(schema.model_dump())


def cmd_equiv(args):
    g = _load_model(args.model)
    edges = []
    current = g
    for spec in args.transform:
        schema = parse_transformation(spec)
        if schema.kind == "relabel" and not schema.mapping:
            schema = TransformationSchema(
                kind="relabel", mapping=[[str(lam), str(-lam)] for lam in current.observable.spectrum()]
            )
        edge = transform(current, build(schema, lambda doc: doc.to_transformation(), "--transform"))
        edges.append(EdgeReportSchema.from_edge(edge).model_dump(by_alias=True, exclude_none=True))
        current = edge.target
    _emit_json({"source": ModelSchema.from_model(g).model_dump(by_alias=True, exclude_none=True), "edges": edges})


def _rule_weights(rule: str, g):
    if rule == "born":
        return WeightVector.born(g)
    if rule.startswith("lp:"):
        try:
            p = float(rule[3:])
        except ValueError as exc:
            raise MalformedInputError(f"bad exponent in {rule!r}", pointer="--rule") from exc
        return lp_weights(g, p)
    if rule.startswith("file:"):
        document = load_document(rule[5:], WeightsSchema)
        w = build(document, lambda doc: doc.to_weights(), "/weights")
        if len(w) != g.dim:
            raise MalformedInputError(f"{len(w)} weights for a model of dimension {g.dim}", pointer="/weights")
        return w
    raise MalformedInputError(f"unknown rule {rule!r}", pointer="--rule")


def cmd_simulate(args):
    _require_positive("trials", args.trials)
    _require_positive("shards", args.shards)
    g = _load_model(args.model)
    w = _rule_weights(args.rule, g)
    record = sample(g, w, args.trials, args.seed, args.shards, rule_tag=args.rule)
    expected = outcome_probs(g, WeightVector.born(g))
    _emit_fit(goodness_of_fit(record, expected), args.out)


def cmd_pilotwave(args):
    _require_positive("trials", args.trials)
    _require_positive("shards", args.shards)
    cfg = PilotWaveConfig(args.bias)
    record = pilot_wave_run(cfg, args.trials, args.seed, args.shards)
    _emit_fit(goodness_of_fit(record, cfg.born_probs()), args.out)


def cmd_lpscan(args):
    g = _load_model(args.model)
    pipeline = LpScanPipeline(args.out, g.dim).open_run()
    for p in args.p_list:
        pipeline.process_item((p, lp_weights(g, p)))
    pipeline.close_run()


def cmd_check(args):
    g = _load_model(args.model)
    experiment = build(load_document(args.experiment, ExperimentSchema), lambda doc: doc.to_experiment())
    report = realizes(experiment, g, args.stage)
    _emit_json(RealizationSchema.from_report(report).model_dump())


COMMANDS = {
    "derive": cmd_derive,
    "equiv": cmd_equiv,
    "simulate": cmd_simulate,
    "pilotwave": cmd_pilotwave,
    "lpscan": cmd_lpscan,
    "check": cmd_check,
}


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else settings.LOG_LEVEL,
            format=settings.LOG_FORMAT,
            stream=sys.stderr,
            force=True,
        )
        COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    except BornEngineError as exc:
        print(f"error [{exc.module}:{exc.tag}]: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
