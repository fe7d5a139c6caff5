# User value: This file is the command line: generate, fit, eval, plan, shared and combine-frames.
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from dotenv import load_dotenv

from sosc import metrics
from sosc.config import load_run_config
from sosc.contract import EXIT_OK
from sosc.dispatcher import dispatch
from sosc.error_catalog import UsageError, classify_error, exit_code_for
from sosc.json_logging import configure_json_logging
from sosc.startup_env import validate_startup_env

logger = logging.getLogger("sosc.cli")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _hp_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=["teleop"], help="start from the teleoperation hyperparameters")
    p.add_argument("--lambda", dest="lambda", type=float)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--lambda3", type=float)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--b-m", dest="b_m", type=float)
    p.add_argument("--kappa2", type=float)
    p.add_argument("--weight-mode", dest="weight_mode", choices=["linear", "eligibility", "constant"])


def _control_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float)
    p.add_argument("--r-scale", dest="r_scale", type=float)
    p.add_argument("--in-idx", dest="in_idx")
    p.add_argument("--out-idx", dest="out_idx")
    p.add_argument("--frames")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sosc", description="Online segmentation of demonstration streams into skill models.")
    parser.add_argument("--config", help="JSON run config; flags override its fields")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a synthetic labelled stream")
    gen.add_argument("--output")
    gen.add_argument("--protocol", choices=["stage", "stationary"])
    gen.add_argument("--D", dest="D", type=int)
    gen.add_argument("--K", dest="K", type=int)
    gen.add_argument("--T", dest="T", type=int)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--seeds", type=int)
    gen.add_argument("--workers", type=int)

    fit = sub.add_parser("fit", help="stream points through the online learner")
    fit.add_argument("--input")
    fit.add_argument("--model")
    fit.add_argument("--log")
    fit.add_argument("--resume", action="store_true", default=None)
    fit.add_argument("--kind", choices=["plain", "tp"])
    fit.add_argument("--frames")
    fit.add_argument("--s-max", dest="s_max", type=int)
    _hp_flags(fit)

    ev = sub.add_parser("eval", help="score a model against a labelled stream")
    ev.add_argument("--input")
    ev.add_argument("--model")
    ev.add_argument("--output")
    ev.add_argument("--frames")
    ev.add_argument("--kind", choices=["plain", "tp"])
    ev.add_argument("--lambda-sweep", dest="lambda_sweep")
    ev.add_argument("--silhouette-sample", dest="silhouette_sample", type=int)
    ev.add_argument("--seed", type=int)
    ev.add_argument("--workers", type=int)
    _hp_flags(ev)

    plan = sub.add_parser("plan", help="plan and track an autonomous continuation")
    plan.add_argument("--model")
    plan.add_argument("--x0", help="comma-separated initial observation")
    plan.add_argument("--horizon", type=int)
    plan.add_argument("--s-max", dest="s_max", type=int)
    plan.add_argument("--output")
    _control_flags(plan)

    shared = sub.add_parser("shared", help="correct an operator trajectory with the model")
    shared.add_argument("--model")
    shared.add_argument("--input", help="operator trajectory stream")
    shared.add_argument("--output")
    shared.add_argument("--kappa2", type=float)
    _control_flags(shared)

    combine = sub.add_parser("combine-frames", help="re-target a frame-based model to new frames")
    combine.add_argument("--model")
    combine.add_argument("--frames")
    combine.add_argument("--output")
    return parser


_GENERATOR_FLAGS = ("protocol", "D", "K", "T")


def _overrides(args: argparse.Namespace) -> dict:
    values = {k: v for k, v in vars(args).items() if k != "config"}
    generator = {k: values.pop(k) for k in _GENERATOR_FLAGS if k in values}
    generator = {k: v for k, v in generator.items() if v is not None}
    if generator:
        values["generator"] = generator
    return values


def run(argv: Sequence[str] | None = None) -> dict:
    args = build_parser().parse_args(argv)
    overrides = _overrides(args)
    validate_startup_env()
    config = load_run_config(args.config, overrides)
    return dispatch(config)


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    level_name = os.getenv("SOSC_LOG_LEVEL", "INFO").strip().upper() or "INFO"
    configure_json_logging(service="sosc", level=getattr(logging, level_name, logging.INFO))
    metrics.reset()

    try:
        with metrics.timed("command_ms"):
            result = run(argv)
    except Exception as exc:
        code, message = classify_error(exc)
        logger.error(
            "command_failed",
            extra={"error_code": code, "error_detail": f"{exc.__class__.__name__}: {exc}"},
        )
        print(f"error [{code}]: {message}", file=sys.stderr)
        return exit_code_for(code)

    print(json.dumps(result, indent=2, default=str))
    return EXIT_OK
