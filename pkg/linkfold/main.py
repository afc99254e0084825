import sys
import logging
import argparse
from typing import List, Optional, Tuple

from linkfold import __version__
from linkfold.config import settings
from linkfold.errors import InputError, LinkfoldError, MalformedInput
from linkfold.logging_conf import setup_logging
from linkfold.models import RunReport
from linkfold.services.documents import (
    layout_to_doc,
    load_input,
    load_layout,
    read_json,
    write_doc,
    write_text,
)
from linkfold.services.foldgen import CounterexampleLayout, gamma_at
from linkfold.services.linkage import Configuration, Linkage
from linkfold.services.render import gadget_bars, render_svg
from linkfold.utils import file_digest, parse_floats, parse_ints, positive_int
from linkfold import worker

logger = logging.getLogger("linkfold")

EXIT_OK = 0
EXIT_CERTIFICATE = 4


def _report(args, outcome: worker.Outcome, digest: Optional[str] = None, seed: Optional[int] = None) -> RunReport:
    return RunReport(
        command=list(args.argv),
        version=__version__,
        input_digest=digest,
        rng_seed=seed,
        ok=outcome.ok,
        outputs=outcome.outputs,
        timings=outcome.timings,
    )


def cmd_check(args) -> Tuple[RunReport, int]:
    loaded = load_input(args.input)
    linkage = loaded if isinstance(loaded, Linkage) else loaded.linkage
    outcome = worker.run_check(linkage)
    return _report(args, outcome, file_digest(args.input)), EXIT_OK


def cmd_build(args) -> Tuple[RunReport, int]:
    outcome = worker.run_build(args.m, args.fold_lengths)
    doc = layout_to_doc(outcome.extra["layout"], outcome.extra["margins"])
    if args.out:
        write_doc(args.out, doc)
        outcome.outputs["layout_file"] = args.out
    else:
        outcome.outputs["layout"] = doc.model_dump(mode="json")
    return _report(args, outcome), EXIT_OK


def cmd_certify(args) -> Tuple[RunReport, int]:
    layout = load_layout(args.layout)
    seed = settings.SEED if args.seed is None else args.seed
    outcome = worker.run_certify(
        layout,
        samples=args.samples or settings.SAMPLES,
        grid=args.grid or [settings.GRID],
        seed=seed,
        trials=args.trials,
        delta=args.delta,
    )
    report = _report(args, outcome, file_digest(args.layout), seed)
    return report, EXIT_OK if outcome.ok else EXIT_CERTIFICATE


def cmd_betti(args) -> Tuple[RunReport, int]:
    layout = load_layout(args.layout)
    outcome = worker.run_betti(
        layout,
        mode=args.mode,
        points=args.samples or settings.BETTI_POINTS,
        grid=args.grid or [settings.GRID],
        max_dim=args.max_dim,
        budget=args.budget,
        max_diameter=args.max_diameter,
        skip_over_budget=args.skip_over_budget,
        spacing=args.spacing or settings.BETTI_SPACING,
    )
    if args.filtration_out:
        write_text(args.filtration_out, outcome.extra["filtration"].to_text())
    return _report(args, outcome, file_digest(args.layout)), EXIT_OK


def _render_target(loaded, args) -> Tuple[Configuration, set]:
    if isinstance(loaded, Configuration):
        return loaded, set()
    if not isinstance(loaded, CounterexampleLayout):
        raise MalformedInput("render needs a layout or a configuration")
    if args.point is not None:
        ts = list(args.point)
    else:
        ts = [args.t] * loaded.m
    return gamma_at(loaded, ts), gadget_bars(g.edge_indices for g in loaded.gadgets)


def cmd_render(args) -> Tuple[RunReport, int]:
    loaded = load_input(args.input)
    config, highlight = _render_target(loaded, args)
    svg = render_svg(config, highlight)
    write_text(args.out, svg)
    outcome = worker.Outcome(outputs={"svg": args.out, "n": config.n})
    return _report(args, outcome, file_digest(args.input)), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkfold",
        description="Triple-fold counterexample linkages and their topological certificates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--config", default=None, help="JSON file overriding settings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="realizability and triple-fold admissibility")
    p.add_argument("input", help="linkage, configuration or layout JSON")
    p.add_argument("--out", dest="report_out", default=None)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("build", help="construct the m-gadget counterexample layout")
    p.add_argument("--m", type=positive_int, default=1)
    p.add_argument("--fold-lengths", type=parse_floats, default=None, help="l_a,l_b,l_c")
    p.add_argument("--out", default=None, help="layout JSON to write")
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("certify", help="degree, profile and closure certificates")
    p.add_argument("layout")
    p.add_argument("--samples", type=positive_int, default=None, help=f"samples per loop (default {settings.SAMPLES})")
    p.add_argument("--grid", type=parse_ints, default=None, help="grid counts, e.g. 16 or 16,16")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=positive_int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--out", dest="report_out", default=None, help="certificate report JSON (no timings)")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("betti", help="Vietoris-Rips Betti numbers of the sampled loop or torus")
    p.add_argument("layout")
    p.add_argument("--mode", choices=("loop", "torus"), default="loop")
    p.add_argument("--samples", type=positive_int, default=None, help="points on the loop")
    p.add_argument("--grid", type=parse_ints, default=None, help="torus grid counts")
    p.add_argument("--spacing", choices=("arc", "uniform"), default=None, help="sample spacing along each loop")
    p.add_argument("--max-dim", type=int, default=1, help="highest homology dimension")
    p.add_argument("--max-diameter", type=float, default=None)
    p.add_argument("--budget", type=positive_int, default=None)
    p.add_argument("--skip-over-budget", action="store_true")
    p.add_argument("--filtration-out", default=None, help="plain-text filtration export")
    p.add_argument("--out", dest="report_out", default=None, help="diagram report JSON (no timings)")
    p.set_defaults(handler=cmd_betti)

    p = sub.add_parser("render", help="SVG of a configuration or of gamma at a torus point")
    p.add_argument("input", help="layout or configuration JSON")
    p.add_argument("--t", type=float, default=0.0, help="loop parameter for every gadget")
    p.add_argument("--point", type=parse_floats, default=None, help="t_1,...,t_m")
    p.add_argument("--out", required=True, help="SVG file to write")
    p.set_defaults(handler=cmd_render)

    return parser


def _apply_config(path: Optional[str]) -> None:
    if not path:
        return
    read_json(path)
    try:
        settings.load_overrides(path)
    except KeyError as e:
        raise MalformedInput(f"{path}: {e.args[0]}")


def _failed(e: LinkfoldError) -> int:
    logger.error(f"{type(e).__name__}: {e}")
    print(f"error: {e}", file=sys.stderr)
    return e.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else InputError.exit_code
    args.argv = argv

    try:
        _apply_config(args.config)
    except LinkfoldError as e:
        setup_logging(args.log_level)
        return _failed(e)

    # after the overrides, so LOG_* keys in --config take effect
    setup_logging(args.log_level)
    try:
        report, code = args.handler(args)
    except LinkfoldError as e:
        return _failed(e)

    report_out = getattr(args, "report_out", None)
    if report_out:
        write_text(report_out, report.stable_json() + "\n")
    print(report.model_dump_json(indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
