"""
Command-line driver: parse a game, solve or verify, emit a result document.

Modes:
    solve2p    perturbed LCP by Lemke, symbolic profile plus limit
    solve-zs   zero-sum LP by exact simplex, additionally the ε-value
    solve-n    n-player fixed-point search, exact profile plus δ-almost report
    verify     check a supplied profile against a game

Exit codes: 0 when every check passes, 2 on a verification failure, 1 on errors.
"""
import argparse
import sys
import uuid
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import get_settings, parse_rational_list
from equilibrium.extraction import LCP, LP, SymbolicEquilibrium, extract_behavior
from equilibrium.verification import (
    EPS_QUASI_PROPER,
    VerificationReport,
    largest_passing_eps,
    verify_delta_almost,
    verify_eps_quasi_proper,
    verify_symbolic,
)
from errors import NotFullyMixed, ParameterOutOfRange, QpeError, UsageError
from games.qpef import ResultDocument, emit_result, load_game, parse_profile
from games.tree import GameTree
from multiplayer.fixp import IterationConfig, check_parameters, fixed_point_search, schedule_eps_delta
from solvers.two_player import simplex_zero_sum, solve_two_player
from utils.logger import get_logger, get_run_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2

MODES = ("solve2p", "solve-zs", "solve-n", "verify")
DEFAULT_VERIFY_EPS = Fraction(1, 100)


class RunConfig(BaseModel):
    """Validated flags of one invocation."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mode: Literal["solve2p", "solve-zs", "solve-n", "verify"]
    game: Path
    eps: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    gamma: Optional[Fraction] = None
    squarings: Tuple[int, int] = (0, 0)
    check_eps: List[Fraction]
    facet_threshold: int = Field(ge=0)
    iteration: IterationConfig
    out: Optional[Path] = None
    profile: Optional[Path] = None

    @model_validator(mode="after")
    def check_mode_parameters(self) -> "RunConfig":
        for name in ("eps", "delta", "gamma"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"--{name} must be positive")
        if any(e <= 0 or e >= 1 for e in self.check_eps):
            raise ValueError("--check-eps samples must lie in (0, 1)")
        if self.mode == "verify" and self.profile is None:
            raise ValueError("verify mode needs --profile")
        if self.mode == "solve-n":
            if self.gamma is None and (self.eps is None or self.delta is None):
                raise ValueError("solve-n needs --gamma or both --eps and --delta")
            if self.eps is not None and self.eps >= 1:
                raise ValueError("--eps must lie in (0, 1)")
            if self.gamma is not None and self.gamma > 1:
                raise ValueError("--gamma must lie in (0, 1]")
        if min(self.squarings) < 0:
            raise ValueError("--squarings counts must be nonnegative")
        return self


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _squarings(text: str) -> Tuple[int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise argparse.ArgumentTypeError(f"expected N,N: {text!r}")
    return int(parts[0]), int(parts[1])


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="qpe_solve",
        description="Compute and verify quasi-proper equilibria of extensive-form games",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --game corpus/matching_pennies.qpef --mode solve-zs
  %(prog)s --game corpus/myerson_3x3.qpef --mode solve2p --check-eps 1/100,1/10000
  %(prog)s --game corpus/three_player_dominant.qpef --mode solve-n --eps 1/20 --delta 1/10000
  %(prog)s --game corpus/one_shot_3_1.qpef --mode verify --profile corpus/uniform_3_1.profile
        """
    )
    parser.add_argument('--game', required=True, help='Game file (.qpef)')
    parser.add_argument('--mode', required=True, choices=MODES, help='What to do with the game')
    parser.add_argument('--eps', type=_rational, help='ε (solve-n) or ε₀ (verify)')
    parser.add_argument('--delta', type=_rational, help='δ for the δ-almost conditions')
    parser.add_argument('--gamma', type=_rational, help='γ for the ε/δ schedule (solve-n)')
    parser.add_argument('--squarings', type=_squarings, default=(0, 0),
                        help='Squaring counts q1,q2 of the ε/δ schedule')
    parser.add_argument('--check-eps', help='Comma separated verification samples ε₀')
    parser.add_argument('--facet-threshold', type=int, help='Largest m using the facet system')
    parser.add_argument('--max-iters', type=int, help='Fixed-point iterations per start')
    parser.add_argument('--damping', type=float, help='Damping λ of the fixed-point iteration')
    parser.add_argument('--restarts', type=int, help='Random restarts of the fixed-point search')
    parser.add_argument('--seed', type=int, help='Seed for the restart starts')
    parser.add_argument('--out', help='Write the result document here instead of stdout')
    parser.add_argument('--profile', help='Profile file to check (verify mode)')
    parser.add_argument('--log-level', help='Log level for stderr logging')
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Flags over settings defaults.

    Raises:
        UsageError: the flags do not form a valid run.
    """
    settings = get_settings()
    try:
        check_eps = parse_rational_list(args.check_eps) if args.check_eps else settings.check_eps_values
        iteration = IterationConfig.from_settings(
            damping=args.damping, max_iters=args.max_iters, restarts=args.restarts, seed=args.seed,
        )
        return RunConfig(
            mode=args.mode,
            game=Path(args.game),
            eps=args.eps,
            delta=args.delta,
            gamma=args.gamma,
            squarings=args.squarings,
            check_eps=check_eps,
            facet_threshold=(settings.facet_threshold if args.facet_threshold is None
                             else args.facet_threshold),
            iteration=iteration,
            out=Path(args.out) if args.out else None,
            profile=Path(args.profile) if args.profile else None,
        )
    except ValidationError as exc:
        messages = "; ".join(err["msg"] for err in exc.errors())
        raise UsageError(messages) from exc
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from exc


# ----------------------------------------------------------------------
# Modes
# ----------------------------------------------------------------------

def _symbolic_document(mode: str, game: GameTree, symbolic: SymbolicEquilibrium,
                       samples: Sequence[Fraction]
                       ) -> Tuple[ResultDocument, Dict[str, VerificationReport]]:
    reports = verify_symbolic(game, symbolic, samples, factor=2)
    largest = largest_passing_eps(game, symbolic, samples, factor=2)
    doc = ResultDocument(
        mode=mode,
        behavior=symbolic.behavior,
        limit=symbolic.limit,
        value=symbolic.value,
        checks={label: report.as_fields() for label, report in reports.items()},
        extras={"verify.largest_passing_eps": str(largest) if largest is not None else "none"},
    )
    return doc, reports


def run_solve2p(config: RunConfig, game: GameTree):
    solution = solve_two_player(game, threshold=config.facet_threshold)
    symbolic = extract_behavior(game, solution.plans, LCP)
    logger.info("lcp statistics", pivots=solution.result.pivots, lcp_size=solution.lcp.size)
    return _symbolic_document(config.mode, game, symbolic, config.check_eps)


def run_solve_zs(config: RunConfig, game: GameTree):
    solution = simplex_zero_sum(game, threshold=config.facet_threshold)
    symbolic = extract_behavior(game, solution.plans, LP, value=solution.value)
    logger.info("lp statistics", pivots=solution.result.stats.pivots)
    return _symbolic_document(config.mode, game, symbolic, config.check_eps)


def run_solve_n(config: RunConfig, game: GameTree):
    if config.gamma is not None:
        eps, delta = schedule_eps_delta(config.gamma, *config.squarings)
    else:
        eps, delta = config.eps, config.delta
    try:
        check_parameters(game, eps, delta)
    except ParameterOutOfRange as exc:
        raise UsageError(str(exc)) from exc
    result = fixed_point_search(game, eps, delta, config.iteration)
    extras = {
        "search.eps": str(eps),
        "search.delta": str(delta),
        "search.residual": repr(result.residual),
        "search.iterations": str(result.iterations),
        "search.converged": "true" if result.converged else "false",
    }
    for h, local in result.profile.strategies.items():
        for a, prob in local.items():
            extras[f"profile.{h}.{a}"] = str(prob)
    doc = ResultDocument(mode=config.mode, checks={"delta": result.report.as_fields()}, extras=extras)
    return doc, {"delta": result.report}


def run_verify(config: RunConfig, game: GameTree):
    profile = parse_profile(config.profile.read_text(encoding="utf-8"), game)
    eps0 = config.eps if config.eps is not None else DEFAULT_VERIFY_EPS
    reports: Dict[str, VerificationReport] = {}
    try:
        reports[f"eps.{eps0}"] = verify_eps_quasi_proper(game, profile, eps0)
        if config.delta is not None:
            reports["delta"] = verify_delta_almost(game, profile, eps0, config.delta)
    except NotFullyMixed as exc:
        reports[f"eps.{eps0}"] = VerificationReport(EPS_QUASI_PROPER, eps=eps0, error=str(exc))
    doc = ResultDocument(mode=config.mode,
                         checks={label: report.as_fields() for label, report in reports.items()})
    return doc, reports


_HANDLERS = {
    "solve2p": run_solve2p,
    "solve-zs": run_solve_zs,
    "solve-n": run_solve_n,
    "verify": run_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one invocation and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"qpe_solve: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)

    settings = get_settings()
    if args.log_level:
        settings = settings.model_copy(update={"log_level": args.log_level})
    setup_logging(settings)
    run_logger = get_run_logger(args.mode, uuid.uuid4().hex[:8])

    try:
        config = build_config(args)
        run_logger.info("run started", game=str(config.game), mode=config.mode)
        game = load_game(config.game)
        doc, reports = _HANDLERS[config.mode](config, game)
    except QpeError as exc:
        run_logger.error("run failed", error=type(exc).__name__, message=str(exc))
        print(f"qpe_solve: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        run_logger.error("run failed", error=type(exc).__name__, message=str(exc))
        print(f"qpe_solve: {exc}", file=sys.stderr)
        return EXIT_ERROR

    text = emit_result(doc)
    if config.out is not None:
        config.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    passed = all(report.passed for report in reports.values())
    failed = [label for label, report in reports.items() if not report.passed]
    run_logger.info("run finished", passed=passed, failed_checks=failed)
    return EXIT_OK if passed else EXIT_FAILED
