"""Command-line interface.

Exit codes: 0 on success, 1 on invalid input (the diagnostic names the
violated invariant), 2 when a size guard refuses the computation.  Results
go to ``--out`` or standard output; diagnostics go to standard error.  Each
CSV written with ``--out`` gets a ``<out>.run.json`` sidecar holding the
full run configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field

from . import files
from .capacity import Capacity
from .convexity import helly_number, is_binary, is_T2, is_T4
from .equilibrium import grid_search, refinement_study, reports_from
from .errors import ResourceLimitError, ValidationError
from .games import choquet_payoff, pure_nash, sugeno_payoff
from .integrals import PSI_MAPS, choquet, get_psi, sugeno_classic, sugeno_psi
from .laws import SUITES, run_suite
from .monad import tensor_n

COMMANDS = ("integrate", "tensor", "payoff", "nash", "laws", "convexity", "refine")
CONVEXITY_PROPS = ("t2", "t4", "binary", "helly")


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    psi: str = "logit"
    grid_k: list = field(default_factory=lambda: [4])
    epsilon: str = "0"
    seed: int = 0
    trials: int = 0
    out: str | None = None
    workers: int = 1
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        get_psi(self.psi)
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if any(k < 1 for k in self.grid_k):
            raise UsageError("--grid-k values must be positive integers")
        if self.trials < 0:
            raise UsageError("--trials must be nonnegative")
        if self.epsilon != "min":
            try:
                eps = float(self.epsilon)
            except ValueError:
                raise UsageError(f"--epsilon must be a number or 'min', got {self.epsilon!r}")
            if not eps >= 0:
                raise UsageError("--epsilon must be nonnegative")


def _k_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers separated by commas, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--psi", default="logit", choices=sorted(PSI_MAPS))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", default=None, help="output path (CSV, or JSON for tensor)")
    common.add_argument("--format", dest="fmt", choices=("csv", "table"), default="csv",
                        help="rendering on standard output when --out is not given")
    common.add_argument("--snap", type=int, default=None, metavar="K",
                        help="round capacity values read from files to multiples of 1/K")

    parser = _Parser(prog="capgame", description="Games in capacities with Sugeno and Choquet payoffs.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("integrate", parents=[common], help="integrate a function against a capacity")
    p.add_argument("--capacity", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--kind", choices=("choquet", "sugeno", "sugeno-psi"), default="sugeno-psi")

    p = sub.add_parser("tensor", parents=[common], help="tensor product of capacities")
    p.add_argument("--capacity", action="append", required=True, help="repeat once per factor")

    p = sub.add_parser("payoff", parents=[common], help="expected payoffs of a capacity profile")
    p.add_argument("--game", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--kind", choices=("sugeno", "choquet"), default="sugeno")

    p = sub.add_parser("nash", parents=[common], help="pure or grid epsilon-Nash search")
    p.add_argument("--game", required=True)
    p.add_argument("--mode", choices=("pure", "grid"), default="pure")
    p.add_argument("--grid-k", type=_k_list, default=[4])
    p.add_argument("--epsilon", default="0", help="a number, or 'min' for the smallest attained")

    p = sub.add_parser("laws", parents=[common], help="run a monad / tensor law suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--grid-k", type=_k_list, default=[4])

    p = sub.add_parser("convexity", help="finite convexity checks")
    csub = p.add_subparsers(dest="action", parser_class=_Parser, required=True)
    c = csub.add_parser("check", parents=[common])
    c.add_argument("--file", required=True)
    c.add_argument("--props", default=",".join(CONVEXITY_PROPS))

    p = sub.add_parser("refine", parents=[common], help="minimal grid epsilon for several k")
    p.add_argument("--game", required=True)
    p.add_argument("--grid-k", type=_k_list, default=[2, 4, 8])
    p.add_argument("--timing", action="store_true", help="add a wall_time column (not reproducible)")
    return parser


def _config(args) -> RunConfig:
    inputs = {
        key: getattr(args, key)
        for key in ("capacity", "function", "game", "profile", "file")
        if getattr(args, key, None) is not None
    }
    options = {
        key: getattr(args, key)
        for key in ("kind", "mode", "suite", "props", "timing", "snap", "fmt", "action")
        if getattr(args, key, None) is not None
    }
    return RunConfig(
        command=args.command,
        inputs=inputs,
        psi=args.psi,
        grid_k=list(getattr(args, "grid_k", [4])),
        epsilon=str(getattr(args, "epsilon", "0")),
        seed=args.seed,
        trials=getattr(args, "trials", 0),
        out=args.out,
        workers=args.workers,
        options=options,
    )


def _render_table(header, rows) -> str:
    cells = [list(header)] + [[files.fmt(x) for x in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


def _emit(cfg: RunConfig, header, rows, stdout) -> None:
    rows = list(rows)
    if cfg.out is not None:
        files.emit_csv(header, rows, cfg.out)
        files.write_json(asdict(cfg), cfg.out + ".run.json")
        print(f"wrote {len(rows)} rows to {cfg.out}", file=sys.stderr)
    elif cfg.options.get("fmt") == "table":
        stdout.write(_render_table(header, rows))
    else:
        stdout.write(files.render_csv(header, rows))


def _cap_cell(c: Capacity) -> str:
    return " ".join(files.fmt(v) for v in c.values)


def cmd_integrate(args, cfg, stdout):
    c = files.load_capacity(args.capacity, args.snap)
    f = files.load_function(args.function, c.ground)
    if args.kind == "choquet":
        value = choquet(c, f)
    elif args.kind == "sugeno":
        value = sugeno_classic(c, f)
    else:
        value = sugeno_psi(c, f, cfg.psi)
    if cfg.out is not None:
        _emit(cfg, ["kind", "psi", "value"], [[args.kind, cfg.psi, value]], stdout)
    else:
        stdout.write(files.fmt(value) + "\n")


def cmd_tensor(args, cfg, stdout):
    caps = [files.load_capacity(p, args.snap) for p in args.capacity]
    obj = files.capacity_to_obj(tensor_n(caps))
    if cfg.out is not None:
        files.write_json(obj, cfg.out)
        files.write_json(asdict(cfg), cfg.out + ".run.json")
    else:
        stdout.write(json.dumps(obj, indent=1) + "\n")


def cmd_payoff(args, cfg, stdout):
    game = files.load_game(args.game)
    profile = files.load_profile(args.profile, args.snap)
    fn = sugeno_payoff if args.kind == "sugeno" else choquet_payoff
    rows = [[i + 1, args.kind, cfg.psi if args.kind == "sugeno" else "", fn(game, i, profile, cfg.psi)]
            for i in range(game.n_players)]
    _emit(cfg, ["player", "kind", "psi", "payoff"], rows, stdout)


def cmd_nash(args, cfg, stdout):
    game = files.load_game(args.game)
    n = game.n_players
    if args.mode == "pure":
        header = [f"s_{i + 1}" for i in range(n)] + [f"f_{i + 1}" for i in range(n)]
        rows = []
        for x in pure_nash(game):
            labels = [files.fmt(g.labels[j]) for g, j in zip(game.strategy_sets, x)]
            rows.append(labels + [float(p[x]) for p in game.payoffs])
        _emit(cfg, header, rows, stdout)
        return
    header = (["k"] + [f"idx_{i + 1}" for i in range(n)] + [f"cap_{i + 1}" for i in range(n)]
              + [f"sf_{i + 1}" for i in range(n)] + ["epsilon"])
    rows = []
    for k in cfg.grid_k:
        search = grid_search(game, k, cfg.psi, cfg.workers)
        eps = search.min_epsilon if cfg.epsilon == "min" else float(cfg.epsilon)
        print(f"k={k}: minimal epsilon {files.fmt(search.min_epsilon)}", file=sys.stderr)
        for r in reports_from(search, eps):
            rows.append([k, *r.indices, *(_cap_cell(c) for c in r.capacities), *r.payoffs, r.epsilon])
    _emit(cfg, header, rows, stdout)


def cmd_laws(args, cfg, stdout):
    results = run_suite(args.suite, args.trials, cfg.seed, cfg.grid_k[0], cfg.psi, cfg.workers)
    rows = [[r.instance, r.law, r.deviation, r.passed] for r in results]
    _emit(cfg, ["instance_id", "law", "max_abs_deviation", "pass"], rows, stdout)
    failed = [r for r in results if not r.passed]
    for r in failed[:5]:
        print(f"law {r.law} failed on instance {r.instance}: {r.witness}", file=sys.stderr)
    return 0


def cmd_convexity(args, cfg, stdout):
    conv = files.load_convexity(args.file)
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    unknown = set(props) - set(CONVEXITY_PROPS)
    if unknown:
        raise UsageError(f"unknown properties {sorted(unknown)}; choose from {CONVEXITY_PROPS}")
    checks = {"t2": is_T2, "t4": is_T4, "binary": is_binary, "helly": helly_number}
    rows = [["valid", True]] + [[p, checks[p](conv)] for p in props]
    _emit(cfg, ["property", "value"], rows, stdout)


def cmd_refine(args, cfg, stdout):
    game = files.load_game(args.game)
    rows = refinement_study(game, cfg.grid_k, cfg.psi, cfg.workers)
    header = ["k", "min_epsilon", "minimizers"] + (["wall_time"] if args.timing else [])
    out = []
    for r in rows:
        row = [r.k, r.min_epsilon, r.minimizers]
        if args.timing:
            row.append(r.wall_time)
        out.append(row)
    _emit(cfg, header, out, stdout)


HANDLERS = {
    "integrate": cmd_integrate,
    "tensor": cmd_tensor,
    "payoff": cmd_payoff,
    "nash": cmd_nash,
    "laws": cmd_laws,
    "convexity": cmd_convexity,
    "refine": cmd_refine,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        cfg.validate()
        HANDLERS[args.command](args, cfg, stdout)
    except ResourceLimitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IoError: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
