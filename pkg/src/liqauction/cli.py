"""Command-line front end.

Exit status: 0 on success, 1 when an invariant violation was detected,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .harness import GeneratorSpec, audit_truthfulness, generate_instance, outcome_violations
from .model import Agent, DomainError, Instance, InstanceFormatError, dumps_instance, load_instance, save_instance
from .private import PrivateParams, draw_randomness, exact_expectation, run_private, run_with
from .public import PHI, pay_public
from .report import ReportRow, make_row, write_rows
from .welfare import grid_error_bound, opt_dp, opt_exact, opt_linear_greedy, revenue, welfare

log = logging.getLogger("liqauction")

RATIO_BOUND = 34.0
TOL = 1e-9


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    instance: str | None = None
    n: int = 5
    kind: str = "linear"
    k: int = 4
    seed: int = 0
    trials: int = 1
    deviation_grid: int = 60
    grid: int = 1000
    beta: float | None = None
    gamma: float | None = None
    mu: float | None = None
    eps: float = 1e-6
    mech: str = "public"
    out: str | None = None
    save: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.deviation_grid < 2:
            raise UsageError("--deviation-grid must be >= 2")
        if self.grid < 1:
            raise UsageError("--grid must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")

    @property
    def params(self) -> PrivateParams:
        d = PrivateParams()
        return PrivateParams(
            self.beta if self.beta is not None else d.beta,
            self.gamma if self.gamma is not None else d.gamma,
            self.mu if self.mu is not None else d.mu,
        )


def setup_logging() -> None:
    level = os.environ.get("LIQ_AUCTION_LOG", "off").lower()
    if level == "off":
        log.disabled = True
        return
    logging.basicConfig(level=logging.DEBUG if level == "debug" else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _instance(cfg: ExperimentConfig) -> Instance:
    if not cfg.instance:
        raise UsageError("--instance is required")
    return load_instance(cfg.instance)


def _emit(rows: list[ReportRow], cfg: ExperimentConfig) -> None:
    if cfg.out:
        write_rows(rows, cfg.out)
        log.info("wrote %d rows to %s", len(rows), cfg.out)


def _print_outcome(outcome) -> None:
    print("agent,x,p")
    for i, (x, p) in enumerate(zip(outcome.allocations, outcome.payments)):
        print(f"{i},{x!r},{p!r}")


def _checked_flags(instance: Instance, outcome) -> list[str]:
    flags = outcome_violations(instance, outcome)
    if welfare(instance, outcome) < revenue(outcome) - TOL:
        flags.append("welfare<revenue")
    return flags


def cmd_opt(cfg: ExperimentConfig) -> int:
    inst = _instance(cfg)
    res = opt_dp(inst, cfg.grid)
    print(f"opt {res.value!r}")
    print(f"method {res.method} grid {res.grid_resolution} exact {str(res.exact).lower()}")
    if not res.exact:
        print(f"grid_error_bound {grid_error_bound(inst, res.grid_resolution)!r}")
    print("allocation " + " ".join(repr(x) for x in res.allocation))
    return 0


def cmd_run_public(cfg: ExperimentConfig, inst: Instance | None = None, instance_id: str | None = None) -> int:
    inst = inst or _instance(cfg)
    start = time.perf_counter()
    outcome = pay_public(inst)
    opt = opt_linear_greedy(inst).value
    flags = _checked_flags(inst, outcome)
    if welfare(inst, outcome) < opt / PHI - TOL:
        flags.append("ratio")
    row = make_row(instance_id or cfg.instance or "-", "public", inst, outcome, opt, flags, start)
    _print_outcome(outcome)
    print(f"welfare {row.welfare!r} revenue {row.revenue!r} opt {row.opt!r} ratio {row.ratio!r}")
    _emit([row], cfg)
    return 1 if flags else 0


def cmd_run_private(cfg: ExperimentConfig) -> int:
    inst = _instance(cfg)
    start = time.perf_counter()
    outcome, rnd = run_private(inst, cfg.params, cfg.seed)
    opt = opt_exact(inst).value
    flags = _checked_flags(inst, outcome)
    row = make_row(cfg.instance, f"private-{rnd.branch}", inst, outcome, opt, flags, start)
    part = "" if rnd.partition is None else "".join("S" if s else "T" for s in rnd.partition)
    print(f"branch {rnd.branch} partition {part or '-'}")
    _print_outcome(outcome)
    print(f"welfare {row.welfare!r} revenue {row.revenue!r} opt {row.opt!r}")
    _emit([row], cfg)
    return 1 if flags else 0


def cmd_expect(cfg: ExperimentConfig) -> int:
    inst = _instance(cfg)
    start = time.perf_counter()
    ev = exact_expectation(inst, cfg.params)
    dp = opt_dp(inst, cfg.grid)
    opt = opt_exact(inst).value
    flags = [] if ev.total >= opt / RATIO_BOUND - TOL else ["ratio"]
    ms = (time.perf_counter() - start) * 1e3
    print(f"ev_mv1 {ev.ev_mv1!r}\nev_mv2 {ev.ev_mv2!r}\nev_rs {ev.ev_rs!r}\ntotal {ev.total!r}")
    print(f"opt {opt!r} opt_dp {dp.value!r} ratio {opt / ev.total if ev.total > 0 else math.inf!r}")
    row = ReportRow(cfg.instance, "private-expected", ev.total, math.nan, opt,
                    opt / ev.total if ev.total > 0 else math.inf, tuple(flags), ms)
    _emit([row], cfg)
    return 1 if flags else 0


def cmd_audit(cfg: ExperimentConfig) -> int:
    if cfg.mech not in ("public", "private"):
        raise UsageError("--mech must be 'public' or 'private'")
    kind = "linear" if cfg.mech == "public" else cfg.kind
    rows = []
    params = cfg.params
    for trial in range(cfg.trials):
        start = time.perf_counter()
        spec = GeneratorSpec(1 + trial % cfg.n, kind, cfg.k, regime=cfg.mech)
        inst = generate_instance(spec, (cfg.seed, trial))
        if cfg.mech == "public":
            outcome = pay_public(inst)
            opt = opt_linear_greedy(inst).value
            lies = audit_truthfulness(inst, "public", cfg.deviation_grid, (cfg.seed, trial))
            mech = "public"
        else:
            rnd = draw_randomness(inst.n, params, np.random.default_rng((cfg.seed, trial)))
            outcome = run_with(inst, rnd, params)
            opt = opt_exact(inst).value
            lies = audit_truthfulness(inst, "private", cfg.deviation_grid, (cfg.seed, trial),
                                      params=params, randomness=rnd)
            mech = f"private-{rnd.branch}"
        flags = _checked_flags(inst, outcome)
        if lies:
            flags.append("truthfulness")
            for v in lies[:3]:
                log.info("trial %d agent %d report %s gain %.3g", trial, v.agent, v.report, v.gain)
        rows.append(make_row(f"{trial:06d}", mech, inst, outcome, opt, flags, start))
    bad = sum(1 for r in rows if r.violations)
    print(f"trials {cfg.trials} instances_with_violations {bad}")
    _emit(rows, cfg)
    return 1 if bad else 0


def cmd_generate(cfg: ExperimentConfig) -> int:
    inst = generate_instance(GeneratorSpec(cfg.n, cfg.kind, cfg.k), cfg.seed)
    if cfg.save:
        save_instance(inst, cfg.save)
    else:
        print(dumps_instance(inst))
    return 0


def example1_instance(eps: float) -> Instance:
    """Two agents (rate 1, budget eps) and (rate 1/phi, budget 1 - eps)."""
    return Instance((Agent.linear(1.0, eps), Agent.linear(1.0 / PHI, 1.0 - eps)), "public")


def cmd_example1(cfg: ExperimentConfig) -> int:
    if not 0 < cfg.eps < 1:
        raise UsageError("--eps must lie in (0, 1)")
    inst = example1_instance(cfg.eps)
    if cfg.save:
        save_instance(inst, cfg.save)
    code = cmd_run_public(cfg, inst, f"example1-eps{cfg.eps!r}")
    print(f"phi {PHI!r}")
    return code


COMMANDS = {
    "opt": cmd_opt,
    "run-public": cmd_run_public,
    "run-private": cmd_run_private,
    "expect": cmd_expect,
    "audit": cmd_audit,
    "generate": cmd_generate,
    "example1": cmd_example1,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON file")
    common.add_argument("--seed", type=int, default=0, help="unsigned 64-bit seed")
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--grid", type=int, default=1000, help="DP grid resolution m")
    common.add_argument("--deviation-grid", type=int, default=60, help="misreport grid size")
    common.add_argument("--beta", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--mu", type=float)
    common.add_argument("--out", help="CSV report path")
    common.add_argument("--save", help="write the instance JSON here (generate, example1)")
    common.add_argument("--n", type=int, default=5, help="agents (generate) or max agents (audit)")
    common.add_argument("--kind", choices=("linear", "pwl", "mixed"), default="linear")
    common.add_argument("--k", type=int, default=4, help="interior pwl breakpoints")
    common.add_argument("--eps", type=float, default=1e-6, help="example1 budget of the first agent")
    common.add_argument("--mech", default="public", help="audit target: public | private")

    parser = argparse.ArgumentParser(prog="liqauction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    setup_logging()
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = ExperimentConfig(**{k.replace("-", "_"): v for k, v in vars(ns).items()})
        return COMMANDS[cfg.subcommand](cfg)
    except (UsageError, InstanceFormatError, DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
