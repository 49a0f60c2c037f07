"""Batch front end emitting the library's tables and curves as CSV.

Every command writes one CSV document: a comment line recording the full
numeric policy, a header row, data rows, and for threshold commands a
trailing comment with the detected crossing.  Output is deterministic:
the same configuration produces byte-identical bytes, so downstream
plotting and regression diffs can rely on it.

Exit codes: 0 clean, 2 when divergence or validity warnings were raised
along the way (rows are still emitted), 1 when nothing could be computed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import dataclass

from brightghz.nonclassicality import (
    eta_threshold,
    evaluate_mermin,
    evaluate_w2,
    find_crossing,
    mermin_lhs,
    witness_w1,
)
from brightghz.state import (
    BrightStateSpec,
    NumericPolicy,
    ResummationError,
    photon_distribution,
)

EXIT_OK = 0
EXIT_HARD = 1
EXIT_WARNINGS = 2

BITS_ENV = "BRIGHTGHZ_BITS"

TABLE_MAX_K = 10
CLASSICAL_BOUND = 2.0


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved CLI invocation."""

    command: str
    gamma_min: float
    gamma_max: float
    steps: int
    n: int
    cutoff: int | None
    pade_order: int
    tol: float
    bits: int
    eta_min: float
    eta_max: float
    projected: bool
    out: str | None

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.steps > 1 and not self.gamma_min < self.gamma_max:
            raise ValueError("gamma grid needs gamma-min < gamma-max")
        if self.gamma_min < 0:
            raise ValueError("gains must be >= 0")
        if not 0.0 <= self.eta_min < self.eta_max <= 1.0:
            raise ValueError("eta window must satisfy 0 <= min < max <= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.tol <= 0 or self.bits < 64 or self.pade_order < 2:
            raise ValueError("policy out of range: tol > 0, bits >= 64, order >= 2")

    @property
    def policy(self) -> NumericPolicy:
        return NumericPolicy(
            pade_order=self.pade_order, tol=self.tol, bits=self.bits, cutoff=self.cutoff
        )

    def grid(self) -> list[float]:
        if self.steps == 1:
            return [self.gamma_min]
        span = self.gamma_max - self.gamma_min
        return [
            self.gamma_min + span * i / (self.steps - 1) for i in range(self.steps)
        ]


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.17g}"


class _Emitter:
    """Collects CSV lines so a run is written (and hashed) atomically."""

    def __init__(self, config: RunConfig):
        self.lines: list[str] = []
        policy = config.policy
        self.comment(
            "policy: "
            f"pade_order={policy.pade_order} tol={_fmt(policy.tol)} "
            f"bits={policy.bits} cutoff={'auto' if policy.cutoff is None else policy.cutoff} "
            f"n={config.n} projected={str(config.projected).lower()}"
        )

    def comment(self, text: str) -> None:
        self.lines.append(f"# {text}")

    def row(self, cells) -> None:
        self.lines.append(",".join(str(c) for c in cells))

    def write(self, out: str | None) -> None:
        payload = "\n".join(self.lines) + "\n"
        if out is None or out == "-":
            sys.stdout.write(payload)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(payload)


def _echo(config: RunConfig, text: str) -> None:
    # threshold lines live in the CSV; echo them to the terminal only when
    # the CSV itself went to a file, so piped output stays parseable
    if config.out not in (None, "-"):
        print(text)


def cmd_table1(config: RunConfig) -> int:
    """Emission probabilities p(0..10) at one gain for one, two, three beams."""
    gamma = config.gamma_min
    emitter = _Emitter(config)
    emitter.comment(f"emission probabilities at gamma={_fmt(gamma)}")
    distributions = []
    warned = False
    for n in (1, 2, 3):
        spec = BrightStateSpec(
            n=n,
            gamma=gamma,
            cutoff=config.cutoff,
            pade_order=config.pade_order,
            tol=config.tol,
            bits=config.bits,
        )
        warned |= spec.validity_warning
        dist = photon_distribution(spec)
        warned |= dist.diverged
        distributions.append(dist)
    emitter.row(["k", "p_n1", "p_n2", "p_n3"])
    for k in range(TABLE_MAX_K + 1):
        cells = [k]
        for dist in distributions:
            cells.append(_fmt(dist.probs[k] if k < len(dist.probs) else 0.0))
        emitter.row(cells)
    emitter.write(config.out)
    return EXIT_WARNINGS if warned else EXIT_OK


def cmd_pk_curve(config: RunConfig) -> int:
    """p(0..10) and the tail estimate against the gain, for n beams."""
    emitter = _Emitter(config)
    emitter.row(
        ["gamma", *(f"p{k}" for k in range(TABLE_MAX_K + 1)), "tail", "diverged"]
    )
    warned = False
    failures = 0
    for gamma in config.grid():
        spec = BrightStateSpec(
            n=config.n,
            gamma=gamma,
            cutoff=config.cutoff,
            pade_order=config.pade_order,
            tol=config.tol,
            bits=config.bits,
        )
        warned |= spec.validity_warning
        try:
            dist = photon_distribution(spec)
        except (ResummationError, ValueError):
            failures += 1
            emitter.row(
                [_fmt(gamma), *(["nan"] * (TABLE_MAX_K + 1)), "nan", "error"]
            )
            continue
        warned |= dist.diverged
        probs = [
            _fmt(dist.probs[k] if k < len(dist.probs) else 0.0)
            for k in range(TABLE_MAX_K + 1)
        ]
        emitter.row(
            [_fmt(gamma), *probs, _fmt(dist.tail_bound), str(dist.diverged).lower()]
        )
    emitter.write(config.out)
    if failures == config.steps:
        return EXIT_HARD
    return EXIT_WARNINGS if warned or failures else EXIT_OK


def _sweep_command(config: RunConfig, evaluate, columns, threshold_hunter) -> int:
    """Shared skeleton: evaluate per grid point, bracket a threshold, emit."""
    emitter = _Emitter(config)
    emitter.row(["gamma", *columns])
    points = []
    failures = 0
    warned = False
    for gamma in config.grid():
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                cells, value = evaluate(gamma)
            warned |= bool(caught)
        except (ResummationError, ValueError, RuntimeError):
            failures += 1
            emitter.row([_fmt(gamma), *(["nan"] * len(columns))])
            points.append((gamma, None))
            continue
        emitter.row([_fmt(gamma), *cells])
        points.append((gamma, value))
    line = None if failures == config.steps else threshold_hunter(points)
    if line:
        emitter.comment(line)
    emitter.write(config.out)
    if line:
        _echo(config, line)
    if failures == config.steps:
        return EXIT_HARD
    return EXIT_WARNINGS if warned or failures else EXIT_OK


def cmd_mermin(config: RunConfig) -> int:
    """Mermin-like LHS against the gain, with the violation threshold."""

    def evaluate(gamma):
        e = evaluate_mermin(gamma, config.policy, cutoff=config.cutoff)
        return [_fmt(e.lhs), _fmt(e.agreement)], e.lhs

    def hunt(points):
        for (ga, va), (gb, vb) in zip(points, points[1:]):
            if va is None or vb is None:
                continue
            if va > CLASSICAL_BOUND >= vb:
                crossing = find_crossing(
                    lambda g: mermin_lhs(g, config.policy, cutoff=config.cutoff),
                    CLASSICAL_BOUND,
                    ga,
                    gb,
                )
                return f"threshold gamma = {_fmt(crossing)}"
        return "threshold gamma = none (no crossing on this grid)"

    return _sweep_command(config, evaluate, ["lhs", "agreement"], hunt)


def cmd_eta(config: RunConfig) -> int:
    """Critical detector efficiency against the gain."""

    def evaluate(gamma):
        try:
            value = eta_threshold(gamma, config.policy, cutoff=config.cutoff)
        except ValueError:
            return [_fmt(float("nan")), "false"], None
        if not config.eta_min <= value <= config.eta_max:
            return [_fmt(float("nan")), "false"], None
        return [_fmt(value), "true"], value

    def hunt(points):
        for gamma, value in points:
            if value is not None:
                return f"eta threshold at gamma = {_fmt(gamma)}: {_fmt(value)}"
        return "eta threshold = none (no violated point on this grid)"

    return _sweep_command(config, evaluate, ["eta_tr", "violated"], hunt)


def cmd_w1(config: RunConfig) -> int:
    """First witness against the gain, optionally vacuum-projected."""

    def evaluate(gamma):
        value = witness_w1(
            gamma, projected=config.projected, policy=config.policy,
            cutoff=config.cutoff,
        )
        return [_fmt(value)], value

    return _sweep_command(config, evaluate, ["w1"], lambda points: None)


def cmd_w2(config: RunConfig) -> int:
    """Second witness against the gain, optionally vacuum-projected."""

    def evaluate(gamma):
        e = evaluate_w2(
            gamma, projected=config.projected, policy=config.policy,
            cutoff=config.cutoff,
        )
        return [_fmt(e.value), _fmt(e.agreement)], e.value

    return _sweep_command(config, evaluate, ["w2", "agreement"], lambda points: None)


_COMMANDS = {
    "table1": cmd_table1,
    "pk_curve": cmd_pk_curve,
    "mermin": cmd_mermin,
    "eta": cmd_eta,
    "w1": cmd_w1,
    "w2": cmd_w2,
}

_SWEEP_DEFAULTS = {"gamma_min": 0.05, "gamma_max": 0.85, "steps": 17}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brightghz",
        description=(
            "Photon statistics and non-classicality curves of bright "
            "three-beam GHZ states, as deterministic CSV."
        ),
    )
    parser.add_argument("--cmd", required=True, choices=sorted(_COMMANDS))
    parser.add_argument(
        "--gamma-min",
        type=float,
        default=None,
        help="grid start; for table1, the single gain (default 0.8)",
    )
    parser.add_argument("--gamma-max", type=float, default=None, help="grid end")
    parser.add_argument(
        "--steps", type=int, default=None, help="grid points (default 17)"
    )
    parser.add_argument("--n", type=int, default=3, help="beam count for pk_curve")
    parser.add_argument(
        "--cutoff",
        type=int,
        default=None,
        help="pin the photon cutoff instead of growing it adaptively",
    )
    parser.add_argument("--pade-order", type=int, default=40)
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument(
        "--bits",
        type=int,
        default=None,
        help=f"working precision; defaults to ${BITS_ENV} or 256",
    )
    parser.add_argument("--eta-min", type=float, default=0.0)
    parser.add_argument("--eta-max", type=float, default=1.0)
    parser.add_argument("--projected", action="store_true",
                        help="remove the joint vacuum before the witnesses")
    parser.add_argument("--out", default=None, help="CSV path; default stdout")
    return parser


def parse_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.bits is None:
        env = os.environ.get(BITS_ENV, "")
        args.bits = int(env) if env else 256
    if args.cmd == "table1":
        gamma_min = 0.8 if args.gamma_min is None else args.gamma_min
        gamma_max, steps = gamma_min, 1
    else:
        gamma_min = (
            _SWEEP_DEFAULTS["gamma_min"] if args.gamma_min is None else args.gamma_min
        )
        gamma_max = (
            _SWEEP_DEFAULTS["gamma_max"] if args.gamma_max is None else args.gamma_max
        )
        steps = _SWEEP_DEFAULTS["steps"] if args.steps is None else args.steps
    return RunConfig(
        command=args.cmd,
        gamma_min=gamma_min,
        gamma_max=gamma_max,
        steps=steps,
        n=args.n,
        cutoff=args.cutoff,
        pade_order=args.pade_order,
        tol=args.tol,
        bits=args.bits,
        eta_min=args.eta_min,
        eta_max=args.eta_max,
        projected=args.projected,
        out=args.out,
    )


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_HARD
    try:
        return _COMMANDS[config.command](config)
    except Exception as err:  # noqa: BLE001 - the contract is an exit code
        print(f"error: {err}", file=sys.stderr)
        return EXIT_HARD


if __name__ == "__main__":
    sys.exit(main())
