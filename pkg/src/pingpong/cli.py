"""Experiment runner and report emitter.

Runs are configured either from a JSON spec file or from single-run flags,
executed (optionally in parallel), and written as JSON or CSV with a stable
schema. Every run carries its own seed; reports echo it so any row can be
replayed exactly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import attacks
from . import control as control_mode
from .protocol import KINDS, ProtocolConfig, QUBIT_SINGLET, QUDIT_CORRELATED, run_session
from .rand import MESSAGE_TAG, SCORE_TAG, stream

REPORT_FIELDS = (
    "attack",
    "control",
    "dim",
    "kind",
    "cycles",
    "control_prob",
    "trials",
    "seed",
    "status",
    "p_det_analytic",
    "p_det_empirical",
    "ci_low",
    "ci_high",
    "eve_mu_accuracy",
    "eve_nu_accuracy",
    "message_integrity",
    "n_message_cycles",
    "n_control_cycles",
    "wall_clock_s",
    "error",
)

_RUN_DEFAULTS = {"cycles": 1000, "control_prob": 0.25, "trials": 10000, "kind": "auto"}


def sig12(value: float) -> float:
    """Round to 12 significant digits, the report's numeric precision."""
    return float(f"{value:.12g}")


@dataclass(frozen=True)
class RunSpec:
    attack: str
    control: str
    dim: int
    kind: str
    cycles: int
    control_prob: float
    trials: int
    seed: int
    message: Optional[tuple[tuple[int, int], ...]] = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.cycles < 0:
            raise ValueError("cycles must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        kind = self.resolved_kind
        if kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def resolved_kind(self) -> str:
        if self.kind != "auto":
            return self.kind
        return QUBIT_SINGLET if self.dim == 2 else QUDIT_CORRELATED

    @classmethod
    def from_dict(cls, raw: dict) -> "RunSpec":
        known = {"attack", "control", "dim", "seed", *_RUN_DEFAULTS, "message"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown run fields: {sorted(unknown)}")
        for required in ("attack", "control", "dim", "seed"):
            if required not in raw:
                raise ValueError(f"run is missing required field {required!r}")
        merged = {**_RUN_DEFAULTS, **raw}
        message = merged.get("message")
        if message is not None:
            message = tuple((int(mu), int(nu)) for mu, nu in message)
        return cls(
            attack=str(merged["attack"]),
            control=str(merged["control"]),
            dim=int(merged["dim"]),
            kind=str(merged["kind"]),
            cycles=int(merged["cycles"]),
            control_prob=float(merged["control_prob"]),
            trials=int(merged["trials"]),
            seed=int(merged["seed"]),
            message=message,
        )


def load_spec(path: str | Path) -> list[RunSpec]:
    payload = json.loads(Path(path).read_text())
    runs = payload["runs"] if isinstance(payload, dict) else payload
    return [RunSpec.from_dict(raw) for raw in runs]


def draw_message(dim: int, length: int, seed: int) -> list[tuple[int, int]]:
    """Uniform symbol pairs from the dedicated message stream."""
    rng = stream(seed, MESSAGE_TAG)
    pairs = rng.integers(0, dim, size=(length, 2))
    return [(int(mu), int(nu)) for mu, nu in pairs]


def score_session(records, dim: int, seed: int) -> dict:
    """Per-symbol eavesdropper accuracy and message integrity of a transcript.

    Abstaining readouts and the phase symbol are scored with uniform guesses
    drawn from the scoring stream.
    """
    rng = stream(seed, SCORE_TAG)
    n_msg = n_ctrl = 0
    mu_hits = nu_hits = intact = 0
    for record in records:
        if record.mode == "control":
            n_ctrl += 1
            continue
        n_msg += 1
        mu, nu = record.alice_symbols
        mu_hat = record.eve_guess
        if mu_hat is None:
            mu_hat = int(rng.integers(dim))
        nu_hat = int(rng.integers(dim))
        mu_hits += mu_hat == mu
        nu_hits += nu_hat == nu
        intact += record.bob_decoded == record.alice_symbols
    return {
        "n_message_cycles": n_msg,
        "n_control_cycles": n_ctrl,
        "eve_mu_accuracy": sig12(mu_hits / n_msg) if n_msg else None,
        "eve_nu_accuracy": sig12(nu_hits / n_msg) if n_msg else None,
        "message_integrity": sig12(intact / n_msg) if n_msg else None,
    }


def execute_run(spec: RunSpec) -> dict:
    """Execute one run; errors are reported in the row, not raised."""
    row = {field: None for field in REPORT_FIELDS}
    row.update(
        attack=spec.attack,
        control=spec.control,
        dim=spec.dim,
        kind=spec.resolved_kind,
        cycles=spec.cycles,
        control_prob=sig12(spec.control_prob),
        trials=spec.trials,
        seed=spec.seed,
        status="ok",
    )
    start = time.perf_counter()
    try:
        cfg = ProtocolConfig(
            dim=spec.dim,
            control_prob=spec.control_prob,
            n_cycles=max(spec.cycles, 1),
            seed=spec.seed,
            initial_state_kind=spec.resolved_kind,
        )
        eve = attacks.from_name(spec.attack, spec.dim)
        mode = control_mode.from_name(spec.control, cfg)
        detection = control_mode.empirical_pdet(eve, mode, cfg, spec.trials)
        row.update(
            p_det_analytic=sig12(detection.p_analytic),
            p_det_empirical=sig12(detection.p_empirical),
            ci_low=sig12(detection.ci_low),
            ci_high=sig12(detection.ci_high),
        )
        if spec.cycles > 0:
            message = (
                list(spec.message)
                if spec.message is not None
                else draw_message(spec.dim, spec.cycles, spec.seed)
            )
            records = run_session(cfg, message, eve, mode)
            row.update(score_session(records, spec.dim, spec.seed))
    except Exception as exc:  # noqa: BLE001 - per-run isolation is the contract
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["wall_clock_s"] = sig12(time.perf_counter() - start)
    return row


def run_experiments(specs: Sequence[RunSpec], jobs: int = 1) -> list[dict]:
    """Execute runs, in parallel up to `jobs`; rows keep the spec order."""
    if jobs <= 1 or len(specs) <= 1:
        return [execute_run(s) for s in specs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(execute_run, specs))


def emit(rows: list[dict], fmt: str, path: str | Path | None) -> str:
    """Serialize rows as JSON (array of objects) or CSV; write when given a path."""
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in REPORT_FIELDS})
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return value


def parse_report(text: str) -> list[dict]:
    return json.loads(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pingpong-sim",
        description="Run ping-pong protocol eavesdropping experiments.",
    )
    parser.add_argument("--spec", help="JSON experiment spec file (excludes single-run flags)")
    parser.add_argument("--attack", help="none | intercept-resend | cnot | pavicic | qudit-shift | generic:<file>")
    parser.add_argument("--control", help="computational | two-basis")
    parser.add_argument("--dim", type=int)
    parser.add_argument("--kind", choices=("auto",) + KINDS, default=None)
    parser.add_argument("--cycles", type=int, default=None)
    parser.add_argument("--control-prob", type=float, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--message", default=None, help="fixed symbols, e.g. '01,10,23' (digit pairs)")
    parser.add_argument("--output", default=None, help="report path (stdout when omitted)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--jobs", type=int, default=1)
    return parser


def _parse_message(text: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if len(chunk) != 2 or not chunk.isdigit():
            raise ValueError(f"message chunk {chunk!r} is not a digit pair")
        pairs.append((int(chunk[0]), int(chunk[1])))
    return tuple(pairs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    single_flags = (args.attack, args.control, args.dim, args.seed)
    if args.spec is not None:
        if any(v is not None for v in single_flags) or args.message is not None:
            print("error: --spec excludes single-run flags", file=sys.stderr)
            return 2
        specs = load_spec(args.spec)
    else:
        if any(v is None for v in single_flags):
            print(
                "error: single-run mode requires --attack, --control, --dim and --seed",
                file=sys.stderr,
            )
            return 2
        raw = {
            "attack": args.attack,
            "control": args.control,
            "dim": args.dim,
            "seed": args.seed,
        }
        if args.kind is not None:
            raw["kind"] = args.kind
        if args.cycles is not None:
            raw["cycles"] = args.cycles
        if args.control_prob is not None:
            raw["control_prob"] = args.control_prob
        if args.trials is not None:
            raw["trials"] = args.trials
        if args.message is not None:
            raw["message"] = _parse_message(args.message)
        specs = [RunSpec.from_dict(raw)]

    rows = run_experiments(specs, jobs=args.jobs)
    text = emit(rows, args.format, args.output)
    if args.output is None:
        sys.stdout.write(text)
    errors = [(i, row["error"]) for i, row in enumerate(rows) if row["status"] != "ok"]
    for index, message in errors:
        print(f"run {index} failed: {message}", file=sys.stderr)
    return 0 if not errors else 1


if __name__ == "__main__":
    raise SystemExit(main())
