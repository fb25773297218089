"""Batch experiment runner: seeds, initial configurations, CSV/JSON output.

A batch is fully determined by its spec (protocol, sizes, mode, policy,
trial count, master seed, ...): trial i of size n runs with the seed
sha256(master:n:i), so batches are reproducible and parallelizable.
"""

from __future__ import annotations

import csv
import io
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .analysis import AllTimedOut, BatchEstimate, estimate
from .geometry import RationalPoint
from .protocols import PROTOCOL_NAMES, DestinationFunction, parse_protocol
from .randomness import BitLedger, BitSource, derive_trial_seed
from .scheduler import (DetectionMode, SimulationState, TrialRecord,
                        default_max_rounds, parse_mode, parse_policy,
                        run_to_scatter)

CSV_HEADER = ["protocol", "n", "mode", "policy", "seed", "rounds",
              "total_bits", "max_per_robot_bits", "timed_out"]


class SpecError(ValueError):
    """Invalid experiment specification; message names the offending field."""


@dataclass
class ExperimentSpec:
    protocol: str = "dp2"
    ns: Sequence[int] = (2,)
    mode: str = "none"
    policy: str = "fsync"
    trials: int = 1
    master_seed: int = 0
    script_n: int = 2
    max_rounds: Optional[int] = None
    init: str = "gathered"
    out: Optional[str] = None
    workers: int = 1

    def validate(self) -> None:
        if self.protocol not in PROTOCOL_NAMES:
            raise SpecError(f"protocol: unknown {self.protocol!r}, "
                            f"expected one of {PROTOCOL_NAMES}")
        if not self.ns or any(n < 1 for n in self.ns):
            raise SpecError("n: every robot count must be >= 1")
        if self.trials < 1:
            raise SpecError("trials: must be >= 1")
        if self.script_n < 1:
            raise SpecError("script-n: must be >= 1")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise SpecError("max-rounds: must be >= 1")
        if self.workers < 1:
            raise SpecError("workers: must be >= 1")
        mode = parse_mode(self.mode)          # raises ValueError on bad mode
        parse_policy(self.policy)
        _check_init(self.init)
        needs = parse_protocol(self.protocol, self.script_n).requires
        if needs == "strong_global" and mode is not DetectionMode.STRONG_GLOBAL:
            raise SpecError(f"mode: protocol {self.protocol} requires strong-global")
        if needs == "strong_local" and mode not in (
                DetectionMode.STRONG_LOCAL, DetectionMode.STRONG_GLOBAL):
            raise SpecError(f"mode: protocol {self.protocol} requires "
                            "strong-local (or strong-global)")


def _check_init(init: str) -> None:
    if init == "gathered" or init.startswith("file:"):
        return
    if init.startswith("grid:"):
        try:
            size = int(init.split(":", 1)[1])
        except ValueError:
            raise SpecError(f"init: bad grid size in {init!r}") from None
        if size < 1:
            raise SpecError("init: grid size must be >= 1")
        return
    raise SpecError(f"init: unknown {init!r}; expected gathered, "
                    "grid:<size> or file:<path>")


def initial_positions(init: str, n: int, seed: int) -> List[RationalPoint]:
    """Starting multiset for one trial; grid placement uses its own RNG."""
    if init == "gathered":
        return [RationalPoint.of(0, 0)] * n
    if init.startswith("grid:"):
        size = int(init.split(":", 1)[1])
        rng = random.Random(seed ^ 0x9E3779B97F4A7C15)
        return [RationalPoint.of(rng.randrange(size), rng.randrange(size))
                for _ in range(n)]
    if init.startswith("file:"):
        path = Path(init.split(":", 1)[1])
        points = []
        for line in path.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            xs, ys = line.split()
            points.append(RationalPoint(Fraction(xs), Fraction(ys)))
        if len(points) != n:
            raise SpecError(f"init: {path} holds {len(points)} points, expected {n}")
        return points
    raise SpecError(f"init: unknown {init!r}")


def run_single_trial(protocol_name: str, n: int, mode_name: str,
                     policy_name: str, seed: int, script_n: int = 2,
                     max_rounds: Optional[int] = None,
                     init: str = "gathered") -> TrialRecord:
    protocol = parse_protocol(protocol_name, script_n)
    mode = parse_mode(mode_name)
    policy = parse_policy(policy_name)
    state = SimulationState(
        positions=initial_positions(init, n, seed),
        rng=BitSource(seed),
        ledger=BitLedger(),
        scheduler_rng=random.Random(seed ^ 0xD1B54A32D192ED03),
    )
    limit = max_rounds if max_rounds is not None else default_max_rounds(protocol, n)
    return run_to_scatter(state, protocol, mode, policy, limit)


def _trial_args(spec: ExperimentSpec) -> List[Tuple]:
    args = []
    for n in spec.ns:
        for i in range(spec.trials):
            seed = derive_trial_seed(spec.master_seed, n, i)
            args.append((spec.protocol, n, spec.mode, spec.policy, seed,
                         spec.script_n, spec.max_rounds, spec.init))
    return args


@dataclass
class BatchResult:
    spec: ExperimentSpec
    records: List[TrialRecord] = field(default_factory=list)
    summaries: Dict[int, Optional[BatchEstimate]] = field(default_factory=dict)

    @property
    def any_timed_out(self) -> bool:
        return any(r.timed_out for r in self.records)

    def rows(self) -> List[Dict[str, object]]:
        out = []
        for r in self.records:
            out.append({"protocol": self.spec.protocol, "n": r.n,
                        "mode": self.spec.mode, "policy": self.spec.policy,
                        "seed": r.seed, "rounds": r.rounds_used,
                        "total_bits": r.total_bits,
                        "max_per_robot_bits": r.per_robot_max_bits,
                        "timed_out": int(r.timed_out)})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()

    def summary_json(self) -> str:
        payload = {}
        for n, est in sorted(self.summaries.items()):
            if est is None:
                payload[str(n)] = {"all_timed_out": True}
                continue
            payload[str(n)] = {
                "trials": est.trials,
                "timed_out": est.timed_out,
                "mean_rounds": est.mean_rounds,
                "mean_bits": est.mean_bits,
                "ci95_rounds": list(est.ci95_rounds),
                "ci95_bits": list(est.ci95_bits),
                "max_per_robot_bits": est.max_per_robot_bits,
            }
        return json.dumps({"protocol": self.spec.protocol,
                           "mode": self.spec.mode,
                           "policy": self.spec.policy,
                           "master_seed": self.spec.master_seed,
                           "per_n": payload}, indent=2, sort_keys=True)


def run_batch(spec: ExperimentSpec) -> BatchResult:
    """Run every trial of the spec; rows come back in trial-index order."""
    spec.validate()
    args = _trial_args(spec)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(_run_star, args, chunksize=4))
    else:
        records = [_run_star(a) for a in args]
    result = BatchResult(spec=spec, records=records)
    for n in spec.ns:
        per_n = [r for r in records if r.n == n]
        try:
            result.summaries[n] = estimate(per_n)
        except AllTimedOut:
            result.summaries[n] = None
    return result


def _run_star(args: Tuple) -> TrialRecord:
    return run_single_trial(*args)


def write_outputs(result: BatchResult, out: str) -> Tuple[Path, Path]:
    """Write <out>.csv and <out>.summary.json (out may end in .csv)."""
    base = Path(out)
    if base.suffix == ".csv":
        base = base.with_suffix("")
    csv_path = base.with_suffix(".csv")
    json_path = Path(str(base) + ".summary.json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(result.to_csv())
    json_path.write_text(result.summary_json() + "\n")
    return csv_path, json_path
