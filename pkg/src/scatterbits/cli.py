"""Command-line experiment runner.

``scatterbits run`` executes a batch (in-process by default, or against a
running service with --server) and writes one CSV row per trial plus a
summary JSON.  ``scatterbits lemma-report`` prints the exact lemma-check
matrix.  ``scatterbits serve`` starts the HTTP service.

Exit codes: 0 success, 2 configuration error, 3 when any trial timed out
(or a lemma check failed).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

from .analysis import TooLarge
from .experiments import (ExperimentSpec, SpecError, run_batch, write_outputs)
from .reporting import lemma_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TIMEOUT = 3


def _parse_config_file(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SpecError(f"config: line {lineno} is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _build_spec(args: argparse.Namespace) -> ExperimentSpec:
    values: Dict[str, str] = {}
    if args.config:
        values = _parse_config_file(args.config)
    # flags override config-file values

    def pick(flag_value, key: str, default):
        if flag_value is not None:
            return flag_value
        if key in values:
            return values[key]
        return default

    ns_raw = pick(args.n, "n", "2")
    try:
        ns = tuple(int(part) for part in str(ns_raw).split(","))
    except ValueError:
        raise SpecError(f"n: not a comma list of integers: {ns_raw!r}") from None
    max_rounds = pick(args.max_rounds, "max-rounds", None)
    return ExperimentSpec(
        protocol=pick(args.protocol, "protocol", "dp2"),
        ns=ns,
        mode=pick(args.mode, "mode", "none"),
        policy=pick(args.policy, "policy", "fsync"),
        trials=int(pick(args.trials, "trials", 1)),
        master_seed=int(pick(args.seed, "seed", 0)),
        script_n=int(pick(args.script_n, "script-n", 2)),
        max_rounds=int(max_rounds) if max_rounds is not None else None,
        init=pick(args.init, "init", "gathered"),
        out=pick(args.out, "out", None),
        workers=int(pick(args.workers, "workers", 1)),
    )


def _run_remote(spec: ExperimentSpec, server: str) -> int:
    import httpx

    payload = {"protocol": spec.protocol, "ns": list(spec.ns), "mode": spec.mode,
               "policy": spec.policy, "trials": spec.trials,
               "master_seed": spec.master_seed, "script_n": spec.script_n,
               "max_rounds": spec.max_rounds, "init": spec.init,
               "workers": spec.workers}
    response = httpx.post(server.rstrip("/") + "/run", json=payload, timeout=600.0)
    if response.status_code == 400:
        print(f"error: {response.json().get('detail')}", file=sys.stderr)
        return EXIT_CONFIG
    response.raise_for_status()
    body = response.json()
    import csv as csv_mod
    import json
    from .experiments import CSV_HEADER
    if spec.out:
        base = Path(spec.out)
        if base.suffix == ".csv":
            base = base.with_suffix("")
        with open(base.with_suffix(".csv"), "w", newline="") as fh:
            writer = csv_mod.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
            writer.writeheader()
            writer.writerows(body["rows"])
        Path(str(base) + ".summary.json").write_text(
            json.dumps(body["summaries"], indent=2, sort_keys=True) + "\n")
    else:
        print(json.dumps(body["summaries"], indent=2, sort_keys=True))
    return EXIT_TIMEOUT if body["any_timed_out"] else EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        spec = _build_spec(args)
        spec.validate()
    except (SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.server:
        return _run_remote(spec, args.server)
    result = run_batch(spec)
    if spec.out:
        csv_path, json_path = write_outputs(result, spec.out)
        print(f"wrote {csv_path} and {json_path}")
    else:
        sys.stdout.write(result.to_csv())
        print(result.summary_json())
    return EXIT_TIMEOUT if result.any_timed_out else EXIT_OK


def cmd_lemma_report(args: argparse.Namespace) -> int:
    try:
        matrix = lemma_report(args.max_n, args.max_k)
    except (TooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(matrix.to_table())
    if args.json_out:
        Path(args.json_out).write_text(matrix.to_json() + "\n")
    return EXIT_OK if matrix.all_passed else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatterbits")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a batch of scattering trials")
    run_p.add_argument("--protocol", help="dp2, dp2-biased, clement-global, "
                       "clement-local, sa:loglog, sa:logstar, sa:invack")
    run_p.add_argument("--n", help="comma list of robot counts, e.g. 4,16,64")
    run_p.add_argument("--mode", help="none, weak-local, weak-global, "
                       "strong-local, strong-global")
    run_p.add_argument("--policy", help="fsync, ssync-rr:<b>, ssync-rand:<p>, "
                       "ssync-all")
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--script-n", dest="script_n", type=int)
    run_p.add_argument("--max-rounds", dest="max_rounds", type=int)
    run_p.add_argument("--init", help="gathered, grid:<size> or file:<path>")
    run_p.add_argument("--out", help="output basename; writes .csv and .summary.json")
    run_p.add_argument("--workers", type=int)
    run_p.add_argument("--config", help="key=value file; flags override it")
    run_p.add_argument("--server", help="base URL of a running service; "
                       "runs there instead of in-process")
    run_p.set_defaults(func=cmd_run)

    lemma_p = sub.add_parser("lemma-report", help="exact balls-into-bins checks")
    lemma_p.add_argument("--max-n", dest="max_n", type=int, required=True)
    lemma_p.add_argument("--max-k", dest="max_k", type=int, required=True)
    lemma_p.add_argument("--json-out", dest="json_out")
    lemma_p.set_defaults(func=cmd_lemma_report)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
