"""Command-line interface.

    selftally gen-params --backend ia --profile test-small --n 3 --k 3
    selftally run-scenario fig4.scenario --out out/
    selftally bench-tally --n-list 20,30,40 --k-list 2,4,6 --workers 4
    selftally verify-transcript out/fig4.transcript

Exit status is 0 on success/accept and nonzero otherwise.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .bench import bench_tally, format_bench_table
from .errors import ScenarioError
from .groups import EC, IA, derive_params, format_params_doc
from .scenario import load_scenario, run_scenario
from .transcript import verify_transcript


def _int_list(text: str) -> list:
    return [int(part) for part in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selftally",
        description="Self-tallying boardroom voting simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    gp = sub.add_parser("gen-params", help="emit shared group parameters")
    gp.add_argument("--backend", choices=[IA, EC], default=IA)
    gp.add_argument("--profile", choices=["test-small", "production"],
                    default="test-small")
    gp.add_argument("--n", type=int, required=True, help="participant count")
    gp.add_argument("--k", type=int, required=True, help="choice count")
    gp.add_argument("--ia-bits", type=int, default=1024, choices=[1024, 2048])
    gp.add_argument("--out", type=Path, help="write to file instead of stdout")

    rs = sub.add_parser("run-scenario", help="run a scenario end to end")
    rs.add_argument("scenario", help="scenario file (or bundled name)")
    rs.add_argument("--out", type=Path, default=None,
                    help="directory for transcript and report")

    bt = sub.add_parser("bench-tally", help="benchmark the tally search")
    bt.add_argument("--n-list", type=_int_list, required=True)
    bt.add_argument("--k-list", type=_int_list, required=True)
    bt.add_argument("--workers", type=int, default=1)
    bt.add_argument("--backend", choices=[IA, EC], default=EC)
    bt.add_argument("--profile", choices=["test-small", "production"],
                    default="production")
    bt.add_argument("--seed", type=int, default=0)
    bt.add_argument("--out", type=Path, help="also write the table to a file")

    vt = sub.add_parser("verify-transcript", help="replay and re-verify a transcript")
    vt.add_argument("transcript", type=Path)

    return parser


def _resolve_scenario(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("selftally").joinpath("scenarios")
    for candidate in (name, f"{name}.scenario"):
        target = bundled.joinpath(candidate)
        if target.is_file():
            return Path(str(target))
    raise ScenarioError(f"no such scenario: {name}")


def cmd_gen_params(args) -> int:
    params = derive_params(args.backend, args.profile, args.n, args.k,
                           ia_bits=args.ia_bits)
    doc = format_params_doc(params)
    if args.out:
        args.out.write_text(doc)
    else:
        sys.stdout.write(doc)
    return 0


def cmd_run_scenario(args) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    out_dir = args.out if args.out is not None else Path(f"{scenario.name}-out")
    report = run_scenario(scenario, out_dir=out_dir)
    print(f"scenario: {report.scenario}")
    print(f"outcome: {report.outcome}")
    if report.tally is not None:
        print(f"tally: {list(report.tally)} over {report.effective_voters} voters")
    print(f"transcript: {report.transcript_path}")
    print(f"report: {report.report_path}")
    if scenario.expected_infeasible:
        return 0 if report.outcome == "tally-infeasible" else 3
    return 0 if report.outcome == "completed" else 2


def cmd_bench_tally(args) -> int:
    cells = bench_tally(args.n_list, args.k_list, workers=args.workers,
                        backend=args.backend, profile=args.profile,
                        seed=args.seed)
    table = format_bench_table(cells)
    sys.stdout.write(table)
    if args.out:
        args.out.write_text(table)
    return 0


def cmd_verify_transcript(args) -> int:
    result = verify_transcript(args.transcript)
    if result.ok:
        print(f"{args.transcript}: accepted")
        return 0
    where = "" if result.record_index is None else f" at record {result.record_index}"
    print(f"{args.transcript}: REJECTED{where}: {result.message}")
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        handler = {
            "gen-params": cmd_gen_params,
            "run-scenario": cmd_run_scenario,
            "bench-tally": cmd_bench_tally,
            "verify-transcript": cmd_verify_transcript,
        }[args.command]
        return handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
