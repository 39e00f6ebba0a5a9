"""Scenario-driven end-to-end runs.

A scenario file is flat INI-style text with four sections:

    [params]     backend, profile, n, k, seed, deposit, ... (see below)
    [deadlines]  registration / voting / repair, in logical ticks
    [choices]    p<i> = <choice>, for every participant that votes
    [stalls]     voting = <ids>, repair<r> = <ids> for each repair round

Every participant either has a scripted choice or is listed as a voting
staller; repair-round stallers must be voters.  Runs are deterministic
under the scenario seed: fixed seed means byte-identical transcripts.
"""

from __future__ import annotations

import configparser
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .board import Board, BoardConfig, Phase
from .errors import ScenarioError, TallyInfeasibleError
from .groups import EC, IA, derive_params, make_group
from .protocol import MpcKey, blind_vote, gen_keypair, prove_membership, prove_pairwise_key
from .tally import TallyResult, aggregate_product, search_tally
from .transcript import write_transcript

DUMMY_CHOICE = 1  # the public dummy vote always backs the first choice


@dataclass(frozen=True)
class Scenario:
    name: str
    backend: str = IA
    profile: str = "test-small"
    n: int = 3
    k: int = 2
    seed: int = 0
    deposit: int = 10
    min_deposit: int = 1
    coords: str = "jacobi"
    use_hints: bool = True
    dummy_vote: bool = False
    workers: int = 1
    ia_bits: int = 1024
    registration_ticks: int = 10
    voting_ticks: int = 10
    repair_ticks: int = 10
    choices: dict = field(default_factory=dict)        # id -> 1-based choice
    voting_stalls: frozenset = frozenset()
    repair_stalls: dict = field(default_factory=dict)  # round -> frozenset(ids)

    @property
    def participant_ids(self) -> list[str]:
        return [f"p{i}" for i in range(1, self.n + 1)]

    @property
    def survivors(self) -> list[str]:
        stalled = set(self.voting_stalls)
        for ids in self.repair_stalls.values():
            stalled |= set(ids)
        return [p for p in self.participant_ids if p not in stalled]

    @property
    def expected_infeasible(self) -> bool:
        return len(self.survivors) < 3

    def expected_histogram(self) -> tuple:
        counts = [0] * self.k
        for p in self.survivors:
            counts[self.choices[p] - 1] += 1
        return tuple(counts)


@dataclass(frozen=True)
class RunReport:
    scenario: str
    outcome: str                      # "completed" or "tally-infeasible"
    tally: Optional[tuple]            # scripted-voter counts (dummy removed)
    raw_counts: Optional[tuple]       # counts as accepted by the board
    effective_voters: int
    iterations: int
    search_seconds: float
    total_seconds: float
    per_phase_ops: dict
    settlement: dict
    remainder: int
    transcript_path: Optional[Path]
    report_path: Optional[Path]


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc}")
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}")

    def fail(where, msg):
        raise ScenarioError(f"{path}: [{where}] {msg}")

    if "params" not in parser:
        fail("params", "section missing")
    p = parser["params"]
    try:
        scenario = Scenario(
            name=path.stem,
            backend=p.get("backend", IA).lower(),
            profile=p.get("profile", "test-small"),
            n=p.getint("n"),
            k=p.getint("k"),
            seed=p.getint("seed", 0),
            deposit=p.getint("deposit", 10),
            min_deposit=p.getint("min_deposit", 1),
            coords=p.get("coords", "jacobi"),
            use_hints=p.getboolean("hints", True),
            dummy_vote=p.getboolean("dummy_vote", False),
            workers=p.getint("workers", 1),
            ia_bits=p.getint("ia_bits", 1024),
            registration_ticks=_deadline(parser, "registration"),
            voting_ticks=_deadline(parser, "voting"),
            repair_ticks=_deadline(parser, "repair"),
            choices=_parse_choices(parser),
            voting_stalls=_parse_stall_ids(parser, "voting"),
            repair_stalls=_parse_repair_stalls(parser),
        )
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: {exc}")
    validate_scenario(scenario)
    return scenario


def _deadline(parser, key) -> int:
    if "deadlines" in parser and key in parser["deadlines"]:
        return parser["deadlines"].getint(key)
    return 10


def _parse_choices(parser) -> dict:
    out = {}
    if "choices" in parser:
        for key, value in parser["choices"].items():
            out[key] = int(value)
    return out


def _parse_stall_ids(parser, key) -> frozenset:
    if "stalls" in parser and key in parser["stalls"]:
        return frozenset(parser["stalls"][key].replace(",", " ").split())
    return frozenset()


def _parse_repair_stalls(parser) -> dict:
    out = {}
    if "stalls" in parser:
        for key in parser["stalls"]:
            if key.startswith("repair"):
                out[int(key[len("repair"):])] = frozenset(
                    parser["stalls"][key].replace(",", " ").split())
    return out


def validate_scenario(sc: Scenario) -> None:
    def fail(where, msg):
        raise ScenarioError(f"{sc.name}: [{where}] {msg}")

    if sc.backend not in (IA, EC):
        fail("params", f"unknown backend {sc.backend!r}")
    if sc.n < 3:
        fail("params", "need at least 3 participants")
    if sc.k < 2:
        fail("params", "need at least 2 choices")
    if sc.workers < 1:
        fail("params", "workers must be positive")

    ids = set(sc.participant_ids)
    for key in sc.choices:
        if key not in ids:
            fail("choices", f"unknown participant {key!r}")
    for key, choice in sc.choices.items():
        if not 1 <= choice <= sc.k:
            fail("choices", f"{key} = {choice} outside 1..{sc.k} (choices are 1-based)")

    for staller in sc.voting_stalls:
        if staller not in ids:
            fail("stalls", f"unknown participant {staller!r}")
        if staller in sc.choices:
            fail("stalls", f"{staller} cannot both vote and stall in voting")
    voters = ids - sc.voting_stalls
    missing = voters - set(sc.choices)
    if missing:
        fail("choices", f"no choice for {sorted(missing)}")

    seen = set(sc.voting_stalls)
    rounds = sorted(sc.repair_stalls)
    if rounds and rounds != list(range(1, len(rounds) + 1)):
        fail("stalls", "repair rounds must be numbered 1..r without gaps")
    for r in rounds:
        for staller in sc.repair_stalls[r]:
            if staller not in ids:
                fail("stalls", f"unknown participant {staller!r}")
            if staller in seen:
                fail("stalls", f"{staller} already stalled earlier")
            if staller not in sc.choices:
                fail("stalls", f"repair staller {staller} never voted")
            seen.add(staller)


def run_scenario(sc: Scenario, out_dir=None) -> RunReport:
    """Drive a full election through the board with honest automation.

    Honest participants register, vote their scripted choice, and answer
    every declared fault round within one tick unless scripted to stall.
    The tally is searched off-board and submitted by the authority.
    """
    t_start = time.perf_counter()
    total_n = sc.n + (1 if sc.dummy_vote else 0)
    params = derive_params(sc.backend, sc.profile, total_n, sc.k,
                           ia_bits=sc.ia_bits)
    config = BoardConfig(
        min_deposit=sc.min_deposit,
        registration_ticks=sc.registration_ticks,
        voting_ticks=sc.voting_ticks,
        repair_ticks=sc.repair_ticks,
        coords=sc.coords,
        use_hints=sc.use_hints,
    )
    board = Board(params, config)
    grp = make_group(params, coords=sc.coords)  # participant-side context

    ids = sc.participant_ids + ([config.authority] if sc.dummy_vote else [])
    master = random.Random(sc.seed)
    rngs = {i: random.Random(master.randrange(2 ** 63)) for i in ids}
    keypairs = {i: gen_keypair(grp, rngs[i]) for i in ids}

    per_phase_ops: dict[str, dict] = {}

    def track(records):
        for rec in records:
            phase_ops = per_phase_ops.setdefault(rec_phase[0], {})
            for name, count in rec.ops.items():
                phase_ops[name] = phase_ops.get(name, 0) + count

    rec_phase = [board.phase.value]

    def submit(fn, *args):
        rec_phase[0] = board.phase.value
        records = fn(*args)
        track(records)
        return records

    submit(board.enroll_voters, config.authority, ids)
    for i in ids:
        submit(board.register, i, keypairs[i].pub, sc.deposit)
    submit(board.compute_mpc_keys, config.authority)

    def mpc_key(sender) -> MpcKey:
        idx = board.index_of[sender]
        return MpcKey(index=idx, h=board.mpc_keys[idx - 1])

    for i in ids:
        if i in sc.voting_stalls:
            continue
        choice = DUMMY_CHOICE if i == config.authority else sc.choices[i]
        mk = mpc_key(i)
        vote = blind_vote(grp, keypairs[i].x, mk, choice)
        proof = prove_membership(grp, keypairs[i], mk, vote, choice, rngs[i])
        submit(board.submit_vote, i, vote.value, proof)
    submit(board.tick, config.voting_ticks)

    while board.phase is Phase.FAULT_REPAIR:
        r = board.repair_round
        stalled = sc.repair_stalls.get(r, frozenset())
        faulty_idx = board.current_faulty_indices()
        for i in board.surviving_voters():
            if i in stalled:
                continue
            kp = keypairs[i]
            shares = [
                prove_pairwise_key(grp, kp, board.index_of[i], fi,
                                   board.pubkeys[board.roster[fi - 1]], rngs[i])
                for fi in faulty_idx
            ]
            submit(board.repair_vote, i, shares)
        submit(board.tick, config.repair_ticks)

    raw_counts = None
    search_result: Optional[TallyResult] = None
    if board.phase is Phase.TALLY:
        product = aggregate_product(grp, board.surviving_votes())
        try:
            search_result = search_tally(params, product,
                                         board.effective_count(),
                                         workers=sc.workers)
        except TallyInfeasibleError:
            pass
        else:
            submit(board.submit_tally, config.authority, search_result.counts)
            raw_counts = board.result
    outcome = "completed" if raw_counts is not None else "tally-infeasible"

    settlement, remainder = {}, 0
    if board.phase is Phase.CLOSED:
        records = submit(board.settle_deposits, config.authority)
        if records[0].accept:
            import json
            doc = json.loads(records[1].payload)
            settlement, remainder = doc["deltas"], doc["remainder"]

    tally = raw_counts
    effective = board.effective_count()
    if raw_counts is not None and sc.dummy_vote:
        adjusted = list(raw_counts)
        adjusted[DUMMY_CHOICE - 1] -= 1
        tally = tuple(adjusted)
        effective -= 1

    transcript_path = report_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        transcript_path = write_transcript(out_dir / f"{sc.name}.transcript", board)

    report = RunReport(
        scenario=sc.name,
        outcome=outcome,
        tally=tally,
        raw_counts=raw_counts,
        effective_voters=effective,
        iterations=search_result.iterations if search_result else 0,
        search_seconds=search_result.duration if search_result else 0.0,
        total_seconds=time.perf_counter() - t_start,
        per_phase_ops=per_phase_ops,
        settlement=settlement,
        remainder=remainder,
        transcript_path=transcript_path,
        report_path=None,
    )
    if out_dir is not None:
        from dataclasses import replace
        report_path = out_dir / f"{sc.name}.report.txt"
        report_path.write_text(format_report(report, board))
        report = replace(report, report_path=report_path)
    return report


def format_report(report: RunReport, board: Board) -> str:
    lines = [
        f"scenario: {report.scenario}",
        f"outcome: {report.outcome}",
        f"tally: {list(report.tally) if report.tally else None}",
        f"raw_counts: {list(report.raw_counts) if report.raw_counts else None}",
        f"effective_voters: {report.effective_voters}",
        f"search_iterations: {report.iterations}",
        f"search_seconds: {report.search_seconds:.4f}",
        f"total_seconds: {report.total_seconds:.4f}",
        "",
        "per-phase operation counts:",
    ]
    for phase, ops in report.per_phase_ops.items():
        shown = {k: v for k, v in sorted(ops.items()) if v}
        lines.append(f"  {phase}: {shown}")
    lines += ["", "settlement:"]
    for sender in sorted(report.settlement):
        lines.append(f"  {sender}: +{report.settlement[sender]}")
    lines.append(f"  remainder retained: {report.remainder}")
    lines += ["", "transactions:"]
    for rec in board.records:
        flag = "accept" if rec.accept else f"REJECT ({rec.reason})"
        total_ops = sum(rec.ops.values()) if rec.ops else 0
        lines.append(f"  {rec.seq:>3} t={rec.t:<4} {rec.sender:<10} "
                     f"{rec.action:<12} {flag} ops={total_ops}")
    return "\n".join(lines) + "\n"
