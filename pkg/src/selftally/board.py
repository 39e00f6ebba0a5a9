"""In-process bulletin board emulating the voting contract.

The board is a single-writer state machine: every mutation flows through
one serialized transaction path that validates, meters, and appends a
record to the transcript.  Records are hash-chained (each carries the
SHA-256 of the previous record line), so replaying a transcript from its
genesis record reconstructs the final state bit-exactly and any
tampering breaks the chain.

Transactions never raise for protocol-level failures; they are recorded
as rejected with a reason.  Senders are harness-authenticated string
identities ("authority", "p1", ...); the reserved senders "board" and
"clock" mark induced transitions and time advances.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .groups import GroupParams, format_params_doc, make_group, parse_params_doc
from .protocol import (
    BlindedVote,
    MembershipProof,
    RecoveryShare,
    decode_membership_proof,
    decode_recovery_share,
    encode_membership_proof,
    encode_recovery_share,
    mpc_keys_cached,
    mpc_keys_naive,
    repair_blinded_vote,
    verify_membership,
    verify_pairwise_key,
)
from .errors import RepairError
from .tally import aggregate_product, check_tally

BOARD_SENDER = "board"
CLOCK_SENDER = "clock"
GENESIS_PREV = "0" * 64


class Phase(Enum):
    SETUP = "SETUP"
    REGISTRATION = "REGISTRATION"
    PRE_VOTING = "PRE_VOTING"
    VOTING = "VOTING"
    FAULT_REPAIR = "FAULT_REPAIR"
    TALLY = "TALLY"
    CLOSED = "CLOSED"


@dataclass(frozen=True)
class BoardConfig:
    authority: str = "authority"
    min_deposit: int = 1
    registration_ticks: int = 10
    voting_ticks: int = 10
    repair_ticks: int = 10
    authority_deposit: int = 0
    coords: str = "jacobi"      # curve backend coordinate mode
    use_hints: bool = True      # consume prover-supplied inverse hints
    mpc_mode: str = "cached"    # "cached" or "naive", for cost comparisons

    def as_dict(self) -> dict:
        return {
            "authority": self.authority,
            "min_deposit": self.min_deposit,
            "registration_ticks": self.registration_ticks,
            "voting_ticks": self.voting_ticks,
            "repair_ticks": self.repair_ticks,
            "authority_deposit": self.authority_deposit,
            "coords": self.coords,
            "use_hints": self.use_hints,
            "mpc_mode": self.mpc_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoardConfig":
        return cls(**data)


@dataclass(frozen=True)
class TxRecord:
    seq: int
    t: int
    sender: str
    action: str
    payload: bytes
    accept: bool
    reason: str
    ops: dict
    prev: str
    line: bytes

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.payload).hexdigest()


def _encode_line(seq: int, t: int, sender: str, action: str, payload: bytes,
                 accept: bool, reason: str, ops: dict, prev: str) -> bytes:
    doc = {
        "seq": seq,
        "t": t,
        "sender": sender,
        "action": action,
        "payload": payload.hex(),
        "digest": hashlib.sha256(payload).hexdigest(),
        "accept": accept,
        "reason": reason,
        "ops": ops,
        "prev": prev,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def _json_payload(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


class _Reject(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class Board:
    """Phase machine, deposit ledger, and transcript of one election."""

    def __init__(self, params: GroupParams, config: BoardConfig,
                 _genesis_payload: Optional[bytes] = None):
        self.params = params
        self.config = config
        self.grp = make_group(params, coords=config.coords)

        self.phase = Phase.SETUP
        self.clock = 0
        self.deadline: Optional[int] = None
        self.enrolled: list[str] = []
        self.pubkeys: dict[str, object] = {}     # sender -> element
        self.deposits: dict[str, int] = {}
        self.roster: list[str] = []              # registrants, enrollment order
        self.index_of: dict[str, int] = {}       # sender -> 1-based index
        self.mpc_keys: list = []                 # by index
        self.votes: dict[str, BlindedVote] = {}
        self.faulty_rounds: list[list[str]] = []
        self.faulty: set[str] = set()
        self.repaired_round: dict[str, int] = {}
        self.repair_round = 0
        self.result: Optional[tuple] = None
        self.infeasible = False
        self.settled = False

        self.records: list[TxRecord] = []
        self._prev = GENESIS_PREV
        if _genesis_payload is None:
            _genesis_payload = _json_payload({
                "params": format_params_doc(params),
                "config": config.as_dict(),
            })
        self._genesis_payload = _genesis_payload
        self._append(config.authority, "genesis", _genesis_payload, True, "", {})

    @classmethod
    def from_genesis(cls, payload: bytes) -> "Board":
        doc = json.loads(payload.decode())
        params = parse_params_doc(doc["params"])
        config = BoardConfig.from_dict(doc["config"])
        return cls(params, config, _genesis_payload=payload)

    # -- record plumbing -------------------------------------------------

    def _append(self, sender: str, action: str, payload: bytes, accept: bool,
                reason: str, ops: dict) -> TxRecord:
        line = _encode_line(len(self.records), self.clock, sender, action,
                            payload, accept, reason, ops, self._prev)
        rec = TxRecord(seq=len(self.records), t=self.clock, sender=sender,
                       action=action, payload=payload, accept=accept,
                       reason=reason, ops=ops, prev=self._prev, line=line)
        self.records.append(rec)
        self._prev = hashlib.sha256(line).hexdigest()
        return rec

    def _submit(self, sender: str, action: str, payload: bytes) -> list[TxRecord]:
        """The single transaction path: decode, validate, meter, record."""
        before = self.grp.counter_snapshot()
        extras: list[tuple[str, bytes]] = []
        try:
            handler = self._HANDLERS.get(action)
            if handler is None:
                raise _Reject(f"unknown action {action!r}")
            handler(self, sender, payload, extras)
            accept, reason = True, ""
        except _Reject as exc:
            accept, reason = False, exc.reason
        ops = self.grp.counter.delta(before).as_dict()
        records = [self._append(sender, action, payload, accept, reason, ops)]
        for extra_action, extra_payload in extras:
            records.append(self._append(BOARD_SENDER, extra_action,
                                        extra_payload, True, "", {}))
        return records

    def apply(self, sender: str, action: str, payload: bytes) -> list[TxRecord]:
        """Entry point for transcript replay; same path as the live API."""
        if sender == BOARD_SENDER:
            raise ValueError("board-induced records are never applied")
        return self._submit(sender, action, payload)

    # -- public transaction API ------------------------------------------

    def enroll_voters(self, sender: str, ids: Sequence[str]) -> list[TxRecord]:
        return self._submit(sender, "enroll", _json_payload({"ids": list(ids)}))

    def register(self, sender: str, pub, deposit: int) -> list[TxRecord]:
        payload = _json_payload({
            "X": self.grp.canonical_bytes(pub).hex(), "deposit": deposit})
        return self._submit(sender, "register", payload)

    def compute_mpc_keys(self, sender: str) -> list[TxRecord]:
        return self._submit(sender, "compute_mpc", _json_payload({}))

    def submit_vote(self, sender: str, blinded, proof: MembershipProof) -> list[TxRecord]:
        payload = _json_payload({
            "B": self.grp.canonical_bytes(blinded).hex(),
            "proof": encode_membership_proof(self.grp, proof).hex(),
        })
        return self._submit(sender, "vote", payload)

    def repair_vote(self, sender: str, shares: Sequence[RecoveryShare]) -> list[TxRecord]:
        payload = _json_payload({
            "shares": [encode_recovery_share(self.grp, s).hex() for s in shares]})
        return self._submit(sender, "repair", payload)

    def submit_tally(self, sender: str, counts: Sequence[int]) -> list[TxRecord]:
        return self._submit(sender, "tally",
                            _json_payload({"counts": list(counts)}))

    def settle_deposits(self, sender: str) -> list[TxRecord]:
        return self._submit(sender, "settle", _json_payload({}))

    def tick(self, steps: int = 1) -> list[TxRecord]:
        return self._submit(CLOCK_SENDER, "tick",
                            _json_payload({"to": self.clock + steps}))

    # -- handlers ----------------------------------------------------------

    def _handle_enroll(self, sender, payload, extras):
        doc = _decode_json(payload)
        ids = doc.get("ids")
        if self.phase is not Phase.SETUP:
            raise _Reject("enrollment only during setup")
        if sender != self.config.authority:
            raise _Reject("only the authority enrolls voters")
        if (not isinstance(ids, list) or not ids
                or any(not isinstance(i, str) or not i for i in ids)):
            raise _Reject("malformed id list")
        if len(set(ids)) != len(ids):
            raise _Reject("duplicate ids")
        if len(ids) < 3:
            raise _Reject("need at least 3 voters for vote privacy")
        if any(i in (BOARD_SENDER, CLOCK_SENDER) for i in ids):
            raise _Reject("reserved id")
        self.enrolled = list(ids)
        if self.config.authority_deposit:
            self.deposits[self.config.authority] = self.config.authority_deposit
        self.phase = Phase.REGISTRATION
        self.deadline = self.clock + self.config.registration_ticks

    def _handle_register(self, sender, payload, extras):
        doc = _decode_json(payload)
        if self.phase is not Phase.REGISTRATION:
            raise _Reject("registration closed")
        if self.deadline is not None and self.clock >= self.deadline:
            raise _Reject("registration deadline passed")
        if sender not in self.enrolled:
            raise _Reject("sender not enrolled")
        if sender in self.pubkeys:
            raise _Reject("already registered")
        deposit = doc.get("deposit")
        if not isinstance(deposit, int) or deposit < self.config.min_deposit:
            raise _Reject(f"deposit below minimum {self.config.min_deposit}")
        try:
            pub = self.grp.element_from_bytes(bytes.fromhex(doc["X"]))
        except (KeyError, ValueError, TypeError):
            raise _Reject("malformed public key")
        if self.grp.is_identity(pub):
            raise _Reject("identity public key")
        self.pubkeys[sender] = pub
        self.deposits[sender] = self.deposits.get(sender, 0) + deposit

    def _handle_compute_mpc(self, sender, payload, extras):
        if sender != self.config.authority:
            raise _Reject("only the authority computes the synchronized keys")
        if self.phase is Phase.REGISTRATION:
            if len(self.pubkeys) != len(self.enrolled):
                raise _Reject("registration still open and incomplete")
        elif self.phase is not Phase.PRE_VOTING:
            raise _Reject("wrong phase for key computation")
        if len(self.pubkeys) < 3:
            raise _Reject("fewer than 3 registered voters")
        # unregistered enrollees are dropped here; their absence is what
        # the pairwise cancellation is computed over
        self.roster = [s for s in self.enrolled if s in self.pubkeys]
        self.index_of = {s: i + 1 for i, s in enumerate(self.roster)}
        pubs = [self.pubkeys[s] for s in self.roster]
        if self.config.mpc_mode == "naive":
            keys = mpc_keys_naive(self.grp, pubs)
        else:
            keys = mpc_keys_cached(self.grp, pubs)
        self.mpc_keys = [mk.h for mk in keys]
        self.phase = Phase.VOTING
        self.deadline = self.clock + self.config.voting_ticks

    def _handle_vote(self, sender, payload, extras):
        doc = _decode_json(payload)
        if self.phase is not Phase.VOTING:
            raise _Reject("not in the voting phase")
        if self.deadline is not None and self.clock >= self.deadline:
            raise _Reject("voting deadline passed")
        index = self.index_of.get(sender)
        if index is None:
            raise _Reject("sender not registered")
        if sender in self.votes:
            raise _Reject("vote already stored")
        try:
            blinded = self.grp.element_from_bytes(bytes.fromhex(doc["B"]))
            proof = decode_membership_proof(self.grp, bytes.fromhex(doc["proof"]))
        except (KeyError, ValueError, TypeError):
            raise _Reject("malformed vote payload")
        ok = verify_membership(
            self.grp, proof, self.pubkeys[sender], self.mpc_keys[index - 1],
            blinded, use_hints=self.config.use_hints and self.grp.backend == "ec")
        if not ok:
            raise _Reject("membership proof rejected")
        self.votes[sender] = BlindedVote(index=index, value=blinded)

    def _handle_repair(self, sender, payload, extras):
        doc = _decode_json(payload)
        if self.phase is not Phase.FAULT_REPAIR:
            raise _Reject("no repair round open")
        if self.deadline is not None and self.clock >= self.deadline:
            raise _Reject("repair deadline passed")
        if sender in self.faulty:
            raise _Reject("faulty sender cannot repair")
        vote = self.votes.get(sender)
        if vote is None:
            raise _Reject("no stored vote to repair")
        if self.repaired_round.get(sender, 0) >= self.repair_round:
            raise _Reject("already repaired this round")
        try:
            shares = [decode_recovery_share(self.grp, bytes.fromhex(h))
                      for h in doc["shares"]]
        except (KeyError, ValueError, TypeError):
            raise _Reject("malformed share payload")
        current = self.faulty_rounds[self.repair_round - 1]
        expected = {self.index_of[s] for s in current}
        index_to_sender = {i: s for s, i in self.index_of.items()}
        for share in shares:
            if share.honest != vote.index:
                raise _Reject("share issued for a different voter")
            if share.faulty not in index_to_sender:
                raise _Reject("share names an unknown index")
            faulty_pub = self.pubkeys[index_to_sender[share.faulty]]
            if not verify_pairwise_key(self.grp, share, self.pubkeys[sender],
                                       faulty_pub):
                raise _Reject("pairwise key proof rejected")
        try:
            repaired = repair_blinded_vote(self.grp, vote, shares,
                                           sorted(expected))
        except RepairError as exc:
            raise _Reject(str(exc))
        self.votes[sender] = repaired
        self.repaired_round[sender] = self.repair_round

    def _handle_tally(self, sender, payload, extras):
        doc = _decode_json(payload)
        if self.phase is not Phase.TALLY:
            raise _Reject("not in the tally phase")
        if sender != self.config.authority and sender not in self.index_of:
            raise _Reject("unknown sender")
        counts = doc.get("counts")
        if (not isinstance(counts, list) or len(counts) != self.params.k
                or any(not isinstance(ct, int) or ct < 0 for ct in counts)):
            raise _Reject("malformed counts")
        n_eff = len(self.surviving_votes())
        if sum(counts) != n_eff:
            raise _Reject(f"counts must sum to {n_eff}")
        product = aggregate_product(self.grp, self.surviving_votes())
        if not check_tally(self.grp, counts, product):
            raise _Reject("counts do not satisfy the tally equation")
        self.result = tuple(counts)
        self.phase = Phase.CLOSED
        extras.append(("result", _json_payload(
            {"counts": counts, "voters": n_eff})))

    def _handle_settle(self, sender, payload, extras):
        if self.phase is not Phase.CLOSED:
            raise _Reject("settlement only after closing")
        if self.settled:
            raise _Reject("already settled")
        deltas: dict[str, int] = {}
        honest = [s for s in self.roster if s not in self.faulty]
        pot = 0
        for s in self.roster:
            if s in self.faulty:
                pot += self.deposits.get(s, 0)
            else:
                deltas[s] = self.deposits.get(s, 0)
        share, remainder = (divmod(pot, len(honest)) if honest else (0, pot))
        for s in honest:
            deltas[s] += share
        if (self.config.authority_deposit
                and self.config.authority not in deltas):
            deltas[self.config.authority] = self.config.authority_deposit
        self.settled = True
        extras.append(("settlement", _json_payload(
            {"deltas": deltas, "remainder": remainder})))

    def _handle_tick(self, sender, payload, extras):
        doc = _decode_json(payload)
        to = doc.get("to")
        if sender != CLOCK_SENDER:
            raise _Reject("only the clock advances time")
        if not isinstance(to, int) or to <= self.clock:
            raise _Reject("clock must move forward")
        self.clock = to
        self._run_deadline_transitions(extras)

    _HANDLERS = {
        "enroll": _handle_enroll,
        "register": _handle_register,
        "compute_mpc": _handle_compute_mpc,
        "vote": _handle_vote,
        "repair": _handle_repair,
        "tally": _handle_tally,
        "settle": _handle_settle,
        "tick": _handle_tick,
    }

    # -- deadline-driven transitions ---------------------------------------

    def _run_deadline_transitions(self, extras):
        while True:
            if (self.phase is Phase.REGISTRATION and self.deadline is not None
                    and self.clock >= self.deadline):
                self.phase = Phase.PRE_VOTING
                self.deadline = None
                extras.append(("phase", _json_payload({"phase": "PRE_VOTING"})))
                continue
            if (self.phase is Phase.VOTING and self.deadline is not None
                    and self.clock >= self.deadline):
                missing = [s for s in self.roster if s not in self.votes]
                if not missing:
                    self._to_tally(extras)
                else:
                    self._declare_fault_round(missing, extras)
                continue
            if (self.phase is Phase.FAULT_REPAIR and self.deadline is not None
                    and self.clock >= self.deadline):
                silent = [s for s in self.surviving_voters()
                          if self.repaired_round.get(s, 0) < self.repair_round]
                if not silent:
                    self._to_tally(extras)
                else:
                    self._declare_fault_round(silent, extras)
                continue
            return

    def _to_tally(self, extras):
        self.phase = Phase.TALLY
        self.deadline = None
        extras.append(("phase", _json_payload({"phase": "TALLY"})))

    def _declare_fault_round(self, missing: list[str], extras):
        """Open the next repair round for the newly silent participants."""
        self.repair_round += 1
        self.faulty_rounds.append(sorted(missing))
        self.faulty.update(missing)
        extras.append(("fault_round", _json_payload(
            {"round": self.repair_round, "faulty": sorted(missing)})))
        if len(self.surviving_voters()) < 3:
            self.infeasible = True
            self.phase = Phase.CLOSED
            self.deadline = None
            extras.append(("infeasible", _json_payload(
                {"survivors": len(self.surviving_voters())})))
            return
        self.phase = Phase.FAULT_REPAIR
        self.deadline = self.clock + self.config.repair_ticks

    # -- views ---------------------------------------------------------------

    def surviving_voters(self) -> list[str]:
        return [s for s in self.roster if s in self.votes and s not in self.faulty]

    def surviving_votes(self) -> list[BlindedVote]:
        return [self.votes[s] for s in self.surviving_voters()]

    def effective_count(self) -> int:
        return len(self.surviving_voters())

    def current_faulty_indices(self) -> list[int]:
        if not self.repair_round:
            return []
        return sorted(self.index_of[s]
                      for s in self.faulty_rounds[self.repair_round - 1])

    def state_digest(self) -> str:
        """SHA-256 over the canonical dump of the full board state."""
        enc = lambda el: self.grp.canonical_bytes(el).hex()
        state = {
            "genesis": hashlib.sha256(self._genesis_payload).hexdigest(),
            "phase": self.phase.value,
            "clock": self.clock,
            "deadline": self.deadline,
            "enrolled": self.enrolled,
            "pubkeys": {s: enc(x) for s, x in self.pubkeys.items()},
            "deposits": self.deposits,
            "roster": self.roster,
            "mpc": [enc(h) for h in self.mpc_keys],
            "votes": {s: {"B": enc(v.value), "repaired": list(v.repaired_for)}
                      for s, v in self.votes.items()},
            "faulty_rounds": self.faulty_rounds,
            "repaired_round": self.repaired_round,
            "repair_round": self.repair_round,
            "result": list(self.result) if self.result is not None else None,
            "infeasible": self.infeasible,
            "settled": self.settled,
            "records": len(self.records),
            "chain": self._prev,
        }
        return hashlib.sha256(_json_payload(state)).hexdigest()


def _decode_json(payload: bytes) -> dict:
    try:
        doc = json.loads(payload.decode())
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise _Reject("malformed payload")
    if not isinstance(doc, dict):
        raise _Reject("malformed payload")
    return doc
