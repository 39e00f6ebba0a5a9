"""Self-tallying 1-out-of-k boardroom voting, simulated end to end.

The package wires four layers together: interchangeable group backends
with an operation cost meter, the participant/authority cryptography
(key synchronization, vote blinding, disjunctive membership proofs,
fault-recovery shares), a parallel exhaustive tally search, and an
in-process bulletin board whose transcript is replayable and verifiable.
"""

from .board import Board, BoardConfig, Phase, TxRecord
from .errors import (
    ChoiceRangeError,
    InvalidHintError,
    ParameterOverflowError,
    PrivacyPreconditionError,
    ProtocolError,
    RepairError,
    ScenarioError,
    SelfShareError,
    TallyInfeasibleError,
    TranscriptError,
)
from .groups import (
    EC,
    IA,
    GroupParams,
    OpCounter,
    derive_params,
    format_params_doc,
    make_group,
    parse_params_doc,
    validate_params,
)
from .protocol import (
    BlindedVote,
    EphemeralKeypair,
    MembershipProof,
    MpcKey,
    RecoveryShare,
    blind_vote,
    fiat_shamir_challenge,
    gen_keypair,
    mpc_keys_cached,
    mpc_keys_naive,
    prove_membership,
    prove_pairwise_key,
    repair_blinded_vote,
    verify_membership,
    verify_pairwise_key,
)
from .scenario import RunReport, Scenario, load_scenario, run_scenario
from .tally import (
    TallyResult,
    aggregate_product,
    check_tally,
    count_vectors,
    enumerate_counts,
    search_tally,
)
from .transcript import VerifyResult, verify_transcript, write_transcript

__version__ = "0.1.0"
