"""Exception types shared across the package."""


class ProtocolError(Exception):
    """Base class for protocol-level failures."""


class PrivacyPreconditionError(ProtocolError):
    """Fewer than three participants; vote privacy cannot hold."""


class ParameterOverflowError(ProtocolError):
    """Requested (n, k) does not fit the exponent budget of the group."""


class ChoiceRangeError(ProtocolError):
    """Vote choice outside 1..k."""


class SelfShareError(ProtocolError):
    """A participant asked for a pairwise key with herself."""


class RepairError(ProtocolError):
    """Recovery shares do not match the declared faulty set."""


class InvalidHintError(ProtocolError):
    """A pre-computed field inverse failed its multiplication check."""


class TallyInfeasibleError(ProtocolError):
    """No count vector satisfies the tally equation."""


class ScenarioError(Exception):
    """Scenario file is malformed or violates a consistency rule."""


class TranscriptError(Exception):
    """Transcript file cannot be parsed or replayed."""
