"""Exception hierarchy.

Every error carries a machine-readable ``code`` (used by the CLI for its
single-line error report) and an ``exit_status`` following the CLI taxonomy:
1 for malformed input, 2 for failed certificates, 3 for geometric
obstructions.
"""


class SchottkyError(Exception):
    code = "ERROR"
    exit_status = 1


class RankAmbiguous(SchottkyError):
    code = "RANK_AMBIGUOUS"


class NotDiagonalizable(SchottkyError):
    code = "NOT_DIAGONALIZABLE"


class BranchCut(SchottkyError):
    code = "BRANCH_CUT"


class UnsupportedType(SchottkyError):
    code = "UNSUPPORTED_TYPE"


class NotARoot(SchottkyError):
    code = "NOT_A_ROOT"


class UnsupportedRealForm(SchottkyError):
    code = "UNSUPPORTED_REAL_FORM"

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class RealityViolated(SchottkyError):
    code = "REALITY_VIOLATED"


class AnchorSingularity(SchottkyError):
    code = "ANCHOR_SINGULARITY"


class FormViolation(SchottkyError):
    code = "FORM_VIOLATION"


class ParityObstruction(SchottkyError):
    code = "PARITY_OBSTRUCTION"
    exit_status = 3


class MaxAttemptsExceeded(SchottkyError):
    code = "MAX_ATTEMPTS_EXCEEDED"
    exit_status = 3


class SeparationFailure(SchottkyError):
    code = "SEPARATION_FAILURE"
    exit_status = 3


class CertificateFailed(SchottkyError):
    code = "CERTIFICATE_FAILED"
    exit_status = 2

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class SamplingStarved(SchottkyError):
    code = "SAMPLING_STARVED"


class MapUndefined(SchottkyError):
    code = "MAP_UNDEFINED"
