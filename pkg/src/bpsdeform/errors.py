"""Exception hierarchy.

Every error carries a short machine-readable ``code`` which the command-line
front end puts in its error envelope.
"""


class BPSError(Exception):
    """Base class for all domain errors raised by the package."""

    code = "bps_error"

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail


class InvalidInput(BPSError, ValueError):
    code = "invalid_input"


class ParseError(BPSError):
    code = "parse_error"


# cpoly
class NonConvergence(BPSError):
    code = "non_convergence"


class DivByNonUnit(BPSError, ZeroDivisionError):
    code = "div_by_non_unit"


class OrderTooLow(BPSError):
    code = "order_too_low"


# hyperelliptic
class InvalidCurve(InvalidInput):
    code = "invalid_curve"


class NotOnCurve(InvalidInput):
    code = "not_on_curve"


class WeierstrassChart(BPSError):
    code = "weierstrass_chart"


class InfinityChart(BPSError):
    code = "infinity_chart"


class UnstableExpansion(BPSError):
    code = "unstable_expansion"


class ZeroDifferential(BPSError):
    code = "zero_differential"


class ZeroForm(BPSError):
    code = "zero_form"


class UnsupportedSupport(BPSError):
    code = "unsupported_support"


# beltrami
class NonInjectiveIsotopy(BPSError):
    code = "non_injective_isotopy"


class BranchPointSingularity(BPSError):
    code = "branch_point_singularity"


class GridTooCoarse(BPSError):
    code = "grid_too_coarse"


# sl2
class ZeroTheta(BPSError):
    code = "zero_theta"


class StepFailure(BPSError):
    code = "step_failure"


class SheetMismatch(BPSError):
    code = "sheet_mismatch"


class InvalidPath(InvalidInput):
    code = "invalid_path"


# critical
class InvalidConfig(InvalidInput):
    code = "invalid_config"


class DegenerateConfig(BPSError):
    code = "degenerate_config"


class UnexpectedKernelDim(BPSError):
    code = "unexpected_kernel_dim"
