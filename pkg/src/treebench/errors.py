"""Exception hierarchy shared by all workbench modules."""


class WorkbenchError(Exception):
    """Base class for all treebench errors."""


class MalformedStructureError(WorkbenchError):
    """A structure's tables or sort map reference elements outside its domain."""


class SignatureMismatchError(WorkbenchError):
    """Two structures that must share a signature do not."""


class OverlapError(WorkbenchError):
    """The element-set overlap of two structures is not the expected base."""


class PreconditionError(WorkbenchError):
    """An operation's structural precondition does not hold for the inputs."""


class HypothesisError(WorkbenchError):
    """The coloring/ordering hypothesis licensing an amalgam fails.

    This is the mathematically meaningful failure mode of the two-sided
    amalgam: the construction is only available when every cross pair of
    levels carries color 1.
    """


class TypeMismatchError(WorkbenchError):
    """The designated tuples do not induce the required isomorphism."""


class UnsupportedCaseError(WorkbenchError):
    """The input falls outside the cases the operation is defined for."""


class UnsupportedShapeError(WorkbenchError):
    """A pattern row does not match any of the supported formula shapes."""


class MalformedPatternError(WorkbenchError):
    """A pattern references addresses or parameters that are missing."""


class BudgetError(WorkbenchError):
    """A configured search or size budget was exceeded.

    Carries whatever partial progress information the operation can report.
    """

    def __init__(self, message, progress=None):
        super().__init__(message)
        self.progress = progress


class FormatError(WorkbenchError):
    """A JSON input file does not conform to its documented format."""
