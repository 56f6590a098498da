"""Exception hierarchy shared by all modules.

Every numeric precondition failure raised by the toolkit derives from
:class:`ToolkitError`; the experiment runner maps these to exit status 3.
"""


class ToolkitError(Exception):
    """Base class for numeric precondition and resource failures."""


class DomainError(ToolkitError, ValueError):
    """Argument outside the domain of a function."""


class PreconditionError(ToolkitError, ValueError):
    """A documented hypothesis of an operation is not met."""


class RangeError(ToolkitError):
    """A search interval could not be widened enough to contain the answer."""


class ConstructionError(ToolkitError):
    """A multi-step construction failed at an identifiable step."""


class SingularityError(ToolkitError, ZeroDivisionError):
    """Evaluation hit a pole or a vanishing denominator."""


class ResourceError(ToolkitError):
    """The requested object would exceed a size or grid budget."""


class CapError(ResourceError):
    """A degree cap would be exceeded."""


class PrecisionError(ToolkitError):
    """Floating point cannot deliver the requested accuracy."""


class AccuracyWarning(UserWarning):
    """A result was produced but may not meet its stated accuracy."""
