"""Shared exception types.

The CLI maps these onto exit codes: InputError -> 1, WindowExceededError
-> 2, PropertyViolationError -> 3, UnsupportedConfigurationError -> 4.
"""


class KmkitError(Exception):
    """Base class for all toolkit errors."""


class InputError(KmkitError):
    """Malformed or invalid input data.

    Carries an optional machine-readable ``detail`` dict (e.g. the violated
    GCM axiom with its row/column).
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail or {}


class WindowExceededError(KmkitError):
    """A computation escaped the configured height/length/size window."""


class PropertyViolationError(KmkitError):
    """A mathematical property that should hold was found violated.

    Used both for internal defects surfaced deliberately and for genuine
    findings (e.g. a homology-vanishing counterexample); callers decide
    which it is.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedConfigurationError(KmkitError):
    """The requested configuration has no implemented backend."""


class IntegralityDefect(PropertyViolationError):
    """An operation over Z produced a non-integer where integrality was asserted."""
