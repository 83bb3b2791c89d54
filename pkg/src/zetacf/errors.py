"""Exception hierarchy shared by every module."""


class ZetaError(Exception):
    """Base class for all errors raised by zetacf."""


class ParseError(ZetaError, ValueError):
    """Malformed numeral or hex-dyadic text."""


class DomainError(ZetaError, ValueError):
    """Argument outside the region where the evaluation is defined or certifiable."""


class ResourceError(ZetaError):
    """A configured cap (working bits, terms, time, exponent range) was exceeded."""


class ContractError(ZetaError):
    """A caller-supplied magnitude hint or a precision schedule was violated."""
