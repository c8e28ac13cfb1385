import logging
import sys

from django.core.management.base import CommandError

logger = logging.getLogger("evaluation")

EXIT_PARSE = 2
EXIT_PARAMETER = 3
EXIT_INTERNAL = 4


class MultipointError(Exception):
    """
    Base class for every error raised by the evaluation engine.

    Attributes:
        code (int): Process exit code used by the management commands.
    """

    code = EXIT_INTERNAL

    @property
    def kind(self):
        return type(self).__name__


class ParseError(MultipointError):
    """Malformed input file or record."""

    code = EXIT_PARSE


class FormatError(MultipointError):
    """Malformed or truncated data-structure image."""

    code = EXIT_PARSE


class VersionError(MultipointError):
    """Data-structure image with an unknown header version."""

    code = EXIT_PARSE


class ParamError(MultipointError):
    code = EXIT_PARAMETER


class DepthError(ParamError):
    """Descent depth beyond log*_p(a)."""


class DegreeError(ParamError):
    pass


class DimensionError(ParamError):
    pass


class DuplicateNodeError(ParamError):
    pass


class InsufficientDataError(ParamError):
    pass


class IrreducibilityError(ParamError):
    """A supplied modulus failed one of the irreducibility certificates."""


class MembershipError(MultipointError):
    """An element expected in a subfield lies outside it."""


class VerificationError(MultipointError):
    pass


class SingularSystemError(MultipointError):
    pass


class MissingDerivativeError(MultipointError):
    pass


class InternalError(MultipointError):
    """A structural invariant of an algorithm was violated."""


def error_line(exc):
    """
    Render the machine-parsable error line for an exception.

    Args:
        exc (Exception): The error to describe.

    Returns:
        str: ``error code=<N> kind=<Class> message=<text>``.
    """
    if isinstance(exc, MultipointError):
        code, kind = exc.code, exc.kind
    else:
        code, kind = EXIT_INTERNAL, "InternalError"
    message = " ".join(str(exc).split())
    return f"error code={code} kind={kind} message={message}"


def handle_command_error(exc):
    """
    Convert an engine error into a ``CommandError`` with its exit code.

    Engine errors are logged at ERROR level with their kind; anything else
    is treated as an internal failure and logged with its traceback.

    Args:
        exc (Exception): The error raised while running a command.

    Returns:
        CommandError: Error carrying the exit code and the error line.
    """
    line = error_line(exc)
    if isinstance(exc, MultipointError):
        logger.error(line)
        return CommandError(line, returncode=exc.code)

    logger.error(f"Unhandled exception: {exc}", exc_info=True)
    return CommandError(line, returncode=EXIT_INTERNAL)


def usage_error(parser, message):
    """
    Stand-in for ``CommandParser.error`` so that bad command-line arguments
    fail like every other parse error.

    From the shell the usage and the error line go to stderr and the process
    exits with the parse code; under ``call_command`` the ``CommandError``
    is raised instead.
    """
    exc = ParseError(f"usage: {message}")
    error = handle_command_error(exc)
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{error}\n")
        sys.exit(exc.code)
    raise error
