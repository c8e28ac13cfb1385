from functools import partial

from django.core.management.base import BaseCommand

from evaluation.exceptions import usage_error


class EvaluationCommand(BaseCommand):
    """
    Base class of the evaluation commands; argument errors report the
    ``error code=2`` line instead of argparse's own message.
    """

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        self.report_usage_errors(parser)
        return parser

    @staticmethod
    def report_usage_errors(parser, root=None):
        """Route ``parser.error``; sub-parsers take the flag of ``root``."""
        if root is not None:
            parser.called_from_command_line = root.called_from_command_line
        parser.error = partial(usage_error, parser)
