from evaluation.exceptions import VerificationError, handle_command_error
from evaluation.management.base import EvaluationCommand
from evaluation.suite import run_selftest, suite_options


class Command(EvaluationCommand):
    """
    Management command to run the seeded property suite.

    Prints one line per property and exits nonzero naming the first
    failing property. Output depends only on the seed and suite options.
    """

    help = "Runs the seeded invariant suite"

    def add_arguments(self, parser):
        parser.add_argument("--seed", type=int)
        parser.add_argument("--size", type=int, help="Oracle suite instances")
        parser.add_argument("--work-limit", type=int, dest="work_limit")

    def handle(self, *args, **options):
        defaults = suite_options()
        seed = defaults["seed"] if options["seed"] is None else options["seed"]
        try:
            results = run_selftest(seed, options["size"], options["work_limit"])
        except Exception as exc:
            raise handle_command_error(exc) from exc

        self.stdout.write(f"selftest seed={seed}")
        for result in results:
            self.stdout.write(result.line())
        failed = [result for result in results if not result.passed]
        if failed:
            raise handle_command_error(
                VerificationError(f"property {failed[0].name} failed")
            )
        self.stdout.write(self.style.SUCCESS("selftest status=pass"))
