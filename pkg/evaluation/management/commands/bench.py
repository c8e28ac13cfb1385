from django.conf import settings

from evaluation.bench import run_bench
from evaluation.exceptions import handle_command_error
from evaluation.management.base import EvaluationCommand
from evaluation.mme import ALGORITHMS


class Command(EvaluationCommand):
    """
    Management command to compare operation counts of the evaluation
    algorithms on ``N = d^n`` random points for a sweep of degrees.
    """

    help = "Prints the operation-count benchmark table"

    def add_arguments(self, parser):
        parser.add_argument("--seed", type=int)
        parser.add_argument("--p", type=int, default=2)
        parser.add_argument("--a", type=int, default=2)
        parser.add_argument("--n", type=int, default=2)
        parser.add_argument("--degrees", type=int, nargs="+", default=[4, 8, 16])
        parser.add_argument(
            "--algos", nargs="+", choices=ALGORITHMS, default=["naive", "v1"]
        )
        parser.add_argument(
            "--counts",
            type=int,
            nargs="*",
            default=[],
            help="Extra point counts for v1 at the first degree",
        )
        parser.add_argument("--no-timings", action="store_true", dest="no_timings")
        parser.add_argument("--threads", type=int)

    def handle(self, *args, **options):
        seed = options["seed"]
        if seed is None:
            seed = settings.EVALUATION["DEFAULT_SEED"]
        try:
            report = run_bench(
                seed,
                p=options["p"],
                a=options["a"],
                n=options["n"],
                degrees=tuple(options["degrees"]),
                algorithms=tuple(options["algos"]),
                extra_counts=tuple(options["counts"]),
                threads=options["threads"],
            )
        except Exception as exc:
            raise handle_command_error(exc) from exc
        for line in report.lines(timings=not options["no_timings"]):
            self.stdout.write(line)
