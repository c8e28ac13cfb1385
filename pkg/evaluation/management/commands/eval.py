import json

from evaluation.exceptions import handle_command_error
from evaluation.management.base import EvaluationCommand
from evaluation.mme import ALGORITHMS, format_report, op_report, run_algorithm
from evaluation.serializers import InstanceSerializer, load_record


class Command(EvaluationCommand):
    """
    Management command to evaluate a polynomial at the points of an
    instance file with one of the evaluation algorithms.

    Results are written as ``{"results": [...]}`` with one coordinate list
    per point, to ``--out`` or to stdout. With ``--stats`` the operation
    report follows on stdout when ``--out`` is given and on stderr
    otherwise.
    """

    help = "Evaluates a polynomial at every point of an instance file"

    def add_arguments(self, parser):
        parser.add_argument("--input", required=True, help="Instance JSON file")
        parser.add_argument("--algo", choices=ALGORITHMS, default="v1")
        parser.add_argument("--ell", type=int, help="Descent depth (v3 only)")
        parser.add_argument("--stats", action="store_true")
        parser.add_argument("--out", help="Results file")
        parser.add_argument("--threads", type=int)

    def handle(self, *args, **options):
        try:
            inst = load_record(InstanceSerializer, options["input"])
            results, run = run_algorithm(
                inst, options["algo"], options["ell"], options["threads"]
            )
        except Exception as exc:
            raise handle_command_error(exc) from exc

        fq = inst.tower.fq
        payload = json.dumps({"results": [fq.to_ints(x) for x in results]}) + "\n"
        if options["out"]:
            with open(options["out"], "w") as handle:
                handle.write(payload)
            stats_stream = self.stdout
        else:
            self.stdout.write(payload, ending="")
            stats_stream = self.stderr
        if options["stats"]:
            stats_stream.write(format_report(op_report(run)), ending="")
