import json

from rest_framework import serializers

from evaluation.exceptions import ParamError, ParseError, handle_command_error
from evaluation.management.base import EvaluationCommand
from evaluation.pevds import (
    AccessLog,
    KroneckerParams,
    ds_build,
    ds_choose_params,
    ds_load,
    ds_query,
    ds_save,
)
from evaluation.serializers import UniPolynomialSerializer, check_element, load_record


def parse_point(text, tower):
    """Parse ``--point`` (a JSON list of a integers) into an F_q element."""
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"point: invalid JSON: {exc.msg}") from exc
    if not isinstance(value, list) or not all(
        isinstance(c, int) and c >= 0 for c in value
    ):
        raise ParseError("point: expected a list of non-negative integers")
    try:
        check_element(value, tower.p, tower.a)
    except serializers.ValidationError as exc:
        raise ParseError(f"point: {exc.detail[0]}") from exc
    return tower.fq.from_ints(value)


class Command(EvaluationCommand):
    """
    Management command for the univariate evaluation data structure.

    - ``build`` preprocesses a polynomial file into a binary table.
    - ``query`` evaluates the stored polynomial at one F_q element; the
      number of distinct cells read goes to stderr.
    """

    help = "Builds or queries the polynomial evaluation data structure"

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest="action", required=True)

        build = sub.add_parser("build", help="Preprocess a polynomial")
        build.add_argument("--poly", required=True)
        build.add_argument("--out", required=True)
        build.add_argument("--d", type=int)
        build.add_argument("--m", type=int)
        build.add_argument("--threads", type=int)
        self.report_usage_errors(build, root=parser)

        query = sub.add_parser("query", help="Evaluate at one point")
        query.add_argument("--ds", required=True)
        query.add_argument("--point", required=True)
        query.add_argument(
            "--poly", help="Original polynomial; enables the integrity check"
        )
        query.add_argument("--seed", type=int)
        self.report_usage_errors(query, root=parser)

    def handle(self, *args, **options):
        try:
            if options["action"] == "build":
                self.build(options)
            else:
                self.query(options)
        except Exception as exc:
            raise handle_command_error(exc) from exc

    def build(self, options):
        tower, f, n = load_record(UniPolynomialSerializer, options["poly"])
        d, m = options["d"], options["m"]
        if (d is None) != (m is None):
            raise ParamError("--d and --m must be given together")
        params = ds_choose_params(n) if d is None else KroneckerParams(n, m, d)
        ds = ds_build(f, params, tower, options["threads"])
        size = ds_save(ds, options["out"])
        for key, value in ds.space_report().items():
            self.stdout.write(f"{key}={value}")
        self.stdout.write(f"bytes={size}")

    def query(self, options):
        f = None
        if options["poly"]:
            _, f, _ = load_record(UniPolynomialSerializer, options["poly"])
        ds = ds_load(options["ds"], f=f, seed=options["seed"])
        alpha = parse_point(options["point"], ds.tower)
        log = AccessLog()
        value = ds_query(ds, alpha, log)
        self.stdout.write(json.dumps(ds.tower.fq.to_ints(value)))
        self.stderr.write(f"cells_read={log.last}")
