from evaluation.exceptions import ParamError, VerificationError, handle_command_error
from evaluation.ffield import enumerate_subfield
from evaluation.management.base import EvaluationCommand
from evaluation.pevds import ds_choose_params
from evaluation.rigidity import (
    build_w_block,
    certify_factorization,
    factor_vandermonde,
    kronecker_split,
    toy_block_split,
    vandermonde_split,
)
from evaluation.serializers import (
    GeneratorsSerializer,
    SplitFactorsSerializer,
    load_record,
)


class Command(EvaluationCommand):
    """
    Management command to factor a Vandermonde matrix and certify the
    factors, or to check a Kronecker low-rank plus sparse split.

    Modes:
        - ``--generators FILE [--d D --m M] [--toy-split T]``
        - ``--split FILE``
    Exits nonzero when a claim fails.
    """

    help = "Factors Vandermonde matrices and certifies rank/sparsity claims"

    def add_arguments(self, parser):
        mode = parser.add_mutually_exclusive_group(required=True)
        mode.add_argument("--generators", help="Generators JSON file")
        mode.add_argument("--split", help="Split factors JSON file")
        parser.add_argument("--d", type=int)
        parser.add_argument("--m", type=int)
        parser.add_argument(
            "--toy-split",
            type=int,
            dest="toy_split",
            help="Also split W with the toy block split at this threshold",
        )
        parser.add_argument("--threads", type=int)

    def handle(self, *args, **options):
        try:
            if options["generators"]:
                lines, passed = self.factor(options)
            else:
                lines, passed = self.split(options)
            for line in lines:
                self.stdout.write(line)
            if not passed:
                raise VerificationError("a certified claim failed")
        except Exception as exc:
            raise handle_command_error(exc) from exc

    def factor(self, options):
        tower, generators = load_record(GeneratorsSerializer, options["generators"])
        n = len(generators)
        d, m = options["d"], options["m"]
        if d is None and m is None:
            params = ds_choose_params(max(n, 2))
            d, m = params.d, params.m
        elif d is None or m is None:
            raise ParamError("--d and --m must be given together")
        factored = factor_vandermonde(tower, generators, d, m, options["threads"])
        report = certify_factorization(factored)
        lines = [
            f"n={n} d={d} m={m} b={factored.b}",
            f"gamma_cells={factored.gamma.cols}",
            "identity=pass",
            *report["gamma"].lines("gamma."),
            *report["vandermonde"].lines("vandermonde."),
            f"itilde={'pass' if report['itilde'] else 'fail'}",
            f"expanded_row_sparsity={report['expanded_row_sparsity']}",
        ]
        passed = report["gamma"].passed and report["vandermonde"].passed
        passed = passed and report["itilde"]
        if options["toy_split"] is not None:
            ext = factored.ext
            S = enumerate_subfield(ext, tower.p, factored.b)
            block = build_w_block(ext, S, d)
            result = vandermonde_split(
                factored, toy_block_split(block), options["toy_split"]
            )
            low, sparse = result.certify()
            split_low, split_sparse = result.split.certify()
            lines += [f"t={options['toy_split']}"]
            lines += split_low.lines("w_low.") + split_sparse.lines("w_sparse.")
            lines += low.lines("v_low.") + sparse.lines("v_sparse.")
            passed = passed and all(
                c.passed for c in (low, sparse, split_low, split_sparse)
            )
        return lines, passed

    def split(self, options):
        _, pairs, t = load_record(SplitFactorsSerializer, options["split"])
        result = kronecker_split(pairs, t)
        low, sparse = result.certify()
        lines = [f"m={len(pairs)} t={t}", "sum=pass"]
        lines += low.lines("low.") + sparse.lines("sparse.")
        return lines, low.passed and sparse.passed
