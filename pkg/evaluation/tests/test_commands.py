import json
import os
import tempfile
from io import StringIO
from unittest import mock

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from evaluation.bench import BenchReport
from evaluation.suite import PropertyResult
from evaluation.tests.test_serializers import instance_record


class CommandTestCase(SimpleTestCase):
    """
    Base test case that runs management commands inside a scratch directory.
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def write_json(self, name, data):
        with open(self.path(name), "w") as handle:
            json.dump(data, handle)
        return self.path(name)

    def run_command(self, *args):
        out, err = StringIO(), StringIO()
        call_command(*args, stdout=out, stderr=err, no_color=True)
        return out.getvalue(), err.getvalue()

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as caught:
            self.run_command(*args)
        self.assertEqual(caught.exception.returncode, code)
        self.assertTrue(str(caught.exception).startswith(f"error code={code} "))
        return str(caught.exception)


class EvalCommandTestCase(CommandTestCase):
    """
    Test case for the ``eval`` command.
    """

    def test_algorithms_agree(self):
        """
        Test x1 * x2 at (Y0, Y0 + 1) with naive and v1.

        Expected outcome:
        - Both print {"results": [[1, 0]]}.
        """
        source = self.write_json("instance.json", instance_record())
        naive, _ = self.run_command("eval", "--input", source, "--algo", "naive")
        v1, _ = self.run_command("eval", "--input", source, "--algo", "v1")
        self.assertEqual(json.loads(naive), {"results": [[1, 0]]})
        self.assertEqual(naive, v1)

    def test_stats_with_out_file(self):
        """
        Test --stats together with --out.

        Expected outcome:
        - Results go to the file and the report to stdout.
        """
        source = self.write_json("instance.json", instance_record())
        target = self.path("results.json")
        out, _ = self.run_command(
            "eval", "--input", source, "--algo", "v2", "--stats", "--out", target
        )
        with open(target) as handle:
            self.assertEqual(json.load(handle), {"results": [[1, 0]]})
        self.assertIn("algorithm=v2\n", out)
        self.assertIn("preprocessing.total=", out)

    def test_stats_without_out_file(self):
        """
        Test --stats without --out.

        Expected outcome:
        - Results on stdout, the report on stderr.
        """
        source = self.write_json("instance.json", instance_record())
        out, err = self.run_command("eval", "--input", source, "--stats")
        self.assertEqual(json.loads(out), {"results": [[1, 0]]})
        self.assertIn("total=", err)

    def test_empty_points(self):
        """
        Test an instance without points.

        Expected outcome:
        - An empty result list.
        """
        source = self.write_json("instance.json", instance_record(points=[]))
        out, _ = self.run_command("eval", "--input", source, "--algo", "v3")
        self.assertEqual(json.loads(out), {"results": []})

    def test_error_codes(self):
        """
        Test parse, parameter and depth failures.

        Expected outcome:
        - Missing file and bad coordinates exit with 2.
        - A reducible modulus and a depth for v1 exit with 3.
        """
        self.assertExitCode(2, "eval", "--input", self.path("missing.json"))
        bad = self.write_json(
            "bad.json", instance_record(points=[[[0, 2], [1, 1]]])
        )
        self.assertExitCode(2, "eval", "--input", bad)
        reducible = self.write_json(
            "reducible.json", instance_record(modulus=[1, 0, 1])
        )
        message = self.assertExitCode(3, "eval", "--input", reducible)
        self.assertIn("kind=IrreducibilityError", message)
        source = self.write_json("instance.json", instance_record())
        self.assertExitCode(3, "eval", "--input", source, "--algo", "v1", "--ell", "0")


class DataStructureCommandTestCase(CommandTestCase):
    """
    Test case for the ``ds`` command.
    """

    def setUp(self):
        super().setUp()
        # f = 1 + Y0 X over F_4, n = 4
        self.poly = self.write_json(
            "poly.json",
            {"field": {"p": 2, "a": 2}, "coeffs": [[1, 0], [0, 1]], "n": 4},
        )
        self.table = self.path("poly.ds")
        out, _ = self.run_command(
            "ds", "build", "--poly", self.poly, "--out", self.table
        )
        self.build_output = out

    def test_build_report(self):
        """
        Test the space report of the build.

        Expected outcome:
        - m = 1, d = 4, b = 4 and 16 cells; the byte count matches the file.
        """
        lines = self.build_output.splitlines()
        self.assertIn("m=1", lines)
        self.assertIn("d=4", lines)
        self.assertIn("b=4", lines)
        self.assertIn("cells=16", lines)
        self.assertIn(f"bytes={os.path.getsize(self.table)}", lines)

    def test_query(self):
        """
        Test f(Y0) = 1 + Y0^2 = Y0 and f(1) = 1 + Y0.

        Expected outcome:
        - The values on stdout and the cell count on stderr.
        """
        out, err = self.run_command(
            "ds", "query", "--ds", self.table, "--point", "[0, 1]"
        )
        self.assertEqual(json.loads(out), [0, 1])
        self.assertTrue(err.startswith("cells_read="))
        out, _ = self.run_command(
            "ds", "query", "--ds", self.table, "--point", "[1, 0]",
            "--poly", self.poly, "--seed", "1",
        )
        self.assertEqual(json.loads(out), [1, 1])

    def test_query_errors(self):
        """
        Test a bad point and a truncated table.

        Expected outcome:
        - Exit code 2 in both cases.
        """
        self.assertExitCode(
            2, "ds", "query", "--ds", self.table, "--point", "[0, 2]"
        )
        with open(self.table, "rb") as handle:
            data = handle.read()
        broken = self.path("broken.ds")
        with open(broken, "wb") as handle:
            handle.write(data[:-3])
        message = self.assertExitCode(
            2, "ds", "query", "--ds", broken, "--point", "[0, 1]"
        )
        self.assertIn("kind=FormatError", message)

    def test_mismatched_shape(self):
        """
        Test --d without --m, and d^m below n.

        Expected outcome:
        - Exit code 3.
        """
        out = self.path("other.ds")
        self.assertExitCode(
            3, "ds", "build", "--poly", self.poly, "--out", out, "--d", "2"
        )
        self.assertExitCode(
            3, "ds", "build", "--poly", self.poly, "--out", out, "--d", "3",
            "--m", "1",
        )


class RigidityCommandTestCase(CommandTestCase):
    """
    Test case for the ``rigidity`` command.
    """

    def test_factor_and_toy_split(self):
        """
        Test the F_4 generators with d = 2, m = 2 and a toy split.

        Expected outcome:
        - Identity and every certified claim pass.
        """
        source = self.write_json(
            "generators.json",
            {
                "field": {"p": 2, "a": 2},
                "generators": [[0, 0], [1, 0], [0, 1], [1, 1]],
            },
        )
        out, _ = self.run_command(
            "rigidity", "--generators", source, "--d", "2", "--m", "2",
            "--toy-split", "1",
        )
        lines = out.splitlines()
        self.assertIn("n=4 d=2 m=2 b=4", lines)
        self.assertIn("identity=pass", lines)
        self.assertIn("itilde=pass", lines)
        self.assertNotIn("fail", out)

    def test_split_file(self):
        """
        Test a split record with zero low-rank factors and t = 0.

        Expected outcome:
        - The low-rank part is zero and the sum check passes.
        """
        matrix = {"rows": 2, "cols": 2, "entries": [[1], [0], [1], [1]]}
        zero = {"rows": 2, "cols": 2, "entries": [[0], [0], [0], [0]]}
        source = self.write_json(
            "split.json",
            {
                "field": {"p": 2, "a": 1},
                "t": 0,
                "factors": [{"L": zero, "S": matrix}, {"L": zero, "S": matrix}],
            },
        )
        out, _ = self.run_command("rigidity", "--split", source)
        self.assertIn("sum=pass", out.splitlines())
        self.assertIn("low.rank=0", out.splitlines())

    def test_missing_shape_partner(self):
        """
        Test --d without --m.

        Expected outcome:
        - Exit code 3.
        """
        source = self.write_json(
            "generators.json",
            {"field": {"p": 2, "a": 2}, "generators": [[0, 0], [1, 0]]},
        )
        self.assertExitCode(3, "rigidity", "--generators", source, "--d", "2")


class SelftestCommandTestCase(CommandTestCase):
    """
    Test case for the ``selftest`` command.
    """

    def test_small_suite_passes(self):
        """
        Test the suite restricted to the regime instance.

        Expected outcome:
        - Every property passes and the last line reports success.
        """
        out, _ = self.run_command(
            "selftest", "--seed", "7", "--size", "1", "--work-limit", "0"
        )
        lines = out.splitlines()
        self.assertEqual(lines[0], "selftest seed=7")
        self.assertEqual(lines[-1], "selftest status=pass")
        self.assertEqual(len(lines), 9)
        self.assertTrue(all("status=pass" in line for line in lines[1:]))

    def test_failing_property(self):
        """
        Test a suite whose second property fails.

        Expected outcome:
        - Exit code 4 naming the failing property; every line is printed.
        """
        results = [
            PropertyResult("oracle_equivalence", True, "runs=1"),
            PropertyResult("chain_rule", False, "trial=3"),
        ]
        target = "evaluation.management.commands.selftest.run_selftest"
        out = StringIO()
        with mock.patch(target, return_value=results):
            with self.assertRaises(CommandError) as caught:
                call_command("selftest", stdout=out, stderr=StringIO())
        self.assertEqual(caught.exception.returncode, 4)
        self.assertIn("property chain_rule failed", str(caught.exception))
        self.assertIn("property=chain_rule status=fail trial=3", out.getvalue())

    def test_output_is_deterministic(self):
        """
        Test two runs with the same seed.

        Expected outcome:
        - Byte-identical output.
        """
        args = ("selftest", "--seed", "11", "--size", "1", "--work-limit", "0")
        first, _ = self.run_command(*args)
        second, _ = self.run_command(*args)
        self.assertEqual(first, second)


class BenchCommandTestCase(CommandTestCase):
    """
    Test case for the ``bench`` command.
    """

    def test_small_bench(self):
        """
        Test one degree without timings.

        Expected outcome:
        - One row per algorithm, and identical output for equal seeds.
        """
        args = ("bench", "--seed", "3", "--degrees", "4", "--no-timings")
        first, _ = self.run_command(*args)
        second, _ = self.run_command(*args)
        self.assertEqual(first, second)
        self.assertIn("naive", first)
        self.assertIn("v1", first)

    def test_scaling_trends(self):
        """
        Test d in {4, 8, 16} with two extra point counts at d = 4.

        Expected outcome:
        - v1 preprocessing is the same for N = 16, 3 and 50.
        - naive/v1 grows strictly with d, and both checks print pass.
        """
        out, _ = self.run_command(
            "bench", "--seed", "3", "--degrees", "4", "8", "16",
            "--counts", "3", "50", "--no-timings",
        )
        lines = out.splitlines()
        header = lines[1].split()
        rows = [
            dict(zip(header, line.split()))
            for line in lines[2:]
            if line.split()[0] in ("naive", "v1")
        ]
        preprocessing = {
            row["N"]: row["preprocessing"]
            for row in rows
            if row["algorithm"] == "v1" and row["d"] == "4"
        }
        self.assertEqual(sorted(preprocessing, key=int), ["3", "16", "50"])
        self.assertEqual(len(set(preprocessing.values())), 1)

        ratios = [
            float(line.split()[-1]) for line in lines if line.startswith("ratio ")
        ]
        self.assertEqual(len(ratios), 3)
        self.assertTrue(ratios[0] < ratios[1] < ratios[2])
        self.assertIn("check ratio_increasing=pass", lines)
        self.assertIn("check preprocessing_independent_of_N=pass", lines)

    def test_report_checks(self):
        """
        Test the trend checks on hand-made rows.

        Expected outcome:
        - Unequal preprocessing and a falling ratio both fail.
        """
        report = BenchReport(0)
        for algorithm, d, N, pre, total in (
            ("naive", 2, 4, 0, 40),
            ("v1", 2, 4, 10, 20),
            ("naive", 3, 9, 0, 30),
            ("v1", 3, 9, 12, 30),
            ("v1", 3, 2, 13, 20),
        ):
            report.add(
                {
                    "algorithm": algorithm, "d": d, "N": N,
                    "preprocessing": pre, "total": total,
                }
            )
        self.assertFalse(report.ratios_increasing())
        self.assertFalse(report.preprocessing_independent())
        self.assertEqual(
            report.checks(),
            {"ratio_increasing": False, "preprocessing_independent_of_N": False},
        )


class UsageErrorTestCase(CommandTestCase):
    """
    Test case for command-line argument errors.
    """

    def test_usage_errors_exit_with_parse_code(self):
        """
        Test a missing option, an unknown algorithm, a missing sub-command
        and a sub-command without its required option.

        Expected outcome:
        - Exit code 2 with a ParseError line in every case.
        """
        source = self.write_json("instance.json", instance_record())
        for args in (
            ("eval",),
            ("eval", "--input", source, "--algo", "v9"),
            ("ds",),
            ("ds", "query", "--ds", self.path("poly.ds")),
            ("selftest", "--seed", "seven"),
        ):
            message = self.assertExitCode(2, *args)
            self.assertIn("kind=ParseError message=usage:", message)


class SettingsTestCase(SimpleTestCase):
    """
    Test case for the project settings the commands rely on.
    """

    def test_only_command_settings_are_set(self):
        """
        Test which settings the project defines.

        Expected outcome:
        - The evaluation options are set; the HTTP settings keep Django's
          defaults.
        """
        self.assertIn("SUITE_WORK_LIMIT", settings.EVALUATION)
        for name in (
            "ALLOWED_HOSTS",
            "DEBUG",
            "LANGUAGE_CODE",
            "USE_I18N",
            "DEFAULT_AUTO_FIELD",
        ):
            self.assertFalse(settings.is_overridden(name), name)
