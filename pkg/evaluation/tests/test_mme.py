from django.test import SimpleTestCase
from factory.random import reseed_random

from evaluation.exceptions import DepthError, MissingDerivativeError, ParamError
from evaluation.factories import MmeInstanceFactory, MultiPolyFactory
from evaluation.ffield import FieldTower, enumerate_subfield
from evaluation.mme import (
    DerivativeGrid,
    MmeInstance,
    MmeRun,
    a_sequence,
    default_depth,
    evaluate_derivatives_a,
    evaluate_derivatives_b,
    log_star,
    mme_naive,
    mme_v1,
    mme_v2,
    mme_v3,
    op_report,
    run_algorithm,
    smallest_exponent,
)
from evaluation.poly import (
    Curve,
    MultiPoly,
    compose_on_curve,
    hasse_derivative,
    hasse_set,
    horner_eval,
    uni_hasse,
)


class NaiveEvaluationTestCase(SimpleTestCase):
    """
    Test case for the reference evaluator.
    """

    def test_product_over_f4(self):
        """
        Test x1 * x2 at (Y0, Y0 + 1) over F_4 = F_2[Y]/(Y^2 + Y + 1).

        Expected outcome:
        - Y0^2 + Y0 = 1.
        """
        tower = FieldTower(2, 2)
        fq = tower.fq
        f = MultiPoly(fq, 2, 2)
        f.coeffs[3] = fq.one
        point = (tower.y0, fq.add(tower.y0, fq.one))
        self.assertEqual(mme_naive(MmeInstance(tower, f, [point])), [fq.one])

    def test_sum_over_f2(self):
        """
        Test x1 + x2 at (1, 1) over F_2.

        Expected outcome:
        - The value is zero.
        """
        tower = FieldTower(2, 1)
        fq = tower.fq
        f = MultiPoly(fq, 2, 2, [fq.zero, fq.one, fq.one, fq.zero])
        self.assertEqual(
            mme_naive(MmeInstance(tower, f, [(fq.one, fq.one)])), [fq.zero]
        )

    def test_point_dimension_checked(self):
        """
        Test a point with the wrong number of coordinates.

        Expected outcome:
        - ParamError.
        """
        tower = FieldTower(2, 2)
        f = MultiPoly(tower.fq, 2, 2)
        with self.assertRaises(ParamError):
            MmeInstance(tower, f, [(tower.y0,)])


class AlgorithmAgreementTestCase(SimpleTestCase):
    """
    Test case comparing every algorithm with the naive evaluator.
    """

    def setUp(self):
        reseed_random(101)

    def assertAgrees(self, inst, algorithms=("v1", "v2", "v3")):
        expected = mme_naive(inst)
        for algorithm in algorithms:
            results, _ = run_algorithm(inst, algorithm)
            self.assertEqual(results, expected, msg=f"{algorithm} on {inst!r}")

    def test_small_fields(self):
        """
        Test random instances over F_4 and F_9.

        Expected outcome:
        - v1, v2 and v3 return the naive values.
        """
        self.assertAgrees(
            MmeInstanceFactory(tower=FieldTower(2, 2), n=2, d=2, N=7)
        )
        self.assertAgrees(
            MmeInstanceFactory(tower=FieldTower(3, 2), n=2, d=3, N=5)
        )

    def test_regime_case(self):
        """
        Test p = 2, a = 3, n = 3, d = 2 with six points.

        Expected outcome:
        - All algorithms agree with naive evaluation.
        """
        self.assertAgrees(
            MmeInstanceFactory(tower=FieldTower(2, 3), n=3, d=2, N=6)
        )

    def test_univariate(self):
        """
        Test n = 1, where the curve is the point itself.

        Expected outcome:
        - Agreement with naive evaluation.
        """
        self.assertAgrees(
            MmeInstanceFactory(tower=FieldTower(5, 1), n=1, d=4, N=5)
        )

    def test_constant_polynomial(self):
        """
        Test d = 1.

        Expected outcome:
        - Every algorithm returns the constant coefficient.
        """
        tower = FieldTower(3, 2)
        f = MultiPoly(tower.fq, 2, 1, [tower.y0])
        inst = MmeInstanceFactory(tower=tower, f=f, n=2, d=1, N=3)
        for algorithm in ("naive", "v1", "v2", "v3"):
            results, _ = run_algorithm(inst, algorithm)
            self.assertEqual(results, [tower.y0] * 3)

    def test_repeated_points(self):
        """
        Test a point list with duplicates.

        Expected outcome:
        - One value per input point, in input order.
        """
        inst = MmeInstanceFactory(tower=FieldTower(2, 2), n=2, d=2, N=3)
        inst.points = inst.points + inst.points[::-1]
        self.assertAgrees(inst, ("v3",))

    def test_v3_depth_one(self):
        """
        Test the descent with one intermediate level.

        Expected outcome:
        - Over F_4 the sequence (2, 3, 3) is accepted and results agree.
        - Over F_256 with d = 2 the sequence is (8, 5, 4) and results agree.
        """
        inst = MmeInstanceFactory(tower=FieldTower(2, 2), n=2, d=2, N=4)
        run = MmeRun("v3")
        self.assertEqual(mme_v3(inst, ell=1, run=run), mme_naive(inst))
        self.assertEqual(run.info["a_seq"], "2,3,3")

        inst = MmeInstanceFactory(tower=FieldTower(2, 8), n=2, d=2, N=3)
        run = MmeRun("v3")
        self.assertEqual(mme_v3(inst, ell=1, run=run), mme_naive(inst))
        self.assertEqual(run.info["a_seq"], "8,5,4")
        sizes = [int(x) for x in run.info["points_sizes"].split(",")]
        self.assertEqual(sizes[0], 3)
        self.assertLessEqual(sizes[1], 3 * 2**5)

    def test_threads_do_not_change_counts(self):
        """
        Test v2 with one and with three worker threads.

        Expected outcome:
        - Equal results and equal operation reports.
        """
        inst = MmeInstanceFactory(tower=FieldTower(2, 2), n=2, d=3, N=6)
        serial, serial_run = run_algorithm(inst, "v2", threads=1)
        pooled, pooled_run = run_algorithm(inst, "v2", threads=3)
        self.assertEqual(serial, pooled)
        self.assertEqual(op_report(serial_run), op_report(pooled_run))


class OperationReportTestCase(SimpleTestCase):
    """
    Test case for the split of counts into preprocessing and local work.
    """

    def setUp(self):
        reseed_random(7)
        self.tower = FieldTower(2, 2)
        self.f = MultiPolyFactory(tower=self.tower, n=2, d=2)

    def test_empty_point_list(self):
        """
        Test N = 0.

        Expected outcome:
        - Every algorithm returns an empty list and charges nothing.
        """
        inst = MmeInstance(self.tower, self.f, [])
        for algorithm in ("naive", "v1", "v2", "v3"):
            results, run = run_algorithm(inst, algorithm)
            self.assertEqual(results, [])
            self.assertEqual(op_report(run)["total"], 0)

    def test_preprocessing_independent_of_points(self):
        """
        Test v1 on two and on five points of one polynomial.

        Expected outcome:
        - Equal preprocessing counts, larger local count for more points.
        """
        few = MmeInstanceFactory(tower=self.tower, f=self.f, n=2, d=2, N=2)
        many = MmeInstanceFactory(tower=self.tower, f=self.f, n=2, d=2, N=5)
        _, few_run = run_algorithm(few, "v1")
        _, many_run = run_algorithm(many, "v1")
        few_report, many_report = op_report(few_run), op_report(many_run)
        self.assertEqual(
            few_report["preprocessing.total"], many_report["preprocessing.total"]
        )
        self.assertGreater(few_report["preprocessing.total"], 0)
        self.assertLess(few_report["local.total"], many_report["local.total"])
        self.assertEqual(few_report["b"], smallest_exponent(2, 2 * 2 * 2))

    def test_naive_is_all_local(self):
        """
        Test the naive report.

        Expected outcome:
        - Zero preprocessing; the total equals the local count.
        """
        inst = MmeInstanceFactory(tower=self.tower, f=self.f, n=2, d=2, N=3)
        _, run = run_algorithm(inst, "naive")
        report = op_report(run)
        self.assertEqual(report["preprocessing.total"], 0)
        self.assertEqual(report["total"], report["local.total"])

    def test_depth_only_for_v3(self):
        """
        Test passing a depth to another algorithm or an unknown name.

        Expected outcome:
        - ParamError in both cases.
        """
        inst = MmeInstance(self.tower, self.f, [])
        with self.assertRaises(ParamError):
            run_algorithm(inst, "v1", ell=0)
        with self.assertRaises(ParamError):
            run_algorithm(inst, "v9")


class DescentParametersTestCase(SimpleTestCase):
    """
    Test case for the a-sequence and depth selection.
    """

    def test_a_sequence(self):
        """
        Test p = 2, a = 8, d = 2.

        Expected outcome:
        - log*_2(8) = 3 and the sequence at depth 2 is (8, 5, 4, 4).
        """
        self.assertEqual(log_star(2, 8), 3)
        self.assertEqual(a_sequence(8, 2, 2, 2), (8, 5, 4, 4))
        self.assertEqual(a_sequence(8, 2, 2, 0), (8, 5))

    def test_depth_out_of_range(self):
        """
        Test depths outside [0, log*_p(a)].

        Expected outcome:
        - DepthError, which is a ParamError.
        """
        with self.assertRaises(DepthError):
            a_sequence(8, 2, 2, 4)
        with self.assertRaises(ParamError):
            a_sequence(8, 2, 2, -1)

    def test_default_depth(self):
        """
        Test the automatic depth.

        Expected outcome:
        - One level for a = 8, none for a = 2 and a = 3.
        """
        self.assertEqual(default_depth(2, 8, 2), 1)
        self.assertEqual(default_depth(2, 2, 2), 0)
        self.assertEqual(default_depth(2, 3, 2), 0)

    def test_v3_rejects_deep_request(self):
        """
        Test mme_v3 with a depth beyond log*.

        Expected outcome:
        - DepthError before any work.
        """
        tower = FieldTower(2, 2)
        inst = MmeInstance(tower, MultiPoly(tower.fq, 1, 2), [])
        with self.assertRaises(DepthError):
            mme_v3(inst, ell=2)


class CurveDerivativesTestCase(SimpleTestCase):
    """
    Test case for derivatives of a polynomial restricted to a curve.
    """

    def setUp(self):
        reseed_random(59)
        self.tower = FieldTower(2, 2)
        self.ext = self.tower.extension(2)
        self.S = enumerate_subfield(self.ext, 2, 2)
        ext = self.ext
        self.curve = Curve.from_coordinates(
            ext, [[ext.one, ext.one], [ext.zero, ext.one, ext.one]]
        )

    def test_evaluate_derivatives_a(self):
        """
        Test the Taylor-based derivatives of f o g against direct expansion.

        Expected outcome:
        - Row k at every node is the order-k Hasse derivative of f(g(t)).
        """
        f = MultiPolyFactory(tower=self.tower, n=2, d=3)
        grid = DerivativeGrid.build(hasse_set(f, 1), self.ext, self.S, 1)
        h = compose_on_curve(f.embed(self.ext), self.curve)
        rows = evaluate_derivatives_a(self.curve, grid)
        for gamma, row in zip(self.S, rows):
            self.assertEqual(
                row, [horner_eval(uni_hasse(h, k), gamma) for k in range(2)]
            )

    def test_evaluate_derivatives_b(self):
        """
        Test derivatives of d_e f o g with e = (1, 0) over characteristic 2.

        Expected outcome:
        - The rows match direct expansion, including the order where
          binom(2, 1) = 0 removes a term.
        """
        f = MultiPolyFactory(tower=self.tower, n=2, d=3)
        grid = DerivativeGrid.build(hasse_set(f, 2), self.ext, self.S, 2)
        g = hasse_derivative(f, (1, 0)).embed(self.ext)
        h = compose_on_curve(g, self.curve)
        rows = evaluate_derivatives_b(self.curve, (1, 0), grid)
        for gamma, row in zip(self.S, rows):
            self.assertEqual(
                row, [horner_eval(uni_hasse(h, k), gamma) for k in range(2)]
            )

    def test_missing_derivative(self):
        """
        Test a grid without the derivatives of order one.

        Expected outcome:
        - MissingDerivativeError.
        """
        f = MultiPolyFactory(tower=self.tower, n=2, d=3)
        grid = DerivativeGrid.build(hasse_set(f, 0), self.ext, self.S, 0)
        with self.assertRaises(MissingDerivativeError):
            evaluate_derivatives_a(self.curve, grid)

    def test_v1_and_v2_use_distinct_grids(self):
        """
        Test the grid parameters of v1 and v2 on one instance.

        Expected outcome:
        - v2 tabulates over a smaller subfield than v1.
        """
        inst = MmeInstanceFactory(tower=self.tower, n=2, d=2, N=1)
        run1, run2 = MmeRun("v1"), MmeRun("v2")
        mme_v1(inst, run1)
        mme_v2(inst, run2)
        self.assertEqual(run1.info["b"], 4)
        self.assertEqual(run2.info["b"], 3)
