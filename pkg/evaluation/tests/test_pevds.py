import io
import struct

from django.test import SimpleTestCase
from factory.random import reseed_random

from evaluation.exceptions import (
    DegreeError,
    FormatError,
    ParamError,
    VerificationError,
    VersionError,
)
from evaluation.factories import UniPolyFactory
from evaluation.ffield import FieldTower, PrimeField
from evaluation.pevds import (
    AccessLog,
    KroneckerParams,
    ds_build,
    ds_choose_params,
    ds_dumps,
    ds_load,
    ds_loads,
    ds_query,
    ds_save,
    inverse_kronecker,
    kronecker_point,
)
from evaluation.poly import UniPoly, horner_eval


class KroneckerTestCase(SimpleTestCase):
    """
    Test case for parameter choice and the inverse Kronecker map.
    """

    def test_choose_params(self):
        """
        Test the (m, d) choice for several degree bounds.

        Expected outcome:
        - n = 16 gives m = 2, d = 4; n = 2 gives m = 1, d = 2;
          n = 256 gives m = 3, d = 7.
        """
        self.assertEqual(ds_choose_params(16), KroneckerParams(16, 2, 4))
        self.assertEqual(ds_choose_params(2), KroneckerParams(2, 1, 2))
        self.assertEqual(ds_choose_params(256), KroneckerParams(256, 3, 7))

    def test_invalid_params(self):
        """
        Test degree bounds that admit no data structure.

        Expected outcome:
        - ParamError for n = 1 and DegreeError when d^m < n.
        """
        with self.assertRaises(ParamError):
            ds_choose_params(1)
        with self.assertRaises(DegreeError):
            KroneckerParams(10, 3, 2)

    def test_inverse_kronecker(self):
        """
        Test f = 1 + 2X + 3X^3 over F_5 with d = 2, m = 2.

        Expected outcome:
        - F = 1 + 2 x1 + 3 x1 x2, so F(X, X^2) = f(X) at every X.
        """
        field = PrimeField(5)
        f = UniPoly(field, [1, 2, 0, 3])
        F = inverse_kronecker(f, 2, 2)
        self.assertEqual(F.coeff((0, 0)), 1)
        self.assertEqual(F.coeff((1, 0)), 2)
        self.assertEqual(F.coeff((1, 1)), 3)
        for x in range(5):
            self.assertEqual(
                F.evaluate(kronecker_point(field, x, 2, 2)), horner_eval(f, x)
            )

    def test_inverse_kronecker_degree(self):
        """
        Test a polynomial of degree d^m.

        Expected outcome:
        - DegreeError.
        """
        f = UniPoly(PrimeField(2), [0, 0, 0, 0, 1])
        with self.assertRaises(DegreeError):
            inverse_kronecker(f, 2, 2)


class DataStructureTestCase(SimpleTestCase):
    """
    Test case for building, querying and serializing the table.
    """

    def setUp(self):
        reseed_random(31)
        self.tower = FieldTower(2, 2)
        self.params = ds_choose_params(16)
        self.f = UniPolyFactory(tower=self.tower, length=16)
        self.ds = ds_build(self.f, self.params, self.tower)

    def test_space_report(self):
        """
        Test the sizes for F_4 and n = 16.

        Expected outcome:
        - b = 5, 1024 cells of width 10, query bound p*a*d*m = 32.
        """
        report = self.ds.space_report()
        self.assertEqual(report["b"], 5)
        self.assertEqual(report["cells"], 1024)
        self.assertEqual(report["element_width"], 10)
        self.assertEqual(report["query_bound"], 32)
        self.assertLessEqual(report["cells"], report["space_bound"])

    def test_exhaustive_queries(self):
        """
        Test every element of F_4.

        Expected outcome:
        - Each query returns f(alpha) and reads at most p*a*d*m cells.
        """
        log = AccessLog()
        for alpha in self.tower.fq.elements():
            self.assertEqual(ds_query(self.ds, alpha, log), horner_eval(self.f, alpha))
            self.assertLessEqual(log.last, 32)
        self.assertEqual(len(log.queries), 4)

    def test_queries_over_f8(self):
        """
        Test a degree-7 polynomial over F_8.

        Expected outcome:
        - Every query matches Horner evaluation.
        """
        tower = FieldTower(2, 3)
        f = UniPolyFactory(tower=tower, length=8)
        ds = ds_build(f, ds_choose_params(8), tower)
        for alpha in tower.fq.elements():
            self.assertEqual(ds_query(ds, alpha), horner_eval(f, alpha))

    def test_degree_checked(self):
        """
        Test a polynomial whose degree reaches n.

        Expected outcome:
        - DegreeError.
        """
        fq = self.tower.fq
        padded = list(self.f.coeffs) + [fq.zero] * (16 - len(self.f.coeffs))
        f = UniPoly(fq, padded + [fq.one])
        with self.assertRaises(DegreeError):
            ds_build(f, self.params, self.tower)

    def test_round_trip(self):
        """
        Test save, load and save again.

        Expected outcome:
        - Byte-identical images and identical query answers.
        """
        data = ds_dumps(self.ds)
        buffer = io.BytesIO()
        self.assertEqual(ds_save(self.ds, buffer), len(data))
        buffer.seek(0)
        loaded = ds_load(buffer, f=self.f, seed=5)
        self.assertEqual(ds_dumps(loaded), data)
        for alpha in self.tower.fq.elements():
            self.assertEqual(ds_query(loaded, alpha), ds_query(self.ds, alpha))

    def test_truncated_image(self):
        """
        Test images cut short in the header and in the cells.

        Expected outcome:
        - FormatError in both cases, and for trailing bytes.
        """
        data = ds_dumps(self.ds)
        for broken in (data[:10], data[:-1], data + b"\x00"):
            with self.assertRaises(FormatError):
                ds_loads(broken)

    def test_unknown_version(self):
        """
        Test a header with version 2 and one with a foreign magic.

        Expected outcome:
        - VersionError.
        """
        data = bytearray(ds_dumps(self.ds))
        struct.pack_into("<H", data, 4, 2)
        with self.assertRaises(VersionError):
            ds_loads(bytes(data))
        with self.assertRaises(VersionError):
            ds_loads(b"XXXX" + ds_dumps(self.ds)[4:])

    def test_corrupted_header_fields(self):
        """
        Test a modulus coefficient of 3 over F_2 and a b below the minimum.

        Expected outcome:
        - FormatError for both, raised while loading rather than at query
          time.
        """
        data = bytearray(ds_dumps(self.ds))
        # the F_4 modulus follows the 24-byte header
        struct.pack_into("<H", data, 24, 3)
        with self.assertRaises(FormatError):
            ds_loads(bytes(data))

        data = bytearray(ds_dumps(self.ds))
        struct.pack_into("<H", data, 12, self.ds.b - 1)
        with self.assertRaises(FormatError):
            ds_loads(bytes(data))

    def test_integrity_check(self):
        """
        Test loading against a different polynomial.

        Expected outcome:
        - VerificationError, since every cell is shifted by one.
        """
        other = self.f + UniPoly(self.tower.fq, [self.tower.fq.one])
        with self.assertRaises(VerificationError):
            ds_loads(ds_dumps(self.ds), f=other, seed=3)
