import factory
import factory.fuzzy
from factory.random import randgen, reseed_random

from evaluation.ffield import FieldTower
from evaluation.mme import MmeInstance
from evaluation.poly import MultiPoly, UniPoly


def random_element(field):
    """Uniform element of ``field`` drawn from factory_boy's generator."""
    return field.element(randgen.randrange(field.order))


def random_point(field, n):
    return tuple(random_element(field) for _ in range(n))


def reseed(seed):
    """Make every later factory draw reproducible."""
    reseed_random(seed)


class FieldTowerFactory(factory.Factory):
    """
    Factory for small field towers F_p < F_{p^a}.

    The modulus is the first irreducible polynomial in canonical order, so
    equal ``(p, a)`` draws share one cached field.
    """

    p = factory.fuzzy.FuzzyChoice([2, 3, 5])
    a = factory.fuzzy.FuzzyInteger(1, 4)

    class Meta:
        model = FieldTower


class MultiPolyFactory(factory.Factory):
    """
    Factory for dense random polynomials over the F_q of a tower.

    Pass ``tower`` to reuse an existing field; ``zero_rate`` is the chance
    that a coefficient is forced to zero.
    """

    field = factory.LazyAttribute(lambda o: o.tower.fq)
    n = factory.fuzzy.FuzzyInteger(1, 3)
    d = factory.fuzzy.FuzzyInteger(2, 4)
    coeffs = factory.LazyAttribute(
        lambda o: MultiPolyFactory.random_coeffs(o.field, o.d**o.n, o.zero_rate)
    )

    class Meta:
        model = MultiPoly

    class Params:
        tower = factory.SubFactory(FieldTowerFactory)
        zero_rate = 0.0

    @staticmethod
    def random_coeffs(field, count, zero_rate=0.0):
        """
        Draw ``count`` coefficients.

        Args:
            field: Coefficient field.
            count (int): Number of coefficients.
            zero_rate (float): Probability of an explicit zero.

        Returns:
            list: Raw field elements.
        """
        coeffs = []
        for _ in range(count):
            if zero_rate and randgen.random() < zero_rate:
                coeffs.append(field.zero)
            else:
                coeffs.append(random_element(field))
        return coeffs


class UniPolyFactory(factory.Factory):
    """Factory for univariate polynomials with ``length`` coefficients."""

    field = factory.LazyAttribute(lambda o: o.tower.fq)
    coeffs = factory.LazyAttribute(
        lambda o: [random_element(o.field) for _ in range(o.length)]
    )

    class Meta:
        model = UniPoly

    class Params:
        tower = factory.SubFactory(FieldTowerFactory)
        length = factory.fuzzy.FuzzyInteger(1, 16)


class MmeInstanceFactory(factory.Factory):
    """
    Factory for multipoint-evaluation instances.

    ``n``, ``d`` and ``N`` shape the instance; ``points`` may be passed
    explicitly instead of ``N``.
    """

    tower = factory.SubFactory(FieldTowerFactory)
    f = factory.LazyAttribute(
        lambda o: MultiPolyFactory(tower=o.tower, n=o.n, d=o.d)
    )
    points = factory.LazyAttribute(
        lambda o: [random_point(o.tower.fq, o.n) for _ in range(o.N)]
    )

    class Meta:
        model = MmeInstance

    class Params:
        n = factory.fuzzy.FuzzyInteger(1, 3)
        d = factory.fuzzy.FuzzyInteger(2, 4)
        N = factory.fuzzy.FuzzyInteger(0, 25)
