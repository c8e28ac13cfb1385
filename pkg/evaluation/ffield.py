"""
Finite-field towers F_p < F_q = F_p[Y0]/(v0) < F_q[Y1]/(v1).

Field contexts are immutable and hashable; elements are plain values. A
prime field stores integers in ``[0, p)``. An extension field stores the
coefficient vector over its base as a tuple or, when its order is at most
``EVALUATION["TABLE_ORDER_LIMIT"]``, the canonical index of that vector so
that arithmetic runs on discrete-log, exponent and Zech-logarithm tables.
Both representations enumerate elements in the same canonical order:
the constant coefficient is the least significant digit of the index.

Every public arithmetic method charges the active :class:`OpCounter` in
units of ground-level F_q operations.
"""
import itertools
import logging
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass
from functools import lru_cache

from django.conf import settings

from evaluation import linalg
from evaluation.exceptions import (
    InternalError,
    IrreducibilityError,
    MembershipError,
    ParamError,
)

logger = logging.getLogger(__name__)

DEFAULT_TABLE_ORDER_LIMIT = 65536


@dataclass
class OpCounter:
    """
    Tallies of ground-level F_q operations.

    Attributes:
        adds (int): Additions, subtractions and negations.
        muls (int): Multiplications.
        invs (int): Inversions.
    """

    adds: int = 0
    muls: int = 0
    invs: int = 0

    @property
    def total(self):
        return self.adds + self.muls + self.invs

    def charge(self, adds=0, muls=0, invs=0):
        self.adds += adds
        self.muls += muls
        self.invs += invs

    def absorb(self, other):
        self.charge(other.adds, other.muls, other.invs)

    def reset(self):
        self.adds = self.muls = self.invs = 0

    def as_dict(self):
        return {**asdict(self), "total": self.total}


_active_counter = ContextVar("active_counter", default=None)


def current_counter():
    return _active_counter.get()


@contextmanager
def count_operations(counter=None):
    """
    Route the field operations of the enclosed block to ``counter``.

    Args:
        counter (OpCounter, optional): Counter to charge; a fresh one is
            created when omitted.

    Yields:
        OpCounter: The active counter.
    """
    counter = OpCounter() if counter is None else counter
    token = _active_counter.set(counter)
    try:
        yield counter
    finally:
        _active_counter.reset(token)


@contextmanager
def suspend_counting():
    token = _active_counter.set(None)
    try:
        yield
    finally:
        _active_counter.reset(token)


def charge(adds=0, muls=0, invs=0):
    counter = _active_counter.get()
    if counter is not None:
        counter.adds += adds
        counter.muls += muls
        counter.invs += invs


def table_order_limit():
    options = getattr(settings, "EVALUATION", {})
    return options.get("TABLE_ORDER_LIMIT", DEFAULT_TABLE_ORDER_LIMIT)


def charge_coeff_extraction():
    options = getattr(settings, "EVALUATION", {})
    return options.get("CHARGE_COEFF_EXTRACTION", True)


def is_prime(n):
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def prime_factors(n):
    factors, k = [], 2
    while k * k <= n:
        if n % k == 0:
            factors.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        factors.append(n)
    return factors


def _op_costs(ground_degree):
    """Schoolbook costs of (add, mul, inv) as ``(adds, muls, invs)``."""
    b = ground_degree
    if b == 1:
        return (1, 0, 0), (0, 1, 0), (0, 0, 1)
    mul = ((b - 1) ** 2 + b * (b - 1), b * b + b * (b - 1), 0)
    # extended Euclid: about b^2 multiply-adds per remainder sequence pass
    inv = (2 * b * b, 2 * b * b, 1)
    return (b, 0, 0), mul, inv


class _Field:
    """Counted arithmetic shared by prime and extension fields."""

    characteristic = None
    order = None
    degree = 1
    absolute_degree = 1
    ground_degree = 1
    base = None

    def _set_costs(self):
        self._cost_add, self._cost_mul, self._cost_inv = _op_costs(
            self.ground_degree
        )

    def add(self, x, y):
        charge(*self._cost_add)
        return self._add(x, y)

    def sub(self, x, y):
        charge(*self._cost_add)
        return self._sub(x, y)

    def neg(self, x):
        charge(*self._cost_add)
        return self._neg(x)

    def mul(self, x, y):
        charge(*self._cost_mul)
        return self._mul(x, y)

    def inv(self, x):
        if x == self.zero:
            raise ZeroDivisionError(f"zero has no inverse in {self}")
        charge(*self._cost_inv)
        return self._inv(x)

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def pow(self, x, e):
        """Square-and-multiply power, charged per squaring and product."""
        if e < 0:
            x, e = self.inv(x), -e
        if e > 0:
            steps = e.bit_length() - 1 + bin(e).count("1") - 1
            adds, muls, invs = self._cost_mul
            charge(adds * steps, muls * steps, invs * steps)
        return self._pow(x, e)

    def _pow(self, x, e):
        result = self.one
        while e:
            if e & 1:
                result = self._mul(result, x)
            e >>= 1
            if e:
                x = self._mul(x, x)
        return result

    def sum(self, values):
        total = self.zero
        for value in values:
            total = self.add(total, value)
        return total

    def is_zero(self, x):
        return x == self.zero

    def elements(self):
        return (self.element(i) for i in range(self.order))

    def random_element(self, rng):
        return self.element(rng.randrange(self.order))

    def random_nonzero(self, rng):
        return self.element(rng.randrange(1, self.order))


class PrimeField(_Field):
    """
    The prime field F_p.

    Attributes:
        p (int): Prime modulus, checked by trial division.
    """

    def __init__(self, p):
        if not isinstance(p, int) or not is_prime(p):
            raise ParamError(f"p={p} is not prime")
        self.p = self.characteristic = self.order = p
        self.zero, self.one = 0, 1
        self._set_costs()

    def __repr__(self):
        return f"F_{self.p}"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def _add(self, x, y):
        return (x + y) % self.p

    def _sub(self, x, y):
        return (x - y) % self.p

    def _neg(self, x):
        return -x % self.p

    def _mul(self, x, y):
        return x * y % self.p

    def _inv(self, x):
        return pow(x, -1, self.p)

    def _pow(self, x, e):
        return pow(x, e, self.p)

    def index(self, x):
        return x

    def element(self, i):
        return i

    def from_int(self, k):
        return k % self.p

    def is_valid(self, x):
        return isinstance(x, int) and 0 <= x < self.p

    def to_ints(self, x):
        return [x]

    def from_ints(self, ints):
        (value,) = ints
        if not self.is_valid(value):
            raise ParamError(f"F_{self.p} coordinate {value!r} out of range")
        return value


# Dense polynomials over a field context: lists of raw elements, low-to-high.
# These helpers use uncounted arithmetic; they serve field construction.


def _ptrim(field, a):
    a = list(a)
    while a and a[-1] == field.zero:
        a.pop()
    return a


def _psub(field, a, b):
    n = max(len(a), len(b))
    a = list(a) + [field.zero] * (n - len(a))
    b = list(b) + [field.zero] * (n - len(b))
    return _ptrim(field, [field._sub(x, y) for x, y in zip(a, b)])


def _pmul(field, a, b):
    if not a or not b:
        return []
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == field.zero:
            continue
        for j, y in enumerate(b):
            out[i + j] = field._add(out[i + j], field._mul(x, y))
    return _ptrim(field, out)


def _pdivmod(field, a, m):
    a = _ptrim(field, a)
    m = _ptrim(field, m)
    lead_inv = field._inv(m[-1])
    quot = [field.zero] * max(len(a) - len(m) + 1, 0)
    while len(a) >= len(m):
        shift = len(a) - len(m)
        c = field._mul(a[-1], lead_inv)
        quot[shift] = c
        for j, y in enumerate(m):
            a[shift + j] = field._sub(a[shift + j], field._mul(c, y))
        a = _ptrim(field, a)
    return _ptrim(field, quot), a


def _pmod(field, a, m):
    return _pdivmod(field, a, m)[1]


def _ppowmod(field, a, e, m):
    result = [field.one]
    a = _pmod(field, a, m)
    while e:
        if e & 1:
            result = _pmod(field, _pmul(field, result, a), m)
        e >>= 1
        if e:
            a = _pmod(field, _pmul(field, a, a), m)
    return result


def _pgcd(field, a, b):
    a, b = _ptrim(field, a), _ptrim(field, b)
    while b:
        a, b = b, _pmod(field, a, b)
    return a


def irreducibility_failure(field, poly):
    """
    Check the irreducibility certificates of a monic polynomial.

    The certificates are ``gcd(v, X^(|F|^k) - X) = 1`` for every
    ``k <= deg(v) / 2`` and ``X^(|F|^deg(v)) = X mod v``.

    Args:
        field: Coefficient field context.
        poly (sequence): Monic polynomial, low-to-high raw coefficients.

    Returns:
        str or None: Description of the first failing certificate, or None
        when the polynomial is irreducible.
    """
    poly = _ptrim(field, poly)
    k = len(poly) - 1
    if k < 1:
        return "degree < 1"
    x = _pmod(field, [field.zero, field.one], poly)
    r = x
    for i in range(1, k + 1):
        r = _ppowmod(field, r, field.order, poly)
        if i <= k // 2 and len(_pgcd(field, poly, _psub(field, r, x))) > 1:
            return f"gcd(v, X^(|F|^{i}) - X) != 1"
    if _ptrim(field, r) != _ptrim(field, x):
        return f"X^(|F|^{k}) != X mod v"
    return None


def find_irreducible(field, degree):
    """
    Lexicographically first monic irreducible polynomial of a degree.

    Candidates are ordered by their coefficient tuples read as base-|F|
    numbers with the constant term as least significant digit.

    Args:
        field: Coefficient field context.
        degree (int): Degree, at least 1.

    Returns:
        tuple: Coefficients low-to-high, ending with ``field.one``.
    """
    if degree < 1:
        raise ParamError(f"degree must be >= 1, got {degree}")
    q = field.order
    for i in range(q**degree):
        digits = [field.element((i // q**j) % q) for j in range(degree)]
        if degree > 1 and digits[0] == field.zero:
            continue
        candidate = digits + [field.one]
        if irreducibility_failure(field, candidate) is None:
            return tuple(candidate)
    raise InternalError(f"no irreducible of degree {degree} over {field}")


class ExtField(_Field):
    """
    Extension ``base[Y]/(modulus)`` of a field context.

    Args:
        base: Field one level below.
        degree (int): Extension degree.
        modulus (sequence): Monic irreducible polynomial over ``base``,
            low-to-high, of length ``degree + 1``.
        verify (bool): Re-check the irreducibility certificates.
    """

    def __init__(self, base, degree, modulus, verify=True, table_limit=None):
        modulus = tuple(modulus)
        if degree < 1 or len(modulus) != degree + 1:
            raise ParamError(
                f"modulus of degree {degree} needs {degree + 1} coefficients"
            )
        if modulus[-1] != base.one:
            raise ParamError("modulus must be monic")
        if verify:
            failure = irreducibility_failure(base, modulus)
            if failure is not None:
                raise IrreducibilityError(
                    f"modulus {list(modulus)} over {base} is reducible: "
                    f"certificate {failure} failed"
                )
        self.base = base
        self.degree = degree
        self.modulus = modulus
        self.characteristic = base.characteristic
        self.order = base.order**degree
        self.absolute_degree = degree * base.absolute_degree
        if isinstance(base, PrimeField):
            self.ground_degree = 1
        else:
            self.ground_degree = degree * base.ground_degree
        self._set_costs()

        limit = table_order_limit() if table_limit is None else table_limit
        self.tabled = self.order <= limit
        if self.tabled:
            self._build_tables()
            self.zero, self.one = 0, 1
        else:
            self.zero = (base.zero,) * degree
            self.one = (base.one,) + (base.zero,) * (degree - 1)
        logger.debug(
            f"built {self!r} modulus={[base.index(c) for c in modulus]} "
            f"tabled={self.tabled}"
        )

    def __repr__(self):
        return f"GF({self.characteristic}^{self.absolute_degree})/{self.base!r}"

    def __eq__(self, other):
        return (
            isinstance(other, ExtField)
            and other.base == self.base
            and other.modulus == self.modulus
        )

    def __hash__(self):
        return hash(("E", self.base, self.modulus))

    # Coefficient-vector arithmetic, used directly in vector mode and to
    # build the tables in table mode.

    def _vadd(self, x, y):
        return tuple(self.base._add(a, b) for a, b in zip(x, y))

    def _vsub(self, x, y):
        return tuple(self.base._sub(a, b) for a, b in zip(x, y))

    def _vneg(self, x):
        return tuple(self.base._neg(a) for a in x)

    def _vmul(self, x, y):
        base, n = self.base, self.degree
        zero = base.zero
        prod = [zero] * (2 * n - 1)
        for i, a in enumerate(x):
            if a == zero:
                continue
            for j, b in enumerate(y):
                if b != zero:
                    prod[i + j] = base._add(prod[i + j], base._mul(a, b))
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[k]
            if c == zero:
                continue
            for j in range(n):
                if self.modulus[j] != zero:
                    prod[k - n + j] = base._sub(
                        prod[k - n + j], base._mul(c, self.modulus[j])
                    )
        return tuple(prod[:n])

    def _vinv(self, x):
        base = self.base
        r0, r1 = list(self.modulus), _ptrim(base, x)
        s0, s1 = [], [base.one]
        while len(r1) > 1:
            quot, rem = _pdivmod(base, r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _psub(base, s0, _pmul(base, quot, s1))
        scale = base._inv(r1[0])
        coeffs = [base._mul(c, scale) for c in s1]
        return tuple(coeffs + [base.zero] * (self.degree - len(coeffs)))

    def _vector_of(self, index):
        q = self.base.order
        return tuple(
            self.base.element((index // q**j) % q) for j in range(self.degree)
        )

    def _index_of(self, vector):
        q = self.base.order
        return sum(self.base.index(c) * q**j for j, c in enumerate(vector))

    def _build_tables(self):
        n1 = self.order - 1
        one = (self.base.one,) + (self.base.zero,) * (self.degree - 1)
        generator = None
        factors = prime_factors(n1) if n1 > 1 else []
        for i in range(1, self.order):
            candidate = self._vector_of(i)
            if all(
                self._vpow(candidate, n1 // r) != one for r in factors
            ):
                generator = candidate
                break
        if generator is None:
            raise InternalError(f"no primitive element in {self!r}")
        exp = [0] * (2 * n1)
        log = [-1] * self.order
        current = one
        for k in range(n1):
            idx = self._index_of(current)
            exp[k] = exp[k + n1] = idx
            log[idx] = k
            current = self._vmul(current, generator)
        zech = [-1] * n1
        for k in range(n1):
            total = self._vadd(one, self._vector_of(exp[k]))
            zech[k] = log[self._index_of(total)]
        self._exp, self._log, self._zech = exp, log, zech
        self._n1 = n1
        self._half = n1 // 2 if self.characteristic != 2 else 0

    def _vpow(self, x, e):
        result = (self.base.one,) + (self.base.zero,) * (self.degree - 1)
        while e:
            if e & 1:
                result = self._vmul(result, x)
            e >>= 1
            if e:
                x = self._vmul(x, x)
        return result

    def _add(self, x, y):
        if not self.tabled:
            return self._vadd(x, y)
        if x == 0:
            return y
        if y == 0:
            return x
        lx = self._log[x]
        z = self._zech[(self._log[y] - lx) % self._n1]
        if z < 0:
            return 0
        return self._exp[lx + z]

    def _neg(self, x):
        if not self.tabled:
            return self._vneg(x)
        if x == 0 or self._half == 0:
            return x
        return self._exp[self._log[x] + self._half]

    def _sub(self, x, y):
        if not self.tabled:
            return self._vsub(x, y)
        return self._add(x, self._neg(y))

    def _mul(self, x, y):
        if not self.tabled:
            return self._vmul(x, y)
        if x == 0 or y == 0:
            return 0
        return self._exp[self._log[x] + self._log[y]]

    def _inv(self, x):
        if not self.tabled:
            return self._vinv(x)
        return self._exp[(self._n1 - self._log[x]) % self._n1]

    def _pow(self, x, e):
        if not self.tabled:
            return super()._pow(x, e)
        if x == 0:
            return 1 if e == 0 else 0
        return self._exp[(self._log[x] * e) % self._n1]

    # Representation

    def coeffs(self, x):
        """Coefficient vector of ``x`` over the base field."""
        return self._vector_of(x) if self.tabled else x

    def from_coeffs(self, coeffs):
        coeffs = tuple(coeffs)
        return self._index_of(coeffs) if self.tabled else coeffs

    def index(self, x):
        return x if self.tabled else self._index_of(x)

    def element(self, i):
        return i if self.tabled else self._vector_of(i)

    def is_valid(self, x):
        if self.tabled:
            return isinstance(x, int) and 0 <= x < self.order
        return (
            isinstance(x, tuple)
            and len(x) == self.degree
            and all(self.base.is_valid(c) for c in x)
        )

    def to_ints(self, x):
        """Coordinates of ``x`` over F_p, length ``absolute_degree``."""
        ints = []
        for c in self.coeffs(x):
            ints.extend(self.base.to_ints(c))
        return ints

    def from_ints(self, ints):
        ints = list(ints)
        step = self.base.absolute_degree
        if len(ints) != self.absolute_degree:
            raise ParamError(
                f"{self!r} elements have {self.absolute_degree} coordinates, "
                f"got {len(ints)}"
            )
        return self.from_coeffs(
            self.base.from_ints(ints[j * step:(j + 1) * step])
            for j in range(self.degree)
        )

    def from_int(self, k):
        return self.embed(self.base.from_int(k))

    def embed(self, c):
        """Image of a base element under the standard embedding."""
        return self.from_coeffs((c,) + (self.base.zero,) * (self.degree - 1))

    def project(self, x):
        """
        Base-field element represented by ``x``.

        Raises:
            MembershipError: If ``x`` is not a constant polynomial in Y.
        """
        coeffs = self.coeffs(x)
        if any(c != self.base.zero for c in coeffs[1:]):
            raise MembershipError(
                f"element {self.to_ints(x)} of {self!r} is not in {self.base!r}"
            )
        return coeffs[0]

    def generator(self):
        """The class of Y in ``base[Y]/(modulus)``."""
        if self.degree == 1:
            return self.from_coeffs((self.base._neg(self.modulus[0]),))
        return self.from_coeffs(
            (self.base.zero, self.base.one) + (self.base.zero,) * (self.degree - 2)
        )


@lru_cache(maxsize=None)
def _extension(base, degree, table_limit):
    with suspend_counting():
        modulus = find_irreducible(base, degree)
        return ExtField(base, degree, modulus, verify=False, table_limit=table_limit)


def build_extension(base, degree):
    """
    Extension of ``base`` by the first irreducible of the given degree.

    Construction is setup work and is never charged to the counters;
    identical requests share one cached context.
    """
    return _extension(base, degree, table_order_limit())


class FieldTower:
    """
    The tower F_p < F_q = F_{p^a} with on-demand extensions of F_q.

    Args:
        p (int): Characteristic.
        a (int): Degree of F_q over F_p.
        modulus (sequence of int, optional): Explicit v0 over F_p; the
            lexicographically first irreducible is used when omitted.
    """

    def __init__(self, p, a, modulus=None):
        if not isinstance(a, int) or a < 1:
            raise ParamError(f"a must be a positive integer, got {a}")
        self.prime = PrimeField(p)
        self.p, self.a = p, a
        if modulus is None:
            self.fq = build_extension(self.prime, a)
        else:
            modulus = list(modulus)
            if not all(self.prime.is_valid(c) for c in modulus):
                raise ParamError(
                    f"modulus coefficients must lie in [0, {p}), got {modulus}"
                )
            with suspend_counting():
                self.fq = ExtField(self.prime, a, modulus)
        self.q = self.fq.order
        self.y0 = self.fq.generator()

    def __repr__(self):
        return f"FieldTower(p={self.p}, a={self.a}, v0={list(self.fq.modulus)})"

    def __eq__(self, other):
        return isinstance(other, FieldTower) and other.fq == self.fq

    def __hash__(self):
        return hash(self.fq)

    def extension(self, degree, modulus=None):
        """F_{q^degree} = F_q[Y]/(v), a sibling extension of F_q."""
        if modulus is None:
            return build_extension(self.fq, degree)
        with suspend_counting():
            return ExtField(self.fq, degree, modulus)

    def element_from_ints(self, ints):
        if len(ints) != self.a or any(
            not isinstance(c, int) or not 0 <= c < self.p for c in ints
        ):
            raise ParamError(
                f"F_q elements are {self.a} integers in [0, {self.p}), got {ints}"
            )
        return self.fq.from_ints(ints)

    def element_to_ints(self, x):
        return self.fq.to_ints(x)


def frobenius_conjugates(field, alpha):
    """
    ``(alpha, alpha^p, ..., alpha^(p^(a-1)))`` for a field of absolute
    degree a over F_p.
    """
    p = field.characteristic
    conjugates = [alpha]
    for _ in range(field.absolute_degree - 1):
        conjugates.append(field.pow(conjugates[-1], p))
    return conjugates


def extract_ground_coeffs(fq, alpha, charged=None):
    """
    Coordinates ``(alpha_0, ..., alpha_{a-1})`` of ``alpha = sum alpha_j Y0^j``.

    The coefficients are read back from the representation. When charging
    is enabled the read is billed as applying a precomputed ``a x a``
    inverse Vandermonde matrix to the conjugate vector.

    Args:
        fq: The field F_q, an extension of a prime field.
        alpha: Element of F_q.
        charged (bool, optional): Override the
            ``CHARGE_COEFF_EXTRACTION`` setting.

    Returns:
        list of int: The coefficients over F_p.
    """
    if charged is None:
        charged = charge_coeff_extraction()
    a = fq.absolute_degree
    if charged:
        charge(adds=a * (a - 1), muls=a * a)
    return fq.to_ints(alpha)


def extract_ground_coeffs_by_conjugates(fq, alpha):
    """
    Recover the coordinates of ``alpha`` from its Frobenius conjugates.

    Solves the Vandermonde system in ``Y0, Y0^p, ..., Y0^(p^(a-1))`` whose
    right-hand side is the conjugate vector of ``alpha``.
    """
    y0 = fq.generator()
    nodes = frobenius_conjugates(fq, y0)
    a = fq.absolute_degree
    mat = [[fq.pow(node, j) for j in range(a)] for node in nodes]
    solution = linalg.solve(fq, mat, frobenius_conjugates(fq, alpha))
    return [fq.project(c) for c in solution]


def enumerate_subfield(ext, p, b):
    """
    The copy of F_{p^b} inside ``ext``, in canonical element order.

    Computed as the kernel of the F_p-linear map ``x -> x^(p^b) - x``
    followed by every F_p-combination of a kernel basis.

    Raises:
        InternalError: If the kernel does not have dimension b.
    """
    if p != ext.characteristic:
        raise ParamError(f"{ext!r} has characteristic {ext.characteristic}, not {p}")
    prime = PrimeField(p)
    dim = ext.absolute_degree
    columns = []
    for k in range(dim):
        x = ext.from_ints([int(j == k) for j in range(dim)])
        columns.append(ext.to_ints(ext.sub(ext.pow(x, p**b), x)))
    kernel = linalg.nullspace(prime, linalg.transpose(columns), dim)
    if len(kernel) != b:
        raise InternalError(
            f"Frobenius kernel of {ext!r} has dimension {len(kernel)}, expected {b}"
        )
    elements = []
    for combo in itertools.product(range(p), repeat=b):
        vector = [
            sum(c * v[r] for c, v in zip(combo, kernel)) % p for r in range(dim)
        ]
        elements.append(ext.from_ints(vector))
    elements.sort(key=ext.index)
    return elements


class SubfieldBasis:
    """
    A power basis ``1, beta, ..., beta^(b-1)`` of the embedded F_{p^b}.

    Decomposition solves the ``b``-unknown system over F_p on a fixed set of
    pivot coordinates, then checks the remaining coordinates.

    Attributes:
        beta: The basis element.
        elements (list): The enumerated subfield, when it was needed.
    """

    def __init__(self, ext, p, b, beta=None, elements=None):
        self.ext, self.p, self.b = ext, p, b
        self.prime = PrimeField(p)
        self.elements = elements
        if beta is None:
            if self.elements is None:
                self.elements = enumerate_subfield(ext, p, b)
            beta = next(
                (x for x in self.elements if x != ext.zero and self._independent(x)),
                None,
            )
            if beta is None:
                raise InternalError(f"no power basis of F_{p}^{b} in {ext!r}")
        elif not self._independent(beta):
            raise ParamError("powers of beta are not linearly independent")
        self.beta = beta
        self.powers = [ext.pow(beta, j) for j in range(b)]
        self._columns = [ext.to_ints(x) for x in self.powers]
        rows = linalg.transpose(self._columns)
        _, pivots = linalg.row_reduce(self.prime, linalg.transpose(rows))
        # pivot rows of the coordinate matrix are the pivot columns of its
        # transpose
        self._pivot_rows = pivots
        square = [rows[r] for r in pivots]
        self._solver = linalg.inverse(self.prime, square)

    def _independent(self, x):
        powers = [self.ext.to_ints(self.ext._pow(x, j)) for j in range(self.b)]
        return linalg.rank(self.prime, powers) == self.b

    def decompose(self, alpha):
        """
        Coordinates of ``alpha`` in the power basis.

        Raises:
            MembershipError: If ``alpha`` is outside the subfield.
        """
        p, b = self.p, self.b
        ints = self.ext.to_ints(alpha)
        picked = [ints[r] for r in self._pivot_rows]
        coeffs = [
            sum(m * v for m, v in zip(row, picked)) % p for row in self._solver
        ]
        charge(adds=b * (b - 1), muls=b * b)
        for r, value in enumerate(ints):
            if sum(c * col[r] for c, col in zip(coeffs, self._columns)) % p != value:
                raise MembershipError(
                    f"element {ints} is not in the subfield F_{p}^{b}"
                )
        return coeffs

    def recompose(self, coeffs):
        ext = self.ext
        total = ext.zero
        for c, power in zip(coeffs, self.powers):
            total = ext.add(total, ext.mul(ext.from_int(c), power))
        return total


def subfield_basis_element(ext, p, b, elements=None):
    return SubfieldBasis(ext, p, b, elements=elements).beta


def decompose_over_basis(ext, alpha, beta, b):
    return SubfieldBasis(ext, ext.characteristic, b, beta=beta).decompose(alpha)


def project_to_subfield(ext, x):
    return ext.project(x)
