"""
Dense polynomials over the field contexts of :mod:`evaluation.ffield`.

Univariate polynomials keep trimmed low-to-high coefficient vectors.
Multivariate polynomials keep ``d^n`` coefficients indexed by
``sum(e_j * d^j)``: the exponent of variable 1 is the least significant
digit. Grid tables use the same convention for positions, so the first
coordinate varies fastest.
"""
import itertools
import logging
from math import comb

from evaluation import linalg
from evaluation.exceptions import (
    DuplicateNodeError,
    InsufficientDataError,
    InternalError,
    ParamError,
)
from evaluation.workers import parallel_map

logger = logging.getLogger(__name__)


class UniPoly:
    """
    Univariate polynomial with trimmed coefficients.

    Attributes:
        field: Coefficient field context.
        coeffs (tuple): Coefficients low-to-high; empty for zero.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs=()):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == field.zero:
            coeffs.pop()
        self.field = field
        self.coeffs = tuple(coeffs)

    def __repr__(self):
        return f"UniPoly({self.field!r}, {list(self.coeffs)})"

    def __eq__(self, other):
        return (
            isinstance(other, UniPoly)
            and other.field == self.field
            and other.coeffs == self.coeffs
        )

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __call__(self, x):
        return horner_eval(self, x)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def coeff(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.field.zero

    def embed(self, ext):
        return UniPoly(ext, [ext.embed(c) for c in self.coeffs])

    def project(self):
        """Coefficients mapped down to the base field of ``self.field``."""
        return UniPoly(self.field.base, [self.field.project(c) for c in self.coeffs])

    def __add__(self, other):
        field = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(
            field, [field.add(self.coeff(k), other.coeff(k)) for k in range(n)]
        )

    def __sub__(self, other):
        field = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(
            field, [field.sub(self.coeff(k), other.coeff(k)) for k in range(n)]
        )

    def __mul__(self, other):
        return UniPoly(self.field, series_mul(self.field, self.coeffs, other.coeffs))

    def scale(self, c):
        return UniPoly(self.field, [self.field.mul(c, x) for x in self.coeffs])


def series_mul(field, a, b, length=None):
    """
    Product of two coefficient lists, optionally truncated to ``length``.
    """
    if not a or not b:
        return []
    size = len(a) + len(b) - 1
    if length is not None:
        size = min(size, length)
    out = [field.zero] * size
    for i, x in enumerate(a):
        if i >= size:
            break
        if x == field.zero:
            continue
        for j, y in enumerate(b[: size - i]):
            if y != field.zero:
                out[i + j] = field.add(out[i + j], field.mul(x, y))
    return out


def horner_eval(f, x):
    """Evaluate ``f`` at ``x`` with ``2 * deg(f)`` counted operations."""
    field = f.field
    if not f.coeffs:
        return field.zero
    result = f.coeffs[-1]
    for c in reversed(f.coeffs[:-1]):
        result = field.add(field.mul(result, x), c)
    return result


def _check_distinct(nodes):
    seen = set()
    for node in nodes:
        if node in seen:
            raise DuplicateNodeError(f"interpolation node {node!r} repeated")
        seen.add(node)


def interpolate(field, points, D):
    """
    Newton divided-difference interpolation.

    Args:
        field: Field context.
        points (list): ``(x_i, y_i)`` pairs with distinct ``x_i``.
        D (int): Degree bound; the first ``D + 1`` points are used.

    Returns:
        UniPoly: The unique polynomial of degree <= D through those points.
    """
    _check_distinct([x for x, _ in points])
    if len(points) < D + 1:
        raise InsufficientDataError(
            f"{len(points)} points cannot determine degree {D}"
        )
    xs = [x for x, _ in points[: D + 1]]
    table = [y for _, y in points[: D + 1]]
    for j in range(1, D + 1):
        for i in range(D, j - 1, -1):
            table[i] = field.div(
                field.sub(table[i], table[i - 1]), field.sub(xs[i], xs[i - j])
            )
    result = [table[D]]
    for k in range(D - 1, -1, -1):
        # result * (X - xs[k]) + table[k]
        shifted = [field.zero] + result
        for i, c in enumerate(result):
            shifted[i] = field.sub(shifted[i], field.mul(c, xs[k]))
        shifted[0] = field.add(shifted[0], table[k])
        result = shifted
    return UniPoly(field, result)


class PascalTable:
    """
    Binomial coefficients modulo p.

    Attributes:
        D (list): ``(k + 1) x d`` table with ``D[i][j] = binom(j, i) mod p``.
    """

    def __init__(self, p, k, d):
        self.p, self.k, self.d = p, k, d
        table = [[0] * d for _ in range(k + 1)]
        for j in range(d):
            table[0][j] = 1 % p
        for i in range(1, k + 1):
            for j in range(1, d):
                table[i][j] = (table[i - 1][j - 1] + table[i][j - 1]) % p
        self.D = table

    def binom(self, j, i):
        if i < 0 or j < 0 or i > j:
            return 0
        if i <= self.k and j < self.d:
            return self.D[i][j]
        return comb(j, i) % self.p


def _hermite_rows(field, data, D, pascal):
    rows, rhs = [], []
    for node, values in data:
        powers = [field.one]
        for _ in range(D):
            powers.append(field.mul(powers[-1], node))
        for k, value in enumerate(values):
            if len(rows) == D + 1:
                return rows, rhs
            row = [field.zero] * (D + 1)
            for j in range(k, D + 1):
                c = pascal.binom(j, k)
                if c:
                    row[j] = field.mul(field.from_int(c), powers[j - k])
            rows.append(row)
            rhs.append(value)
    return rows, rhs


def _normalize_hermite(data):
    normalized = []
    for node, multiplicity, values in data:
        values = list(values)[:multiplicity]
        present = [v is not None for v in values]
        if False in present and True in present[present.index(False):]:
            raise InsufficientDataError(
                f"derivative orders at node {node!r} have a gap"
            )
        normalized.append((node, values[: present.count(True)]))
    return normalized


def hermite_interpolate(field, data, D):
    """
    Hermite interpolation from Hasse-derivative data.

    Args:
        field: Field context.
        data (list): ``(node, multiplicity, values)`` triples where
            ``values[k]`` is the order-k Hasse derivative at ``node``.
        D (int): Degree bound.

    Returns:
        UniPoly: The unique h of degree <= D matching the data.
    """
    data = _normalize_hermite(data)
    _check_distinct([node for node, _ in data])
    supplied = sum(len(values) for _, values in data)
    if supplied <= D:
        raise InsufficientDataError(
            f"{supplied} conditions cannot determine degree {D}"
        )
    order = max(len(values) for _, values in data)
    pascal = PascalTable(field.characteristic, order, D + 1)
    rows, rhs = _hermite_rows(field, data, D, pascal)
    return UniPoly(field, linalg.solve(field, rows, rhs))


class InterpolationPlan:
    """
    Interpolation on a fixed node set with a fixed multiplicity.

    The confluent system depends only on the nodes, so it is solved once:
    ``coefficients`` applies its inverse, ``weights_at`` returns the
    row vector that maps data straight to ``h(x)``.

    Attributes:
        nodes (list): The nodes actually consumed, in order.
        size (int): Number of data values consumed per reconstruction.
    """

    def __init__(self, field, nodes, D, multiplicity=1):
        self.field, self.D, self.multiplicity = field, D, multiplicity
        count = -(-(D + 1) // multiplicity)
        if len(nodes) < count:
            raise InsufficientDataError(
                f"{len(nodes)} nodes of multiplicity {multiplicity} "
                f"cannot determine degree {D}"
            )
        self.nodes = list(nodes[:count])
        _check_distinct(self.nodes)
        self.size = D + 1
        pascal = PascalTable(field.characteristic, multiplicity, D + 1)
        placeholder = [None] * multiplicity
        self._rows, _ = _hermite_rows(
            field, [(node, placeholder) for node in self.nodes], D, pascal
        )
        self._inverse = None
        self._weights = {}

    def flatten(self, rows):
        """Data rows (one list of orders per node) to the consumed vector."""
        values = []
        for row in rows:
            values.extend(row[: self.multiplicity])
        return values[: self.size]

    def prepare(self):
        """Invert the confluent system now instead of on first use."""
        if self._inverse is None:
            self._inverse = linalg.inverse(self.field, self._rows)
        return self

    def coefficients(self, values):
        self.prepare()
        return UniPoly(self.field, linalg.matvec(self.field, self._inverse, values))

    def weights_at(self, x):
        if x not in self._weights:
            field = self.field
            powers = [field.one]
            for _ in range(self.D):
                powers.append(field.mul(powers[-1], x))
            self._weights[x] = linalg.solve(
                field, linalg.transpose(self._rows), powers
            )
        return self._weights[x]

    def evaluate_at(self, x, values):
        field = self.field
        total = field.zero
        for w, v in zip(self.weights_at(x), values):
            if w != field.zero and v != field.zero:
                total = field.add(total, field.mul(w, v))
        return total


def uni_hasse(h, k):
    """Order-k Hasse derivative ``sum binom(j, k) h_j t^(j-k)``."""
    field = h.field
    p = field.characteristic
    out = []
    for j in range(k, len(h.coeffs)):
        c = comb(j, k) % p
        if c == 0 or h.coeffs[j] == field.zero:
            out.append(field.zero)
        elif c == 1:
            out.append(h.coeffs[j])
        else:
            out.append(field.mul(field.from_int(c), h.coeffs[j]))
    return UniPoly(field, out)


def exponent_of(index, n, d):
    return tuple((index // d**j) % d for j in range(n))


def index_of(exponent, d):
    return sum(e * d**j for j, e in enumerate(exponent))


def exponents_up_to(n, K):
    """Exponent vectors with ``|e|_1 <= K``, by total degree then colex."""
    found = [
        e for e in itertools.product(range(K + 1), repeat=n) if sum(e) <= K
    ]
    return sorted(found, key=lambda e: (sum(e), tuple(reversed(e))))


class MultiPoly:
    """
    Dense n-variate polynomial with individual degrees below d.

    Attributes:
        field: Coefficient field context.
        n (int): Number of variables.
        d (int): Individual degree bound.
        coeffs (list): ``d^n`` coefficients in exponent order.
    """

    def __init__(self, field, n, d, coeffs=None):
        if n < 1 or d < 1:
            raise ParamError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        if coeffs is None:
            coeffs = [field.zero] * d**n
        coeffs = list(coeffs)
        if len(coeffs) != d**n:
            raise ParamError(f"expected {d**n} coefficients, got {len(coeffs)}")
        self.field, self.n, self.d = field, n, d
        self.coeffs = coeffs

    def __repr__(self):
        return f"MultiPoly({self.field!r}, n={self.n}, d={self.d})"

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and (other.field, other.n, other.d) == (self.field, self.n, self.d)
            and other.coeffs == self.coeffs
        )

    def coeff(self, exponent):
        if any(e >= self.d for e in exponent):
            return self.field.zero
        return self.coeffs[index_of(exponent, self.d)]

    def is_zero(self):
        return all(c == self.field.zero for c in self.coeffs)

    def terms(self):
        for i, c in enumerate(self.coeffs):
            if c != self.field.zero:
                yield exponent_of(i, self.n, self.d), c

    def embed(self, ext):
        return MultiPoly(ext, self.n, self.d, [ext.embed(c) for c in self.coeffs])

    def evaluate(self, point):
        """Nested Horner evaluation, innermost in variable 1."""
        field, d = self.field, self.d
        values = self.coeffs
        for x in point:
            reduced = []
            for start in range(0, len(values), d):
                chunk = values[start:start + d]
                acc = chunk[-1]
                for c in reversed(chunk[:-1]):
                    acc = field.add(field.mul(acc, x), c)
                reduced.append(acc)
            values = reduced
        return values[0]


def hasse_derivative(f, b, pascal=None):
    """
    ``sum_e binom(e, b) coeff_e(f) x^(e - b)`` with binomials mod p.

    Args:
        f (MultiPoly): Polynomial to differentiate.
        b (tuple): Order vector.
        pascal (PascalTable, optional): Table covering ``max(b)`` rows.

    Returns:
        MultiPoly: The derivative with the same ``(n, d)`` bounds.
    """
    field, n, d = f.field, f.n, f.d
    out = MultiPoly(field, n, d)
    if any(bj >= d for bj in b):
        return out
    if pascal is None:
        pascal = PascalTable(field.characteristic, max(b, default=0), d)
    for i, c in enumerate(f.coeffs):
        if c == field.zero:
            continue
        e = exponent_of(i, n, d)
        if any(ej < bj for ej, bj in zip(e, b)):
            continue
        scale = 1
        for ej, bj in zip(e, b):
            scale = scale * pascal.binom(ej, bj) % field.characteristic
        if scale == 0:
            continue
        target = index_of([ej - bj for ej, bj in zip(e, b)], d)
        out.coeffs[target] = c if scale == 1 else field.mul(field.from_int(scale), c)
    return out


def hasse_set(f, K):
    """All ``hasse_derivative(f, e)`` with ``|e|_1 <= K``, keyed by e."""
    pascal = PascalTable(f.field.characteristic, K, f.d)
    return {e: hasse_derivative(f, e, pascal) for e in exponents_up_to(f.n, K)}


class GridTable:
    """
    Values of a polynomial on ``S^n``.

    Position vectors are flattened with the first coordinate fastest.

    Attributes:
        S (list): Grid coordinates in their given order.
        values (list): ``|S|^n`` values.
    """

    def __init__(self, field, S, n, values):
        self.field, self.S, self.n = field, list(S), n
        self.values = values
        self._position = {s: i for i, s in enumerate(self.S)}

    def __len__(self):
        return len(self.values)

    def cell_index(self, point):
        size = len(self.S)
        try:
            return sum(
                self._position[x] * size**j for j, x in enumerate(point)
            )
        except KeyError:
            raise InternalError(f"point {point!r} is outside the grid") from None

    def lookup(self, point):
        return self.values[self.cell_index(point)]

    def point(self, index):
        size = len(self.S)
        return tuple(self.S[(index // size**j) % size] for j in range(self.n))


def _grid_values(field, coeffs, n, d, powers):
    if n == 0:
        return [coeffs[0]]
    stride = d ** (n - 1)
    out = []
    for pows in powers:
        partial = []
        for r in range(stride):
            acc = field.zero
            for k in range(d):
                c = coeffs[k * stride + r]
                if c != field.zero:
                    acc = field.add(acc, field.mul(pows[k], c))
            partial.append(acc)
        out.extend(_grid_values(field, partial, n - 1, d, powers))
    return out


def grid_eval(f, S, threads=None):
    """
    Evaluate ``f`` on every point of ``S^n`` by partial evaluation.

    The last variable is substituted first, leaving ``|S|`` polynomials in
    ``n - 1`` variables; those branches are independent and may run on
    worker threads.

    Args:
        f (MultiPoly): Polynomial over the field of ``S``.
        S (list): Distinct grid coordinates.
        threads (int, optional): Worker count for the outer branches.

    Returns:
        GridTable: The evaluations.
    """
    field, n, d = f.field, f.n, f.d
    _check_distinct(S)
    powers = []
    for s in S:
        row = [field.one]
        for _ in range(d - 1):
            row.append(field.mul(row[-1], s))
        powers.append(row)
    stride = d ** (n - 1)

    def branch(pows):
        partial = []
        for r in range(stride):
            acc = field.zero
            for k in range(d):
                c = f.coeffs[k * stride + r]
                if c != field.zero:
                    acc = field.add(acc, field.mul(pows[k], c))
            partial.append(acc)
        return _grid_values(field, partial, n - 1, d, powers)

    blocks = parallel_map(branch, powers, threads)
    values = [v for block in blocks for v in block]
    return GridTable(field, S, n, values)


class Curve:
    """
    The curve ``t -> (g_1(t), ..., g_n(t))``.

    Attributes:
        components (tuple): One UniPoly per coordinate, all over ``field``.
    """

    def __init__(self, field, components):
        self.field = field
        self.components = tuple(components)

    @classmethod
    def from_coordinates(cls, field, coordinates):
        """Curve whose j-th component has coefficients ``coordinates[j]``."""
        return cls(field, [UniPoly(field, coeffs) for coeffs in coordinates])

    @property
    def n(self):
        return len(self.components)

    def at(self, t):
        return tuple(horner_eval(g, t) for g in self.components)


class CurveShift:
    """
    The polynomials ``g~_i(t, Z)`` with ``g_i(t + Z) = g_i(t) + Z g~_i(t, Z)``.

    Attributes:
        components (list): For each coordinate, the list of UniPolys in t
            that multiply ``Z^0, Z^1, ...``.
    """

    def __init__(self, field, components):
        self.field = field
        self.components = components

    def at(self, t, length):
        """Z-series of every ``g~_i(t, Z)`` truncated to ``length`` terms."""
        field = self.field
        series = []
        for parts in self.components:
            values = [horner_eval(part, t) for part in parts[:length]]
            series.append(values + [field.zero] * (length - len(values)))
        return series


def curve_shift(g):
    components = []
    for component in g.components:
        components.append(
            [uni_hasse(component, k) for k in range(1, len(component.coeffs))]
        )
    return CurveShift(g.field, components)


def compose_on_curve(f, g):
    """
    ``h(t) = f(g_1(t), ..., g_n(t))`` by direct expansion.

    Meant for oracles and tests; the cost is polynomial in ``d^n``.
    """
    field = f.field
    one = UniPoly(field, [field.one])
    powers = []
    for component in g.components:
        row = [one]
        for _ in range(f.d - 1):
            row.append(row[-1] * component)
        powers.append(row)
    total = UniPoly(field)
    for exponent, c in f.terms():
        term = UniPoly(field, [c])
        for j, e in enumerate(exponent):
            if e:
                term = term * powers[j][e]
        total = total + term
    return total
