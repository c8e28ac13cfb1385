"""
Multivariate multipoint evaluation over fields of small characteristic.

Every algorithm evaluates an n-variate polynomial f over F_q = F_{p^a}
(individual degrees below d) at N points of F_q^n and must agree exactly
with :func:`mme_naive`.

* :func:`mme_v1` tabulates f on a subfield grid F_{p^b}^n with
  p^b > adn and recovers each value by interpolating f along a curve
  through the point.
* :func:`mme_v2` needs only p^b > ad: it tabulates the Hasse derivatives
  of order below n and uses Hermite interpolation with multiplicity n.
* :func:`mme_v3` descends through a sequence of smaller subfields before
  tabulating, then unwinds level by level.

Operation counts are split into a preprocessing phase (field setup, grid
tables, interpolation plans) and a local phase (per-point work).
"""
import logging
import math
from contextlib import contextmanager

from evaluation.exceptions import (
    DepthError,
    InternalError,
    MissingDerivativeError,
    ParamError,
)
from evaluation.ffield import (
    OpCounter,
    SubfieldBasis,
    count_operations,
    enumerate_subfield,
    extract_ground_coeffs,
    suspend_counting,
)
from evaluation.poly import (
    Curve,
    InterpolationPlan,
    PascalTable,
    UniPoly,
    curve_shift,
    exponents_up_to,
    grid_eval,
    hasse_set,
    horner_eval,
    series_mul,
)
from evaluation.workers import parallel_map

logger = logging.getLogger(__name__)

ALGORITHMS = ("naive", "v1", "v2", "v3")


class MmeInstance:
    """
    A multipoint-evaluation problem.

    Attributes:
        tower (FieldTower): Fields F_p < F_q.
        f (MultiPoly): Polynomial over ``tower.fq``.
        points (list of tuple): Points of F_q^n.
    """

    def __init__(self, tower, f, points):
        if f.field != tower.fq:
            raise ParamError("polynomial is not defined over the instance field")
        points = [tuple(point) for point in points]
        for point in points:
            if len(point) != f.n:
                raise ParamError(
                    f"point {point!r} has {len(point)} coordinates, expected {f.n}"
                )
            if not all(tower.fq.is_valid(c) for c in point):
                raise ParamError(f"point {point!r} has invalid coordinates")
        self.tower, self.f, self.points = tower, f, points

    def __repr__(self):
        return (
            f"MmeInstance(p={self.tower.p}, a={self.tower.a}, n={self.f.n}, "
            f"d={self.f.d}, N={len(self.points)})"
        )


class MmeRun:
    """
    Bookkeeping of one algorithm run.

    Attributes:
        algorithm (str): Algorithm name.
        preprocessing (OpCounter): Point-independent work.
        local (OpCounter): Per-point work.
        info (dict): Parameters and sizes chosen by the run.
    """

    def __init__(self, algorithm):
        self.algorithm = algorithm
        self.preprocessing = OpCounter()
        self.local = OpCounter()
        self.info = {}

    @contextmanager
    def phase(self, name):
        with count_operations(getattr(self, name)):
            yield


def op_report(run):
    """
    Flat operation report of a run.

    Returns:
        dict: ``algorithm``, the run parameters, then per-phase and total
        counts under dotted keys.
    """
    report = {"algorithm": run.algorithm}
    report.update(run.info)
    for name in ("preprocessing", "local"):
        for key, value in getattr(run, name).as_dict().items():
            report[f"{name}.{key}"] = value
    report["total"] = run.preprocessing.total + run.local.total
    return report


def format_report(report):
    return "".join(f"{key}={value}\n" for key, value in report.items())


def smallest_exponent(p, bound):
    """Smallest b >= 1 with ``p^b > bound``."""
    b = 1
    while p**b <= bound:
        b += 1
    return b


def ceil_log(p, x):
    """Smallest k >= 0 with ``p^k >= x``."""
    k = 0
    while p**k < x:
        k += 1
    return k


def log_star(p, a):
    """Number of ceiling-logarithm steps that bring ``a`` down to 1."""
    count, x = 0, a
    while x > 1:
        x = ceil_log(p, x)
        count += 1
    return count


def iterated_log(p, a, i):
    """Real ``log_p`` applied i times, or None once the value drops to <= 1."""
    x = float(a)
    for _ in range(i):
        if x <= 1:
            return None
        x = math.log(x, p)
    return x


def level_bound(p, d, a, i):
    """
    Upper bound ``2 * max(2, log_p^(i)(a)) * log_p(dp)`` on a_i.

    A relative slack of 1e-9 keeps the floating-point comparison
    conservative.
    """
    r = iterated_log(p, a, i)
    r = 2.0 if r is None else max(2.0, r)
    return 2 * r * math.log(d * p, p) * (1 + 1e-9)


def a_sequence(a, d, p, ell):
    """
    ``(a_0, ..., a_{ell+1})`` with ``a_0 = a`` and p^(a_{i+1}) > d * a_i.

    Raises:
        DepthError: If ``ell`` exceeds log*_p(a).
    """
    limit = log_star(p, a)
    if ell < 0 or ell > limit:
        raise DepthError(
            f"depth ell={ell} outside [0, log*_{p}({a})={limit}]"
        )
    seq = [a]
    for _ in range(ell + 1):
        seq.append(smallest_exponent(p, d * seq[-1]))
    return tuple(seq)


def default_depth(p, a, d):
    """Deepest ell whose a-sequence is still strictly decreasing."""
    limit = log_star(p, a)
    seq = [a, smallest_exponent(p, d * a)]
    ell = 0
    while ell + 1 <= limit:
        nxt = smallest_exponent(p, d * seq[-1])
        if nxt >= seq[-1] or seq[-1] >= seq[-2]:
            break
        seq.append(nxt)
        ell += 1
    return ell


class DerivativeGrid:
    """
    Grid tables of a family of Hasse derivatives on ``S^n``.

    Attributes:
        S (list): Grid coordinates.
        K (int): Maximal derivative order.
        tables (dict): Exponent vector to :class:`GridTable`.
    """

    def __init__(self, S, K, tables):
        self.S, self.K, self.tables = S, K, tables

    @classmethod
    def build(cls, derivatives, ext, S, K, threads=None):
        tables = {
            e: grid_eval(g.embed(ext), S, threads) for e, g in derivatives.items()
        }
        return cls(S, K, tables)

    @property
    def cells(self):
        return sum(len(table) for table in self.tables.values())

    def value(self, exponent, point):
        try:
            table = self.tables[exponent]
        except KeyError:
            raise MissingDerivativeError(
                f"derivative {exponent} is not tabulated"
            ) from None
        return table.lookup(point)


class PointEvaluations:
    """Derivative values at the points of one descent level."""

    def __init__(self, tables):
        self.tables = tables

    def value(self, exponent, point):
        try:
            table = self.tables[exponent]
        except KeyError:
            raise MissingDerivativeError(
                f"derivative {exponent} is not evaluated on this level"
            ) from None
        try:
            return table[point]
        except KeyError:
            raise InternalError(f"point {point!r} missing from level") from None


def _derivative_rows(g, nodes, grid, base_exponent, pascal):
    field, n = g.field, g.n
    zero_base = all(e == 0 for e in base_exponent)
    shift = curve_shift(g)
    orders = exponents_up_to(n, n - 1)
    scales = {}
    for b in orders:
        c = 1
        if not zero_base:
            for ej, bj in zip(base_exponent, b):
                c = c * pascal.binom(ej + bj, bj) % field.characteristic
        scales[b] = c
    rows = []
    for gamma in nodes:
        point = g.at(gamma)
        series = shift.at(gamma, n)
        powers = []
        for s in series:
            row = [[field.one]]
            for _ in range(n - 1):
                row.append(series_mul(field, row[-1], s, n))
            powers.append(row)
        h = [field.zero] * n
        for b in orders:
            if scales[b] == 0:
                continue
            target = tuple(ej + bj for ej, bj in zip(base_exponent, b))
            value = grid.value(target, point)
            if value == field.zero:
                continue
            if scales[b] != 1:
                value = field.mul(field.from_int(scales[b]), value)
            k = sum(b)
            prod = [field.one]
            for i, bi in enumerate(b):
                if bi:
                    prod = series_mul(field, prod, powers[i][bi], n - k)
            for j, c in enumerate(prod[: n - k]):
                if c != field.zero:
                    h[k + j] = field.add(h[k + j], field.mul(value, c))
        rows.append(h)
    return rows


def evaluate_derivatives_a(g, grid, nodes=None):
    """
    Hasse derivatives of ``h = f o g`` up to order n - 1 at grid nodes.

    Uses ``h(gamma + Z) = sum_e d_e f(g(gamma)) Z^|e| g~(gamma, Z)^e``
    truncated at ``Z^(n-1)``.

    Args:
        g (Curve): Curve with coefficients in the grid's prime field.
        grid (DerivativeGrid): Tables of all derivatives of order < n.
        nodes (list, optional): Nodes to use; the whole grid when omitted.

    Returns:
        list: One row ``(h^(0)(gamma), ..., h^(n-1)(gamma))`` per node.
    """
    nodes = grid.S if nodes is None else nodes
    return _derivative_rows(g, nodes, grid, (0,) * g.n, None)


def evaluate_derivatives_b(g, e, grid, nodes=None, pascal=None):
    """
    Hasse derivatives of ``d_e(f) o g`` up to order n - 1.

    The data of the next level supplies ``d_{e+b} f``; the factor
    ``binom(e + b, b) mod p`` turns it into ``d_b(d_e f)``.

    Args:
        g (Curve): Curve through a point of the current level.
        e (tuple): Base exponent.
        grid: :class:`DerivativeGrid` or :class:`PointEvaluations` of the
            next level.
        nodes (list, optional): Nodes of the next level's subfield.
        pascal (PascalTable, optional): Binomials mod p.
    """
    nodes = grid.S if nodes is None else nodes
    if pascal is None:
        top = max(e, default=0) + g.n
        pascal = PascalTable(g.field.characteristic, g.n, top + 1)
    return _derivative_rows(g, nodes, grid, tuple(e), pascal)


def _ground_curve(tower, ext, point):
    coordinates = [
        [ext.from_int(c) for c in extract_ground_coeffs(tower.fq, x)]
        for x in point
    ]
    return Curve.from_coordinates(ext, coordinates)


def _check_anchor(curve, at, expected):
    with suspend_counting():
        if curve.at(at) != tuple(expected):
            raise InternalError("curve does not pass through its point")


def _constant_results(inst):
    return [inst.f.coeffs[0]] * len(inst.points)


def mme_naive(inst, run=None, threads=None):
    """Evaluate f at every point by nested Horner evaluation."""
    run = run or MmeRun("naive")
    with run.phase("local"):
        return parallel_map(inst.f.evaluate, inst.points, threads)


def mme_v1(inst, run=None, threads=None):
    """
    Curve interpolation on the grid F_{p^b}^n with p^b > adn.
    """
    run = run or MmeRun("v1")
    tower, f = inst.tower, inst.f
    p, a, n, d = tower.p, tower.a, f.n, f.d
    if not inst.points:
        return []
    if d == 1:
        return _constant_results(inst)
    D = a * d * n - 1
    b = smallest_exponent(p, a * d * n)
    with run.phase("preprocessing"):
        ext = tower.extension(b)
        S = enumerate_subfield(ext, p, b)
        grid = grid_eval(f.embed(ext), S, threads)
        plan = InterpolationPlan(ext, S, D)
        y0 = ext.embed(tower.y0)
        plan.weights_at(y0)
    if len(S) <= D:
        raise InternalError(f"p^b={len(S)} does not exceed adn={D + 1}")
    run.info.update(b=b, grid_cells=len(grid), nodes=len(plan.nodes))
    logger.debug(f"v1: b={b} grid={len(grid)} N={len(inst.points)}")

    def local(point):
        curve = _ground_curve(tower, ext, point)
        _check_anchor(curve, y0, [ext.embed(c) for c in point])
        values = [grid.lookup(curve.at(gamma)) for gamma in plan.nodes]
        return ext.project(plan.evaluate_at(y0, values))

    with run.phase("local"):
        return parallel_map(local, inst.points, threads)


def mme_v2(inst, run=None, threads=None):
    """
    Hermite reconstruction on the grid F_{p^b}^n with p^b > ad.
    """
    run = run or MmeRun("v2")
    tower, f = inst.tower, inst.f
    p, a, n, d = tower.p, tower.a, f.n, f.d
    if not inst.points:
        return []
    if d == 1:
        return _constant_results(inst)
    D = a * d * n - 1
    b = smallest_exponent(p, a * d)
    with run.phase("preprocessing"):
        ext = tower.extension(b)
        S = enumerate_subfield(ext, p, b)
        grid = DerivativeGrid.build(hasse_set(f, n - 1), ext, S, n - 1, threads)
        plan = InterpolationPlan(ext, S, D, multiplicity=n)
        y0 = ext.embed(tower.y0)
        plan.weights_at(y0)
    if n * len(S) <= D:
        raise InternalError(f"n*p^b={n * len(S)} does not exceed adn={D + 1}")
    run.info.update(b=b, grid_cells=grid.cells, nodes=len(plan.nodes))
    logger.debug(f"v2: b={b} grid={grid.cells} N={len(inst.points)}")

    def local(point):
        curve = _ground_curve(tower, ext, point)
        _check_anchor(curve, y0, [ext.embed(c) for c in point])
        rows = evaluate_derivatives_a(curve, grid, plan.nodes)
        return ext.project(plan.evaluate_at(y0, plan.flatten(rows)))

    with run.phase("local"):
        return parallel_map(local, inst.points, threads)


class DescentLevel:
    """
    One level of the descent: the field F_{q_i}, its subfield F_{p^{a_i}}
    and the power basis of that subfield.
    """

    def __init__(self, tower, index, degree, is_ground):
        self.tower, self.index, self.degree = tower, index, degree
        p = tower.p
        self.field = tower.fq if is_ground else tower.extension(degree)
        self.subfield = enumerate_subfield(self.field, p, degree)
        self.basis = SubfieldBasis(self.field, p, degree, elements=self.subfield)

    @property
    def beta(self):
        return self.basis.beta

    def lift(self, c):
        """Embed an F_q element into this level's field."""
        return c if self.field == self.tower.fq else self.field.embed(c)


class DescentPlan:
    """
    Field sequence and bookkeeping of the descending evaluation.

    Attributes:
        ell (int): Depth.
        a_seq (tuple): ``(a_0, ..., a_{ell+1})``.
        levels (list): ``ell + 2`` :class:`DescentLevel` objects.
        plans (list): Per level i <= ell, the Hermite plan over
            F_{q_{i+1}} that reconstructs curves through level-i points.
        points_sizes (list): Measured ``|Points_i|``, filled by a run.
    """

    def __init__(self, tower, n, d, ell):
        self.tower, self.n, self.d, self.ell = tower, n, d, ell
        self.a_seq = a_sequence(tower.a, d, tower.p, ell)
        p = tower.p
        for i in range(ell + 1):
            cur, nxt = self.a_seq[i], self.a_seq[i + 1]
            if not (p**nxt > d * cur >= p ** (nxt - 1)):
                raise InternalError(f"a-sequence step {cur} -> {nxt} not minimal")
        self.levels = [
            DescentLevel(tower, i, degree, i == 0)
            for i, degree in enumerate(self.a_seq)
        ]
        self.plans = []
        for i in range(ell + 1):
            nxt = self.levels[i + 1]
            D = n * d * self.a_seq[i] - 1
            self.plans.append(
                InterpolationPlan(nxt.field, nxt.subfield, D, multiplicity=n)
            )
        self.points_sizes = []

    def curve_through(self, i, point):
        """Curve over F_{q_{i+1}} with F_p coefficients through ``point``."""
        level, target = self.levels[i], self.levels[i + 1].field
        digits = [level.basis.decompose(x) for x in point]
        with suspend_counting():
            anchor = Curve.from_coordinates(
                level.field, [[level.field.from_int(c) for c in row] for row in digits]
            )
        _check_anchor(anchor, level.beta, point)
        return Curve.from_coordinates(
            target, [[target.from_int(c) for c in row] for row in digits]
        )

    def report(self, N):
        p, d = self.tower.p, self.d
        product = N
        for degree in self.a_seq[1:self.ell + 1]:
            product *= p**degree
        growth = N * (2 * d * p * math.log(d * p, p)) ** self.ell
        report = {
            "ell": self.ell,
            "a_seq": ",".join(str(x) for x in self.a_seq),
            "level_bounds": ",".join(
                f"{level_bound(p, d, self.tower.a, i):.3f}"
                for i in range(len(self.a_seq))
            ),
            "points_sizes": ",".join(str(x) for x in self.points_sizes),
            "points_product_bound": product,
            "points_growth_bound": f"{growth:.3f}",
        }
        return report


def mme_v3(inst, ell=None, run=None, threads=None):
    """
    Evaluation by descent through ``ell`` levels of smaller subfields.

    Args:
        inst (MmeInstance): The problem.
        ell (int, optional): Depth; :func:`default_depth` when omitted.
        run (MmeRun, optional): Receives counts and parameters.
        threads (int, optional): Worker count within a level.

    Returns:
        list: ``f(alpha)`` for every input point.
    """
    run = run or MmeRun("v3")
    tower, f = inst.tower, inst.f
    p, n, d = tower.p, f.n, f.d
    if ell is None:
        ell = default_depth(p, tower.a, d)
    a_sequence(tower.a, d, p, ell)
    if not inst.points:
        return []
    if d == 1:
        return _constant_results(inst)

    with run.phase("preprocessing"):
        plan = DescentPlan(tower, n, d, ell)
        top = plan.levels[ell + 1]
        K = (ell + 1) * (n - 1)
        top_grid = DerivativeGrid.build(
            hasse_set(f, K), top.field, top.subfield, K, threads
        )
        pascal = PascalTable(p, n, K + n + 1)
        for hermite in plan.plans:
            hermite.prepare()
    logger.debug(f"v3: a_seq={plan.a_seq} top grid={top_grid.cells}")

    with run.phase("local"):
        points = [list(dict.fromkeys(inst.points))]
        curves = []
        for i in range(ell + 1):
            level_curves = {
                alpha: plan.curve_through(i, alpha) for alpha in points[i]
            }
            curves.append(level_curves)
            if i == ell:
                break
            expanded = dict.fromkeys(
                curve.at(gamma)
                for curve in level_curves.values()
                for gamma in plan.plans[i].nodes
            )
            if len(expanded) > len(points[i]) * p ** plan.a_seq[i + 1]:
                raise InternalError(f"Points_{i + 1} exceeds its product bound")
            points.append(list(expanded))
        plan.points_sizes = [len(level) for level in points]

        evaluations = top_grid
        for i in range(ell, -1, -1):
            level, hermite = plan.levels[i], plan.plans[i]
            nxt = plan.levels[i + 1].field
            tables = {}
            for e in exponents_up_to(n, i * (n - 1)):

                def reconstruct(alpha, e=e, below=evaluations):
                    rows = evaluate_derivatives_b(
                        curves[i][alpha], e, below, hermite.nodes, pascal
                    )
                    h = hermite.coefficients(hermite.flatten(rows))
                    lifted = UniPoly(
                        level.field, [level.lift(nxt.project(c)) for c in h.coeffs]
                    )
                    return horner_eval(lifted, level.beta)

                values = parallel_map(reconstruct, points[i], threads)
                tables[e] = dict(zip(points[i], values))
            evaluations = PointEvaluations(tables)

    run.info.update(plan.report(len(inst.points)))
    run.info["grid_cells"] = top_grid.cells
    zero = (0,) * n
    return [evaluations.value(zero, alpha) for alpha in inst.points]


def run_algorithm(inst, algorithm, ell=None, threads=None):
    """
    Run one algorithm and return ``(results, run)``.
    """
    if ell is not None and algorithm != "v3":
        raise ParamError("ell only applies to v3")
    run = MmeRun(algorithm)
    if algorithm == "naive":
        results = mme_naive(inst, run, threads)
    elif algorithm == "v1":
        results = mme_v1(inst, run, threads)
    elif algorithm == "v2":
        results = mme_v2(inst, run, threads)
    elif algorithm == "v3":
        results = mme_v3(inst, ell, run, threads)
    else:
        raise ParamError(f"unknown algorithm {algorithm!r}")
    return results, run
