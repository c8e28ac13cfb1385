"""
Univariate polynomial evaluation data structure.

``ds_build`` maps f to the table of its inverse Kronecker image F on the
subfield grid F_{p^b}^m. ``ds_query`` evaluates f at any point of F_q by
reading the cells hit by a curve through ``(alpha, alpha^d, ...)`` and
interpolating.

Binary layout (all integers little-endian)::

    magic  4s   b"PEVD"
    version u16
    p u32, a u16, b u16, d u32, m u16, n u32
    v0     (a + 1) x u16      modulus of F_q over F_p, low to high
    v      (b + 1) x a x u16  modulus of F_{q^b} over F_q, low to high
    count  u64
    cells  count x (a * b) x u16, canonical grid order

An element of F_{q^b} is written as its a*b absolute coordinates over F_p.
"""
import logging
import random
import struct

from evaluation.exceptions import (
    DegreeError,
    FormatError,
    InternalError,
    ParamError,
    VerificationError,
    VersionError,
)
from evaluation.ffield import (
    FieldTower,
    enumerate_subfield,
    extract_ground_coeffs,
    suspend_counting,
)
from evaluation.mme import smallest_exponent
from evaluation.poly import Curve, GridTable, InterpolationPlan, MultiPoly, grid_eval

logger = logging.getLogger(__name__)

MAGIC = b"PEVD"
FORMAT_VERSION = 1
INTEGRITY_CELLS = 8

_HEADER = struct.Struct("<4sHIHHIHI")
_COUNT = struct.Struct("<Q")


class KroneckerParams:
    """
    Shape of the inverse Kronecker image: m variables of degree below d.

    Attributes:
        n (int): Degree bound of the univariate input.
        m (int): Number of variables.
        d (int): Individual degree bound, with ``d^m >= n``.
    """

    def __init__(self, n, m, d):
        if n < 1 or m < 1:
            raise ParamError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
        if n >= 2 and d < 2:
            raise ParamError(f"d must be at least 2, got {d}")
        if d**m < n:
            raise DegreeError(f"d^m = {d}^{m} = {d**m} is below n = {n}")
        self.n, self.m, self.d = n, m, d

    def __repr__(self):
        return f"KroneckerParams(n={self.n}, m={self.m}, d={self.d})"

    def __eq__(self, other):
        return isinstance(other, KroneckerParams) and (
            (other.n, other.m, other.d) == (self.n, self.m, self.d)
        )


def ds_choose_params(n):
    """
    ``m = ceil(log2 log2 n)`` (at least 1) and the smallest d with d^m >= n.
    """
    if n < 2:
        raise ParamError(f"data structure needs n >= 2, got {n}")
    m = 1
    while 2 ** (2**m) < n:
        m += 1
    d = 2
    while d**m < n:
        d += 1
    return KroneckerParams(n, m, d)


def inverse_kronecker(f, d, m):
    """
    The m-variate F with ``F(X, X^d, ..., X^(d^(m-1))) = f(X)``.

    The coefficient of ``X^t`` moves to the exponent vector of base-d
    digits of t, which under the little-endian exponent encoding is the
    same flat position.

    Raises:
        DegreeError: If ``deg f >= d^m``.
    """
    size = d**m
    if f.degree >= size:
        raise DegreeError(f"degree {f.degree} does not fit below d^m = {size}")
    coeffs = list(f.coeffs) + [f.field.zero] * (size - len(f.coeffs))
    return MultiPoly(f.field, m, d, coeffs)


def kronecker_point(field, alpha, d, m):
    """``(alpha, alpha^d, ..., alpha^(d^(m-1)))``."""
    point = [alpha]
    for _ in range(m - 1):
        point.append(field.pow(point[-1], d))
    return tuple(point)


class AccessLog:
    """
    Distinct cells read, one entry per query.

    Create one log per querying context; a log is not shared between
    threads.
    """

    def __init__(self):
        self.queries = []

    def record(self, cells):
        self.queries.append(len(set(cells)))

    @property
    def last(self):
        return self.queries[-1] if self.queries else 0

    @property
    def total(self):
        return sum(self.queries)


class EvalDataStructure:
    """
    The preprocessed table of a univariate polynomial.

    Attributes:
        tower (FieldTower): F_p < F_q.
        params (KroneckerParams): Shape of the multivariate image.
        b (int): Smallest exponent with p^b > a*d*m.
        ext: F_{q^b}.
        table (GridTable): Values of F on F_{p^b}^m.
    """

    def __init__(self, tower, params, b, ext, table):
        self.tower, self.params, self.b = tower, params, b
        self.ext, self.table = ext, table
        degree = tower.a * params.d * params.m - 1
        self.plan = InterpolationPlan(ext, table.S, degree)
        self.y0 = ext.embed(tower.y0)

    @property
    def cells(self):
        return self.table.values

    @property
    def cell_count(self):
        return len(self.table)

    def space_report(self):
        p, a = self.tower.p, self.tower.a
        d, m = self.params.d, self.params.m
        return {
            "p": p,
            "a": a,
            "b": self.b,
            "d": d,
            "m": m,
            "n": self.params.n,
            "cells": self.cell_count,
            "element_width": a * self.b,
            "space_bound": (p * a * d * m) ** m,
            "query_bound": p * a * d * m,
        }


def _cell_table(tower, params, ext, b, values=None, F=None, threads=None):
    S = enumerate_subfield(ext, tower.p, b)
    if values is None:
        return grid_eval(F.embed(ext), S, threads)
    return GridTable(ext, S, params.m, values)


def ds_build(f, params, tower, threads=None):
    """
    Preprocess ``f`` into an :class:`EvalDataStructure`.

    Args:
        f (UniPoly): Polynomial over ``tower.fq`` with ``deg f < params.n``.
        params (KroneckerParams): Target shape.
        tower (FieldTower): Field of f.
        threads (int, optional): Worker count for the grid evaluation.

    Raises:
        DegreeError: If ``deg f >= n``.
    """
    if f.field != tower.fq:
        raise ParamError("polynomial is not defined over the tower's F_q")
    if f.degree >= params.n:
        raise DegreeError(f"degree {f.degree} is not below n = {params.n}")
    F = inverse_kronecker(f, params.d, params.m)
    p, a = tower.p, tower.a
    b = smallest_exponent(p, a * params.d * params.m)
    ext = tower.extension(b)
    table = _cell_table(tower, params, ext, b, F=F, threads=threads)
    if len(table) != p ** (b * params.m):
        raise InternalError(f"grid holds {len(table)} cells")
    logger.info(
        f"built data structure p={p} a={a} b={b} d={params.d} m={params.m} "
        f"cells={len(table)}"
    )
    return EvalDataStructure(tower, params, b, ext, table)


def ds_query(ds, alpha, access_log=None):
    """
    Evaluate the stored polynomial at ``alpha``.

    Args:
        ds (EvalDataStructure): The table.
        alpha: Element of F_q.
        access_log (AccessLog, optional): Receives the distinct cell count.

    Returns:
        The value ``f(alpha)`` in F_q.
    """
    tower, ext, plan = ds.tower, ds.ext, ds.plan
    fq = tower.fq
    point = kronecker_point(fq, alpha, ds.params.d, ds.params.m)
    curve = Curve.from_coordinates(
        ext,
        [[ext.from_int(c) for c in extract_ground_coeffs(fq, x)] for x in point],
    )
    with suspend_counting():
        if curve.at(ds.y0) != tuple(ext.embed(x) for x in point):
            raise InternalError("query curve does not pass through its point")
    indexes = [ds.table.cell_index(curve.at(gamma)) for gamma in plan.nodes]
    if access_log is not None:
        access_log.record(indexes)
    values = [ds.table.values[i] for i in indexes]
    return ext.project(plan.evaluate_at(ds.y0, values))


def _write_ints(chunks, values):
    chunks.append(struct.pack(f"<{len(values)}H", *values))


def ds_dumps(ds):
    """Serialize to bytes; identical inputs give identical bytes."""
    tower, ext, params = ds.tower, ds.ext, ds.params
    chunks = [
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            tower.p,
            tower.a,
            ds.b,
            params.d,
            params.m,
            params.n,
        )
    ]
    _write_ints(chunks, list(tower.fq.modulus))
    for c in ext.modulus:
        _write_ints(chunks, tower.fq.to_ints(c))
    chunks.append(_COUNT.pack(len(ds.cells)))
    for value in ds.cells:
        _write_ints(chunks, ext.to_ints(value))
    return b"".join(chunks)


def ds_save(ds, sink):
    """Write to a binary file object or a path."""
    data = ds_dumps(ds)
    if hasattr(sink, "write"):
        sink.write(data)
    else:
        with open(sink, "wb") as handle:
            handle.write(data)
    return len(data)


class _Reader:
    def __init__(self, data):
        self.data, self.offset = data, 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.data):
            raise FormatError(
                f"truncated input: need {size} bytes at offset {self.offset}"
            )
        values = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += size
        return values

    def ints(self, count):
        return list(self.take(f"<{count}H"))


def ds_loads(data, f=None, seed=None):
    """
    Rebuild a data structure from bytes.

    Args:
        data (bytes): Serialized data structure.
        f (UniPoly, optional): The original polynomial; when given,
            ``INTEGRITY_CELLS`` seeded cells are recomputed and compared.
        seed (int, optional): Seed for picking the verified cells.

    Raises:
        FormatError: On truncated or inconsistent input.
        VersionError: On an unknown magic or version.
        VerificationError: If an integrity check fails.
    """
    reader = _Reader(data)
    magic, version, p, a, b, d, m, n = reader.take(_HEADER.format)
    if magic != MAGIC:
        raise VersionError(f"unknown magic {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format version {version}")
    if p < 2 or b != smallest_exponent(p, a * d * m):
        raise FormatError(f"b={b} is not the smallest b with p^b > a*d*m")
    try:
        tower = FieldTower(p, a, modulus=reader.ints(a + 1))
        v = [tower.fq.from_ints(reader.ints(a)) for _ in range(b + 1)]
        ext = tower.extension(b, modulus=v)
        params = KroneckerParams(n, m, d)
    except ParamError as exc:
        raise FormatError(f"invalid header: {exc}") from exc
    (count,) = reader.take(_COUNT.format)
    if count != p ** (b * m):
        raise FormatError(f"cell count {count} does not match p^(bm) = {p ** (b * m)}")
    width = a * b
    values = []
    for _ in range(count):
        ints = reader.ints(width)
        if any(c >= p for c in ints):
            raise FormatError(f"cell coordinates {ints} out of range")
        values.append(ext.from_ints(ints))
    if reader.offset != len(data):
        raise FormatError(f"{len(data) - reader.offset} trailing bytes")
    table = _cell_table(tower, params, ext, b, values=values)
    ds = EvalDataStructure(tower, params, b, ext, table)
    if f is not None:
        verify_cells(ds, f, seed)
    return ds


def ds_load(source, f=None, seed=None):
    """Read from a binary file object or a path; see :func:`ds_loads`."""
    if hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as handle:
            data = handle.read()
    return ds_loads(data, f=f, seed=seed)


def verify_cells(ds, f, seed=None, count=INTEGRITY_CELLS):
    """
    Recompute ``count`` seeded cells from ``f``.

    Raises:
        VerificationError: On the first mismatching cell.
    """
    F = inverse_kronecker(f, ds.params.d, ds.params.m).embed(ds.ext)
    rng = random.Random(seed)
    picks = sorted(rng.sample(range(ds.cell_count), min(count, ds.cell_count)))
    with suspend_counting():
        for index in picks:
            point = ds.table.point(index)
            if F.evaluate(point) != ds.cells[index]:
                raise VerificationError(f"cell {index} does not match f")
    return picks
