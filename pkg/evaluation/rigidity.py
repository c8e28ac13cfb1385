"""
Structured factorization of Vandermonde matrices and low-rank plus sparse
splits of Kronecker products.

``factor_vandermonde`` writes ``V_n = Gamma . W . I~`` over F_{q^b}: W
evaluates m-variate polynomials of degree below d on the subfield grid,
I~ pads a univariate coefficient vector to its inverse Kronecker image,
and every row of Gamma holds the interpolation weights of one curve, so
it has at most p^b nonzeros.
"""
import itertools
import logging
from math import comb

from evaluation import linalg
from evaluation.exceptions import DimensionError, ParamError, VerificationError
from evaluation.ffield import enumerate_subfield, extract_ground_coeffs
from evaluation.mme import smallest_exponent
from evaluation.pevds import kronecker_point
from evaluation.poly import Curve, InterpolationPlan, exponent_of
from evaluation.workers import parallel_map

logger = logging.getLogger(__name__)


class FieldMatrix:
    """
    Dense matrix over a field context.

    Attributes:
        field: Entry field.
        entries (list): Rows of raw field elements.
        row_labels (list, optional): What each row index stands for.
        col_labels (list, optional): What each column index stands for.
    """

    def __init__(self, field, entries, row_labels=None, col_labels=None):
        self.field = field
        self.entries = [list(row) for row in entries]
        widths = {len(row) for row in self.entries}
        if len(widths) > 1:
            raise DimensionError(f"ragged matrix with row widths {sorted(widths)}")
        self.row_labels, self.col_labels = row_labels, col_labels

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, linalg.zeros(field, rows, cols))

    @classmethod
    def identity(cls, field, n):
        return cls(field, linalg.identity(field, n))

    def __repr__(self):
        return f"FieldMatrix({self.rows}x{self.cols} over {self.field!r})"

    def __eq__(self, other):
        return (
            isinstance(other, FieldMatrix)
            and other.field == self.field
            and other.entries == self.entries
        )

    @property
    def rows(self):
        return len(self.entries)

    @property
    def cols(self):
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self):
        return self.rows, self.cols

    def column(self, j):
        return [row[j] for row in self.entries]

    def transpose(self):
        return FieldMatrix(
            self.field,
            linalg.transpose(self.entries),
            self.col_labels,
            self.row_labels,
        )

    def rank(self):
        return linalg.rank(self.field, self.entries)

    def nonzeros(self):
        zero = self.field.zero
        return sum(1 for row in self.entries for x in row if x != zero)

    def row_sparsity(self):
        """Largest number of nonzeros in a row."""
        zero = self.field.zero
        return max(
            (sum(1 for x in row if x != zero) for row in self.entries), default=0
        )

    def col_sparsity(self):
        zero = self.field.zero
        counts = (
            sum(1 for row in self.entries if row[j] != zero) for j in range(self.cols)
        )
        return max(counts, default=0)

    def is_zero(self):
        return self.nonzeros() == 0

    def embed(self, ext):
        return FieldMatrix(
            ext,
            [[ext.embed(x) for x in row] for row in self.entries],
            self.row_labels,
            self.col_labels,
        )

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        field = self.field
        return FieldMatrix(
            field,
            [
                [field.add(x, y) for x, y in zip(r, s)]
                for r, s in zip(self.entries, other.entries)
            ],
        )

    def __matmul__(self, other):
        return FieldMatrix(
            self.field,
            linalg.matmul(self.field, self.entries, other.entries),
            self.row_labels,
            other.col_labels,
        )

    def kron(self, other):
        """Kronecker product; the left factor indexes the outer blocks."""
        field = self.field
        entries = []
        for row in self.entries:
            for inner in other.entries:
                out = []
                for x in row:
                    if x == field.zero:
                        out.extend([field.zero] * len(inner))
                    else:
                        out.extend(
                            field.mul(x, y) if y != field.zero else y for y in inner
                        )
                entries.append(out)
        return FieldMatrix(field, entries)


def kron_all(matrices):
    result = matrices[0]
    for matrix in matrices[1:]:
        result = result.kron(matrix)
    return result


def build_vandermonde(field, generators):
    """The n x n matrix with entry ``(i, j) = alpha_i^j``."""
    n = len(generators)
    if n < 1:
        raise ParamError("a Vandermonde matrix needs at least one generator")
    entries = []
    for alpha in generators:
        row = [field.one]
        for _ in range(n - 1):
            row.append(field.mul(row[-1], alpha))
        entries.append(row)
    return FieldMatrix(field, entries, row_labels=list(generators))


def build_w_block(ext, S, d):
    """One-variable evaluation matrix ``(s^j)`` for s in S, j < d."""
    entries = []
    for s in S:
        row = [ext.one]
        for _ in range(d - 1):
            row.append(ext.mul(row[-1], s))
        entries.append(row)
    return FieldMatrix(ext, entries, row_labels=list(S), col_labels=list(range(d)))


def build_w(p, b, m, d, ext, a=None, threads=None):
    """
    The ``p^(bm) x d^m`` evaluation matrix on the grid F_{p^b}^m.

    Rows follow grid order (first coordinate fastest), columns follow
    exponent order (first exponent least significant), and the entry is
    ``point^exponent``.

    Args:
        p (int): Characteristic.
        b (int): Subfield degree.
        m (int): Number of variables.
        d (int): Individual degree bound.
        ext: F_{q^b}, containing F_{p^b}.
        a (int, optional): Degree of F_q; defaults to
            ``ext.absolute_degree // b``.
        threads (int, optional): Worker count for the rows.

    Raises:
        ParamError: If ``p^b <= a*d*m``.
    """
    if a is None:
        a = ext.absolute_degree // b
    if p**b <= a * d * m:
        raise ParamError(f"p^b = {p**b} must exceed adm = {a * d * m}")
    S = enumerate_subfield(ext, p, b)
    block = build_w_block(ext, S, d).entries
    size = len(S)
    exponents = [exponent_of(c, m, d) for c in range(d**m)]

    def row(index):
        positions = [(index // size**j) % size for j in range(m)]
        out = []
        for e in exponents:
            value = ext.one
            for pos, ej in zip(positions, e):
                if ej:
                    value = ext.mul(value, block[pos][ej])
            out.append(value)
        return out

    entries = parallel_map(row, range(size**m), threads)
    labels = [
        tuple(S[(i // size**j) % size] for j in range(m)) for i in range(size**m)
    ]
    return FieldMatrix(
        ext,
        entries,
        row_labels=labels,
        col_labels=exponents,
    )


def kronecker_permutation(p, b, m):
    """
    Row positions of W inside the m-fold Kronecker power of its block.

    Grid rows and exponent columns share the little-endian digit order,
    and every factor is the same block, so the permutation is the identity.
    """
    return list(range(p ** (b * m)))


def build_itilde(field, d, m, n):
    """``d^m x n`` selection matrix: identity on top of zeros."""
    size = d**m
    if size < n:
        raise ParamError(f"d^m = {size} is below n = {n}")
    entries = [
        [field.one if i == j else field.zero for j in range(n)] for i in range(size)
    ]
    return FieldMatrix(field, entries)


class FactoredVandermonde:
    """
    ``V_n = Gamma . W . I~`` over F_{q^b}.

    Attributes:
        generators (list): The n generators in F_q.
        d (int): Individual degree bound of the Kronecker image.
        m (int): Number of variables.
        b (int): Smallest exponent with p^b > a*d*m.
        vandermonde (FieldMatrix): V_n embedded into F_{q^b}.
        gamma (FieldMatrix): ``n x p^(bm)`` weight matrix.
        w (FieldMatrix): ``p^(bm) x d^m`` evaluation matrix.
        itilde (FieldMatrix): ``d^m x n`` selection matrix.
    """

    def __init__(self, tower, generators, d, m, b, vandermonde, gamma, w, itilde):
        self.tower, self.generators = tower, list(generators)
        self.d, self.m, self.b = d, m, b
        self.vandermonde, self.gamma = vandermonde, gamma
        self.w, self.itilde = w, itilde

    @property
    def n(self):
        return len(self.generators)

    @property
    def ext(self):
        return self.w.field

    def product(self):
        return self.gamma @ self.w @ self.itilde


def _gamma_row(tower, ext, grid_position, plan, y0, d, m, alpha):
    point = kronecker_point(tower.fq, alpha, d, m)
    curve = Curve.from_coordinates(
        ext,
        [
            [ext.from_int(c) for c in extract_ground_coeffs(tower.fq, x)]
            for x in point
        ],
    )
    size = len(grid_position)
    row = {}
    for gamma, weight in zip(plan.nodes, plan.weights_at(y0)):
        cell = sum(
            grid_position[x] * size**j for j, x in enumerate(curve.at(gamma))
        )
        row[cell] = ext.add(row.get(cell, ext.zero), weight)
    return row


def factor_vandermonde(tower, generators, d, m, threads=None):
    """
    Factor the Vandermonde matrix of ``generators``.

    Row i of Gamma places, at the cell ``g_i(gamma)`` of the curve through
    ``(alpha_i, alpha_i^d, ...)``, the Lagrange weight that maps grid values
    to ``h_i(Y0)``; weights of coinciding cells are added.

    Raises:
        ParamError: If ``d^m < n``.
        VerificationError: If the product differs from V_n.
    """
    n = len(generators)
    if n < 1:
        raise ParamError("need at least one generator")
    if d < 1 or m < 1 or d**m < n:
        raise ParamError(f"d^m = {d}^{m} must be at least n = {n}")
    p, a = tower.p, tower.a
    b = smallest_exponent(p, a * d * m)
    ext = tower.extension(b)
    w = build_w(p, b, m, d, ext, a, threads)
    S = enumerate_subfield(ext, p, b)
    plan = InterpolationPlan(ext, S, a * d * m - 1)
    y0 = ext.embed(tower.y0)
    position = {s: i for i, s in enumerate(S)}
    sparse_rows = parallel_map(
        lambda alpha: _gamma_row(tower, ext, position, plan, y0, d, m, alpha),
        generators,
        threads,
    )
    cells = len(S) ** m
    gamma = FieldMatrix(
        ext,
        [[row.get(c, ext.zero) for c in range(cells)] for row in sparse_rows],
        row_labels=list(generators),
        col_labels=w.row_labels,
    )
    itilde = build_itilde(ext, d, m, n)
    vandermonde = build_vandermonde(tower.fq, generators).embed(ext)
    factored = FactoredVandermonde(
        tower, generators, d, m, b, vandermonde, gamma, w, itilde
    )
    if factored.product() != vandermonde:
        raise VerificationError("Gamma . W . I~ differs from the Vandermonde matrix")
    logger.info(
        f"factored V_{n}: b={b} grid={cells} gamma sparsity={gamma.row_sparsity()}"
    )
    return factored


class Claim:
    """One numeric bound checked against a measured value."""

    def __init__(self, name, measured, bound):
        self.name, self.measured, self.bound = name, measured, bound

    @property
    def passed(self):
        return self.measured <= self.bound

    def __repr__(self):
        return f"Claim({self.name}: {self.measured} <= {self.bound})"


class Certificate:
    """
    Measured rank and sparsity of a matrix plus the claims checked on it.
    """

    def __init__(self, shape, rank, row_sparsity, col_sparsity, claims):
        self.shape = shape
        self.rank = rank
        self.row_sparsity, self.col_sparsity = row_sparsity, col_sparsity
        self.claims = claims

    @property
    def passed(self):
        return all(claim.passed for claim in self.claims)

    def lines(self, prefix=""):
        rows, cols = self.shape
        out = [
            f"{prefix}shape={rows}x{cols}",
            f"{prefix}rank={self.rank}",
            f"{prefix}row_sparsity={self.row_sparsity}",
            f"{prefix}col_sparsity={self.col_sparsity}",
        ]
        for claim in self.claims:
            verdict = "pass" if claim.passed else "fail"
            out.append(
                f"{prefix}claim {claim.name}: "
                f"{claim.measured} <= {claim.bound} {verdict}"
            )
        return out


def certify(matrix, rank=None, row_sparsity=None, col_sparsity=None):
    """
    Measure ``matrix`` and check the given upper bounds.

    Args:
        matrix (FieldMatrix): Matrix to certify.
        rank (int, optional): Claimed rank bound.
        row_sparsity (int, optional): Claimed nonzeros-per-row bound.
        col_sparsity (int, optional): Claimed nonzeros-per-column bound.

    Returns:
        Certificate: Measurements and one claim per given bound.
    """
    measured_rank = matrix.rank()
    measured_rows = matrix.row_sparsity()
    measured_cols = matrix.col_sparsity()
    claims = []
    if rank is not None:
        claims.append(Claim("rank", measured_rank, rank))
    if row_sparsity is not None:
        claims.append(Claim("row_sparsity", measured_rows, row_sparsity))
    if col_sparsity is not None:
        claims.append(Claim("col_sparsity", measured_cols, col_sparsity))
    return Certificate(
        matrix.shape, measured_rank, measured_rows, measured_cols, claims
    )


def certify_factorization(factored):
    """
    Certificates of Gamma (sparsity at most p^b) and of V_n (rank equal
    to that of the product).
    """
    p, b = factored.tower.p, factored.b
    gamma = certify(factored.gamma, row_sparsity=p**b)
    product = factored.product()
    vandermonde = certify(factored.vandermonde, rank=product.rank())
    zero = factored.ext.zero
    itilde_ok = all(
        sum(1 for x in factored.itilde.column(j) if x != zero) == 1
        for j in range(factored.n)
    )
    return {
        "gamma": gamma,
        "vandermonde": vandermonde,
        "itilde": itilde_ok,
        "expanded_row_sparsity": gamma.row_sparsity * factored.tower.a * b,
    }


class KroneckerSplit:
    """
    ``L + S`` decomposition of a Kronecker product of split factors.

    Attributes:
        low (FieldMatrix): Sum of the terms with fewer than t sparse factors.
        sparse (FieldMatrix): Sum of the remaining terms.
        t (int): Threshold.
        rank_bound (int): Bound on ``rank(low)``.
        sparsity_bound (int): Bound on the row and column sparsity of ``sparse``.
    """

    def __init__(self, low, sparse, t, rank_bound, sparsity_bound):
        self.low, self.sparse, self.t = low, sparse, t
        self.rank_bound, self.sparsity_bound = rank_bound, sparsity_bound

    def certify(self):
        return (
            certify(self.low, rank=self.rank_bound),
            certify(
                self.sparse,
                row_sparsity=self.sparsity_bound,
                col_sparsity=self.sparsity_bound,
            ),
        )


def kronecker_split(factors, t):
    """
    Split ``(L_1 + S_1) x ... x (L_m + S_m)`` by the number of sparse factors.

    Args:
        factors (list): m pairs ``(L_i, S_i)`` of equally shaped matrices.
        t (int): Terms with fewer than t sparse factors go to the low-rank part.

    Returns:
        KroneckerSplit: Both parts and their bounds.

    Raises:
        ParamError: If t is outside ``[0, m]``.
        DimensionError: If the factor shapes differ.
        VerificationError: If the parts do not add up to the product.
    """
    m = len(factors)
    if m < 1:
        raise ParamError("need at least one factor pair")
    if not 0 <= t <= m:
        raise ParamError(f"threshold t={t} outside [0, {m}]")
    shape = factors[0][0].shape
    for low, sparse in factors:
        if low.shape != shape or sparse.shape != shape:
            raise DimensionError(
                f"factor shapes {low.shape} and {sparse.shape} differ from {shape}"
            )
    field = factors[0][0].field
    rows, cols = shape
    low_total = FieldMatrix.zeros(field, rows**m, cols**m)
    sparse_total = FieldMatrix.zeros(field, rows**m, cols**m)
    for mask in itertools.product((0, 1), repeat=m):
        term = kron_all([pair[choice] for pair, choice in zip(factors, mask)])
        if sum(mask) < t:
            low_total = low_total + term
        else:
            sparse_total = sparse_total + term
    full = kron_all([low + sparse for low, sparse in factors])
    if low_total + sparse_total != full:
        raise VerificationError("split parts do not add up to the Kronecker product")

    max_rank = max(low.rank() for low, _ in factors)
    max_sparsity = max(
        max(sparse.row_sparsity(), sparse.col_sparsity()) for _, sparse in factors
    )
    inner, outer = min(shape), max(shape)
    rank_bound = sum(
        comb(m, j) * max_rank ** (m - j) * inner**j for j in range(t)
    )
    sparsity_bound = sum(
        comb(m, j) * max_sparsity**j * outer ** (m - j) for j in range(t, m + 1)
    )
    return KroneckerSplit(low_total, sparse_total, t, rank_bound, sparsity_bound)


def toy_block_split(block):
    """
    First column as the rank-one part, remaining columns as the sparse part.
    """
    field = block.field
    low, sparse = [], []
    for row in block.entries:
        low.append([row[0]] + [field.zero] * (len(row) - 1))
        sparse.append([field.zero] + row[1:])
    return FieldMatrix(field, low), FieldMatrix(field, sparse)


class VandermondeSplit:
    """
    ``V_n = Gamma L I~ + Gamma S I~`` from a split of W.

    Attributes:
        split (KroneckerSplit): Split of W.
        low (FieldMatrix): ``Gamma . L . I~``.
        sparse (FieldMatrix): ``Gamma . S . I~``.
        rank_bound (int): ``rank(L)``.
        sparsity_bound (int): Row sparsity of Gamma times that of S.
    """

    def __init__(self, split, low, sparse, rank_bound, sparsity_bound):
        self.split, self.low, self.sparse = split, low, sparse
        self.rank_bound, self.sparsity_bound = rank_bound, sparsity_bound

    def certify(self):
        return (
            certify(self.low, rank=self.rank_bound),
            certify(self.sparse, row_sparsity=self.sparsity_bound),
        )


def vandermonde_split(factored, block_split, t):
    """
    Push a split of W's one-variable block through the factorization.

    Args:
        factored (FactoredVandermonde): The factorization.
        block_split (tuple): ``(L, S)`` with ``L + S`` equal to the block.
        t (int): Threshold for :func:`kronecker_split`.

    Raises:
        VerificationError: If the block split or the resulting sum is wrong.
    """
    ext, p, b = factored.ext, factored.tower.p, factored.b
    S = enumerate_subfield(ext, p, b)
    block = build_w_block(ext, S, factored.d)
    low_block, sparse_block = block_split
    if low_block + sparse_block != FieldMatrix(ext, block.entries):
        raise VerificationError("block split does not add up to the W block")
    split = kronecker_split([block_split] * factored.m, t)
    if split.low + split.sparse != FieldMatrix(ext, factored.w.entries):
        raise VerificationError("split of W does not add up to W")
    gamma, itilde = factored.gamma, factored.itilde
    low = gamma @ split.low @ itilde
    sparse = gamma @ split.sparse @ itilde
    if low + sparse != factored.vandermonde:
        raise VerificationError("split parts do not add up to V_n")
    return VandermondeSplit(
        split,
        low,
        sparse,
        split.low.rank(),
        gamma.row_sparsity() * split.sparse.row_sparsity(),
    )
