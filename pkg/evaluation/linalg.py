"""
Dense linear algebra over the finite fields of :mod:`evaluation.ffield`.

Matrices are lists of rows holding raw field elements. Every routine takes
the field context first so that arithmetic goes through the counted field
operations.
"""
from evaluation.exceptions import DimensionError, SingularSystemError


def identity(field, n):
    return [
        [field.one if i == j else field.zero for j in range(n)]
        for i in range(n)
    ]


def zeros(field, rows, cols):
    return [[field.zero] * cols for _ in range(rows)]


def transpose(mat):
    if not mat:
        return []
    return [list(col) for col in zip(*mat)]


def matmul(field, a, b):
    """
    Multiply two matrices, skipping zero entries of the left factor.

    Args:
        field: Field context of both factors.
        a (list): Left factor, ``r x k``.
        b (list): Right factor, ``k x c``.

    Returns:
        list: The ``r x c`` product.
    """
    inner = len(b)
    if a and len(a[0]) != inner:
        raise DimensionError(
            f"cannot multiply {len(a)}x{len(a[0])} by "
            f"{inner}x{len(b[0]) if b else 0}"
        )
    cols = len(b[0]) if b else 0
    result = []
    for row in a:
        out = [field.zero] * cols
        for k, coeff in enumerate(row):
            if coeff == field.zero:
                continue
            other = b[k]
            for j in range(cols):
                if other[j] != field.zero:
                    out[j] = field.add(out[j], field.mul(coeff, other[j]))
        result.append(out)
    return result


def matvec(field, a, vec):
    result = []
    for row in a:
        acc = field.zero
        for coeff, value in zip(row, vec):
            if coeff != field.zero and value != field.zero:
                acc = field.add(acc, field.mul(coeff, value))
        result.append(acc)
    return result


def row_reduce(field, mat):
    """
    Bring a matrix to reduced row echelon form.

    Args:
        field: Field context.
        mat (list): Matrix to reduce; left untouched.

    Returns:
        tuple: ``(rows, pivots)`` with the reduced rows and the pivot
        column of each nonzero row.
    """
    rows = [list(row) for row in mat]
    if not rows:
        return rows, []
    n_rows, n_cols = len(rows), len(rows[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot = next(
            (i for i in range(r, n_rows) if rows[i][c] != field.zero), None
        )
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [
            field.mul(v, inv) if v != field.zero else v for v in rows[r]
        ]
        for i in range(n_rows):
            if i == r or rows[i][c] == field.zero:
                continue
            factor = rows[i][c]
            rows[i] = [
                field.sub(x, field.mul(factor, y)) if y != field.zero else x
                for x, y in zip(rows[i], rows[r])
            ]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(field, mat):
    return len(row_reduce(field, mat)[1])


def nullspace(field, mat, n_cols=None):
    """
    Basis of the right kernel ``{x : mat . x = 0}``.

    Args:
        field: Field context.
        mat (list): Matrix with ``n_cols`` columns.
        n_cols (int, optional): Column count, needed when ``mat`` is empty.

    Returns:
        list: Kernel basis vectors, one per free column in column order.
    """
    if n_cols is None:
        n_cols = len(mat[0])
    rows, pivots = row_reduce(field, mat)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [field.zero] * n_cols
        vec[f] = field.one
        for row, c in zip(rows, pivots):
            if row[f] != field.zero:
                vec[c] = field.neg(row[f])
        basis.append(vec)
    return basis


def solve(field, mat, rhs):
    """
    Solve ``mat . x = rhs`` for a system with a unique solution.

    Overdetermined systems are accepted as long as they are consistent.

    Raises:
        SingularSystemError: If the solution is not unique or does not exist.
    """
    n_cols = len(mat[0])
    augmented = [list(row) + [value] for row, value in zip(mat, rhs)]
    rows, pivots = row_reduce(field, augmented)
    if n_cols in pivots:
        raise SingularSystemError("inconsistent linear system")
    if len(pivots) != n_cols:
        raise SingularSystemError(
            f"system has rank {len(pivots)} for {n_cols} unknowns"
        )
    return [rows[i][n_cols] for i in range(n_cols)]


def inverse(field, mat):
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise DimensionError("only square matrices are invertible")
    augmented = [list(row) + unit for row, unit in zip(mat, identity(field, n))]
    rows, pivots = row_reduce(field, augmented)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise SingularSystemError("matrix is singular")
    return [row[n:] for row in rows[:n]]
