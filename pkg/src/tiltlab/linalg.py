"""Exact linear algebra over GF(p) and the rationals.

Scalars are plain python ints (reduced mod p) or fractions.Fraction; no
floats appear anywhere.  Row reduction uses partial pivoting by first
nonzero entry with lowest-index tie-breaking, so every derived basis is
deterministic.
"""

from __future__ import annotations

from fractions import Fraction


class Field:
    """Common interface for the two supported scalar fields."""

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def of(self, x):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def parse(self, text):
        """Read a scalar from its report form ("3", "-2/5")."""
        text = str(text).strip()
        if "/" in text:
            num, den = text.split("/")
            return self.div(self.of(int(num)), self.of(int(den)))
        return self.of(int(text))

    def to_str(self, a):
        return str(a)


class PrimeField(Field):
    """GF(p) for a word-sized prime p; elements are ints in [0, p)."""

    def __init__(self, p):
        p = int(p)
        if p < 2:
            raise ValueError(f"prime must be at least 2, got {p}")
        for d in range(2, min(p, 1 << 20)):
            if d * d > p:
                break
            if p % d == 0:
                raise ValueError(f"{p} is not prime")
        self.p = p

    def zero(self):
        return 0

    def one(self):
        return 1 % self.p

    def of(self, x):
        if isinstance(x, Fraction):
            if x.denominator == 1:
                return x.numerator % self.p
            return self.div(x.numerator % self.p, x.denominator % self.p)
        return int(x) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of 0 in GF(p)")
        return pow(a, self.p - 2, self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return f"GF({self.p})"


class RationalField(Field):
    """The rationals with exact Fraction arithmetic."""

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def of(self, x):
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return 1 / Fraction(a)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = RationalField()


def field_from_spec(spec):
    """Build a field from its JSON form: "rational" or {"prime": p}."""
    if spec == "rational":
        return QQ
    if isinstance(spec, dict) and set(spec) == {"prime"}:
        return PrimeField(spec["prime"])
    raise ValueError(f"unrecognized field spec: {spec!r}")


class Mat:
    """Immutable dense matrix over a Field; rows stored as tuples."""

    __slots__ = ("field", "nrows", "ncols", "data")

    def __init__(self, field, data, ncols=None):
        self.field = field
        rows = tuple(tuple(r) for r in data)
        self.nrows = len(rows)
        if rows:
            self.ncols = len(rows[0])
        else:
            self.ncols = 0 if ncols is None else int(ncols)
        for r in rows:
            if len(r) != self.ncols:
                raise ValueError("ragged rows")
        self.data = rows

    @classmethod
    def from_rows(cls, field, rows):
        return cls(field, [[field.of(x) for x in row] for row in rows])

    @classmethod
    def zeros(cls, field, nrows, ncols):
        z = field.zero()
        return cls(field, [[z] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def identity(cls, field, n):
        z, o = field.zero(), field.one()
        return cls(field, [[o if i == j else z for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def row(self, i):
        return self.data[i]

    def __eq__(self, other):
        return (
            isinstance(other, Mat)
            and other.field == self.field
            and (other.nrows, other.ncols) == (self.nrows, self.ncols)
            and other.data == self.data
        )

    def __hash__(self):
        return hash((self.field, self.nrows, self.ncols, self.data))

    def __repr__(self):
        return f"Mat({self.nrows}x{self.ncols} over {self.field!r})"

    def is_zero(self):
        z = self.field.zero()
        return all(x == z for row in self.data for x in row)

    def add(self, other):
        self._check_same_shape(other)
        f = self.field
        return Mat(f, [
            [f.add(a, b) for a, b in zip(ra, rb)]
            for ra, rb in zip(self.data, other.data)
        ], ncols=self.ncols)

    def sub(self, other):
        self._check_same_shape(other)
        f = self.field
        return Mat(f, [
            [f.sub(a, b) for a, b in zip(ra, rb)]
            for ra, rb in zip(self.data, other.data)
        ], ncols=self.ncols)

    def scale(self, c):
        f = self.field
        c = f.of(c)
        return Mat(f, [[f.mul(c, x) for x in row] for row in self.data],
                   ncols=self.ncols)

    def neg(self):
        f = self.field
        return Mat(f, [[f.neg(x) for x in row] for row in self.data],
                   ncols=self.ncols)

    def mul(self, other):
        """Matrix product self @ other."""
        if self.field != other.field:
            raise ValueError("field mismatch")
        if self.ncols != other.nrows:
            raise ValueError(
                f"shape mismatch: {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}"
            )
        f = self.field
        z = f.zero()
        ot = other.transpose().data
        out = []
        for row in self.data:
            out_row = []
            for col in ot:
                acc = z
                for a, b in zip(row, col):
                    if a != z and b != z:
                        acc = f.add(acc, f.mul(a, b))
                out_row.append(acc)
            out.append(out_row)
        return Mat(f, out, ncols=other.ncols)

    def transpose(self):
        if self.nrows == 0:
            return Mat(self.field, [[] for _ in range(self.ncols)], ncols=0)
        return Mat(self.field, list(zip(*self.data)), ncols=self.nrows)

    def hstack(self, other):
        if self.nrows != other.nrows:
            raise ValueError("row count mismatch in hstack")
        return Mat(self.field, [ra + rb for ra, rb in zip(self.data, other.data)],
                   ncols=self.ncols + other.ncols)

    def vstack(self, other):
        if self.ncols != other.ncols:
            raise ValueError("column count mismatch in vstack")
        return Mat(self.field, self.data + other.data, ncols=self.ncols)

    def submatrix(self, row_idx, col_idx):
        return Mat(self.field, [
            [self.data[i][j] for j in col_idx] for i in row_idx
        ], ncols=len(col_idx))

    def _check_same_shape(self, other):
        if self.field != other.field:
            raise ValueError("field mismatch")
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")

    def rref(self):
        """Reduced row echelon form.

        Returns (R, pivots) where pivots is the tuple of pivot column
        indices.  Pivot choice is the first row with a nonzero entry in
        the current column, so the result is deterministic.
        """
        f = self.field
        z = f.zero()
        rows = [list(r) for r in self.data]
        pivots = []
        rank = 0
        for col in range(self.ncols):
            pivot = None
            for r in range(rank, self.nrows):
                if rows[r][col] != z:
                    pivot = r
                    break
            if pivot is None:
                continue
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            inv = f.inv(rows[rank][col])
            rows[rank] = [f.mul(inv, x) for x in rows[rank]]
            for r in range(self.nrows):
                if r != rank and rows[r][col] != z:
                    c = rows[r][col]
                    rows[r] = [f.sub(x, f.mul(c, y)) for x, y in zip(rows[r], rows[rank])]
            pivots.append(col)
            rank += 1
            if rank == self.nrows:
                break
        return Mat(f, rows, ncols=self.ncols), tuple(pivots)

    def rank(self):
        _, pivots = self.rref()
        return len(pivots)

    def kernel_basis(self):
        """Columns spanning ker(self), i.e. self @ K = 0."""
        f = self.field
        z, o = f.zero(), f.one()
        R, pivots = self.rref()
        pivset = set(pivots)
        free = [j for j in range(self.ncols) if j not in pivset]
        cols = []
        for j in free:
            v = [z] * self.ncols
            v[j] = o
            for r, pc in enumerate(pivots):
                v[pc] = f.neg(R.data[r][j])
            cols.append(v)
        if not cols:
            return Mat(f, [[] for _ in range(self.ncols)], ncols=0)
        return Mat(f, list(zip(*cols)), ncols=len(cols))

    def solve(self, b):
        """Solve self @ x = b for a column-stacked b; None if inconsistent."""
        if b.nrows != self.nrows:
            raise ValueError("shape mismatch in solve")
        f = self.field
        z = f.zero()
        aug = self.hstack(b)
        R, pivots = aug.rref()
        for col in pivots:
            if col >= self.ncols:
                return None
        xs = []
        for k in range(b.ncols):
            x = [z] * self.ncols
            for r, pc in enumerate(pivots):
                x[pc] = R.data[r][self.ncols + k]
            xs.append(x)
        if not xs:
            return Mat(f, [[] for _ in range(self.ncols)], ncols=0)
        return Mat(f, list(zip(*xs)), ncols=len(xs))

    def row_space_basis(self):
        """Rows spanning the row space, in echelon form."""
        R, pivots = self.rref()
        return Mat(self.field, [R.data[i] for i in range(len(pivots))],
                   ncols=self.ncols)

    def left_kernel_basis(self):
        """Rows v with v @ self = 0."""
        return self.transpose().kernel_basis().transpose()

    def is_invertible(self):
        return self.nrows == self.ncols and self.rank() == self.nrows

    def inverse(self):
        if self.nrows != self.ncols:
            raise ValueError("inverse of non-square matrix")
        x = self.solve(Mat.identity(self.field, self.nrows))
        if x is None:
            raise ValueError("matrix is singular")
        return x

    def charpoly(self):
        """Coefficients [c_0, ..., c_n] of det(tI - self), division free.

        Uses the Berkowitz algorithm so it works verbatim over GF(p).
        """
        f = self.field
        n = self.nrows
        if n != self.ncols:
            raise ValueError("characteristic polynomial of non-square matrix")
        if n == 0:
            return [f.one()]
        z, o = f.zero(), f.one()

        def mat_vec(M, v):
            out = []
            for row in M:
                acc = z
                for a, b in zip(row, v):
                    acc = f.add(acc, f.mul(a, b))
                out.append(acc)
            return out

        A = [list(r) for r in self.data]
        # vectors[i] holds the charpoly of the leading i x i block, lowest degree last
        poly = [o]
        for k in range(1, n + 1):
            a = A[k - 1][k - 1]
            if k == 1:
                # t - a
                poly = [o, f.neg(a)]
                continue
            R = [A[k - 1][j] for j in range(k - 1)]
            C = [[A[i][k - 1]] for i in range(k - 1)]
            Ak = [row[: k - 1] for row in A[: k - 1]]
            # Toeplitz column: [1, -a, -R C, -R Ak C, -R Ak^2 C, ...]
            col = [o, f.neg(a)]
            v = [c[0] for c in C]
            for _ in range(k - 1):
                acc = z
                for x, y in zip(R, v):
                    acc = f.add(acc, f.mul(x, y))
                col.append(f.neg(acc))
                v = mat_vec(Ak, v)
            col = col[: k + 1]
            new = [z] * (k + 1)
            for i, c in enumerate(col):
                if c == z:
                    continue
                for j, p in enumerate(poly):
                    if i + j <= k:
                        new[i + j] = f.add(new[i + j], f.mul(c, p))
            poly = new
        # poly is highest-degree-first; return lowest-first
        return list(reversed(poly))

    def pretty(self):
        return "[" + "; ".join(
            " ".join(self.field.to_str(x) for x in row) for row in self.data
        ) + "]"


def mat_from_int_rows(field, rows):
    return Mat.from_rows(field, rows)


def smith_normal_form(rows):
    """Invariant factors of an integer matrix, nonnegative, each dividing the next.

    Input is a list of int rows; output has length min(nrows, ncols) with
    trailing zeros for rank deficiency.
    """
    A = [list(map(int, r)) for r in rows]
    n = len(A)
    m = len(A[0]) if n else 0
    result = []
    top = 0
    while top < min(n, m):
        # move a nonzero entry of smallest absolute value to the pivot spot
        best = None
        for i in range(top, n):
            for j in range(top, m):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i0, j0 = best
        A[top], A[i0] = A[i0], A[top]
        for row in A:
            row[top], row[j0] = row[j0], row[top]
        progress = True
        while progress:
            progress = False
            for i in range(top + 1, n):
                if A[i][top] % A[top][top] != 0:
                    q = A[i][top] // A[top][top]
                    A[i] = [x - q * y for x, y in zip(A[i], A[top])]
                    if A[i][top] != 0:
                        A[top], A[i] = A[i], A[top]
                        progress = True
            for i in range(top + 1, n):
                q = A[i][top] // A[top][top]
                A[i] = [x - q * y for x, y in zip(A[i], A[top])]
            for j in range(top + 1, m):
                if A[top][j] % A[top][top] != 0:
                    q = A[top][j] // A[top][top]
                    for row in A:
                        row[j] -= q * row[top]
                    if A[top][j] != 0:
                        for row in A:
                            row[top], row[j] = row[j], row[top]
                        progress = True
            for j in range(top + 1, m):
                q = A[top][j] // A[top][top]
                for row in A:
                    row[j] -= q * row[top]
            if not progress:
                # pivot must divide every remaining entry for the divisibility chain
                for i in range(top + 1, n):
                    for j in range(top + 1, m):
                        if A[i][j] % A[top][top] != 0:
                            A[top] = [x + y for x, y in zip(A[top], A[i])]
                            progress = True
                            break
                    if progress:
                        break
        result.append(abs(A[top][top]))
        top += 1
    while len(result) < min(n, m):
        result.append(0)
    return result


def is_unimodular(rows):
    """True when the integer matrix is square with all Smith invariants 1."""
    A = [list(r) for r in rows]
    if not A or len(A) != len(A[0]):
        return False
    return all(d == 1 for d in smith_normal_form(A))
