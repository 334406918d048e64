"""Dense exact matrices over a :class:`~chordcat.fields.Field`.

Everything here is plain Gaussian elimination on small matrices; entries
are Fractions or F_p elements, never floats.  Matrices are immutable
after construction (tuples of tuples).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .fields import Field


class Matrix:
    __slots__ = ("field", "nrows", "ncols", "rows")

    def __init__(self, field: Field, rows: Iterable[Sequence], ncols: int | None = None):
        self.field = field
        self.rows = tuple(tuple(field.of(x) for x in row) for row in rows)
        self.nrows = len(self.rows)
        if self.rows:
            self.ncols = len(self.rows[0])
            if ncols is not None and ncols != self.ncols:
                raise ValueError("ncols disagrees with row length")
        else:
            # 0 x n matrices carry their column count explicitly
            self.ncols = 0 if ncols is None else ncols
        for row in self.rows:
            if len(row) != self.ncols:
                raise ValueError("ragged rows")

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(field: Field, nrows: int, ncols: int) -> "Matrix":
        z = field.zero()
        return Matrix(field, [[z] * ncols for _ in range(nrows)], ncols=ncols)

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        z, o = field.zero(), field.one()
        return Matrix(field, [[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def from_blocks(field: Field, blocks) -> "Matrix":
        """Assemble from a 2D grid of Matrix-or-None (None = zero block).

        Row/column sizes are inferred from the non-None blocks; every grid
        row (column) must have at least one block fixing its size unless
        the corresponding size is forced elsewhere.
        """
        nbrows = len(blocks)
        nbcols = len(blocks[0]) if nbrows else 0
        row_sizes = [None] * nbrows
        col_sizes = [None] * nbcols
        for i in range(nbrows):
            for j in range(nbcols):
                b = blocks[i][j]
                if b is None:
                    continue
                if row_sizes[i] is None:
                    row_sizes[i] = b.nrows
                elif row_sizes[i] != b.nrows:
                    raise ValueError("inconsistent block row sizes")
                if col_sizes[j] is None:
                    col_sizes[j] = b.ncols
                elif col_sizes[j] != b.ncols:
                    raise ValueError("inconsistent block col sizes")
        if any(s is None for s in row_sizes) or any(s is None for s in col_sizes):
            raise ValueError("block grid has a fully-None row or column")
        z = field.zero()
        out = []
        for i in range(nbrows):
            for r in range(row_sizes[i]):
                row = []
                for j in range(nbcols):
                    b = blocks[i][j]
                    if b is None:
                        row.extend([z] * col_sizes[j])
                    else:
                        row.extend(b.rows[r])
                out.append(row)
        return Matrix(field, out, ncols=sum(col_sizes))

    # -- basic algebra ------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and (self.nrows, self.ncols) == (other.nrows, other.ncols)
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.field, self.rows))

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols} over {self.field.name})"

    def _check_field(self, other: "Matrix"):
        if self.field != other.field:
            raise ValueError(f"field mismatch: {self.field.name} vs {other.field.name}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in +")
        return Matrix(
            self.field,
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.rows, other.rows)
            ],
            ncols=self.ncols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def __neg__(self) -> "Matrix":
        return Matrix(self.field, [[-a for a in row] for row in self.rows], ncols=self.ncols)

    def scale(self, c) -> "Matrix":
        c = self.field.of(c)
        return Matrix(self.field, [[c * a for a in row] for row in self.rows], ncols=self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.ncols != other.nrows:
            raise ValueError(
                f"shape mismatch in @: {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}"
            )
        z = self.field.zero()
        cols = list(zip(*other.rows)) if other.rows else []
        out = []
        for row in self.rows:
            new = []
            for col in cols:
                acc = z
                for a, b in zip(row, col):
                    if a and b:
                        acc = acc + a * b
                new.append(acc)
            out.append(new)
        if not cols:
            return Matrix.zero(self.field, self.nrows, other.ncols)
        return Matrix(self.field, out, ncols=other.ncols)

    def transpose(self) -> "Matrix":
        if not self.rows:
            return Matrix(self.field, [[] for _ in range(self.ncols)], ncols=0)
        return Matrix(self.field, list(zip(*self.rows)), ncols=self.nrows)

    def is_zero(self) -> bool:
        return all(not a for row in self.rows for a in row)

    # -- elimination ---------------------------------------------------

    def rref(self):
        """Return (rref_rows, pivot_columns) by Gauss-Jordan elimination."""
        rows = [list(r) for r in self.rows]
        pivots = []
        r = 0
        for c in range(self.ncols):
            pr = None
            for i in range(r, self.nrows):
                if rows[i][c]:
                    pr = i
                    break
            if pr is None:
                continue
            rows[r], rows[pr] = rows[pr], rows[r]
            inv = self.field.one() / rows[r][c]
            rows[r] = [inv * a for a in rows[r]]
            for i in range(self.nrows):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
            if r == self.nrows:
                break
        return rows, pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self) -> list["Matrix"]:
        """Column vectors spanning the null space."""
        rows, pivots = self.rref()
        pivset = set(pivots)
        free = [c for c in range(self.ncols) if c not in pivset]
        z, o = self.field.zero(), self.field.one()
        basis = []
        for fc in free:
            v = [z] * self.ncols
            v[fc] = o
            for r, pc in enumerate(pivots):
                v[pc] = -rows[r][fc]
            basis.append(Matrix(self.field, [[x] for x in v]))
        return basis

    def solve(self, rhs: "Matrix"):
        """One solution x of self @ x = rhs (column vectors), or None."""
        self._check_field(rhs)
        if rhs.nrows != self.nrows:
            raise ValueError("rhs size mismatch")
        aug = Matrix(
            self.field,
            [list(r) + list(b) for r, b in zip(self.rows, rhs.rows)],
        )
        rows, pivots = aug.rref()
        n = self.ncols
        for r in range(len(rows)):
            if all(not rows[r][c] for c in range(n)) and any(
                rows[r][c] for c in range(n, aug.ncols)
            ):
                return None
        z = self.field.zero()
        sol = [[z] * rhs.ncols for _ in range(n)]
        for r, pc in enumerate(pivots):
            if pc < n:
                for j in range(rhs.ncols):
                    sol[pc][j] = rows[r][n + j]
        return Matrix(self.field, sol)

    # -- serialization -------------------------------------------------

    def to_json(self) -> list:
        return [[self.field.unparse(a) for a in row] for row in self.rows]

    @staticmethod
    def from_json(field: Field, data, nrows: int | None = None, ncols: int | None = None) -> "Matrix":
        m = Matrix(field, [[field.parse(a) for a in row] for row in data])
        if nrows is not None and (m.nrows, m.ncols) != (nrows, ncols):
            raise ValueError(f"expected {nrows}x{ncols} matrix, got {m.nrows}x{m.ncols}")
        return m
