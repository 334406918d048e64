"""Exact homological algebra: bounded chain complexes, chain maps, shifts,
mapping cones, homology, hom-complexes, and the octahedral comparison map.

Conventions (fixed once, used everywhere):

* complexes are cohomologically graded; the differential ``d_n`` maps
  degree ``n`` to degree ``n + 1`` and has shape ``dim(n+1) x dim(n)``;
* ``shift(C, k)`` has ``C[k]^n = C^(n+k)`` and differential ``(-1)^k d``;
* ``cone(f)^n = src^(n+1) (+) tgt^n`` with differential
  ``[[-d_src, 0], [f, d_tgt]]``.

All arithmetic is exact (Fractions or F_p); equality of matrices is the
only numerical test anywhere.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from typing import Callable

from .fields import Field, QQ
from .linalg import Matrix


HomologyProfile = dict  # degree -> dimension, zeros omitted


# ---------------------------------------------------------------------------
# chain complexes


class ChainComplex:
    """A bounded complex of finite-dimensional vector spaces.

    ``dims`` maps degrees to nonzero dimensions; ``diffs`` holds d_n for the
    degrees where both ``dim(n)`` and ``dim(n+1)`` are positive.  Missing
    entries are zero.  Instances are immutable.
    """

    __slots__ = ("field", "dims", "diffs")

    def __init__(self, field: Field, dims: dict, diffs: dict):
        self.field = field
        self.dims = {int(n): int(d) for n, d in dims.items() if d}
        norm = {}
        for n, m in diffs.items():
            n = int(n)
            if self.dims.get(n, 0) and self.dims.get(n + 1, 0) and not m.is_zero():
                if (m.nrows, m.ncols) != (self.dims[n + 1], self.dims[n]):
                    raise ValueError(f"differential at degree {n} has wrong shape")
                norm[n] = m
        self.diffs = norm

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def diff(self, n: int) -> Matrix:
        m = self.diffs.get(n)
        if m is None:
            return Matrix.zero(self.field, self.dim(n + 1), self.dim(n))
        return m

    def degrees(self) -> list:
        return sorted(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def is_zero(self) -> bool:
        return not self.dims

    def __eq__(self, other):
        return (
            isinstance(other, ChainComplex)
            and self.field == other.field
            and self.dims == other.dims
            and self.diffs == other.diffs
        )

    def __hash__(self):
        return hash((self.field, tuple(sorted(self.dims.items()))))

    def __repr__(self):
        body = ", ".join(f"{n}:{d}" for n, d in sorted(self.dims.items()))
        return f"ChainComplex({{{body}}} over {self.field.name})"

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "dims": {str(n): d for n, d in sorted(self.dims.items())},
            "diffs": {str(n): m.to_json() for n, m in sorted(self.diffs.items())},
        }

    @staticmethod
    def from_json(data: dict) -> "ChainComplex":
        f = Field.from_json(data["field"])
        dims = {int(n): d for n, d in data.get("dims", {}).items()}
        diffs = {}
        for n, rows in data.get("diffs", {}).items():
            n = int(n)
            diffs[n] = Matrix.from_json(
                f, rows, nrows=dims.get(n + 1, 0), ncols=dims.get(n, 0)
            )
        return ChainComplex(f, dims, diffs)


def zero_complex(field: Field) -> ChainComplex:
    return ChainComplex(field, {}, {})


def one_term(field: Field, degree: int = 0, dim: int = 1) -> ChainComplex:
    """The complex with a single vector space in one degree."""
    return ChainComplex(field, {degree: dim}, {})


def validate_complex(C: ChainComplex) -> list:
    """Diagnostics for d^2 = 0 and shape consistency; empty iff valid."""
    out = []
    for n, m in C.diffs.items():
        if (m.nrows, m.ncols) != (C.dim(n + 1), C.dim(n)):
            out.append(f"shape mismatch at degree {n}")
    for n in C.dims:
        if C.dim(n) and C.dim(n + 1) and C.dim(n + 2):
            if not (C.diff(n + 1) @ C.diff(n)).is_zero():
                out.append(f"d^2 != 0 at degree {n}")
    return out


def direct_sum(*complexes: ChainComplex) -> ChainComplex:
    if not complexes:
        raise ValueError("empty direct sum needs a field")
    f = complexes[0].field
    dims: dict = {}
    for C in complexes:
        if C.field != f:
            raise ValueError("field mismatch in direct sum")
        for n, d in C.dims.items():
            dims[n] = dims.get(n, 0) + d
    diffs = {}
    for n in list(dims):
        if dims.get(n) and dims.get(n + 1):
            blocks = [[C.diff(n) if i == j else None for j, C in enumerate(complexes)]
                      for i, C in enumerate(complexes)]
            # guard against fully-None grid lines from zero-dim summands
            grid = [
                [complexes[i].diff(n) if i == j else
                 Matrix.zero(f, complexes[i].dim(n + 1), complexes[j].dim(n))
                 for j in range(len(complexes))]
                for i in range(len(complexes))
            ]
            diffs[n] = Matrix.from_blocks(f, grid)
    return ChainComplex(f, dims, diffs)


# ---------------------------------------------------------------------------
# chain maps


class ChainMap:
    """A graded map f: C -> D of degree k, with components f_n: C^n -> D^(n+k).

    Closed degree-0 chain maps satisfy f d = d f; general maps are just
    elements of the hom-complex.
    """

    __slots__ = ("source", "target", "degree", "components")

    def __init__(self, source: ChainComplex, target: ChainComplex, degree: int, components: dict):
        if source.field != target.field:
            raise ValueError("field mismatch between source and target")
        self.source = source
        self.target = target
        self.degree = int(degree)
        norm = {}
        for n, m in components.items():
            n = int(n)
            want = (target.dim(n + self.degree), source.dim(n))
            if (m.nrows, m.ncols) != want:
                raise ValueError(f"component at degree {n} has shape "
                                 f"{(m.nrows, m.ncols)}, expected {want}")
            if want[0] and want[1] and not m.is_zero():
                norm[n] = m
        self.components = norm

    @property
    def field(self) -> Field:
        return self.source.field

    def component(self, n: int) -> Matrix:
        m = self.components.get(n)
        if m is None:
            return Matrix.zero(self.field, self.target.dim(n + self.degree), self.source.dim(n))
        return m

    def differential(self) -> "ChainMap":
        """The hom-complex differential d f = d_D f - (-1)^k f d_C."""
        k = self.degree
        sign = self.field.of(-1 if k % 2 == 0 else 1)  # -(-1)^k
        comps = {}
        for n in set(self.source.dims) | {m - 1 for m in self.source.dims}:
            tgt_rows = self.target.dim(n + k + 1)
            src_cols = self.source.dim(n)
            if not (tgt_rows and src_cols):
                continue
            a = self.target.diff(n + k) @ self.component(n)
            b = self.component(n + 1) @ self.source.diff(n)
            comps[n] = a + b.scale(sign)
        return ChainMap(self.source, self.target, k + 1, comps)

    def is_closed(self) -> bool:
        return all(m.is_zero() for m in self.differential().components.values())

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other: "ChainMap") -> "ChainMap":
        if (self.source, self.target, self.degree) != (other.source, other.target, other.degree):
            raise ValueError("incompatible chain maps in +")
        comps = {}
        for n in set(self.components) | set(other.components):
            comps[n] = self.component(n) + other.component(n)
        return ChainMap(self.source, self.target, self.degree, comps)

    def scale(self, c) -> "ChainMap":
        return ChainMap(self.source, self.target, self.degree,
                        {n: m.scale(c) for n, m in self.components.items()})

    def __neg__(self) -> "ChainMap":
        return self.scale(-1)

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        return self + (-other)

    def __eq__(self, other):
        return (
            isinstance(other, ChainMap)
            and self.source == other.source
            and self.target == other.target
            and self.degree == other.degree
            and all((self.component(n) == other.component(n))
                    for n in set(self.components) | set(other.components))
        )

    def __hash__(self):
        return hash((self.source, self.target, self.degree))

    def __repr__(self):
        return f"ChainMap(deg {self.degree}, {self.source!r} -> {self.target!r})"

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "components": {str(n): m.to_json() for n, m in sorted(self.components.items())},
        }

    @staticmethod
    def from_json(data: dict) -> "ChainMap":
        src = ChainComplex.from_json(data["source"])
        tgt = ChainComplex.from_json(data["target"])
        k = int(data.get("degree", 0))
        comps = {}
        for n, rows in data.get("components", {}).items():
            n = int(n)
            comps[n] = Matrix.from_json(src.field, rows,
                                        nrows=tgt.dim(n + k), ncols=src.dim(n))
        return ChainMap(src, tgt, k, comps)


def zero_map(C: ChainComplex, D: ChainComplex, degree: int = 0) -> ChainMap:
    return ChainMap(C, D, degree, {})


def identity_map(C: ChainComplex) -> ChainMap:
    return ChainMap(C, C, 0, {n: Matrix.identity(C.field, d) for n, d in C.dims.items()})


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    """g after f; degrees add."""
    if f.target != g.source:
        raise ValueError("non-composable chain maps")
    comps = {}
    for n in f.source.dims:
        rows = g.target.dim(n + f.degree + g.degree)
        if rows:
            comps[n] = g.component(n + f.degree) @ f.component(n)
    return ChainMap(f.source, g.target, f.degree + g.degree, comps)


def shift(C: ChainComplex, k: int) -> ChainComplex:
    """C[k]^n = C^(n+k), differential scaled by (-1)^k."""
    if k == 0:
        return C
    sign = -1 if k % 2 else 1
    dims = {n - k: d for n, d in C.dims.items()}
    diffs = {n - k: m.scale(sign) for n, m in C.diffs.items()}
    return ChainComplex(C.field, dims, diffs)


def shift_map(f: ChainMap, k: int) -> ChainMap:
    """f[k]: C[k] -> D[k]; components reindexed, no sign twist."""
    if k == 0:
        return f
    return ChainMap(shift(f.source, k), shift(f.target, k), f.degree,
                    {n - k: m for n, m in f.components.items()})


# ---------------------------------------------------------------------------
# cones and the canonical maps around them


def cone(f: ChainMap) -> ChainComplex:
    """Cone(f)^n = src^(n+1) (+) tgt^n, d = [[-d_src, 0], [f, d_tgt]]."""
    if f.degree != 0:
        raise ValueError("cone needs a degree-0 map")
    if not f.is_closed():
        raise ValueError("cone needs a closed map")
    V, W = f.source, f.target
    F = f.field
    dims = {}
    degs = set(V.dims) | set(W.dims)
    for n in {m - 1 for m in V.dims} | set(W.dims):
        d = V.dim(n + 1) + W.dim(n)
        if d:
            dims[n] = d
    diffs = {}
    for n in dims:
        if dims.get(n + 1, 0):
            blocks = [
                [(-V.diff(n + 1)), Matrix.zero(F, V.dim(n + 2), W.dim(n))],
                [f.component(n + 1), W.diff(n)],
            ]
            diffs[n] = Matrix.from_blocks(F, blocks)
    return ChainComplex(F, dims, diffs)


def cone_inclusion(f: ChainMap) -> ChainMap:
    """The canonical closed inclusion target -> Cone(f)."""
    C = cone(f)
    V, W = f.source, f.target
    comps = {}
    for n, d in W.dims.items():
        blocks = [[Matrix.zero(f.field, V.dim(n + 1), d)], [Matrix.identity(f.field, d)]]
        comps[n] = Matrix.from_blocks(f.field, blocks)
    return ChainMap(W, C, 0, comps)


def cone_projection(f: ChainMap) -> ChainMap:
    """The canonical closed projection Cone(f) -> src[1]."""
    C = cone(f)
    V = shift(f.source, 1)
    comps = {}
    for n in C.dims:
        rows = V.dim(n)
        if rows:
            blocks = [[Matrix.identity(f.field, rows),
                       Matrix.zero(f.field, rows, f.target.dim(n))]]
            comps[n] = Matrix.from_blocks(f.field, blocks)
    # projection onto the shifted source is a chain map only up to the
    # cone sign; scaling by -1 on odd degrees is not needed with our
    # conventions: d_{V[1]} = -d_V matches the cone's upper-left block.
    return ChainMap(C, V, 0, comps)


def p_map(f: ChainMap, g: ChainMap) -> ChainMap:
    """The octahedral comparison p: Cone(gf)[-1] -> Cone(g)[-1].

    In components, (v, x) |-> (f v, x).
    """
    if f.target != g.source:
        raise ValueError("p_map needs composable maps")
    gf = compose(g, f)
    src = shift(cone(gf), -1)     # degree n: V^n (+) X^(n-1)
    tgt = shift(cone(g), -1)      # degree n: W^n (+) X^(n-1)
    V, W, X = f.source, f.target, g.target
    comps = {}
    for n in src.dims:
        if not tgt.dim(n):
            continue
        blocks = [
            [f.component(n), Matrix.zero(f.field, W.dim(n), X.dim(n - 1))],
            [Matrix.zero(f.field, X.dim(n - 1), V.dim(n)), Matrix.identity(f.field, X.dim(n - 1))],
        ]
        comps[n] = Matrix.from_blocks(f.field, blocks)
    return ChainMap(src, tgt, 0, comps)


def tau_map(f: ChainMap, g: ChainMap) -> ChainMap:
    """The dual octahedral map Cone(f) -> Cone(gf): (v, w) |-> (v, g w)."""
    if f.target != g.source:
        raise ValueError("tau_map needs composable maps")
    gf = compose(g, f)
    src, tgt = cone(f), cone(gf)
    V, W, X = f.source, f.target, g.target
    comps = {}
    for n in src.dims:
        if not tgt.dim(n):
            continue
        blocks = [
            [Matrix.identity(f.field, V.dim(n + 1)), Matrix.zero(f.field, V.dim(n + 1), W.dim(n))],
            [Matrix.zero(f.field, X.dim(n), V.dim(n + 1)), g.component(n)],
        ]
        comps[n] = Matrix.from_blocks(f.field, blocks)
    return ChainMap(src, tgt, 0, comps)


def octahedral_comparison(f: ChainMap, g: ChainMap):
    """Return (p, witness) with p: Cone(gf)[-1] -> Cone(g)[-1] and a
    quasi-isomorphism witness: Cone(p) -> Cone(f).

    In components the witness sends (v, x, w, x') to (v, w).
    """
    if f.degree != 0 or g.degree != 0:
        raise ValueError("octahedral comparison needs degree-0 maps")
    if not (f.is_closed() and g.is_closed()):
        raise ValueError("octahedral comparison needs closed maps")
    if f.target != g.source:
        raise ValueError("middle complexes do not match")
    p = p_map(f, g)
    Cp = cone(p)
    Cf = cone(f)
    V, W, X = f.source, f.target, g.target
    F = f.field
    comps = {}
    for n in Cp.dims:
        if not Cf.dim(n):
            continue
        # Cp^n = V^(n+1) (+) X^n (+) W^n (+) X^(n-1); Cf^n = V^(n+1) (+) W^n
        va, xa, wa, xb = V.dim(n + 1), X.dim(n), W.dim(n), X.dim(n - 1)
        blocks = [
            [Matrix.identity(F, va), Matrix.zero(F, va, xa), Matrix.zero(F, va, wa), Matrix.zero(F, va, xb)],
            [Matrix.zero(F, wa, va), Matrix.zero(F, wa, xa), Matrix.identity(F, wa), Matrix.zero(F, wa, xb)],
        ]
        comps[n] = Matrix.from_blocks(F, blocks)
    witness = ChainMap(Cp, Cf, 0, comps)
    return p, witness


# ---------------------------------------------------------------------------
# homology and quasi-isomorphisms


def homology(C: ChainComplex) -> HomologyProfile:
    """H^n dimensions by exact rank computation; zeros omitted."""
    out = {}
    ranks = {n: C.diff(n).rank() for n in set(C.dims) | {m - 1 for m in C.dims}}
    for n in C.dims:
        h = C.dim(n) - ranks.get(n, 0) - ranks.get(n - 1, 0)
        if h:
            out[n] = h
    return out


def euler_characteristic(C: ChainComplex) -> int:
    return sum((-1) ** (n % 2) * d for n, d in C.dims.items())


def is_acyclic(C: ChainComplex) -> bool:
    return not homology(C)


def is_quasi_iso(f: ChainMap) -> bool:
    """True iff Cone(f) is acyclic (equivalently, homotopy invertible)."""
    if f.degree != 0:
        raise ValueError("quasi-isomorphism test needs a degree-0 map")
    if not f.is_closed():
        raise ValueError("quasi-isomorphism test needs a closed map")
    return is_acyclic(cone(f))


# ---------------------------------------------------------------------------
# hom-complexes


@dataclass
class HomBasis:
    """Index bookkeeping identifying Hom^k coordinates with matrix entries.

    ``blocks[k]`` lists (source_degree n, rows, cols) in order; the flat
    coordinate of entry (i, j) in block n follows row-major layout.
    """

    source: ChainComplex
    target: ChainComplex
    blocks: dict = dc_field(default_factory=dict)

    def dim(self, k: int) -> int:
        return sum(r * c for (_, r, c) in self.blocks.get(k, []))

    def map_to_vector(self, f: ChainMap) -> list:
        vec = []
        for (n, r, c) in self.blocks.get(f.degree, []):
            m = f.component(n)
            for row in m.rows:
                vec.extend(row)
        return vec

    def vector_to_map(self, k: int, vec: list) -> ChainMap:
        comps = {}
        i = 0
        F = self.source.field
        for (n, r, c) in self.blocks.get(k, []):
            entries = [[vec[i + a * c + b] for b in range(c)] for a in range(r)]
            i += r * c
            comps[n] = Matrix(F, entries, ncols=c)
        return ChainMap(self.source, self.target, k, comps)


def hom_basis(C: ChainComplex, D: ChainComplex) -> HomBasis:
    if C.field != D.field:
        raise ValueError("field mismatch in hom")
    basis = HomBasis(C, D)
    for n in sorted(C.dims):
        for m in sorted(D.dims):
            k = m - n
            basis.blocks.setdefault(k, [])
    for k in list(basis.blocks):
        blocks = []
        for n in sorted(C.dims):
            r, c = D.dim(n + k), C.dim(n)
            if r and c:
                blocks.append((n, r, c))
        if blocks:
            basis.blocks[k] = blocks
        else:
            del basis.blocks[k]
    return basis


def hom_complex(C: ChainComplex, D: ChainComplex) -> ChainComplex:
    """The internal hom: Hom^k = (+)_n Hom(C^n, D^(n+k)), with
    differential (delta h)_n = d_D h_n - (-1)^k h_(n+1) d_C."""
    basis = hom_basis(C, D)
    F = C.field
    dims = {k: basis.dim(k) for k in basis.blocks}
    diffs = {}
    for k in dims:
        if not dims.get(k + 1, 0):
            continue
        rows = []
        # build the matrix of delta columnwise via unit probes
        src_dim = dims[k]
        cols = []
        zero_vec = [F.zero()] * src_dim
        for i in range(src_dim):
            vec = list(zero_vec)
            vec[i] = F.one()
            h = basis.vector_to_map(k, vec)
            cols.append(basis.map_to_vector(h.differential()))
        diffs[k] = Matrix(F, list(zip(*cols)) if cols else [], ncols=src_dim)
    return ChainComplex(F, dims, diffs)


def hom_homology(C: ChainComplex, D: ChainComplex) -> HomologyProfile:
    return homology(hom_complex(C, D))


# ---------------------------------------------------------------------------
# deterministic random generators (test oracles)


def random_invertible(field: Field, n: int, rng: random.Random) -> Matrix:
    """Product of a unit lower- and upper-triangular matrix and a permutation."""
    if n == 0:
        return Matrix.zero(field, 0, 0)

    def entry():
        if field.p is None:
            return rng.randrange(-2, 3)
        return rng.randrange(field.p) if rng.random() < 0.5 else rng.randrange(-2, 3)

    lo = [[field.one() if i == j else (field.of(entry()) if i > j else field.zero())
           for j in range(n)] for i in range(n)]
    up = [[field.one() if i == j else (field.of(entry()) if i < j else field.zero())
           for j in range(n)] for i in range(n)]
    perm = list(range(n))
    rng.shuffle(perm)
    pm = [[field.one() if perm[i] == j else field.zero() for j in range(n)] for i in range(n)]
    return Matrix(field, lo) @ Matrix(field, up) @ Matrix(field, pm)


def random_complex(seed: int, max_deg_span: int = 3, max_dim: int = 3,
                   field: Field = QQ) -> ChainComplex:
    """Deterministic valid complex: a sum of elementary pieces conjugated by
    a random change of basis, so d^2 = 0 holds by construction."""
    C, _ = random_complex_with_homology(seed, max_deg_span, max_dim, field)
    return C


def random_complex_with_homology(seed: int, max_deg_span: int = 3, max_dim: int = 3,
                                 field: Field = QQ):
    """Like :func:`random_complex` but also returns the homology profile the
    construction guarantees (an independent oracle for homology tests)."""
    rng = random.Random(("complex", seed, max_deg_span, max_dim, field.name).__repr__())
    lo = rng.randrange(-2, 2)
    span = rng.randrange(1, max(2, max_deg_span + 1))
    degs = list(range(lo, lo + span + 1))
    units = {n: 0 for n in degs}        # contributes H^n
    pairs = {n: 0 for n in degs[:-1]}   # acyclic (n -> n+1) identity pieces
    for n in degs:
        units[n] = rng.randrange(0, max_dim + 1)
    for n in degs[:-1]:
        pairs[n] = rng.randrange(0, max_dim + 1)
    dims = {}
    for n in degs:
        dims[n] = units[n] + pairs.get(n, 0) + pairs.get(n - 1, 0)
    dims = {n: d for n, d in dims.items() if d}
    # block differential: identity from the pair-block of degree n
    diffs = {}
    for n in degs[:-1]:
        rows, cols = dims.get(n + 1, 0), dims.get(n, 0)
        if not (rows and cols) or not pairs.get(n, 0):
            continue
        m = [[field.zero()] * cols for _ in range(rows)]
        # target layout: units | pairs(n+1) | from-pairs(n); source: units | pairs(n) | from-pairs(n-1)
        r0 = units.get(n + 1, 0) + pairs.get(n + 1, 0)
        c0 = units.get(n, 0)
        for i in range(pairs[n]):
            m[r0 + i][c0 + i] = field.one()
        diffs[n] = Matrix(field, m, ncols=cols)
    C = ChainComplex(field, dims, diffs)
    # conjugate by random invertibles: d' = P_{n+1} d P_n^{-1}
    P = {n: random_invertible(field, d, rng) for n, d in C.dims.items()}
    Pinv = {}
    for n, m in P.items():
        inv = m.solve(Matrix.identity(field, m.nrows))
        Pinv[n] = inv
    diffs2 = {}
    for n in C.diffs:
        diffs2[n] = P[n + 1] @ C.diff(n) @ Pinv[n]
    profile = {n: u for n, u in units.items() if u and n in dims}
    return ChainComplex(field, C.dims, diffs2), profile


def random_closed_map(seed: int, C: ChainComplex, D: ChainComplex, degree: int = 0) -> ChainMap:
    """Deterministic random element of the closed degree-k maps C -> D,
    sampled from the kernel of the hom-complex differential."""
    rng = random.Random(("map", seed, degree, C.field.name).__repr__())
    basis = hom_basis(C, D)
    if degree not in basis.blocks:
        return zero_map(C, D, degree)
    H = hom_complex(C, D)
    d = H.diff(degree)
    kernel = d.kernel_basis()
    F = C.field
    vec = [F.zero()] * basis.dim(degree)
    for kv in kernel:
        c = rng.randrange(-3, 4) if F.p is None else rng.randrange(F.p)
        if c:
            cf = F.of(c)
            vec = [a + cf * kv.rows[i][0] for i, a in enumerate(vec)]
    return basis.vector_to_map(degree, vec)


def random_quasi_iso_to(seed: int, C: ChainComplex, tries: int = 64) -> ChainMap:
    """A random quasi-isomorphism C -> C (an automorphism up to homotopy),
    found by seeded rejection sampling over closed degree-0 maps."""
    for t in range(tries):
        f = random_closed_map((seed, t).__hash__(), C, C)
        g = f + identity_map(C) if t % 2 else f
        if g.is_closed() and is_quasi_iso(g):
            return g
    return identity_map(C)


# ---------------------------------------------------------------------------
# homotopy-level linear solvers


def solve_affine_map_system(var_specs: list, residual: Callable, scale: int = 1):
    """Solve a linear system over chain-map unknowns by unit probing.

    ``var_specs`` is a list of (source, target, degree) triples; ``residual``
    maps a tuple of ChainMaps (one per spec) to a list of ChainMaps whose
    components must all vanish.  The residual must be affine in its inputs.
    Returns a tuple of ChainMaps or None when inconsistent.
    """
    if not var_specs:
        return ()
    field = var_specs[0][0].field
    bases = [hom_basis(s, t) for (s, t, _) in var_specs]
    sizes = [b.dim(k) for b, (_, _, k) in zip(bases, var_specs)]
    offsets = [0]
    for s in sizes:
        offsets.append(offsets[-1] + s)
    total = offsets[-1]

    def build(vec):
        maps = []
        for b, (s, t, k), off, sz in zip(bases, var_specs, offsets, sizes):
            maps.append(b.vector_to_map(k, vec[off:off + sz]))
        return tuple(maps)

    def flatten(res_maps):
        out = []
        for rm in res_maps:
            rb = hom_basis(rm.source, rm.target)
            out.extend(rb.map_to_vector(rm))
        return out

    zero_vec = [field.zero()] * total
    const = flatten(residual(build(zero_vec)))
    cols = []
    for i in range(total):
        v = list(zero_vec)
        v[i] = field.one()
        col = flatten(residual(build(v)))
        cols.append([a - b for a, b in zip(col, const)])
    nrows = len(const)
    A = Matrix(field, list(zip(*cols)) if cols else [[] for _ in range(nrows)], ncols=total)
    rhs = Matrix(field, [[-c] for c in const], ncols=1)
    sol = A.solve(rhs)
    if sol is None:
        return None
    vec = [sol.rows[i][0] for i in range(total)]
    return build(vec)


def homotopy_inverse(w: ChainMap) -> ChainMap:
    """A closed degree-0 map v with w v homotopic to the identity.

    Over a field a quasi-isomorphism always has such a one-sided homotopy
    inverse, and it is automatically a quasi-isomorphism.
    """
    if not (w.degree == 0 and w.is_closed()):
        raise ValueError("homotopy inverse needs a closed degree-0 map")
    A, B = w.source, w.target
    idB = identity_map(B)

    def residual(maps):
        v, K = maps
        return [v.differential(), compose(w, v) - idB - K.differential()]

    sol = solve_affine_map_system([(B, A, 0), (B, B, -1)], residual)
    if sol is None:
        raise ValueError("map has no homotopy inverse (not a quasi-isomorphism?)")
    return sol[0]


def fill_triangle_map(alpha, beta, alpha2, beta2, s_left: ChainMap, s_right: ChainMap) -> ChainMap:
    """Complete (s_left, ?, s_right) to a homotopy-commuting map between
    triangles X -a-> Y -b-> Z and X' -a'-> Y' -b'-> Z'.

    Returns a closed middle map s with s a ~ a' s_left and b' s ~ s_right b.
    When s_left and s_right are quasi-isomorphisms the result is one too.
    """
    Y, Y2 = alpha.target, alpha2.target

    def residual(maps):
        s, H1, H2 = maps
        return [
            s.differential(),
            compose(s, alpha) - compose(alpha2, s_left) - H1.differential(),
            compose(beta2, s) - compose(s_right, beta) - H2.differential(),
        ]

    specs = [
        (Y, Y2, 0),
        (alpha.source, Y2, -1),
        (Y, beta2.target, -1),
    ]
    sol = solve_affine_map_system(specs, residual)
    if sol is None:
        raise ValueError("triangle fill-in does not exist")
    return sol[0]
