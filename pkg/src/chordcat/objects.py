"""Deterministic generators of valid glued objects on wheel covers.

Valid objects need quasi-isomorphic stalks on the two sides of every
strand.  The generator starts from "uniform" seeds (every node carries the
same complex, every arrow of a family carries the same scalar) where both
sides match on the nose, then randomizes by conjugating nodes with
invertible chain maps and perturbing comparisons by scalars and
coboundaries: all of this preserves validity exactly.
"""

from __future__ import annotations

import random

from .fields import Field, QQ
from .homalg import (
    ChainComplex, ChainMap, Matrix, compose, cone, hom_basis,
    identity_map, random_complex, random_invertible,
)
from .cpmcat import (
    CoverPresentation, GluedObject, QuiverRepObject,
    make_glued_object, rep_direct_sum, stalk_item,
)


def _conjugator(field: Field, C: ChainComplex, rng: random.Random) -> ChainMap:
    """A degree-0 chain automorphism of C (block change of basis commuting
    with d is not generally available; instead conjugate the whole complex:
    here we return an invertible closed map C -> C' where C' has twisted
    differentials)."""
    mats = {n: random_invertible(field, d, rng) for n, d in C.dims.items()}
    diffs = {}
    for n in C.diffs:
        inv = mats[n].solve(Matrix.identity(field, mats[n].nrows))
        diffs[n] = mats[n + 1] @ C.diff(n) @ inv
    C2 = ChainComplex(field, dict(C.dims), diffs)
    return ChainMap(C, C2, 0, {n: m for n, m in mats.items() if m.nrows})


def _perturb_comparison(u: ChainMap, rng: random.Random, field: Field) -> ChainMap:
    """Scale by a nonzero constant and add a coboundary: stays closed and
    quasi-iso, changes the matrix."""
    c = 0
    while not c:
        c = rng.randrange(-3, 4) if field.p is None else rng.randrange(1, field.p)
    out = u.scale(field.of(c))
    basis = hom_basis(u.source, u.target)
    if -1 in basis.blocks:
        dim = basis.dim(-1)
        vec = []
        for _ in range(dim):
            vec.append(field.of(rng.randrange(-2, 3)))
        K = basis.vector_to_map(-1, vec)
        out = out + K.differential()
    return out


def uniform_object(cover: CoverPresentation, field: Field, node: ChainComplex,
                   shared_scalars: dict, free_scalars: dict | None = None) -> GluedObject:
    """Every node carries ``node``; the arrow over each foot is a scalar
    multiple of the identity.  Scalars are constant along each shared item
    (``shared_scalars`` indexed by shared-item position) so the two sides
    of every strand match on the nose; unshared arrows draw from
    ``free_scalars`` keyed by (piece, arrow index)."""
    reps = []
    free_scalars = free_scalars or {}
    arrow_scalar = {}
    for s_idx, s in enumerate(cover.shared):
        c = shared_scalars.get(s_idx, 1)
        arrow_scalar[(s.piece_a, s.item_a)] = c
        arrow_scalar[(s.piece_b, s.item_b)] = c
    for p in cover.pieces:
        nodes = tuple(node for _ in p.quiver.nodes)
        arrows = []
        for k, a in enumerate(p.quiver.arrows):
            c = arrow_scalar.get((p.index, ("arrow", k)),
                                 free_scalars.get((p.index, k), 1))
            f = identity_map(node).scale(field.of(c))
            arrows.append(f)
        reps.append(QuiverRepObject(p.quiver, nodes, tuple(arrows)))
    comparisons = []
    for s in cover.shared:
        A = stalk_item(reps[s.piece_a], s.item_a)
        B = stalk_item(reps[s.piece_b], s.item_b)
        comparisons.append(ChainMap(A, B, 0, {
            n: Matrix.identity(field, d) for n, d in A.dims.items()
        }))
    return make_glued_object(cover, reps, comparisons)


def conjugate_object(X: GluedObject, seed: int) -> GluedObject:
    """Conjugate every node by a random invertible chain map and transport
    arrows and comparisons; the result is isomorphic to X and valid."""
    rng = random.Random(("conj", seed, X.field.name).__repr__())
    field = X.field
    new_reps = []
    conj = []
    for rep in X.reps:
        maps = [_conjugator(field, c, rng) for c in rep.node_values]
        conj.append(maps)
        nodes = tuple(m.target for m in maps)
        arrows = []
        for k, a in enumerate(rep.quiver.arrows):
            g = maps[a.source]
            h = maps[a.target]
            arrows.append(compose(h, compose(rep.arrow_maps[k], _invert_iso(g))))
        new_reps.append(QuiverRepObject(rep.quiver, nodes, tuple(arrows)))
    comparisons = []
    for s_idx, s in enumerate(X.cover.shared):
        u = X.comparisons[s_idx]
        ca = _cone_transport(X.reps[s.piece_a], new_reps[s.piece_a],
                             conj[s.piece_a], s.item_a)
        cb = _cone_transport(X.reps[s.piece_b], new_reps[s.piece_b],
                             conj[s.piece_b], s.item_b)
        u2 = compose(cb, compose(u, _invert_iso(ca)))
        comparisons.append(_perturb_comparison(u2, rng, field))
    return make_glued_object(X.cover, new_reps, comparisons)


def _invert_iso(f: ChainMap) -> ChainMap:
    """Invert a degreewise-invertible closed chain map."""
    comps = {}
    for n in f.source.dims:
        m = f.component(n)
        inv = m.solve(Matrix.identity(f.field, m.nrows))
        if inv is None:
            raise ValueError("map is not invertible")
        comps[n] = inv
    return ChainMap(f.target, f.source, 0, comps)


def _cone_transport(old_rep, new_rep, conj_maps, item) -> ChainMap:
    """The induced iso between old and new stalks of one item."""
    kind, i = item
    if kind == "node":
        return conj_maps[i]
    a = old_rep.quiver.arrows[i]
    CX = cone(old_rep.arrow_maps[i])
    CY = cone(new_rep.arrow_maps[i])
    gv, gw = conj_maps[a.source], conj_maps[a.target]
    field = gv.field
    comps = {}
    for j in CX.dims:
        if not CY.dim(j):
            continue
        blocks = [
            [gv.component(j + 1),
             Matrix.zero(field, gv.target.dim(j + 1), gw.source.dim(j))],
            [Matrix.zero(field, gw.target.dim(j), gv.source.dim(j + 1)),
             gw.component(j)],
        ]
        comps[j] = Matrix.from_blocks(field, blocks)
    return ChainMap(CX, CY, 0, comps)


def glued_direct_sum(X: GluedObject, Y: GluedObject) -> GluedObject:
    if X.cover != Y.cover:
        raise ValueError("direct sum needs a common cover")
    reps = tuple(rep_direct_sum(a, b) for a, b in zip(X.reps, Y.reps))
    comparisons = []
    for s_idx, s in enumerate(X.cover.shared):
        uX, uY = X.comparisons[s_idx], Y.comparisons[s_idx]
        A = stalk_item(reps[s.piece_a], s.item_a)
        B = stalk_item(reps[s.piece_b], s.item_b)
        # stalks of a direct sum decompose blockwise; assemble u (+) u'
        comps = {}
        field = X.field
        for n in A.dims:
            if not B.dim(n):
                continue
            comps[n] = _interleave_cone_blocks(X, Y, s, n, uX, uY)
        comparisons.append(ChainMap(A, B, 0, comps))
    return make_glued_object(X.cover, reps, comparisons)


def _interleave_cone_blocks(X, Y, s, n, uX, uY):
    """Block matrix of u_X (+) u_Y in the interleaved cone basis of the
    direct sum object."""
    field = X.field
    kind_a, ia = s.item_a
    kind_b, ib = s.item_b

    def layout(obj, piece, item):
        kind, i = item
        rep = obj.reps[piece]
        if kind == "node":
            return [rep.node_values[i].dim(n)]
        a = rep.quiver.arrows[i]
        return [rep.node_values[a.source].dim(n + 1), rep.node_values[a.target].dim(n)]

    rows_parts = []   # (which object, block offsets) for target side
    la_x = layout(X, s.piece_a, s.item_a)
    la_y = layout(Y, s.piece_a, s.item_a)
    lb_x = layout(X, s.piece_b, s.item_b)
    lb_y = layout(Y, s.piece_b, s.item_b)
    # source basis: per graded part, X block then Y block
    mx, my = uX.component(n), uY.component(n)
    # row/col offsets inside mx, my per part
    def offs(parts):
        out = [0]
        for p in parts:
            out.append(out[-1] + p)
        return out
    ox_r, oy_r = offs(lb_x), offs(lb_y)
    ox_c, oy_c = offs(la_x), offs(la_y)
    total_rows = sum(lb_x) + sum(lb_y)
    total_cols = sum(la_x) + sum(la_y)
    z = field.zero()
    out = [[z] * total_cols for _ in range(total_rows)]
    # target interleaved layout: part0(X), part0(Y), part1(X), part1(Y)...
    def tgt_row_base(part, which):
        base = 0
        for q in range(part):
            base += lb_x[q] + lb_y[q]
        return base + (0 if which == 0 else lb_x[part])
    def src_col_base(part, which):
        base = 0
        for q in range(part):
            base += la_x[q] + la_y[q]
        return base + (0 if which == 0 else la_x[part])
    for pr in range(len(lb_x)):
        for pc in range(len(la_x)):
            for which, (m, orow, ocol, lr, lc) in enumerate(
                    [(mx, ox_r, ox_c, lb_x, la_x), (my, oy_r, oy_c, lb_y, la_y)]):
                for r in range(lr[pr]):
                    for c in range(lc[pc]):
                        val = m.rows[orow[pr] + r][ocol[pc] + c] if m.nrows else z
                        out[tgt_row_base(pr, which) + r][src_col_base(pc, which) + c] = val
    return Matrix(field, out, ncols=total_cols)


def random_object(cover: CoverPresentation, seed: int, field: Field = QQ,
                  summands: int = 2, max_dim: int = 2) -> GluedObject:
    """A deterministic pseudo-random valid glued object: a direct sum of
    conjugated, shifted uniform objects with varying family scalars."""
    rng = random.Random(("glued", seed, field.name).__repr__())
    parts = []
    for t in range(max(1, summands)):
        node = random_complex(rng.randrange(10 ** 6), 2, max_dim, field)
        if node.is_zero():
            node = ChainComplex(field, {0: 1}, {})
        scalars = {}
        for s_idx in range(len(cover.shared)):
            scalars[s_idx] = rng.choice([0, 1, 1, 2])
        free = {}
        for p in cover.pieces:
            for k in range(len(p.quiver.arrows)):
                free[(p.index, k)] = rng.choice([0, 1, 2])
        X = uniform_object(cover, field, node, scalars, free)
        X = conjugate_object(X, rng.randrange(10 ** 6))
        parts.append(X)
    out = parts[0]
    for p in parts[1:]:
        out = glued_direct_sum(out, p)
    return out
