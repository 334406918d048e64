"""Glued quiver-representation categories over fishbone covers.

A cover presents a chordal graph as wheels (one per zero-section circle)
plus shared strands.  A glued object is a quiver representation on each
piece together with one closed degree-0 quasi-isomorphism per shared item
comparing the two local stalks.  Hom-complexes follow the homotopy
equalizer recipe: piecewise representation homs plus a shifted correction
term per shared item, with the differential

    d(phi, psi, H) = (d phi, -d psi_a - beta_a(phi), -d H_s - beta_s(phi, psi))

where beta_a(phi) = Y_a phi_src - phi_tgt X_a and beta_s uses the stalk
functors on morphisms.  The cone functor on a degree-k hom element is
(x, y) |-> ((-1)^k phi_src x, (-1)^k psi x + phi_tgt y); these signs make
d^2 = 0 exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .fields import Field
from .homalg import (
    ChainComplex, ChainMap, Matrix, cone, compose, homology, hom_basis,
    is_quasi_iso, shift, shift_map, validate_complex, zero_map,
)
from .quiverize import Fishbone, Foot, LineQuiver, quiver_of, wheel_fishbone
from .ribbon import ChordalRibbonGraph


class GluingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# quiver representations with values in complexes


@dataclass(frozen=True)
class QuiverRepObject:
    quiver: LineQuiver
    node_values: tuple          # ChainComplex per node
    arrow_maps: tuple           # ChainMap per arrow

    @property
    def field(self) -> Field:
        for c in self.node_values:
            return c.field
        raise GluingError("empty representation")

    def validate(self) -> list:
        out = []
        q = self.quiver
        if len(self.node_values) != len(q.nodes):
            out.append("node value count mismatch")
        if len(self.arrow_maps) != len(q.arrows):
            out.append("arrow map count mismatch")
        for i, a in enumerate(q.arrows):
            f = self.arrow_maps[i]
            if f.degree != 0:
                out.append(f"arrow {i} map has degree {f.degree}")
            if f.source != self.node_values[a.source] or f.target != self.node_values[a.target]:
                out.append(f"arrow {i} endpoints do not match its map")
            elif not f.is_closed():
                out.append(f"arrow {i} map is not closed")
        for i, c in enumerate(self.node_values):
            for msg in validate_complex(c):
                out.append(f"node {i}: {msg}")
        return out


def rep_direct_sum(X: QuiverRepObject, Y: QuiverRepObject) -> QuiverRepObject:
    from .homalg import direct_sum
    if X.quiver.signature() != Y.quiver.signature():
        raise GluingError("direct sum needs matching quivers")
    nodes = tuple(direct_sum(a, b) for a, b in zip(X.node_values, Y.node_values))
    arrows = []
    for i, a in enumerate(X.quiver.arrows):
        f, g = X.arrow_maps[i], Y.arrow_maps[i]
        src, tgt = nodes[a.source], nodes[a.target]
        comps = {}
        for n in src.dims:
            if not tgt.dim(n):
                continue
            blocks = [
                [f.component(n), Matrix.zero(f.field, f.target.dim(n), g.source.dim(n))],
                [Matrix.zero(f.field, g.target.dim(n), f.source.dim(n)), g.component(n)],
            ]
            comps[n] = Matrix.from_blocks(f.field, blocks)
        arrows.append(ChainMap(src, tgt, 0, comps))
    return QuiverRepObject(X.quiver, nodes, tuple(arrows))


def rep_shift(X: QuiverRepObject, k: int) -> QuiverRepObject:
    return QuiverRepObject(
        X.quiver,
        tuple(shift(c, k) for c in X.node_values),
        tuple(shift_map(f, k) for f in X.arrow_maps),
    )


# ---------------------------------------------------------------------------
# covers


@dataclass(frozen=True)
class CoverPiece:
    index: int
    fishbone: Fishbone
    quiver: LineQuiver
    edge_items: dict            # graph edge key -> ("node", i) | ("arrow", i)


@dataclass(frozen=True)
class SharedItem:
    """One overlap of two cover pieces: a strand (both sides see a cone
    stalk) or a zero-section segment (both sides see a node stalk)."""
    name: str
    piece_a: int
    item_a: tuple               # ("node", i) or ("arrow", i)
    piece_b: int
    item_b: tuple


@dataclass(frozen=True)
class CoverPresentation:
    pieces: tuple
    shared: tuple

    def piece(self, i: int) -> CoverPiece:
        return self.pieces[i]


def cover_of(G: ChordalRibbonGraph) -> CoverPresentation:
    """One wheel piece per zero-section circle; shared items are the
    strand edges joining spokes of two circles."""
    g = G.graph
    circles = G.zero_circles()
    if not circles:
        raise GluingError("graph has no zero-section circles to cover")
    covered = set()
    pieces = []
    spoke_home = {}     # spoke half-edge -> (piece index, arrow index)
    for idx, steps in enumerate(circles):
        feet = [v for (v, _) in steps]
        flags = []
        spokes = []     # per foot, list of (half_edge, direction)
        for v in feet:
            others = [h for h in g.cyclic[v] if g.edge_of(h) not in G.zero_edges]
            ds = [(h, G.spoke_direction(h)) for h in others]
            up = any(d == "up" for (_, d) in ds)
            down = any(d == "down" for (_, d) in ds)
            flags.append((up, down))
            spokes.append(ds)
        fb = Fishbone("circle", tuple(
            Foot(Fraction(i), up=u, down=d) for i, (u, d) in enumerate(flags)
        ))
        quiver = quiver_of(fb)
        edge_items = {}
        # arcs: the zero edge leaving foot i in the travel direction is the
        # arc cell from foot i to foot i+1
        cell_idx = {}
        i_cell = 0
        for j, (u, d) in enumerate(flags):
            if u and d:
                i_cell += 1     # skip the point cell
            cell_idx[j] = i_cell
            i_cell += 1
        for j, (v, h_out) in enumerate(steps):
            edge_items[g.edge_of(h_out)] = ("node", cell_idx[j])
        # arrows: quiver arrows are listed per foot in partition order
        for k, a in enumerate(quiver.arrows):
            foot = a.foot
            for (h, d) in spokes[foot]:
                if d == a.direction:
                    edge_items[g.edge_of(h)] = ("arrow", k)
                    spoke_home[h] = (idx, k)
        for e in edge_items:
            covered.add(e)
        pieces.append(CoverPiece(idx, fb, quiver, edge_items))
    shared = []
    seen = set()
    for h, (pa, ka) in sorted(spoke_home.items()):
        p = g.partner(h)
        if p == h or p not in spoke_home:
            continue
        e = g.edge_of(h)
        if e in seen:
            continue
        seen.add(e)
        pb, kb = spoke_home[p]
        (pa2, ka2), (pb2, kb2) = sorted([(pa, ka), (pb, kb)])
        shared.append(SharedItem(
            name="|".join(e), piece_a=pa2, item_a=("arrow", ka2),
            piece_b=pb2, item_b=("arrow", kb2)))
    for e in g.edges():
        if e not in covered:
            raise GluingError(f"edge {e} not covered by any wheel piece")
    return CoverPresentation(tuple(pieces), tuple(shared))


def arc_cover_of_wheel(n_up: int, n_down: int) -> CoverPresentation:
    """Cover the wheel fishbone of L(n_up, n_down) by two overlapping line
    arcs, overlapping in two zero-section segments.

    Piece 0 spans feet 0..n-1 (cut inside the arcs before foot 0 and after
    foot n-1); piece 1 spans feet n-1..n+0 wrapping.  Requires at least two
    feet.  Shared items are two node overlaps.
    """
    from fractions import Fraction
    from .quiverize import Foot

    wheel = wheel_fishbone(n_up, n_down)
    n = len(wheel.feet)
    if n < 2:
        raise GluingError("arc cover needs at least two feet")
    fb0 = Fishbone("line", tuple(
        Foot(Fraction(i), up=f.up, down=f.down) for i, f in enumerate(wheel.feet)
    ))
    # piece 1: the wrap arc containing feet n-1 and 0 only
    f_last, f_first = wheel.feet[-1], wheel.feet[0]
    fb1 = Fishbone("line", (
        Foot(Fraction(0), up=f_last.up, down=f_last.down),
        Foot(Fraction(1), up=f_first.up, down=f_first.down),
    ))
    q0, q1 = quiver_of(fb0), quiver_of(fb1)
    pieces = (
        CoverPiece(0, fb0, q0, {}),
        CoverPiece(1, fb1, q1, {}),
    )
    # overlaps: piece0's trailing cell <-> piece1's middle cell (the arc
    # between feet n-1 and 0), and piece0's leading cell <-> piece1's
    # trailing cell (the arc after foot 0 rewinds into piece 1's end).
    def node_count(q):
        return len(q.nodes)
    shared = (
        SharedItem("ovl_tail", 0, ("node", node_count(q0) - 1), 1, ("node", 1)),
        SharedItem("ovl_head", 0, ("node", 0), 1, ("node", node_count(q1) - 1)),
    )
    return CoverPresentation(pieces, shared)


# ---------------------------------------------------------------------------
# glued objects


@dataclass(frozen=True)
class GluedObject:
    cover: CoverPresentation
    reps: tuple                 # QuiverRepObject per piece
    comparisons: tuple          # ChainMap per shared item, side a -> side b

    @property
    def field(self) -> Field:
        return self.reps[0].field


def stalk_item(rep: QuiverRepObject, item: tuple) -> ChainComplex:
    kind, i = item
    if kind == "node":
        return rep.node_values[i]
    if kind == "arrow":
        return cone(rep.arrow_maps[i])
    raise GluingError(f"bad item {item!r}")


def stalk(X: GluedObject, edge) -> ChainComplex:
    """The stalk over a graph edge (side a for shared strands)."""
    e = tuple(edge) if not isinstance(edge, tuple) else edge
    for p in X.cover.pieces:
        if e in p.edge_items:
            return stalk_item(X.reps[p.index], p.edge_items[e])
    raise GluingError(f"unknown edge {edge!r}")


def stalk_pair(X: GluedObject, s: SharedItem):
    return (stalk_item(X.reps[s.piece_a], s.item_a),
            stalk_item(X.reps[s.piece_b], s.item_b))


def validate_glued(X: GluedObject) -> list:
    out = []
    for i, rep in enumerate(X.reps):
        for msg in rep.validate():
            out.append(f"piece {i}: {msg}")
    if len(X.comparisons) != len(X.cover.shared):
        out.append("comparison count mismatch")
        return out
    for s, u in zip(X.cover.shared, X.comparisons):
        A, B = stalk_pair(X, s)
        if u.degree != 0:
            out.append(f"{s.name}: comparison has degree {u.degree}")
            continue
        if u.source != A or u.target != B:
            out.append(f"{s.name}: comparison endpoints do not match stalks")
            continue
        if not u.is_closed():
            out.append(f"{s.name}: comparison not closed")
            continue
        if homology(A) != homology(B):
            out.append(f"{s.name}: stalk homology profiles differ across the strand")
        if not is_quasi_iso(u):
            out.append(f"{s.name}: comparison not invertible in the homotopy category")
    return out


def make_glued_object(cover: CoverPresentation, reps, comparisons) -> GluedObject:
    X = GluedObject(cover, tuple(reps), tuple(comparisons))
    bad = validate_glued(X)
    if bad:
        raise GluingError("; ".join(bad))
    return X


# ---------------------------------------------------------------------------
# glued hom-complexes


@dataclass
class _Summand:
    tag: tuple                  # ("node",p,v) | ("arrow",p,a) | ("shared",s)
    source: ChainComplex
    target: ChainComplex
    shift: int                  # 0 or 1; Hom^(k-shift) sits in total degree k


def _hom_summands(X: GluedObject, Y: GluedObject) -> list:
    if X.cover is not Y.cover and X.cover != Y.cover:
        raise GluingError("glued hom needs a common cover")
    out = []
    for p, (xr, yr) in enumerate(zip(X.reps, Y.reps)):
        for v in range(len(xr.quiver.nodes)):
            out.append(_Summand(("node", p, v), xr.node_values[v], yr.node_values[v], 0))
        for a_idx, a in enumerate(xr.quiver.arrows):
            out.append(_Summand(("arrow", p, a_idx),
                                xr.node_values[a.source], yr.node_values[a.target], 1))
    for s_idx, s in enumerate(X.cover.shared):
        FX = stalk_item(X.reps[s.piece_a], s.item_a)
        GY = stalk_item(Y.reps[s.piece_b], s.item_b)
        out.append(_Summand(("shared", s_idx), FX, GY, 1))
    return out


class GluedHom:
    """Basis bookkeeping plus the differential for hom(X, Y).

    The differential is assembled blockwise: each summand's internal hom
    differential on the diagonal (negated for shifted summands), plus the
    correction blocks feeding node and arrow components into arrow and
    shared-item summands.
    """

    def __init__(self, X: GluedObject, Y: GluedObject):
        self.X, self.Y = X, Y
        self.summands = _hom_summands(X, Y)
        self.bases = [hom_basis(s.source, s.target) for s in self.summands]
        self._tag_index = {s.tag: i for i, s in enumerate(self.summands)}
        # adjacency: receivers of correction terms per source summand
        self._arrow_receivers = {}   # ("node",p,v) -> [(arrow summand, role)]
        self._shared_receivers = {}  # ("node"/"arrow",...) -> [(shared idx, side, role)]
        for p, rep in enumerate(X.reps):
            for a_idx, a in enumerate(rep.quiver.arrows):
                self._arrow_receivers.setdefault(("node", p, a.source), []).append((a_idx, p, "src"))
                self._arrow_receivers.setdefault(("node", p, a.target), []).append((a_idx, p, "tgt"))
        for s_idx, s in enumerate(X.cover.shared):
            for side, (piece, item) in (("a", (s.piece_a, s.item_a)),
                                        ("b", (s.piece_b, s.item_b))):
                kind, i = item
                if kind == "node":
                    self._shared_receivers.setdefault(("node", piece, i), []) \
                        .append((s_idx, side, "node"))
                else:
                    a = X.reps[piece].quiver.arrows[i]
                    self._shared_receivers.setdefault(("node", piece, a.source), []) \
                        .append((s_idx, side, "cone_src"))
                    self._shared_receivers.setdefault(("node", piece, a.target), []) \
                        .append((s_idx, side, "cone_tgt"))
                    self._shared_receivers.setdefault(("arrow", piece, i), []) \
                        .append((s_idx, side, "cone_psi"))

    def dims(self) -> dict:
        total = {}
        for s, b in zip(self.summands, self.bases):
            for k in b.blocks:
                total[k + s.shift] = total.get(k + s.shift, 0) + b.dim(k)
        return {k: d for k, d in total.items() if d}

    def zero_element(self, k: int) -> list:
        return [zero_map(s.source, s.target, k - s.shift) for s in self.summands]

    def flatten(self, k: int, elem: list) -> list:
        vec = []
        for s, b, m in zip(self.summands, self.bases, elem):
            vec.extend(b.map_to_vector(m))
        return vec

    def unflatten(self, k: int, vec: list) -> list:
        out = []
        i = 0
        for s, b in zip(self.summands, self.bases):
            d = b.dim(k - s.shift)
            out.append(b.vector_to_map(k - s.shift, vec[i:i + d]))
            i += d
        return out

    def _partial_cone_map(self, piece: int, arrow_idx: int, role: str,
                          m: ChainMap, k: int, side_obj_x, side_obj_y) -> ChainMap:
        """The cone-functor block induced by a single component of a hom
        element of total degree k (other components zero)."""
        x_rep = side_obj_x.reps[piece]
        y_rep = side_obj_y.reps[piece]
        a = x_rep.quiver.arrows[arrow_idx]
        CX = cone(x_rep.arrow_maps[arrow_idx])
        CY = cone(y_rep.arrow_maps[arrow_idx])
        F = m.field
        sign = F.of(1 if k % 2 == 0 else -1)
        Xv, Xw = x_rep.node_values[a.source], x_rep.node_values[a.target]
        Yv, Yw = y_rep.node_values[a.source], y_rep.node_values[a.target]
        comps = {}
        for j in CX.dims:
            if not CY.dim(j + k):
                continue
            zvv = Matrix.zero(F, Yv.dim(j + 1 + k), Xv.dim(j + 1))
            zvw = Matrix.zero(F, Yv.dim(j + 1 + k), Xw.dim(j))
            zwv = Matrix.zero(F, Yw.dim(j + k), Xv.dim(j + 1))
            zww = Matrix.zero(F, Yw.dim(j + k), Xw.dim(j))
            if role == "cone_src":
                blocks = [[m.component(j + 1).scale(sign), zvw], [zwv, zww]]
            elif role == "cone_tgt":
                blocks = [[zvv, zvw], [zwv, m.component(j)]]
            else:  # cone_psi: m has degree k-1
                blocks = [[zvv, zvw], [m.component(j + 1).scale(sign), zww]]
            comps[j] = Matrix.from_blocks(F, blocks)
        return ChainMap(CX, CY, k, comps)

    def _contributions(self, i: int, m: ChainMap, k: int) -> list:
        """Differential contributions of a single-summand element: pairs
        (target summand index, ChainMap)."""
        s = self.summands[i]
        tag = s.tag
        idx = self._tag_index
        out = []
        if tag[0] == "node":
            out.append((i, m.differential()))
            _, p, v = tag
            for (a_idx, piece, role) in self._arrow_receivers.get(tag, []):
                Xa = self.X.reps[piece].arrow_maps[a_idx]
                Ya = self.Y.reps[piece].arrow_maps[a_idx]
                j = idx[("arrow", piece, a_idx)]
                if role == "src":
                    out.append((j, -compose(Ya, m)))
                else:
                    out.append((j, compose(m, Xa)))
            for (s_idx, side, role) in self._shared_receivers.get(tag, []):
                out.append(self._shared_contribution(s_idx, side, role, m, k))
        elif tag[0] == "arrow":
            out.append((i, -(m.differential())))
            for (s_idx, side, role) in self._shared_receivers.get(tag, []):
                out.append(self._shared_contribution(s_idx, side, role, m, k))
        else:
            out.append((i, -(m.differential())))
        return out

    def _shared_contribution(self, s_idx: int, side: str, role: str,
                             m: ChainMap, k: int):
        sh = self.X.cover.shared[s_idx]
        uX = self.X.comparisons[s_idx]
        uY = self.Y.comparisons[s_idx]
        j = self._tag_index[("shared", s_idx)]
        piece, item = ((sh.piece_a, sh.item_a) if side == "a"
                       else (sh.piece_b, sh.item_b))
        if role == "node":
            stalk_map = m
        else:
            stalk_map = self._partial_cone_map(piece, item[1], role, m, k,
                                               self.X, self.Y)
        # output to the shared summand is -beta = -uY . F(e) + G(e) . uX
        if side == "a":
            return (j, -compose(uY, stalk_map))
        return (j, compose(stalk_map, uX))

    def differential_of(self, k: int, elem: list) -> list:
        """Apply the glued differential to a degree-k element."""
        out = [zero_map(s.source, s.target, k + 1 - s.shift) for s in self.summands]
        for i, m in enumerate(elem):
            if m.is_zero():
                continue
            for (j, contrib) in self._contributions(i, m, k):
                out[j] = out[j] + contrib
        return out

    def complex(self) -> ChainComplex:
        dims = self.dims()
        F = self.X.field
        offsets = {}
        for k in dims:
            acc = 0
            per = []
            for s, b in zip(self.summands, self.bases):
                per.append(acc)
                acc += b.dim(k - s.shift)
            offsets[k] = per
        diffs = {}
        for k in sorted(dims):
            rows_n = dims.get(k + 1, 0)
            if not rows_n:
                continue
            cols = [[F.zero()] * dims[k] for _ in range(rows_n)]
            col0 = 0
            for i, (s, b) in enumerate(zip(self.summands, self.bases)):
                d_i = b.dim(k - s.shift)
                for t in range(d_i):
                    vec = [F.zero()] * d_i
                    vec[t] = F.one()
                    m = b.vector_to_map(k - s.shift, vec)
                    for (j, contrib) in self._contributions(i, m, k):
                        tb = self.bases[j]
                        flat = tb.map_to_vector(contrib)
                        base = offsets[k + 1][j]
                        for r, val in enumerate(flat):
                            if val:
                                cols[base + r][col0 + t] = cols[base + r][col0 + t] + val
                col0 += d_i
            diffs[k] = Matrix(F, cols, ncols=dims[k])
        return ChainComplex(F, dims, diffs)


def hom_complex_glued(X: GluedObject, Y: GluedObject) -> ChainComplex:
    return GluedHom(X, Y).complex()


def euler_pairing(X: GluedObject, Y: GluedObject) -> int:
    """chi of the glued hom-complex, computed from dimensions alone."""
    from .homalg import euler_characteristic
    total = 0
    for s in _hom_summands(X, Y):
        term = euler_characteristic(s.source) * euler_characteristic(s.target)
        total += -term if s.shift else term
    return total


# ---------------------------------------------------------------------------
# splitting utilities and object generators


def profile_complex(field: Field, profile: dict) -> ChainComplex:
    return ChainComplex(field, dict(profile), {})


def homology_section(C: ChainComplex) -> ChainMap:
    """A closed quasi-isomorphism H(C) -> C (zero differential source)."""
    H = profile_complex(C.field, homology(C))
    comps = {}
    for n, h in H.dims.items():
        kern = C.diff(n).kernel_basis()
        d_prev = C.diff(n - 1)
        # greedily pick kernel vectors spanning a complement of im d_(n-1)
        img_cols = [[d_prev.rows[r][c] for r in range(d_prev.nrows)]
                    for c in range(d_prev.ncols)]
        chosen = []
        current = list(img_cols)
        rank = (Matrix(C.field, list(zip(*current)), ncols=len(current)).rank()
                if current else 0)
        for v in kern:
            if len(chosen) == h:
                break
            col = [row[0] for row in v.rows]
            cand = current + [col]
            r = Matrix(C.field, list(zip(*cand)), ncols=len(cand)).rank()
            if r > rank:
                current, rank = cand, r
                chosen.append(col)
        if len(chosen) != h:
            raise GluingError("failed to split homology (internal error)")
        comps[n] = Matrix(C.field, list(zip(*chosen)), ncols=h)
    return ChainMap(H, C, 0, comps)


def homology_retraction(C: ChainComplex) -> ChainMap:
    """A closed quasi-isomorphism C -> H(C)."""
    H = profile_complex(C.field, homology(C))
    sec = homology_section(C)
    comps = {}
    F = C.field
    for n, h in H.dims.items():
        # pi: C^n -> H^n must kill im(d_{n-1}) and satisfy pi . sec = id;
        # solve row-by-row through the transposed conditions
        d_prev = C.diff(n - 1)
        sec_n = sec.component(n)
        cn = C.dim(n)
        cond = Matrix.from_blocks(F, [[d_prev.transpose()], [sec_n.transpose()]])
        rows = []
        for i in range(h):
            rhs_entries = [[F.zero()] for _ in range(d_prev.ncols)] + \
                          [[F.one() if j == i else F.zero()] for j in range(h)]
            rhs = Matrix(F, rhs_entries, ncols=1)
            sol = cond.solve(rhs)
            if sol is None:
                raise GluingError("failed to build homology retraction")
            rows.append([sol.rows[j][0] for j in range(cn)])
        comps[n] = Matrix(F, rows, ncols=cn)
    return ChainMap(C, H, 0, comps)


def profile_matching_qis(A: ChainComplex, B: ChainComplex) -> ChainMap:
    """An explicit closed quasi-isomorphism A -> B when the homology
    profiles agree (any two such complexes are quasi-isomorphic over a
    field)."""
    if homology(A) != homology(B):
        raise GluingError("profiles differ; no quasi-isomorphism exists")
    retr = homology_retraction(A)
    sec = homology_section(B)
    # identify the two homology models (equal dims per degree)
    mid = ChainMap(retr.target, sec.source, 0,
                   {n: Matrix.identity(A.field, d) for n, d in retr.target.dims.items()})
    return compose(sec, compose(mid, retr))
