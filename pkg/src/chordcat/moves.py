"""Elementary moves on dualizable graphs with object transport, the
unit-weight reduction driver, and the transport verifier.

The primitive rewrite splits one interior weight entry: (..., n, ...) with
n >= 2 becomes (..., 1, n-1, ...).  On the graph this merges the n
down-feet of the left wheel into one foot carrying the composite arrow,
merges the matched pair of up-feet on the right wheel, and inserts a fresh
unit circle between them.  The new wheel's representation is assembled
from shifted cones of the suffix composites with octahedral comparison
maps as arrows, so each new strand stalk is quasi-isomorphic to the stalk
it replaces; the middle arrow is rank-solved through homology splittings
(with chi-zero padding) so its cone matches the right-hand merged cone's
homology exactly.  Euler pairings of arbitrary object pairs are preserved
on the nose; the trace records enough data to invert every step and to
re-verify every invariant from scratch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from .fields import Field
from .homalg import (
    ChainComplex, ChainMap, Matrix, cone, compose, direct_sum, homology,
    identity_map, octahedral_comparison, p_map, shift, zero_map,
)
from .cpmcat import (
    CoverPresentation, GluedObject, QuiverRepObject, SharedItem, GluingError,
    cover_of, homology_retraction, homology_section, make_glued_object,
    profile_complex, profile_matching_qis, stalk_item, validate_glued,
)
from .ribbon import (
    DualizableSpec, faces, graph_to_json, make_dualizable_structure,
)
from .serialize import canonical_json, content_hash


class MoveError(ValueError):
    pass


# ---------------------------------------------------------------------------
# reduction state


@dataclass
class ReduceState:
    genus: int
    weights: tuple
    structure: object
    cover: CoverPresentation
    objects: tuple

    @staticmethod
    def build(genus: int, weights, objects=()) -> "ReduceState":
        spec = DualizableSpec(genus, tuple(weights))
        st = make_dualizable_structure(spec)
        cov = cover_of(st.graph)
        return ReduceState(genus, tuple(weights), st, cov, tuple(objects))

    def n_wheels(self) -> int:
        return len(self.weights) - 1 + self.genus

    def interior_entries(self) -> list:
        m = len(self.weights)
        if self.genus == 1:
            return list(range(m))
        return list(range(1, m - 1))

    def strand_total(self) -> int:
        return sum(self.weights)

    def reduction_measure(self) -> tuple:
        ints = self.interior_entries()
        multi = sum(1 for e in ints if self.weights[e] >= 2)
        excess = sum(self.weights[e] - 1 for e in ints)
        return (multi, excess)


@dataclass(frozen=True)
class MoveSite:
    kind: str                  # "EM1"
    entry: int                 # weight entry being split (0-based)

    def to_json(self):
        return {"kind": self.kind, "entry": self.entry}


@dataclass
class MoveStep:
    site: MoveSite
    weights_before: tuple
    weights_after: tuple
    graph_hash_before: str
    graph_hash_after: str
    edge_map: dict             # old edge key -> new edge key (outside site)
    snapshot_before: dict
    snapshot_after: dict
    objects_before: tuple      # witness for inversion
    objects_after: tuple
    measure_before: tuple
    measure_after: tuple


@dataclass
class RewriteTrace:
    genus: int
    initial_weights: tuple
    steps: list = dc_field(default_factory=list)


# ---------------------------------------------------------------------------
# small chain-map assembly helpers


def block_diag_map(f: ChainMap, g: ChainMap) -> ChainMap:
    """f (+) g on direct sums (block order: f part then g part)."""
    src = direct_sum(f.source, g.source)
    tgt = direct_sum(f.target, g.target)
    F = f.field
    comps = {}
    for n in src.dims:
        if not tgt.dim(n + f.degree):
            continue
        blocks = [
            [f.component(n), Matrix.zero(F, f.target.dim(n + f.degree), g.source.dim(n))],
            [Matrix.zero(F, g.target.dim(n + g.degree), f.source.dim(n)), g.component(n)],
        ]
        comps[n] = Matrix.from_blocks(F, blocks)
    return ChainMap(src, tgt, f.degree, comps)


def cone_of_block_diag_split(f: ChainMap, g: ChainMap) -> ChainMap:
    """The permutation isomorphism Cone(f (+) g) -> Cone(f) (+) Cone(g)."""
    d = block_diag_map(f, g)
    src = cone(d)
    tgt = direct_sum(cone(f), cone(g))
    F = f.field
    comps = {}
    for n in src.dims:
        if not tgt.dim(n):
            continue
        # source basis: [sF^(n+1), sG^(n+1), tF^n, tG^n]
        # target basis: [sF^(n+1), tF^n, sG^(n+1), tG^n]
        a = f.source.dim(n + 1)
        b = g.source.dim(n + 1)
        c = f.target.dim(n)
        e = g.target.dim(n)
        total = a + b + c + e
        z, o = F.zero(), F.one()
        rows = [[z] * total for _ in range(total)]
        for i in range(a):
            rows[i][i] = o
        for i in range(c):
            rows[a + i][a + b + i] = o
        for i in range(b):
            rows[a + c + i][a + i] = o
        for i in range(e):
            rows[a + c + b + i][a + b + c + i] = o
        comps[n] = Matrix(F, rows, ncols=total)
    return ChainMap(src, tgt, 0, comps)


def sum_projection(A: ChainComplex, B: ChainComplex, first: bool) -> ChainMap:
    """Projection direct_sum(A, B) -> A (or B); a chain map since the sum
    differential is block diagonal."""
    S = direct_sum(A, B)
    T = A if first else B
    F = A.field
    comps = {}
    for n in S.dims:
        if not T.dim(n):
            continue
        ia = Matrix.identity(F, A.dim(n))
        za = Matrix.zero(F, A.dim(n), B.dim(n))
        ib = Matrix.identity(F, B.dim(n))
        zb = Matrix.zero(F, B.dim(n), A.dim(n))
        comps[n] = Matrix.from_blocks(F, [[ia, za]] if first else [[zb, ib]])
    return ChainMap(S, T, 0, comps)


def rank_profile_map(P: ChainComplex, Q: ChainComplex, target_profile: dict) -> ChainMap:
    """A closed map P -> Q whose cone has the given homology profile.

    Solves for the homology-level rank r_i from
    profile_i = (hQ_i - r_i) + (hP_(i+1) - r_(i+1)) and realizes it through
    splittings.  Raises MoveError when no nonnegative solution exists.
    """
    hP, hQ = homology(P), homology(Q)
    degs = sorted(set(hP) | set(hQ) | set(target_profile) |
                  {n - 1 for n in hP})
    if not degs:
        return zero_map(P, Q)
    lo, hi = min(degs) - 1, max(degs) + 1
    t = {}
    for i in range(lo, hi + 1):
        t[i] = hQ.get(i, 0) + hP.get(i + 1, 0) - target_profile.get(i, 0)
        if t[i] < 0:
            raise MoveError("cone profile out of reach (padding too small)")
    r = {lo: 0}
    for i in range(lo, hi + 1):
        r[i + 1] = t[i] - r[i]
        if r[i + 1] < 0:
            raise MoveError("cone profile rank recursion failed")
        if r[i + 1] > min(hP.get(i + 1, 0), hQ.get(i + 1, 0)):
            raise MoveError("cone profile rank exceeds homology")
    if r.get(hi + 1, 0) != 0:
        raise MoveError("cone profile rank recursion does not close")
    retr = homology_retraction(P)
    sec = homology_section(Q)
    HP, HQ = retr.target, sec.source
    F = P.field
    comps = {}
    for n, hp in HP.dims.items():
        rq = HQ.dim(n)
        if not rq:
            continue
        rows = [[F.zero()] * hp for _ in range(rq)]
        for i in range(r.get(n, 0)):
            rows[i][i] = F.one()
        comps[n] = Matrix(F, rows, ncols=hp)
    mid = ChainMap(HP, HQ, 0, comps)
    return compose(sec, compose(mid, retr))


def chi_zero_pad(field: Field, degrees: list, size: int) -> ChainComplex:
    """A zero-differential complex with equal dimensions in consecutive
    degree pairs: chi = 0 whatever the size."""
    dims = {}
    for d in degrees:
        dims[d] = dims.get(d, 0) + size
        dims[d + 1] = dims.get(d + 1, 0) + size
    return ChainComplex(field, dims, {})


# ---------------------------------------------------------------------------
# the split move


def _wheel_indices(state: ReduceState, entry: int):
    """(top wheel, bottom wheel) flanking the family of a weight entry."""
    m = len(state.weights)
    nw = state.n_wheels()
    if state.genus == 0:
        if not (1 <= entry <= m - 2):
            raise MoveError(f"entry {entry} is not interior")
        return entry - 1, entry
    top = (entry - 1) % m
    return top, (top + 1) % nw


def _arrow_map(rep: QuiverRepObject, foot: int) -> ChainMap:
    # trivalent wheels: arrow index equals foot index
    return rep.arrow_maps[foot]


def split_weight_entry(state: ReduceState, entry: int):
    """Apply one elementary move: split weights[entry] = n >= 2 into
    (1, n-1), transporting every tracked object.  Returns (new_state,
    MoveStep)."""
    w = state.weights
    m = len(w)
    n = w[entry]
    if n < 2:
        raise MoveError(f"entry {entry} has weight {n}; pattern mismatch")
    top_i, bot_i = _wheel_indices(state, entry)
    new_w = w[:entry] + (1, n - 1) + w[entry + 1:]
    new_state_empty = ReduceState.build(state.genus, new_w)
    old_struct, new_struct = state.structure, new_state_empty.structure
    piece_remap = {}
    for t in range(state.n_wheels()):
        piece_remap[t] = t + (1 if t >= entry else 0)
    wstar_i = entry
    new_objects = []
    for X in state.objects:
        new_objects.append(_transport_object(state, new_state_empty, entry,
                                             top_i, bot_i, wstar_i,
                                             piece_remap, X))
    edge_map = _edge_correspondence(state, new_state_empty, entry,
                                    top_i, bot_i, piece_remap)
    new_state = ReduceState(state.genus, new_w, new_struct,
                            new_state_empty.cover, tuple(new_objects))
    site = MoveSite("EM1", entry)
    step = MoveStep(
        site=site,
        weights_before=w, weights_after=new_w,
        graph_hash_before=content_hash(graph_to_json(old_struct.graph)),
        graph_hash_after=content_hash(graph_to_json(new_struct.graph)),
        edge_map=edge_map,
        snapshot_before=take_snapshot(state),
        snapshot_after=take_snapshot(new_state),
        objects_before=state.objects,
        objects_after=new_state.objects,
        measure_before=state.reduction_measure(),
        measure_after=new_state.reduction_measure(),
    )
    return new_state, step


def _transport_object(state, new_state, entry, top_i, bot_i, wstar_i,
                      piece_remap, X: GluedObject) -> GluedObject:
    w = state.weights
    m = len(w)
    n = w[entry]
    field = X.field
    top_rep = X.reps[top_i]
    bot_rep = X.reps[bot_i]
    u_top = w[(entry - 1) % m]      # up-spoke count of the top wheel
    # top family arrows in composition order (ascending along the circle)
    ms = [_arrow_map(top_rep, u_top + t) for t in range(n)]
    a_full = ms[0]
    for mp in ms[1:]:
        a_full = compose(mp, a_full)
    # bottom family arrows (up-feet 0..n-1, maps node t -> node t-1 mod N)
    ns = [_arrow_map(bot_rep, t) for t in range(n)]
    nu = compose(ns[0], ns[1])      # merged pair composite, node 1 -> node -1
    # --- new top wheel: merge the down block ----------------------------
    NL = len(top_rep.quiver.nodes)
    new_top_nodes = [top_rep.node_values[t] for t in range(u_top)] + \
                    [top_rep.node_values[NL - 1]]
    new_top_arrows = []
    for t in range(u_top):          # untouched up arrows
        new_top_arrows.append(top_rep.arrow_maps[t])
    new_top_arrows.append(a_full)   # merged down foot
    # --- new bottom wheel: merge the up pair ----------------------------
    NR = len(bot_rep.quiver.nodes)
    new_bot_nodes = [bot_rep.node_values[t + 1] for t in range(NR - 2)] + \
                    [bot_rep.node_values[NR - 1]]
    new_bot_arrows = [nu]
    for t in range(2, n):
        new_bot_arrows.append(bot_rep.arrow_maps[t])
    for t in range(n, NR):          # bottom's own down arrows
        new_bot_arrows.append(bot_rep.arrow_maps[t])
    # --- the new unit wheel ----------------------------------------------
    T_last = a_full.target
    suffix = [None] * (n + 1)       # suffix[t] = m_(n-1) ... m_t
    suffix[n] = identity_map(T_last)
    for t in range(n - 1, -1, -1):
        suffix[t] = compose(suffix[t + 1], ms[t]) if t + 1 <= n else ms[t]
    # arcs before padding: node 0 carries C(suffix_0)[-1] and node j >= 1
    # carries C(suffix_(j+1))[-1]; node n-1 is C(id)[-1], acyclic.
    base_arcs = [shift(cone(suffix[0]), -1)]
    for j in range(1, n):
        base_arcs.append(shift(cone(suffix[j + 1]), -1))
    # padding so the middle arrow can reach the bottom pair's cone profile
    target_profile = homology(cone(nu))
    pad = _padding_for(field, base_arcs[0], base_arcs[1], target_profile)
    arcs = [direct_sum(c, pad) for c in base_arcs]
    # up arrow at foot 0: node 0 -> node n-1, built from p(a, id)
    lam_core = p_map(a_full, identity_map(T_last))
    lam = block_diag_map(lam_core, identity_map(pad))
    # down arrows at feet 1..n-1: node j-1 -> node j
    down_maps = [rank_profile_map(arcs[0], arcs[1], target_profile)]
    for j in range(2, n):
        core = p_map(ms[j], suffix[j + 1])
        down_maps.append(block_diag_map(core, identity_map(pad)))
    wstar_nodes = arcs
    wstar_arrows = [lam] + down_maps
    # --- assemble the glued object on the new cover ---------------------
    cov = new_state.cover
    reps = [None] * len(cov.pieces)
    for t in range(state.n_wheels()):
        t2 = piece_remap[t]
        if t == top_i:
            reps[t2] = QuiverRepObject(cov.pieces[t2].quiver,
                                       tuple(new_top_nodes), tuple(new_top_arrows))
        elif t == bot_i:
            reps[t2] = QuiverRepObject(cov.pieces[t2].quiver,
                                       tuple(new_bot_nodes), tuple(new_bot_arrows))
        else:
            old = X.reps[t]
            reps[t2] = QuiverRepObject(cov.pieces[t2].quiver,
                                       old.node_values, old.arrow_maps)
    reps[wstar_i] = QuiverRepObject(cov.pieces[wstar_i].quiver,
                                    tuple(wstar_nodes), tuple(wstar_arrows))
    comparisons = _transport_comparisons(state, new_state, entry, top_i, bot_i,
                                         wstar_i, piece_remap, X, reps,
                                         ms, ns, a_full, nu, suffix, pad,
                                         lam_core, down_maps)
    return make_glued_object(cov, reps, comparisons)


def _padding_for(field, arc1, arc2, target_profile):
    """chi-zero padding making the target cone profile reachable from
    maps arc1 (+) pad -> arc2 (+) pad."""
    h1, h2 = homology(arc1), homology(arc2)
    degs = set(h1) | set(h2) | set(target_profile)
    degs |= {d - 1 for d in degs}
    if not degs:
        return ChainComplex(field, {}, {})
    lo, hi = min(degs), max(degs)
    raw = sum(abs(v) for v in h1.values()) + sum(abs(v) for v in h2.values()) \
        + sum(abs(v) for v in target_profile.values()) + 2
    return chi_zero_pad(field, list(range(lo, hi + 1)), raw)


def _transport_comparisons(state, new_state, entry, top_i, bot_i, wstar_i,
                           piece_remap, X, reps, ms, ns, a_full, nu, suffix,
                           pad, lam_core, down_maps):
    w = state.weights
    m = len(w)
    n = w[entry]
    u_top = w[(entry - 1) % m]
    cov_old, cov_new = state.cover, new_state.cover
    old_shared = {s.name: (i, s) for i, s in enumerate(cov_old.shared)}

    # identify old shared items by (piece, arrow) sides
    old_by_side = {}
    for i, s in enumerate(cov_old.shared):
        old_by_side[(s.piece_a, s.item_a)] = (i, s, "a")
        old_by_side[(s.piece_b, s.item_b)] = (i, s, "b")

    def old_comparison_for(piece, arrow_idx):
        key = (piece, ("arrow", arrow_idx))
        if key not in old_by_side:
            return None
        i, s, side = old_by_side[key]
        return (i, s, side)

    # map old (piece, arrow) -> new (piece, arrow) for untouched spokes
    def remap_arrow(piece, arrow_idx):
        if piece == top_i:
            if arrow_idx < u_top:
                return (piece_remap[piece], arrow_idx)
            return None                     # down family: rebuilt
        if piece == bot_i:
            if arrow_idx < n:
                return None                 # up family: rebuilt
            return (piece_remap[piece], arrow_idx - 1)
        return (piece_remap[piece], arrow_idx)

    new_comparisons = {}
    # untouched strands keep their comparisons
    for i, s in enumerate(cov_old.shared):
        na = remap_arrow(s.piece_a, s.item_a[1])
        nb = remap_arrow(s.piece_b, s.item_b[1])
        if na is None or nb is None:
            continue
        (pa, ka), (pb, kb) = na, nb
        new_comparisons[_find_new_shared(cov_new, pa, ka, pb, kb)] = \
            (X.comparisons[i], (pa, ka), (pb, kb))
    # t1: new top's merged foot <-> W*'s up arrow (lambda)
    top2 = piece_remap[top_i]
    lam_padded = reps[wstar_i].arrow_maps[0]
    split_iso = cone_of_block_diag_split(lam_core, identity_map(pad))
    proj = sum_projection(cone(lam_core), cone(identity_map(pad)), True)
    p_w, wit = octahedral_comparison(a_full, identity_map(a_full.target))
    # wit: Cone(lam_core) -> Cone(a_full); route the padded cone through it
    u_t1 = compose(wit, compose(proj, split_iso))
    new_comparisons[_find_new_shared(cov_new, top2, u_top, wstar_i, 0)] = \
        (u_t1, (wstar_i, 0), (top2, u_top))
    # strands W* -> new bottom
    bot2 = piece_remap[bot_i]
    # foot 1 of W* (the rank-solved arrow) vs merged bottom foot (arrow 0)
    mid = down_maps[0]
    u_mid = profile_matching_qis(cone(mid), cone(nu))
    new_comparisons[_find_new_shared(cov_new, wstar_i, 1, bot2, 0)] = \
        (u_mid, (wstar_i, 1), (bot2, 0))
    # feet j = 2..n-1 of W*: witness to C(m_j) composed with the old u of
    # strand s_j (identity matching: top foot u_top+j <-> bottom foot j)
    for j in range(2, n):
        core = p_map(ms[j], suffix[j + 1])
        split_j = cone_of_block_diag_split(core, identity_map(pad))
        proj_j = sum_projection(cone(core), cone(identity_map(pad)), True)
        _, wit_j = octahedral_comparison(ms[j], suffix[j + 1])
        to_m = compose(wit_j, compose(proj_j, split_j))   # C(mu_j) -> C(m_j)
        old_cmp = old_comparison_for(top_i, u_top + j)
        if old_cmp is None:
            raise MoveError("missing comparison on a split family strand")
        i, s, side = old_cmp
        u_old = X.comparisons[i]
        if side != "a":
            raise MoveError("unexpected comparison orientation on family")
        u_new = compose(u_old, to_m)
        new_comparisons[_find_new_shared(cov_new, wstar_i, j, bot2, j - 1)] = \
            (u_new, (wstar_i, j), (bot2, j - 1))
    # order by the new cover's shared list, flipping sides where needed
    out = []
    for idx, s in enumerate(cov_new.shared):
        if idx not in new_comparisons:
            raise MoveError(f"no comparison built for shared item {s.name}")
        u, side_src, side_dst = new_comparisons[idx]
        want_src = (s.piece_a, s.item_a[1])
        if side_src == want_src:
            out.append(u)
        elif side_dst == want_src:
            out.append(_invert_comparison(u))
        else:
            raise MoveError("comparison sides do not match the new cover")
    return tuple(out)


def _invert_comparison(u: ChainMap) -> ChainMap:
    return profile_matching_qis(u.target, u.source)


def _find_new_shared(cov: CoverPresentation, pa, ka, pb, kb) -> int:
    for i, s in enumerate(cov.shared):
        sides = {(s.piece_a, s.item_a), (s.piece_b, s.item_b)}
        if sides == {(pa, ("arrow", ka)), (pb, ("arrow", kb))}:
            return i
    raise MoveError(f"no shared item between ({pa},{ka}) and ({pb},{kb})")


# ---------------------------------------------------------------------------
# edge correspondence for invariant checks


def _edge_correspondence(state, new_state, entry, top_i, bot_i, piece_remap):
    """Map old edge keys to new edge keys away from the rewrite site."""
    w = state.weights
    m = len(w)
    n = w[entry]
    u_top = w[(entry - 1) % m]
    g_old = state.structure.graph.graph
    g_new = new_state.structure.graph.graph

    def he_map(old_h):
        # half-edges are named w{t}(a{i}o|a{i}i|s{i})
        t = int(old_h[1:old_h.index("a") if "a" in old_h[2:3] else old_h.index("s")])
        return None

    # rebuild names explicitly instead of parsing: iterate wheels
    out = {}
    for t in range(state.n_wheels()):
        t2 = piece_remap[t]
        NL = w[t % m] + w[(t + 1) % m]
        if t == top_i:
            # up arcs and spokes keep indices; corner arc shifts
            for i in range(u_top):
                out[_arc_edge(t, i)] = _arc_edge(t2, i)
                out[_spoke_half(t, i)] = _spoke_half(t2, i)
            out[_arc_edge(t, NL - 1)] = _arc_edge(t2, u_top)
            # down feet/arcs are inside the site
        elif t == bot_i:
            NR = NL
            for i in range(1, n):
                if i >= 2:
                    out[_spoke_half(t, i)] = _spoke_half(t2, i - 1)
                if i <= NR - 2:
                    out[_arc_edge(t, i)] = _arc_edge(t2, i - 1)
            for i in range(n, NR):
                out[_spoke_half(t, i)] = _spoke_half(t2, i - 1)
                if i <= NR - 2:
                    out[_arc_edge(t, i)] = _arc_edge(t2, i - 1)
            out[_arc_edge(t, NR - 1)] = _arc_edge(t2, NR - 2)
        else:
            for i in range(NL):
                out[_arc_edge(t, i)] = _arc_edge(t2, i)
                out[_spoke_half(t, i)] = _spoke_half(t2, i)
    # translate half-edge names to edge keys on both sides
    edge_out = {}
    for old_key, new_key in out.items():
        ok = _resolve_edge(g_old, old_key)
        nk = _resolve_edge(g_new, new_key)
        if ok is not None and nk is not None:
            edge_out[ok] = nk
    return {canonical_json(list(k)): list(v) for k, v in edge_out.items()}


def _arc_edge(t, i):
    return ("arc", t, i)


def _spoke_half(t, i):
    return ("spoke", t, i)


def _resolve_edge(g, key):
    kind, t, i = key
    if kind == "arc":
        h = f"w{t}a{i}o"
    else:
        h = f"w{t}s{i}"
    if h not in g.pairing:
        return None
    return g.edge_of(h)


# ---------------------------------------------------------------------------
# public move operations


def apply_em1(state: ReduceState, entry: int):
    """One elementary move at the leading spoke pair of a weight entry.

    Also returns the transported-pattern record: the kept map pair (f),
    the octahedral second component p: C(gf)[-1] -> C(g)[-1] and its
    quasi-isomorphism witness, matching the stated transport formula for
    the two leading strands of the family.
    """
    n = state.weights[entry]
    if n < 2:
        raise MoveError(f"entry {entry} has weight {n}; pattern mismatch")
    records = []
    for X in state.objects:
        top_i, _ = _wheel_indices(state, entry)
        u_top = state.weights[(entry - 1) % len(state.weights)]
        f = _arrow_map(X.reps[top_i], u_top)
        g = _arrow_map(X.reps[top_i], u_top + 1)
        p, wit = octahedral_comparison(f, g)
        records.append({"first": f, "second": p, "witness": wit})
    new_state, step = split_weight_entry(state, entry)
    return new_state, step, records


def apply_em1_inverse(state: ReduceState, step: MoveStep) -> ReduceState:
    """Invert an elementary move using the step's transport witness."""
    if step.weights_after != state.weights:
        raise MoveError("pattern mismatch: step does not invert this state")
    if content_hash(graph_to_json(state.structure.graph)) != step.graph_hash_after:
        raise MoveError("pattern mismatch: graph hash differs")
    for X in state.objects:
        bad = validate_glued(X)
        if bad:
            raise MoveError("u fails is_quasi_iso: " + "; ".join(bad))
    before = ReduceState.build(state.genus, step.weights_before)
    return ReduceState(state.genus, step.weights_before, before.structure,
                       before.cover, step.objects_before)


def apply_em1_prime(state: ReduceState, entry: int):
    """Unitize one weight entry by iterating the elementary move; equals
    the composite of (weight - 1) single moves."""
    n = state.weights[entry]
    if n < 2:
        raise MoveError(f"entry {entry} has weight {n}; run too short")
    steps = []
    cur = state
    pos = entry
    while cur.weights[pos] >= 2:
        cur, step, _ = apply_em1(cur, pos)
        steps.append(step)
        pos += 1            # the remainder (n-1) moved one slot right
    return cur, steps


def reduce_to_unit_weights(state: ReduceState):
    """Drive a dualizable state to its unit-weight normal form.

    Genus 0 ends at (a_1, 1, ..., 1, a_m); genus 1 at all ones.  Every
    step strictly decreases the (multi-run count, interior excess)
    measure.  Returns (final_state, RewriteTrace)."""
    trace = RewriteTrace(state.genus, state.weights)
    cur = state
    while True:
        targets = [e for e in cur.interior_entries() if cur.weights[e] >= 2]
        if not targets:
            break
        e = targets[0]
        measure = cur.reduction_measure()
        cur, step, _ = apply_em1(cur, e)
        if not (step.measure_after < measure):
            raise MoveError("reduction measure failed to decrease")
        trace.steps.append(step)
    return cur, trace


# ---------------------------------------------------------------------------
# snapshots and verification


def take_snapshot(state: ReduceState) -> dict:
    """Stalk homology profiles on every edge per object, pairwise Euler
    pairings, genus, strand total."""
    from .cpmcat import euler_pairing, stalk
    rep = faces(state.structure.graph)
    profiles = []
    for X in state.objects:
        per = {}
        for p in state.cover.pieces:
            for e, item in p.edge_items.items():
                per[canonical_json(list(e))] = {
                    str(k): v for k, v in
                    homology(stalk_item(X.reps[p.index], item)).items()
                }
        profiles.append(per)
    eulers = [[None] * len(state.objects) for _ in state.objects]
    for i, X in enumerate(state.objects):
        for j, Y in enumerate(state.objects):
            eulers[i][j] = None
    from .cpmcat import euler_pairing as _ep
    eulers = [[_ep(X, Y) for Y in state.objects] for X in state.objects]
    return {
        "genus": rep.genus,
        "faces": rep.count,
        "strand_total": state.strand_total(),
        "weights": list(state.weights),
        "euler_pairings": eulers,
        "stalk_profiles": profiles,
    }


def verify_transport(trace: RewriteTrace, objects_initial=None) -> dict:
    """Re-check every step of a trace.

    Per step: (a) stalk profiles on all edges outside the rewrite site are
    unchanged (through the recorded edge correspondence); (b) all pairwise
    Euler pairings are unchanged; (c) genus and total strand count are
    unchanged; (d) every after-object is a valid glued object; (e) hashes
    chain; (f) re-applying the move to the before-objects reproduces the
    recorded after-state snapshot.  Returns a report dict; "ok" is True
    only if every check passes on every step.
    """
    report = {"ok": True, "steps": []}
    prev_hash = None
    for idx, step in enumerate(trace.steps):
        checks = {}
        sb, sa = step.snapshot_before, step.snapshot_after
        checks["euler_pairings"] = sb["euler_pairings"] == sa["euler_pairings"]
        checks["genus"] = sb["genus"] == sa["genus"]
        checks["strand_total"] = sb["strand_total"] == sa["strand_total"]
        ok_stalks = True
        for obj_i in range(len(step.objects_before)):
            before_prof = sb["stalk_profiles"][obj_i]
            after_prof = sa["stalk_profiles"][obj_i]
            for old_e, new_e in step.edge_map.items():
                key_new = canonical_json(new_e)
                if old_e in before_prof and key_new in after_prof:
                    if before_prof[old_e] != after_prof[key_new]:
                        ok_stalks = False
        checks["external_stalks"] = ok_stalks
        ok_valid = True
        for X in step.objects_after:
            if validate_glued(X):
                ok_valid = False
        checks["objects_valid"] = ok_valid
        if prev_hash is not None:
            checks["hash_chain"] = (step.graph_hash_before == prev_hash)
        prev_hash = step.graph_hash_after
        # recompute the move from the before-objects
        try:
            st_before = ReduceState.build(trace.genus, step.weights_before)
            st_before = ReduceState(trace.genus, step.weights_before,
                                    st_before.structure, st_before.cover,
                                    step.objects_before)
            redone, redone_step = split_weight_entry(st_before, step.site.entry)
            checks["recompute"] = (
                take_snapshot(redone) == sa
            )
        except Exception as exc:   # recomputation failure is a failed check
            checks["recompute"] = False
            checks["recompute_error"] = str(exc)
        step_ok = all(v for k, v in checks.items() if isinstance(v, bool))
        report["steps"].append({"step": idx, "site": step.site.to_json(),
                                "checks": checks, "ok": step_ok})
        if not step_ok:
            report["ok"] = False
            report["failing_step"] = idx
            break
    return report
