"""Chordal ribbon graphs: half-edge structure with cyclic orders, a marked
zero section, and an orientation of each zero-section circle.

Half-edges are string ids.  The pairing is an involution on half-edges;
fixed points are open ends (spoke tips and external rays).  An edge is the
orbit of the involution: a sorted pair ``(h1, h2)`` or a singleton ``(h,)``.

The orientation marks, for every zero-section edge, the "forward" half-edge:
the one attached at the vertex the directed edge leaves.  Up/down spoke
labels are derived from cyclic orders relative to this orientation and never
stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field


EdgeKey = tuple  # ("h1", "h2") sorted, or ("h",) for an open end


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class RibbonGraph:
    vertices: tuple
    half_edges: tuple
    pairing: dict          # involution, fixed points = open ends
    attach: dict           # half-edge -> vertex
    cyclic: dict           # vertex -> tuple of half-edges, counterclockwise

    def partner(self, h: str) -> str:
        return self.pairing[h]

    def is_open(self, h: str) -> bool:
        return self.pairing[h] == h

    def edge_of(self, h: str) -> EdgeKey:
        p = self.pairing[h]
        return (h,) if p == h else tuple(sorted((h, p)))

    def edges(self) -> list:
        seen = set()
        out = []
        for h in self.half_edges:
            e = self.edge_of(h)
            if e not in seen:
                seen.add(e)
                out.append(e)
        return out

    def open_ends(self) -> list:
        return [h for h in self.half_edges if self.is_open(h)]

    def degree(self, v: str) -> int:
        return len(self.cyclic[v])

    def next_at_vertex(self, h: str) -> str:
        order = self.cyclic[self.attach[h]]
        i = order.index(h)
        return order[(i + 1) % len(order)]

    def validate(self) -> list:
        out = []
        hs = set(self.half_edges)
        for h in self.half_edges:
            if self.pairing.get(self.pairing.get(h)) != h:
                out.append(f"pairing is not an involution at {h}")
            if self.attach.get(h) not in self.vertices:
                out.append(f"half-edge {h} attached to unknown vertex")
        for v in self.vertices:
            order = self.cyclic.get(v, ())
            at_v = {h for h in self.half_edges if self.attach[h] == v}
            if set(order) != at_v or len(order) != len(at_v):
                out.append(f"cyclic order at {v} does not list its half-edges once")
            if len(at_v) < 2:
                out.append(f"degree < 2 at {v}")
        if set(self.attach) != hs:
            out.append("attachment map domain mismatch")
        return out


@dataclass(frozen=True)
class ChordalRibbonGraph:
    graph: RibbonGraph
    zero_edges: frozenset      # of EdgeKey
    forward: frozenset         # forward half-edges of oriented zero-section edges

    def is_zero_edge(self, e: EdgeKey) -> bool:
        return e in self.zero_edges

    def zero_valency(self, v: str) -> int:
        g = self.graph
        return sum(1 for h in g.cyclic[v] if g.edge_of(h) in self.zero_edges)

    def zero_half_edges_at(self, v: str) -> list:
        g = self.graph
        return [h for h in g.cyclic[v] if g.edge_of(h) in self.zero_edges]

    # -- orientation-derived structure ---------------------------------

    def zero_out_half_edge(self, v: str):
        """The zero-section half-edge leaving v in the forward direction."""
        for h in self.zero_half_edges_at(v):
            if h in self.forward:
                return h
        return None

    def zero_in_half_edge(self, v: str):
        for h in self.zero_half_edges_at(v):
            if h not in self.forward:
                return h
        return None

    def spoke_direction(self, h: str) -> str:
        """"up" or "down" for a non-zero half-edge at a vertex with oriented
        zero section through it.

        With counterclockwise cyclic orders, a spoke immediately following
        the outgoing zero half-edge sits on the left of the travel
        direction: upward.  Trivalent feet only.
        """
        g = self.graph
        v = g.attach[h]
        z_out = self.zero_out_half_edge(v)
        z_in = self.zero_in_half_edge(v)
        if z_out is None and z_in is None:
            raise GraphError(f"no oriented zero section through {v}")
        order = g.cyclic[v]
        n = len(order)
        anchor = z_out if z_out is not None else z_in
        i = order.index(anchor)
        rel = [order[(i + k) % n] for k in range(n)]
        if z_out is not None and z_in is not None:
            between = rel[1:rel.index(z_in)]
            return "up" if h in between else "down"
        # boundary vertex of the zero section (a single zero ray)
        if z_out is not None:
            # travelling out of v: left of the outgoing direction comes last ccw
            return "down" if rel.index(h) == 1 else "up"
        return "up" if rel.index(h) == 1 else "down"

    def zero_circles(self) -> list:
        """Closed zero-section components traversed forward, as lists of
        directed (vertex, out_half_edge) steps.  Open components (rays,
        as in pitchforks) are skipped."""
        g = self.graph
        done = set()
        circles = []
        for v0 in g.vertices:
            h0 = self.zero_out_half_edge(v0)
            if h0 is None or h0 in done:
                continue
            steps = []
            cur_v, cur_h = v0, h0
            closed = False
            while cur_h is not None and cur_h not in done:
                done.add(cur_h)
                steps.append((cur_v, cur_h))
                p = g.partner(cur_h)
                if p == cur_h:
                    break
                cur_v = g.attach[p]
                cur_h = self.zero_out_half_edge(cur_v)
                if (cur_v, cur_h) == (v0, h0):
                    closed = True
                    break
            if closed:
                circles.append(steps)
        return circles

    def validate(self) -> list:
        out = list(self.graph.validate())
        g = self.graph
        known = set(g.edges())
        for e in self.zero_edges:
            if e not in known:
                out.append(f"zero-section edge {e} not in graph")
        for v in g.vertices:
            deg = g.degree(v)
            if deg > 4:
                out.append(f"valency > 4 at {v}")
            zv = self.zero_valency(v)
            if zv > 2:
                out.append(f"zero-section valency > 2 at {v}")
            if zv == 0:
                out.append(f"zero section misses vertex {v}")
            if deg == 4:
                if zv != 2:
                    out.append(f"4-valent vertex {v} needs zero-valency 2")
                else:
                    zh = self.zero_half_edges_at(v)
                    order = g.cyclic[v]
                    i, j = order.index(zh[0]), order.index(zh[1])
                    if (j - i) % len(order) == 1 or (i - j) % len(order) == 1:
                        out.append(f"minimal pair violation at {v}")
        for e in self.zero_edges:
            fwd = [h for h in e if h in self.forward]
            if len(e) == 2 and len(fwd) != 1:
                out.append(f"zero edge {e} needs exactly one forward half-edge")
        return out


def validate_chordal(G: ChordalRibbonGraph) -> list:
    """Diagnostics for the chordal conditions; empty iff valid."""
    return G.validate()


# ---------------------------------------------------------------------------
# face tracing and genus


@dataclass
class FaceReport:
    faces: list
    count: int
    genus: int
    vertices: int
    edges: int


def faces(G: ChordalRibbonGraph) -> FaceReport:
    """Trace boundary faces of the thickened surface.

    The trace follows each half-edge to its partner and turns to the
    cyclic successor; open ends double back (the tip acts as a 1-valent
    vertex).  Euler's relation with tips counted as vertices gives the
    genus.
    """
    g = G.graph
    bad = validate_chordal(G)
    if bad:
        raise GraphError("invalid graph: " + "; ".join(bad))
    nxt = {}
    for h in g.half_edges:
        nxt[h] = g.next_at_vertex(g.partner(h))
    seen = set()
    out = []
    for h in sorted(g.half_edges):
        if h in seen:
            continue
        face = []
        cur = h
        while cur not in seen:
            seen.add(cur)
            face.append(cur)
            cur = nxt[cur]
        out.append(face)
    V = len(g.vertices) + len(g.open_ends())
    E = len(g.edges())
    F = len(out)
    chi = V - E + F
    if chi % 2 != 0:
        raise GraphError(f"odd Euler characteristic {chi}")
    genus = (2 - chi) // 2
    return FaceReport(faces=out, count=F, genus=genus, vertices=V, edges=E)


# ---------------------------------------------------------------------------
# constructors


@dataclass(frozen=True)
class DualizableSpec:
    genus: int
    weights: tuple

    def __post_init__(self):
        if self.genus not in (0, 1):
            raise GraphError("genus must be 0 or 1")
        if not self.weights or any(a < 1 for a in self.weights):
            raise GraphError("weights must be positive integers")
        if self.genus == 0 and len(self.weights) < 2:
            raise GraphError("genus 0 needs at least two weights")


@dataclass
class WheelStructure:
    """Bookkeeping for one zero-section circle of a constructed graph."""
    index: int
    feet: list            # vertex ids in circle order, up block then down block
    up_spokes: list       # spoke half-edge ids at the up feet, circle order
    down_spokes: list
    arc_edges: list       # arc_edges[i] joins feet[i] to feet[i+1 mod n]


@dataclass
class DualizableStructure:
    spec: DualizableSpec
    graph: ChordalRibbonGraph
    wheels: list          # WheelStructure
    families: list        # (left_wheel, right_wheel, [(down_he, up_he), ...]) or open


def _build_circle(prefix: str, n_up: int, n_down: int):
    """Vertices, half-edges and cyclic orders for one wheel circle with
    ``n_up`` upward feet followed by ``n_down`` downward feet."""
    n = n_up + n_down
    if n == 0:
        raise GraphError("a wheel needs at least one spoke")
    feet = [f"{prefix}v{i}" for i in range(n)]
    vertices = list(feet)
    half_edges = []
    pairing = {}
    attach = {}
    cyclic = {}
    zero_edges = []
    forward = []
    arc_edges = []
    # arc i joins feet[i] -> feet[i+1]; half-edges a{i}o at feet[i], a{i}i at feet[i+1]
    for i in range(n):
        ho, hi = f"{prefix}a{i}o", f"{prefix}a{i}i"
        pairing[ho], pairing[hi] = hi, ho
        attach[ho] = feet[i]
        attach[hi] = feet[(i + 1) % n]
        half_edges += [ho, hi]
        zero_edges.append(tuple(sorted((ho, hi))))
        arc_edges.append(tuple(sorted((ho, hi))))
        forward.append(ho)
    up_spokes, down_spokes = [], []
    for i in range(n):
        s = f"{prefix}s{i}"
        pairing[s] = s
        attach[s] = feet[i]
        half_edges.append(s)
        z_out = f"{prefix}a{i}o"
        z_in = f"{prefix}a{(i - 1) % n}i"
        if i < n_up:
            cyclic[feet[i]] = (z_out, s, z_in)   # spoke left of travel: upward
            up_spokes.append(s)
        else:
            cyclic[feet[i]] = (z_out, z_in, s)   # spoke right of travel: downward
            down_spokes.append(s)
    return {
        "vertices": vertices,
        "half_edges": half_edges,
        "pairing": pairing,
        "attach": attach,
        "cyclic": cyclic,
        "zero_edges": zero_edges,
        "forward": forward,
        "feet": feet,
        "up_spokes": up_spokes,
        "down_spokes": down_spokes,
        "arc_edges": arc_edges,
    }


def _assemble(parts: list, strand_pairs: list) -> ChordalRibbonGraph:
    vertices, half_edges, pairing, attach, cyclic = [], [], {}, {}, {}
    zero, forward = [], []
    for p in parts:
        vertices += p["vertices"]
        half_edges += p["half_edges"]
        pairing.update(p["pairing"])
        attach.update(p["attach"])
        cyclic.update(p["cyclic"])
        zero += p["zero_edges"]
        forward += p["forward"]
    for (h1, h2) in strand_pairs:
        pairing[h1], pairing[h2] = h2, h1
    g = RibbonGraph(tuple(vertices), tuple(half_edges), pairing, attach, cyclic)
    return ChordalRibbonGraph(g, frozenset(tuple(sorted(e)) for e in zero), frozenset(forward))


def make_wheel(a1: int, a2: int) -> ChordalRibbonGraph:
    """The wheel with ``a1`` upward and ``a2`` downward spokes on one
    oriented zero-section circle, upward block first."""
    if a1 < 1 or a2 < 1:
        raise GraphError("wheel weights must be >= 1")
    part = _build_circle("w", a1, a2)
    return _assemble([part], [])


def make_pitchfork(variant: int) -> ChordalRibbonGraph:
    """The two chordal structures on a line with one upward spoke.

    Variant 1 takes the whole line as zero section with the spoke attached
    upward.  Variant 2 takes one half-line as zero section ending at the
    vertex, with the full cotangent fiber (both spoke halves) crossing it.
    """
    if variant == 1:
        pairing = {"l": "l", "r": "r", "s": "s"}
        attach = {"l": "v", "r": "v", "s": "v"}
        cyclic = {"v": ("r", "s", "l")}
        g = RibbonGraph(("v",), ("l", "r", "s"), pairing, attach, cyclic)
        return ChordalRibbonGraph(g, frozenset({("l",), ("r",)}), frozenset({"r"}))
    if variant == 2:
        pairing = {"z": "z", "fu": "fu", "fd": "fd"}
        attach = {"z": "v", "fu": "v", "fd": "v"}
        cyclic = {"v": ("fu", "z", "fd")}
        g = RibbonGraph(("v",), ("z", "fu", "fd"), pairing, attach, cyclic)
        return ChordalRibbonGraph(g, frozenset({("z",)}), frozenset())
    raise GraphError("pitchfork variant must be 1 or 2")


def make_dualizable(genus: int, weights) -> ChordalRibbonGraph:
    return make_dualizable_structure(DualizableSpec(genus, tuple(weights))).graph


def make_dualizable_structure(spec: DualizableSpec) -> DualizableStructure:
    """Glue wheels along matched spoke families.

    Genus 0 with weights (a_1..a_m) chains m-1 wheels L(a_i, a_(i+1));
    wheel i's downward spokes attach to wheel i+1's upward spokes.  Genus 1
    additionally closes the cycle.  The matching reverses the circle order
    (facing circles traverse the shared boundary oppositely), which is the
    unbraided planar matching.
    """
    a = spec.weights
    m = len(a)
    n_wheels = m - 1 + spec.genus
    parts = []
    wheels = []
    for i in range(n_wheels):
        up = a[i]
        down = a[(i + 1) % m]
        part = _build_circle(f"w{i}", up, down)
        parts.append(part)
        wheels.append(WheelStructure(
            index=i, feet=part["feet"], up_spokes=part["up_spokes"],
            down_spokes=part["down_spokes"], arc_edges=part["arc_edges"],
        ))
    strand_pairs = []
    families = []
    if spec.genus == 0:
        families.append((None, 0, [(None, h) for h in wheels[0].up_spokes]))
    pair_count = n_wheels - 1 + spec.genus
    for i in range(pair_count):
        j = (i + 1) % n_wheels
        downs = wheels[i].down_spokes
        ups = wheels[j].up_spokes
        if len(downs) != len(ups):
            raise GraphError("family size mismatch")
        matched = list(zip(downs, reversed(ups)))
        strand_pairs += matched
        families.append((i, j, matched))
    if spec.genus == 0:
        families.append((n_wheels - 1, None, [(h, None) for h in wheels[-1].down_spokes]))
    graph = _assemble(parts, strand_pairs)
    return DualizableStructure(spec=spec, graph=graph, wheels=wheels, families=families)


# ---------------------------------------------------------------------------
# isomorphism and canonical forms


def _canonical_from(G: ChordalRibbonGraph, start: str, with_chordal: bool) -> tuple:
    """Deterministic traversal encoding from one starting half-edge."""
    g = G.graph
    idx = {start: 0}
    queue = [start]
    code = []
    k = 0
    while k < len(queue):
        h = queue[k]
        k += 1
        v = g.attach[h]
        order = g.cyclic[v]
        i = order.index(h)
        rot = [order[(i + t) % len(order)] for t in range(len(order))]
        local = []
        for x in rot:
            if x not in idx:
                idx[x] = len(idx)
                queue.append(x)
            p = g.partner(x)
            if p not in idx:
                idx[p] = len(idx)
                queue.append(p)
            flags = 0
            if with_chordal:
                e = g.edge_of(x)
                flags = (2 if e in G.zero_edges else 0) | (1 if x in G.forward else 0)
            local.append((idx[x], idx[p], flags))
        code.append(tuple(local))
    if len(idx) != len(g.half_edges):
        code.append(("disconnected", len(idx)))
    return tuple(code)


def canonical_form(G: ChordalRibbonGraph, with_chordal: bool = True) -> tuple:
    return min(_canonical_from(G, h, with_chordal) for h in sorted(G.graph.half_edges))


def chordal_isomorphic(G1: ChordalRibbonGraph, G2: ChordalRibbonGraph) -> bool:
    return canonical_form(G1, True) == canonical_form(G2, True)


def ribbon_isomorphic(G1: ChordalRibbonGraph, G2: ChordalRibbonGraph) -> bool:
    """Isomorphism of underlying ribbon graphs, forgetting the chordal data."""
    return canonical_form(G1, False) == canonical_form(G2, False)


# ---------------------------------------------------------------------------
# serialization


def graph_to_json(G: ChordalRibbonGraph) -> dict:
    g = G.graph
    pairs = sorted({tuple(sorted((h, g.partner(h)))) for h in g.half_edges if not g.is_open(h)})
    return {
        "vertices": sorted(g.vertices),
        "half_edges": sorted(g.half_edges),
        "pairing": [list(p) for p in pairs],
        "open_ends": sorted(g.open_ends()),
        "cyclic": {v: list(g.cyclic[v]) for v in sorted(g.vertices)},
        "zero_section": sorted([list(e) for e in G.zero_edges]),
        "orientations": {"forward": sorted(G.forward)},
    }


def graph_from_json(data: dict) -> ChordalRibbonGraph:
    vertices = tuple(data["vertices"])
    half_edges = tuple(data["half_edges"])
    pairing = {h: h for h in half_edges}
    for h1, h2 in data.get("pairing", []):
        pairing[h1], pairing[h2] = h2, h1
    cyclic = {v: tuple(hs) for v, hs in data["cyclic"].items()}
    attach = {}
    for v, hs in cyclic.items():
        for h in hs:
            attach[h] = v
    g = RibbonGraph(vertices, half_edges, pairing, attach, cyclic)
    zero = frozenset(tuple(sorted(e)) for e in data.get("zero_section", []))
    fwd = frozenset(data.get("orientations", {}).get("forward", []))
    return ChordalRibbonGraph(g, zero, fwd)


def to_dot(G: ChordalRibbonGraph) -> str:
    """Deterministic DOT output; zero-section edges are drawn bold and
    cyclic orders appear as vertex comments."""
    g = G.graph
    lines = ["graph chordal {"]
    for v in sorted(g.vertices):
        order = " ".join(g.cyclic[v])
        lines.append(f'  "{v}" [shape=circle, comment="ccw: {order}"];')
    tips = []
    for e in sorted(g.edges()):
        attrs = []
        if e in G.zero_edges:
            attrs.append("style=bold")
        if len(e) == 2:
            h1, h2 = e
            attrs.append(f'taillabel="{h1}"')
            attrs.append(f'headlabel="{h2}"')
            a = ", ".join(attrs)
            lines.append(f'  "{g.attach[h1]}" -- "{g.attach[h2]}" [{a}];')
        else:
            (h,) = e
            tip = f"tip_{h}"
            tips.append(f'  "{tip}" [shape=point];')
            attrs.append(f'taillabel="{h}"')
            a = ", ".join(attrs)
            lines.append(f'  "{g.attach[h]}" -- "{tip}" [{a}];')
    lines = lines[:1] + tips + lines[1:]
    lines.append("}")
    return "\n".join(lines) + "\n"
