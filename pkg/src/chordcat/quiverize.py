"""Compile fishbones (conic Lagrangians over a line or circle) into quivers.

A fishbone is a base 1-manifold with spoke feet at exact rational
positions, each foot carrying an upward and/or downward spoke.  The feet
cut the base into a partition of points and intervals; the partition cells
are the quiver nodes and every spoke contributes one arrow between
consecutive cells: upward spokes point left (against the base
orientation), downward spokes point right.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class FishboneError(ValueError):
    pass


@dataclass(frozen=True)
class Foot:
    pos: Fraction
    up: bool = False
    down: bool = False

    def __post_init__(self):
        if not (self.up or self.down):
            raise FishboneError(f"foot at {self.pos} has no spokes")


@dataclass(frozen=True)
class Fishbone:
    base: str                 # "line" | "circle"
    feet: tuple

    def __post_init__(self):
        if self.base not in ("line", "circle"):
            raise FishboneError(f"bad base {self.base!r}")
        pos = [f.pos for f in self.feet]
        if sorted(pos) != pos or len(set(pos)) != len(pos):
            raise FishboneError("feet must have strictly increasing positions")
        if self.base == "circle" and not self.feet:
            raise FishboneError("a circle fishbone needs at least one foot")

    def to_json(self) -> dict:
        return {
            "base": self.base,
            "feet": [
                {"pos": str(f.pos), "up": f.up, "down": f.down}
                for f in self.feet
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "Fishbone":
        feet = tuple(
            Foot(Fraction(str(f["pos"])), bool(f.get("up")), bool(f.get("down")))
            for f in data.get("feet", [])
        )
        return Fishbone(data["base"], feet)


@dataclass(frozen=True)
class PartitionCell:
    kind: str                  # "point" | "interval"
    # interval data; None endpoint = unbounded (line) only
    left: Fraction | None = None
    right: Fraction | None = None
    left_closed: bool = False
    right_closed: bool = False

    def describe(self) -> str:
        if self.kind == "point":
            return f"{{{self.left}}}"
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        l = "-inf" if self.left is None else str(self.left)
        r = "+inf" if self.right is None else str(self.right)
        return f"{lb}{l},{r}{rb}"


@dataclass(frozen=True)
class Arrow:
    source: int
    target: int
    direction: str             # "up" | "down"
    foot: int                  # index of the originating foot


@dataclass(frozen=True)
class LineQuiver:
    shape: str                 # "line" | "cycle"
    nodes: tuple               # PartitionCell
    arrows: tuple              # Arrow

    def to_json(self) -> dict:
        return {
            "shape": self.shape,
            "nodes": [c.describe() for c in self.nodes],
            "arrows": [
                {"source": a.source, "target": a.target,
                 "direction": a.direction, "spoke": a.foot}
                for a in self.arrows
            ],
        }

    def signature(self) -> tuple:
        """Structural identity: node count plus arrow pattern."""
        return (self.shape, len(self.nodes),
                tuple((a.source, a.target, a.direction) for a in self.arrows))


def partition(fb: Fishbone) -> list:
    """The base partition cut out by the spoke feet.

    A foot with both spokes is a point cell.  An interval's endpoint foot
    is included iff the foot carries an upward spoke only (left endpoint)
    or a downward spoke only (right endpoint).  Unbounded line cells follow
    the same rule; on the circle the rules wrap cyclically.
    """
    feet = fb.feet
    cells = []
    if fb.base == "line":
        if not feet:
            return [PartitionCell("interval")]
        first = feet[0]
        cells.append(PartitionCell("interval", None, first.pos,
                                   False, first.down and not first.up))
        for i, f in enumerate(feet):
            if f.up and f.down:
                cells.append(PartitionCell("point", f.pos, f.pos, True, True))
            if i + 1 < len(feet):
                g = feet[i + 1]
                cells.append(PartitionCell(
                    "interval", f.pos, g.pos,
                    f.up and not f.down, g.down and not g.up))
        last = feet[-1]
        cells.append(PartitionCell("interval", last.pos, None,
                                   last.up and not last.down, False))
        return cells
    # circle: arcs between cyclically consecutive feet, plus point cells
    n = len(feet)
    for i, f in enumerate(feet):
        if f.up and f.down:
            cells.append(PartitionCell("point", f.pos, f.pos, True, True))
        g = feet[(i + 1) % n]
        cells.append(PartitionCell(
            "interval", f.pos, g.pos,
            f.up and not f.down, g.down and not g.up))
    return cells


def quiver_of(fb: Fishbone) -> LineQuiver:
    """Nodes are partition cells; each spoke gives one arrow between the
    two cells whose closures meet at its foot: upward spokes produce
    left-pointing arrows and downward spokes right-pointing ones."""
    cells = partition(fb)
    n_feet = len(fb.feet)
    arrows = []
    # map each foot to the cells before/after it (and its point cell)
    before = {}
    after = {}
    point_at = {}
    if fb.base == "line":
        intervals = [i for i, c in enumerate(cells) if c.kind == "interval"]
        k = 0
        for j, f in enumerate(fb.feet):
            before[j] = intervals[k]
            if f.up and f.down:
                point_at[j] = intervals[k] + 1  # point cell follows in order
            after[j] = intervals[k + 1]
            k += 1
    else:
        # circle construction order: per foot j: [point_j?], arc_j (from foot j
        # to foot j+1); arc before foot j is arc_{j-1}
        arc_index = {}
        i = 0
        for j, f in enumerate(fb.feet):
            if f.up and f.down:
                point_at[j] = i
                i += 1
            arc_index[j] = i
            i += 1
        for j in range(n_feet):
            after[j] = arc_index[j]
            before[j] = arc_index[(j - 1) % n_feet]
    for j, f in enumerate(fb.feet):
        if f.up and f.down:
            p = point_at[j]
            arrows.append(Arrow(p, before[j], "up", j))
            arrows.append(Arrow(p, after[j], "down", j))
        elif f.up:
            arrows.append(Arrow(after[j], before[j], "up", j))
        else:
            arrows.append(Arrow(before[j], after[j], "down", j))
    shape = "line" if fb.base == "line" else "cycle"
    return LineQuiver(shape, tuple(cells), tuple(arrows))


def restriction_table(fb: Fishbone, rep, selector):
    """Restrict a quiver representation to a cell, a spoke, or a foot
    neighborhood.

    Selectors: ("cell", i) yields the node complex; ("spoke", foot, "up")
    yields the cone of the corresponding arrow; ("foot", j) yields the
    local diagram around the foot as (left value, maps, ...) descriptors.
    """
    from .homalg import cone

    q = quiver_of(fb)
    if rep.quiver.signature() != q.signature():
        raise FishboneError("representation does not match this fishbone")
    kind = selector[0]
    if kind == "cell":
        i = selector[1]
        if not (0 <= i < len(q.nodes)):
            raise FishboneError(f"no cell {i}")
        return rep.node_values[i]
    if kind == "spoke":
        _, foot, direction = selector
        for k, a in enumerate(q.arrows):
            if a.foot == foot and a.direction == direction:
                return cone(rep.arrow_maps[k])
        raise FishboneError(f"no {direction} spoke at foot {foot}")
    if kind == "foot":
        j = selector[1]
        local = []
        for k, a in enumerate(q.arrows):
            if a.foot == j:
                local.append({
                    "direction": a.direction,
                    "source": rep.node_values[a.source],
                    "target": rep.node_values[a.target],
                    "map": rep.arrow_maps[k],
                })
        if not local:
            raise FishboneError(f"no foot {j}")
        return local
    raise FishboneError(f"bad selector {selector!r}")


def wheel_fishbone(n_up: int, n_down: int) -> Fishbone:
    """The circle fishbone of a wheel: upward block then downward block at
    integer positions."""
    feet = []
    for i in range(n_up):
        feet.append(Foot(Fraction(i), up=True))
    for i in range(n_down):
        feet.append(Foot(Fraction(n_up + i), down=True))
    return Fishbone("circle", tuple(feet))
