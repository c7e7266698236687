"""Skeleton topology: joint tables, rooted tree, and the DFS joint order.

The canonical topologies ship as versioned data files under ``tssi/data``:
one record per joint holding index, name, part, parent index and mirror
index. A topology can also be loaded from a user-supplied file of the same
format.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import CycleDetected, Disconnected, InvalidMirrorTable, ParseError

PARTS = ("body", "face", "left_hand", "right_hand")
VARIANTS = ("standard68", "lsm67")

_FORMAT_NAME = "tssi-topology"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class JointDescriptor:
    """One joint of the canonical table."""

    id: int
    name: str
    part: str
    mirror_of: int


@dataclass(frozen=True)
class SkeletonGraph:
    """Base skeleton connectivity.

    ``edges`` are ordered (parent, child) pairs; the order fixes the child
    visit order of the traversal. Valid graphs are trees, but the type
    itself admits broken inputs so that :func:`validate_graph` can report
    on them.
    """

    joints: tuple[JointDescriptor, ...]
    edges: tuple[tuple[int, int], ...]
    root: int
    variant: str = "custom"

    def neighbors(self) -> dict[int, list[int]]:
        """Undirected adjacency, neighbors in edge order."""
        adj: dict[int, list[int]] = {j.id: [] for j in self.joints}
        for a, b in self.edges:
            if a in adj:
                adj[a].append(b)
            if b in adj:
                adj[b].append(a)
        return adj

    def mirror_map(self) -> dict[int, int]:
        return {j.id: j.mirror_of for j in self.joints}

    def part_ids(self, part: str) -> list[int]:
        """Joint ids belonging to ``part``, in canonical index order."""
        return [j.id for j in self.joints if j.part == part]


@dataclass(frozen=True)
class JointOrder:
    """DFS Euler path over the tree; fixes the TSSI column layout.

    ``joints`` carries the canonical table of the source graph so that
    downstream consumers can resolve each path entry to a data location.
    """

    path: tuple[int, ...]
    joints: tuple[JointDescriptor, ...]

    @property
    def width(self) -> int:
        return len(self.path)


@dataclass(frozen=True)
class MirrorTable:
    """Left/right relabeling derived from a graph's mirror map.

    Row permutations are expressed per frame block: entry ``r`` of
    ``face_rows`` is the face row whose joint mirrors the joint at face
    row ``r``. Hand rows map between the two hand blocks.
    """

    joint_map: dict[int, int]
    face_rows: tuple[int, ...]
    hand_rows: tuple[int, ...]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


def load_topology(source: str | Path, variant: str = "custom") -> SkeletonGraph:
    """Parse a topology data file into a :class:`SkeletonGraph`."""
    text = Path(source).read_text()
    return parse_topology(text, variant=variant)


def parse_topology(text: str, variant: str = "custom") -> SkeletonGraph:
    records: list[tuple[int, str, str, int, int]] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            fields = line.split()
            if len(fields) < 2 or fields[0] != _FORMAT_NAME:
                raise ParseError("expected 'tssi-topology <version> [variant]' header", lineno)
            if fields[1] != str(_FORMAT_VERSION):
                raise ParseError(f"unsupported topology format version {fields[1]}", lineno)
            if len(fields) >= 3:
                variant = fields[2]
            header_seen = True
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ParseError(f"expected 5 fields, got {len(fields)}", lineno)
        try:
            idx, parent, mirror = int(fields[0]), int(fields[3]), int(fields[4])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        name, part = fields[1], fields[2]
        if part not in PARTS:
            raise ParseError(f"unknown part {part!r}", lineno)
        records.append((idx, name, part, parent, mirror))
    if not header_seen:
        raise ParseError("empty topology file")
    if not records:
        raise ParseError("topology file declares no joints")

    records.sort(key=lambda r: r[0])
    if [r[0] for r in records] != list(range(len(records))):
        raise ParseError("joint indices must be dense 0..N-1")

    joints = tuple(JointDescriptor(idx, name, part, mirror) for idx, name, part, _, mirror in records)
    # A parentless joint contributes no edge; the first one is the root.
    # Extra parentless joints make the graph disconnected, which is a
    # validate_graph diagnostic rather than a parse failure.
    roots = [idx for idx, _, _, parent, _ in records if parent < 0]
    root = roots[0] if roots else 0
    edges = tuple((parent, idx) for idx, _, _, parent, _ in records if parent >= 0)
    return SkeletonGraph(joints=joints, edges=edges, root=root, variant=variant)


def build_default_graph(variant: str = "standard68") -> SkeletonGraph:
    """Load one of the canonical topologies shipped with the package."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown topology variant {variant!r}; choose from {VARIANTS}")
    text = resources.files("tssi.data").joinpath(f"{variant}.topo").read_text()
    return parse_topology(text, variant=variant)


def euler_traversal(graph: SkeletonGraph) -> JointOrder:
    """Depth-first Euler tour of the tree from its root.

    A joint is appended when first entered and again every time the
    traversal backtracks into it, giving 2N-1 entries for N joints.
    Children are visited in the graph's edge order.
    """
    ids = {j.id for j in graph.joints}
    if graph.root not in ids:
        raise Disconnected(f"root {graph.root} is not a joint of the graph")
    for a, b in graph.edges:
        if a not in ids or b not in ids:
            raise Disconnected(f"edge ({a}, {b}) references an unknown joint")

    adj = graph.neighbors()
    path = [graph.root]
    visited = {graph.root}
    # Iterative DFS; each stack frame tracks whether the single edge back to
    # the parent has been skipped yet, so duplicate edges surface as cycles.
    stack: list[list] = [[graph.root, -1, iter(adj[graph.root]), False]]
    while stack:
        frame = stack[-1]
        node, parent, it, parent_skipped = frame
        advanced = False
        for nxt in it:
            if nxt == parent and not frame[3]:
                frame[3] = True
                continue
            if nxt in visited:
                raise CycleDetected(f"edge into already-visited joint {nxt}")
            visited.add(nxt)
            path.append(nxt)
            stack.append([nxt, node, iter(adj[nxt]), False])
            advanced = True
            break
        if not advanced:
            stack.pop()
            if stack:
                path.append(stack[-1][0])
    if len(visited) != len(graph.joints):
        missing = sorted(ids - visited)
        raise Disconnected(f"{len(missing)} joints unreachable from root (first: {missing[:5]})")
    return JointOrder(path=tuple(path), joints=graph.joints)


def validate_graph(graph: SkeletonGraph) -> list[Diagnostic]:
    """Report every invariant violation; an empty list means the graph is valid."""
    out: list[Diagnostic] = []
    ids = {j.id for j in graph.joints}

    if graph.root not in ids:
        out.append(Diagnostic("unknown-root", f"root {graph.root} is not a joint"))

    seen_pairs: set[tuple[int, int]] = set()
    for a, b in graph.edges:
        if a not in ids or b not in ids:
            out.append(Diagnostic("unknown-joint", f"edge ({a}, {b}) references an unknown joint"))
            continue
        if a == b:
            out.append(Diagnostic("cycle", f"self-loop on joint {a}"))
            continue
        pair = (min(a, b), max(a, b))
        if pair in seen_pairs:
            out.append(Diagnostic("duplicate-edge", f"edge ({a}, {b}) listed more than once"))
        seen_pairs.add(pair)

    degree = {i: 0 for i in ids}
    for a, b in graph.edges:
        if a in degree:
            degree[a] += 1
        if b in degree:
            degree[b] += 1
    if len(graph.joints) > 1:
        for i, d in sorted(degree.items()):
            if d == 0:
                out.append(Diagnostic("orphan-joint", f"joint {i} has no incident edge"))

    if graph.root in ids:
        adj = graph.neighbors()
        reached = {graph.root}
        queue = [graph.root]
        while queue:
            node = queue.pop()
            for nxt in adj[node]:
                if nxt in ids and nxt not in reached:
                    reached.add(nxt)
                    queue.append(nxt)
        if len(reached) != len(ids):
            out.append(
                Diagnostic(
                    "disconnected",
                    f"{len(ids) - len(reached)} of {len(ids)} joints unreachable from root",
                )
            )
        elif len(seen_pairs) >= len(ids) and len(ids) > 1:
            # Connected with |E| >= |V| implies at least one cycle.
            out.append(Diagnostic("cycle", "graph is connected but has too many edges"))

    for j in graph.joints:
        m = j.mirror_of
        if m not in ids:
            out.append(Diagnostic("mirror-out-of-range", f"joint {j.id} mirrors unknown joint {m}"))
        elif graph.joints[m].mirror_of != j.id:
            out.append(
                Diagnostic("mirror-not-involution", f"mirror({j.id}) = {m} but mirror({m}) != {j.id}")
            )
    return out


def build_mirror_table(graph: SkeletonGraph) -> MirrorTable:
    """Materialize the graph's mirror map as block-row permutations.

    Raises :class:`InvalidMirrorTable` when the map is not an involution or
    mirrors a joint into a part its frame layout cannot host.
    """
    ids = {j.id: j for j in graph.joints}
    joint_map = graph.mirror_map()
    for i, m in joint_map.items():
        if m not in ids or joint_map[m] != i:
            raise InvalidMirrorTable(f"mirror map is not an involution at joint {i}")

    face_ids = graph.part_ids("face")
    left_ids = graph.part_ids("left_hand")
    right_ids = graph.part_ids("right_hand")
    face_row = {jid: r for r, jid in enumerate(face_ids)}
    right_row = {jid: r for r, jid in enumerate(right_ids)}

    face_rows = []
    for jid in face_ids:
        m = joint_map[jid]
        if ids[m].part != "face":
            raise InvalidMirrorTable(f"face joint {jid} mirrors into part {ids[m].part!r}")
        face_rows.append(face_row[m])
    hand_rows = []
    for jid in left_ids:
        m = joint_map[jid]
        if ids[m].part != "right_hand":
            raise InvalidMirrorTable(f"left-hand joint {jid} mirrors into part {ids[m].part!r}")
        hand_rows.append(right_row[m])
    for jid in right_ids:
        m = joint_map[jid]
        if ids[m].part != "left_hand":
            raise InvalidMirrorTable(f"right-hand joint {jid} mirrors into part {ids[m].part!r}")
    if len(left_ids) != len(right_ids):
        raise InvalidMirrorTable("hand blocks differ in size")
    return MirrorTable(joint_map=joint_map, face_rows=tuple(face_rows), hand_rows=tuple(hand_rows))
