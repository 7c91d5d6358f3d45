"""Ordered Bratteli diagrams of refining tower sequences and the Vershik map

Level-n vertices are the principal columns of tower n plus one vertex for
its infinite level. A column of tower n+1 receives one edge per traversal
of a tower-n column and one edge per visit to the tower-n infinite level,
ordered by time along its fiber. The infinite vertices form a chain of
distinguished edges carrying the path of the fixed point.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import ClassVar, Dict, Iterator, Sequence

from jinja2 import Template
from loguru import logger

from src.errors import MalformedInput, MaximalPath, NotRefining
from src.towers.tower import StandardTower

ROOT = "root"


def column_vertex(level: int, column: int) -> str:
    return f"v{level}_{column}"


def infinite_vertex(level: int) -> str:
    return f"inf{level}"


@dataclass(frozen=True)
class Edge:
    id: int
    source: str
    range: str
    order: int
    distinguished: bool = False


@dataclass(frozen=True)
class BratteliDiagram:
    """Graded, ordered diagram; `levels[n]` lists the vertices at level n (0 is the root)"""

    levels: tuple[tuple[str, ...], ...]
    edges: tuple[Edge, ...]
    base_measures: Dict[str, Fraction] = field(default_factory=dict)
    masses: Dict[str, Fraction] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @cached_property
    def _incoming(self) -> dict[str, tuple[Edge, ...]]:
        table: dict[str, list[Edge]] = {}
        for e in self.edges:
            table.setdefault(e.range, []).append(e)
        return {v: tuple(sorted(es, key=lambda e: e.order)) for v, es in table.items()}

    def incoming(self, v: str) -> tuple[Edge, ...]:
        """Edges into v in their linear order"""
        return self._incoming.get(v, ())

    def level_of(self, v: str) -> int:
        for n, vertices in enumerate(self.levels):
            if v in vertices:
                return n
        raise MalformedInput(f"Unknown vertex {v}")

    @cached_property
    def path_counts(self) -> dict[str, int]:
        counts = {ROOT: 1}
        for vertices in self.levels[1:]:
            for v in vertices:
                counts[v] = sum(counts[e.source] for e in self.incoming(v))
        return counts

    @property
    def distinguished_path(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.distinguished)

    def to_json(self) -> dict:
        return {
            "levels": [list(vs) for vs in self.levels],
            "edges": [
                {"id": e.id, "source": e.source, "range": e.range, "order": e.order, "distinguished": e.distinguished}
                for e in self.edges
            ],
            "distinguished_path": [e.id for e in self.distinguished_path],
        }


def _traversals(finer: StandardTower, coarser: StandardTower, column: int) -> list[tuple[str, int | None]]:
    """Visits of one finer column's fiber: ("col", c) per traversal, ("inf", None) per infinite step"""
    col = finer.columns[column]
    visits: list[tuple[str, int | None]] = []
    expected: tuple[int, int] | None = None
    for li, level in enumerate(col.level_sets):
        parts = coarser.level_map.split(level)
        if len(parts) != 1:
            raise NotRefining(f"Level {li} of column {column} straddles coarser levels", column=column, level=li)
        (label,) = parts
        if expected is not None:
            if label != expected:
                raise NotRefining(f"Column {column} leaves a coarser column mid-traversal", column=column, level=li)
        elif label is None:
            visits.append(("inf", None))
            continue
        elif label[1] != 0:
            raise NotRefining(f"Column {column} enters coarser column {label[0]} above its base", column=column)
        else:
            visits.append(("col", label[0]))
        c, l = label
        expected = (c, l + 1) if l + 1 < coarser.columns[c].height else None
    if expected is not None:
        raise NotRefining(f"Column {column} ends inside a coarser traversal", column=column)
    return visits


def export_bratteli(towers: Sequence[StandardTower]) -> BratteliDiagram:
    """Diagram of a refining sequence of towers, coarsest first"""
    if not towers:
        raise MalformedInput("Need at least one tower")
    levels: list[tuple[str, ...]] = [(ROOT,)]
    edges: list[Edge] = []
    base_measures: dict[str, Fraction] = {}
    masses: dict[str, Fraction] = {}

    def add(source: str, target: str, order: int, distinguished: bool = False) -> None:
        edges.append(Edge(len(edges), source, target, order, distinguished))

    for n, tower in enumerate(towers, start=1):
        vertices = tuple(column_vertex(n, c) for c in range(len(tower.columns))) + (infinite_vertex(n),)
        levels.append(vertices)
        for c, col in enumerate(tower.columns):
            v = column_vertex(n, c)
            base_measures[v], masses[v] = col.base_measure, col.mass
            if n == 1:
                for k in range(col.height):
                    add(ROOT, v, k)
                continue
            for order, (kind, source) in enumerate(_traversals(tower, towers[n - 2], c)):
                add(column_vertex(n - 1, source) if kind == "col" else infinite_vertex(n - 1), v, order)
        if n == 1:
            add(ROOT, infinite_vertex(1), 0, distinguished=True)
        else:
            add(infinite_vertex(n - 1), infinite_vertex(n), 0, distinguished=True)
    diagram = BratteliDiagram(tuple(levels), tuple(edges), base_measures, masses)
    logger.info(f"Exported Bratteli diagram: {diagram.depth} levels, {len(edges)} edges")
    return diagram


Path = tuple[int, ...]


def _edge(d: BratteliDiagram, edge_id: int) -> Edge:
    return d.edges[edge_id]


def minimal_path(d: BratteliDiagram, v: str) -> Path:
    """Path from the root to v taking the minimal incoming edge at every level"""
    path: list[int] = []
    while v != ROOT:
        incoming = d.incoming(v)
        if not incoming:
            raise MalformedInput(f"Vertex {v} has no incoming edge")
        path.append(incoming[0].id)
        v = incoming[0].source
    return tuple(reversed(path))


def maximal_path(d: BratteliDiagram, v: str) -> Path:
    path: list[int] = []
    while v != ROOT:
        last = d.incoming(v)[-1]
        path.append(last.id)
        v = last.source
    return tuple(reversed(path))


def enumerate_paths(d: BratteliDiagram, v: str) -> Iterator[Path]:
    """All root-to-v paths in increasing Vershik order"""
    if v == ROOT:
        yield ()
        return
    for e in d.incoming(v):
        for prefix in enumerate_paths(d, e.source):
            yield prefix + (e.id,)


def _check_path(d: BratteliDiagram, path: Path) -> None:
    if not path:
        raise MalformedInput("Empty path")
    previous = ROOT
    for edge_id in path:
        e = _edge(d, edge_id)
        if e.source != previous:
            raise MalformedInput(f"Edge {edge_id} does not continue the path")
        previous = e.range


def vershik_step(d: BratteliDiagram, path: Path) -> Path:
    """Successor: bump the first non-maximal edge, minimal edges before it"""
    _check_path(d, path)
    for k, edge_id in enumerate(path):
        e = _edge(d, edge_id)
        siblings = d.incoming(e.range)
        pos = siblings.index(e)
        if pos + 1 < len(siblings):
            nxt = siblings[pos + 1]
            return minimal_path(d, nxt.source) + (nxt.id,) + path[k + 1 :]
    raise MaximalPath("Path is maximal at the stored depth", length=len(path))


def path_level_index(d: BratteliDiagram, path: Path) -> int:
    """Rank of the path among the paths into its last vertex; the tower level it encodes"""
    _check_path(d, path)
    counts = d.path_counts
    rank = 0
    for edge_id in path:
        e = _edge(d, edge_id)
        for sibling in d.incoming(e.range):
            if sibling.order >= e.order:
                break
            rank += counts[sibling.source]
    return rank


@dataclass(frozen=True)
class PathCountAudit:
    vertices_checked: int
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def audit_path_counts(d: BratteliDiagram) -> PathCountAudit:
    """paths(v) × base measure = column mass at every principal vertex"""
    counts = d.path_counts
    failures = tuple(v for v, base in d.base_measures.items() if counts[v] * base != d.masses[v])
    return PathCountAudit(len(d.base_measures), failures)


def audit_successor_bijection(d: BratteliDiagram, level: int) -> bool:
    """The successor maps non-maximal paths at `level` one-to-one onto non-minimal ones"""
    paths = [p for v in d.levels[level] if not v.startswith("inf") for p in enumerate_paths(d, v)]
    targets = {v: minimal_path(d, v) for v in d.levels[level]}
    non_max = [p for p in paths if p != maximal_path(d, _edge(d, p[-1]).range)]
    images = []
    for p in non_max:
        try:
            images.append(vershik_step(d, p))
        except MaximalPath:
            return False
    minimal = set(targets.values())
    return len(set(images)) == len(images) and not minimal.intersection(images)


class DiagramRenderer:
    """Text renderings of a diagram via jinja2 templates"""

    TEMPLATES: ClassVar[Dict[str, str]] = {
        "dot": """digraph bratteli {
  rankdir=TB;
  node [shape=circle, fontsize=10];
{% for level in levels %}  { rank=same;{% for v in level %} "{{ v }}";{% endfor %} }
{% endfor %}{% for e in edges %}  "{{ e.source }}" -> "{{ e.range }}" [label="{{ e.order }}"{% if e.distinguished %}, style=bold, color=red{% endif %}];
{% endfor %}}
""",
        "text": """Bratteli diagram: {{ levels | length - 1 }} levels, {{ edges | length }} edges
{% for level in levels %}level {{ loop.index0 }}: {{ level | join(", ") }}
{% endfor %}distinguished path: {{ distinguished | join(" -> ") }}
""",
    }

    def render(self, d: BratteliDiagram, template_name: str = "dot") -> str:
        if template_name not in self.TEMPLATES:
            raise MalformedInput(f"Template '{template_name}' not found")
        template = Template(self.TEMPLATES[template_name])
        return template.render(
            levels=d.levels,
            edges=d.edges,
            distinguished=[e.range for e in d.distinguished_path],
        )
