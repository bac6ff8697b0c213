"""
Distance queries and structural operations on weighted trees and representations.

All traversals are iterative; trees built by the reconstruction pipeline can be
deep paths with O(n^2) vertices.
"""

import hashlib
import logging
import math
from collections import deque
from typing import Iterable

from subtree_distance.exceptions import EmptySet, OffsetOutOfRange, UnknownVertex
from subtree_distance.schemas.matrix import Tolerance
from subtree_distance.schemas.tree import (
    EdgeDocument,
    PathCoordinates,
    Representation,
    RepresentationDocument,
    WeightedTree,
)

logger = logging.getLogger(__name__)


def tree_distance(t: WeightedTree, u: int, v: int) -> float:
    """Length of the unique u-v path"""
    t.require(u)
    t.require(v)
    if u == v:
        return 0.0
    dist = {u: 0.0}
    stack = [u]
    while stack:
        x = stack.pop()
        for y, w in t.neighbors(x).items():
            if y not in dist:
                dist[y] = dist[x] + w
                if y == v:
                    return dist[y]
                stack.append(y)
    raise UnknownVertex(f"Vertex {v} is not reachable from {u}", {"vertex": v})


def multi_source_distances(t: WeightedTree, sources: Iterable[int]) -> dict[int, float]:
    """
    Distance from every vertex to the nearest source.

    Two linear passes over a rooting of the tree: the upward pass computes the
    nearest source inside each subtree, the downward pass folds in the parent.
    """
    sources = set(sources)
    if not sources:
        raise EmptySet("Source set is empty")
    for s in sources:
        t.require(s)

    coords = path_coordinates(t, min(sources))
    parent = coords.parent
    weight = coords.parent_weight

    best = {v: (0.0 if v in sources else math.inf) for v in coords.order}
    for v in reversed(coords.order):
        p = parent[v]
        if p is not None and best[v] + weight[v] < best[p]:
            best[p] = best[v] + weight[v]
    for v in coords.order:
        p = parent[v]
        if p is not None and best[p] + weight[v] < best[v]:
            best[v] = best[p] + weight[v]
    return best


def set_distance(t: WeightedTree, us: Iterable[int], ws: Iterable[int]) -> float:
    """min over u in U, w in W of tree_distance(u, w)"""
    ws = set(ws)
    if not ws:
        raise EmptySet("Target set is empty")
    dist = multi_source_distances(t, us)
    for w in ws:
        t.require(w)
    return min(dist[w] for w in ws)


def path_coordinates(t: WeightedTree, root: int) -> PathCoordinates:
    """Root the tree: depth, parent, parent-edge weight and preorder of every vertex"""
    t.require(root)
    depth = {root: 0.0}
    parent: dict[int, int | None] = {root: None}
    parent_weight = {root: 0.0}
    order = []
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for v, w in sorted(t.neighbors(u).items(), reverse=True):
            if v not in depth:
                depth[v] = depth[u] + w
                parent[v] = u
                parent_weight[v] = w
                stack.append(v)
    return PathCoordinates.model_construct(
        root=root, depth=depth, parent=parent, parent_weight=parent_weight, order=order
    )


def induces_connected(t: WeightedTree, vertices: Iterable[int]) -> bool:
    """True iff the vertex set is nonempty and induces a connected subgraph"""
    return t.induces_connected(set(vertices))


def snap_offsets(offsets: Iterable[float], weight: float, tau: float) -> list[float]:
    """
    Sort offsets, drop those within tau of either endpoint and merge those
    within tau of the previously kept offset.
    """
    snapped: list[float] = []
    for offset in sorted(offsets):
        if offset <= tau or offset >= weight - tau:
            continue
        if snapped and offset - snapped[-1] <= tau:
            continue
        snapped.append(offset)
    return snapped


def subdivide_edge(
    t: WeightedTree,
    edge: tuple[int, int],
    offsets: list[float],
    *,
    in_place: bool = False,
) -> tuple[WeightedTree, dict[float, int]]:
    """
    Replace edge (u, v) by a path through new vertices at the given offsets from u.

    Args:
        t: Tree to subdivide (copied unless in_place)
        edge: (u, v); offsets are measured from u
        offsets: Strictly increasing values in (0, weight); snap them first with snap_offsets
        in_place: Mutate ``t`` instead of a copy; only for trees the caller owns

    Returns:
        The subdivided tree and offset -> new vertex id
    """
    u, v = edge
    weight = t.weight(u, v)
    previous = 0.0
    for offset in offsets:
        if not previous < offset < weight:
            raise OffsetOutOfRange(
                f"Offsets {offsets} must increase strictly inside (0, {weight})",
                {"edge": [u, v], "offset": offset},
            )
        previous = offset

    tree = t if in_place else t.copy()
    if not offsets:
        return tree, {}

    tree.remove_edge(u, v)
    created: dict[float, int] = {}
    last, last_offset = u, 0.0
    for offset in offsets:
        vertex = tree.add_vertex()
        tree.add_edge(last, vertex, offset - last_offset)
        created[offset] = vertex
        last, last_offset = vertex, offset
    tree.add_edge(last, v, weight - last_offset)
    return tree, created


def smooth(t: WeightedTree, keep: Iterable[int], tol: Tolerance | None = None) -> tuple[WeightedTree, dict[int, int]]:
    """
    Reduce a tree to its kept vertices.

    Contracts edges of weight <= tau, deletes leaves outside ``keep`` and splices
    out degree-2 vertices outside ``keep``. A single vertex is never deleted.

    Returns:
        The smoothed tree and contracted vertex -> surviving vertex
    """
    tau = (tol or Tolerance.exact()).tau
    keep = set(keep)
    tree = t.copy()
    merged: dict[int, int] = {}

    short = [(u, v) for u, v, w in tree.edges() if w <= tau]
    for u, v in short:
        u = _resolve(merged, u)
        v = _resolve(merged, v)
        if u == v or v not in tree.neighbors(u):
            continue
        if (u in keep) != (v in keep):
            survivor, gone = (u, v) if u in keep else (v, u)
        else:
            survivor, gone = min(u, v), max(u, v)
        tree.remove_edge(survivor, gone)
        for x, w in list(tree.neighbors(gone).items()):
            tree.remove_edge(gone, x)
            tree.add_edge(survivor, x, w)
        tree.remove_vertex(gone)
        merged[gone] = survivor
        if gone in keep:
            keep.discard(gone)
            keep.add(survivor)

    queue = deque(tree.vertices)
    while queue:
        v = queue.popleft()
        if v not in tree or v in keep or len(tree) == 1:
            continue
        nbrs = tree.neighbors(v)
        if len(nbrs) == 1:
            (x,) = nbrs
            tree.remove_vertex(v)
            queue.append(x)
        elif len(nbrs) == 2:
            (x, wx), (y, wy) = nbrs.items()
            tree.remove_vertex(v)
            tree.add_edge(x, y, wx + wy)

    return tree, {gone: _resolve(merged, gone) for gone in merged}


def _resolve(merged: dict[int, int], v: int) -> int:
    while v in merged:
        v = merged[v]
    return v


def _centroids(t: WeightedTree) -> list[int]:
    n = len(t)
    coords = path_coordinates(t, min(t.vertices))
    size = {v: 1 for v in coords.order}
    for v in reversed(coords.order):
        p = coords.parent[v]
        if p is not None:
            size[p] += size[v]
    centroids = []
    for v in coords.order:
        heaviest = n - size[v]
        for x in t.neighbors(v):
            if coords.parent.get(x) == v:
                heaviest = max(heaviest, size[x])
        if heaviest <= n // 2:
            centroids.append(v)
    return centroids


def _quantize(weight: float, tau: float) -> str:
    if tau > 0:
        return str(round(weight / tau))
    return repr(float(weight))


def _rooted_form(t: WeightedTree, root: int, annotations: dict[int, tuple[str, ...]], tau: float) -> str:
    coords = path_coordinates(t, root)
    forms: dict[int, str] = {}
    for v in reversed(coords.order):
        children = sorted(
            f"{_quantize(w, tau)}:{forms[x]}" for x, w in t.neighbors(v).items() if coords.parent.get(x) == v
        )
        payload = repr(annotations[v]) + "(" + ",".join(children) + ")"
        forms[v] = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    return forms[root]


def canonical_hash(rep: Representation, tol: Tolerance | None = None) -> str:
    """
    Fingerprint of a representation up to vertex relabeling.

    Vertices are annotated with the labels whose image contains them and edge
    weights are quantized to multiples of tau; the tree is hashed bottom-up from
    each centroid and the smallest digest wins. An unbound tolerance takes its
    scale from the total edge weight of the tree.
    """
    tol = tol or Tolerance()
    if tol.scale == 0:
        tol = tol.with_scale(sum(w for _, _, w in rep.tree.edges()))
    tau = tol.tau

    annotations = rep.annotations()
    forms = [_rooted_form(rep.tree, c, annotations, tau) for c in _centroids(rep.tree)]
    return min(forms)


def to_document(rep: Representation) -> RepresentationDocument:
    return RepresentationDocument(
        vertices=rep.tree.vertices,
        edges=[EdgeDocument(u=u, v=v, w=w) for u, v, w in rep.tree.edges()],
        phi={label: sorted(rep.phi[label]) for label in rep.labels},
    )


def from_document(doc: RepresentationDocument) -> Representation:
    tree = WeightedTree.from_edges(doc.vertices, [(e.u, e.v, e.w) for e in doc.edges])
    return Representation(tree=tree, phi={label: frozenset(ids) for label, ids in doc.phi.items()})


def dumps_representation(rep: Representation, indent: int | None = 2) -> str:
    return to_document(rep).model_dump_json(indent=indent)


def loads_representation(text: str) -> Representation:
    return from_document(RepresentationDocument.model_validate_json(text))


def to_dot(rep: Representation) -> str:
    """Graphviz rendering: vertices list their objects, edges show weights"""
    annotations = rep.annotations()
    lines = ["graph representation {"]
    for v in rep.tree.vertices:
        label = ",".join(annotations[v]).replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  {v} [label="{label}"];')
    for u, v, w in rep.tree.edges():
        lines.append(f'  {u} -- {v} [label="{w:.6g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
