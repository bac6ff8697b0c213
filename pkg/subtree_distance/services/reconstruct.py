"""
Reconstruction of the minimal representation of a subtree distance.

Pipeline:
1. deduplicate objects with identical rows
2. identify the leaf objects L from the farthest pair (r, r')
3. build the minimal representation of d restricted to L (a tree metric)
4. place every non-leaf object z: its image meets the path phi(r) -> phi(x) in
   the interval of points at distance >= d(r,z) from phi(r) and >= d(x,z) from phi(x)
5. cut edges at the interval boundaries, assign images, smooth
6. verify the distance equations

Any stage failure becomes a rejecting RecognitionReport naming the stage.
"""

import bisect
import logging
import math
import time
from typing import Optional

import numpy as np

from subtree_distance.exceptions import (
    DegenerateInstance,
    Disconnected,
    EmptyImage,
    NotSubtreeDistance,
    SubtreeDistanceError,
)
from subtree_distance.schemas.matrix import DissimilarityMatrix, Tolerance
from subtree_distance.schemas.reconstruction import (
    EdgeCover,
    IntervalPlacement,
    LeafObjectSet,
    RecognitionReport,
)
from subtree_distance.schemas.tree import PathCoordinates, Representation, WeightedTree
from subtree_distance.services.dissim import deduplicate, restrict
from subtree_distance.services.treemetric import reconstruct_tree_metric
from subtree_distance.services.verify import (
    audit_minimality,
    boundary_vertices,
    singleton_images,
    verify_distances,
)
from subtree_distance.services.wtree import (
    induces_connected,
    path_coordinates,
    smooth,
    snap_offsets,
    subdivide_edge,
)

logger = logging.getLogger(__name__)

MAX_WITNESS_MISMATCHES = 10


def find_leaf_objects(d: DissimilarityMatrix, tol: Tolerance | None = None) -> LeafObjectSet:
    """
    Leaf objects of a deduplicated matrix.

    r is the first element of the lexicographically smallest farthest pair; x != r
    is a leaf object iff d(y,r) < d(x,y) + d(x,r) - tau for every y not in {x, r}.
    Both steps are O(n^2).
    """
    if d.n < 2:
        raise DegenerateInstance("Leaf objects need at least two objects", {"n": d.n})
    tau = (tol or Tolerance().bind(d)).tau

    by_label = d if list(d.labels) == sorted(d.labels) else restrict(d, sorted(d.labels))
    values = by_label.values
    flat = int(np.argmax(values))
    i, j = divmod(flat, by_label.n)
    if values[i, j] <= tau:
        raise DegenerateInstance("All distances are zero after deduplication", {"n": d.n})
    root, partner = by_label.labels[i], by_label.labels[j]

    r = by_label.index[root]
    to_root = values[:, r]
    # margin[x, y] = d(x,y) + d(x,r) - d(y,r)
    margin = values + to_root[:, None] - to_root[None, :]
    np.fill_diagonal(margin, math.inf)
    margin[:, r] = math.inf
    is_leaf = np.all(margin > tau, axis=1)
    is_leaf[r] = True
    members = tuple(label for label, leaf in zip(by_label.labels, is_leaf) if leaf)

    if partner not in members:
        raise NotSubtreeDistance(
            f"Farthest object {partner} from {root} fails the leaf test",
            {"root": root, "partner": partner},
        )
    logger.debug(f"Leaf objects: {len(members)} of {d.n}, root {root}")
    return LeafObjectSet(root=root, partner=partner, members=members)


def _root_label(rep_L: Representation, coords: PathCoordinates) -> str:
    for label, image in rep_L.phi.items():
        if image == {coords.root}:
            return label
    raise DegenerateInstance(f"No leaf object is mapped to root vertex {coords.root}")


def locate_nonleaf(
    rep_L: Representation,
    coords: PathCoordinates,
    d: DissimilarityMatrix,
    z: str,
    tol: Tolerance | None = None,
) -> list[IntervalPlacement]:
    """
    Intervals of z's image on every root-to-leaf path of the leaf-object tree.

    For leaf x != r the interval is [d(r,z), D - d(x,z)] with D the path length,
    empty when d(r,z) > D - d(x,z) + tau.
    """
    tau = (tol or Tolerance().bind(d)).tau
    root = _root_label(rep_L, coords)
    a = d.distance(root, z)
    row = d.row(z)

    placements: list[IntervalPlacement] = []
    for leaf in sorted(rep_L.phi):
        if leaf == root:
            continue
        (vertex,) = rep_L.phi[leaf]
        length = coords.depth[vertex]
        b = float(row[d.index[leaf]])
        end = length - b
        if a > end + tau:
            placements.append(IntervalPlacement.model_construct(object=z, leaf=leaf, a=a, b=b, D=length, start=None, end=None))
            continue
        start = min(max(a, 0.0), length)
        end = max(min(end, length), start)
        placements.append(IntervalPlacement.model_construct(object=z, leaf=leaf, a=a, b=b, D=length, start=start, end=end))
    return placements


def cover_edges(
    rep_L: Representation,
    coords: PathCoordinates,
    placements: list[IntervalPlacement],
    tol: Tolerance | None = None,
) -> list[EdgeCover]:
    """
    Union of an object's intervals, edge by edge.

    A point at depth t on the edge into vertex c lies on path(phi(r), phi(x)) iff
    x is below c, so it is covered iff t >= a and t <= reach(c), the largest
    interval end among leaves below c. One post-order pass computes reach.
    """
    tau = (tol or Tolerance()).tau
    if not placements:
        return []
    z, a = placements[0].object, placements[0].a

    reach: dict[int, float] = {}
    for p in placements:
        if not p.empty:
            (vertex,) = rep_L.phi[p.leaf]
            reach[vertex] = max(reach.get(vertex, -math.inf), p.end)
    for v in reversed(coords.order):
        parent = coords.parent[v]
        if parent is not None and v in reach and reach[v] > reach.get(parent, -math.inf):
            reach[parent] = reach[v]

    covers: list[EdgeCover] = []
    for v in coords.order:
        parent = coords.parent[v]
        if parent is None or v not in reach:
            continue
        lo = max(a, coords.depth[parent])
        hi = min(reach[v], coords.depth[v])
        if lo <= hi + tau:
            covers.append(EdgeCover.model_construct(object=z, parent=parent, child=v, lo=lo, hi=max(hi, lo)))
    return covers


def assemble_representation(
    rep_L: Representation,
    coords: PathCoordinates,
    placements: dict[str, list[IntervalPlacement]],
    aliases: dict[str, str],
    tol: Tolerance | None = None,
) -> Representation:
    """
    Cut the leaf-object tree at every interval boundary and assign images.

    Cut points are gathered per edge for all objects first, tau-merged, and each
    edge is subdivided once. Non-leaf images are the vertices inside their covered
    ranges (endpoints inclusive); aliases share their representative's image. A
    final smoothing pass keeps singleton images and boundary vertices only.

    Raises:
        EmptyImage: an object with every interval empty
        Disconnected: an object whose intervals do not form a connected subtree
    """
    tol = tol or Tolerance()
    tau = tol.tau
    depth = coords.depth

    covers: dict[str, list[EdgeCover]] = {}
    for z in sorted(placements):
        covers[z] = cover_edges(rep_L, coords, placements[z], tol)
        if not covers[z]:
            raise EmptyImage(f"Object {z} has an empty image", {"object": z})

    cuts: dict[int, list[float]] = {}
    for z_covers in covers.values():
        for cover in z_covers:
            top, bottom = depth[cover.parent], depth[cover.child]
            for t in (cover.lo, cover.hi):
                if top + tau < t < bottom - tau:
                    cuts.setdefault(cover.child, []).append(t)

    tree = rep_L.tree.copy()
    chains: dict[int, tuple[list[float], list[int]]] = {}
    for child in coords.order:
        parent = coords.parent[child]
        if parent is None:
            continue
        top = depth[parent]
        offsets = snap_offsets([t - top for t in cuts.get(child, [])], coords.parent_weight[child], tau)
        _, created = subdivide_edge(tree, (parent, child), offsets, in_place=True)
        chain_depths = [top, *(top + offset for offset in offsets), depth[child]]
        chain_vertices = [parent, *(created[offset] for offset in offsets), child]
        chains[child] = (chain_depths, chain_vertices)

    phi: dict[str, frozenset[int]] = {label: image for label, image in rep_L.phi.items()}
    for z, z_covers in covers.items():
        image: set[int] = set()
        for cover in z_covers:
            chain_depths, chain_vertices = chains[cover.child]
            lo = bisect.bisect_left(chain_depths, cover.lo - tau)
            hi = bisect.bisect_right(chain_depths, cover.hi + tau)
            image.update(chain_vertices[lo:hi])
        if not image:
            raise EmptyImage(f"Object {z} covers no vertex", {"object": z})
        if not induces_connected(tree, image):
            raise Disconnected(f"Image of object {z} is not connected", {"object": z})
        phi[z] = frozenset(image)

    # images were checked above
    staged = Representation.model_construct(tree=tree, phi=phi)
    keep = singleton_images(staged) | boundary_vertices(staged)
    smoothed, merged = smooth(tree, keep, tol)
    phi = {
        label: frozenset(merged.get(v, v) for v in image if merged.get(v, v) in smoothed)
        for label, image in phi.items()
    }
    for alias, representative in aliases.items():
        phi[alias] = phi[representative]

    rep = Representation(tree=smoothed, phi=phi)
    n = len(phi)
    if len(smoothed) > 4 * n * n:
        logger.warning(f"Representation has {len(smoothed)} vertices for {n} objects")
    return rep


def _single_vertex(labels: list[str]) -> Representation:
    tree = WeightedTree()
    vertex = tree.add_vertex()
    return Representation(tree=tree, phi={label: frozenset({vertex}) for label in labels})


class _PipelineRun:
    """One pass over the stages; remembers the current stage for reporting"""

    def __init__(self, d: DissimilarityMatrix, tol: Tolerance):
        self.d = d
        self.tol = tol
        self.stage = "deduplicate"
        self.leaf_objects: list[str] = []

    def assemble(self) -> Representation:
        d, tol = self.d, self.tol
        self.stage = "deduplicate"
        dedup = deduplicate(d, tol)
        reduced = dedup.reduced
        if reduced.n == 1:
            self.leaf_objects = list(reduced.labels)
            return _single_vertex(list(d.labels))

        self.stage = "find_leaf_objects"
        leaves = find_leaf_objects(reduced, tol)
        self.leaf_objects = sorted(leaves.members)

        self.stage = "reconstruct_tree_metric"
        order = [leaves.root, *(x for x in self.leaf_objects if x != leaves.root)]
        rep_L = reconstruct_tree_metric(restrict(reduced, order), tol)
        (root_vertex,) = rep_L.phi[leaves.root]
        coords = path_coordinates(rep_L.tree, root_vertex)

        self.stage = "locate_nonleaf"
        members = set(leaves.members)
        placements = {
            z: locate_nonleaf(rep_L, coords, reduced, z, tol)
            for z in reduced.labels if z not in members
        }

        self.stage = "assemble_representation"
        return assemble_representation(rep_L, coords, placements, dedup.aliases, tol)

    def verify(self, rep: Representation) -> None:
        self.stage = "verify_distances"
        mismatches = verify_distances(rep, self.d, self.tol)
        if mismatches:
            raise NotSubtreeDistance(
                f"{len(mismatches)} distance equations fail on the reconstructed tree",
                {
                    "count": len(mismatches),
                    "mismatches": [m.model_dump() for m in mismatches[:MAX_WITNESS_MISMATCHES]],
                },
            )
        defects = audit_minimality(rep, self.tol)
        if defects:
            logger.warning(f"Accepted representation has {len(defects)} minimality defects: {defects[0].render()}")


def build_representation(d: DissimilarityMatrix, tol: Tolerance | None = None) -> Representation:
    """
    Run dedup through assembly without checking the distance equations.

    The result is a candidate only: it represents d iff d is a subtree distance.
    Used for timing; recognition goes through reconstruct_subtree_distance.

    Raises:
        SubtreeDistanceError: any stage failure
    """
    return _PipelineRun(d, (tol or Tolerance()).bind(d)).assemble()


def reconstruct_subtree_distance(
    d: DissimilarityMatrix,
    tol: Tolerance | None = None,
) -> tuple[Optional[Representation], RecognitionReport]:
    """
    Minimal representation of d, or a rejecting report if d is not a subtree distance.

    An accepting report always means the output passed distance verification.

    Args:
        d: Input matrix
        tol: Tolerance; its scale is fixed from d once for the whole run

    Returns:
        (representation or None, RecognitionReport)
    """
    start_time = time.time()
    run = _PipelineRun(d, (tol or Tolerance()).bind(d))

    try:
        rep = run.assemble()
        run.verify(rep)
    except SubtreeDistanceError as e:
        logger.warning(f"Rejected at {run.stage}: {e}")
        return None, RecognitionReport(
            accepted=False,
            stage=run.stage,
            witness=e.witness or {"message": str(e)},
            n=d.n,
            leaf_objects=run.leaf_objects,
        )

    process_time = (time.time() - start_time) * 1000
    logger.info(f"Reconstruction of {d.n} objects processed in {process_time:.2f}ms ({len(rep.tree)} vertices)")
    return rep, RecognitionReport(accepted=True, n=d.n, leaf_objects=run.leaf_objects)
