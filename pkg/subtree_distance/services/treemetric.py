"""
Minimal representation of a tree metric by incremental leaf insertion.

The first label is the root leaf r. For a new object x and every placed leaf y,
the three-point split (d(r,x) + d(r,y) - d(x,y)) / 2 is the depth at which the
path r -> x leaves the path r -> y. The largest split over all placed leaves is
the depth of x's attachment point, which lies on the path from r to the
maximizing leaf; it is found by walking parent pointers up from that leaf. Each
insertion costs O(n), so the whole construction is O(n^2) on every tree shape.
"""

import logging
import time
from collections import defaultdict

import numpy as np

from subtree_distance.exceptions import NegativeLength, NotTreeMetric
from subtree_distance.schemas.matrix import DissimilarityMatrix, Tolerance
from subtree_distance.schemas.reconstruction import LeafAttachment
from subtree_distance.schemas.tree import Representation, WeightedTree

logger = logging.getLogger(__name__)


def attachment_point(
    d: DissimilarityMatrix, u: str, v: str, x: str, tol: Tolerance | None = None
) -> LeafAttachment:
    """
    Three-point formula for hanging x off the u-v path.

    split = (d(u,x) + d(u,v) - d(v,x)) / 2, pendant = (d(u,x) + d(v,x) - d(u,v)) / 2.
    Values within tau of 0 (or of d(u,v) for the split) are snapped.
    """
    tau = (tol or Tolerance().bind(d)).tau
    duv, dux, dvx = d.distance(u, v), d.distance(u, x), d.distance(v, x)
    split = (dux + duv - dvx) / 2.0
    pendant = (dux + dvx - duv) / 2.0
    if split < -tau or pendant < -tau or split > duv + tau:
        raise NegativeLength(
            f"Attachment of {x} to path {u}-{v} has split={split:g}, pendant={pendant:g}",
            {"u": u, "v": v, "x": x, "split": split, "pendant": pendant},
        )
    split = min(max(split, 0.0), duv)
    if split <= tau:
        split = 0.0
    elif split >= duv - tau:
        split = duv
    pendant = 0.0 if pendant <= tau else pendant
    return LeafAttachment(ref_u=u, ref_v=v, split=split, pendant=pendant)


class _RootedBuilder:
    """Growing tree rooted at the first leaf, with depths and parent pointers"""

    def __init__(self, root_label: str):
        self.tree = WeightedTree()
        root = self.tree.add_vertex()
        self.depth = {root: 0.0}
        self.parent: dict[int, int | None] = {root: None}
        self.vertex_of = {root_label: root}

    def hang(self, anchor: int, label: str, pendant: float) -> int:
        vertex = self.tree.add_vertex()
        self.tree.add_edge(anchor, vertex, pendant)
        self.depth[vertex] = self.depth[anchor] + pendant
        self.parent[vertex] = anchor
        self.vertex_of[label] = vertex
        return vertex

    def point_at_depth(self, leaf: int, target: float, tau: float) -> int:
        """Vertex at ``target`` depth on the root path of ``leaf``, subdividing if needed"""
        below, v = None, leaf
        while self.depth[v] > target + tau:
            below, v = v, self.parent[v]
        if self.depth[v] >= target - tau or below is None:
            return v
        weight = self.tree.remove_edge(v, below)
        offset = target - self.depth[v]
        middle = self.tree.add_vertex()
        self.tree.add_edge(v, middle, offset)
        self.tree.add_edge(middle, below, weight - offset)
        self.depth[middle] = target
        self.parent[middle] = v
        self.parent[below] = middle
        return middle


def reconstruct_tree_metric(d: DissimilarityMatrix, tol: Tolerance | None = None) -> Representation:
    """
    Build the unique minimal representation of a tree metric.

    Args:
        d: Tree metric; objects are inserted in label order, the first is the root leaf
        tol: Tolerance (bound to ``d`` if unbound)

    Returns:
        Representation: every object mapped to a singleton vertex

    Raises:
        NotTreeMetric: negative three-point lengths, a pendant edge of length <= tau,
            or output distances that disagree with d
    """
    start_time = time.time()
    tol = tol if tol is not None and tol.scale > 0 else (tol or Tolerance()).bind(d)
    tau = tol.tau
    labels = list(d.labels)
    values = d.values
    builder = _RootedBuilder(labels[0])

    if d.n >= 2:
        if values[0, 1] <= tau:
            raise NotTreeMetric(
                f"Objects {labels[0]} and {labels[1]} are at distance {values[0, 1]:g}",
                {"pair": [labels[0], labels[1]]},
            )
        builder.hang(builder.vertex_of[labels[0]], labels[1], float(values[0, 1]))

    placed = [1] if d.n >= 2 else []
    for i in range(2, d.n):
        label = labels[i]
        idx = np.array(placed)
        splits = (values[0, i] + values[0, idx] - values[i, idx]) / 2.0
        best = int(np.argmax(splits))
        partner = labels[idx[best]]
        try:
            attach = attachment_point(d, labels[0], partner, label, tol)
        except NegativeLength as e:
            raise NotTreeMetric(str(e), e.witness) from e
        if attach.pendant <= tau:
            raise NotTreeMetric(
                f"Object {label} lies on the tree spanned by earlier objects",
                {"object": label, "path": [labels[0], partner], "split": attach.split},
            )
        anchor = builder.point_at_depth(builder.vertex_of[partner], attach.split, tau)
        builder.hang(anchor, label, attach.pendant)
        placed.append(i)

    rep = Representation(
        tree=builder.tree,
        phi={label: frozenset({builder.vertex_of[label]}) for label in labels},
    )
    _check_distances(builder, labels, values, tau)

    process_time = (time.time() - start_time) * 1000
    logger.info(f"Tree metric on {d.n} objects reconstructed in {process_time:.2f}ms ({len(rep.tree)} vertices)")
    return rep


def _check_distances(builder: _RootedBuilder, labels: list[str], values: np.ndarray, tau: float) -> None:
    """
    Compare all pairwise tree distances with d in O(n^2).

    d_T(x, y) = depth(x) + depth(y) - 2 depth(meet(x, y)); meet depths are filled
    bottom-up by merging the object groups of each vertex's children.
    """
    n = len(labels)
    position = {builder.vertex_of[label]: i for i, label in enumerate(labels)}
    depth = builder.depth
    children: dict[int, list[int]] = defaultdict(list)
    for v, p in builder.parent.items():
        if p is not None:
            children[p].append(v)

    meet = np.zeros((n, n))
    below: dict[int, list[int]] = {}
    for v in sorted(depth, key=depth.__getitem__, reverse=True):
        group = [position[v]] if v in position else []
        for c in children.get(v, []):
            sub = below.pop(c)
            if group and sub:
                meet[np.ix_(group, sub)] = depth[v]
                meet[np.ix_(sub, group)] = depth[v]
            group.extend(sub)
        below[v] = group

    object_depth = np.array([depth[builder.vertex_of[label]] for label in labels])
    tree_d = object_depth[:, None] + object_depth[None, :] - 2.0 * meet
    np.fill_diagonal(tree_d, 0.0)
    wrong = np.abs(tree_d - values) > tau
    if wrong.any():
        i, j = np.argwhere(wrong)[0]
        raise NotTreeMetric(
            f"Reconstructed d({labels[i]},{labels[j]})={tree_d[i, j]:g} differs from {values[i, j]:g}",
            {"pair": [labels[i], labels[j]], "expected": float(values[i, j]), "actual": float(tree_d[i, j])},
        )
