"""
Checks on a finished representation: distance equations against a matrix and
minimality (positive edges, covered leaves, no redundant degree-2 vertices).
"""

import logging

from subtree_distance.exceptions import MissingObject
from subtree_distance.schemas.diagnostics import Defect, Mismatch
from subtree_distance.schemas.matrix import DissimilarityMatrix, Tolerance
from subtree_distance.schemas.tree import Representation
from subtree_distance.services.wtree import multi_source_distances

logger = logging.getLogger(__name__)


def verify_distances(rep: Representation, d: DissimilarityMatrix, tol: Tolerance | None = None) -> list[Mismatch]:
    """
    Every ordered pair (x, y) with |d_T(phi(x), phi(y)) - d(x, y)| > tau.

    One linear multi-source pass per object, so O(n |V|) overall.

    Returns:
        list[Mismatch]: empty iff rep represents d
    """
    tau = (tol or Tolerance().bind(d)).tau
    missing = [label for label in d.labels if label not in rep.phi]
    if missing:
        raise MissingObject(f"Representation has no image for {missing[0]}", {"objects": missing})

    mismatches: list[Mismatch] = []
    for i, x in enumerate(d.labels):
        dist = multi_source_distances(rep.tree, rep.phi[x])
        row = d.values[i]
        for j, y in enumerate(d.labels):
            actual = min(dist[v] for v in rep.phi[y])
            if abs(actual - row[j]) > tau:
                mismatches.append(Mismatch(x=x, y=y, expected=float(row[j]), actual=actual))
    if mismatches:
        logger.info(f"Distance verification found {len(mismatches)} mismatches")
    return mismatches


def boundary_vertices(rep: Representation) -> set[int]:
    """Vertices of some image that have a neighbor outside that image"""
    tree = rep.tree
    boundary: set[int] = set()
    for image in rep.phi.values():
        for v in image:
            if v not in boundary and any(u not in image for u in tree.neighbors(v)):
                boundary.add(v)
    return boundary


def singleton_images(rep: Representation) -> set[int]:
    return {next(iter(image)) for image in rep.phi.values() if len(image) == 1}


def audit_minimality(rep: Representation, tol: Tolerance | None = None) -> list[Defect]:
    """
    Defects that make a representation non-minimal:
    edges of weight <= tau, leaves that are nobody's singleton image, and vertices
    of degree <= 2 that are neither a singleton image nor a boundary vertex.
    """
    tau = (tol or Tolerance()).tau
    tree = rep.tree
    singletons = singleton_images(rep)
    boundary = boundary_vertices(rep)

    defects: list[Defect] = []
    for u, v, w in tree.edges():
        if w <= tau:
            defects.append(Defect(kind="nonpositive_edge", edge=(u, v), weight=w))
    for v in tree.vertices:
        degree = tree.degree(v)
        if degree == 1 and v not in singletons:
            defects.append(Defect(kind="uncovered_leaf", vertex=v))
        if 1 <= degree <= 2 and v not in singletons and v not in boundary:
            defects.append(Defect(kind="redundant_vertex", vertex=v))
    return defects
