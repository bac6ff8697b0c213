"""
Random subtree distance instances for property testing.

A random tree is drawn from a random Pruefer sequence, objects are mapped to
random connected vertex sets, and the induced matrix is computed with one
multi-source pass per object. Everything is deterministic per seed.
"""

import heapq
import logging
import math

import numpy as np

from subtree_distance.exceptions import InfeasibleParameters, SizeOutOfRange, ValidationError
from subtree_distance.schemas.instance import WeightRange
from subtree_distance.schemas.matrix import DissimilarityMatrix
from subtree_distance.schemas.tree import Representation, WeightedTree
from subtree_distance.services.dissim import deduplicate
from subtree_distance.services.wtree import multi_source_distances

logger = logging.getLogger(__name__)

Seed = int | np.random.Generator
MAX_RESAMPLES = 100


def _draw_weights(rng: np.random.Generator, count: int, weights: WeightRange) -> list[float]:
    if weights.integer:
        return [float(w) for w in rng.integers(int(weights.lo), int(weights.hi) + 1, size=count)]
    return [float(w) for w in rng.uniform(weights.lo, weights.hi, size=count)]


def prufer_edges(sequence: list[int], v_count: int) -> list[tuple[int, int]]:
    """Decode a Pruefer sequence of length v_count - 2 into tree edges"""
    degree = [1] * v_count
    for v in sequence:
        degree[v] += 1
    leaves = [v for v in range(v_count) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in sequence:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, w))
    return edges


def random_tree(seed: Seed, v_count: int, weights: WeightRange | None = None) -> WeightedTree:
    """
    Uniformly random labelled tree with random edge weights.

    Args:
        seed: int seed or numpy Generator
        v_count: number of vertices (>= 1)
        weights: edge weight distribution

    Returns:
        WeightedTree with vertices 0..v_count-1
    """
    if v_count < 1:
        raise SizeOutOfRange(f"Tree needs at least one vertex, got {v_count}")
    weights = weights or WeightRange()
    rng = np.random.default_rng(seed)
    tree = WeightedTree()
    for v in range(v_count):
        tree.add_vertex(v)
    if v_count == 2:
        edges = [(0, 1)]
    elif v_count >= 3:
        edges = prufer_edges([int(v) for v in rng.integers(0, v_count, size=v_count - 2)], v_count)
    else:
        edges = []
    for (u, v), w in zip(edges, _draw_weights(rng, len(edges), weights)):
        tree.add_edge(u, v, w)
    return tree


def random_connected_subtree(seed: Seed, t: WeightedTree, size: int) -> frozenset[int]:
    """Connected vertex set grown by random frontier expansion from a random start"""
    if not 1 <= size <= len(t):
        raise SizeOutOfRange(f"Subtree size {size} outside 1..{len(t)}")
    rng = np.random.default_rng(seed)
    vertices = t.vertices
    start = vertices[int(rng.integers(len(vertices)))]
    chosen = {start}
    frontier = sorted(t.neighbors(start))
    while len(chosen) < size:
        v = frontier.pop(int(rng.integers(len(frontier))))
        if v in chosen:
            continue
        chosen.add(v)
        frontier.extend(u for u in sorted(t.neighbors(v)) if u not in chosen)
    return frozenset(chosen)


def forward_distances(rep: Representation) -> DissimilarityMatrix:
    """The subtree distance induced by a representation, labels sorted"""
    labels = rep.labels
    n = len(labels)
    values = np.zeros((n, n))
    for i, x in enumerate(labels):
        dist = multi_source_distances(rep.tree, rep.phi[x])
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = min(dist[v] for v in rep.phi[labels[j]])
    return DissimilarityMatrix(labels=labels, values=values)


def max_leaves(v_count: int) -> int:
    return v_count - 1 if v_count >= 3 else v_count


def object_labels(n_objects: int) -> list[str]:
    width = len(str(max(n_objects - 1, 0)))
    return [f"o{k:0{width}d}" for k in range(n_objects)]


def _instance_rng(seed: Seed, attempt: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng([seed, attempt])


def generate_instance(
    seed: Seed,
    v_count: int,
    n_objects: int,
    singleton_fraction: float,
    weights: WeightRange | None = None,
) -> tuple[DissimilarityMatrix, Representation]:
    """
    Random subtree distance with its ground-truth representation.

    ceil(singleton_fraction * n_objects) objects sit on distinct leaves; the rest get
    random connected subtrees. Draws with too few leaves, or whose matrix
    deduplicates below two objects, are redrawn with the next sub-seed.

    Returns:
        (matrix, representation) with matrix == forward_distances(representation)
    """
    if n_objects < 1:
        raise InfeasibleParameters(f"Need at least one object, got {n_objects}")
    if not 0.0 <= singleton_fraction <= 1.0:
        raise InfeasibleParameters(f"singleton_fraction must lie in [0, 1], got {singleton_fraction}")
    labels = object_labels(n_objects)
    singleton_count = math.ceil(singleton_fraction * n_objects)
    if singleton_count > max_leaves(v_count):
        raise InfeasibleParameters(
            f"{singleton_count} singleton objects requested but a tree on {v_count} vertices has at most "
            f"{max_leaves(v_count)} leaves",
            {"singletons": singleton_count, "v_count": v_count},
        )

    for attempt in range(MAX_RESAMPLES):
        rng = _instance_rng(seed, attempt)
        tree = random_tree(rng, v_count, weights)
        leaves = tree.leaves() or tree.vertices
        if singleton_count > len(leaves):
            logger.debug(f"Attempt {attempt}: {len(leaves)} leaves for {singleton_count} singletons")
            continue
        chosen_leaves = rng.choice(len(leaves), size=singleton_count, replace=False)
        phi: dict[str, frozenset[int]] = {}
        for label, k in zip(labels, chosen_leaves):
            phi[label] = frozenset({leaves[int(k)]})
        max_size = max(1, v_count // 3)
        for label in labels[singleton_count:]:
            size = int(rng.integers(1, max_size + 1))
            phi[label] = random_connected_subtree(rng, tree, size)

        rep = Representation(tree=tree, phi=phi)
        d = forward_distances(rep)
        if n_objects < 2 or deduplicate(d).reduced.n >= 2:
            logger.debug(f"Generated instance: {v_count} vertices, {n_objects} objects, attempt {attempt}")
            return d, rep

    raise InfeasibleParameters(
        f"No instance with two distinguishable objects after {MAX_RESAMPLES} draws",
        {"v_count": v_count, "n_objects": n_objects},
    )


def perturb_entry(d: DissimilarityMatrix, x: str, y: str, delta: float) -> DissimilarityMatrix:
    """Add delta to d(x,y) and d(y,x)"""
    if x == y:
        raise ValidationError("Cannot perturb a diagonal entry", {"pair": [x, y]})
    values = d.values.copy()
    i, j = d.index[x], d.index[y]
    values[i, j] += delta
    values[j, i] = values[i, j]
    return DissimilarityMatrix(labels=d.labels, values=values)
