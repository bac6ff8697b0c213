from typing import Iterator

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from subtree_distance.exceptions import UnknownVertex, ValidationError


class WeightedTree:
    """
    Undirected weighted tree over opaque integer vertex ids.

    Ids are assigned sequentially by ``add_vertex``. Public service operations never
    mutate a tree they were handed; they work on a ``copy``.
    """

    def __init__(self):
        self._adj: dict[int, dict[int, float]] = {}
        self._next_id = 0

    @classmethod
    def from_edges(cls, vertices: list[int], edges: list[tuple[int, int, float]]) -> "WeightedTree":
        tree = cls()
        for v in vertices:
            tree.add_vertex(v)
        for u, v, w in edges:
            tree.add_edge(u, v, w)
        return tree

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, v: int) -> bool:
        return v in self._adj

    def __repr__(self) -> str:
        return f"WeightedTree(vertices={len(self._adj)}, edges={self.num_edges})"

    @property
    def vertices(self) -> list[int]:
        return sorted(self._adj)

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    def require(self, v: int) -> None:
        if v not in self._adj:
            raise UnknownVertex(f"Unknown vertex: {v}", {"vertex": v})

    def add_vertex(self, vertex_id: int | None = None) -> int:
        if vertex_id is None:
            vertex_id = self._next_id
        if vertex_id in self._adj:
            raise ValidationError(f"Vertex {vertex_id} already exists", {"vertex": vertex_id})
        self._adj[vertex_id] = {}
        self._next_id = max(self._next_id, vertex_id + 1)
        return vertex_id

    def add_edge(self, u: int, v: int, weight: float) -> None:
        self.require(u)
        self.require(v)
        if u == v or v in self._adj[u]:
            raise ValidationError(f"Invalid edge ({u}, {v})", {"edge": [u, v]})
        if weight < 0:
            raise ValidationError(f"Negative edge weight {weight} on ({u}, {v})", {"edge": [u, v]})
        self._adj[u][v] = float(weight)
        self._adj[v][u] = float(weight)

    def remove_edge(self, u: int, v: int) -> float:
        weight = self.weight(u, v)
        del self._adj[u][v]
        del self._adj[v][u]
        return weight

    def remove_vertex(self, v: int) -> None:
        self.require(v)
        for u in list(self._adj[v]):
            del self._adj[u][v]
        del self._adj[v]

    def neighbors(self, v: int) -> dict[int, float]:
        self.require(v)
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def weight(self, u: int, v: int) -> float:
        self.require(u)
        if v not in self._adj[u]:
            raise UnknownVertex(f"No edge ({u}, {v})", {"edge": [u, v]})
        return self._adj[u][v]

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Each edge once as (u, v, weight) with u < v, in sorted order"""
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v]

    def leaves(self) -> list[int]:
        return [v for v in sorted(self._adj) if len(self._adj[v]) == 1]

    def copy(self) -> "WeightedTree":
        tree = WeightedTree()
        tree._adj = {v: dict(nbrs) for v, nbrs in self._adj.items()}
        tree._next_id = self._next_id
        return tree

    def is_valid_tree(self) -> bool:
        """Connected and acyclic"""
        if not self._adj:
            return False
        if self.num_edges != len(self._adj) - 1:
            return False
        start = next(iter(self._adj))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self._adj)

    def induces_connected(self, vertices: set[int] | frozenset[int]) -> bool:
        """True iff the vertex set is nonempty and induces a connected subgraph"""
        if not vertices:
            return False
        start = next(iter(vertices))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in self.neighbors(u):
                if v in vertices and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(vertices)


class PathCoordinates(BaseModel):
    """Distances and parent pointers of a tree rooted at ``root``"""
    model_config = ConfigDict(frozen=True)

    root: int
    depth: dict[int, float]
    parent: dict[int, int | None]
    parent_weight: dict[int, float]
    order: list[int]  # preorder, root first


class Representation(BaseModel):
    """A weighted tree plus the image phi(x) of every object"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tree: WeightedTree
    phi: dict[str, frozenset[int]]

    @model_validator(mode="after")
    def _check_images(self):
        if not self.tree.is_valid_tree():
            raise ValidationError(
                f"Not a tree: {len(self.tree)} vertices, {self.tree.num_edges} edges",
                {"vertices": len(self.tree), "edges": self.tree.num_edges},
            )
        for label, image in self.phi.items():
            if not image:
                raise ValidationError(f"Empty image for object {label}", {"object": label})
            for v in image:
                if v not in self.tree:
                    raise UnknownVertex(f"Image of {label} uses unknown vertex {v}", {"object": label, "vertex": v})
            if not self.tree.induces_connected(image):
                raise ValidationError(f"Image of {label} is not connected", {"object": label, "vertices": sorted(image)})
        return self

    @property
    def labels(self) -> list[str]:
        return sorted(self.phi)

    def annotations(self) -> dict[int, tuple[str, ...]]:
        """Vertex -> sorted labels of the objects whose image contains it"""
        annotated: dict[int, list[str]] = {v: [] for v in self.tree.vertices}
        for label in self.labels:
            for v in self.phi[label]:
                annotated[v].append(label)
        return {v: tuple(labels) for v, labels in annotated.items()}


class EdgeDocument(BaseModel):
    u: int
    v: int
    w: float = Field(ge=0)


class RepresentationDocument(BaseModel):
    """JSON wire format of a Representation"""
    vertices: list[int]
    edges: list[EdgeDocument]
    phi: dict[str, list[int]]

    @field_validator("vertices")
    @classmethod
    def _distinct_vertices(cls, v: list[int]) -> list[int]:
        if len(set(v)) != len(v):
            raise ValueError("vertex ids must be distinct")
        return v
