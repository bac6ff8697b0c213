from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field


class LeafAttachment(BaseModel):
    """Where a new leaf meets the path between two placed leaves"""
    model_config = ConfigDict(frozen=True)

    ref_u: str
    ref_v: str
    split: float = Field(ge=0)  # distance from phi(ref_u) along the ref_u-ref_v path
    pendant: float = Field(ge=0)  # length of the new leaf edge


class LeafObjectSet(BaseModel):
    """Objects mapped to leaves of the minimal representation"""
    model_config = ConfigDict(frozen=True)

    root: str
    partner: str
    members: tuple[str, ...]


class IntervalPlacement(BaseModel):
    """
    Part of a non-leaf object's image on the path from phi(root) to phi(leaf).

    In root-path coordinates the interval is [a, D - b], clipped to [0, D];
    ``start``/``end`` are None when the interval is empty.
    """
    model_config = ConfigDict(frozen=True)

    object: str
    leaf: str
    a: float
    b: float
    D: float
    start: Optional[float] = None
    end: Optional[float] = None

    @property
    def empty(self) -> bool:
        return self.start is None


class EdgeCover(BaseModel):
    """Covered depth range of one object on one edge of the leaf-object tree"""
    model_config = ConfigDict(frozen=True)

    object: str
    parent: int
    child: int
    lo: float
    hi: float


class RecognitionReport(BaseModel):
    """Verdict of the recognition pipeline"""
    accepted: bool
    stage: Optional[str] = None
    witness: Optional[dict[str, Any]] = None
    n: int
    leaf_objects: list[str] = Field(default_factory=list)
