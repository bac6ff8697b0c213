from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

CONDITION_TAGS = {
    "four_point": "4PC",
    "extended_four_point": "EXT4PC",
}


class ConditionViolation(BaseModel):
    """A quadruple breaking the (extended) four-point condition by more than tau"""
    model_config = ConfigDict(frozen=True)

    quadruple: tuple[str, str, str, str]
    lhs: float
    rhs: float
    condition: Literal["four_point", "extended_four_point"]

    def render(self) -> str:
        quad = ",".join(self.quadruple)
        return f"{CONDITION_TAGS[self.condition]} violated at ({quad}): lhs={self.lhs:g}, rhs={self.rhs:g}"


class Mismatch(BaseModel):
    """Object pair whose tree distance differs from the matrix"""
    model_config = ConfigDict(frozen=True)

    x: str
    y: str
    expected: float
    actual: float

    def render(self) -> str:
        return f"d({self.x},{self.y}) expected {self.expected:g}, tree gives {self.actual:g}"


class Defect(BaseModel):
    """A way in which a representation fails to be minimal"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["nonpositive_edge", "uncovered_leaf", "redundant_vertex"]
    vertex: Optional[int] = None
    edge: Optional[tuple[int, int]] = None
    weight: Optional[float] = None

    def render(self) -> str:
        if self.kind == "nonpositive_edge":
            return f"edge {self.edge} has weight {self.weight:g}"
        if self.kind == "uncovered_leaf":
            return f"leaf vertex {self.vertex} is not the image of any object"
        return f"vertex {self.vertex} is neither an object image nor a boundary vertex"
