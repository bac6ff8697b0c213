from collections import Counter
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from subtree_distance.exceptions import ValidationError


class Tolerance(BaseModel):
    """
    Comparison slack for real-valued distances.

    tau = max(abs_floor, rel_eps * scale), where scale is the largest matrix entry
    once the tolerance has been bound to an input with ``bind``.
    """
    model_config = ConfigDict(frozen=True)

    rel_eps: float = Field(default=1e-9, ge=0)
    abs_floor: float = Field(default=1e-12, ge=0)
    scale: float = Field(default=0.0, ge=0)

    @classmethod
    def exact(cls) -> "Tolerance":
        return cls(rel_eps=0.0, abs_floor=0.0)

    @property
    def tau(self) -> float:
        return max(self.abs_floor, self.rel_eps * self.scale)

    def with_scale(self, scale: float) -> "Tolerance":
        return self.model_copy(update={"scale": float(max(scale, 0.0))})

    def bind(self, d: "DissimilarityMatrix") -> "Tolerance":
        """Fix the scale from a matrix; done once per pipeline run"""
        return self.with_scale(d.max_entry)


class DissimilarityMatrix(BaseModel):
    """Symmetric nonnegative matrix with zero diagonal and distinct object labels"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    labels: tuple[str, ...]
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_float_array(cls, v):
        array = np.array(v, dtype=np.float64, copy=True)
        if array.ndim == 1 and array.size == 0:
            array = array.reshape(0, 0)
        return array

    @model_validator(mode="after")
    def _check_invariants(self):
        n = len(self.labels)
        values = self.values
        if values.shape != (n, n):
            raise ValidationError(
                f"Matrix shape {values.shape} does not match {n} labels",
                {"shape": list(values.shape), "labels": n},
            )
        if n == 0:
            raise ValidationError("Matrix must contain at least one object")
        if len(set(self.labels)) != n:
            duplicate = next(label for label, count in Counter(self.labels).items() if count > 1)
            raise ValidationError(f"Duplicate label: {duplicate}", {"label": duplicate})
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise ValidationError(
                f"Non-finite value at ({self.labels[i]}, {self.labels[j]})",
                {"pair": [self.labels[i], self.labels[j]]},
            )
        if np.any(values < 0):
            i, j = np.argwhere(values < 0)[0]
            raise ValidationError(
                f"Negative value {values[i, j]} at ({self.labels[i]}, {self.labels[j]})",
                {"pair": [self.labels[i], self.labels[j]], "value": float(values[i, j])},
            )
        if np.any(np.diag(values) != 0):
            i = int(np.flatnonzero(np.diag(values))[0])
            raise ValidationError(
                f"Nonzero diagonal at {self.labels[i]}",
                {"label": self.labels[i], "value": float(values[i, i])},
            )
        if not np.array_equal(values, values.T):
            i, j = np.argwhere(values != values.T)[0]
            raise ValidationError(
                f"Asymmetric entries at ({self.labels[i]}, {self.labels[j]})",
                {"pair": [self.labels[i], self.labels[j]]},
            )
        values.setflags(write=False)
        return self

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    @property
    def max_entry(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    def distance(self, x: str, y: str) -> float:
        return float(self.values[self.index[x], self.index[y]])

    def row(self, x: str) -> np.ndarray:
        return self.values[self.index[x]]


class DedupResult(BaseModel):
    """Matrix with duplicate objects removed, plus removed label -> representative"""
    model_config = ConfigDict(frozen=True)

    reduced: DissimilarityMatrix
    aliases: dict[str, str] = Field(default_factory=dict)
