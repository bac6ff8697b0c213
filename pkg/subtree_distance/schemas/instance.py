from pydantic import BaseModel, ConfigDict, Field, model_validator

from subtree_distance.exceptions import InvalidRange


class WeightRange(BaseModel):
    """Edge weight distribution for generated trees"""
    model_config = ConfigDict(frozen=True)

    lo: float = 1.0
    hi: float = 10.0
    integer: bool = False

    @model_validator(mode="after")
    def _check_range(self):
        if not 0 < self.lo <= self.hi:
            raise InvalidRange(f"Weight range must satisfy 0 < lo <= hi, got {self.lo}:{self.hi}")
        if self.integer and (self.lo != int(self.lo) or self.hi != int(self.hi)):
            raise InvalidRange(f"Integer weight range needs integer bounds, got {self.lo}:{self.hi}")
        return self

    @classmethod
    def parse(cls, text: str) -> "WeightRange":
        """Parse ``lo:hi`` (uniform reals) or ``int:hi`` (integers in 1..hi)"""
        head, sep, tail = text.partition(":")
        if not sep:
            raise InvalidRange(f"Invalid weight range {text!r}, expected lo:hi or int:hi")
        try:
            if head == "int":
                return cls(lo=1, hi=int(tail), integer=True)
            return cls(lo=float(head), hi=float(tail))
        except ValueError:
            raise InvalidRange(f"Invalid weight range {text!r}, expected lo:hi or int:hi") from None


class BenchRow(BaseModel):
    """Median reconstruction time for one instance size"""
    size: int
    median_seconds: float
    runs: list[float] = Field(default_factory=list)
