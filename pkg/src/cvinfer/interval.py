from dataclasses import dataclass, field


@dataclass(frozen=True)
class IntervalEstimate:
    """A two-sided confidence interval for the common CV."""

    method: str
    level: float
    lower: float
    upper: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def length(self):
        return self.upper - self.lower

    def contains(self, tau):
        return self.lower <= tau <= self.upper

    def as_tuple(self):
        return (self.lower, self.upper)
