"""Tagged numeric results.

Every measured quantity carries its uncertainty and a direction tag so
downstream comparisons know what kind of statement they are making:
`exact` (deterministic, std_error 0), `mc` (value +- std_error), `upper` /
`lower` (one-sided bounds -- e.g. a sampled sup is only ever a lower bound).
"""

from __future__ import annotations

from dataclasses import dataclass

_DIRECTIONS = ("exact", "upper", "lower", "mc")


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n_samples: int
    seed: int
    direction: str

    def __post_init__(self):
        if self.direction not in _DIRECTIONS:
            raise ValueError(
                f"direction must be one of {_DIRECTIONS}, got {self.direction!r}"
            )
        if self.std_error < 0:
            raise ValueError(f"std_error must be >= 0, got {self.std_error}")
        if self.direction == "exact" and self.std_error != 0:
            raise ValueError(
                f"exact estimates carry std_error 0, got {self.std_error}"
            )

    def scaled(self, t: float) -> "Estimate":
        """t * estimate for t > 0 (direction is preserved)."""
        if t <= 0:
            raise ValueError(f"scale must be positive, got {t}")
        return Estimate(
            value=t * self.value,
            std_error=t * self.std_error,
            n_samples=self.n_samples,
            seed=self.seed,
            direction=self.direction,
        )
