from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StepFunction:
    """
    Right-continuous step function.

    ``f(t) = initial`` for ``t < times[0]`` and ``f(t) = values[k]`` on ``[times[k], times[k+1])``.
    Used for Kaplan–Meier survival curves (initial 1) and Breslow cumulative hazards (initial 0).

    Attributes:
        times (np.ndarray): Strictly increasing jump locations.
        values (np.ndarray): Function value from each jump location onwards.
        initial (float): Value before the first jump.
    """

    times: np.ndarray
    values: np.ndarray
    initial: float = 0.0

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError(f"times and values must be 1-D of equal length, got {times.shape}, {values.shape}")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("Step function jump times must be strictly increasing")

        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def _lookup(self, idx: np.ndarray) -> np.ndarray:
        padded = np.concatenate([[self.initial], self.values])
        return padded[idx + 1]

    def __call__(self, t: float | np.ndarray) -> np.ndarray:
        return self._lookup(np.searchsorted(self.times, np.asarray(t, dtype=float), side="right") - 1)

    def left_limit(self, t: float | np.ndarray) -> np.ndarray:
        """Value just before ``t``, i.e. ``lim_{s -> t-} f(s)``."""
        return self._lookup(np.searchsorted(self.times, np.asarray(t, dtype=float), side="left") - 1)

    def jumps(self) -> np.ndarray:
        """Signed jump size at each entry of ``times``."""
        return np.diff(np.concatenate([[self.initial], self.values]))

    def to_pairs(self) -> list[tuple[float, float]]:
        return [(float(t), float(v)) for t, v in zip(self.times, self.values, strict=True)]
