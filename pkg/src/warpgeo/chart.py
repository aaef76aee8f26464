"""Coordinate charts consumed by the finite-difference oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

TARGETS = ("spaceform", "warped", "abstract")


@dataclass(frozen=True)
class ChartImmersion:
    """A map from a parameter box into a model space.

    ``embed`` is vectorized over leading axes: it takes ``u`` of shape
    ``(..., dim)`` and returns

    * ``target="spaceform"``: model coordinates of Q_eps^n, shape ``(..., m)``;
    * ``target="warped"``: ``(t, p)`` packed as ``(..., 1 + m)`` with the
      height in column 0;
    * ``target="abstract"``: unused; ``metric_field(u)`` returns ``(..., dim, dim)``.

    ``normal_ref`` (same packing as ``embed``) orients the unit normal: the
    oracle Gram-Schmidts it against the tangent frame. For space-form seeds
    it is the exact unit normal and doubles as the parallel-family direction.
    """

    dim: int
    box: tuple
    target: str
    eps: int | None = None
    embed: Callable | None = None
    metric_field: Callable | None = None
    normal_ref: Callable | None = None
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown chart target {self.target!r}")
        if len(self.box) != self.dim:
            raise ValueError("box must have one (lo, hi) pair per dimension")
        if self.target == "abstract" and self.metric_field is None:
            raise ValueError("abstract charts need a metric_field")
        if self.target != "abstract" and self.embed is None:
            raise ValueError("immersed charts need an embed map")

    @property
    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.box], dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.box], dtype=float)

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def interior_grid(self, n: int = 5, margin: float = 0.0) -> np.ndarray:
        """Uniform n**dim lattice strictly inside the (shrunk) box."""
        lo = self.lo + margin
        hi = self.hi - margin
        axes = [lo[i] + (np.arange(n) + 1.0) * (hi[i] - lo[i]) / (n + 1) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def random_points(self, count: int, rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
        lo = self.lo + margin
        hi = self.hi - margin
        return lo + (hi - lo) * rng.random((count, self.dim))
