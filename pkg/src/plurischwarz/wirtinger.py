"""Wirtinger derivatives by central differences in real coordinates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lincomplex import as_vector


@dataclass(frozen=True)
class FiniteDiffConfig:
    step: float = 1e-5
    scheme: str = "central"
    dbar_step: float = 1e-4
    second_step: float = 1e-3

    def __post_init__(self):
        if min(self.step, self.dbar_step, self.second_step) <= 0:
            raise ValueError("finite-difference steps must be positive")
        if self.scheme != "central":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


def wirtinger_diff(
    func: Callable[[np.ndarray], np.ndarray],
    z,
    k: int,
    kind: str = "holo",
    step: float = 1e-5,
):
    """``d/dz_k`` (``kind="holo"``) or ``d/dzbar_k`` (``kind="antiholo"``) of ``func`` at ``z``.

    Uses ``d/dz = (d/dx - i d/dy)/2`` and ``d/dzbar = (d/dx + i d/dy)/2``
    with central differences on the four-point stencil ``z +- h e_k``,
    ``z +- i h e_k``.  ``func`` may return scalars or arrays of any shape.
    """
    if kind not in ("holo", "antiholo"):
        raise ValueError(f"kind must be 'holo' or 'antiholo', got {kind!r}")
    z = as_vector(z)
    e = np.zeros_like(z)
    e[k] = step
    dx = (np.asarray(func(z + e)) - np.asarray(func(z - e))) / (2 * step)
    dy = (np.asarray(func(z + 1j * e)) - np.asarray(func(z - 1j * e))) / (2 * step)
    sign = -1j if kind == "holo" else 1j
    return 0.5 * (dx + sign * dy)


def wirtinger_gradient(func, z, kind: str = "holo", step: float = 1e-5) -> np.ndarray:
    """Stack of :func:`wirtinger_diff` over all coordinates, derivative index first."""
    z = as_vector(z)
    return np.stack([wirtinger_diff(func, z, k, kind, step) for k in range(z.size)])
