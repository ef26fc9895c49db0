"""Radial grids for the finite element discretization."""

from dataclasses import dataclass
import math

import numpy as np

from .model import OperatorParams


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray          # strictly increasing, nodes[0] = 0
    grading: str               # "uniform" | "geometric"
    ratio: float = 1.0

    def __post_init__(self):
        if self.nodes[0] != 0.0:
            raise ValueError("first node must be 0")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if len(self.nodes) < 66:
            raise ValueError("need at least 64 interior nodes")

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1


def auto_r_max(params: OperatorParams, floor: float = 1e-16) -> float:
    """Radius where the envelope's exponential factor has dropped to floor.

    Solves phase_coeff * r^phase_exp = -ln(floor); spectral content beyond
    is negligible at double precision.
    """
    d = params.derived
    if d.phase_exp <= 0 or not params.potential_on:
        raise ValueError(
            "auto r_max needs a decaying envelope; pass r_max explicitly "
            "for potential-free sanity parameters"
        )
    return (-math.log(floor) / d.phase_coeff) ** (1.0 / d.phase_exp)


def build_grid(params: OperatorParams, r_max=None, n: int = 512,
               grading: str = "uniform", ratio: float = 1.0) -> RadialGrid:
    """Grid of n elements on [0, r_max]; r_max=None invokes the auto rule."""
    if n < 64:
        raise ValueError(f"need n >= 64 elements, got {n}")
    if r_max is None:
        r_max = auto_r_max(params)
    r_max = float(r_max)
    if r_max <= 1.0:
        raise ValueError(f"r_max must exceed 1, got {r_max}")
    if grading == "uniform" or (grading == "geometric" and ratio == 1.0):
        nodes = np.linspace(0.0, r_max, n + 1)
        return RadialGrid(nodes, "uniform", 1.0)
    if grading == "geometric":
        # element widths h0 * ratio^i summing to r_max
        if ratio <= 0:
            raise ValueError(f"geometric ratio must be positive, got {ratio}")
        widths = ratio ** np.arange(n)
        nodes = np.concatenate([[0.0], np.cumsum(widths)])
        nodes *= r_max / nodes[-1]
        nodes[-1] = r_max  # exact endpoint against scaling roundoff
        return RadialGrid(nodes, "geometric", float(ratio))
    raise ValueError(f"unknown grading {grading!r}")
