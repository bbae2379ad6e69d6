"""Composite quadrature on a truncated half-line [0, x_max].

Two fixed (non-adaptive) rules are provided: the closed composite trapezoid
rule and composite Gauss-Legendre panels.  Every consumer in this package
integrates against these grids, so the summation order is pinned: weights are
stored in ascending node order and :func:`integrate` accumulates in that
order, which makes results bit-identical across runs and thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TRAPEZOID = "trapezoid"
GAUSS = "gauss"

_RULES = (TRAPEZOID, GAUSS)


@dataclass(frozen=True)
class HalfLineGrid:
    """Nodes and positive weights for integration over [0, x_max].

    Attributes
    ----------
    x_max : float
        Truncation point of the half-line.
    nodes : ndarray
        Strictly increasing abscissae, all inside [0, x_max].
    weights : ndarray
        Positive quadrature weights, same length as ``nodes``; they sum to
        ``x_max`` to machine accuracy.
    rule : str
        ``"trapezoid"`` or ``"gauss"``.
    n_panels : int
        Number of equal panels the interval is split into.
    points_per_panel : int or None
        Gauss points per panel; ``None`` for the trapezoid rule.
    """

    x_max: float
    nodes: np.ndarray
    weights: np.ndarray
    rule: str
    n_panels: int
    points_per_panel: int | None = None

    def __post_init__(self) -> None:
        # grids are shared freely between threads; freeze the arrays
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return int(self.nodes.size)


def build_grid(x_max: float, n_panels: int, rule: str = GAUSS,
               points_per_panel: int = 4) -> HalfLineGrid:
    """Build a quadrature grid on [0, x_max].

    Parameters
    ----------
    x_max : float
        Truncation point, must be positive.
    n_panels : int
        Number of equal panels, at least 1.
    rule : str
        ``"trapezoid"`` (closed, node count ``n_panels + 1``) or ``"gauss"``
        (composite Gauss-Legendre, node count ``n_panels * points_per_panel``).
    points_per_panel : int
        Gauss points per panel; exact for polynomials of degree
        ``2 * points_per_panel - 1`` on each panel.  Ignored by the
        trapezoid rule.

    Raises
    ------
    ValueError
        On non-positive ``x_max``/``n_panels`` or an unknown rule.
    """
    if not (isinstance(x_max, (int, float)) and math.isfinite(x_max) and x_max > 0):
        raise ValueError(f"x_max must be a positive finite number, got {x_max!r}")
    if not (isinstance(n_panels, (int, np.integer)) and n_panels >= 1):
        raise ValueError(f"n_panels must be a positive integer, got {n_panels!r}")
    if rule not in _RULES:
        raise ValueError(f"rule must be one of {_RULES}, got {rule!r}")

    x_max = float(x_max)
    n_panels = int(n_panels)
    h = x_max / n_panels

    if rule == TRAPEZOID:
        nodes = np.linspace(0.0, x_max, n_panels + 1)
        weights = np.full(n_panels + 1, h)
        weights[0] = 0.5 * h
        weights[-1] = 0.5 * h
        return HalfLineGrid(x_max, nodes, weights, TRAPEZOID, n_panels, None)

    if not (isinstance(points_per_panel, (int, np.integer)) and points_per_panel >= 1):
        raise ValueError(
            f"points_per_panel must be a positive integer, got {points_per_panel!r}")
    p = int(points_per_panel)
    xi, wi = np.polynomial.legendre.leggauss(p)
    starts = h * np.arange(n_panels)
    nodes = (starts[:, None] + 0.5 * h * (xi[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * h * wi, n_panels)
    return HalfLineGrid(x_max, nodes, weights, GAUSS, n_panels, p)


def integrate(grid: HalfLineGrid, samples) -> float:
    """Integrate sampled values against the grid weights.

    ``samples`` must hold one value per node, in node order.  The weighted
    terms are accumulated with :func:`math.fsum` in ascending node order, so
    the result is exact to the final rounding and independent of threading.
    """
    s = np.asarray(samples, dtype=float)
    if s.shape != grid.nodes.shape:
        raise ValueError(
            f"samples length {s.shape} does not match node count {grid.nodes.shape}")
    return math.fsum(grid.weights * s)


def refine(grid: HalfLineGrid) -> HalfLineGrid:
    """Return the same grid with the panel count doubled."""
    return build_grid(grid.x_max, 2 * grid.n_panels, grid.rule,
                      grid.points_per_panel or 4)
