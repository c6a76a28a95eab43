"""Planar primitives: points, cone systems, cone membership, bisector projections.

A cone system splits the directions around any apex into k equal angular
sectors of width theta = 2*pi/k. Cone i covers polar angles
[i*theta, (i+1)*theta), measured counterclockwise from the positive x-axis;
the half-open convention makes cone membership total and deterministic.
All arithmetic is double precision; round-off at exact cone boundaries is
accepted.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

TWO_PI = 2.0 * math.pi


class DegenerateDirection(ValueError):
    """Query point coincides with the apex, so no direction is defined."""


class WrongCone(ValueError):
    """Point does not lie in the cone it was claimed to lie in."""


class ConeCountTooSmall(ValueError):
    """Cone count k <= 6 makes the stretch-factor denominator non-positive."""


class Point(NamedTuple):
    """A location in the plane. Coordinates must be finite."""

    x: float
    y: float


@dataclass(frozen=True)
class ConeSystem:
    """k equal cones around any apex; cone width theta = 2*pi/k radians."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"cone count must be >= 1, got {self.k}")

    @property
    def theta(self) -> float:
        return TWO_PI / self.k

    def bisector(self, i: int) -> tuple[float, float]:
        """Unit vector along the bisector of cone i."""
        a = (i + 0.5) * self.theta
        return math.cos(a), math.sin(a)


def cone_of(apex: Point, q: Point, cs: ConeSystem) -> int:
    """Index of the cone around `apex` that contains `q`.

    Returns i such that the polar angle of (q - apex) lies in
    [i*theta, (i+1)*theta). Raises DegenerateDirection when q == apex.
    """
    dx = q[0] - apex[0]
    dy = q[1] - apex[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateDirection(f"query point equals apex {tuple(apex)}")
    ang = math.atan2(dy, dx)
    if ang < 0.0:
        ang += TWO_PI  # same normalization as the vectorized construction path
    return int(ang / cs.theta) % cs.k


def bisector_projection(apex: Point, q: Point, i: int, cs: ConeSystem) -> float:
    """Length of (q - apex) projected onto the bisector of cone i.

    `q` must actually lie in cone i of `apex` (WrongCone otherwise); the
    result is then strictly positive.
    """
    actual = cone_of(apex, q, cs)
    if actual != i:
        raise WrongCone(f"point lies in cone {actual}, not cone {i}")
    ux, uy = cs.bisector(i)
    return (q[0] - apex[0]) * ux + (q[1] - apex[1]) * uy


def spanning_ratio(cs: ConeSystem) -> float:
    """Worst-case graph-path/Euclidean stretch of a theta graph on `cs`.

    Equals 1/(1 - 2*sin(theta/2)); finite and > 1 only for k >= 7, and
    strictly decreasing in k.
    """
    if cs.k <= 6:
        raise ConeCountTooSmall(
            f"stretch factor requires k >= 7 cones, got k={cs.k}"
        )
    return 1.0 / (1.0 - 2.0 * math.sin(math.pi / cs.k))
