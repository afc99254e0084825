"""Linkages, configurations and the angle map.

Indices are 0-based here; documents and the CLI add one.
"""
import math
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from linkfold.config import settings
from linkfold.errors import (
    ConstraintViolation,
    DegenerateAngle,
    DegenerateFrame,
    LinkageMismatch,
    MalformedInput,
    NonPositiveLength,
    TooFewBars,
)

logger = logging.getLogger(__name__)

TAU = 2.0 * math.pi


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Linkage:
    lengths: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lengths) < 3:
            raise TooFewBars(f"A linkage needs at least 3 bars, got {len(self.lengths)}")
        for i, length in enumerate(self.lengths):
            if not (length > 0 and math.isfinite(length)):
                raise NonPositiveLength(f"Bar {i + 1} has non-positive length {length}")

    @property
    def n(self) -> int:
        return len(self.lengths)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.lengths, dtype=float)

    def same_as(self, other: "Linkage", tol: Optional[float] = None) -> bool:
        tol = settings.LENGTH_TOL if tol is None else tol
        if self.n != other.n:
            return False
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=tol, atol=0.0))


def make_linkage(lengths: Iterable[float]) -> Linkage:
    return Linkage(tuple(float(x) for x in lengths))


def cyclic_shift(linkage: Linkage, k: int) -> Linkage:
    """Relabels bars so that bar k becomes bar 0."""
    k %= linkage.n
    return Linkage(linkage.lengths[k:] + linkage.lengths[:k])


def is_realizable(linkage: Linkage) -> bool:
    lengths = linkage.lengths
    longest = max(lengths)
    return longest <= sum(lengths) - longest


def triple_fold_admissible(linkage: Linkage, start: int) -> bool:
    """l_a > l_b < l_c and l_a - l_b + l_c below the sum of the other bars."""
    n = linkage.n
    la, lb, lc = (linkage.lengths[(start + k) % n] for k in range(3))
    rest = sum(linkage.lengths) - la - lb - lc
    return la > lb and lb < lc and la - lb + lc < rest


@dataclass(frozen=True, eq=False)
class Configuration:
    vertices: np.ndarray
    linkage: Linkage

    def __post_init__(self):
        if self.vertices.shape != (self.linkage.n, 2):
            raise MalformedInput(
                f"Expected {self.linkage.n} planar vertices, got array of shape {self.vertices.shape}"
            )

    @property
    def n(self) -> int:
        return self.linkage.n

    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def edge_lengths(self) -> np.ndarray:
        return np.hypot(*self.edge_vectors().T)

    def edge_residuals(self) -> np.ndarray:
        lengths = self.linkage.as_array()
        return np.abs(self.edge_lengths() - lengths) / lengths

    @property
    def max_residual(self) -> float:
        return float(self.edge_residuals().max())

    def points(self) -> list:
        """Vertices as a list of (x, y) float tuples."""
        return [tuple(p) for p in self.vertices.tolist()]


def make_configuration(points, linkage: Linkage, tol: Optional[float] = None) -> Configuration:
    tol = settings.LENGTH_TOL if tol is None else tol
    config = Configuration(_readonly(points), linkage)
    residuals = config.edge_residuals()
    worst = int(np.argmax(residuals))
    if residuals[worst] > tol:
        raise ConstraintViolation(
            f"Bar {worst + 1} misses its length by {residuals[worst]:.3e} (relative), tolerance {tol:.1e}"
        )
    return config


def _configuration_unchecked(points, linkage: Linkage) -> Configuration:
    return Configuration(_readonly(points), linkage)


@dataclass(frozen=True)
class TorusPoint:
    angles: Tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.angles)

    @classmethod
    def from_parameters(cls, ts: Sequence[float]) -> "TorusPoint":
        return cls(tuple(TAU * float(t) for t in ts))

    @property
    def parameters(self) -> Tuple[float, ...]:
        """Loop parameters t = (angle mod 2pi) / 2pi, each in [0, 1)."""
        out = []
        for angle in self.angles:
            t = (angle % TAU) / TAU
            out.append(0.0 if t >= 1.0 else t)
        return tuple(out)


def canonicalize(config: Configuration, abs_tol: Optional[float] = None) -> Configuration:
    """Moves a_1 to the origin and a_2 onto the positive x-axis.

    Only translations and rotations are quotiented out; reflections are not,
    since the oriented angles read by `alpha_map` change sign under them.
    """
    abs_tol = settings.ABS_TOL if abs_tol is None else abs_tol
    v = config.vertices
    dx, dy = v[1] - v[0]
    norm = math.hypot(dx, dy)
    if norm <= abs_tol:
        raise DegenerateFrame("a_1 and a_2 coincide; no canonical frame")

    c, s = dx / norm, dy / norm
    rotation = np.array([[c, s], [-s, c]])
    out = (v - v[0]) @ rotation.T
    out[0] = (0.0, 0.0)
    out[1] = (norm, 0.0)
    return _configuration_unchecked(out, config.linkage)


def canonical_coordinates(config: Configuration) -> np.ndarray:
    """Flattened 2n-vector of the canonical form."""
    return canonicalize(config).vertices.reshape(-1)


def config_distance(c1: Configuration, c2: Configuration) -> float:
    if not c1.linkage.same_as(c2.linkage):
        raise LinkageMismatch("Configurations realize different linkages")
    return float(np.linalg.norm(canonical_coordinates(c1) - canonical_coordinates(c2)))


def _ccw_angle(u, v) -> float:
    # counterclockwise rotation carrying v onto u, in (-pi, pi]
    cross = v[0] * u[1] - v[1] * u[0]
    dot = u[0] * v[0] + u[1] * v[1]
    theta = math.atan2(cross, dot)
    return math.pi if theta == -math.pi else theta


def oriented_angle(config: Configuration, i: int, j: int, k: int, abs_tol: Optional[float] = None) -> float:
    """Signed angle at a_j between the rays towards a_i and a_k.

    Counterclockwise positive, measured from the ray a_j->a_k to the ray
    a_j->a_i, so ((0,0), (1,0), (1,1)) gives +pi/2.
    """
    abs_tol = settings.ABS_TOL if abs_tol is None else abs_tol
    v = config.vertices
    n = config.n
    apex = v[j % n]
    u = v[i % n] - apex
    w = v[k % n] - apex
    if math.hypot(*u) <= abs_tol or math.hypot(*w) <= abs_tol:
        raise DegenerateAngle(f"Vertex {j % n + 1} coincides with a neighbour of the angle")
    return _ccw_angle(u, w)


def alpha_map(config: Configuration, gadget_vertex_triples: Sequence[Tuple[int, int, int]]) -> TorusPoint:
    return TorusPoint(tuple(oriented_angle(config, i, j, k) for i, j, k in gadget_vertex_triples))
