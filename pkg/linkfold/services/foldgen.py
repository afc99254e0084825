"""Triple-fold gadgets, the counterexample layout and its torus family gamma."""
import math
import logging
import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from linkfold.config import settings
from linkfold.errors import (
    ConstraintViolation,
    InputError,
    InvalidFoldLengths,
    LayoutFailure,
    MalformedInput,
)
from linkfold.services.geometry import (
    circle_circle,
    convex_polygon_distance,
    point_polygon_distance,
    segment_polygon_distance,
)
from linkfold.services.linkage import (
    Configuration,
    Linkage,
    TorusPoint,
    make_configuration,
    make_linkage,
    triple_fold_admissible,
)

logger = logging.getLogger(__name__)

FoldLengths = Tuple[float, float, float]


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def validate_fold_lengths(fold_lengths: Sequence[float]) -> FoldLengths:
    if len(fold_lengths) != 3:
        raise InvalidFoldLengths(f"Expected three fold lengths, got {len(fold_lengths)}")
    la, lb, lc = (float(x) for x in fold_lengths)
    if min(la, lb, lc) <= 0:
        raise InvalidFoldLengths("Fold lengths must be positive")
    if not (la > lb and lb < lc):
        raise InvalidFoldLengths(f"Need l_a > l_b < l_c, got ({la}, {lb}, {lc})")
    return la, lb, lc


@dataclass(frozen=True, eq=False)
class GadgetSpec:
    fold_lengths: FoldLengths
    anchor_start: np.ndarray
    anchor_end: np.ndarray
    side: int
    edge_indices: Tuple[int, int, int]

    def __post_init__(self):
        validate_fold_lengths(self.fold_lengths)
        if self.side not in (1, -1):
            raise MalformedInput(f"side must be +1 or -1, got {self.side}")
        e0, e1, e2 = self.edge_indices
        if e1 != e0 + 1 or e2 != e0 + 2:
            raise MalformedInput(f"Gadget bars must be consecutive, got {self.edge_indices}")
        chord = math.hypot(*(np.asarray(self.anchor_end) - np.asarray(self.anchor_start)))
        if abs(chord - self.chord_length) > settings.LENGTH_TOL * self.chord_length:
            raise ConstraintViolation(
                f"Anchor distance {chord:.12g} differs from l_a - l_b + l_c = {self.chord_length:.12g}"
            )

    @property
    def chord_length(self) -> float:
        la, lb, lc = self.fold_lengths
        return la - lb + lc

    @property
    def reach(self) -> float:
        la, lb, _ = self.fold_lengths
        return la + lb

    def frame(self) -> Tuple[np.ndarray, np.ndarray]:
        """Unit chord direction u and unit normal w pointing into the moving region."""
        start = np.asarray(self.anchor_start, dtype=float)
        chord = np.asarray(self.anchor_end, dtype=float) - start
        u = chord / math.hypot(*chord)
        w = self.side * np.array([-u[1], u[0]])
        return u, w

    def joint_indices(self, n: int) -> Tuple[int, int]:
        e0 = self.edge_indices[0]
        return (e0 + 1) % n, (e0 + 2) % n

    def vertex_triple(self, n: int) -> Tuple[int, int, int]:
        e0 = self.edge_indices[0]
        return e0 % n, (e0 + 1) % n, (e0 + 2) % n


def fold_branch_interval(gadget: GadgetSpec) -> float:
    """Largest admissible opening angle phi_max of the first bar off the chord."""
    la, lb, lc = gadget.fold_lengths
    d = gadget.chord_length
    cos_max = (la * la + d * d - (lb + lc) ** 2) / (2.0 * la * d)
    return math.acos(min(1.0, max(-1.0, cos_max)))


def fold_chain_local(gadget: GadgetSpec, t: float, abs_tol: Optional[float] = None) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Moving joints in the gadget frame (anchor_start at origin, chord on +x).

    t in [0, 1/2] opens the first bar on one branch and closes it again; the
    second half returns on the other branch. Both halves meet at the straight
    elbow t = 1/2 and at the triple fold t = 0.
    """
    abs_tol = settings.ABS_TOL if abs_tol is None else abs_tol
    la, lb, lc = gadget.fold_lengths
    d = gadget.chord_length
    phi_max = fold_branch_interval(gadget)

    t = float(t) % 1.0
    if t <= 0.5:
        phi, branch = 2.0 * t * phi_max, 0
    else:
        phi, branch = (2.0 - 2.0 * t) * phi_max, 1

    p = (la * math.cos(phi), la * math.sin(phi))
    solutions = circle_circle(p, lb, (d, 0.0), lc, eps=abs_tol)
    q = solutions[0] if len(solutions) == 1 else solutions[branch]
    return p, (float(q[0]), float(q[1]))


def fold_chain_at(gadget: GadgetSpec, t: float, abs_tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    (px, py), (qx, qy) = fold_chain_local(gadget, t, abs_tol)
    u, w = gadget.frame()
    start = np.asarray(gadget.anchor_start, dtype=float)
    return start + px * u + py * w, start + qx * u + qy * w


def region_polygon(gadget: GadgetSpec, segments: Optional[int] = None) -> np.ndarray:
    """Convex polygon containing every position of the moving joints.

    The joints stay on the moving side of the chord line and within l_a + l_b
    of an anchor, a half-stadium; its quarter arcs are replaced by
    circumscribed polylines.
    """
    segments = settings.REGION_ARC_SEGMENTS if segments is None else segments
    d = gadget.chord_length
    step = (math.pi / 2.0) / segments
    radius = gadget.reach / math.cos(step / 2.0)

    local = []
    for k in range(segments + 1):
        theta = k * step
        local.append((d + radius * math.cos(theta), radius * math.sin(theta)))
    for k in range(segments + 1):
        theta = math.pi / 2.0 + k * step
        local.append((radius * math.cos(theta), radius * math.sin(theta)))

    u, w = gadget.frame()
    start = np.asarray(gadget.anchor_start, dtype=float)
    return np.array([start + x * u + y * w for x, y in local])


@dataclass(frozen=True, eq=False)
class CounterexampleLayout:
    linkage: Linkage
    gadgets: Tuple[GadgetSpec, ...]
    base_vertices: np.ndarray
    fixed_indices: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        n = self.linkage.n
        moving = set()
        for g in self.gadgets:
            for idx in g.joint_indices(n):
                if idx in moving:
                    raise MalformedInput(f"Vertex {idx + 1} is moved by two gadgets")
                moving.add(idx)
            for k, e in enumerate(g.edge_indices):
                if e >= n:
                    raise MalformedInput(f"Bar index {e + 1} out of range for n={n}")
                if abs(self.linkage.lengths[e] - g.fold_lengths[k]) > settings.LENGTH_TOL * g.fold_lengths[k]:
                    raise ConstraintViolation(f"Bar {e + 1} does not carry fold length {g.fold_lengths[k]}")
        fixed = tuple(i for i in range(n) if i not in moving)
        object.__setattr__(self, "fixed_indices", fixed)

        if self.base_vertices.shape != (len(fixed), 2):
            raise MalformedInput(
                f"Expected {len(fixed)} base vertices, got array of shape {self.base_vertices.shape}"
            )
        positions = dict(zip(fixed, self.base_vertices))
        for g in self.gadgets:
            start, _, _ = g.vertex_triple(n)
            end = (g.edge_indices[2] + 1) % n
            for idx, anchor in ((start, g.anchor_start), (end, g.anchor_end)):
                if idx not in positions:
                    raise MalformedInput(f"Anchor vertex {idx + 1} is moved by another gadget")
                if not np.allclose(positions[idx], anchor, rtol=0.0, atol=settings.ABS_TOL * 1e3):
                    raise ConstraintViolation(f"Gadget anchor does not sit on vertex {idx + 1}")

    @property
    def m(self) -> int:
        return len(self.gadgets)

    @property
    def n(self) -> int:
        return self.linkage.n

    @property
    def angle_triples(self) -> Tuple[Tuple[int, int, int], ...]:
        return tuple(g.vertex_triple(self.n) for g in self.gadgets)

    def base_bars(self) -> List[int]:
        """Bars whose endpoints are both fixed."""
        fixed = set(self.fixed_indices)
        return [i for i in range(self.n) if i in fixed and (i + 1) % self.n in fixed]

    def base_position(self, index: int) -> np.ndarray:
        return self.base_vertices[self.fixed_indices.index(index)]


def assemble_layout(
    fold_lengths: Sequence[float],
    chords: Sequence[Tuple[Sequence[float], Sequence[float]]],
    middles: Sequence[Sequence[float]],
    side: int = -1,
) -> CounterexampleLayout:
    """Builds the 5m-bar layout from gadget chords and the joints between them.

    Vertex 0 is the middle joint after the last gadget; gadget i owns vertices
    5i+1 (anchor) .. 5i+4 (anchor) and bars 5i+1 .. 5i+3; middle joint i is
    vertex 5i+5 (mod n).
    """
    la, lb, lc = validate_fold_lengths(fold_lengths)
    m = len(chords)
    if m < 1 or len(middles) != m:
        raise InputError("Need one chord and one middle joint per gadget")

    fixed = [np.asarray(middles[m - 1], dtype=float)]
    lengths: List[float] = []
    for i, (a, b) in enumerate(chords):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        lengths.append(float(math.hypot(*(a - fixed[-1]))))
        lengths.extend((la, lb, lc))
        middle = np.asarray(middles[i], dtype=float)
        lengths.append(float(math.hypot(*(middle - b))))
        fixed.extend((a, b))
        if i < m - 1:
            fixed.append(middle)

    linkage = make_linkage(lengths)
    gadgets = tuple(
        GadgetSpec(
            fold_lengths=(la, lb, lc),
            anchor_start=_readonly(chords[i][0]),
            anchor_end=_readonly(chords[i][1]),
            side=side,
            edge_indices=(5 * i + 1, 5 * i + 2, 5 * i + 3),
        )
        for i in range(m)
    )
    base = np.array(fixed)
    base.setflags(write=False)
    return CounterexampleLayout(linkage=linkage, gadgets=gadgets, base_vertices=base)


@dataclass(frozen=True)
class LayoutMargins:
    region_gap: float      # smallest distance between two moving regions
    base_gap: float        # smallest distance from a region to base bars it does not own

    @property
    def ok(self) -> bool:
        return self.region_gap > 0 and self.base_gap > 0


def layout_margins(layout: CounterexampleLayout) -> LayoutMargins:
    n = layout.n
    regions = [region_polygon(g) for g in layout.gadgets]

    region_gap = math.inf
    for i, j in itertools.combinations(range(len(regions)), 2):
        region_gap = min(region_gap, convex_polygon_distance(regions[i], regions[j]))

    base_gap = math.inf
    for g, region in zip(layout.gadgets, regions):
        start = g.edge_indices[0] % n
        end = (g.edge_indices[2] + 1) % n
        own = {start, end}
        for bar in layout.base_bars():
            a, b = bar, (bar + 1) % n
            if a in own or b in own:
                # bars hinged at this gadget's anchors are checked at their far joint
                far = b if a in own else a
                if far in own:
                    continue
                base_gap = min(base_gap, point_polygon_distance(layout.base_position(far), region))
                continue
            segment = (layout.base_position(a), layout.base_position(b))
            base_gap = min(base_gap, segment_polygon_distance(segment, region))

    return LayoutMargins(region_gap=region_gap, base_gap=base_gap)


def _circle_mount(m: int, d: float, radius: float):
    half_angle = math.asin(d / (2.0 * radius))
    chords, middles = [], []
    for i in range(m):
        psi = -math.pi / 2.0 + 2.0 * math.pi * i / m
        centre = radius * math.cos(half_angle) * np.array([math.cos(psi), math.sin(psi)])
        u = np.array([-math.sin(psi), math.cos(psi)])
        chords.append((centre - 0.5 * d * u, centre + 0.5 * d * u))
        mid = psi + math.pi / m
        middles.append(radius * np.array([math.cos(mid), math.sin(mid)]))
    return chords, middles


def build_counterexample(m: int, fold_lengths: Optional[Sequence[float]] = None) -> CounterexampleLayout:
    """Mounts m gadgets on a convex polygon, growing it until regions separate.

    Chords sit on a circle with the moving regions outside it, so they only
    approach each other near the shared middle joints.
    """
    if m < 1:
        raise InputError(f"m must be at least 1, got {m}")
    la, lb, lc = validate_fold_lengths(fold_lengths or settings.FOLD.as_tuple())
    d = la - lb + lc
    radius = max(d, m * (d + 2.0 * (la + lb)) / (2.0 * math.pi))

    for attempt in range(1, settings.LAYOUT_MAX_ATTEMPTS + 1):
        chords, middles = _circle_mount(m, d, radius)
        layout = assemble_layout((la, lb, lc), chords, middles, side=-1)
        margins = layout_margins(layout)
        admissible = all(triple_fold_admissible(layout.linkage, g.edge_indices[0]) for g in layout.gadgets)
        if margins.ok and admissible:
            logger.info(
                f"[Layout] m={m} n={layout.n} radius={radius:.6g} after {attempt} attempt(s)",
                extra={"region_gap": margins.region_gap, "base_gap": margins.base_gap},
            )
            return layout
        logger.debug(f"[Layout] radius {radius:.6g} rejected: {margins}")
        radius *= settings.LAYOUT_GROWTH

    raise LayoutFailure(f"No separated layout for m={m} within {settings.LAYOUT_MAX_ATTEMPTS} attempts")


def gamma_at(layout: CounterexampleLayout, ts: Sequence[float]) -> Configuration:
    """Configuration with gadget i at loop parameter ts[i]."""
    if len(ts) != layout.m:
        raise MalformedInput(f"Expected {layout.m} loop parameters, got {len(ts)}")
    n = layout.n
    vertices = np.empty((n, 2))
    vertices[list(layout.fixed_indices)] = layout.base_vertices
    for g, t in zip(layout.gadgets, ts):
        p, q = fold_chain_at(g, t)
        jp, jq = g.joint_indices(n)
        vertices[jp] = p
        vertices[jq] = q
    return make_configuration(vertices, layout.linkage)


def gamma(layout: CounterexampleLayout, point: TorusPoint) -> Configuration:
    if point.m != layout.m:
        raise MalformedInput(f"Torus point has {point.m} angles, layout has {layout.m} gadgets")
    return gamma_at(layout, point.parameters)


def _others(layout: CounterexampleLayout, others_fixed_at) -> List[float]:
    if others_fixed_at is None:
        return [settings.OFF_AXIS_T] * layout.m
    if isinstance(others_fixed_at, TorusPoint):
        return list(others_fixed_at.parameters)
    return [float(t) for t in others_fixed_at]


def arc_length_parameters(
    gadget: GadgetSpec,
    count: int,
    offset: float = 0.0,
    resolution: Optional[int] = None,
) -> np.ndarray:
    """count loop parameters evenly spaced by the distance the moving joints travel.

    Sample k sits at arc length (k + offset) / count of the whole loop, so
    offset 0 starts at the triple fold. The loop is traced on a fine uniform
    grid in t and inverted piecewise linearly.
    """
    resolution = settings.ARC_RESOLUTION if resolution is None else resolution
    if count < 1:
        raise InputError(f"Need at least one sample, got {count}")
    fine = np.arange(resolution + 1) / resolution
    joints = np.array([np.concatenate(fold_chain_local(gadget, t)) for t in fine])
    travelled = np.concatenate(([0.0], np.cumsum(np.linalg.norm(np.diff(joints, axis=0), axis=1))))
    targets = travelled[-1] * (np.arange(count) + offset) / count
    return np.interp(targets, travelled, fine)


def _axis_parameters(layout: CounterexampleLayout, i: int, count: int, spacing: str, offset: float = 0.0) -> List[float]:
    if spacing == "uniform":
        return [(k + offset) / count for k in range(count)]
    if spacing == "arc":
        return [float(t) for t in arc_length_parameters(layout.gadgets[i], count, offset)]
    raise InputError(f"spacing must be uniform or arc, got {spacing}")


def sample_loop(
    layout: CounterexampleLayout,
    i: int,
    samples: int,
    others_fixed_at=None,
    spacing: str = "uniform",
) -> List[Tuple[float, Configuration]]:
    """gamma along the i-th circle, the other gadgets held still."""
    if samples < 8:
        raise InputError(f"A loop needs at least 8 samples, got {samples}")
    if not 0 <= i < layout.m:
        raise InputError(f"Gadget index {i + 1} out of range 1..{layout.m}")
    ts = _others(layout, others_fixed_at)
    if len(ts) != layout.m:
        raise MalformedInput(f"Expected {layout.m} fixed parameters, got {len(ts)}")

    out = []
    for t in _axis_parameters(layout, i, samples, spacing):
        ts[i] = t
        out.append((t, gamma_at(layout, ts)))
    return out


def sample_torus(
    layout: CounterexampleLayout,
    grid: Sequence[int],
    spacing: str = "uniform",
) -> List[Tuple[TorusPoint, Configuration]]:
    """gamma on a grid over the torus, row-major in the gadget order.

    "uniform" is the product grid k / g. "arc" spaces every axis by arc
    length and shifts axis i by half a step on odd rows of axis i - 1 (when
    that axis has an even count), so the cells are triangles.
    """
    if len(grid) != layout.m:
        raise InputError(f"Grid needs {layout.m} counts, got {len(grid)}")
    if any(g < 4 for g in grid):
        raise InputError(f"Each grid count must be at least 4, got {list(grid)}")

    axes = [_axis_parameters(layout, i, g, spacing) for i, g in enumerate(grid)]
    shifted = [None] * layout.m
    if spacing == "arc":
        for i in range(1, layout.m):
            if grid[i - 1] % 2 == 0:
                shifted[i] = _axis_parameters(layout, i, grid[i], spacing, offset=0.5)

    out = []
    for ks in itertools.product(*(range(g) for g in grid)):
        ts = []
        for i, k in enumerate(ks):
            odd_row = i > 0 and ks[i - 1] % 2 == 1
            ts.append(shifted[i][k] if odd_row and shifted[i] is not None else axes[i][k])
        out.append((TorusPoint.from_parameters(ts), gamma_at(layout, ts)))
    return out
