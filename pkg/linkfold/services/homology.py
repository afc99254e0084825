"""Vietoris-Rips persistence over Z/2 for sampled configuration clouds."""
import math
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from linkfold.config import settings
from linkfold.errors import InputError, LinkageMismatch, TooLarge
from linkfold.services.linkage import Configuration, canonical_coordinates

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]

MAX_SIMPLEX_DIM = 3


def distance_matrix(points) -> np.ndarray:
    """Pairwise distances; configurations are compared in canonical position."""
    points = list(points)
    if points and isinstance(points[0], Configuration):
        linkage = points[0].linkage
        if not all(c.linkage.same_as(linkage) for c in points):
            raise LinkageMismatch("Point cloud mixes configurations of different linkages")
        coords = np.array([canonical_coordinates(c) for c in points])
    else:
        coords = np.asarray(points, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
    return squareform(pdist(coords))


def enclosing_radius(distances: np.ndarray) -> float:
    """Scale beyond which the Rips complex is a cone, hence contractible."""
    return float(distances.max(axis=1).min())


def default_max_diameter(distances: np.ndarray, factors: int = 1, fraction: Optional[float] = None) -> float:
    """SCALE_FRACTION of the enclosing radius, divided by sqrt(factors).

    A cloud sampled from a product of `factors` loops has an enclosing radius
    about sqrt(factors) times that of one loop, while each loop fills at its
    own scale.
    """
    fraction = settings.SCALE_FRACTION if fraction is None else fraction
    if factors < 1:
        raise InputError(f"factors must be positive, got {factors}")
    return fraction * enclosing_radius(distances) / math.sqrt(factors)


@dataclass(frozen=True)
class Filtration:
    simplices: Tuple[Simplex, ...]
    diameters: Tuple[float, ...]
    max_dim: int
    max_diameter: float

    def __len__(self) -> int:
        return len(self.simplices)

    def counts(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for s in self.simplices:
            out[len(s) - 1] = out.get(len(s) - 1, 0) + 1
        return out

    def to_text(self) -> str:
        """One simplex per line: diameter followed by its point indices."""
        lines = [
            " ".join([repr(float(d))] + [str(v) for v in s])
            for s, d in zip(self.simplices, self.diameters)
        ]
        return "\n".join(lines) + "\n"


def vr_filtration(
    points,
    max_diameter: float,
    max_dim: int,
    budget: Optional[int] = None,
    distances: Optional[np.ndarray] = None,
) -> Filtration:
    budget = settings.SIMPLEX_BUDGET if budget is None else budget
    if not 0 <= max_dim <= MAX_SIMPLEX_DIM:
        raise InputError(f"max_dim must be in 0..{MAX_SIMPLEX_DIM}, got {max_dim}")
    dist = distance_matrix(points) if distances is None else np.asarray(distances, dtype=float)
    n = len(dist)
    if n < 2:
        raise InputError(f"Need at least 2 points, got {n}")

    d = dist.tolist()
    entries: List[Tuple[float, int, Simplex]] = [(0.0, 0, (i,)) for i in range(n)]
    count = n

    upper: List[set] = [set() for _ in range(n)]
    layer: List[Tuple[Simplex, float]] = []
    if max_dim >= 1:
        for i in range(n):
            row = d[i]
            for j in range(i + 1, n):
                if row[j] <= max_diameter:
                    upper[i].add(j)
                    layer.append(((i, j), row[j]))
        count += len(layer)
        if count > budget:
            raise TooLarge(count, budget, dimension=1)
        entries.extend((diam, 1, s) for s, diam in layer)

    for dim in range(2, max_dim + 1):
        nxt: List[Tuple[Simplex, float]] = []
        for simplex, diam in layer:
            common = set.intersection(*(upper[v] for v in simplex))
            for v in sorted(common):
                grown = max(diam, max(d[u][v] for u in simplex))
                nxt.append((simplex + (v,), grown))
            if count + len(nxt) > budget:
                raise TooLarge(count + len(nxt), budget, dimension=dim)
        count += len(nxt)
        entries.extend((diam, dim, s) for s, diam in nxt)
        layer = nxt

    entries.sort()
    logger.info(
        f"[Rips] {n} points, max_dim={max_dim}, max_diameter={max_diameter:.6g}: {count} simplices"
    )
    return Filtration(
        simplices=tuple(s for _, _, s in entries),
        diameters=tuple(diam for diam, _, _ in entries),
        max_dim=max_dim,
        max_diameter=float(max_diameter),
    )


@dataclass
class DimensionDiagram:
    pairs: List[Tuple[float, float]] = field(default_factory=list)
    infinite: List[float] = field(default_factory=list)
    zero_persistence: int = 0


@dataclass
class PersistenceDiagram:
    dims: Dict[int, DimensionDiagram]
    simplex_count: int
    max_diameter: float

    @property
    def top_dim(self) -> int:
        return max(self.dims) if self.dims else -1

    def dim(self, k: int) -> DimensionDiagram:
        return self.dims.get(k, DimensionDiagram())

    def simplex_balance(self) -> int:
        """Simplices accounted for: two per pair, one per essential class."""
        return sum(2 * (len(g.pairs) + g.zero_persistence) + len(g.infinite) for g in self.dims.values())

    def restricted(self, max_dim: int) -> "PersistenceDiagram":
        """Drops dimensions above max_dim, whose classes the filtration cannot kill."""
        return PersistenceDiagram(
            dims={k: g for k, g in self.dims.items() if k <= max_dim},
            simplex_count=self.simplex_count,
            max_diameter=self.max_diameter,
        )


def _faces(simplex: Simplex):
    if len(simplex) == 1:
        return ()
    return combinations(simplex, len(simplex) - 1)


def _coboundaries(simplices: Sequence[Simplex], top: int) -> Dict[int, List[int]]:
    index = {s: i for i, s in enumerate(simplices) if len(s) - 1 < top}
    cob: Dict[int, List[int]] = {}
    for j, s in enumerate(simplices):
        for f in _faces(s):
            cob.setdefault(index[f], []).append(j)
    return cob


def persistent_homology(filtration: Filtration) -> PersistenceDiagram:
    """Reduces coboundary columns with clearing, lowest dimension first.

    A k-simplex column whose earliest surviving coface is tau pairs the
    simplex (birth) with tau (death); these are the pairs of the boundary
    reduction. Simplices left unpaired carry the essential classes.
    """
    simplices = filtration.simplices
    diam = filtration.diameters
    by_dim: Dict[int, List[int]] = {}
    for i, s in enumerate(simplices):
        by_dim.setdefault(len(s) - 1, []).append(i)
    top = max(by_dim) if by_dim else 0
    cob = _coboundaries(simplices, top)

    owner: Dict[int, int] = {}
    reduced: Dict[int, set] = {}
    pairs: List[Tuple[int, int]] = []
    essential: List[int] = []

    for k in range(top):
        for i in reversed(by_dim.get(k, ())):
            if i in owner:
                # already a death one dimension down
                continue
            column = set(cob.get(i, ()))
            while column:
                low = min(column)
                other = owner.get(low)
                if other is None:
                    owner[low] = i
                    reduced[i] = column
                    pairs.append((i, low))
                    break
                column ^= reduced[other]
            else:
                essential.append(i)
    essential.extend(i for i in by_dim.get(top, ()) if i not in owner)

    dims = {k: DimensionDiagram() for k in range(top + 1)}
    for birth, death in pairs:
        g = dims[len(simplices[birth]) - 1]
        if diam[birth] < diam[death]:
            g.pairs.append((diam[birth], diam[death]))
        else:
            g.zero_persistence += 1
    for i in essential:
        dims[len(simplices[i]) - 1].infinite.append(diam[i])

    for g in dims.values():
        g.pairs.sort()
        g.infinite.sort()

    diagram = PersistenceDiagram(dims=dims, simplex_count=len(simplices), max_diameter=filtration.max_diameter)
    logger.debug(f"[Persistence] {len(pairs)} pairs over {len(simplices)} simplices")
    return diagram


def betti_in_window(diagram: PersistenceDiagram, r: float) -> List[int]:
    out = []
    for k in range(diagram.top_dim + 1):
        g = diagram.dim(k)
        alive = sum(1 for b, d in g.pairs if b <= r < d)
        alive += sum(1 for b in g.infinite if b <= r)
        out.append(alive)
    return out


@dataclass(frozen=True)
class ScaleChoice:
    dim: int
    r: float
    window: Tuple[float, float]
    betti: Tuple[int, ...]
    claimed: int
    ratio: float

    def significant(self, threshold: Optional[float] = None) -> bool:
        threshold = settings.SIGNIFICANCE_RATIO if threshold is None else threshold
        return self.claimed > 0 and self.ratio >= threshold


def select_scale(diagram: PersistenceDiagram, dim: int) -> ScaleChoice:
    """Picks r in the widest stretch of scales where dimension-dim classes live
    and no dimension-dim event happens, then scores the classes alive there
    against the strongest one left out."""
    cap = diagram.max_diameter
    g = diagram.dim(dim)
    classes = list(g.pairs) + [(b, math.inf) for b in g.infinite]

    events = {0.0, cap}
    for b, d in classes:
        events.add(b)
        if d <= cap:
            events.add(d)
    events = sorted(e for e in events if e <= cap)

    best: Optional[Tuple[float, float]] = None
    for lo, hi in zip(events, events[1:]):
        mid = 0.5 * (lo + hi)
        if not any(b <= mid < d for b, d in classes):
            continue
        if best is None or hi - lo > best[1] - best[0]:
            best = (lo, hi)

    if best is None:
        r = 0.5 * cap
        return ScaleChoice(dim, r, (0.0, cap), tuple(betti_in_window(diagram, r)), 0, 0.0)

    r = 0.5 * (best[0] + best[1])
    claimed = [min(d, cap) - b for b, d in classes if b <= r < d]
    others = [min(d, cap) - b for b, d in classes if not (b <= r < d)]
    runner_up = max(others, default=0.0)
    ratio = math.inf if runner_up <= 0 else min(claimed) / runner_up
    return ScaleChoice(dim, r, best, tuple(betti_in_window(diagram, r)), len(claimed), ratio)


def component_count(distances: np.ndarray, r: float) -> int:
    """Connected components of the graph joining points at distance <= r."""
    adjacency = csr_matrix(np.asarray(distances) <= r)
    count, _ = connected_components(adjacency, directed=False)
    return int(count)
