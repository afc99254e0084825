"""Certificates that the fold loops are non-contractible and sit in cl(M°)."""
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve

from linkfold.config import settings
from linkfold.errors import (
    InitialResidualTooLarge,
    InputError,
    NoConvergence,
    NonIntegralWinding,
    ProjectionError,
    SingularGeometry,
    UndersampledLoop,
)
from linkfold.services.foldgen import CounterexampleLayout, sample_loop
from linkfold.services.geometry import Classification, classify
from linkfold.services.linkage import (
    TAU,
    Configuration,
    Linkage,
    TorusPoint,
    _configuration_unchecked,
    alpha_map,
    config_distance,
)

logger = logging.getLogger(__name__)

JUMP_LIMIT = math.pi - 0.1
RESIDUE_LIMIT = 0.01
MIN_DEGREE_SAMPLES = 256


def _principal(x):
    """Reduces angle differences into [-pi, pi)."""
    return (np.asarray(x) + math.pi) % TAU - math.pi


def unwrap_angles(seq: Sequence[float]) -> np.ndarray:
    angles = np.asarray(seq, dtype=float)
    if angles.size < 2:
        return angles.copy()
    steps = _principal(np.diff(angles))
    jumps = np.flatnonzero(np.abs(steps) >= JUMP_LIMIT)
    if jumps.size:
        k = int(jumps[0])
        raise UndersampledLoop(f"Jump of {abs(steps[k]):.4f} rad between samples {k} and {k + 1}")
    return np.concatenate(([angles[0]], angles[0] + np.cumsum(steps)))


def winding_with_residue(seq: Sequence[float]) -> Tuple[int, float]:
    """Winding of a closed sampled loop and its distance from an integer."""
    angles = np.asarray(seq, dtype=float)
    if angles.size == 0:
        return 0, 0.0
    lifted = unwrap_angles(angles)
    closing = float(_principal(angles[0] - angles[-1]))
    if abs(closing) >= JUMP_LIMIT:
        raise UndersampledLoop(f"Closing jump of {abs(closing):.4f} rad")
    turns = (lifted[-1] - lifted[0] + closing) / TAU
    k = int(round(turns))
    residue = abs(turns - k)
    if residue >= RESIDUE_LIMIT:
        raise NonIntegralWinding(f"Total turning {turns:.6f} is not an integer")
    return k, residue


def winding_number(seq: Sequence[float]) -> int:
    return winding_with_residue(seq)[0]


@dataclass(frozen=True)
class DegreeMatrix:
    entries: Tuple[Tuple[int, ...], ...]
    max_residue: float
    samples: int

    @property
    def m(self) -> int:
        return len(self.entries)

    def is_signed_identity(self) -> bool:
        for i, row in enumerate(self.entries):
            for j, value in enumerate(row):
                if i == j and abs(value) != 1:
                    return False
                if i != j and value != 0:
                    return False
        return True


def degree_matrix(layout: CounterexampleLayout, samples: int, off_axis: Optional[float] = None) -> DegreeMatrix:
    if samples < MIN_DEGREE_SAMPLES:
        raise InputError(f"Degree matrix needs at least {MIN_DEGREE_SAMPLES} samples per loop, got {samples}")
    off_axis = settings.OFF_AXIS_T if off_axis is None else off_axis
    m = layout.m
    others = [off_axis] * m
    triples = layout.angle_triples

    entries = [[0] * m for _ in range(m)]
    worst = 0.0
    for j in range(m):
        loop = sample_loop(layout, j, samples, others)
        angles = np.array([alpha_map(c, triples).angles for _, c in loop])
        for i in range(m):
            k, residue = winding_with_residue(angles[:, i])
            entries[i][j] = k
            worst = max(worst, residue)
        logger.debug(f"[Degree] loop {j + 1}/{m}: column {[entries[i][j] for i in range(m)]}")

    return DegreeMatrix(entries=tuple(tuple(r) for r in entries), max_residue=worst, samples=samples)


@dataclass
class Profile:
    """Classification tally over a sample set."""
    counts: Dict[Classification, int] = field(default_factory=lambda: {c: 0 for c in Classification})
    non_embedded: List[Tuple[Tuple[float, ...], Classification]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def as_dict(self) -> Dict[str, int]:
        return {
            "embedded": self.counts[Classification.EMBEDDED],
            "self_touching": self.counts[Classification.SELF_TOUCHING],
            "crossing": self.counts[Classification.CROSSING],
        }

    def matches_loop_contract(self) -> bool:
        """One self-touching sample at t = 0, the rest embedded."""
        if self.counts[Classification.CROSSING] or self.counts[Classification.SELF_TOUCHING] != 1:
            return False
        (param, _), = self.non_embedded
        return param[0] == 0.0

    def matches_grid_contract(self, grid: Sequence[int]) -> bool:
        """Self-touching exactly where some coordinate is 0, embedded elsewhere."""
        if self.counts[Classification.CROSSING]:
            return False
        interior = math.prod(g - 1 for g in grid)
        if self.counts[Classification.EMBEDDED] != interior:
            return False
        return all(0.0 in param for param, _ in self.non_embedded)


def _parameters(key) -> Tuple[float, ...]:
    if isinstance(key, TorusPoint):
        return key.parameters
    if isinstance(key, (tuple, list)):
        return tuple(float(t) for t in key)
    return (float(key),)


def embeddedness_profile(samples, eps: Optional[float] = None) -> Profile:
    profile = Profile()
    for key, config in samples:
        label = classify(config, eps)
        profile.counts[label] += 1
        if label is not Classification.EMBEDDED:
            profile.non_embedded.append((_parameters(key), label))
    logger.info(f"[Profile] {profile.as_dict()} over {profile.total} samples")
    return profile


def _bar_state(x: np.ndarray, lengths: np.ndarray):
    edges = np.roll(x, -1, axis=0) - x
    norms = np.hypot(edges[:, 0], edges[:, 1])
    return edges, norms, norms - lengths


def _length_jacobian(edges: np.ndarray, norms: np.ndarray) -> np.ndarray:
    n = len(norms)
    units = edges / norms[:, None]
    jac = np.zeros((n, 2 * n))
    for i in range(n):
        nxt = (i + 1) % n
        jac[i, 2 * i:2 * i + 2] -= units[i]
        jac[i, 2 * nxt:2 * nxt + 2] += units[i]
    return jac


def _minimum_norm_step(jac: np.ndarray, residual: np.ndarray) -> np.ndarray:
    gram = jac @ jac.T
    try:
        y = cho_solve(cho_factor(gram), residual)
        if not np.all(np.isfinite(y)):
            raise LinAlgError("non-finite Cholesky solve")
    except LinAlgError:
        damping = 1e-10 * max(1.0, float(np.trace(gram)) / len(residual))
        y = solve(gram + damping * np.eye(len(residual)), residual, assume_a="pos")
    return -(jac.T @ y)


def project_to_lengths(
    points,
    linkage: Linkage,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> Configuration:
    """Gauss-Newton projection of a polygon onto the length constraints.

    Each step is the minimum-norm correction, so the result stays close to
    the input. Returns the input untouched when it already satisfies tol.
    """
    tol = settings.PROJECTION_TOL if tol is None else tol
    max_iter = settings.PROJECTION_MAX_ITER if max_iter is None else max_iter
    lengths = linkage.as_array()
    x = np.array(points, dtype=float).reshape(linkage.n, 2)

    edges, norms, residual = _bar_state(x, lengths)
    initial = float(np.max(np.abs(residual) / lengths))
    if initial >= settings.PROJECTION_MAX_INITIAL:
        raise InitialResidualTooLarge(f"Relative residual {initial:.3g} is too far from the constraint set")

    for iteration in range(max_iter + 1):
        worst = float(np.max(np.abs(residual) / lengths))
        if worst <= tol:
            logger.debug(f"[Projection] converged in {iteration} iteration(s), residual {worst:.2e}")
            return _configuration_unchecked(x, linkage)
        if iteration == max_iter:
            break
        if float(norms.min()) <= settings.ABS_TOL:
            raise SingularGeometry("A bar collapsed to a point during projection")
        x = x + _minimum_norm_step(_length_jacobian(edges, norms), residual).reshape(-1, 2)
        edges, norms, residual = _bar_state(x, lengths)

    raise NoConvergence(f"No convergence in {max_iter} iterations (residual {worst:.2e})")


class ClosureVerdict(str, Enum):
    FOUND = "found"
    NONE = "none"


@dataclass(frozen=True)
class ClosureEvidence:
    verdict: ClosureVerdict
    witness: Optional[Configuration]
    distance: Optional[float]
    trials: int
    seed: int


def closure_evidence(
    config: Configuration,
    trials: Optional[int] = None,
    delta: Optional[float] = None,
    rng_seed: Optional[int] = None,
    eps: Optional[float] = None,
) -> ClosureEvidence:
    """Searches for an embedded configuration within a few delta of config.

    Trial k draws from its own generator seeded with (rng_seed, k), so the
    first success does not depend on how trials are scheduled.
    """
    trials = settings.CLOSURE_TRIALS if trials is None else trials
    delta = settings.CLOSURE_DELTA if delta is None else delta
    rng_seed = settings.SEED if rng_seed is None else rng_seed
    if rng_seed < 0:
        raise InputError(f"Seed must be non-negative, got {rng_seed}")
    if classify(config, eps) is Classification.EMBEDDED:
        return ClosureEvidence(ClosureVerdict.FOUND, config, 0.0, 0, rng_seed)

    limit = settings.CLOSURE_ACCEPT_FACTOR * delta
    base = config.vertices
    failures = 0
    for k in range(trials):
        rng = np.random.default_rng([rng_seed, k])
        noisy = base + rng.uniform(-delta, delta, size=base.shape)
        try:
            candidate = project_to_lengths(noisy, config.linkage)
        except ProjectionError:
            failures += 1
            continue
        if classify(candidate, eps) is not Classification.EMBEDDED:
            continue
        distance = config_distance(config, candidate)
        if distance <= limit:
            logger.info(f"[Closure] witness at trial {k + 1}, distance {distance:.3e}")
            return ClosureEvidence(ClosureVerdict.FOUND, candidate, distance, k + 1, rng_seed)

    logger.warning(f"[Closure] no witness in {trials} trials ({failures} projections failed)")
    return ClosureEvidence(ClosureVerdict.NONE, None, None, trials, rng_seed)
