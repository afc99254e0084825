"""Pipelines behind the CLI subcommands."""
import math
import time
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from linkfold.config import settings
from linkfold.errors import CertificateError, InputError, TooLarge
from linkfold.models import (
    BettiDoc,
    CertificateDoc,
    ClosureDoc,
    DegreeDoc,
    ProfileDoc,
    ScaleDoc,
)
from linkfold.services.documents import diagram_to_doc
from linkfold.services.foldgen import (
    CounterexampleLayout,
    build_counterexample,
    gamma_at,
    layout_margins,
    sample_loop,
    sample_torus,
)
from linkfold.services.geometry import Classification, SegmentRelation, contacts
from linkfold.services.homology import (
    Filtration,
    component_count,
    default_max_diameter,
    distance_matrix,
    persistent_homology,
    select_scale,
    vr_filtration,
)
from linkfold.services.linkage import Linkage, is_realizable, triple_fold_admissible
from linkfold.services.witness import (
    ClosureVerdict,
    Profile,
    closure_evidence,
    degree_matrix,
    embeddedness_profile,
)

logger = logging.getLogger(__name__)

REPORTED_SAMPLES = 50


@dataclass
class Outcome:
    outputs: dict
    ok: bool = True
    timings: Dict[str, float] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


@contextmanager
def _timed(timings: Dict[str, float], stage: str):
    started = time.perf_counter()
    try:
        yield
    finally:
        timings[stage] = round(time.perf_counter() - started, 6)


def run_check(linkage: Linkage) -> Outcome:
    starts = [
        {"start": k + 1, "admissible": triple_fold_admissible(linkage, k)}
        for k in range(linkage.n)
    ]
    return Outcome(outputs={
        "n": linkage.n,
        "realizable": is_realizable(linkage),
        "starts": starts,
        "admissible_starts": [s["start"] for s in starts if s["admissible"]],
    })


def run_build(m: int, fold_lengths: Optional[Sequence[float]] = None) -> Outcome:
    timings: Dict[str, float] = {}
    with _timed(timings, "build"):
        layout = build_counterexample(m, fold_lengths)
        margins = layout_margins(layout)
    return Outcome(
        outputs={
            "m": layout.m,
            "n": layout.n,
            "margins": {"region_gap": _finite(margins.region_gap), "base_gap": _finite(margins.base_gap)},
        },
        timings=timings,
        extra={"layout": layout, "margins": margins},
    )


def _finite(x: float) -> Optional[float]:
    return None if math.isinf(x) else x


def _profile_doc(profile: Profile, layout: CounterexampleLayout, expected: bool) -> ProfileDoc:
    listed = []
    for params, label in profile.non_embedded[:REPORTED_SAMPLES]:
        entry = {"t": list(params), "class": label.value}
        if label is Classification.CROSSING and len(params) == layout.m:
            crossing = [
                [c.first + 1, c.second + 1]
                for c in contacts(gamma_at(layout, params))
                if c.relation is SegmentRelation.PROPER_CROSS
            ]
            entry["crossing_bars"] = crossing
        listed.append(entry)
    return ProfileDoc(**profile.as_dict(), non_embedded=listed, expected=expected)


def _grid_counts(grid: Sequence[int], m: int) -> List[int]:
    grid = list(grid)
    if len(grid) == 1:
        return grid * m
    if len(grid) != m:
        raise InputError(f"--grid needs 1 or {m} counts, got {len(grid)}")
    return grid


def run_certify(
    layout: CounterexampleLayout,
    samples: int,
    grid: Sequence[int],
    seed: int,
    trials: Optional[int] = None,
    delta: Optional[float] = None,
) -> Outcome:
    timings: Dict[str, float] = {}
    failures: List[str] = []
    m = layout.m
    grid = _grid_counts(grid, m)
    off_axis = [settings.OFF_AXIS_T] * m

    loop_docs = []
    with _timed(timings, "loop_profiles"):
        for i in range(m):
            profile = embeddedness_profile(sample_loop(layout, i, samples, off_axis))
            ok = profile.matches_loop_contract()
            if not ok:
                failures.append(f"loop {i + 1} profile {profile.as_dict()}")
            loop_docs.append(_loop_doc(profile, layout, i, off_axis, ok))

    with _timed(timings, "grid_profile"):
        profile = embeddedness_profile(sample_torus(layout, grid))
        grid_ok = profile.matches_grid_contract(grid)
        if not grid_ok:
            failures.append(f"grid profile {profile.as_dict()}")
        grid_doc = _profile_doc(profile, layout, grid_ok)

    with _timed(timings, "degree"):
        try:
            degree = degree_matrix(layout, samples)
            degree_doc = DegreeDoc(
                entries=[list(r) for r in degree.entries],
                samples=degree.samples,
                max_residue=degree.max_residue,
                signed_identity=degree.is_signed_identity(),
            )
        except CertificateError as e:
            logger.warning(f"[Certify] degree certificate failed: {e}")
            degree_doc = DegreeDoc(entries=[], samples=samples, max_residue=1.0, signed_identity=False)
            failures.append(f"degree: {e}")
        if degree_doc.entries and not degree_doc.signed_identity:
            failures.append(f"degree matrix {degree_doc.entries} is not a signed identity")

    with _timed(timings, "closure"):
        aligned = gamma_at(layout, [0.0] * m)
        evidence = closure_evidence(aligned, trials=trials, delta=delta, rng_seed=seed)
        closure_doc = ClosureDoc(
            verdict=evidence.verdict.value,
            distance=evidence.distance,
            trials=evidence.trials,
            seed=evidence.seed,
        )
        if evidence.verdict is not ClosureVerdict.FOUND:
            failures.append("no embedded configuration near the aligned fold")

    for failure in failures:
        logger.warning(f"[Certify] {failure}")
    if not failures:
        logger.info(f"[Certify] m={m}: all certificates hold")

    doc = CertificateDoc(
        degree_matrix=degree_doc.entries,
        degree=degree_doc,
        profile=grid_doc,
        loop_profiles=loop_docs,
        closure=closure_doc,
        failures=failures,
    )
    return Outcome(outputs=doc.model_dump(mode="json"), ok=not failures, timings=timings)


def _loop_doc(profile: Profile, layout: CounterexampleLayout, i: int, off_axis: List[float], ok: bool) -> ProfileDoc:
    # loop samples are keyed by their own t; expand to full torus coordinates
    expanded = Profile(counts=dict(profile.counts))
    for (t,), label in profile.non_embedded:
        ts = list(off_axis)
        ts[i] = t
        expanded.non_embedded.append((tuple(ts), label))
    return _profile_doc(expanded, layout, ok)


def _expected_betti(mode: str, m: int, max_dim: int) -> List[int]:
    if mode == "loop":
        return [1, 1] + [0] * (max_dim - 1) if max_dim >= 1 else [1]
    return [math.comb(m, k) for k in range(max_dim + 1)]


def run_betti(
    layout: CounterexampleLayout,
    mode: str,
    points: int,
    grid: Sequence[int],
    max_dim: int,
    budget: Optional[int] = None,
    max_diameter: Optional[float] = None,
    skip_over_budget: bool = False,
    spacing: Optional[str] = None,
) -> Outcome:
    spacing = settings.BETTI_SPACING if spacing is None else spacing
    if mode not in ("loop", "torus"):
        raise InputError(f"mode must be loop or torus, got {mode}")
    if not 0 <= max_dim <= 2:
        raise InputError(f"max_dim must be 0, 1 or 2, got {max_dim}")
    timings: Dict[str, float] = {}

    with _timed(timings, "sampling"):
        if mode == "loop":
            cloud = [c for _, c in sample_loop(layout, 0, points, spacing=spacing)]
            factors = 1
        else:
            cloud = [c for _, c in sample_torus(layout, _grid_counts(grid, layout.m), spacing=spacing)]
            factors = layout.m
        distances = distance_matrix(cloud)
        cap = max_diameter if max_diameter is not None else default_max_diameter(distances, factors)

    skipped: List[int] = []
    filtration: Optional[Filtration] = None
    with _timed(timings, "filtration"):
        while filtration is None:
            try:
                filtration = vr_filtration(cloud, cap, max_dim + 1, budget=budget, distances=distances)
            except TooLarge as e:
                if not skip_over_budget or max_dim == 0:
                    raise
                logger.warning(f"[Betti] H_{max_dim} skipped: {e}")
                skipped.append(max_dim)
                max_dim -= 1

    with _timed(timings, "reduction"):
        # the top simplices only kill H_max_dim classes; their own dimension is not reported
        diagram = persistent_homology(filtration).restricted(max_dim)

    scales = [select_scale(diagram, k) for k in range(1, max_dim + 1)] or [select_scale(diagram, 0)]
    betti = list(scales[0].betti[:1])
    for choice in scales:
        if choice.dim >= 1:
            betti.append(choice.betti[choice.dim])
    expected = _expected_betti(mode, layout.m, max_dim)

    doc = BettiDoc(
        mode=mode,
        spacing=spacing,
        points=len(cloud),
        max_dim=max_dim,
        max_diameter=cap,
        simplices=len(filtration),
        components=component_count(distances, cap),
        betti=betti,
        expected=expected,
        scales=[
            ScaleDoc(
                k=s.dim,
                r=s.r,
                window=s.window,
                claimed=s.claimed,
                ratio=None if math.isinf(s.ratio) else s.ratio,
                significant=s.significant(),
            )
            for s in scales
        ],
        skipped=skipped,
        diagram=diagram_to_doc(diagram),
    )
    significant = all(s.significant() for s in scales)
    logger.info(f"[Betti] {mode}: betti={betti} expected={expected} significant={significant} skipped={skipped}")
    return Outcome(
        outputs=doc.model_dump(mode="json"),
        ok=betti == expected and significant,
        timings=timings,
        extra={"filtration": filtration, "diagram": diagram},
    )
