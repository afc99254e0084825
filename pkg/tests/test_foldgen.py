import math

import numpy as np
import pytest

from linkfold.errors import ConstraintViolation, InputError, InvalidFoldLengths, MalformedInput
from linkfold.services.foldgen import (
    GadgetSpec,
    arc_length_parameters,
    assemble_layout,
    build_counterexample,
    fold_branch_interval,
    fold_chain_at,
    gamma,
    gamma_at,
    layout_margins,
    sample_loop,
    sample_torus,
    validate_fold_lengths,
)
from linkfold.services.geometry import Classification, classify
from linkfold.services.linkage import TorusPoint, alpha_map, config_distance, triple_fold_admissible


def _gadget(start=(0.0, 0.0), angle=0.0, side=1, lengths=(2.0, 1.0, 2.0)):
    d = lengths[0] - lengths[1] + lengths[2]
    start = np.asarray(start, dtype=float)
    end = start + d * np.array([math.cos(angle), math.sin(angle)])
    return GadgetSpec(lengths, start, end, side, (1, 2, 3))


def test_fold_lengths_validation():
    assert validate_fold_lengths([2, 1, 2]) == (2.0, 1.0, 2.0)
    with pytest.raises(InvalidFoldLengths):
        validate_fold_lengths([1, 2, 3])
    with pytest.raises(InvalidFoldLengths):
        validate_fold_lengths([2, 1])


def test_branch_interval_default_lengths():
    assert fold_branch_interval(_gadget()) == pytest.approx(math.acos(1.0 / 3.0))
    assert fold_branch_interval(_gadget()) == pytest.approx(1.23096, abs=1e-5)


def test_fold_chain_special_points():
    g = _gadget()
    a2, a3 = fold_chain_at(g, 0.0)
    assert a2 == pytest.approx([2.0, 0.0])
    assert a3 == pytest.approx([1.0, 0.0])

    phi = math.acos(1.0 / 3.0)
    a2, a3 = fold_chain_at(g, 0.5)
    assert a2 == pytest.approx([2 * math.cos(phi), 2 * math.sin(phi)])
    end = np.array([3.0, 0.0])
    # straight elbow: a3 lies on the segment a2 -> anchor_end, one unit from a2
    assert np.hypot(*(a3 - a2)) == pytest.approx(1.0)
    assert np.hypot(*(end - a3)) + 1.0 == pytest.approx(np.hypot(*(end - a2)))


def test_fold_chain_respects_bar_lengths(rng):
    gadgets = [
        _gadget(),
        _gadget(start=(5.0, -1.0), angle=2.1, side=-1),
        _gadget(start=(-3.0, 2.0), angle=-0.4, side=1, lengths=(2.2, 0.7, 1.9)),
    ]
    for g in gadgets:
        la, lb, lc = g.fold_lengths
        for t in rng.uniform(0.0, 1.0, size=3000):
            a2, a3 = fold_chain_at(g, t)
            assert abs(np.hypot(*(a2 - g.anchor_start)) - la) <= 1e-10 * la
            assert abs(np.hypot(*(a3 - a2)) - lb) <= 1e-10 * lb
            assert abs(np.hypot(*(g.anchor_end - a3)) - lc) <= 1e-10 * lc


def test_moving_joints_stay_on_the_moving_side():
    for side in (1, -1):
        g = _gadget(side=side)
        for k in range(1, 200):
            a2, a3 = fold_chain_at(g, k / 200)
            assert side * a2[1] > 0
            assert side * a3[1] > 0


def test_gadget_rejects_wrong_chord():
    with pytest.raises(ConstraintViolation):
        GadgetSpec((2.0, 1.0, 2.0), np.zeros(2), np.array([2.5, 0.0]), 1, (1, 2, 3))
    with pytest.raises(MalformedInput):
        GadgetSpec((2.0, 1.0, 2.0), np.zeros(2), np.array([3.0, 0.0]), 0, (1, 2, 3))


@pytest.mark.parametrize("m, n", [(1, 5), (2, 10), (3, 15)])
def test_build_counterexample_sizes(m, n):
    layout = build_counterexample(m)
    assert layout.m == m
    assert layout.n == n
    assert layout.angle_triples == tuple((5 * i + 1, 5 * i + 2, 5 * i + 3) for i in range(m))
    assert layout_margins(layout).ok
    for g in layout.gadgets:
        assert triple_fold_admissible(layout.linkage, g.edge_indices[0])


def test_build_counterexample_rejects_bad_requests():
    with pytest.raises(InputError):
        build_counterexample(0)
    with pytest.raises(InvalidFoldLengths):
        build_counterexample(1, (1.0, 2.0, 1.0))


def test_custom_fold_lengths_build():
    layout = build_counterexample(2, (2.2, 0.7, 1.9))
    assert layout.gadgets[0].chord_length == pytest.approx(3.4)
    assert classify(gamma_at(layout, [0.3, 0.6])) is Classification.EMBEDDED


def test_gamma_classification(layout_m2):
    assert classify(gamma_at(layout_m2, [0.25, 0.25])) is Classification.EMBEDDED
    assert classify(gamma_at(layout_m2, [0.0, 0.7])) is Classification.SELF_TOUCHING
    assert classify(gamma_at(layout_m2, [0.0, 0.0])) is Classification.SELF_TOUCHING
    point = TorusPoint.from_parameters([0.5, 0.125])
    assert np.array_equal(gamma(layout_m2, point).vertices, gamma_at(layout_m2, [0.5, 0.125]).vertices)


def test_gamma_keeps_the_base_fixed(layout_m2):
    fixed = list(layout_m2.fixed_indices)
    for ts in ([0.0, 0.0], [0.3, 0.9], [0.5, 0.5]):
        config = gamma_at(layout_m2, ts)
        assert np.array_equal(config.vertices[fixed], layout_m2.base_vertices)
        assert config.max_residual <= 1e-9


def test_sample_loop_holds_other_gadgets_bit_identical(layout_m2):
    loop = sample_loop(layout_m2, 0, 64)
    assert [t for t, _ in loop] == [k / 64 for k in range(64)]
    moving = list(layout_m2.gadgets[1].joint_indices(layout_m2.n))
    first = loop[0][1].vertices[moving]
    assert all(np.array_equal(c.vertices[moving], first) for _, c in loop)


def test_sample_loop_is_continuous_and_closes(layout_m1):
    loop = [c for _, c in sample_loop(layout_m1, 0, 720)]
    steps = [config_distance(a, b) for a, b in zip(loop, loop[1:])]
    closing = config_distance(loop[-1], loop[0])
    assert max(steps) < 0.25
    assert closing < 0.25

    finer = [c for _, c in sample_loop(layout_m1, 0, 1440)]
    assert config_distance(finer[-1], finer[0]) < closing


def test_closing_gap_shrinks_with_the_sample_count(layout_m1):
    def gap(samples):
        loop = sample_loop(layout_m1, 0, samples)
        return config_distance(loop[-1][1], loop[0][1])

    assert 3.0 <= gap(128) / gap(512) <= 5.0


def test_arc_spacing_evens_out_the_steps(layout_m1):
    def spread(spacing):
        loop = [c for _, c in sample_loop(layout_m1, 0, 32, spacing=spacing)]
        steps = [config_distance(a, b) for a, b in zip(loop, loop[1:] + loop[:1])]
        return max(steps) / min(steps)

    assert spread("arc") < 1.15
    assert spread("uniform") > spread("arc")


def test_arc_length_parameters(layout_m1):
    gadget = layout_m1.gadgets[0]
    ts = arc_length_parameters(gadget, 16)
    assert ts[0] == 0.0
    assert np.all(np.diff(ts) > 0) and ts[-1] < 1.0
    shifted = arc_length_parameters(gadget, 16, offset=0.5)
    assert np.all(ts < shifted) and np.all(shifted[:-1] < ts[1:])
    with pytest.raises(InputError):
        arc_length_parameters(gadget, 0)


def test_sampling_preconditions(layout_m1, layout_m2):
    with pytest.raises(InputError):
        sample_loop(layout_m1, 0, 7)
    with pytest.raises(InputError):
        sample_loop(layout_m1, 1, 64)
    with pytest.raises(InputError):
        sample_torus(layout_m2, [3, 8])
    with pytest.raises(InputError):
        sample_torus(layout_m2, [8])


def test_sample_torus_is_row_major(layout_m2):
    samples = sample_torus(layout_m2, [4, 5])
    assert len(samples) == 20
    params = [p.parameters for p, _ in samples]
    assert params[0] == (0.0, 0.0)
    assert params[1] == pytest.approx((0.0, 0.2))
    assert params[5] == pytest.approx((0.25, 0.0))


def test_arc_torus_shifts_alternate_rows(layout_m2):
    samples = sample_torus(layout_m2, [4, 6], spacing="arc")
    assert len(samples) == 24
    params = [p.parameters for p, _ in samples]
    assert params[0] == (0.0, 0.0)
    rows = arc_length_parameters(layout_m2.gadgets[0], 4)
    even = arc_length_parameters(layout_m2.gadgets[1], 6)
    odd = arc_length_parameters(layout_m2.gadgets[1], 6, offset=0.5)
    for r in range(4):
        row = params[6 * r: 6 * r + 6]
        assert [t1 for t1, _ in row] == pytest.approx([rows[r]] * 6)
        assert [t2 for _, t2 in row] == pytest.approx(list(odd if r % 2 else even))

    with pytest.raises(InputError):
        sample_torus(layout_m2, [4, 4], spacing="sideways")


def test_swapped_torus_coordinates_give_the_same_angles(layout_m2, rng):
    triples = layout_m2.angle_triples
    for _ in range(20):
        t1, t2 = rng.uniform(size=2)
        forward = sorted(alpha_map(gamma_at(layout_m2, [t1, t2]), triples).angles)
        swapped = sorted(alpha_map(gamma_at(layout_m2, [t2, t1]), triples).angles)
        assert forward == pytest.approx(swapped, abs=1e-9)


def test_assembled_overlapping_layout_has_no_margin():
    chords = [((0.0, 0.0), (3.0, 0.0)), ((0.5, 0.0), (3.5, 0.0))]
    middles = [(1.75, 3.0), (1.75, 5.0)]
    layout = assemble_layout((2.0, 1.0, 2.0), chords, middles, side=-1)
    assert layout.n == 10
    assert layout_margins(layout).region_gap == 0.0
