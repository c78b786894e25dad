"""
Tests for confidence scoring, the edit rule and the single-region edits.
"""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from core.config.models import EditConfig
from core.exceptions import (
    DegenerateCenterError,
    DimensionMismatchError,
    EmptyMembersError,
    EmptyRegionSetError,
    InvalidDistributionError,
    NotUnitNormError,
)
from core.regions.geometry import (
    angular_distance,
    apply_expand,
    apply_update,
    compute_radius,
    confidence,
    decide_edit,
    nearest_rank_index,
    normalize,
    route,
    softmax,
)
from core.regions.types import EditAction, Region, RegionSet
from tests.helpers import planar, unit


def test_nearest_rank_index():
    """Test ceil(q*n)-th smallest, 0-based."""
    assert nearest_rank_index(0.9, 10) == 8
    assert nearest_rank_index(1.0, 10) == 9
    assert nearest_rank_index(0.5, 4) == 1
    assert nearest_rank_index(0.01, 4) == 0
    assert nearest_rank_index(0.3, 10) == 2


def test_compute_radius_nearest_rank():
    """Test the radius on ten members at known angles."""
    angles = [0.01 * (i + 1) for i in range(10)]
    members = [planar(a) for a in angles]
    assert compute_radius(members, planar(0.0), 0.9) == pytest.approx(0.09)
    assert compute_radius(members, planar(0.0), 1.0) == pytest.approx(0.10)


def test_compute_radius_single_member():
    assert compute_radius([planar(0.0)], planar(0.0), 0.9) == 0.0


def test_compute_radius_errors():
    with pytest.raises(EmptyMembersError):
        compute_radius([], planar(0.0), 0.9)
    with pytest.raises(ValueError):
        compute_radius([planar(0.0)], planar(0.0), 0.0)
    with pytest.raises(NotUnitNormError):
        compute_radius([[2.0, 0.0, 0.0]], planar(0.0), 0.9)


def test_angular_distance_clamps():
    a = unit(1, 0, 0)
    assert angular_distance(a, a) == 0.0
    assert angular_distance(a, -a) == pytest.approx(math.pi)


def test_confidence_scores_are_cosines(axis_regions):
    v = unit(1, 1, 0)
    scores, probs = confidence(axis_regions, v)
    assert scores == pytest.approx([1 / math.sqrt(2), 1 / math.sqrt(2), 0.0])
    assert probs.sum() == pytest.approx(1.0)
    assert probs[0] == pytest.approx(probs[1])


def test_confidence_errors(axis_regions, edit_config):
    with pytest.raises(EmptyRegionSetError):
        confidence(RegionSet(regions=(), dim=3, config=edit_config), unit(1, 0, 0))
    with pytest.raises(DimensionMismatchError):
        confidence(axis_regions, unit(1, 0))
    with pytest.raises(NotUnitNormError):
        confidence(axis_regions, [1.0, 1.0, 0.0])


def test_route_ties_go_to_lowest_id(axis_regions):
    assert route(axis_regions, unit(1, 1, 0)) == 0
    assert route(axis_regions, unit(0, 1, 1)) == 1
    assert route(axis_regions, unit(0.1, 0.2, 1)) == 2


@given(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=1, max_size=8))
def test_softmax_argmax_matches_score_argmax(scores):
    probs = softmax(scores)
    assert probs.sum() == pytest.approx(1.0)
    assert scores[int(np.argmax(probs))] == pytest.approx(max(scores), abs=1e-12)


def test_decide_edit_actions():
    """Test the three-way gate on hand-picked distributions."""
    config = EditConfig(tau=0.4, delta_min=0.05)
    assert decide_edit([0.7, 0.2, 0.1], config).action is EditAction.UPDATE
    assert decide_edit([0.45, 0.43, 0.12], config).action is EditAction.EXPAND
    assert decide_edit([0.35, 0.33, 0.32], config).action is EditAction.ADD


def test_decide_edit_boundaries():
    """Test that p* == tau is not Add and delta == delta_min is Update."""
    config = EditConfig(tau=0.5, delta_min=0.25)
    decision = decide_edit([0.5, 0.25, 0.25], config)
    assert decision.action is EditAction.UPDATE
    assert decision.margin_delta == pytest.approx(0.25)
    assert decide_edit([0.5, 0.5], config).action is EditAction.EXPAND


def test_decide_edit_single_region():
    """With one region p* is one and the margin equals p*."""
    decision = decide_edit([1.0], EditConfig(tau=0.4, delta_min=0.05), region_ids=[7])
    assert decision.action is EditAction.UPDATE
    assert decision.margin_delta == 1.0
    assert decision.target_region == 7


def test_decide_edit_target_uses_region_ids():
    decision = decide_edit([0.1, 0.8, 0.1], EditConfig(), region_ids=[4, 9, 2])
    assert decision.target_region == 9
    assert decide_edit([0.2, 0.2, 0.6], EditConfig(), region_ids=[4, 9, 2]).target_region == 2


def test_decide_edit_rejects_bad_distributions():
    with pytest.raises(InvalidDistributionError):
        decide_edit([0.5, 0.4], EditConfig())
    with pytest.raises(InvalidDistributionError):
        decide_edit([1.2, -0.2], EditConfig())
    with pytest.raises(InvalidDistributionError):
        decide_edit([], EditConfig())
    with pytest.raises(InvalidDistributionError):
        decide_edit([0.5, 0.5], EditConfig(), region_ids=[1])


def test_decide_edit_grid_is_total():
    """Every (p*, delta) pair on a 41 x 41 grid yields exactly the expected action."""
    config = EditConfig(tau=0.4, delta_min=0.05)
    for p_star in np.linspace(0.0, 1.0, 41):
        for fraction in np.linspace(0.0, 1.0, 41):
            second = min(p_star, 1.0 - p_star) * fraction
            rest = 1.0 - p_star - second
            if p_star <= 0.0 or rest > p_star * 50:
                continue
            tail = int(math.ceil(rest / p_star)) if rest > 0 else 0
            probs = [p_star, second] + ([rest / tail] * tail if tail else [])
            if max(probs) != p_star or abs(sum(probs) - 1.0) > 1e-9:
                continue
            decision = decide_edit(probs, config)
            delta = p_star - sorted(probs)[-2]
            if p_star < config.tau:
                expected = EditAction.ADD
            elif delta >= config.delta_min:
                expected = EditAction.UPDATE
            else:
                expected = EditAction.EXPAND
            assert decision.action is expected
            assert decision.p_star == pytest.approx(p_star)


@settings(max_examples=60)
@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=6).filter(lambda v: sum(v) > 0.1),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=0.5),
)
def test_decide_edit_fires_exactly_one_action(weights, tau, delta_min):
    probs = np.asarray(weights) / sum(weights)
    decision = decide_edit(probs, EditConfig(tau=tau, delta_min=delta_min))
    if decision.action is EditAction.ADD:
        assert decision.p_star < tau and decision.target_region is None
    else:
        assert decision.p_star >= tau
        assert decision.target_region == int(np.argmax(probs))
        assert (decision.action is EditAction.UPDATE) == (decision.margin_delta >= delta_min)


def test_apply_update_moves_radius_and_center():
    """Test the EMA update on a hand-computed planar case."""
    config = EditConfig(beta=0.1, gamma=0.1, r_max=1.2)
    region = Region(id=0, center=planar(0.0), radius=0.2, member_count=3)
    updated = apply_update(region, planar(0.6), config)
    assert updated.radius == pytest.approx(0.9 * 0.2 + 0.1 * 0.6)
    mixed = 0.9 * planar(0.0) + 0.1 * planar(0.6)
    assert updated.center == pytest.approx(mixed / np.linalg.norm(mixed))
    assert updated.member_count == 4
    assert updated.edit_count == 1
    assert region.radius == 0.2  # input untouched


def test_apply_update_clips_radius():
    config = EditConfig(beta=1.0, gamma=0.1, r_max=0.5)
    region = Region(id=0, center=planar(0.0), radius=0.4)
    assert apply_update(region, planar(1.0), config).radius == 0.5


def test_apply_expand_grows_by_overshoot():
    config = EditConfig(lambda_expand=0.5, alpha_expand=0.1, r_max=1.2)
    region = Region(id=1, center=planar(0.0), radius=0.2)
    expanded = apply_expand(region, planar(0.6), config)
    assert expanded.radius == pytest.approx(0.2 + 0.5 * 0.4)
    mixed = 0.9 * planar(0.0) + 0.1 * planar(0.6)
    assert expanded.center == pytest.approx(mixed / np.linalg.norm(mixed))


def test_apply_expand_never_shrinks_and_caps():
    config = EditConfig(lambda_expand=0.5, alpha_expand=0.1, r_max=0.3)
    region = Region(id=1, center=planar(0.0), radius=0.25)
    assert apply_expand(region, planar(0.1), config).radius == 0.25
    assert apply_expand(region, planar(1.5), config).radius == 0.3


@settings(max_examples=50)
@given(st.floats(min_value=0.0, max_value=math.pi - 0.01), st.floats(min_value=0.0, max_value=1.2))
def test_expand_radius_monotone(angle, radius):
    config = EditConfig(r_max=1.2)
    region = Region(id=0, center=planar(0.0), radius=radius)
    expanded = apply_expand(region, planar(angle), config)
    assert radius <= expanded.radius <= config.r_max
    assert np.linalg.norm(expanded.center) == pytest.approx(1.0)


def test_antipodal_update_is_degenerate():
    config = EditConfig(gamma=0.5)
    region = Region(id=0, center=unit(1, 0, 0), radius=0.2)
    with pytest.raises(DegenerateCenterError):
        apply_update(region, unit(-1, 0, 0), config)


raw_vectors = st.lists(
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=3, max_size=3
).filter(lambda v: np.linalg.norm(v) > 0.1)


@settings(max_examples=80, deadline=None)
@given(raw_vectors, st.floats(min_value=1e-3, max_value=1e3))
def test_decisions_ignore_vector_scale(raw, scale):
    config = EditConfig(tau=0.4, delta_min=0.05, buffer_threshold=4)
    region_set = RegionSet(
        regions=(
            Region(id=0, center=unit(1, 0, 0), radius=0.3),
            Region(id=5, center=unit(0, 1, 0), radius=0.3),
            Region(id=9, center=unit(1, 1, 1), radius=0.3),
        ),
        dim=3,
        config=config,
    )
    base = normalize(raw)
    scaled = normalize(np.asarray(raw) * scale)
    assert np.allclose(base, scaled, atol=1e-12)

    scores, probs = confidence(region_set, base)
    _, scaled_probs = confidence(region_set, scaled)
    assert np.allclose(probs, scaled_probs, atol=1e-12)

    decision = decide_edit(probs, config, region_set.ids)
    top_two = np.sort(scores)[-2:]
    assume(top_two[1] - top_two[0] > 1e-9)
    assume(abs(decision.p_star - config.tau) > 1e-9)
    assume(abs(decision.margin_delta - config.delta_min) > 1e-9)
    scaled_decision = decide_edit(scaled_probs, config, region_set.ids)
    assert scaled_decision.action is decision.action
    assert scaled_decision.target_region == decision.target_region
    assert route(region_set, scaled) == route(region_set, base)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.booleans(), raw_vectors), min_size=1, max_size=25))
def test_edit_sequences_keep_centers_unit_norm(steps):
    config = EditConfig()
    region = Region(id=0, center=unit(1, 0, 0), radius=0.3)
    for expand, raw in steps:
        edit = apply_expand if expand else apply_update
        try:
            updated = edit(region, normalize(raw), config)
        except DegenerateCenterError:
            continue
        assert abs(float(np.linalg.norm(updated.center)) - 1.0) <= 1e-6
        assert 0.0 <= updated.radius <= config.r_max
        if expand:
            assert updated.radius >= region.radius
        assert updated.edit_count == region.edit_count + 1
        region = updated
