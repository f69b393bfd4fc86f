import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvfloor.model import (
    Floorplan,
    InstanceError,
    Module,
    OutlineSpec,
    ProblemInstance,
    bounding_area,
    centers_from_lower_left,
    effective_dims,
    lower_left,
    outline_from_ratio,
    total_module_area,
    whitespace_ratio,
)

from conftest import instance_of, plan_of


@pytest.mark.parametrize(
    "w, h, r, expected",
    [(3, 5, 0, (3, 5)), (3, 5, 1, (5, 3)), (4, 4, 3, (4, 4)), (3, 5, 2, (3, 5)), (3, 5, 3, (5, 3))],
)
def test_effective_dims_swaps_on_odd_codes(w, h, r, expected):
    assert effective_dims(Module(0, w, h), r) == expected


@given(
    w=st.floats(0.1, 100),
    h=st.floats(0.1, 100),
    r=st.integers(0, 3),
)
def test_effective_dims_preserve_area(w, h, r):
    ew, eh = effective_dims(Module(0, w, h), r)
    assert ew * eh == pytest.approx(w * h, rel=1e-12)


def test_total_module_area_examples():
    assert total_module_area(instance_of([(2, 3)])) == 6
    assert total_module_area(instance_of([(2, 3), (1, 1)])) == 7


def test_instance_without_modules_is_rejected():
    with pytest.raises(InstanceError):
        ProblemInstance(modules=())


@pytest.mark.parametrize("w, h", [(0, 1), (1, -2), (math.nan, 1)])
def test_degenerate_module_is_rejected(w, h):
    with pytest.raises(InstanceError):
        Module(0, w, h)


def test_bounding_area_examples():
    one = instance_of([(2, 2)])
    assert bounding_area(one, plan_of([17.5], [-3])) == 4
    two = instance_of([(1, 1), (1, 1)])
    assert bounding_area(two, plan_of([0.5, 2.5], [0.5, 0.5])) == 3
    coincident = instance_of([(2, 2), (2, 2)])
    assert bounding_area(coincident, plan_of([1, 1], [1, 1])) == 4


def test_bounding_area_uses_rotated_extents():
    inst = instance_of([(4, 1), (1, 1)])
    upright = plan_of([2, 4.5], [0.5, 0.5], [0, 0])
    turned = plan_of([0.5, 4.5], [2, 0.5], [1, 0])
    assert bounding_area(inst, upright) == 5 * 1
    assert bounding_area(inst, turned) == 5 * 4


def test_whitespace_ratio_examples():
    # A = 80 + 20 = 100; a 1.5 gap makes the box 11.5 x 10, S = 115
    inst = instance_of([(8, 10), (2, 10)])
    assert whitespace_ratio(inst, plan_of([4, 10.5], [5, 5])) == pytest.approx(0.15)
    assert whitespace_ratio(inst, plan_of([4, 9], [5, 5])) == 0
    # S = 2A: two unit squares spread over a 4 x 1 box
    spread = instance_of([(1, 1), (1, 1)])
    assert whitespace_ratio(spread, plan_of([0.5, 3.5], [0.5, 0.5])) == pytest.approx(1.0)


def test_outline_from_ratio_examples():
    o = outline_from_ratio(100, 1, 0.15)
    assert o.width == pytest.approx(math.sqrt(115))
    assert o.height == pytest.approx(10.7238, abs=5e-5)
    o = outline_from_ratio(100, 4, 0)
    assert (o.width, o.height) == (pytest.approx(5), pytest.approx(20))
    o = outline_from_ratio(1, 1, 0)
    assert (o.width, o.height) == (1, 1)


@pytest.mark.parametrize("area, ratio, gamma", [(0, 1, 0), (-1, 1, 0), (1, 0, 0), (1, 1, -0.1)])
def test_outline_from_ratio_rejects_bad_arguments(area, ratio, gamma):
    with pytest.raises((InstanceError, ValueError)):
        outline_from_ratio(area, ratio, gamma)


@settings(max_examples=200)
@given(
    area=st.floats(1e-3, 1e7),
    ratio=st.floats(0.05, 20),
    gamma=st.floats(0, 3),
)
def test_outline_area_and_aspect(area, ratio, gamma):
    o = outline_from_ratio(area, ratio, gamma)
    assert o.width * o.height == pytest.approx((1 + gamma) * area, rel=1e-9)
    assert o.height / o.width == pytest.approx(ratio, rel=1e-9)
    assert o.width > 0 and o.height > 0


def test_whitespace_of_outline_area_is_gamma():
    inst = instance_of([(3, 7), (2, 2)])
    a = total_module_area(inst)
    o = outline_from_ratio(a, 1.5, 0.15)
    assert (o.area - a) / a == pytest.approx(0.15, rel=1e-12)


def test_floorplan_rejects_bad_orientation_and_lengths():
    with pytest.raises(InstanceError):
        Floorplan(np.zeros(2), np.zeros(2), np.array([0, 4]))
    with pytest.raises(InstanceError):
        Floorplan(np.zeros(2), np.zeros(3))
    with pytest.raises(InstanceError):
        Floorplan(np.array([0.0, math.inf]), np.zeros(2))


def test_floorplan_is_immutable():
    plan = plan_of([1, 2], [3, 4])
    with pytest.raises(ValueError):
        plan.x[0] = 5.0


def test_outline_requires_positive_sides():
    with pytest.raises(InstanceError):
        OutlineSpec(0, 1)


def test_lower_left_round_trip(rng):
    inst = instance_of([(3, 5), (2, 7), (4, 4)])
    plan = plan_of(rng.uniform(0, 9, 3), rng.uniform(0, 9, 3), [1, 2, 3])
    xl, yl = lower_left(inst, plan)
    back = centers_from_lower_left(inst, xl, yl, plan.r)
    np.testing.assert_allclose(back.x, plan.x, rtol=0, atol=1e-12)
    np.testing.assert_allclose(back.y, plan.y, rtol=0, atol=1e-12)
    # module 0 (3 x 5) at code 1 is 5 wide
    assert plan.x[0] - xl[0] == pytest.approx(2.5)
