import numpy as np
import pytest

from artgas.channel import (
    ChannelError,
    LinkBudget,
    PathLossParams,
    cap_frame_received,
    narrowband_path_loss_db,
    path_loss_db,
    shadow,
)


def test_path_loss_frozen_values():
    assert path_loss_db(1000, 2400) == pytest.approx(-82.9798, abs=1e-3)
    assert path_loss_db(150, 2400) == pytest.approx(-60.2399, abs=1e-3)


def test_shadow_adds_linearly():
    assert path_loss_db(500, 2400, shadow_draw=3.0) == pytest.approx(path_loss_db(500, 2400) + 3.0)


@pytest.mark.parametrize("d", [0, -1, 100, 1200])
def test_distance_range(d):
    with pytest.raises(ChannelError):
        path_loss_db(d, 2400)


def test_link_budget():
    b = LinkBudget()
    assert b.margin_db == 85
    assert cap_frame_received(-82.98, b)
    assert not cap_frame_received(-90.0, b)
    assert cap_frame_received(-85.0, b)


def test_budget_validation():
    with pytest.raises(ChannelError):
        LinkBudget(-90, -85)


def test_shadow_spread():
    rng = np.random.default_rng(5)
    draws = np.array([shadow(PathLossParams(), rng) for _ in range(100_000)])
    assert draws.std() == pytest.approx(4.12, rel=0.02)
    assert abs(draws.mean()) < 0.05


def test_zero_sigma_is_deterministic():
    assert shadow(PathLossParams(shadow_sigma_db=0), np.random.default_rng(0)) == 0.0


def test_narrowband_form():
    p = PathLossParams(a=-20.0, b=-30.0, c=5.0)
    assert narrowband_path_loss_db(100, p) == pytest.approx(-65.0)
    with pytest.raises(ChannelError):
        narrowband_path_loss_db(100, PathLossParams())
