import numpy as np
import pytest
from hypothesis import given, strategies as st

from holosec.geometry import ArrayGeometry, antenna_positions, distance


def test_single_element_sits_at_reference():
    pos = antenna_positions(ArrayGeometry(1, 1, 0.25, (0, 0, 0)))
    np.testing.assert_array_equal(pos, [[0, 0, 0]])


def test_two_by_two_indexing():
    pos = antenna_positions(ArrayGeometry(2, 2, 0.25))
    np.testing.assert_allclose(pos, [[0, 0, 0], [0.25, 0, 0], [0, 0.25, 0], [0.25, 0.25, 0]])


def test_default_alice_aperture():
    assert ArrayGeometry(20, 20, 0.25).aperture == (5.0, 5.0)


def test_reference_offsets_positions():
    pos = antenna_positions(ArrayGeometry(3, 2, 0.5, (40.0, -20.0, 0.0)))
    assert pos[0].tolist() == [40.0, -20.0, 0.0]
    assert pos[4].tolist() == [40.5, -19.5, 0.0]


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_x=0, n_y=1), dict(n_x=2, n_y=-1), dict(n_x=2, n_y=2, spacing=0.6), dict(n_x=2, n_y=2, spacing=0.0)],
)
def test_invalid_geometry_rejected(kwargs):
    with pytest.raises(ValueError):
        ArrayGeometry(**kwargs)


def test_half_counts_do_not_round_up_integers():
    assert ArrayGeometry(20, 20, 0.25).half_counts == (5, 5)
    assert ArrayGeometry(20, 20, 0.125).half_counts == (3, 3)
    assert ArrayGeometry(10, 10, 0.125).half_counts == (2, 2)


def test_distance_between_first_elements():
    a = ArrayGeometry(20, 20, 0.25)
    b = ArrayGeometry(10, 10, 0.25, (40.0, -20.0, 0.0))
    assert distance(a, b) == pytest.approx(np.hypot(40, 20))


@given(
    st.integers(1, 12),
    st.integers(1, 12),
    st.sampled_from([0.125, 0.25, 0.3, 0.5]),
)
def test_positions_form_regular_planar_grid(nx, ny, d):
    pos = antenna_positions(ArrayGeometry(nx, ny, d, (1.0, 2.0, 3.0)))
    assert pos.shape == (nx * ny, 3)
    assert np.all(pos[:, 2] == 3.0)
    steps = (pos[:, :2] - pos[0, :2]) / d
    np.testing.assert_allclose(steps, np.round(steps), atol=1e-9)
    assert len({tuple(np.round(p, 9)) for p in pos}) == nx * ny
