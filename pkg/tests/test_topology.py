import numpy as np
import pytest
from hypothesis import given, strategies as st

from mclds.chanmgmt import ChannelLists
from mclds.config import ScenarioConfig
from mclds.topology import NoSensorsError, assign_sensors, build_topology, hex_centers


def test_twelve_cell_layout_with_fifteen_stations():
    topo = build_topology(ScenarioConfig())
    assert topo.num_cells == 12
    assert len(topo.incumbents) == 15
    assert all(1 <= s.channel <= 10 for s in topo.incumbents)
    # the packed layout leaves every cell with at least one neighbour
    assert all(len(n) >= 1 for n in topo.neighbors)


def test_single_cell_has_no_neighbours():
    topo = build_topology(ScenarioConfig(num_cells=1))
    assert topo.neighbors == (frozenset(),)


def test_same_seed_gives_identical_cpe_coordinates():
    a = build_topology(ScenarioConfig(seed=42))
    b = build_topology(ScenarioConfig(seed=42))
    for ca, cb in zip(a.cells, b.cells):
        assert ca.cpe_positions.tobytes() == cb.cpe_positions.tobytes()


def test_layout_does_not_depend_on_seed():
    a = build_topology(ScenarioConfig(seed=1))
    b = build_topology(ScenarioConfig(seed=2))
    assert [c.center for c in a.cells] == [c.center for c in b.cells]
    assert a.neighbors == b.neighbors


@pytest.mark.parametrize("field,value", [("cpes_per_cell", 0), ("cell_radius", 0.0)])
def test_rejects_degenerate_cells(field, value):
    from dataclasses import replace
    with pytest.raises(ValueError):
        build_topology(replace(ScenarioConfig(), **{field: value}))


@given(n=st.integers(1, 19), seed=st.integers(0, 10**6))
def test_topology_invariants(n, seed):
    cfg = ScenarioConfig(num_cells=n, seed=seed, cpes_per_cell=5)
    topo = build_topology(cfg)
    for j, cell in enumerate(topo.cells):
        r = np.linalg.norm(cell.cpe_positions - np.asarray(cell.center), axis=1)
        assert np.all(r <= cell.radius * (1 + 1e-12))
        assert j not in topo.neighbors[j]
        for l in topo.neighbors[j]:
            assert j in topo.neighbors[l]


def test_hex_centers_are_distinct():
    pts = hex_centers(12, 1.0)
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    assert np.min(d + np.eye(12) * 10) >= 1.0 - 1e-12


def _one_cell(n_cpe=10):
    return build_topology(ScenarioConfig(num_cells=1, cpes_per_cell=n_cpe))


def test_single_operating_channel_gets_every_cpe():
    a = assign_sensors(_one_cell(), [ChannelLists(ocl=(4,))])
    assert a.m(0, 4) == 10
    assert len(a.sensors[(0, 4)]) == 11 and a.sensors[(0, 4)][0] == 0


def test_two_operating_channels_split_evenly():
    a = assign_sensors(_one_cell(), [ChannelLists(ocl=(2, 8))])
    assert (a.m(0, 2), a.m(0, 8)) == (5, 5)


def test_fully_disallowed_cell_is_inactive():
    a = assign_sensors(_one_cell(), [ChannelLists(dcl=tuple(range(1, 11)))])
    assert a.inactive(0)
    assert not any(key[0] == 0 for key in a.sensors)


def test_operating_channels_without_cpes_signal():
    topo = _one_cell()
    cell = topo.cells[0]
    from dataclasses import replace
    empty = replace(topo, cells=(replace(cell, cpe_positions=np.zeros((0, 2))),))
    with pytest.raises(NoSensorsError):
        assign_sensors(empty, [ChannelLists(ocl=(1,))])


@given(ocl=st.sets(st.integers(1, 10), min_size=1, max_size=4), n_cpe=st.integers(1, 15),
       frac=st.floats(0, 1))
def test_sensor_conservation(ocl, n_cpe, frac):
    rest = [c for c in range(1, 11) if c not in ocl]
    lists = [ChannelLists(ocl=tuple(sorted(ocl)), ccl=tuple(rest))]
    a = assign_sensors(_one_cell(n_cpe), lists, obs_fraction=frac)
    in_band = sum(a.m(0, k) for k in ocl)
    assert in_band == len(a.in_band[0]) == n_cpe
    counts = [a.m(0, k) for k in ocl]
    assert max(counts) - min(counts) <= 1
    for k in range(1, 11):
        assert a.sensors[(0, k)][0] == 0  # BS senses everything the cell tracks
