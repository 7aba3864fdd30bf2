import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satcoop.geometry import (GEO_ALTITUDE_KM, build_topology, drop_users,
                              footprint_matched_diameter, in_hex_cell,
                              user_geometry)

PAPER_HYPER_PLAN = [{3, 9, 10}, {4, 11, 12}, {2, 8, 19}, {5, 13, 14},
                    {7, 17, 18}, {6, 15, 16}, {1}]


@pytest.fixture(scope="module")
def topo():
    return build_topology(500.0, 7, 19)


def test_canonical_layout_counts(topo):
    assert topo.n_beams == 133
    assert topo.n_clusters == 19
    counts = np.bincount(topo.cluster_of_beam, minlength=19)
    assert np.all(counts == 7)


def test_hyper_clusters_match_published_plan(topo):
    assert [set(g) for g in topo.hyper_clusters] == PAPER_HYPER_PLAN


def test_hyper_clusters_partition_labels(topo):
    seen = sorted(label for group in topo.hyper_clusters for label in group)
    assert seen == list(range(1, 20))


def test_single_cluster_degenerate_case():
    t = build_topology(500.0, 7, 1)
    assert t.n_beams == 7
    assert t.n_clusters == 1
    assert [set(g) for g in t.hyper_clusters] == [{1}]


def test_no_adjacent_beams_share_colour(topo):
    # independent oracle: exhaustive pairwise distance check over all beams
    centers = topo.beam_centers
    dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
    adjacent = (dists > 0) & (dists < 1.01 * topo.pitch_km)
    conflicts = adjacent & (topo.colour_of_beam[:, None]
                            == topo.colour_of_beam[None, :])
    assert conflicts.sum() == 0


def test_colour_classes_near_balanced(topo):
    counts = np.bincount(topo.colour_of_beam, minlength=4)
    assert len(counts) == 4
    assert np.all(counts >= 30) and np.all(counts <= 37)


def test_layout_fits_coverage_disk(topo):
    radius = np.linalg.norm(topo.beam_centers, axis=1).max()
    assert radius + topo.pitch_km / math.sqrt(3.0) <= 250.0 * (1 + 1e-12)


def test_neighbours_within_hyper_cluster(topo):
    # cluster label 3 sits in {3, 9, 10}; 0-based index 2 -> neighbours 8, 9
    assert topo.neighbours_of(2) == [8, 9]
    assert topo.neighbours_of(0) == []  # label 1 is a singleton


@pytest.mark.parametrize("diameter,k,c", [
    (0.0, 7, 19), (-5.0, 7, 19), (500.0, 6, 19), (500.0, 7, 5), (500.0, 7, 13),
])
def test_invalid_configurations_rejected(diameter, k, c):
    with pytest.raises(ValueError):
        build_topology(diameter, k, c)


def test_drop_is_deterministic(topo):
    a = drop_users(topo, 1234)
    b = drop_users(topo, 1234)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.off_axis_angle, b.off_axis_angle)
    assert np.array_equal(a.slant_range, b.slant_range)
    c = drop_users(topo, 1235)
    assert not np.array_equal(a.positions, c.positions)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_users_stay_inside_their_hex_cell(seed):
    topo = build_topology(500.0, 7, 19)
    drop = drop_users(topo, seed)
    offsets = drop.positions - topo.beam_centers
    assert np.all(np.linalg.norm(offsets, axis=1)
                  <= topo.pitch_km / math.sqrt(3.0) + 1e-9)
    assert np.all(in_hex_cell(offsets, topo.pitch_km))


def test_slant_range_flatness(topo):
    drop = drop_users(topo, 7)
    assert np.all(drop.slant_range >= GEO_ALTITUDE_KM)
    assert np.all(drop.slant_range < GEO_ALTITUDE_KM + 10.0)


def test_nadir_user_slant_range(topo):
    # the central beam sits at the coverage centre, straight below the satellite
    drop = user_geometry(topo, topo.beam_centers)
    central = int(np.argmin(np.linalg.norm(topo.beam_centers, axis=1)))
    assert drop.slant_range[central] == pytest.approx(GEO_ALTITUDE_KM, abs=1e-6)


def test_off_axis_angle_zero_only_at_beam_centre(topo):
    drop = user_geometry(topo, topo.beam_centers)
    diag = np.diagonal(drop.off_axis_angle)
    assert np.all(diag == 0.0)
    off_diag = drop.off_axis_angle[~np.eye(topo.n_beams, dtype=bool)]
    assert np.all(off_diag > 0.0)


def test_off_axis_angle_against_arccos_oracle(topo):
    drop = drop_users(topo, 99)
    sat = topo.satellite_position
    b, u = 17, 42
    vb = np.array([*topo.beam_centers[b], 0.0]) - sat
    vu = np.array([*drop.positions[u], 0.0]) - sat
    cosang = vb @ vu / (np.linalg.norm(vb) * np.linalg.norm(vu))
    expected = math.acos(min(1.0, max(-1.0, cosang)))
    assert drop.off_axis_angle[b, u] == pytest.approx(expected, rel=1e-6)


def test_topology_json_schema(topo):
    payload = json.loads(topo.to_json())
    assert len(payload["beam_centers_km"]) == 133
    assert len(payload["cluster_of_beam"]) == 133
    assert len(payload["colour_of_beam"]) == 133
    assert sorted(map(sorted, payload["hyper_clusters"])) \
        == sorted(map(sorted, PAPER_HYPER_PLAN))
    assert payload["satellite_position_km"][2] == GEO_ALTITUDE_KM


def test_footprint_matched_diameter_value():
    # pitch sqrt(3)*tan(0.4deg)*35786 km over the 19-cluster lattice extent
    d = footprint_matched_diameter()
    pitch = math.sqrt(3.0) * math.tan(math.radians(0.4)) * GEO_ALTITUDE_KM
    extent = math.sqrt(39.0) + 1.0 / math.sqrt(3.0)
    assert d == pytest.approx(2 * extent * pitch, rel=1e-12)
    topo = build_topology(d)
    assert topo.pitch_km == pytest.approx(pitch, rel=1e-9)
