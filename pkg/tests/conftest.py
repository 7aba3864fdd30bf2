import numpy as np
import pytest

from satcoop.channel import ChannelRealization, LinkBudget, synthesize_channels
from satcoop.geometry import (Topology, build_topology, drop_users,
                              footprint_matched_diameter)


def make_channels(gains, k_per_cluster, noise_power=1.0, bandwidth=1.0):
    """Hand-built realization for synthetic scheme tests."""
    gains = np.asarray(gains, dtype=complex)
    n_users = gains.shape[1]
    return ChannelRealization(
        gains=gains,
        rain_fade_linear=np.ones(n_users),
        rain_phase=np.zeros(n_users),
        k_per_cluster=k_per_cluster,
        noise_psd_w_hz=noise_power / bandwidth,
        bandwidth_hz=bandwidth,
    )


def make_topology_stub(n_clusters, beams_per_cluster, hyper_plan):
    """Topology with placeholder geometry for runner tests on synthetic worlds."""
    n_beams = n_clusters * beams_per_cluster
    return Topology(
        beam_centers=np.zeros((n_beams, 2)),
        cluster_of_beam=np.repeat(np.arange(n_clusters), beams_per_cluster),
        hyper_clusters=tuple(frozenset(g) for g in hyper_plan),
        colour_of_beam=np.zeros(n_beams, dtype=int),
        satellite_position=np.array([0.0, 0.0, 35786.0]),
        pitch_km=1.0,
        n_clusters=n_clusters,
        beams_per_cluster=beams_per_cluster,
    )


@pytest.fixture(scope="session")
def canonical_topology():
    return build_topology(footprint_matched_diameter(), 7, 19)


@pytest.fixture(scope="session")
def canonical_realization(canonical_topology):
    drop = drop_users(canonical_topology, 20240)
    return synthesize_channels(canonical_topology, drop, LinkBudget(), 20241)
