"""Feed-to-user channel synthesis: beam pattern, rain fading, path loss.

Every user sees all 133 feeds through a tapered-aperture Bessel beam
pattern, a free-space path loss set by its slant range, and a single
lognormal rain attenuation shared (in amplitude and phase) across feeds.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j1, jv

from .geometry import Topology, UserDrop, as_generator

SPEED_OF_LIGHT_M_S = 299792458.0
BOLTZMANN_J_K = 1.380649e-23

# -3 dB constant of the J1/J3 aperture taper: the pattern crosses half power
# where 2.07123 * sin(theta) = sin(theta_3dB).
_U_3DB = 2.07123


@dataclass(frozen=True)
class LinkBudget:
    """Radio constants of the forward link (defaults: canonical Ka scenario)."""

    frequency_hz: float = 20e9
    max_tx_gain_db: float = 52.0
    rx_gain_db: float = 41.7
    theta_3db_rad: float = math.radians(0.4)
    bandwidth_hz: float = 500e6
    noise_temp_k: float = 207.0
    rain_mu: float = -3.4249
    rain_sigma: float = 1.5768

    def __post_init__(self):
        if self.frequency_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("frequency and bandwidth must be positive")
        if self.theta_3db_rad <= 0:
            raise ValueError("theta_3db must be positive")
        if self.noise_temp_k <= 0:
            raise ValueError("noise temperature must be positive")
        if not all(map(math.isfinite, (self.max_tx_gain_db, self.rx_gain_db))):
            raise ValueError("antenna gains must be finite")
        if self.rain_sigma < 0:
            raise ValueError("rain sigma must be nonnegative")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.frequency_hz

    @property
    def noise_psd_w_hz(self) -> float:
        return BOLTZMANN_J_K * self.noise_temp_k

    @property
    def noise_power_w(self) -> float:
        return self.noise_psd_w_hz * self.bandwidth_hz

    @property
    def tx_gain_linear(self) -> float:
        return 10.0 ** (self.max_tx_gain_db / 10.0)

    @property
    def rx_gain_linear(self) -> float:
        return 10.0 ** (self.rx_gain_db / 10.0)


@dataclass(frozen=True)
class ChannelRealization:
    """Complex amplitude from every feed to every user for one trial.

    gains[f, u] is the channel amplitude from global feed f to user u; the
    7-feed vector a gateway sees toward any user is a column slice.  The
    noise power and bandwidth the realization was synthesized under ride
    along so downstream consumers need no extra context.
    """

    gains: np.ndarray
    rain_fade_linear: np.ndarray
    rain_phase: np.ndarray
    k_per_cluster: int
    noise_psd_w_hz: float
    bandwidth_hz: float

    @property
    def n_clusters(self) -> int:
        return self.gains.shape[0] // self.k_per_cluster

    @property
    def n_users(self) -> int:
        return self.gains.shape[1]

    @property
    def noise_power_w(self) -> float:
        return self.noise_psd_w_hz * self.bandwidth_hz

    def h(self, source_cluster: int, dest_cluster: int, user: int) -> np.ndarray:
        """Channel vector from source cluster's feeds to a user (length K)."""
        k = self.k_per_cluster
        col = dest_cluster * k + user
        return self.gains[source_cluster * k:(source_cluster + 1) * k, col]

    def checksum(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.gains).tobytes())
        digest.update(np.ascontiguousarray(self.rain_fade_linear).tobytes())
        return digest.hexdigest()[:16]


def beam_gain(theta, theta_3db: float, b_max_linear: float):
    """Aperture-taper power gain at off-axis angle theta (radians).

    b_max * (J1(u)/(2u) + 36*J3(u)/u^3)^2 with u = 2.07123*sin(theta)/sin(theta_3db).
    The u -> 0 limit equals b_max exactly; a quadratic series handles small u.
    """
    if theta_3db <= 0:
        raise ValueError("theta_3db must be positive")
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta >= math.pi / 2):
        raise ValueError("theta must lie in [0, pi/2)")

    u = _U_3DB * np.sin(theta) / math.sin(theta_3db)
    small = u < 1e-6
    u_safe = np.where(small, 1.0, u)
    taper = np.where(
        small,
        1.0 - 5.0 * u * u / 64.0,
        j1(u_safe) / (2.0 * u_safe) + 36.0 * jv(3, u_safe) / u_safe ** 3,
    )
    out = b_max_linear * taper ** 2
    return float(out) if out.ndim == 0 else out


def sample_rain_fade(rng_seed, mu: float, sigma: float, n: int | None = None):
    """Draw lognormal rain attenuation and a uniform carrier phase.

    ln(A_dB) ~ Normal(mu, sigma^2) so the dB attenuation is strictly
    positive and the linear power factor xi = 10^(A_dB/10) is >= 1.
    Returns (xi, phi) scalars, or arrays of length n when n is given.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = as_generator(rng_seed)
    size = None if n is None else n
    a_db = np.exp(rng.normal(mu, sigma, size=size))
    xi = 10.0 ** (a_db / 10.0)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=size)
    return xi, phi


def path_loss_gain(d_km, wavelength_m: float):
    """Free-space power gain (lambda / (4 pi d))^2, dimensionless."""
    d_km = np.asarray(d_km, dtype=float)
    if np.any(d_km <= 0):
        raise ValueError("distance must be positive")
    gain = (wavelength_m / (4.0 * math.pi * d_km * 1e3)) ** 2
    return float(gain) if gain.ndim == 0 else gain


def synthesize_channels(topology: Topology, drop: UserDrop, budget: LinkBudget,
                        rng_seed, rain: tuple | None = None) -> ChannelRealization:
    """Build the full feed-to-user amplitude matrix for one trial.

    Entry (f, u) = exp(-j*phi_u) * sqrt(G_rx * pathloss_u * beamgain(f, u) / xi_u).
    One rain draw (xi, phi) per user, shared across all feeds; pass
    rain=(xi, phi) arrays to pin the fading (used by deterministic tests).
    """
    n_users = drop.positions.shape[0]
    if rain is None:
        xi, phi = sample_rain_fade(rng_seed, budget.rain_mu, budget.rain_sigma,
                                   n=n_users)
    else:
        xi = np.asarray(rain[0], dtype=float)
        phi = np.asarray(rain[1], dtype=float)

    bg = beam_gain(drop.off_axis_angle, budget.theta_3db_rad, budget.tx_gain_linear)
    pl = path_loss_gain(drop.slant_range, budget.wavelength_m)
    per_user = np.sqrt(budget.rx_gain_linear * pl / xi) * np.exp(-1j * phi)
    gains = np.sqrt(bg) * per_user[None, :]

    return ChannelRealization(
        gains=gains,
        rain_fade_linear=xi,
        rain_phase=phi,
        k_per_cluster=topology.beams_per_cluster,
        noise_psd_w_hz=budget.noise_psd_w_hz,
        bandwidth_hz=budget.bandwidth_hz,
    )


def dump_channel_csv(realization: ChannelRealization, path) -> None:
    """Debug dump: one row per feed, per-user columns interleaved re/im."""
    g = realization.gains
    flat = np.empty((g.shape[0], 2 * g.shape[1]))
    flat[:, 0::2] = g.real
    flat[:, 1::2] = g.imag
    header = ",".join(
        f"user{u}_{part}" for u in range(g.shape[1]) for part in ("re", "im")
    )
    np.savetxt(path, flat, delimiter=",", header=header, comments="")
