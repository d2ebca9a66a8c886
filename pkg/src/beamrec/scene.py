"""Deterministic synthetic propagation scene.

Replaces a full ray-tracing channel generator with the minimum structure
the completion pipeline relies on: a handful of single-bounce scattering
clusters (plus an optional line-of-sight ray), inverse-distance path
gains, a smooth lognormal shadowing field per ray, and deterministic
phases from ray length. The map from GPS coordinate to channel is pure:
same scene and coordinate always give the bit-identical channel.

Array mounting convention: the receive UPA at the base station faces the
service area with its broadside along global +x, its element x-axis along
global +y and its element y-axis along global +z. Arrival directions of
all in-area rays therefore land in the codebook's angle domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299792458.0
DEFAULT_CARRIER_HZ = 58.68e9


@dataclass(frozen=True)
class ServiceArea:
    """Rectangular coverage region with the base station and UE heights."""

    x0: float = 10.0
    x_end: float = 60.0
    y0: float = -25.0
    y_end: float = 25.0
    bs_position: tuple = (0.0, 0.0, 10.0)
    ue_height: float = 1.5
    ref_grid_n: int = 51

    def __post_init__(self):
        if not (self.x0 < self.x_end and self.y0 < self.y_end):
            raise ValueError("area bounds must satisfy x0 < x_end, y0 < y_end")
        if self.ref_grid_n < 2:
            raise ValueError("ref_grid_n must be >= 2")

    def contains(self, g) -> bool:
        gx, gy = float(g[0]), float(g[1])
        return (self.x0 <= gx <= self.x_end) and (self.y0 <= gy <= self.y_end)


def reference_coordinates(area: ServiceArea) -> np.ndarray:
    """The ref_grid_n x ref_grid_n uniform survey coordinates, row-major."""
    xs = np.linspace(area.x0, area.x_end, area.ref_grid_n)
    ys = np.linspace(area.y0, area.y_end, area.ref_grid_n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class Cluster:
    center: tuple  # (x, y, z) meters
    spread: float  # meters, > 0
    base_gain_db: float  # reflection loss relative to a free ray


@dataclass
class Scene:
    """Immutable propagation environment.

    The shadowing lattices are regenerated deterministically from the seed
    and the stored bounds, so a scene file round-trips byte-for-byte.
    """

    clusters: list
    n_paths: int
    seed: int
    shadowing_corr_m: float
    shadow_sigma_db: float = 5.0
    wavelength_m: float = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ
    include_los: bool = False
    bounds: tuple = (10.0, 60.0, -25.0, 25.0)  # x0, x_end, y0, y_end
    _shadow_nodes: np.ndarray = field(init=False, repr=False)
    _shadow_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if any(c.spread <= 0 for c in self.clusters):
            raise ValueError("cluster spreads must be > 0")
        offered = len(self.clusters) + (1 if self.include_los else 0)
        if self.n_paths > offered:
            raise ValueError(
                f"n_paths={self.n_paths} exceeds available rays ({offered})"
            )
        self._shadow_nodes, self._shadow_values = _shadow_lattice(
            self.seed, self.bounds, self.shadowing_corr_m,
            self.shadow_sigma_db, len(self.clusters) + 1,
        )

    def shadow_db(self, field_index: int, g) -> float:
        """Smooth shadowing value in dB for one ray field at coordinate g."""
        d2 = ((self._shadow_nodes - np.asarray(g, dtype=float)) ** 2).sum(axis=1)
        w = np.exp(-d2 / (2.0 * self.shadowing_corr_m ** 2))
        return float((w * self._shadow_values[field_index]).sum() / w.sum())


@dataclass(frozen=True)
class ChannelInstance:
    """Per-path description of the channel at one coordinate."""

    coordinate: tuple
    gains: np.ndarray       # complex, length L
    elevations: np.ndarray  # radians, length L
    azimuths: np.ndarray    # radians, length L


def _shadow_lattice(seed, bounds, corr_m, sigma_db, n_fields):
    x0, x_end, y0, y_end = bounds
    _, shadow_seed = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(shadow_seed)
    xs = np.arange(x0 - corr_m, x_end + 2 * corr_m, corr_m)
    ys = np.arange(y0 - corr_m, y_end + 2 * corr_m, corr_m)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    values = sigma_db * rng.standard_normal((n_fields, len(nodes)))
    return nodes, values


def generate_scene(area: ServiceArea, n_clusters: int, n_paths: int,
                   seed: int, include_los: bool = False,
                   spread_range=(1.5, 4.0), gain_range_db=(-14.0, -3.0),
                   shadowing_corr_m: float = 22.0,
                   shadow_sigma_db: float = 5.0,
                   wavelength_m: float = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ,
                   min_separation_deg: float = 0.0) -> Scene:
    """Draw a scene from the seeded generator; same seed, same scene.

    Cluster centers are uniform over the area's 3-D bounding box (heights
    between ground and the BS height). Paths use the line-of-sight ray
    first (when enabled) and then clusters in generation order.

    min_separation_deg > 0 rejects cluster centers whose direction from
    the BS is within that angle of an already placed cluster. Keeping the
    rays separated in beam space limits same-beam interference between
    paths, which would otherwise puncture the positional smoothness of the
    best-beam power.
    """
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    cluster_seed, _ = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(cluster_seed)
    bs = np.asarray(area.bs_position, dtype=float)
    bs_z = area.bs_position[2]
    cos_min = math.cos(math.radians(min_separation_deg))
    directions = []
    clusters = []
    attempts = 0
    while len(clusters) < n_clusters:
        center = (
            float(rng.uniform(area.x0, area.x_end)),
            float(rng.uniform(area.y0, area.y_end)),
            float(rng.uniform(0.0, bs_z)),
        )
        spread = float(rng.uniform(*spread_range))
        gain = float(rng.uniform(*gain_range_db))
        d = np.asarray(center) - bs
        d /= np.linalg.norm(d)
        attempts += 1
        if min_separation_deg > 0 and attempts < 200 * n_clusters:
            if any(float(d @ prev) > cos_min for prev in directions):
                continue
        directions.append(d)
        clusters.append(Cluster(center, spread, gain))
    return Scene(
        clusters=clusters, n_paths=n_paths, seed=seed,
        shadowing_corr_m=shadowing_corr_m, shadow_sigma_db=shadow_sigma_db,
        wavelength_m=wavelength_m, include_los=include_los,
        bounds=(area.x0, area.x_end, area.y0, area.y_end),
    )


def _angles_from_direction(e: np.ndarray):
    """Map a global unit direction to the array's (elevation, azimuth).

    With the mounting convention above: cos(theta) = e_x,
    sin(theta)cos(phi) = e_y, sin(theta)sin(phi) = e_z. The returned pair
    lies in [-pi/2, pi/2) x [-pi/2, pi/2); rays from the service area always
    have e_x > 0 so a representation exists.
    """
    theta = math.acos(min(1.0, max(-1.0, e[0])))
    phi = math.atan2(e[2], e[1])
    if phi >= math.pi / 2:
        theta, phi = -theta, phi - math.pi
    elif phi < -math.pi / 2:
        theta, phi = -theta, phi + math.pi
    return theta, phi


def channel_at(scene: Scene, area: ServiceArea, g) -> ChannelInstance:
    """Evaluate the multipath channel at GPS coordinate g.

    Each ray contributes an arrival direction at the BS, an amplitude from
    the inverse-distance law, its cluster reflection loss and the smooth
    shadowing field, and a phase of 2*pi*(ray length)/wavelength. Cluster
    reflection points are pulled from the cluster center toward the UE by
    at most the cluster spread, so geometry varies smoothly with g.
    """
    if not area.contains(g):
        raise ValueError(f"coordinate {tuple(g)} outside service area")
    gx, gy = float(g[0]), float(g[1])
    bs = np.asarray(area.bs_position, dtype=float)
    ue = np.array([gx, gy, area.ue_height])

    rays = []  # (shadow field index, base gain dB, bounce point)
    if scene.include_los:
        rays.append((0, 0.0, ue))
    for k, cluster in enumerate(scene.clusters[:scene.n_paths - len(rays)]):
        c = np.asarray(cluster.center, dtype=float)
        to_ue = ue - c
        dist = float(np.linalg.norm(to_ue))
        bounce = c + cluster.spread * to_ue / (dist + cluster.spread)
        rays.append((k + 1, cluster.base_gain_db, bounce))

    gains = np.empty(len(rays), dtype=complex)
    elevations = np.empty(len(rays))
    azimuths = np.empty(len(rays))
    for idx, (field_index, base_gain_db, point) in enumerate(rays):
        leg_bs = point - bs
        d_bs = float(np.linalg.norm(leg_bs))
        length = d_bs + float(np.linalg.norm(ue - point))
        theta, phi = _angles_from_direction(leg_bs / d_bs)
        gain_db = base_gain_db + scene.shadow_db(field_index, (gx, gy))
        amplitude = 10.0 ** (gain_db / 20.0) / length
        phase = 2.0 * math.pi * length / scene.wavelength_m
        gains[idx] = amplitude * np.exp(1j * phase)
        elevations[idx] = theta
        azimuths[idx] = phi
    return ChannelInstance((gx, gy), gains, elevations, azimuths)


def assemble_channel(instance: ChannelInstance, geometry) -> np.ndarray:
    """h = sqrt(n_r) * sum_l alpha_l * a(theta_l, phi_l)."""
    from .upa import steering_vector

    h = np.zeros(geometry.n_r, dtype=complex)
    for alpha, theta, phi in zip(instance.gains, instance.elevations,
                                 instance.azimuths):
        h += alpha * steering_vector(geometry, theta, phi)
    return np.sqrt(geometry.n_r) * h


def save_scene(scene: Scene, path) -> None:
    """Write the scene as replayable key-value text (full float precision)."""
    lines = [
        "# beamrec scene file",
        "format = 1",
        f"seed = {scene.seed}",
        f"n_paths = {scene.n_paths}",
        f"include_los = {str(scene.include_los).lower()}",
        f"shadowing_corr_m = {scene.shadowing_corr_m!r}",
        f"shadow_sigma_db = {scene.shadow_sigma_db!r}",
        f"wavelength_m = {scene.wavelength_m!r}",
        "bounds = " + " ".join(repr(b) for b in scene.bounds),
        f"n_clusters = {len(scene.clusters)}",
    ]
    for k, c in enumerate(scene.clusters):
        lines.append(f"cluster.{k}.center = " +
                     " ".join(repr(float(v)) for v in c.center))
        lines.append(f"cluster.{k}.spread = {c.spread!r}")
        lines.append(f"cluster.{k}.base_gain_db = {c.base_gain_db!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_scene(path) -> Scene:
    """Inverse of save_scene."""
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    n_clusters = int(entries["n_clusters"])
    clusters = []
    for k in range(n_clusters):
        center = tuple(float(v) for v in entries[f"cluster.{k}.center"].split())
        clusters.append(Cluster(
            center=center,
            spread=float(entries[f"cluster.{k}.spread"]),
            base_gain_db=float(entries[f"cluster.{k}.base_gain_db"]),
        ))
    return Scene(
        clusters=clusters,
        n_paths=int(entries["n_paths"]),
        seed=int(entries["seed"]),
        shadowing_corr_m=float(entries["shadowing_corr_m"]),
        shadow_sigma_db=float(entries["shadow_sigma_db"]),
        wavelength_m=float(entries["wavelength_m"]),
        include_los=entries["include_los"] == "true",
        bounds=tuple(float(v) for v in entries["bounds"].split()),
    )
