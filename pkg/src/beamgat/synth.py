"""Synthetic LiDAR scenes: a simulated 64-beam scanner over analytic
surfaces, giving desk-scale frames with exact beam indices."""

from __future__ import annotations

import dataclasses

import numpy as np

from .ingest import (
    DEFAULT_ELEV_MAX_DEG,
    DEFAULT_ELEV_MIN_DEG,
    DEFAULT_NUM_BEAMS,
    PointCloud,
)

__all__ = ["SceneSpec", "synthesize_scene"]

SCENE_KINDS = ("plane", "sinusoid", "two_plane")


@dataclasses.dataclass(frozen=True)
class SceneSpec:
    kind: str = "sinusoid"
    extent: float = 40.0  # max range in meters
    point_count: int = 2048
    noise_sigma: float = 0.0
    seed: int = 0
    ground_z: float = -1.7
    amplitude: float = 0.5  # sinusoid amplitude
    wavelength: float = 8.0  # sinusoid wavelength
    wall_x: float = 15.0  # two_plane: vertical wall position

    def __post_init__(self):
        if self.kind not in SCENE_KINDS:
            raise ValueError(f"unknown scene kind {self.kind!r}")
        if self.point_count < 100:
            raise ValueError("point_count must be >= 100")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def _surface_z(spec: SceneSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if spec.kind == "plane":
        return np.full_like(x, spec.ground_z)
    if spec.kind == "sinusoid":
        w = 2 * np.pi / spec.wavelength
        return spec.ground_z + spec.amplitude * (np.sin(w * x) + 0.5 * np.cos(w * y))
    # two_plane: ground, plus a vertical wall at x = wall_x handled in the caster
    return np.full_like(x, spec.ground_z)


def synthesize_scene(
    spec: SceneSpec,
    num_beams: int = DEFAULT_NUM_BEAMS,
    elev_min_deg: float = DEFAULT_ELEV_MIN_DEG,
    elev_max_deg: float = DEFAULT_ELEV_MAX_DEG,
) -> PointCloud:
    """Cast one ray per (beam elevation, azimuth) from the origin and
    intersect the scene surface; beam indices are exact by construction.
    Rays that miss (upward beams, out-of-range hits) are skipped."""
    azimuth_count = int(np.ceil(spec.point_count / num_beams))
    elev = np.radians(
        elev_min_deg + (np.arange(num_beams) + 0.5) / num_beams * (elev_max_deg - elev_min_deg)
    )
    azim = (np.arange(azimuth_count) + 0.5) / azimuth_count * 2 * np.pi - np.pi
    rng = np.random.default_rng(spec.seed)

    xs, ys, zs, beams = [], [], [], []
    for b, phi in enumerate(elev):
        dz = np.sin(phi)
        c = np.cos(phi)
        for theta in azim:
            dx, dy = c * np.cos(theta), c * np.sin(theta)
            hit = _cast(spec, dx, dy, dz)
            if hit is None:
                continue
            x, y, z = hit
            if spec.noise_sigma > 0:
                z += rng.normal(0.0, spec.noise_sigma)
            xs.append(x)
            ys.append(y)
            zs.append(z)
            beams.append(b)
    if not xs:
        raise ValueError("no rays hit the scene")
    xyz = np.column_stack([xs, ys, zs])
    return PointCloud(
        xyz=xyz,
        reflectance=np.full(len(xs), 0.5),
        beam=np.array(beams, dtype=np.int64),
        num_beams=num_beams,
    )


def _cast(spec: SceneSpec, dx: float, dy: float, dz: float) -> tuple[float, float, float] | None:
    if spec.kind == "two_plane" and dx > 1e-9:
        # wall first: x = wall_x, any z above ground
        t_wall = spec.wall_x / dx
        zw = t_wall * dz
        if zw >= spec.ground_z:
            t_ground = _ground_t(spec, dx, dy, dz)
            if t_ground is not None and t_ground < t_wall:
                return _point_at(spec, dx, dy, dz, t_ground)
            x, y, z = t_wall * dx, t_wall * dy, zw
            if np.hypot(x, y) <= spec.extent:
                return x, y, z
            return None
    t = _ground_t(spec, dx, dy, dz)
    if t is None:
        return None
    return _point_at(spec, dx, dy, dz, t)


def _ground_t(spec: SceneSpec, dx: float, dy: float, dz: float) -> float | None:
    """First ray-surface intersection by marching to a sign change of
    g(t) = t dz - surface(t dx, t dy), then bisecting."""
    if dz >= -1e-9:
        return None

    def g(t: float) -> float:
        return t * dz - _surface_z(spec, np.array(t * dx), np.array(t * dy)).item()

    planar = np.hypot(dx, dy)
    t_max = spec.extent / planar if planar > 1e-12 else -spec.ground_z / -dz * 2
    step = t_max / 256
    lo, g_lo = 0.0, g(0.0)
    if g_lo <= 0:
        return None
    t = step
    while t <= t_max:
        g_t = g(t)
        if g_t <= 0:
            hi = t
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if g(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        lo, g_lo = t, g_t
        t += step
    return None


def _point_at(spec: SceneSpec, dx: float, dy: float, dz: float, t: float):
    return t * dx, t * dy, t * dz
