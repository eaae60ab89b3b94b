"""Non-learned reconstruction baselines: beam-wise linear interpolation in
azimuth bins, and nearest-neighbor substitution."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .ingest import SparseFrame

__all__ = ["linear_interp", "nearest_neighbor_sub"]


def _azimuth_bins(xyz: np.ndarray, bin_count: int) -> np.ndarray:
    azim = np.arctan2(xyz[:, 1], xyz[:, 0])  # [-pi, pi]
    b = np.floor((azim + np.pi) / (2 * np.pi) * bin_count).astype(np.int64)
    return np.clip(b, 0, bin_count - 1)


def linear_interp(frame: SparseFrame, bin_count: int = 360) -> np.ndarray:
    """z estimate per dropped point by interpolating across the beam stack.

    Within each azimuth bin, every observed beam is represented by its point
    closest to the bin center. A dropped point takes the linear interpolation
    (in beam index) between the nearest observed beams below and above it;
    one-sided cases copy the nearest observed beam's z. A bin with no
    observed points at all falls back to the planar-nearest observed point.
    """
    cloud = frame.cloud
    if cloud.beam is None:
        raise ValueError("beam indices must be set")
    obs = np.flatnonzero(frame.observed_mask)
    if obs.size == 0:
        raise ValueError("frame has no observed points")
    if np.unique(cloud.beam[obs]).size < 2:
        raise ValueError("need at least 2 observed beams")

    bins = _azimuth_bins(cloud.xyz, bin_count)
    centers = (np.arange(bin_count) + 0.5) / bin_count * 2 * np.pi - np.pi
    azim = np.arctan2(cloud.xyz[:, 1], cloud.xyz[:, 0])

    # representative observed point per (bin, beam): closest to bin center
    rep: dict[tuple[int, int], int] = {}
    rep_err: dict[tuple[int, int], float] = {}
    for i in obs:
        key = (int(bins[i]), int(cloud.beam[i]))
        err = abs(azim[i] - centers[bins[i]])
        if key not in rep or err < rep_err[key]:
            rep[key] = int(i)
            rep_err[key] = err

    beams_in_bin: dict[int, np.ndarray] = {}
    for (b, beam) in rep:
        beams_in_bin.setdefault(b, []).append(beam)  # type: ignore[arg-type]
    beams_in_bin = {b: np.sort(np.array(v)) for b, v in beams_in_bin.items()}

    dropped = np.flatnonzero(frame.dropped_mask)
    tree = cKDTree(cloud.xyz[obs, :2])
    z_hat = np.empty(dropped.size)
    for out_i, i in enumerate(dropped):
        b, beam = int(bins[i]), int(cloud.beam[i])
        avail = beams_in_bin.get(b)
        if avail is None or avail.size == 0:
            _, j = tree.query(cloud.xyz[i, :2])
            z_hat[out_i] = frame.z_truth[obs[j]]
            continue
        lower = avail[avail < beam]
        upper = avail[avail > beam]
        if lower.size and upper.size:
            b0, b1 = int(lower[-1]), int(upper[0])
            z0 = frame.z_truth[rep[(b, b0)]]
            z1 = frame.z_truth[rep[(b, b1)]]
            t = (beam - b0) / (b1 - b0)
            z_hat[out_i] = z0 + t * (z1 - z0)
        else:
            nearest = int(lower[-1]) if lower.size else int(upper[0])
            z_hat[out_i] = frame.z_truth[rep[(b, nearest)]]
    return z_hat


def nearest_neighbor_sub(frame: SparseFrame, z_only: bool = False) -> np.ndarray:
    """Reconstruct each dropped point as a copy of its planar-nearest
    observed point.

    Returns [n_dropped, 3]: by default the neighbor's full (x, y, z) is
    substituted, which trades global coordinate alignment for local z
    accuracy. ``z_only=True`` keeps the dropped point's own (x, y).
    """
    cloud = frame.cloud
    obs = np.flatnonzero(frame.observed_mask)
    if obs.size == 0:
        raise ValueError("frame has no observed points")
    dropped = np.flatnonzero(frame.dropped_mask)
    tree = cKDTree(cloud.xyz[obs, :2])
    _, j = tree.query(cloud.xyz[dropped, :2])
    nn = obs[np.atleast_1d(j)]
    if z_only:
        out = cloud.xyz[dropped].copy()
        out[:, 2] = frame.z_truth[nn]
        return out
    out = cloud.xyz[nn].copy()
    out[:, 2] = frame.z_truth[nn]
    return out
