import numpy as np
import pytest

from beamgat import ingest
from beamgat.baselines import linear_interp, nearest_neighbor_sub
from beamgat.ingest import EveryNth, PointCloud


def frame_from(xyz, beams, num_beams=8, pattern=EveryNth(4, 0)):
    cloud = PointCloud(xyz=np.asarray(xyz, dtype=float), reflectance=np.zeros(len(xyz)),
                       beam=np.asarray(beams), num_beams=num_beams)
    return ingest.apply_beam_dropout(cloud, pattern)


def beam_plane_frame(n_beams=12, per_beam=6, slope=0.1, seed=0, pattern=EveryNth(4, 0)):
    """z = slope * beam, points spread in azimuth; linear in beam index."""
    rng = np.random.default_rng(seed)
    pts, beams = [], []
    for b in range(n_beams):
        for j in range(per_beam):
            theta = (j + 0.5) / per_beam * 2 * np.pi - np.pi
            r = 10.0 + rng.uniform(0, 0.1)
            pts.append([r * np.cos(theta), r * np.sin(theta), slope * b])
            beams.append(b)
    return frame_from(pts, beams, num_beams=n_beams, pattern=pattern)


class TestLinearInterp:
    def test_bracketed_midpoint(self):
        # dropped beam 4 between beams 3 (z=1) and 5 (z=3), same azimuth bin
        pts = [[10.0, 0.0, 1.0], [10.0, 0.001, 2.0], [10.0, 0.002, 3.0], [0.0, 10.0, 9.0]]
        beams = [3, 4, 5, 6]
        frame = frame_from(pts, beams, pattern=EveryNth(4, 0))
        assert frame.dropped_mask.tolist() == [False, True, False, False]
        z_hat = linear_interp(frame)
        assert z_hat[0] == pytest.approx(2.0)

    def test_one_sided_fallback(self):
        # dropped beam 0 with only higher beams observed: copies nearest higher z
        pts = [[10.0, 0.0, 5.0], [10.0, 0.1, 1.5], [10.0, 0.2, 2.5]]
        frame = frame_from(pts, [0, 1, 2], pattern=EveryNth(4, 0))
        z_hat = linear_interp(frame)
        assert z_hat[0] == pytest.approx(1.5)

    def test_exact_on_beam_affine_plane(self):
        # offset 2 keeps every dropped beam bracketed by observed ones
        frame = beam_plane_frame(pattern=EveryNth(4, 2))
        dropped = np.flatnonzero(frame.dropped_mask)
        z_hat = linear_interp(frame)
        np.testing.assert_allclose(z_hat, frame.z_truth[dropped], atol=1e-12)

    def test_rejects_all_dropped(self):
        pts = [[1.0, 0.0, 0.5], [2.0, 0.0, 0.6]]
        cloud = PointCloud(xyz=np.array(pts), reflectance=np.zeros(2),
                           beam=np.array([0, 1]), num_beams=8)
        frame = ingest.SparseFrame(
            cloud=cloud, dropped_mask=np.array([True, True]),
            z_truth=cloud.xyz[:, 2].copy(), z_masked=np.zeros(2),
        )
        with pytest.raises(ValueError):
            linear_interp(frame)

    def test_deterministic(self):
        frame = beam_plane_frame(seed=3)
        a = linear_interp(frame)
        b = linear_interp(frame)
        np.testing.assert_array_equal(a, b)


class TestNearestNeighborSub:
    def test_coincident_planar_point(self):
        pts = [[5.0, 5.0, 1.0], [5.0, 5.0, 3.0], [1.0, 1.0, 2.0]]
        frame = frame_from(pts, [0, 1, 2])
        assert frame.dropped_mask.tolist() == [True, False, False]
        recon = nearest_neighbor_sub(frame)
        np.testing.assert_allclose(recon[0], [5.0, 5.0, 3.0])

    def test_single_observed_point_absorbs_all(self):
        pts = [[0.0, 0.0, 1.0], [9.0, 9.0, 2.0], [3.0, -3.0, 0.5]]
        frame = frame_from(pts, [0, 4, 1])  # beams 0 and 4 dropped
        recon = nearest_neighbor_sub(frame)
        assert recon.shape == (2, 3)
        for row in recon:
            np.testing.assert_allclose(row, [3.0, -3.0, 0.5])

    def test_reconstructions_coincide_with_observed_points(self):
        frame = beam_plane_frame(seed=5)
        obs = frame.cloud.xyz[frame.observed_mask]
        recon = nearest_neighbor_sub(frame)
        for row in recon:
            assert np.min(np.linalg.norm(obs - row, axis=1)) < 1e-12

    def test_z_only_variant_keeps_xy(self):
        frame = beam_plane_frame(seed=6)
        dropped = np.flatnonzero(frame.dropped_mask)
        recon = nearest_neighbor_sub(frame, z_only=True)
        np.testing.assert_array_equal(recon[:, :2], frame.cloud.xyz[dropped, :2])

    def test_full_substitution_changes_xy(self):
        # the substituted (x, y) generally differ from the dropped point's own
        frame = beam_plane_frame(seed=7)
        dropped = np.flatnonzero(frame.dropped_mask)
        recon = nearest_neighbor_sub(frame)
        assert np.any(np.abs(recon[:, :2] - frame.cloud.xyz[dropped, :2]) > 1e-9)
