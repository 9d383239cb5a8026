import math

import numpy as np
import pytest

from utils.cluster_utils import (
    PointCloud,
    chord,
    angle_from_chord,
    cluster_mask,
    cluster_representatives,
    embed,
    hausdorff,
    min_pairwise_distance,
    normalize_rows,
    thin,
)

E = np.eye(3, dtype=complex)


def blob(center, count, spread, rng):
    pts = np.asarray(center, dtype=complex) + spread * (rng.normal(size=(count, 3)) + 1j * rng.normal(size=(count, 3)))
    return normalize_rows(pts)


def test_normalize_rows_is_phase_canonical():
    rows = normalize_rows([[2j, 0, 0], [0, -3, 4]])
    np.testing.assert_allclose(rows, [[1, 0, 0], [0, 0.6, -0.8]], atol=1e-15)


def test_embedding_distance_matches_fs_angle(rng):
    for _ in range(20):
        p, q = normalize_rows(rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3)))
        overlap = abs(np.vdot(p, q)) ** 2
        f = embed(np.array([p, q]))
        assert np.sum((f[0] - f[1]) ** 2) == pytest.approx(2 * (1 - overlap), abs=1e-12)
        angle = math.asin(math.sqrt(1 - overlap))
        assert float(angle_from_chord(chord(angle))) == pytest.approx(angle, abs=1e-7)


# ---------- cluster rule ------------------------------------------------------

def test_cluster_mask_needs_k_deep_neighbours(rng):
    coords = np.vstack([blob(E[0], 20, 1e-5, rng), E[1:2]])
    lengths = np.array([5] * 20 + [5])
    mask = cluster_mask(coords, lengths, min_len=3, k=10, eps=1e-2)
    assert mask[:20].all()
    assert not mask[20]


def test_cluster_mask_ignores_short_words(rng):
    coords = blob(E[0], 20, 1e-5, rng)
    lengths = np.array([1] * 15 + [4] * 5)
    assert not cluster_mask(coords, lengths, min_len=3, k=10).any()
    assert cluster_mask(coords, lengths, min_len=1, k=10).all()


def test_cluster_mask_empty():
    assert cluster_mask(np.zeros((0, 3)), np.zeros(0), 1).shape == (0,)


def test_thin_keeps_one_per_cell():
    coords = np.vstack([E[0], E[0], E[1]])
    keep = thin(coords, 1e-3)
    assert keep.tolist() == [True, False, True]


def test_cluster_representatives_are_deepest(rng):
    coords = np.vstack([blob(E[0], 10, 1e-5, rng), blob(E[2], 10, 1e-5, rng)])
    lengths = np.arange(20)
    reps = cluster_representatives(coords, lengths, eps=1e-2)
    assert len(reps) == 2
    np.testing.assert_allclose(reps[0], coords[19])
    np.testing.assert_allclose(reps[1], coords[9])


# ---------- distances ---------------------------------------------------------

def test_hausdorff_edge_cases():
    assert hausdorff(E[:1], E[:1]) == pytest.approx(0, abs=1e-7)
    assert hausdorff(np.zeros((0, 3)), np.zeros((0, 3))) == 0.0
    assert hausdorff(E[:1], np.zeros((0, 3))) == pytest.approx(math.pi / 2)
    assert hausdorff(E[:1], E[:2]) == pytest.approx(math.pi / 2)


def test_hausdorff_accepts_clouds():
    a = PointCloud(E[:2], 2)
    b = PointCloud(np.array([[1, 1, 0]]), 2)
    assert hausdorff(a, b) == pytest.approx(math.pi / 4)


def test_min_pairwise_distance():
    assert min_pairwise_distance(E) == pytest.approx(math.pi / 2)
    assert min_pairwise_distance(E[:1]) == pytest.approx(math.pi / 2)


# ---------- point clouds ------------------------------------------------------

def test_point_cloud_frame_columns():
    cloud = PointCloud(E[:2], 2, tags=["L0", "L1"])
    frame = cloud.to_frame()
    assert list(frame.columns) == ["z1_re", "z1_im", "z2_re", "z2_im", "z3_re", "z3_im", "layer"]
    back = PointCloud.from_frame(frame)
    assert back.dim == 2
    assert back.tags == ["L0", "L1"]
    np.testing.assert_allclose(back.coords, cloud.coords)


def test_point_cloud_select_and_merge():
    cloud = PointCloud(E, 2, depth=4, tags=["L0", "L1", "L2"])
    picked = cloud.select(np.array([True, False, True]))
    assert picked.tags == ["L0", "L2"]
    merged = picked.merge(PointCloud(E[:1], 2, depth=7))
    assert len(merged) == 3
    assert merged.depth == 7
    assert merged.tags == ["L0", "L2", ""]


def test_point_cloud_validates_tags():
    with pytest.raises(ValueError):
        PointCloud(E, 2, tags=["L0"])


def test_empty_point_cloud():
    cloud = PointCloud([], 1)
    assert cloud.coords.shape == (0, 2)
    assert cloud.to_json()["points"] == []
