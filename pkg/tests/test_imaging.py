import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manifoldwalk.errors import InvalidArgument
from manifoldwalk.imaging import color, compare, raster, superpixel as sp


def uniform(h, w, rgb):
    return np.tile(np.array(rgb, dtype=np.uint8), (h, w, 1))


class TestColor:
    def test_white(self):
        L, a, b = color.rgb_to_lab(np.array([255, 255, 255]))
        assert abs(L - 100) < 1e-9 and abs(a) < 0.01 and abs(b) < 0.01

    def test_black(self):
        assert np.allclose(color.rgb_to_lab(np.array([0, 0, 0])), 0.0)

    def test_round_trip(self):
        rgb = np.random.default_rng(0).integers(0, 256, size=(1000, 3)).astype(np.uint8)
        back = color.lab_to_rgb(color.rgb_to_lab(rgb))
        assert np.abs(back.astype(int) - rgb).max() <= 1

    def test_reference_value(self):
        # sRGB red, standard D65 value
        np.testing.assert_allclose(color.rgb_to_lab(np.array([255, 0, 0])), [53.24, 80.09, 67.20], atol=0.02)

    def test_out_of_gamut_clamped(self):
        out = color.lab_to_rgb(np.array([50.0, 127.0, -127.0]))
        assert out.dtype == np.uint8


class TestGrid:
    def test_hand_trace(self):
        expected = [[0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 3, 3], [2, 2, 3, 3]]
        assert sp.grid_superpixels((4, 4), 4).tolist() == expected

    def test_single_segment(self):
        assert np.all(sp.grid_superpixels((6, 6), 1) == 0)
        assert sp.grid_superpixels((5, 7), 1).max() == 1  # step 6 < 7 leaves a second column block

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 200))
    def test_label_count_and_cover(self, h, w, n):
        seg = sp.grid_superpixels((h, w), n)
        step = sp.grid_step(h, w, n)
        labels = np.unique(seg)
        assert len(labels) == -(-h // step) * -(-w // step)
        assert labels.tolist() == list(range(len(labels)))

    def test_bad_n(self):
        with pytest.raises(InvalidArgument):
            sp.grid_superpixels((4, 4), 0)


class TestPalette:
    def test_uniform(self):
        lab = color.rgb_to_lab(uniform(6, 6, (10, 200, 30)))
        pal = sp.kmeans_palette(lab, 5, seed=0)
        assert len(pal) == 1
        np.testing.assert_allclose(pal[0], lab[0, 0])
        _, _, inertia = sp.kmeans(lab.reshape(-1, 3), 5, seed=0)
        assert inertia == 0.0

    def test_two_colours(self):
        img = uniform(4, 4, (255, 0, 0))
        img[:, 2:] = (0, 0, 255)
        lab = color.rgb_to_lab(img)
        pal = sp.kmeans_palette(lab, 2, seed=3)
        expected = {tuple(np.round(lab[0, 0], 9)), tuple(np.round(lab[0, 3], 9))}
        assert {tuple(np.round(c, 9)) for c in pal} == expected

    def test_single_colour_is_mean(self):
        lab = color.rgb_to_lab(np.random.default_rng(1).integers(0, 256, (5, 5, 3)))
        np.testing.assert_allclose(sp.kmeans_palette(lab, 1, seed=0)[0], lab.reshape(-1, 3).mean(0))

    def test_too_many(self):
        with pytest.raises(InvalidArgument):
            sp.kmeans_palette(np.zeros((2, 2, 3)), 5)

    def test_deterministic(self):
        lab = color.rgb_to_lab(np.random.default_rng(2).integers(0, 256, (8, 8, 3)))
        assert np.array_equal(sp.kmeans_palette(lab, 6, seed=4), sp.kmeans_palette(lab, 6, seed=4))

    def test_empty_cluster_reseeded(self):
        pts = np.array([[0.0, 0, 0]] * 5 + [[10.0, 0, 0]] * 5 + [[10.5, 0, 0]])
        centers, assign, _ = sp.kmeans(pts, 3, seed=0)
        assert len(np.unique(assign)) == 3


class TestSuperpixelImage:
    def test_n1_uniform(self):
        img = np.random.default_rng(3).integers(0, 256, (9, 9, 3)).astype(np.uint8)
        out = sp.superpixel_centroid_image(img, 1, seed=0)
        assert len(np.unique(out.reshape(-1, 3), axis=0)) == 1

    def test_uniform_input_unchanged(self):
        img = uniform(6, 6, (120, 30, 220))
        out = sp.superpixel_centroid_image(img, 4, seed=0)
        assert np.abs(out.astype(int) - img).max() <= 1

    def test_two_block_image(self):
        img = uniform(4, 4, (200, 20, 20))
        img[:, 2:] = (20, 20, 200)
        res = sp.superpixel_centroids(img, 4, seed=0)
        for by in (0, 2):
            for bx in (0, 2):
                block = res.lab[by:by + 2, bx:bx + 2].reshape(-1, 3)
                assert np.all(block == block[0])
                assert any(np.array_equal(block[0], c) for c in res.palette)

    def test_at_most_n_assignments(self):
        img = np.random.default_rng(4).integers(0, 256, (20, 20, 3)).astype(np.uint8)
        res = sp.superpixel_centroids(img, 9, seed=1)
        assert len(np.unique(res.assignment)) <= 9
        assert np.array_equal(res.image, sp.superpixel_centroid_image(img, 9, seed=1))


class TestRaster:
    def test_point_cloud_order(self):
        img = np.arange(12, dtype=np.uint8).reshape(2, 2, 3)
        X = raster.image_to_point_cloud(img, include_xy=True)
        assert X.shape == (4, 5)
        assert X[:, :2].tolist() == [[0, 0], [0.5, 0], [0, 0.5], [0.5, 0.5]]
        assert raster.image_to_point_cloud(img, include_xy=False).shape == (4, 3)

    def test_uniform_rows_identical(self):
        X = raster.image_to_point_cloud(uniform(3, 3, (9, 99, 199)), include_xy=False)
        assert np.all(X == X[0]) and np.all((X >= 0) & (X <= 1))

    def test_resize_identity(self):
        img = np.random.default_rng(5).integers(0, 256, (5, 7, 3)).astype(np.uint8)
        assert np.array_equal(raster.resize(img, 7, 5), img)

    def test_resize_uniform_upscale(self):
        out = raster.resize(uniform(3, 4, (1, 2, 3)), 8, 6)
        assert out.shape == (6, 8, 3) and np.all(out == (1, 2, 3))

    def test_checkerboard_downscale(self):
        img = np.zeros((4, 4, 3), dtype=np.uint8)
        img[::2, ::2] = 255
        img[1::2, 1::2] = 255
        out = raster.resize(img, 2, 2)
        assert np.all(np.abs(out.astype(int) - 127.5) <= 1)

    def test_bad_size(self):
        with pytest.raises(InvalidArgument):
            raster.resize(uniform(2, 2, (0, 0, 0)), 0, 2)

    @pytest.mark.parametrize("suffix", [".png", ".ppm"])
    def test_io_round_trip(self, tmp_path, suffix):
        img = np.random.default_rng(6).integers(0, 256, (4, 5, 3)).astype(np.uint8)
        path = tmp_path / f"x{suffix}"
        raster.write_image(path, img)
        assert np.array_equal(raster.read_image(path), img)

    def test_rgba_alpha_dropped(self, tmp_path):
        from PIL import Image
        rgba = np.zeros((2, 2, 4), dtype=np.uint8)
        rgba[..., 0] = 50
        rgba[..., 3] = 10
        Image.fromarray(rgba, "RGBA").save(tmp_path / "a.png")
        assert np.all(raster.read_image(tmp_path / "a.png") == (50, 0, 0))

    def test_pixel_budget(self):
        out = raster.fit_pixel_budget(uniform(100, 50, (0, 0, 0)), 2500)
        assert out.shape[0] * out.shape[1] <= 2500


class TestCompare:
    def test_identical(self, data_dir):
        a = raster.read_image(data_dir / "scene_a.png")
        assert compare.image_distance(a, a).distance == 0.0

    def test_symmetric_and_resizes(self, data_dir):
        a = raster.read_image(data_dir / "scene_a.png")
        b = raster.resize(raster.read_image(data_dir / "scene_b.png"), 30, 36)
        d1 = compare.image_distance(a, b, max_pixels=None)
        d2 = compare.image_distance(b, a, max_pixels=None)
        assert d1.distance == d2.distance and d1.n == 30 * 36

    def test_superpixel_ordering_on_bundled_pair(self, data_dir):
        from manifoldwalk.experiments import superpixel_study
        a = raster.read_image(data_dir / "scene_a.png")
        b = raster.read_image(data_dir / "scene_b.png")
        rows = {r.grid_size: r.distance for r in superpixel_study(a, b, grids=(10, 20))}
        assert abs(rows["10"] - rows["original"]) > abs(rows["20"] - rows["original"])
