import numpy as np
import pytest

from firewatch.vision import (
    BackgroundModel,
    FrameError,
    GridSpec,
    NightDetectorConfig,
    amdf_score,
    as_gray,
    brd_mask,
    center_crop_square,
    detect_night_fire,
    flicker_score,
    join_grid,
    preprocess,
    read_frames,
    resize_bilinear,
    split_grid,
    synth_video,
    write_frames,
)


def rgb(h, w, value=0):
    return np.full((h, w, 3), value, dtype=np.uint8)


WARM_FLICKER_SPEC = {
    "width": 320, "height": 240, "frames": 16, "background": 8,
    "blobs": [{"cx": 160, "cy": 120, "radius": 30, "mode": "flicker",
               "level_lo": 120, "level_hi": 255, "color": [1.0, 0.7, 0.3]}],
}


class TestPreprocess:
    def test_uniform_frame_stays_uniform(self):
        out = preprocess(np.full((300, 400), 77, dtype=np.uint8))
        assert out.shape == (240, 240)
        assert np.all(out == 77)

    def test_full_hd_geometry(self):
        # 1920x1080 crops to the centered 1080x1080: columns < 420 fall away.
        frame = np.zeros((1080, 1920), dtype=np.uint8)
        frame[:, :420] = 255
        assert np.all(preprocess(frame) == 0)
        frame[:, :470] = 255  # a 50px band inside the crop survives resizing
        assert preprocess(frame).max() > 0

    def test_pure_red_luma(self):
        frame = np.zeros((240, 240, 3), dtype=np.uint8)
        frame[:, :, 0] = 255
        assert np.all(preprocess(frame) == 76)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        frame = rng.integers(0, 256, size=(260, 410, 3), dtype=np.uint8)
        once = preprocess(frame)
        assert np.array_equal(preprocess(once), once)

    def test_too_small_rejected(self):
        with pytest.raises(FrameError):
            preprocess(np.zeros((100, 100), dtype=np.uint8))

    def test_resize_identity_at_same_size(self):
        rng = np.random.default_rng(1)
        frame = rng.integers(0, 256, size=(240, 240), dtype=np.uint8)
        assert np.array_equal(resize_bilinear(frame, 240, 240), frame)

    def test_center_crop(self):
        frame = np.arange(6 * 4).reshape(6, 4).astype(np.uint8)
        assert center_crop_square(frame).shape == (4, 4)


class TestGrid:
    def test_full_hd_cells(self):
        frame = np.random.default_rng(2).integers(0, 256, (1080, 1920), dtype=np.uint8)
        cells = split_grid(frame, GridSpec(cols=8, rows=4))
        assert len(cells) == 32
        assert all(c.shape == (270, 240) for c in cells)

    def test_reassembly_is_byte_identical(self):
        rng = np.random.default_rng(3)
        frame = rng.integers(0, 256, (1080, 1920, 3), dtype=np.uint8)
        spec = GridSpec(cols=8, rows=4)
        assert np.array_equal(join_grid(split_grid(frame, spec), spec), frame)

    def test_degenerate_single_pixel_cells(self):
        frame = np.arange(32, dtype=np.uint8).reshape(4, 8)
        cells = split_grid(frame, GridSpec(cols=8, rows=4))
        assert len(cells) == 32
        assert all(c.shape == (1, 1) for c in cells)
        assert [int(c[0, 0]) for c in cells] == list(range(32))

    def test_uneven_sizes_differ_by_at_most_one(self):
        frame = np.zeros((10, 13), dtype=np.uint8)
        cells = split_grid(frame, GridSpec(cols=4, rows=3))
        widths = {c.shape[1] for c in cells}
        heights = {c.shape[0] for c in cells}
        assert max(widths) - min(widths) <= 1
        assert max(heights) - min(heights) <= 1
        assert sum(c.size for c in cells) == frame.size


class TestBrd:
    def test_all_black(self):
        mask, regions, _ = brd_mask(np.zeros((20, 20), dtype=np.uint8))
        assert not mask.any()
        assert regions == []

    def test_single_block(self):
        frame = np.zeros((20, 20), dtype=np.uint8)
        frame[5:15, 5:15] = 255
        _, regions, _ = brd_mask(frame)
        assert len(regions) == 1
        assert regions[0].area == 100
        assert regions[0].bbox == (5, 5, 15, 15)

    def test_threshold_boundary_is_inclusive(self):
        frame = np.zeros((4, 4), dtype=np.uint8)
        frame[0, 0] = 180
        frame[1, 1] = 179
        mask, regions, _ = brd_mask(frame, threshold=180)
        assert mask[0, 0] and not mask[1, 1]
        assert len(regions) == 1 and regions[0].area == 1

    def test_min_region_filter(self):
        frame = np.zeros((20, 20), dtype=np.uint8)
        frame[0, 0] = 255          # area 1
        frame[5:15, 5:15] = 255    # area 100
        _, regions, _ = brd_mask(frame, min_region_px=10)
        assert len(regions) == 1 and regions[0].area == 100

    def test_mask_area_monotone_in_threshold(self):
        rng = np.random.default_rng(4)
        frame = rng.integers(0, 256, (50, 50), dtype=np.uint8)
        areas = [brd_mask(frame, threshold=t)[0].sum() for t in range(0, 256, 16)]
        assert all(b <= a for a, b in zip(areas, areas[1:]))

    def test_separated_blobs_count_drops_with_threshold(self):
        frame = np.zeros((30, 30), dtype=np.uint8)
        frame[2:6, 2:6] = 200
        frame[20:24, 20:24] = 150
        assert len(brd_mask(frame, threshold=140)[1]) == 2
        assert len(brd_mask(frame, threshold=180)[1]) == 1
        assert len(brd_mask(frame, threshold=210)[1]) == 0


class TestAmdf:
    def test_constant_series(self):
        assert amdf_score([50.0] * 10, 1) == 0.0

    def test_alternating_full_swing(self):
        series = [0.0, 255.0] * 8
        assert amdf_score(series, 1) == pytest.approx(1.0)

    def test_hand_computed(self):
        assert amdf_score([100, 120, 100, 120], 1) == pytest.approx(20 / 255)

    def test_score_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            series = rng.uniform(0, 255, size=20)
            for tau in (1, 2, 3):
                assert 0.0 <= amdf_score(series, tau) <= 1.0

    def test_too_short(self):
        with pytest.raises(ValueError):
            amdf_score([1.0, 2.0], 2)
        with pytest.raises(ValueError):
            amdf_score([1.0], 1)

    def test_flicker_score_is_max_over_lags(self):
        series = [0.0, 255.0] * 8
        assert flicker_score(series) == pytest.approx(1.0)  # lag 1 dominates


class TestBackgroundModel:
    def test_first_frame_initializes(self):
        bg = BackgroundModel(0.1)
        diff = bg.observe(np.full((4, 4), 100, dtype=np.uint8))
        assert np.all(diff == 0)

    def test_running_average_recurrence(self):
        bg = BackgroundModel(0.5)
        bg.observe(np.full((2, 2), 100, dtype=np.uint8))
        diff = bg.observe(np.full((2, 2), 200, dtype=np.uint8))
        assert np.all(diff == 100)
        assert np.all(bg.background == 150)  # 100 + 0.5 * (200 - 100)


class TestNightDetector:
    def test_flickering_warm_blob_is_fire(self):
        frames = synth_video(WARM_FLICKER_SPEC)
        verdict = detect_night_fire(frames)
        assert verdict.fire
        fire_regions = [v for v in verdict.regions if v.is_fire]
        assert len(fire_regions) == 1
        v = fire_regions[0]
        # Gate values verified by hand: gray levels alternate 89/189, so
        # AMDF at lag 1 is 100/255 and the window means are warm-ordered.
        assert v.flicker == pytest.approx(100 / 255, abs=1e-3)
        assert v.foreground and v.color_ok and v.bright

    def test_static_bright_blob_rejected_by_flicker(self):
        spec = dict(WARM_FLICKER_SPEC)
        spec["blobs"] = [dict(WARM_FLICKER_SPEC["blobs"][0], mode="static")]
        verdict = detect_night_fire(synth_video(spec))
        assert not verdict.fire
        assert len(verdict.regions) == 1
        assert verdict.regions[0].flicker == 0.0  # constant series

    def test_flickering_blue_blob_rejected_by_color(self):
        spec = dict(WARM_FLICKER_SPEC)
        spec["blobs"] = [dict(WARM_FLICKER_SPEC["blobs"][0], color=[0.7, 0.85, 1.0])]
        verdict = detect_night_fire(synth_video(spec))
        assert not verdict.fire
        assert len(verdict.regions) == 1
        v = verdict.regions[0]
        assert v.flicker_ok and not v.color_ok

    def test_constant_video_never_fires(self):
        for level in (0, 128, 255):
            frames = [rgb(60, 80, level) for _ in range(16)]
            assert not detect_night_fire(frames).fire

    def test_window_too_short(self):
        with pytest.raises(FrameError):
            detect_night_fire([rgb(20, 20)] * 3)

    def test_mixed_sizes_rejected(self):
        frames = [rgb(20, 20)] * 15 + [rgb(20, 30)]
        with pytest.raises(FrameError):
            detect_night_fire(frames)

    def test_background_state_updates_across_calls(self):
        frames = synth_video(WARM_FLICKER_SPEC)
        bg = BackgroundModel(0.05)
        detect_night_fire(frames, background=bg)
        assert bg.background is not None
        first = bg.background.copy()
        detect_night_fire(frames, background=bg)
        assert not np.array_equal(bg.background, first)


class TestFrameFiles:
    def test_round_trip_rgb(self, tmp_path):
        frames = synth_video(WARM_FLICKER_SPEC)
        path = tmp_path / "clip.frames"
        write_frames(path, frames)
        back = read_frames(path)
        assert len(back) == len(frames)
        assert all(np.array_equal(a, b) for a, b in zip(frames, back))

    def test_round_trip_gray(self, tmp_path):
        frames = [np.random.default_rng(i).integers(0, 256, (30, 40), dtype=np.uint8)
                  for i in range(3)]
        path = tmp_path / "gray.frames"
        write_frames(path, frames)
        back = read_frames(path)
        assert all(np.array_equal(a, b) for a, b in zip(frames, back))

    def test_empty_sequence(self, tmp_path):
        path = tmp_path / "empty.frames"
        write_frames(path, [])
        assert read_frames(path) == []

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "clip.frames"
        write_frames(path, synth_video(WARM_FLICKER_SPEC))
        data = path.read_bytes()
        path.write_bytes(data[:-100])
        with pytest.raises(FrameError, match="truncated"):
            read_frames(path)


def test_as_gray_passthrough_for_2d():
    frame = np.random.default_rng(6).integers(0, 256, (10, 10), dtype=np.uint8)
    assert as_gray(frame) is frame


def test_night_config_validation():
    with pytest.raises(ValueError):
        NightDetectorConfig(brd_threshold=300)
    with pytest.raises(ValueError):
        NightDetectorConfig(amdf_threshold=1.5)
