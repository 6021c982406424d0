"""PGM and matrix I/O, downsampling and segmentation."""

from __future__ import annotations

import numpy as np
import pytest

from videosep.dmd import FrameMatrix
from videosep.errors import FormatError, InsufficientFramesError, UnsupportedError
from videosep.video import (
    FrameSequence,
    SegmentPlan,
    downsample,
    frames_from_matrix,
    frames_to_matrix,
    load_pgm_sequence,
    read_matrix_binary,
    read_pgm,
    segment,
    segment_spans,
    write_matrix_binary,
    write_pgm,
    write_pgm_sequence,
)


def random_sequence(count, h, w, seed=0, frame_rate=1.0) -> FrameSequence:
    rng = np.random.default_rng(seed)
    return FrameSequence(frames=rng.random((count, h, w)), frame_rate=frame_rate)


class TestPgm:
    def test_reads_known_bytes(self, tmp_path):
        path = tmp_path / "frame_000000.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
        grid = read_pgm(path)
        np.testing.assert_allclose(
            grid, [[0.0, 1.0], [128 / 255, 64 / 255]], atol=1e-15
        )

    def test_comments_in_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# made by hand\n2 1\n255\n" + bytes([10, 20]))
        np.testing.assert_allclose(read_pgm(path), [[10 / 255, 20 / 255]])

    def test_sixteen_bit_maxval(self, tmp_path):
        path = tmp_path / "wide.pgm"
        path.write_bytes(b"P5\n1 2\n65535\n" + (0).to_bytes(2, "big") + (65535).to_bytes(2, "big"))
        np.testing.assert_allclose(read_pgm(path), [[0.0], [1.0]])

    def test_empty_directory(self, tmp_path):
        with pytest.raises(OSError):
            load_pgm_sequence(tmp_path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.pgm"
        path.write_bytes(b"P6\n1 1\n255\n\x00")
        with pytest.raises(FormatError, match="x.pgm"):
            read_pgm(path)

    def test_truncated_raster(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        with pytest.raises(FormatError, match="short.pgm"):
            read_pgm(path)

    def test_inconsistent_dimensions(self, tmp_path):
        write_pgm(tmp_path / "frame_000000.pgm", np.zeros((2, 2)))
        write_pgm(tmp_path / "frame_000001.pgm", np.zeros((3, 2)))
        with pytest.raises(FormatError):
            load_pgm_sequence(tmp_path)

    def test_sequence_round_trip(self, tmp_path):
        seq = random_sequence(5, 6, 4, seed=1)
        write_pgm_sequence(seq, tmp_path)
        back = load_pgm_sequence(tmp_path)
        assert np.abs(back.frames - seq.frames).max() <= 1 / (2 * 255)

    def test_frames_ordered_by_index(self, tmp_path):
        for i, value in [(2, 0.2), (0, 0.0), (10, 1.0)]:
            write_pgm(tmp_path / f"frame_{i:06d}.pgm", np.full((2, 2), value))
        seq = load_pgm_sequence(tmp_path)
        assert list(seq.frames[:, 0, 0]) == pytest.approx([0.0, 0.2, 1.0], abs=1e-2)

    def test_brighten_quantization(self, tmp_path):
        seq = FrameSequence(frames=np.array([[[0.05, 0.5]]]))
        write_pgm_sequence(seq, tmp_path, brighten=10.0)
        raw = (tmp_path / "frame_000000.pgm").read_bytes()
        assert raw[-2:] == bytes([128, 255])  # 0.5*255 rounded; clamped white

    def test_brighten_one_round_trip(self, tmp_path):
        seq = random_sequence(3, 4, 5, seed=2)
        write_pgm_sequence(seq, tmp_path, brighten=1.0)
        back = load_pgm_sequence(tmp_path)
        assert np.abs(back.frames - seq.frames).max() <= 1 / 510

    def test_negative_brighten_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_pgm_sequence(random_sequence(1, 2, 2), tmp_path, brighten=-1.0)


class TestDownsample:
    def test_constant_invariance(self):
        seq = FrameSequence(frames=np.full((2, 8, 6), 0.5))
        out = downsample(seq, 3, 4)
        np.testing.assert_allclose(out.frames, 0.5, atol=1e-15)

    def test_two_by_two_mean(self):
        seq = FrameSequence(frames=np.array([[[0.0, 1.0], [1.0, 0.0]]]))
        out = downsample(seq, 1, 1)
        np.testing.assert_allclose(out.frames, [[[0.5]]], atol=1e-15)

    def test_checkerboard_averages_to_half(self):
        board = (np.indices((192, 240)).sum(axis=0) % 2).astype(float)
        seq = FrameSequence(frames=board[None])
        out = downsample(seq, 120, 96)
        np.testing.assert_allclose(out.frames, 0.5, atol=1e-12)
        assert (out.width, out.height) == (120, 96)

    def test_mean_preserved_when_divisible(self):
        seq = random_sequence(2, 96, 120, seed=3)
        out = downsample(seq, 30, 24)
        assert abs(out.frames.mean() - seq.frames.mean()) < 1e-12

    def test_non_divisible_target(self):
        seq = random_sequence(1, 10, 10, seed=4)
        out = downsample(seq, 7, 3)
        assert (out.width, out.height) == (7, 3)
        assert abs(out.frames.mean() - seq.frames.mean()) < 1e-9

    def test_upsampling_rejected(self):
        with pytest.raises(UnsupportedError):
            downsample(random_sequence(1, 4, 4), 8, 4)


class TestSegment:
    def test_exact_division(self):
        parts = segment(random_sequence(90, 3, 2), SegmentPlan(30))
        assert [p.m for p in parts] == [30, 30, 30]
        assert all(p.n == 6 for p in parts)

    def test_trailing_merge(self):
        parts = segment(random_sequence(31, 2, 2), SegmentPlan(30))
        assert [p.m for p in parts] == [31]

    def test_trailing_kept_when_long_enough(self):
        parts = segment(random_sequence(35, 2, 2), SegmentPlan(30))
        assert [p.m for p in parts] == [30, 5]

    def test_three_hundred_frames_ten_each(self):
        parts = segment(random_sequence(300, 2, 2), SegmentPlan(10))
        assert len(parts) == 30

    def test_too_few_frames(self):
        with pytest.raises(InsufficientFramesError):
            segment(random_sequence(1, 2, 2), SegmentPlan(10))

    def test_spans_cover_disjointly(self):
        spans = segment_spans(95, SegmentPlan(30))
        assert spans == [(0, 30), (30, 60), (60, 90), (90, 95)]
        assert segment_spans(91, SegmentPlan(30))[-1] == (60, 91)

    def test_vectorization_bijection(self):
        seq = random_sequence(8, 5, 7, seed=5)
        x = frames_to_matrix(seq, 2, 6)
        assert (x.n, x.m) == (35, 4)
        back = frames_from_matrix(x, 5, 7)
        np.testing.assert_array_equal(back, seq.frames[2:6])

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            SegmentPlan(1)
        with pytest.raises(ValueError):
            SegmentPlan(5, stride=0)


class TestMatrixBinary:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(6)
        x = FrameMatrix(rng.random((7, 4)))
        path = tmp_path / "seg.dmdv"
        write_matrix_binary(x, path)
        back = read_matrix_binary(path)
        assert np.array_equal(back.values, x.values)

    def test_known_file_length(self, tmp_path):
        x = FrameMatrix(np.array([[0.0, 0.5, 1.0], [0.25, 0.75, 1 / 3]]))
        path = tmp_path / "m.dmdv"
        write_matrix_binary(x, path)
        assert path.stat().st_size == 16 + 6 * 8

    def test_zero_length_file(self, tmp_path):
        path = tmp_path / "empty.dmdv"
        path.write_bytes(b"")
        with pytest.raises(FormatError):
            read_matrix_binary(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.dmdv"
        path.write_bytes(b"NOPE" + bytes(12))
        with pytest.raises(FormatError):
            read_matrix_binary(path)

    def test_truncated_body(self, tmp_path):
        x = FrameMatrix(np.full((3, 3), 0.5))
        path = tmp_path / "trunc.dmdv"
        write_matrix_binary(x, path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(FormatError):
            read_matrix_binary(path)
