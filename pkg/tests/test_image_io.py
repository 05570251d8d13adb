"""Image and mask containers, normalization, and PGM/PNG round trips."""

import io

import numpy as np
import pytest
from PIL import Image

from selseg.image_io import (
    BinaryMask,
    GrayImage,
    decode_image,
    decode_mask,
    encode_image_png,
    load_image,
    load_mask,
    normalize,
    save_image,
    save_mask,
)


class TestGrayImage:
    def test_accepts_unit_range_2d(self):
        img = GrayImage(np.linspace(0.0, 1.0, 25).reshape(5, 5))
        assert img.shape == (5, 5)
        assert img.height == 5 and img.width == 5
        assert img.data.dtype == np.float64

    def test_data_is_read_only(self):
        img = GrayImage(np.zeros((4, 4)))
        with pytest.raises(ValueError):
            img.data[0, 0] = 1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayImage(np.full((4, 4), 1.5))
        with pytest.raises(ValueError):
            GrayImage(np.full((4, 4), -0.1))

    def test_rejects_non_finite(self):
        bad = np.zeros((4, 4))
        bad[1, 1] = np.nan
        with pytest.raises(ValueError):
            GrayImage(bad)

    def test_rejects_wrong_rank_and_tiny(self):
        with pytest.raises(ValueError):
            GrayImage(np.zeros(16))
        with pytest.raises(ValueError):
            GrayImage(np.zeros((2, 8)))


class TestBinaryMask:
    def test_accepts_01(self):
        mask = BinaryMask(np.eye(4, dtype=np.uint8))
        assert mask.data.dtype == np.uint8
        assert mask.shape == (4, 4)

    def test_rejects_other_values(self):
        with pytest.raises(ValueError):
            BinaryMask(np.full((3, 3), 7, dtype=np.uint8))

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValueError):
            BinaryMask(np.zeros(9, dtype=np.uint8))


class TestNormalize:
    def test_affine_span(self):
        out = normalize(np.array([[2.0, 4.0], [6.0, 10.0]]))
        assert out.min() == 0.0 and out.max() == 1.0
        assert out[0, 1] == pytest.approx(0.25)

    def test_constant_maps_to_zeros(self):
        assert np.array_equal(normalize(np.full((3, 3), 77.0)), np.zeros((3, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            normalize(np.array([[np.inf, 0.0], [0.0, 0.0]]))


class TestPgm:
    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        pixels = rng.integers(0, 256, (9, 7), dtype=np.uint8)
        img = GrayImage(pixels / 255.0)
        path = tmp_path / "img.pgm"
        save_image(img, path)
        back = load_image(path)
        # save quantizes to 8 bit and load re-normalizes by min-max.
        assert np.abs(back.data * (pixels.max() - pixels.min()) + pixels.min()
                      - pixels).max() < 0.51

    def test_mask_roundtrip_exact(self, tmp_path):
        mask = BinaryMask((np.arange(35).reshape(5, 7) % 3 == 0).astype(np.uint8))
        path = tmp_path / "mask.pgm"
        save_mask(mask, path)
        assert np.array_equal(load_mask(path).data, mask.data)

    def test_header_comments_skipped(self, tmp_path):
        raw = b"P5 # binary gray\n# another comment\n4 3\n255\n" + bytes(range(12))
        path = tmp_path / "c.pgm"
        path.write_bytes(raw)
        img = load_image(path)
        assert img.shape == (3, 4)

    def test_truncated_raster_rejected(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00\x01")
        with pytest.raises(ValueError):
            load_image(path)

    def test_sixteen_bit_rejected(self, tmp_path):
        path = tmp_path / "w.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(ValueError):
            load_image(path)


class TestPng:
    def test_gray_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        pixels = rng.integers(0, 256, (8, 6), dtype=np.uint8)
        pixels[0, 0] = 0
        pixels[0, 1] = 255
        path = tmp_path / "img.png"
        Image.fromarray(pixels, mode="L").save(path)
        img = load_image(path)
        assert np.abs(img.data * 255.0 - pixels).max() < 1e-9

    def test_color_uses_luma_weights(self, tmp_path):
        arr = np.zeros((4, 4, 3), dtype=np.uint8)
        arr[:, :, 0] = 200
        arr[:2, :, 1] = 100
        path = tmp_path / "rgb.png"
        Image.fromarray(arr, mode="RGB").save(path)
        img = load_image(path)
        top = 0.299 * 200 + 0.587 * 100
        bottom = 0.299 * 200
        assert img.data[0, 0] == pytest.approx(1.0)
        assert img.data[3, 3] == pytest.approx(0.0)
        assert (top - bottom) != 0  # normalization endpoints differ

    def test_sixteen_bit_png_rejected(self, tmp_path):
        arr = (np.arange(16).reshape(4, 4) * 4000).astype(np.uint16)
        path = tmp_path / "deep.png"
        Image.fromarray(arr).save(path)
        with pytest.raises(ValueError):
            load_image(path)

    def test_mask_png_roundtrip(self, tmp_path):
        mask = BinaryMask((np.arange(24).reshape(4, 6) % 2).astype(np.uint8))
        path = tmp_path / "m.png"
        save_mask(mask, path)
        assert np.array_equal(load_mask(path).data, mask.data)


class TestBytesInterface:
    def test_decode_image_matches_load(self, tmp_path):
        rng = np.random.default_rng(2)
        pixels = rng.integers(0, 256, (6, 6), dtype=np.uint8)
        path = tmp_path / "img.pgm"
        Image.fromarray(pixels, mode="L").save(tmp_path / "img.png")
        save_image(GrayImage(pixels / 255.0), path)
        assert np.array_equal(
            decode_image(path.read_bytes()).data, load_image(path).data
        )
        png = tmp_path / "img.png"
        assert np.array_equal(
            decode_image(png.read_bytes()).data, load_image(png).data
        )

    def test_encode_image_png_roundtrips(self):
        rng = np.random.default_rng(3)
        pixels = rng.integers(0, 256, (5, 9), dtype=np.uint8)
        pixels[0, 0] = 0
        pixels[1, 0] = 255
        img = GrayImage(pixels / 255.0)
        data = encode_image_png(img)
        arr = np.asarray(Image.open(io.BytesIO(data)))
        assert np.array_equal(arr, pixels)

    def test_decode_mask_thresholds_at_half(self):
        pixels = np.array([[0, 120, 135, 255]], dtype=np.uint8).repeat(3, axis=0)
        buf = io.BytesIO()
        Image.fromarray(pixels, mode="L").save(buf, format="PNG")
        mask = decode_mask(buf.getvalue())
        assert mask.data.tolist() == [[0, 0, 1, 1]] * 3

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            decode_image(b"not an image at all")


def test_unsupported_extension_rejected(tmp_path):
    img = GrayImage(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        save_image(img, tmp_path / "img.tiff")
