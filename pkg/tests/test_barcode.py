import numpy as np
import pytest

from cuebar.barcode import (BLACK, RED, WHITE, BarcodeSpec, capacity, control_points, decode_barcode, embed,
                            encode_barcode, extract_patterns, interior_matrix, lblock_coordinates,
                            observe_cue, read_superpixels, render)
from cuebar.errors import AuthError, CapacityError, FitError, FormatError, RejectError
from cuebar.glyphs import DOT, render_cue
from cuebar.keys import derive_codebook, keygen


def nonce_from(rng) -> bytes:
    return rng.bytes(16)


@pytest.mark.parametrize("pixels, bits", [(10000, 952), (0, 0), (2520, 240)])
def test_capacity(pixels, bits):
    assert capacity(pixels) == bits


def test_capacity_negative():
    with pytest.raises(ValueError):
        capacity(-1)


def test_default_geometry():
    spec = BarcodeSpec()
    assert (spec.x, spec.y, spec.n_bits, spec.n_codewords) == (60, 42, 2520, 40)
    assert spec.interior_display_shape == (180, 84)
    assert spec.cue_shape == (30, 42)


@pytest.mark.parametrize("x, y", [(6, 21), (7, 20), (2, 20), (0, 42)])
def test_invalid_specs(x, y):
    with pytest.raises(ValueError):
        BarcodeSpec(x, y)


def test_tiling_covers_interior_once():
    for x, y in [(6, 12), (60, 42), (30, 42)]:
        rows, cols = lblock_coordinates(x, y)
        flat = rows.ravel() * y + cols.ravel()
        assert np.array_equal(np.sort(flat), np.arange(3 * x // 2 * y))


def test_first_cell_layout():
    rows, cols = lblock_coordinates(6, 12)
    assert list(zip(rows[0], cols[0])) == [(0, 0), (0, 1), (1, 0)]
    assert list(zip(rows[1], cols[1])) == [(1, 1), (2, 0), (2, 1)]
    assert list(zip(rows[2], cols[2])) == [(0, 2), (0, 3), (1, 2)]


def test_roundtrip_default(key, rng):
    spec = BarcodeSpec()
    for n in (0, 1, 57, spec.max_message_bytes):
        m = rng.bytes(n)
        img = encode_barcode(key, m, ["4", "2", DOT], spec, nonce_from(rng))
        got, cue = decode_barcode(img, key)
        assert got == m
        assert np.array_equal(cue.bitmap, render_cue(["4", "2", DOT], spec.cue_shape).bitmap)


def test_capacity_error(key, rng):
    spec = BarcodeSpec(24, 42)
    with pytest.raises(CapacityError):
        encode_barcode(key, bytes(spec.max_message_bytes + 1), ["1"], spec, nonce_from(rng))


def test_cue_fit_error(key, rng):
    with pytest.raises(FitError):
        encode_barcode(key, b"x", ["1", "2", "3", "4", "5", "6", "7"], BarcodeSpec(24, 42), nonce_from(rng))


def test_brightness_shows_cue(key, rng):
    spec = BarcodeSpec()
    img = encode_barcode(key, rng.bytes(40), ["7", DOT], spec, nonce_from(rng))
    assert np.array_equal(observe_cue(img).bitmap, render_cue(["7", DOT], spec.cue_shape).bitmap)


def test_red_only_on_control_points(key, rng):
    spec = BarcodeSpec(24, 42)
    img = encode_barcode(key, b"hello", ["1"], spec, nonce_from(rng))
    s = spec.superpixel
    red = np.argwhere(img.pixels == RED)
    centers = {(int(r), int(c)) for r, c in np.floor(img.control_points).astype(int) // s}
    assert {(int(r) // s, int(c) // s) for r, c in red} == centers
    assert len(red) == len(img.control_points) * s * s


def test_control_points_outside_interior():
    for spec in (BarcodeSpec(), BarcodeSpec(24, 42), BarcodeSpec(6, 12)):
        pts = control_points(spec)
        o = spec.border * spec.superpixel
        h, w = spec.interior_display_shape
        inside = (pts[:, 0] >= o) & (pts[:, 0] < o + h) & (pts[:, 1] >= o) & (pts[:, 1] < o + w)
        assert not inside.any()
        assert len(pts) >= 12
    assert len(control_points(BarcodeSpec())) == 32


def test_wrong_key_rejected_100_pairs(rng):
    spec = BarcodeSpec(24, 42)
    for i in range(100):
        ka, kb = keygen(1000 + 2 * i), keygen(1001 + 2 * i)
        img = encode_barcode(ka, rng.bytes(20), ["1"], spec, nonce_from(rng))
        # a foreign codebook almost always breaks the code before the MAC is reached
        with pytest.raises((RejectError, AuthError)):
            decode_barcode(img, kb)


def test_same_codebook_other_mac_key(key, rng):
    from cuebar.keys import SessionKey
    spec = BarcodeSpec(24, 42)
    img = encode_barcode(key, b"payload", ["1"], spec, nonce_from(rng))
    twin = SessionKey(key.k_E, bytes(16), key.k_V)
    with pytest.raises(AuthError):
        decode_barcode(img, twin)


@pytest.mark.parametrize("labels, want", [
    ([WHITE] * 4, 1),
    ([WHITE, WHITE, BLACK, BLACK], 0),
    ([WHITE, WHITE, WHITE, BLACK], 1),
    ([BLACK] * 4, 0),
    ([RED, WHITE, RED, BLACK], 0),
    ([RED, WHITE, RED, RED], 1),
])
def test_superpixel_votes(labels, want):
    spec = BarcodeSpec(2, 32, superpixel=2)
    cell = np.array(labels, dtype=np.uint8).reshape(2, 2)
    assert read_superpixels(cell, spec)[0, 0] == want


def test_superpixel_shape_check():
    with pytest.raises(FormatError):
        read_superpixels(np.zeros((3, 4), np.uint8), BarcodeSpec())
    with pytest.raises(FormatError):
        interior_matrix(np.zeros((10, 10), np.uint8), BarcodeSpec())


def test_rgb_and_labels_agree(key, rng):
    spec = BarcodeSpec(24, 42)
    m = rng.bytes(30)
    img = encode_barcode(key, m, ["2"], spec, nonce_from(rng))
    assert decode_barcode(img.rgb(), key, spec=spec)[0] == m
    assert decode_barcode(img.pixels, key, spec=spec)[0] == m


def test_interior_only_raster(key, rng):
    spec = BarcodeSpec(24, 42)
    img = encode_barcode(key, b"abc", ["2"], spec, nonce_from(rng))
    o = spec.border * spec.superpixel
    h, w = spec.interior_display_shape
    assert decode_barcode(img.pixels[o:o + h, o:o + w], key, spec=spec)[0] == b"abc"


def test_raw_raster_needs_spec(key, rng):
    img = encode_barcode(key, b"abc", ["2"], BarcodeSpec(24, 42), nonce_from(rng))
    with pytest.raises(FormatError):
        decode_barcode(img.pixels, key)


def test_single_lblock_fragility(key, rng):
    # every alternative pattern of every block moves 1 or 2 recovered bits
    spec = BarcodeSpec(6, 12)
    cb = derive_codebook(key.k_V)
    m1 = rng.integers(0, 2, spec.n_bits).astype(np.uint8)
    cue = rng.integers(0, 2, spec.cue_shape).astype(np.uint8)
    interior = embed(m1, cue, cb, spec)
    pats = extract_patterns(interior, spec)
    base = cb.decode_table[pats]
    checked = 0
    for i in range(spec.n_pairs):
        for alt in range(8):
            if alt == pats[i]:
                continue
            changed = bin(int(cb.decode_table[alt]) ^ int(base[i])).count("1")
            same_group = (bin(alt).count("1") >= 2) == (bin(int(pats[i])).count("1") >= 2)
            if same_group:
                assert 1 <= changed <= 2
            else:
                assert changed <= 2
            checked += 1
    assert checked == spec.n_pairs * 7


def test_encoding_is_deterministic(key):
    spec = BarcodeSpec(24, 42)
    a = encode_barcode(key, b"same", ["1"], spec, bytes(16))
    b = encode_barcode(key, b"same", ["1"], spec, bytes(16))
    assert np.array_equal(a.pixels, b.pixels)


def test_render_upscales():
    spec = BarcodeSpec(6, 12, superpixel=3)
    img = render(np.ones(spec.interior_shape, np.uint8), spec)
    assert img.pixels.shape == spec.display_shape
    assert np.array_equal(read_superpixels(img.pixels, spec)[spec.border:-spec.border, spec.border:-spec.border],
                          np.ones(spec.interior_shape, np.uint8))
