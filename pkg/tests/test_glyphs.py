import numpy as np
import pytest

from cuebar.arrangement import ArrangementLayout, assign_cues, cue_symbols_for
from cuebar.errors import FitError, FormatError, RangeError
from cuebar.glyphs import (DIGITS, DOT, RECT, SINGLE, SYMBOLS, GlyphSet, default_glyphs, min_pairwise_distance,
                           read_cue, render_cue)


def test_shipped_set_shape():
    g = default_glyphs()
    assert g.cell == (10, 6)
    assert set(SYMBOLS) <= set(g.symbols)


def test_digit_distance_gate():
    d, pair = min_pairwise_distance(default_glyphs(), with_pair=True)
    assert d >= 14
    assert set(pair) <= set(DIGITS)


def test_all_symbols_distance_gate():
    assert min_pairwise_distance(default_glyphs(), SYMBOLS) >= 14


def test_marker_shapes():
    g = default_glyphs()
    for sym, (h, w) in {DOT: (2, 2), RECT: (6, 4), SINGLE: (4, 4)}.items():
        rows, cols = np.nonzero(g[sym])
        assert g[sym].sum() == h * w
        assert (rows.max() - rows.min() + 1, cols.max() - cols.min() + 1) == (h, w)


def test_distance_of_duplicates_and_complements():
    a = default_glyphs()["1"]
    assert min_pairwise_distance(GlyphSet({"1": a, "7": a.copy()}), ["1", "7"]) == 0
    assert min_pairwise_distance(GlyphSet({"1": a, "7": 1 - a}), ["1", "7"]) == 60


def test_text_roundtrip():
    g = default_glyphs()
    back = GlyphSet.from_text(g.to_text())
    assert all(np.array_equal(back[s], g[s]) for s in g.symbols)


def test_bad_glyph_text():
    with pytest.raises(FormatError):
        GlyphSet.from_text("= A\n#x#\n")


def test_render_empty():
    assert not render_cue([], (30, 42)).bitmap.any()


def test_render_single_cell_verbatim():
    assert np.array_equal(render_cue(["1"], (10, 6)).bitmap, default_glyphs()["1"])


def test_render_spacing():
    g = default_glyphs()
    bm = render_cue(["1", "0", RECT], (10, 20)).bitmap
    assert bm.shape == (10, 20)
    for sym, c in (("1", 0), ("0", 7), (RECT, 14)):
        assert np.array_equal(bm[:, c:c + 6], g[sym])
    assert not bm[:, [6, 13]].any()


def test_render_fit_errors():
    with pytest.raises(FitError):
        render_cue(["1", "2", "3"], (10, 19))
    with pytest.raises(FitError):
        render_cue(["1"], (9, 30))


def test_read_back_and_unknown():
    bm = render_cue(["4", "2", DOT], (30, 42)).bitmap
    assert read_cue(bm) == ["4", "2", DOT]
    bm[0, 0] ^= 1
    assert read_cue(bm)[0] == "?"
    stray = render_cue(["4"], (30, 42)).bitmap
    stray[20, 30] = 1
    assert read_cue(stray) == ["4", "?"]


@pytest.mark.parametrize("idx, layout, want", [
    (2, ArrangementLayout.table(5, 2), ("2", DOT)),
    (10, ArrangementLayout.table(5, 2), ("1", "0", RECT)),
    (3, ArrangementLayout.linear(5), ("3",)),
    (1, ArrangementLayout.single(), (SINGLE,)),
])
def test_cue_symbols(idx, layout, want):
    assert cue_symbols_for(idx, layout) == want


@pytest.mark.parametrize("idx", [0, 11])
def test_cue_symbols_range(idx):
    with pytest.raises(RangeError):
        cue_symbols_for(idx, ArrangementLayout.table(5, 2))


def test_cues_are_injective():
    for layout in [ArrangementLayout.table(r, c) for r in range(1, 6) for c in range(1, 6)] + \
            [ArrangementLayout.linear(n) for n in range(1, 30)]:
        cues = assign_cues(layout)
        assert len(set(cues)) == len(cues)
