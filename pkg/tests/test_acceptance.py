"""One test per acceptance criterion, at the stated tolerances."""
import itertools

import numpy as np
import pytest

from cuebar.arrangement import (OK, ArrangementLayout, AttackKind, AttackSpec, Violation, apply_attack, assign_cues,
                                verify_arrangement)
from cuebar.barcode import BarcodeSpec, capacity, decode_barcode, encode_barcode
from cuebar.channel import ChannelModel, transmit
from cuebar.ecc import N, ecc_decode_blocks, ecc_encode_block
from cuebar.errors import AuthError, RejectError
from cuebar.glyphs import default_glyphs, min_pairwise_distance
from cuebar.keys import all_codebooks, keygen
from cuebar.lblock import brightness_flip_miss_rate
from cuebar.protocol import Method, builtin_strategies, evaluate_security
from cuebar.registration import AffineTransform, estimate_transform, landmark_trial


def test_criterion_1_capacity():
    assert capacity(10000) == 952


def test_criterion_2_keyspace_and_fragility():
    books = all_codebooks()
    assert len(books) == 576
    assert len({(b.pi_W, b.pi_B) for b in books}) == 576
    assert brightness_flip_miss_rate(books) == pytest.approx(0.25, abs=0)


def test_criterion_3_ecc(rng):
    word = ecc_encode_block(rng.integers(0, 2, 36))
    patterns = [c for w in (1, 2, 3) for c in itertools.combinations(range(N), w)]
    assert len(patterns) == 41727
    received = np.repeat(word[None, :], len(patterns), axis=0)
    for i, pos in enumerate(patterns):
        received[i, list(pos)] ^= 1
    data, nerr = ecc_decode_blocks(received)
    assert (data == word[:36]).all()
    assert np.array_equal(nerr, [len(p) for p in patterns])
    rejected = 0
    for w in (4, 5):
        for _ in range(1000):
            r = word.copy()
            r[rng.choice(N, w, replace=False)] ^= 1
            try:
                ecc_decode_blocks(r[None, :])
            except RejectError:
                rejected += 1
    assert rejected == 2000


def test_criterion_4_glyph_distance():
    assert min_pairwise_distance(default_glyphs()) >= 14


@pytest.mark.slow
def test_criterion_5_cue_forgery():
    # beta blocks complemented inside one codeword of a full default barcode, fresh key per trial
    spec, beta, trials = BarcodeSpec(), 14, 10_000
    rng = np.random.default_rng(5)
    rejected = 0
    for _ in range(trials):
        key = keygen(int(rng.integers(0, 2**63)))
        img = encode_barcode(key, rng.bytes(spec.max_message_bytes), ["1"], spec, rng.bytes(16))
        j = int(rng.integers(0, spec.n_codewords))
        inside = np.arange(-(-N * j // 2), (N * j + N) // 2)
        pairs = tuple(rng.choice(inside, beta, replace=False).tolist())
        forged = apply_attack([img], AttackSpec(AttackKind.CUE_FLIP, block=0, lblocks=pairs))[0]
        try:
            decode_barcode(forged, key)
        except (RejectError, AuthError):
            rejected += 1
    assert rejected / trials >= 0.95, f"rejection rate {rejected / trials:.4f}"


def test_criterion_6_registration(rng):
    spec = BarcodeSpec()
    img = encode_barcode(keygen(6), rng.bytes(80), ["6"], spec, rng.bytes(16))
    runs = [landmark_trial(img.rgb(), spec, rng, count=24, max_rot_deg=5.0, scale_range=(0.9, 1.1), jitter=0.3)
            for _ in range(30)]
    assert min(len(r) for r in runs) >= 20
    assert np.concatenate(runs).mean() < 1.0
    for _ in range(100):
        m = np.column_stack([rng.uniform(-1.5, 1.5, (2, 2)), rng.uniform(-20, 20, 2)])
        if abs(np.linalg.det(m[:, :2])) < 0.1:
            continue
        t = AffineTransform.from_matrix(m)
        pts = rng.uniform(0, 200, (32, 2))
        assert np.abs(estimate_transform(pts, t.apply(pts)).matrix - m).max() < 1e-6


def _decodes(img, key, received, spec) -> bool:
    try:
        return decode_barcode(received, key, spec=spec)[0] == img
    except (RejectError, AuthError):
        return False


def test_criterion_7_end_to_end():
    rng = np.random.default_rng(7)
    spec = BarcodeSpec()
    ok_noisy = 0
    for t in range(100):
        key = keygen(int(rng.integers(0, 2**63)))
        m = rng.bytes(spec.max_message_bytes)
        img = encode_barcode(key, m, ["1"], spec, rng.bytes(16))
        ok_noisy += _decodes(m, key, transmit(img, ChannelModel(flip_prob=0.01, seed=t)), spec)
    failures = {}
    for x, y in [(6, 21), (30, 42), (60, 42)]:
        try:
            s = BarcodeSpec(x, y)
        except ValueError as exc:
            failures[(x, y)] = f"spec rejected: {exc}"
            continue
        bad = 0
        for _ in range(50):
            key = keygen(int(rng.integers(0, 2**63)))
            m = rng.bytes(int(rng.integers(0, s.max_message_bytes + 1)))
            img = encode_barcode(key, m, [], s, rng.bytes(16))
            bad += not _decodes(m, key, transmit(img, ChannelModel()), s)
        if bad:
            failures[(x, y)] = f"{bad}/50 failed"
    assert ok_noisy >= 99 and not failures, f"flip 0.01: {ok_noisy}/100 decoded; clean matrix: {failures}"


def test_criterion_8_arrangement_soundness():
    checked = 0
    for rows, cols in itertools.product(range(1, 4), range(1, 5)):
        layout = ArrangementLayout.table(rows, cols)
        cues = assign_cues(layout)
        n = len(cues)
        assert verify_arrangement(cues, layout) is OK
        variants = []
        for i, j in itertools.combinations(range(n), 2):
            s = cues.copy()
            s[i], s[j] = s[j], s[i]
            variants.append(s)
        variants += [cues[:i] + cues[i + 1:] for i in range(n)]
        variants += [cues[:p] + [cues[i]] + cues[p:] for i in range(n) for p in range(n + 1)]
        extra = set(assign_cues(ArrangementLayout.table(rows + 1, cols + 1))) - set(cues)
        variants += [cues[:p] + [e] + cues[p:] for e in extra for p in range(n + 1)]
        for v in variants:
            assert isinstance(verify_arrangement(v, layout), Violation)
        checked += len(variants)
    assert checked > 1000


SECURITY_GRID = {  # (method, model) -> "A" or "N"
    **{(m, 1): "A" for m in Method},
    (Method.MU1, 2): "N", (Method.MU2, 2): "A", (Method.MS1, 2): "N", (Method.MS2, 2): "A",
    (Method.MU1, 3): "N", (Method.MU2, 3): "A", (Method.MS1, 3): "N", (Method.MS2, 3): "A",
}


@pytest.mark.slow
def test_criterion_9_security_grid():
    pool = builtin_strategies()
    terminals = [s for s in pool.values() if s.role.value == "TERMINAL"]
    trials, report = 10_000, {}
    for (method, model), cell in SECURITY_GRID.items():
        if cell == "A":
            strategies = terminals if model == 1 else list(pool.values())
            rep = evaluate_security(method, model, strategies, trials=trials, seed=9)
            report[(method.value, model)] = rep.max_rate
            assert rep.max_rate <= 1e-3, (method, model, rep.to_json())
            if model == 1 and method in (Method.MS1, Method.MU1):
                assert rep.confidentiality_smoke is True
        else:
            chosen = [pool["mobile-always-accept"]] if model == 2 else \
                [pool["terminal-eavesdrop"], pool["mobile-always-accept"]]
            rep = evaluate_security(method, model, chosen, trials=trials, seed=9)
            report[(method.value, model)] = rep.max_rate
            assert rep.max_rate >= 0.99, (method, model, rep.to_json())
    assert len(report) == 12
