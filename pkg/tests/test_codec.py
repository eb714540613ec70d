"""Tone codec tests: encode, classify, multiuser decode, census."""

import numpy as np
import pytest

from tonedisc import codec


def params23(k=1, theta=None, window=2):
    return codec.make_params(p=23, n=11, k=k, theta=theta, delta_window=window)


def test_make_params_defaults():
    p = codec.make_params()
    assert p.gft.field.p == 199 and p.gft.n == 11 and p.k == 1
    assert p.theta == 6 and p.delta_window == 2
    assert p.num_tdids == 199


def test_default_theta():
    assert codec.default_theta(11) == 6
    assert codec.default_theta(5) == 3
    assert codec.default_theta(7) == 4


def test_make_params_rejects_bad_shapes():
    with pytest.raises(ValueError):
        codec.make_params(p=23, n=11, k=0)
    with pytest.raises(ValueError):
        codec.make_params(p=23, n=11, k=11)
    with pytest.raises(ValueError):
        codec.make_params(p=23, n=11, theta=0)
    with pytest.raises(ValueError):
        codec.make_params(p=23, n=11, theta=12)
    with pytest.raises(ValueError):
        codec.make_params(p=23, n=11, delta_window=-1)
    with pytest.raises(ValueError):
        codec.make_params(p=23, n=11, delta_window=12)


def test_num_tdids():
    assert params23(k=1).num_tdids == 23
    assert params23(k=2).num_tdids == 529
    assert codec.make_params(p=199, n=11, k=1).num_tdids == 199


def test_tdid_digit_round_trip():
    assert codec.tdid_digits(37, 32, 2) == (5, 1)
    assert codec.tdid_digits(170, 32, 2) == (10, 5)
    assert codec.digits_to_tdid((5, 1), 32) == 37
    rng = np.random.default_rng(5)
    for _ in range(100):
        m = int(rng.integers(0, 23**2))
        assert codec.digits_to_tdid(codec.tdid_digits(m, 23, 2), 23) == m


def test_tdid_to_symbols_bounds():
    p = params23(k=2)
    msg = codec.tdid_to_symbols(528, p)
    assert msg.tdid == 528 and msg.symbols == (22, 22)
    with pytest.raises(ValueError):
        codec.tdid_to_symbols(529, p)
    with pytest.raises(ValueError):
        codec.tdid_to_symbols(-1, p)


def test_encode_frozen_vectors():
    p = params23()
    assert codec.encode(1, p) == (1, 2, 4, 8, 16, 9, 18, 13, 3, 6, 12)
    assert codec.encode(5, p) == (5, 10, 20, 17, 11, 22, 21, 19, 15, 7, 14)
    assert codec.encode(0, p) == (0,) * 11


def test_encode_accepts_message_or_int():
    p = params23(k=2)
    msg = codec.tdid_to_symbols(100, p)
    assert codec.encode(msg, p) == codec.encode(100, p)


def test_classify_valid_for_every_codeword():
    p = params23()
    for tdid in range(p.num_tdids):
        c = codec.classify(codec.encode(tdid, p), p)
        assert isinstance(c, codec.Valid)
        assert c.message.tdid == tdid


def test_classify_shift_window():
    p = codec.make_params(p=199, n=11, k=1, delta_window=2)
    cw = np.array(codec.encode(42, p))
    for d in (-2, -1, 1, 2):
        c = codec.classify(tuple((cw + d) % 199), p)
        assert isinstance(c, codec.Shifted)
        assert c.message.tdid == 42 and c.delta == d
    for d in (-3, 3):
        assert isinstance(codec.classify(tuple((cw + d) % 199), p), codec.Invalid)


def test_classify_zero_delta_is_valid_not_shifted():
    p = params23()
    c = codec.classify(codec.encode(9, p), p)
    assert isinstance(c, codec.Valid) and not isinstance(c, codec.Shifted)


def test_classify_rejects_random_noise():
    p = params23()
    rng = np.random.default_rng(17)
    book = {codec.encode(t, p) for t in range(p.num_tdids)}
    hits = 0
    for _ in range(2000):
        tones = tuple(int(x) for x in rng.integers(0, 23, size=11))
        c = codec.classify(tones, p)
        if not isinstance(c, codec.Invalid):
            hits += 1
            base = np.array(codec.encode(c.message.tdid, p))
            d = c.delta if isinstance(c, codec.Shifted) else 0
            assert tuple((base + d) % 23) == tones
    # valid-or-shifted region is 5 sequences per codeword out of 23^11
    assert hits <= 2


def test_classify_input_validation():
    p = params23()
    with pytest.raises(ValueError):
        codec.classify((1, 2, 3), p)
    with pytest.raises(ValueError):
        codec.classify((0,) * 10 + (23,), p)
    with pytest.raises(ValueError):
        codec.classify((0,) * 10 + (-1,), p)


def test_signed_residue():
    assert codec.signed_residue(197, 199) == -2
    assert codec.signed_residue(99, 199) == 99
    assert codec.signed_residue(100, 199) == -99
    assert codec.signed_residue(0, 199) == 0


def test_delta_scan_order():
    assert codec.delta_scan_order(2).tolist() == [0, -1, 1, -2, 2]
    assert codec.delta_scan_order(0).tolist() == [0]


def test_tone_sets_to_mask():
    m = codec.tone_sets_to_mask([{1, 3}, set(), {0}], 3, 5)
    assert m.shape == (3, 5) and m.dtype == np.uint8
    assert m.tolist() == [[0, 1, 0, 1, 0], [0, 0, 0, 0, 0], [1, 0, 0, 0, 0]]


def test_decode_single_codeword():
    p = params23()
    sets = [{t} for t in codec.encode(5, p)]
    r = codec.decode_multi(sets, p)
    assert r.entries == (codec.DecodeEntry(tdid=5, match_count=11, delta=0),)


def test_decode_union_of_two_codewords():
    p = params23()
    sets = [{a, b} for a, b in zip(codec.encode(5, p), codec.encode(7, p))]
    r = codec.decode_multi(sets, p)
    got = {(e.tdid, e.match_count, e.delta) for e in r.entries}
    assert got == {(5, 11, 0), (7, 11, 0)}
    assert r.tdids == {5, 7}


def test_decode_respects_theta():
    p = params23(theta=6)
    cw = codec.encode(5, p)
    sets = [{t} for t in cw[:5]] + [set()] * 6
    assert codec.decode_multi(sets, p).entries == ()
    sets = [{t} for t in cw[:6]] + [set()] * 5
    r = codec.decode_multi(sets, p)
    assert any(e.tdid == 5 and e.match_count == 6 for e in r.entries)


def test_decode_reports_shift_ties_in_scan_order():
    # five tones at delta +1 and five at -1 with one symbol empty: both
    # shifts match 5 of 11, the scan order 0,-1,1 keeps -1
    p = params23(theta=5, window=2)
    cw = np.array(codec.encode(5, p))
    sets = []
    for i in range(11):
        if i < 5:
            sets.append({int((cw[i] + 1) % 23)})
        elif i < 10:
            sets.append({int((cw[i] - 1) % 23)})
        else:
            sets.append(set())
    r = codec.decode_multi(sets, p)
    mine = [e for e in r.entries if e.tdid == 5]
    assert len(mine) == 1
    assert mine[0].match_count == 5 and mine[0].delta == -1


def test_decode_candidates_filter():
    p = params23()
    sets = [{a, b} for a, b in zip(codec.encode(5, p), codec.encode(7, p))]
    r = codec.decode_multi(sets, p, candidates=np.array([7]))
    assert [e.tdid for e in r.entries] == [7]


def test_min_distance():
    assert codec.min_distance(params23(k=1)) == 11
    assert codec.min_distance(params23(k=2)) == 10
    assert codec.min_distance(codec.make_params(p=7, n=3, k=2)) == 2


def test_min_distance_guard():
    with pytest.raises(codec.ResourceLimitError):
        codec.min_distance(codec.make_params(p=199, n=11, k=3))


def test_capability_boundary():
    assert codec.capability_ok(11, 1, 5, 0)
    assert not codec.capability_ok(11, 1, 5, 1)
    assert codec.capability_ok(11, 1, 0, 10)
    assert not codec.capability_ok(11, 1, 0, 11)
    assert codec.capability_ok(11, 1, 4, 2)
    assert codec.capability_ok(11, 2, 4, 1)
    assert not codec.capability_ok(11, 2, 4, 2)


def test_ambiguity_census_frozen():
    p = params23()
    books = [codec.encode(t, p) for t in (3, 9)]
    assert codec.ambiguity_census(books, p) == (2, 2048)

    p5 = codec.make_params(p=11, n=5, k=1)
    books = [codec.encode(t, p5) for t in (1, 4, 9)]
    assert codec.ambiguity_census(books, p5) == (3, 243)

    p7 = codec.make_params(p=29, n=7, k=1)
    books = [codec.encode(t, p7) for t in (2, 17)]
    assert codec.ambiguity_census(books, p7) == (2, 128)


def test_ambiguity_census_rejects_bad_input():
    p = params23()
    cw = codec.encode(3, p)
    with pytest.raises(ValueError):
        codec.ambiguity_census([cw, cw], p)
    with pytest.raises(ValueError):
        codec.ambiguity_census([cw, (0,) * 10 + (1,)], p)


def test_ambiguity_census_guard():
    p = params23()
    books = [codec.encode(t, p) for t in range(1, 7)]
    with pytest.raises(codec.ResourceLimitError):
        codec.ambiguity_census(books, p)


def test_codebook_rows_match_encode():
    p = params23(k=2)
    book = codec.codebook(p)
    assert book.shape == (529, 11)
    rng = np.random.default_rng(23)
    for m in rng.integers(0, 529, size=40):
        assert tuple(int(x) for x in book[m]) == codec.encode(int(m), p)
