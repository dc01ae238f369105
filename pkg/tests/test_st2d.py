import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from st2dsim import polar, st2d
from st2dsim.latency import LatencyModel
from st2dsim.phy import MimoConfig, NoisePoint, transmit_frame


def member(code, x):
    """Codeword test along the last axis: x F must vanish on the frozen set."""
    full = np.zeros(x.shape[:-1] + (code.mother_len_n,), dtype=np.uint8)
    full[..., :code.target_len] = x
    return ~polar.polar_transform(full)[..., code.frozen_mask].any(axis=-1)


def line_member(code, line):
    """Membership of a trellis line laid out in ``line_order``."""
    x = np.empty_like(line)
    x[..., st2d.line_order(code)] = line
    return member(code, x)


def strong(trellis):
    return np.where(trellis == 1, -20.0, 20.0)


def toy_configs():
    return {
        "time_space": st2d.lowest_latency_config("time_space", 4, 2, 8, 4),
        "space_time": st2d.lowest_latency_config("space_time", 4, 2, 8, 4),
        "time_only_parallel": st2d.parallel_1d_config(4, 2, 8),
        "time_only_folded": st2d.folded_1d_config(8, 4, 8, 4),
    }


# ---------------------------------------------------------------- layer mapping


def test_folded_mapping_order():
    layers = st2d.map_folded(np.arange(12), 4)
    assert layers.tolist() == [[0, 4, 8], [1, 5, 9], [2, 6, 10], [3, 7, 11]]
    assert st2d.demap_folded(layers).tolist() == list(range(12))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(1, 6), st.integers(0, 2), st.integers(1, 3))
def test_property_folded_roundtrip(layers, per_layer, item, batch):
    shape = (batch, layers * per_layer) + (2,) * item
    x = np.arange(np.prod(shape)).reshape(shape)
    y = st2d.map_folded(x, layers, item_ndim=item)
    assert y.shape == (batch, layers, per_layer) + (2,) * item
    assert np.array_equal(st2d.demap_folded(y, item_ndim=item), x)


def test_folded_mapping_validation():
    with pytest.raises(ValueError):
        st2d.map_folded(np.arange(10), 4)


def test_parallel_mapping_is_identity():
    s = [np.arange(3), np.arange(3, 6)]
    assert [a.tolist() for a in st2d.demap_parallel(st2d.map_parallel(s))] == [[0, 1, 2], [3, 4, 5]]


# ---------------------------------------------------------------- configs


def test_lowest_latency_geometry():
    ts = st2d.lowest_latency_config("time_space", 16, 8, 64, 32)
    assert (ts.layers_l, ts.width_mbit, ts.stream_count_s, ts.space_codeword_count_t) == (64, 16, 32, 16)
    assert ts.info_len == 256 and ts.overall_rate == 0.25
    assert ts.decoding_latency() == 80
    assert ts.decoding_latency(LatencyModel(2.0)) == 160
    sp = st2d.lowest_latency_config("space_time", 16, 8, 64, 32)
    assert (sp.stream_count_s, sp.space_codeword_count_t, sp.info_len) == (64, 8, 256)
    assert sp.stream_lengths == [32] * 8


def test_one_d_latencies():
    par = st2d.parallel_1d_config(16, 4, 64)
    assert par.decoding_latency() == 16
    fold = st2d.folded_1d_config(1024, 256, 64, 16)
    assert fold.decoding_latency() == 1024


def test_config_validation():
    t = polar.code_for_length(16, 8)
    s = polar.code_for_length(64, 32)
    with pytest.raises(ValueError):
        st2d.St2dConfig("bogus", 64, 16, (t,) * 32, (s,) * 16)
    with pytest.raises(ValueError):  # wrong number of time codewords for K_space rows
        st2d.St2dConfig("time_space", 64, 16, (t,) * 31, (s,) * 16)
    with pytest.raises(ValueError):  # one space code per column
        st2d.St2dConfig("time_space", 64, 16, (t,) * 32, (s,) * 15)
    with pytest.raises(ValueError):  # M_bit not a multiple of q
        st2d.St2dConfig("time_only_parallel", 4, 6, (polar.code_for_length(6, 3),) * 4)
    with pytest.raises(ValueError):
        st2d.St2dConfig("time_only_parallel", 64, 16, (t,) * 64, (s,))
    with pytest.raises(ValueError):
        st2d.St2dConfig("time_space", 64, 16, (t,) * 32, (s,) * 16, scan_iterations=0)
    with pytest.raises(ValueError):
        st2d.St2dConfig("time_space", 64, 16, (t,) * 32, (s,) * 16, soft_output="both")
    with pytest.raises(ValueError):
        st2d.lowest_latency_config("time_only_parallel", 16, 8, 64, 32)


def test_bit_streams():
    bs = st2d.BitStreams.from_flat(np.arange(6) % 2, [2, 4])
    assert bs.lengths == [2, 4] and bs.flat.tolist() == [0, 1, 0, 1, 0, 1]
    with pytest.raises(ValueError):
        st2d.BitStreams.from_flat(np.zeros(5), [2, 4])
    cfg = st2d.lowest_latency_config("time_space", 4, 2, 8, 4)
    info = np.random.default_rng(0).integers(0, 2, size=cfg.info_len)
    streams = st2d.BitStreams.from_flat(info, cfg.stream_lengths)
    assert np.array_equal(st2d.encode(streams, cfg), st2d.encode(info, cfg))
    with pytest.raises(ValueError):
        st2d.encode(st2d.BitStreams.from_flat(info, [4] * 2), cfg)


# ---------------------------------------------------------------- encoding invariants


def test_mixed_rate_example_trellis():
    # M_bit = 16, L = 64, 32 streams: ten at rate 1/4, twelve at 1/2, ten at 3/4
    ks = [4] * 10 + [8] * 12 + [12] * 10
    time_codes = tuple(polar.code_for_length(16, k) for k in ks)
    space = polar.code_for_length(64, 32)
    cfg = st2d.St2dConfig("time_space", 64, 16, time_codes, (space,) * 16)
    assert cfg.info_len == 256
    rng = np.random.default_rng(1)
    info = rng.integers(0, 2, size=256, dtype=np.uint8)
    trellis = st2d.encode(info, cfg)
    assert trellis.shape == (64, 16)
    streams = st2d.BitStreams.from_flat(info, ks).streams
    for s, (code, b) in enumerate(zip(time_codes, streams)):
        assert np.array_equal(trellis[s], polar.encode(code, b))
    assert line_member(space, trellis.T).all()
    got, flags = st2d.decode(strong(trellis), cfg, truth=info)
    assert np.array_equal(got, info) and not flags.any()


def test_membership_invariants_random_frames():
    rng = np.random.default_rng(7)
    for mode in ("time_space", "space_time"):
        cfg = toy_configs()[mode]
        t, s = cfg.time_codes[0], cfg.space_codes[0]
        info = rng.integers(0, 2, size=(1000, cfg.info_len), dtype=np.uint8)
        tr = st2d.encode(info, cfg)
        assert tr.shape == (1000, 8, 4)
        if mode == "time_space":
            rows_ok = member(t, tr)
            cols_ok = line_member(s, np.swapaxes(tr, -1, -2))
        else:
            rows_ok = line_member(t, tr)
            cols_ok = member(s, np.swapaxes(tr, -1, -2))
        assert rows_ok.all() and cols_ok.all()


def test_first_stage_region_holds_codewords_verbatim():
    rng = np.random.default_rng(3)
    cfg = st2d.lowest_latency_config("space_time", 16, 8, 64, 32)
    info = rng.integers(0, 2, size=cfg.info_len, dtype=np.uint8)
    tr = st2d.encode(info, cfg)
    s = cfg.space_codes[0]
    for t, b in enumerate(st2d.BitStreams.from_flat(info, cfg.stream_lengths).streams):
        assert np.array_equal(tr[:, t], polar.encode(s, b))


def test_rate_one_space_code_equals_parallel_layout():
    rng = np.random.default_rng(4)
    t = polar.code_for_length(16, 4)
    ident = polar.code_for_length(8, 8)
    two_d = st2d.St2dConfig("time_space", 8, 16, (t,) * 8, (ident,) * 16)
    one_d = st2d.parallel_1d_config(16, 4, 8)
    info = rng.integers(0, 2, size=(5, 32), dtype=np.uint8)
    assert np.array_equal(st2d.encode(info, two_d), st2d.encode(info, one_d))
    assert two_d.decoding_latency() == one_d.decoding_latency() == 16


@pytest.mark.parametrize("mode", list(st2d.MODES))
def test_noiseless_identity_all_modes(mode):
    rng = np.random.default_rng(5)
    cfg = toy_configs()[mode]
    info = rng.integers(0, 2, size=(200, cfg.info_len), dtype=np.uint8)
    tr = st2d.encode(info, cfg)
    got, flags = st2d.decode(strong(tr), cfg, truth=info)
    assert np.array_equal(got, info) and not flags.any()
    # through the MIMO link without noise
    mimo = MimoConfig(cfg.layers_l, 2 * cfg.layers_l, cfg.modulation_q)
    llr = transmit_frame(tr, mimo, NoisePoint(np.inf, 0.0), rng)
    got, _ = st2d.decode(llr, cfg)
    assert np.array_equal(got, info)


@pytest.mark.parametrize("mode", ["time_space", "space_time"])
@pytest.mark.parametrize("soft_output", ["posterior", "extrinsic"])
def test_noiseless_identity_full_size(mode, soft_output):
    rng = np.random.default_rng(6)
    cfg = st2d.lowest_latency_config(mode, 16, 8, 64, 32, soft_output=soft_output, scan_iterations=2)
    info = rng.integers(0, 2, size=(8, cfg.info_len), dtype=np.uint8)
    got, _ = st2d.decode(strong(st2d.encode(info, cfg)), cfg)
    assert np.array_equal(got, info)


def test_folded_layout_places_symbols_round_robin():
    cfg = st2d.folded_1d_config(8, 8, 2, 8)  # rate-1 codes: stream = transform of info
    info = np.random.default_rng(2).integers(0, 2, size=16, dtype=np.uint8)
    stream = np.concatenate([polar.encode(c, info[8 * i:8 * i + 8]) for i, c in enumerate(cfg.time_codes)])
    tr = st2d.encode(info, cfg)
    symbols = stream.reshape(-1, 4)
    assert np.array_equal(tr[0], symbols[0::2].reshape(-1))
    assert np.array_equal(tr[1], symbols[1::2].reshape(-1))


# ---------------------------------------------------------------- error correction


def test_time_space_recovers_an_erased_layer():
    rng = np.random.default_rng(8)
    cfg = st2d.lowest_latency_config("time_space", 16, 8, 64, 32)
    info = rng.integers(0, 2, size=(20, cfg.info_len), dtype=np.uint8)
    llr = strong(st2d.encode(info, cfg))
    llr[:, 5, :] = 0.0  # one antenna layer lost entirely
    got, flags = st2d.decode(llr, cfg, truth=info)
    assert not flags.any()


def test_space_time_recovers_an_erased_column():
    rng = np.random.default_rng(9)
    cfg = st2d.lowest_latency_config("space_time", 16, 8, 64, 32)
    info = rng.integers(0, 2, size=(20, cfg.info_len), dtype=np.uint8)
    llr = strong(st2d.encode(info, cfg))
    llr[:, :, 3] = 0.0
    got, flags = st2d.decode(llr, cfg, truth=info)
    assert not flags.any()


def test_one_d_layer_loss_is_fatal_for_that_stream():
    cfg = st2d.parallel_1d_config(16, 4, 8)
    info = np.ones((1, cfg.info_len), dtype=np.uint8)
    llr = strong(st2d.encode(info, cfg))
    llr[:, 2, :] = -llr[:, 2, :]
    _, flags = st2d.decode(llr, cfg, truth=info)
    assert flags[0].tolist() == [False, False, True] + [False] * 5


def test_decode_validation():
    cfg = toy_configs()["time_space"]
    with pytest.raises(ValueError):
        st2d.decode(np.zeros((8, 5)), cfg)
    with pytest.raises(ValueError):
        st2d.decode_space_time(np.zeros((8, 4)), cfg)
    with pytest.raises(ValueError):
        st2d.encode(np.zeros(3), cfg)
