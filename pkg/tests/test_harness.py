import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from st2dsim import harness, st2d
from st2dsim.harness import FerRecord, SimConfig, StopRule
from st2dsim.harness.presets import find
from st2dsim.phy import MimoConfig, constellation


def small_cfg(**kw):
    st = st2d.lowest_latency_config("time_space", 8, 4, 8, 4)
    base = dict(st2d=st, mimo=MimoConfig(8, 16, 4), ebn0_points_db=(-2.0, 0.0, 2.0),
                stop_rule=StopRule(20, 512), master_seed=11, block_frames=32)
    base.update(kw)
    return SimConfig(**base)


def counts(recs):
    return [(r.ebn0_db, r.frames_run, r.frame_errors, r.bit_errors, r.ber) for r in recs]


# ---------------------------------------------------------------- config / records


def test_sim_config_validation():
    with pytest.raises(ValueError):
        small_cfg(ebn0_points_db=())
    with pytest.raises(ValueError):
        small_cfg(ebn0_points_db=(np.nan,))
    with pytest.raises(ValueError):
        small_cfg(stop_rule=StopRule(0, 10))
    with pytest.raises(ValueError):
        small_cfg(master_seed=-1)
    with pytest.raises(ValueError):
        small_cfg(master_seed=1 << 64)
    with pytest.raises(ValueError):
        small_cfg(mimo=MimoConfig(4, 8, 4))
    with pytest.raises(ValueError):
        small_cfg(mimo=MimoConfig(8, 16, 2))
    with pytest.raises(ValueError):
        small_cfg(worker_count=0)
    assert small_cfg(stop_rule=(5, 10)).stop_rule == StopRule(5, 10)


def test_fer_record_invariants():
    r = FerRecord(1.0, 100, 7, 20, 0.01)
    assert r.fer == 0.07
    lo, hi = r.ci()
    assert lo < 0.07 < hi
    with pytest.raises(ValueError):
        FerRecord(1.0, 10, 11, 0, 0.0)
    with pytest.raises(ValueError):
        FerRecord(1.0, 10, 1, 0, 1.5)


def test_point_seeds_are_distinct_and_stable():
    seeds = [harness.point_seed(5, i) for i in range(50)]
    assert len(set(seeds)) == 50
    assert seeds == [harness.point_seed(5, i) for i in range(50)]
    assert harness.point_seed(6, 0) != seeds[0]


# ---------------------------------------------------------------- running


def test_same_seed_gives_identical_records():
    cfg = small_cfg()
    assert counts(harness.run_sweep(cfg)) == counts(harness.run_sweep(cfg))
    other = harness.run_sweep(dataclasses.replace(cfg, master_seed=12))
    assert counts(other) != counts(harness.run_sweep(cfg))


def test_results_independent_of_worker_count(monkeypatch):
    cfg = small_cfg()
    serial = counts(harness.run_sweep(cfg))
    monkeypatch.setenv(harness.WORKERS_ENV, "2")
    assert harness.resolve_workers(cfg) == 2
    assert counts(harness.run_sweep(cfg)) == serial
    monkeypatch.setenv(harness.WORKERS_ENV, "3")
    assert counts(harness.run_sweep(dataclasses.replace(cfg, worker_count=1))) == serial


def test_worker_env_validation(monkeypatch):
    monkeypatch.setenv(harness.WORKERS_ENV, "lots")
    with pytest.raises(ValueError):
        harness.resolve_workers(small_cfg())


def test_stop_rule_and_ordering():
    cfg = small_cfg(ebn0_points_db=(2.0, -2.0, 0.0))
    recs = harness.run_sweep(cfg)
    assert [r.ebn0_db for r in recs] == [-2.0, 0.0, 2.0]
    for r in recs:
        rule = cfg.stop_rule
        assert r.frames_run == rule.max_frames or r.frame_errors >= rule.min_frame_errors
        # stopped at the first block boundary that met the rule
        assert r.frames_run - cfg.block_frames < rule.max_frames
        assert r.frame_errors - 0 <= r.frames_run


def test_noiseless_debug_mode_has_no_errors():
    cfg = small_cfg(noiseless=True, stop_rule=StopRule(1, 200), ebn0_points_db=(-30.0,))
    (rec,) = harness.run_sweep(cfg)
    assert rec.frames_run == 200 and rec.frame_errors == 0 and rec.ber == 0.0


def test_floor_aborts_sweep():
    cfg = small_cfg(noiseless=True, stop_rule=StopRule(1, 64), fer_floor=1e-3)
    assert len(harness.run_sweep(cfg)) == 1


def test_progress_callback():
    seen = []
    harness.run_sweep(small_cfg(ebn0_points_db=(0.0,)), seen.append)
    assert len(seen) == 1 and isinstance(seen[0], FerRecord)


def test_fer_decreases_with_snr_within_noise():
    cfg = small_cfg(ebn0_points_db=(-6.0, -3.0, 0.0, 3.0), stop_rule=StopRule(40, 2048))
    for seed in (1, 2, 3):
        recs = harness.run_sweep(dataclasses.replace(cfg, master_seed=seed))
        for a, b in zip(recs, recs[1:]):
            assert b.fer <= a.fer or b.ci()[0] <= a.ci()[1]


def reference_uncoded_fer(nt, nr, ebn0_db, frames, seed):
    """Straight-line reference: 16-QAM, per-use Rayleigh, dense MMSE, max-log, hard decisions."""
    rng = np.random.default_rng(seed)
    pts, labels = constellation(4)
    sigma2 = 1.0 / (4 * 10 ** (ebn0_db / 10))
    errors = 0
    for _ in range(frames):
        bad = False
        for _use in range(4):
            idx = rng.integers(0, 16, size=nt)
            h = (rng.normal(size=(nr, nt)) + 1j * rng.normal(size=(nr, nt))) / np.sqrt(2)
            n = (rng.normal(size=nr) + 1j * rng.normal(size=nr)) * np.sqrt(sigma2 / 2)
            y = h @ pts[idx] + n
            a = h.conj().T @ h + sigma2 * np.eye(nt)
            x_hat = np.linalg.solve(a, h.conj().T @ y)
            # nearest point after unbiasing is the max-log hard decision
            g = np.real(np.diag(np.linalg.solve(a, h.conj().T @ h)))
            dec = np.argmin(np.abs((x_hat / g)[:, None] - pts[None, :]), axis=1)
            bad |= bool((labels[dec] != labels[idx]).any())
        errors += bad
    return errors / frames


def test_rate_one_link_matches_reference_simulation():
    # rate-1 time codes: the frame is lost iff any hard decision is wrong
    st = st2d.parallel_1d_config(16, 16, 4)
    cfg = SimConfig(st, MimoConfig(4, 8, 4), (6.0,), StopRule(10**9, 1600), master_seed=3)
    (rec,) = harness.run_sweep(cfg)
    ref = reference_uncoded_fer(4, 8, 6.0, 1600, seed=99)
    sigma = np.sqrt(rec.fer * (1 - rec.fer) / 1600 + ref * (1 - ref) / 1600)
    assert 0.05 < rec.fer < 0.95
    assert abs(rec.fer - ref) < 3 * sigma


def test_parallel_rows_fail_independently():
    cfg = st2d.parallel_1d_config(16, 4, 8)
    mimo = MimoConfig(8, 16, 4)
    from st2dsim.phy import NoisePoint, transmit_frame
    rng = np.random.default_rng(0)
    info = rng.integers(0, 2, size=(3000, cfg.info_len), dtype=np.uint8)
    llr = transmit_frame(st2d.encode(info, cfg), mimo, NoisePoint.from_ebn0(-4.0, 4, cfg.overall_rate), rng)
    _, flags = st2d.decode(llr, cfg, truth=info)
    p = flags.mean()
    fer = flags.any(axis=-1).mean()
    want = 1 - (1 - p) ** 8
    sigma = np.sqrt(want * (1 - want) / 3000)
    assert 0.05 < fer < 0.95
    assert abs(fer - want) < 3 * sigma + 0.01


# ---------------------------------------------------------------- presets


def test_preset_2d_gain():
    cfgs = harness.preset("fig_2d_gain")
    assert len(cfgs) == 6 and len({c.label for c in cfgs}) == 6
    for c in cfgs:
        assert (c.mimo.tx_antennas_nt, c.mimo.rx_antennas_nr, c.mimo.modulation_q) == (64, 128, 4)
        assert c.st2d.overall_rate == 0.25
    one = [c for c in cfgs if c.st2d.mode == "time_only_parallel"]
    assert sorted(c.st2d.width_mbit for c in one) == [16, 32, 64]
    two = [c for c in cfgs if c.st2d.mode == "time_space"]
    assert sorted(c.st2d.width_mbit for c in two) == [16, 32, 64]
    assert all(c.st2d.layers_l == 64 and c.st2d.space_codes[0].info_len_k == 32 for c in two)


def test_preset_nspace_antennas_follow_space_code():
    for c in harness.preset("fig_nspace_sweep"):
        n_space = c.st2d.space_codes[0].target_len
        assert c.mimo.tx_antennas_nt == n_space and c.mimo.rx_antennas_nr == 2 * n_space
    c = find(harness.preset("fig_nspace_sweep"), "2d-TS-Nt16-Ns128-R1/2x1/2")
    assert (c.mimo.tx_antennas_nt, c.mimo.rx_antennas_nr) == (128, 256)


def test_preset_rspace_keeps_rate_product():
    cfgs = harness.preset("fig_rspace_sweep")
    assert len(cfgs) == 9
    c = find(cfgs, "2d-TS-Nt16-Ns64-R2/3x3/8")
    assert c.st2d.time_codes[0].info_len_k == 11 and c.st2d.space_codes[0].info_len_k == 24
    for c in cfgs:
        assert abs(c.st2d.overall_rate - 0.25) < 0.02


def test_preset_other_names_and_unknown():
    assert len(harness.preset("fig_1d_lengths")) == 4
    modes = [c.st2d.mode for c in harness.preset("fig_ts_vs_st")]
    assert modes == ["time_only_parallel", "time_space", "space_time"]
    with pytest.raises(ValueError):
        harness.preset("fig_99")


def test_info_len_rounding():
    assert harness.info_len(16, Fraction(2, 3)) == 11
    assert harness.info_len(16, Fraction(1, 3)) == 5
    assert harness.info_len(64, Fraction(3, 8)) == 24
    assert harness.info_len(2, Fraction(1, 4)) == 1


# ---------------------------------------------------------------- files


def test_csv_empty_is_header_only(tmp_path):
    p = tmp_path / "r.csv"
    harness.write_csv([], p)
    assert p.read_text() == "ebn0_db,frames,frame_errors,fer,bit_errors,ber,seconds\n"
    assert harness.read_csv(p) == []


def test_csv_roundtrip_exact(tmp_path):
    recs = [FerRecord(-7.25, 3, 1, 5, 5 / 3 / 256, 1.5), FerRecord(1 / 3, 10**6, 7, 9, 9 / 256e6, 0.0)]
    p = tmp_path / "r.csv"
    harness.write_csv(recs, p)
    back = harness.read_csv(p)
    assert [(r.ebn0_db, r.frames_run, r.frame_errors, r.bit_errors, r.ber) for r in back] == \
        [(r.ebn0_db, r.frames_run, r.frame_errors, r.bit_errors, r.ber) for r in recs]
    assert [r.fer for r in back] == [r.fer for r in recs]
    fer_field = p.read_text().splitlines()[1].split(",")[3]
    assert len(fer_field.replace("0.", "", 1).lstrip("0")) >= 6


def test_csv_labels(tmp_path):
    recs = [FerRecord(0.0, 10, 1, 1, 0.001, label="a"), FerRecord(1.0, 10, 0, 0, 0.0, label="b")]
    text = harness.format_csv(recs)
    assert text.splitlines()[0].endswith(",label")
    assert [r.label for r in harness.parse_csv(text)] == ["a", "b"]


def test_csv_errors(tmp_path):
    with pytest.raises(OSError, match="nope"):
        harness.write_csv([], tmp_path / "nope" / "r.csv")
    with pytest.raises(OSError):
        harness.read_csv(tmp_path / "missing.csv")
    with pytest.raises(ValueError):
        harness.parse_csv("a,b\n1,2\n")
    with pytest.raises(ValueError):
        harness.parse_csv("ebn0_db,frames,frame_errors,fer,bit_errors,ber,seconds\n1,2\n")


CONFIG = """
# toy T-S run
label = toy
st2d.mode = time_space
st2d.time_len = 8
st2d.time_info = 4
st2d.space_len = 8
st2d.space_info = 4
st2d.scan_iterations = 2
mimo.tx_antennas_nt = 8
mimo.rx_antennas_nr = 16
ebn0_points_db = -1, 0.5
stop_rule.min_frame_errors = 10
stop_rule.max_frames = 128
master_seed = 4
block_frames = 16
"""


def test_parse_config():
    cfg = harness.parse_config(CONFIG)
    assert cfg.label == "toy" and cfg.st2d.mode == "time_space" and cfg.st2d.scan_iterations == 2
    assert cfg.ebn0_points_db == (-1.0, 0.5)
    assert cfg.stop_rule == StopRule(10, 128)
    assert (cfg.master_seed, cfg.block_frames) == (4, 16)


def test_parse_config_other_modes():
    par = harness.parse_config("st2d.mode = time_only_parallel\nst2d.time_len = 16\nst2d.time_info = 4\n"
                               "ebn0_points_db = 0\nnoiseless = true\n")
    assert par.st2d.layers_l == 64 and par.noiseless
    fold = harness.parse_config("st2d.mode = time_only_folded\nst2d.time_len = 256\nst2d.time_info = 64\n"
                                "st2d.width_mbit = 16\nebn0_points_db = 0\n")
    assert fold.st2d.stream_count_s == 4


@pytest.mark.parametrize("text", [
    "bogus = 1\nebn0_points_db = 0",
    "st2d.mode = time_space\nebn0_points_db = 0",
    "st2d.mode = time_only_parallel\nst2d.time_len = 16\nst2d.time_info = 4",
    "st2d.mode = time_only_parallel\nst2d.time_len = 16\nst2d.time_info = x\nebn0_points_db = 0",
    "st2d.mode = time_only_parallel\nst2d.time_len = 16\nst2d.time_info = 4\nst2d.space_len = 4\nebn0_points_db = 0",
    "st2d.mode = time_only_parallel\nst2d.time_len = 16\nst2d.time_info = 4\nebn0_points_db = 0\nmaster_seed = 1\nmaster_seed = 2",
    "just text",
])
def test_parse_config_rejects(text):
    with pytest.raises(ValueError):
        harness.parse_config(text)


def test_load_config_io_error(tmp_path):
    with pytest.raises(OSError):
        harness.load_config(tmp_path / "missing.cfg")
