"""Monte-Carlo FER/BER engine.

Frames are simulated in fixed-size blocks.  Block ``b`` of a point draws
everything (info bits, channel, noise) from its own generator seeded by
``SeedSequence(point_seed, spawn_key=(b,))``, and blocks are reduced in
index order with the stop rule checked after each one.  Which process ran a
block therefore never changes a result; workers only speculate ahead and
their surplus blocks are discarded.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import st2d
from ..phy import MimoConfig, NoisePoint, transmit_frame
from ..st2d import St2dConfig

WORKERS_ENV = "ST2DSIM_WORKERS"
SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class StopRule:
    min_frame_errors: int = 100
    max_frames: int = 1_000_000

    def __post_init__(self):
        if self.min_frame_errors < 1 or self.max_frames < 1:
            raise ValueError(f"stop-rule counts must be positive, got {self}")


@dataclass(frozen=True)
class SimConfig:
    """One simulated curve: a trellis layout, a MIMO link and an Eb/N0 grid.

    ``fer_floor`` aborts a sweep after the first point whose FER falls below
    it.  ``noiseless`` sends every frame without noise (a debug mode that
    must give FER 0).  ``block_frames`` is part of the seeding schedule, so
    changing it changes the random draws.
    """

    st2d: St2dConfig
    mimo: MimoConfig
    ebn0_points_db: tuple
    stop_rule: StopRule = field(default_factory=StopRule)
    master_seed: int = 0
    worker_count: int | None = None
    block_frames: int = 64
    fer_floor: float | None = None
    noiseless: bool = False
    label: str = ""

    def __post_init__(self):
        pts = tuple(float(e) for e in np.atleast_1d(self.ebn0_points_db))
        object.__setattr__(self, "ebn0_points_db", pts)
        if isinstance(self.stop_rule, tuple):
            object.__setattr__(self, "stop_rule", StopRule(*self.stop_rule))
        if not pts:
            raise ValueError("ebn0_points_db must be non-empty")
        if not all(np.isfinite(pts)):
            raise ValueError("ebn0_points_db must be finite")
        if not 0 <= int(self.master_seed) < SEED_LIMIT:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.worker_count is not None and self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.block_frames < 1:
            raise ValueError("block_frames must be >= 1")
        if self.st2d.layers_l != self.mimo.layers_l:
            raise ValueError(f"trellis has {self.st2d.layers_l} layers but the link has "
                             f"{self.mimo.tx_antennas_nt} transmit antennas")
        if self.st2d.modulation_q != self.mimo.modulation_q:
            raise ValueError("st2d and mimo disagree on the modulation order")


@dataclass(frozen=True)
class FerRecord:
    ebn0_db: float
    frames_run: int
    frame_errors: int
    bit_errors: int
    ber: float
    seconds: float = 0.0
    label: str = ""

    def __post_init__(self):
        if not 0 <= self.frame_errors <= self.frames_run:
            raise ValueError(f"need 0 <= frame_errors <= frames_run, got {self.frame_errors}/{self.frames_run}")
        if self.bit_errors < 0 or not 0.0 <= self.ber <= 1.0:
            raise ValueError("bit error counts must be non-negative and ber in [0, 1]")

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames_run if self.frames_run else 0.0

    def ci(self, z: float = 3.0):
        """Normal-approximation binomial interval ``fer +- z * sigma``."""
        n = max(self.frames_run, 1)
        half = z * np.sqrt(self.fer * (1.0 - self.fer) / n)
        return max(self.fer - half, 0.0), min(self.fer + half, 1.0)


def point_seed(master_seed: int, index: int) -> int:
    """Seed of sweep point ``index``, split from ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def resolve_workers(cfg: SimConfig) -> int:
    env = os.environ.get(WORKERS_ENV, "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1")
        return n
    return cfg.worker_count or 1


def _noise(cfg: SimConfig, ebn0_db: float) -> NoisePoint:
    if cfg.noiseless:
        return NoisePoint(float(ebn0_db), 0.0)
    return NoisePoint.from_ebn0(ebn0_db, cfg.mimo.modulation_q, cfg.st2d.overall_rate)


def _run_block(cfg: SimConfig, ebn0_db: float, seed: int, block: int, frames: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    info = rng.integers(0, 2, size=(frames, cfg.st2d.info_len), dtype=np.uint8)
    llrs = transmit_frame(st2d.encode(info, cfg.st2d), cfg.mimo, _noise(cfg, ebn0_db), rng)
    bits, _ = st2d.decode(llrs, cfg.st2d)
    wrong = bits != info
    return frames, int(wrong.any(axis=-1).sum()), int(wrong.sum())


def _block_sizes(cfg: SimConfig):
    total, b = cfg.stop_rule.max_frames, cfg.block_frames
    start = 0
    while start < total:
        yield min(b, total - start)
        start += b


class _Reducer:
    def __init__(self, rule: StopRule):
        self.rule = rule
        self.frames = self.errors = self.bits = 0

    def add(self, result) -> bool:
        f, e, b = result
        self.frames += f
        self.errors += e
        self.bits += b
        return self.errors >= self.rule.min_frame_errors or self.frames >= self.rule.max_frames


def _serial(cfg, ebn0_db, seed, red):
    for b, n in enumerate(_block_sizes(cfg)):
        if red.add(_run_block(cfg, ebn0_db, seed, b, n)):
            return


def _pooled(cfg, ebn0_db, seed, red, pool, workers):
    sizes = list(_block_sizes(cfg))
    pending, nxt = {}, 0
    for b in range(len(sizes)):
        while nxt < len(sizes) and nxt < b + 2 * workers:
            pending[nxt] = pool.submit(_run_block, cfg, ebn0_db, seed, nxt, sizes[nxt])
            nxt += 1
        if red.add(pending.pop(b).result()):
            break
    for fut in pending.values():
        fut.cancel()


def run_point(cfg: SimConfig, ebn0_db: float, seed: int, *, _pool=None) -> FerRecord:
    """Simulate one Eb/N0 point until the stop rule fires; deterministic in ``(cfg, seed)``."""
    if not np.isfinite(ebn0_db):
        raise ValueError("ebn0_db must be finite")
    t0 = time.perf_counter()
    red = _Reducer(cfg.stop_rule)
    workers = resolve_workers(cfg)
    if workers == 1:
        _serial(cfg, ebn0_db, seed, red)
    elif _pool is not None:
        _pooled(cfg, ebn0_db, seed, red, _pool, workers)
    else:
        with ProcessPoolExecutor(workers) as pool:
            _pooled(cfg, ebn0_db, seed, red, pool, workers)
    ber = red.bits / (red.frames * cfg.st2d.info_len)
    return FerRecord(float(ebn0_db), red.frames, red.errors, red.bits, ber,
                     time.perf_counter() - t0, cfg.label)


def run_sweep(cfg: SimConfig, progress=None) -> list:
    """Run every Eb/N0 point in ascending order; point ``i`` uses ``point_seed(master_seed, i)``.

    ``i`` indexes the sorted grid.  ``progress`` is called with each record
    as it completes.
    """
    points = sorted(cfg.ebn0_points_db)
    workers = resolve_workers(cfg)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    records = []
    try:
        for i, e in enumerate(points):
            rec = run_point(cfg, e, point_seed(cfg.master_seed, i), _pool=pool)
            records.append(rec)
            if progress is not None:
                progress(rec)
            if cfg.fer_floor is not None and rec.fer < cfg.fer_floor:
                break
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return records
