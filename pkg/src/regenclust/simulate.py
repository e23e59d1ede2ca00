"""Sample paths of the regenerative process.

Random streams
--------------
A :class:`RandomStream` is a Philox-4x64 counter-based generator.  The
128-bit key is the master seed; the stream index occupies the top 64-bit word
of the 256-bit counter, so stream ``i`` starts at counter ``i * 2**192`` and
distinct indices read disjoint segments of one keyed sequence.  Identical
``(master_seed, stream_index)`` pairs therefore give identical draws on every
platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import ModelSpec


class RandomStream:
    """Deterministic random stream identified by ``(master_seed, stream_index)``."""

    def __init__(self, master_seed: int, stream_index: int = 0):
        if not 0 <= master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if not 0 <= stream_index < 2**64:
            raise ValueError("stream_index must be a 64-bit unsigned integer")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        self.generator = np.random.Generator(
            np.random.Philox(key=self.master_seed, counter=[0, 0, 0, self.stream_index])
        )

    def __repr__(self):
        return f"RandomStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    def fresh(self) -> "RandomStream":
        """A new stream positioned at the start of the same sequence."""
        return RandomStream(self.master_seed, self.stream_index)


class BlockSampler:
    """Vectorised draws of blocks, plain or length-biased.

    Built once per model from the flattened ``(symbol, length, weight)``
    table; sampling is inverse-CDF on that table.
    """

    def __init__(self, model: ModelSpec):
        self.model = model
        sym, length, w = model.block_pairs()
        self.symbols = sym
        self.lengths = length
        w = w / w.sum()
        self.cdf = np.cumsum(w)
        self.cdf[-1] = 1.0
        biased = w * length
        biased /= biased.sum()
        self.biased_cdf = np.cumsum(biased)
        self.biased_cdf[-1] = 1.0

    def draw(self, rng: np.random.Generator, size: int):
        idx = np.searchsorted(self.cdf, rng.random(size), side="right")
        return self.symbols[idx], self.lengths[idx]

    def draw_covering(self, rng: np.random.Generator, size: int):
        """Block covering a fixed time under stationarity.

        Returns ``(symbol, length, offset)``: the pair is drawn with weight
        ``k q_a(k) p_a / nu`` and the fixed time sits ``offset`` letters after
        the block start, uniformly on ``{0, ..., k-1}``.
        """
        idx = np.searchsorted(self.biased_cdf, rng.random(size), side="right")
        length = self.lengths[idx]
        offset = rng.integers(0, length)
        return self.symbols[idx], length, offset


@dataclass
class Trajectory:
    """Finite path ``X_0 .. X_{T-1}`` with its regeneration times in ``[0, T]``."""

    symbols: np.ndarray
    regeneration_times: np.ndarray
    start_mode: str
    master_seed: int | None = None
    stream_index: int | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.symbols)

    def blocks(self):
        """``(start, stop, symbol)`` for each block fully or partly inside the path."""
        cuts = [0] + [int(t) for t in self.regeneration_times if 0 < t < len(self)] + [len(self)]
        cuts = sorted(set(cuts))
        return [(s, e, int(self.symbols[s])) for s, e in zip(cuts[:-1], cuts[1:]) if e > s]


def sample_block(model: ModelSpec, stream: RandomStream, sampler: BlockSampler | None = None):
    """One ``(symbol, length)`` draw: symbol from ``p``, length from ``q_symbol``."""
    sampler = sampler or BlockSampler(model)
    s, k = sampler.draw(stream.generator, 1)
    return int(s[0]), int(k[0])


def _chunk(model: ModelSpec, horizon: int) -> int:
    return int(horizon / model.nu * 1.05) + 16


def _fill(sampler, rng, start, horizon, chunk):
    """Concatenate fresh blocks from position ``start`` until ``horizon`` is covered."""
    syms, lens = [], []
    covered = start
    while covered < horizon:
        s, k = sampler.draw(rng, chunk)
        syms.append(s)
        lens.append(k)
        covered += int(k.sum())
    if not syms:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(syms), np.concatenate(lens)


def simulate_from_regeneration(model: ModelSpec, horizon: int, stream: RandomStream) -> Trajectory:
    """Path of length ``horizon`` whose first block starts at time 0."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    sampler = BlockSampler(model)
    rng = stream.generator
    sym, lens = _fill(sampler, rng, 0, horizon, _chunk(model, horizon))
    x = np.repeat(sym, lens)[:horizon]
    starts = np.concatenate([[0], np.cumsum(lens)])
    return Trajectory(
        symbols=x,
        regeneration_times=starts[starts <= horizon],
        start_mode="from_regeneration",
        master_seed=stream.master_seed,
        stream_index=stream.stream_index,
    )


def simulate_stationary(model: ModelSpec, horizon: int, stream: RandomStream) -> Trajectory:
    """Stationary path: length-biased first block with a uniform offset, then fresh blocks."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    sampler = BlockSampler(model)
    rng = stream.generator
    s0, k0, off = sampler.draw_covering(rng, 1)
    s0, k0, off = int(s0[0]), int(k0[0]), int(off[0])
    residual = k0 - off
    sym, lens = _fill(sampler, rng, residual, horizon, _chunk(model, horizon))
    x = np.concatenate([np.full(residual, s0, dtype=np.int64), np.repeat(sym, lens)])[:horizon]
    starts = residual + np.concatenate([[0], np.cumsum(lens)])
    if off == 0:
        starts = np.concatenate([[0], starts])
    return Trajectory(
        symbols=x,
        regeneration_times=starts[starts <= horizon],
        start_mode="stationary",
        master_seed=stream.master_seed,
        stream_index=stream.stream_index,
    )


def stationary_windows(sampler: BlockSampler, rng: np.random.Generator, size: int, width: int):
    """``size`` independent stationary windows of ``width`` letters.

    Returns ``(symbols, regenerations)``, both of shape ``(size, width)``;
    ``regenerations[i, t]`` marks a block start at window position ``t``.
    """
    x = np.zeros((size, width), dtype=np.int64)
    regen = np.zeros((size, width), dtype=bool)
    cols = np.arange(width)[None, :]
    s, k, off = sampler.draw_covering(rng, size)
    end = k - off
    # boolean assignment fills row-major, matching the repeat order
    x[cols < end[:, None]] = np.repeat(s, np.minimum(end, width))
    regen[:, 0] = off == 0
    pos = end.copy()
    active = np.flatnonzero(pos < width)
    while active.size:
        s, k = sampler.draw(rng, active.size)
        p = pos[active]
        regen[active, p] = True
        stop = np.minimum(p + k, width)
        sub = x[active]
        sub[(cols >= p[:, None]) & (cols < stop[:, None])] = np.repeat(s, stop - p)
        x[active] = sub
        pos[active] = p + k
        active = active[pos[active] < width]
    return x, regen


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_HEADER = "# regenerations:"
_META = "# meta:"


def format_trajectory(traj: Trajectory) -> str:
    """One symbol per line after a header listing the regeneration times.

    Format::

        # meta: start_mode=stationary master_seed=7 stream_index=0
        # regenerations: 0 3 4 9
        2
        2
        ...
    """
    lines = [
        f"{_META} start_mode={traj.start_mode} master_seed={traj.master_seed} "
        f"stream_index={traj.stream_index}",
        _HEADER + "".join(f" {int(t)}" for t in traj.regeneration_times),
    ]
    lines.extend(str(int(v)) for v in traj.symbols)
    return "\n".join(lines) + "\n"


def write_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(format_trajectory(traj))


def read_trajectory(path) -> Trajectory:
    meta, regen, symbols = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith(_META):
            meta = dict(item.split("=", 1) for item in line[len(_META):].split())
        elif line.startswith(_HEADER):
            regen = [int(t) for t in line[len(_HEADER):].split()]
        elif line.strip():
            symbols.append(int(line))
    if regen is None:
        raise ValueError(f"{path}: missing regeneration header")

    def _opt_int(v):
        return None if v in (None, "None") else int(v)

    return Trajectory(
        symbols=np.array(symbols, dtype=np.int64),
        regeneration_times=np.array(regen, dtype=np.int64),
        start_mode=meta.get("start_mode", "unknown"),
        master_seed=_opt_int(meta.get("master_seed")),
        stream_index=_opt_int(meta.get("stream_index")),
    )
