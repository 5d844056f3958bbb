"""Monte-Carlo oracle: sample sources, encode them, and queue the bits FCFS.

Conventions: time is slotted, arrivals of slot ``t`` may be served in slot
``t`` and ``D(t) = min(A(t), D(t-1) + s(t))``.  The virtual delay
``W(t) = min{tau >= 0 : A(t) <= D(t + tau)}`` is computed for every slot
whose departure falls inside the horizon; later slots are censored.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .channels import GOOD, GilbertElliott
from .coders import CodeBook, GroupedCode, LZModel, elias_delta_length
from .sources import CategoricalSource, GeometricSource, MarkovSource, PoissonCount

WARMUP_FRACTION = 0.01
DELAY_RTOL = 1e-9
MIN_SAMPLES = 1000


class RngStream:
    """Reproducible random stream identified by a 64-bit seed and a stream id."""

    def __init__(self, seed: int = 0, stream: int = 0):
        if not 0 <= int(seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if stream < 0:
            raise ValueError("stream id must be non-negative")
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def spawn(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)


def _markov_path(Q, P, n: int, rng: RngStream) -> np.ndarray:
    cum = np.cumsum(np.asarray(Q, float), axis=1)
    cum[:, -1] = 1.0
    x0 = int(np.searchsorted(np.cumsum(P), rng.gen.random(), side="right"))
    x0 = min(x0, len(P) - 1)
    u = rng.gen.random(n)
    return _kernels.markov_sample(np.ascontiguousarray(cum), x0, u)


def sample_symbols(source, n: int, rng: RngStream) -> np.ndarray:
    """``n`` symbols (or states, or per-slot counts for a count process).

    Markov chains start from their stationary distribution.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g = rng.gen
    if isinstance(source, CategoricalSource):
        cum = np.cumsum(source.probs)
        idx = np.searchsorted(cum, g.random(n) * cum[-1], side="right")
        return np.minimum(idx, source.size - 1).astype(np.int64)
    if isinstance(source, GeometricSource):
        return (g.geometric(source.p, n) - 1).astype(np.int64)
    if isinstance(source, MarkovSource):
        return _markov_path(source.Q, source.P, n, rng)
    if isinstance(source, PoissonCount):
        return g.poisson(source.rate, n).astype(np.int64)
    raise TypeError(f"cannot sample from {type(source).__name__}")


def sample_modulated(count: PoissonCount, book: CodeBook, n: int, rng: RngStream) -> np.ndarray:
    """Per-slot bits of a source emitting a random number of coded symbols per slot."""
    counts = sample_symbols(count, n, rng)
    total = int(counts.sum())
    syms = sample_symbols(CategoricalSource(book.probs), max(total, 1), rng)[:total]
    bits = book.lengths[syms]
    slot = np.repeat(np.arange(n), counts)
    return np.bincount(slot, weights=bits, minlength=n)


def _burst(lengths: np.ndarray, s: int) -> np.ndarray:
    # one codeword per group, emitted in the last slot of the group
    out = np.zeros(lengths.size * s)
    out[s - 1::s] = lengths
    return out


def lz_encode(symbols, model: LZModel) -> np.ndarray:
    """Operational window LZ at ``s = 1``: pointer to the latest occurrence if within ``w``."""
    if model.s != 1:
        raise ValueError("the operational LZ encoder works on single symbols (s = 1)")
    sym = np.asarray(symbols, dtype=np.int64)
    k = _kernels.recurrence(sym, int(sym.max()) + 1)
    hit = (k >= 1) & (k <= model.w)
    table = np.array([elias_delta_length(int(j)) for j in range(model.w + 1)], float)
    return np.where(hit, table[np.minimum(k, model.w)], float(model.miss_bits))


def encode_stream(symbols, coder) -> np.ndarray:
    """Per-slot bit increments of a symbol stream under ``coder``.

    * :class:`CodeBook`: one codeword per slot, ``symbols`` index the book.
    * :class:`MarkovSource`: ``symbols`` are its states; with period ``s``
      every state yields one burst per ``s`` slots.
    * :class:`GroupedCode`: ``symbols`` are base symbols, grouped into blocks.
    * :class:`LZModel` (``s = 1``): the window encoder.
    """
    sym = np.asarray(symbols, dtype=np.int64)
    if isinstance(coder, CodeBook):
        if sym.size and (sym.min() < 0 or sym.max() >= coder.size):
            raise ValueError("symbol outside the codebook")
        return coder.lengths[sym]
    if isinstance(coder, MarkovSource):
        if sym.size and (sym.min() < 0 or sym.max() >= coder.m):
            raise ValueError("state outside the chain")
        return _burst(coder.lengths[sym], coder.period)
    if isinstance(coder, GroupedCode):
        s = coder.s
        n = sym.size // s
        index = {t: i for i, t in enumerate(coder.sequences)}
        blocks = sym[: n * s].reshape(n, s)
        try:
            ids = np.array([index[tuple(b)] for b in blocks.tolist()], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"block {exc.args[0]} has no codeword") from None
        return _burst(coder.book.lengths[ids], s)
    if isinstance(coder, LZModel):
        return lz_encode(sym, coder)
    raise TypeError(f"unsupported coder {type(coder).__name__}")


def ge_states(ch: GilbertElliott, n: int, rng: RngStream) -> np.ndarray:
    return _markov_path(ch.Q, ch.P, n, rng)


def ge_service(ch: GilbertElliott, n: int, rng: RngStream) -> np.ndarray:
    """Per-slot service: ``R`` in good slots, ``0`` in bad slots."""
    return np.where(ge_states(ch, n, rng) == GOOD, float(ch.R), 0.0)


def constant_service(c: float, n: int) -> np.ndarray:
    return np.full(n, float(c))


@dataclass
class Trace:
    arrivals: np.ndarray
    service: np.ndarray
    cum_a: np.ndarray
    cum_d: np.ndarray
    delays: np.ndarray
    warmup: int

    @property
    def n(self) -> int:
        return int(self.arrivals.size)

    @property
    def samples(self) -> np.ndarray:
        """Delays after the warm-up, censored slots removed."""
        w = self.delays[self.warmup:]
        return w[w >= 0]

    @property
    def censored(self) -> int:
        return int((self.delays[self.warmup:] < 0).sum())

    @property
    def backlog(self) -> np.ndarray:
        return self.cum_a - self.cum_d

    def to_csv(self, path) -> Path:
        return export_csv(self, path)


def fcfs_delays(arrivals, service, *, warmup: float = WARMUP_FRACTION,
                rtol: float = DELAY_RTOL) -> Trace:
    """Run the FCFS queue and compute per-slot virtual delays."""
    a = np.ascontiguousarray(arrivals, dtype=float)
    s = np.ascontiguousarray(service, dtype=float)
    if a.shape != s.shape or a.ndim != 1:
        raise ValueError("arrivals and service must be 1-d sequences of equal length")
    if np.any(s < 0) or np.any(a < 0):
        raise ValueError("increments must be non-negative")
    if not 0.0 <= warmup < 1.0:
        raise ValueError("warm-up fraction must lie in [0, 1)")
    cum_a, cum_d = _kernels.departures(a, s)
    d = _kernels.delays(cum_a, cum_d, rtol)
    return Trace(a, s, cum_a, cum_d, d, int(math.floor(warmup * a.size)))


def violation_rate(samples, d: float) -> tuple[float, float]:
    """Fraction of ``samples`` exceeding ``d`` and its binomial standard error."""
    x = np.asarray(samples)
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    if math.isinf(d) and d > 0:
        return 0.0, 0.0
    f = float(np.count_nonzero(x > d)) / x.size
    return f, math.sqrt(f * (1.0 - f) / x.size)


def dominates(samples, d: float, epsilon: float, k: float = 3.0) -> bool:
    f, se = violation_rate(samples, d)
    return f <= epsilon + k * se


def envelope_check(increments, log_mgf_path, theta: float, delta: float,
                   sigmas: Sequence[float], rng: RngStream, *, n_pairs: int = 100_000,
                   max_lag: int = 200) -> list[tuple[float, float, float]]:
    """Empirical ``P[A(tau, t) > E(t - tau) + sigma]`` over random interval pairs.

    ``E(u) = ln M_A(theta, u)/theta + delta u - ln(theta delta)/theta``;
    ``log_mgf_path(theta, max_lag)`` supplies ``ln M_A`` for ``u = 1..max_lag``.
    Returns ``(sigma, frequency, exp(-theta sigma))`` triples.
    """
    a = np.asarray(increments, dtype=float)
    cum = np.concatenate(([0.0], np.cumsum(a)))
    n = a.size
    lm = np.asarray(log_mgf_path(theta, max_lag), dtype=float)
    lags = rng.gen.integers(1, max_lag + 1, n_pairs)
    start = rng.gen.integers(0, n - max_lag, n_pairs)
    amount = cum[start + lags] - cum[start]
    env = lm[lags - 1] / theta + delta * lags - math.log(theta * delta) / theta
    out = []
    for sg in sigmas:
        out.append((float(sg), float(np.mean(amount > env + sg)), math.exp(-theta * sg)))
    return out


CSV_COLUMNS = ("slot", "arrival_bits", "service_bits", "cum_A", "cum_D", "delay_slots")


def export_csv(trace: Trace, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for t in range(trace.n):
            w.writerow((t + 1, repr(float(trace.arrivals[t])), repr(float(trace.service[t])),
                        repr(float(trace.cum_a[t])), repr(float(trace.cum_d[t])),
                        int(trace.delays[t])))
    return path
