"""Source coders and the codeword-length processes they produce."""

from __future__ import annotations

import heapq
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .calculus import PeriodicEB, TradeoffPoint, delay_bound
from .sources import MarkovSource, _as_probs, entropy, extend_conditional, extend_group, \
    sequence_probabilities, stationary

KRAFT_ATOL = 1e-12
IDEAL_ATOL = 1e-9


@dataclass(frozen=True)
class CodeBook:
    """Symbol probabilities with codeword lengths and, optionally, codewords."""

    probs: np.ndarray
    lengths: np.ndarray
    codewords: tuple[str, ...] | None = None
    name: str = ""

    def __post_init__(self):
        p = _as_probs(self.probs)
        l = np.asarray(self.lengths, dtype=float)
        if l.shape != p.shape:
            raise ValueError("need one length per symbol")
        if np.any(l < 0):
            raise ValueError("codeword lengths must be non-negative")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "lengths", l)
        if self.codewords is not None:
            cw = tuple(self.codewords)
            if len(cw) != p.size or any(len(c) != int(n) for c, n in zip(cw, l)):
                raise ValueError("codewords do not match the lengths")
            object.__setattr__(self, "codewords", cw)

    @property
    def size(self) -> int:
        return int(self.probs.size)

    @property
    def integral(self) -> bool:
        return bool(np.all(self.lengths == np.round(self.lengths)))

    @property
    def mean_length(self) -> float:
        return float(self.probs @ self.lengths)

    @property
    def entropy(self) -> float:
        return entropy(self.probs)

    def kraft_sum(self) -> float:
        return float(np.exp2(-self.lengths).sum())

    def check_kraft(self) -> bool:
        k = self.kraft_sum()
        if self.integral:
            return k <= 1.0 + KRAFT_ATOL
        return abs(k - 1.0) <= IDEAL_ATOL

    def is_prefix_free(self) -> bool:
        if self.codewords is None:
            raise ValueError("codebook has no codewords")
        words = sorted(self.codewords)
        # in sorted order a prefix is immediately followed by one of its extensions
        return all(not b.startswith(a) for a, b in zip(words, words[1:]))

    def to_table(self) -> str:
        rows = ["symbol\tprobability\tlength\tcodeword"]
        for i, (p, l) in enumerate(zip(self.probs, self.lengths)):
            cw = self.codewords[i] if self.codewords is not None else "-"
            ln = str(int(l)) if self.integral else f"{l:.6g}"
            rows.append(f"{i}\t{p:.10g}\t{ln}\t{cw}")
        return "\n".join(rows)


def huffman(probs, name: str = "huffman") -> CodeBook:
    """Binary Huffman code.

    The heap is ordered by (probability, newest node first), so among equal
    probabilities the most recently created node is merged first.  A single
    symbol gets length 0.
    """
    p = _as_probs(probs)
    n = p.size
    if n == 1:
        return CodeBook(p, np.zeros(1), ("",), name)
    counter = itertools.count()
    heap = []
    for i in range(n):
        heapq.heappush(heap, (p[i], -next(counter), [i]))
    codes = [""] * n
    while len(heap) > 1:
        p0, _, s0 = heapq.heappop(heap)
        p1, _, s1 = heapq.heappop(heap)
        for i in s0:
            codes[i] = "0" + codes[i]
        for i in s1:
            codes[i] = "1" + codes[i]
        heapq.heappush(heap, (p0 + p1, -next(counter), s0 + s1))
    return CodeBook(p, np.array([len(c) for c in codes], float), tuple(codes), name)


def _ceil_info(p):
    # ceil(-ld p) with slack so that exact powers of two are not rounded up
    x = -np.log2(np.asarray(p, dtype=float))
    return np.ceil(x - 1e-12).clip(min=0)


def _binary_fraction(f: Fraction, n: int) -> str:
    bits = []
    for _ in range(n):
        f *= 2
        if f >= 1:
            bits.append("1")
            f -= 1
        else:
            bits.append("0")
    return "".join(bits)


def shannon_code(probs, name: str = "shannon") -> CodeBook:
    """Shannon code: ``l_i = ceil(-ld p_i)``, codewords from the cumulative probabilities.

    Symbols are processed in decreasing probability order (stable), but the
    returned codebook keeps the input order.
    """
    p = _as_probs(probs)
    lengths = _ceil_info(p)
    order = np.argsort(-p, kind="stable")
    cum = Fraction(0)
    codes = [""] * p.size
    for i in order:
        codes[i] = _binary_fraction(cum, int(lengths[i]))
        cum += Fraction(float(p[i]))
    return CodeBook(p, lengths, tuple(codes), name)


def sfe_lengths(probs, name: str = "sfe") -> CodeBook:
    """Shannon-Fano-Elias lengths ``ceil(-ld p_i) + 1``."""
    p = _as_probs(probs)
    return CodeBook(p, _ceil_info(p) + 1, None, name)


def ideal_lengths(probs, name: str = "ideal") -> CodeBook:
    """Real-valued lengths ``-ld p_i`` (zero-probability symbols dropped)."""
    p = _as_probs(probs)
    p = p[p > 0]
    return CodeBook(p, -np.log2(p), None, name)


def make_code(kind: str, probs) -> CodeBook:
    builders = {"huffman": huffman, "shannon": shannon_code, "sfe": sfe_lengths,
                "ideal": ideal_lengths}
    try:
        return builders[kind](probs)
    except KeyError:
        raise ValueError(f"unknown coder {kind!r}; expected one of {sorted(builders)}") from None


# --------------------------------------------------------------------------
# Window Lempel-Ziv with Elias-delta pointers
# --------------------------------------------------------------------------

def elias_delta_length(k: int) -> int:
    """Pointer length ``floor(ld(k+1)) + 2 floor(ld(ld(k+1)+1)) + 1``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    n = (k + 1).bit_length() - 1
    return n + 2 * ((n + 1).bit_length() - 1) + 1


def lz_window(max_bits: int) -> int:
    """Largest ``k`` whose pointer fits in ``max_bits``; ``0`` if none does."""
    w = 0
    y = 1
    while True:
        k_u = 2 ** (y + 1) - 2
        if elias_delta_length(k_u) > max_bits:
            return w
        w = k_u
        y += 1


def lz_blocks(w: int):
    """Dyadic blocks ``(k_l, k_u, l)`` with constant pointer length covering ``1..w``."""
    y = 1
    while 2 ** y - 1 <= w:
        k_l = 2 ** y - 1
        k_u = min(2 ** (y + 1) - 2, w)
        yield k_l, k_u, elias_delta_length(k_l)
        y += 1


@dataclass(frozen=True)
class LZModel:
    """Length model of window LZ over supersymbols of ``s`` symbols.

    Supersymbol probabilities are stored as classes: ``probs[c]`` occurs for
    ``counts[c]`` distinct supersymbols.  A hit with recurrence time ``k``
    costs ``l(k)`` bits, a miss ``alphabet_bits + 1`` bits.
    """

    probs: np.ndarray
    counts: np.ndarray
    s: int
    alphabet_bits: int
    w: int

    @property
    def miss_bits(self) -> int:
        return self.alphabet_bits + elias_delta_length(0)

    def _log_pow(self, n: int) -> np.ndarray:
        # ln (1 - p)^n, with (1 - 1)^0 = 1
        if n == 0:
            return np.zeros_like(self.probs)
        with np.errstate(divide="ignore"):
            return n * np.log1p(-self.probs)

    def _log_miss(self) -> np.ndarray:
        return self._log_pow(self.w)

    @property
    def p_hit(self) -> float:
        return float((self.counts * self.probs * -np.expm1(self._log_miss())).sum())

    @property
    def mean_length(self) -> float:
        """Expected codeword length per supersymbol."""
        tot = np.zeros_like(self.probs)
        for k_l, k_u, l in lz_blocks(self.w):
            tot += l * np.exp(self._log_pow(k_l - 1)) * -np.expm1(self._log_pow(k_u - k_l + 1))
        tot += self.miss_bits * np.exp(self._log_miss())
        return float((self.counts * self.probs * tot).sum())

    @property
    def normalized_length(self) -> float:
        return self.mean_length / self.s

    def log_mgf(self, theta: float) -> float:
        """``ln M_L(theta)`` of one supersymbol codeword length, by dyadic blocks."""
        terms = [self._log_miss() + theta * self.miss_bits]
        for k_l, k_u, l in lz_blocks(self.w):
            span = -np.expm1(self._log_pow(k_u - k_l + 1))
            with np.errstate(divide="ignore"):
                terms.append(self._log_pow(k_l - 1) + np.log(span) + theta * l)
        inner = logsumexp(np.vstack(terms), axis=0)
        return float(logsumexp(inner + np.log(self.probs), b=self.counts))

    def log_mgf_bruteforce(self, theta: float) -> float:
        """Direct summation over ``k = 1..w`` (feasible for small windows)."""
        if self.w > 2 ** 20:
            raise ValueError("window too large for brute-force summation")
        k = np.arange(1, self.w + 1)
        lk = np.array([elias_delta_length(int(x)) for x in k], float)
        out = []
        for p in self.probs:
            hit = (p * (1 - p) ** (k - 1) * np.exp(theta * lk)).sum()
            out.append(hit + (1 - p) ** self.w * math.exp(theta * self.miss_bits))
        return float(np.log((self.counts * self.probs * np.array(out)).sum()))

    def effective_bandwidth(self) -> PeriodicEB:
        return PeriodicEB(self.log_mgf, self.s, mean_rate=self.normalized_length,
                          peak_rate=max(self.miss_bits, elias_delta_length(self.w)) / self.s,
                          label=f"lz(s={self.s}, w={self.w})")


def supersymbol_classes(probs, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct probabilities of i.i.d. ``s``-sequences and how often each occurs."""
    p = _as_probs(probs)
    mult = Counter(p[p > 0].tolist())
    values = sorted(mult)
    out_p, out_n = [], []
    for combo in itertools.combinations_with_replacement(range(len(values)), s):
        reps = Counter(combo)
        ways = math.factorial(s)
        for r in reps.values():
            ways //= math.factorial(r)
        n = ways
        pr = 1.0
        for idx, r in reps.items():
            n *= mult[values[idx]] ** r
            pr *= values[idx] ** r
        out_p.append(pr)
        out_n.append(float(n))
    return np.array(out_p), np.array(out_n)


def lz_model(probs, s: int = 1, alphabet_bits: int | None = None, *,
             counts=None, w: int | None = None) -> LZModel:
    """LZ length model.

    ``probs`` are base-symbol probabilities (grouped into ``s``-sequences
    here) unless ``counts`` is given, in which case they already are
    supersymbol class probabilities.  ``alphabet_bits`` defaults to
    ``s * ceil(ld |X|)``; the window follows from it unless set explicitly.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if counts is None:
        p = _as_probs(probs)
        if alphabet_bits is None:
            alphabet_bits = s * max(1, math.ceil(math.log2(p.size) - 1e-12))
        cp, cn = supersymbol_classes(p, s)
    else:
        cp = np.asarray(probs, dtype=float)
        cn = np.asarray(counts, dtype=float)
        if abs(float(cp @ cn) - 1.0) > 1e-9:
            raise ValueError("class probabilities times counts must sum to 1")
        if alphabet_bits is None:
            raise ValueError("alphabet_bits is required with explicit classes")
    if w is None:
        w = lz_window(alphabet_bits)
    return LZModel(cp, cn, int(s), int(alphabet_bits), int(w))


def lz_alpha(model: LZModel, theta: float) -> float:
    """``alpha(theta, 1) = ln M_L(theta) / theta``, bits per supersymbol."""
    return model.log_mgf(theta) / theta


def lz_delay(model: LZModel, c: float, epsilon: float, **kw) -> TradeoffPoint:
    """Delay bound of periodic supersymbol emission; grouping latency in ``latency``."""
    pt = delay_bound(model.effective_bandwidth(), c, epsilon, **kw)
    return TradeoffPoint(pt.c, pt.d, pt.epsilon, pt.theta, pt.delta,
                         latency=float(model.s - 1), note=pt.note)


# --------------------------------------------------------------------------
# Codes for Markov sources
# --------------------------------------------------------------------------

def state_dependent_codes(Q, coder: str = "huffman") -> MarkovSource:
    """Conditional extension with a separate code for each predecessor state."""
    q = np.asarray(Q, dtype=float)
    m = q.shape[0]
    lengths = np.zeros((m, m))
    for j in range(m):
        row = q[j]
        nz = row > 0
        book = make_code(coder, row[nz] / row[nz].sum())
        lengths[j, nz] = book.lengths
    return extend_conditional(q, lengths)


@dataclass(frozen=True)
class GroupedCode:
    source: MarkovSource
    book: CodeBook
    sequences: tuple
    s: int

    @property
    def normalized_entropy(self) -> float:
        return self.book.entropy / self.s

    @property
    def normalized_length(self) -> float:
        return self.book.mean_length / self.s


def grouped_code(Q, s: int, coder: str = "huffman") -> GroupedCode:
    """Code ``s``-symbol blocks of a Markov chain with one codebook over the blocks."""
    seqs, probs = sequence_probabilities(Q, s)
    book = make_code(coder, probs / probs.sum())
    src = extend_group(Q, s, book.lengths)
    return GroupedCode(src, book, tuple(seqs), s)


def markov_code_rate(Q, lengths: Sequence[Sequence[float]]) -> float:
    """``sum_j p_j sum_i q_ji l_{i|j}`` in bits per symbol."""
    q = np.asarray(Q, dtype=float)
    return float(stationary(q) @ (q * np.asarray(lengths, float)).sum(axis=1))
