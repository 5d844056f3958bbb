"""Symbol sources and their effective bandwidths.

Covers memoryless categorical and geometric sources, Markov sources (with
the conditional ``m -> m^2`` and supersymbol ``m -> m^s`` state extensions)
and sources whose symbol count per slot is itself random.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import gammaln, logsumexp

from . import _kernels
from .calculus import ConstantEB, EffectiveBandwidth, _approx_ge
from .errors import ConvergenceError, DomainError, ReducibleChainError

LN2 = math.log(2.0)
PROB_ATOL = 1e-12
# beyond theta * (l_max - l_min) of this size, e^{theta l} ratios underflow
MAX_LOG_SPREAD = 300.0


def _as_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probabilities must be a non-empty 1-d sequence")
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True)
class CategoricalSource:
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_probs(self.probs))

    @property
    def size(self) -> int:
        return int(self.probs.size)


@dataclass(frozen=True)
class GeometricSource:
    """Symbols ``i >= 0`` with ``P[i] = p (1 - p)^i``."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")

    def probs(self, tail: float = PROB_ATOL) -> np.ndarray:
        """Probabilities truncated where the remaining tail mass drops below ``tail``."""
        n = int(math.ceil(math.log(tail) / math.log1p(-self.p)))
        return self.p * (1.0 - self.p) ** np.arange(max(n, 1))


def entropy(source) -> float:
    """Entropy in bits; accepts a probability vector or a source object."""
    if isinstance(source, GeometricSource):
        return geometric_entropy(source.p)
    p = source.probs if isinstance(source, CategoricalSource) else np.asarray(source, float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def geometric_entropy(p: float) -> float:
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p)) / p


# --------------------------------------------------------------------------
# Markov chains
# --------------------------------------------------------------------------

def _as_stochastic(Q) -> np.ndarray:
    q = np.array(Q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError("transition matrix must be square")
    if np.any(q < 0):
        raise ValueError("transition probabilities must be non-negative")
    err = np.abs(q.sum(axis=1) - 1.0).max()
    if err > 1e-9:
        raise ValueError(f"rows of Q must sum to 1 (max deviation {err:.3g})")
    return q


def check_irreducible(Q) -> None:
    q = np.asarray(Q)
    n, labels = connected_components(q > 0, directed=True, connection="strong")
    if n > 1:
        sizes = np.bincount(labels)
        raise ReducibleChainError(
            f"chain is reducible: {n} strongly connected classes of sizes {sizes.tolist()}")


def stationary(Q, *, check: bool = True) -> np.ndarray:
    """Stationary row vector ``P = P Q`` with ``sum(P) = 1``.

    Dense solve up to 64 states, damped power iteration above.
    """
    q = _as_stochastic(Q)
    if check:
        check_irreducible(q)
    m = q.shape[0]
    if m <= 64:
        a = np.vstack([q.T - np.eye(m), np.ones(m)])
        b = np.zeros(m + 1)
        b[-1] = 1.0
        p, *_ = np.linalg.lstsq(a, b, rcond=None)
    else:
        p = np.full(m, 1.0 / m)
        for _ in range(1_000_000):
            nxt = 0.5 * (p + p @ q)
            if np.abs(nxt - p).max() <= 1e-15:
                p = nxt
                break
            p = nxt
        else:
            raise ConvergenceError("stationary power iteration did not converge")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    if check and np.any(p <= 0):
        raise ReducibleChainError("stationary vector has zero entries")
    return p


def entropy_rate_markov(Q) -> float:
    """``H = -sum_i sum_j p_i q_ij ld q_ij`` in bits per symbol."""
    q = _as_stochastic(Q)
    p = stationary(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log2(q), 0.0)
    return float(-(p[:, None] * terms).sum())


@dataclass(frozen=True)
class MarkovSource:
    """Markov chain emitting ``lengths[i]`` bits whenever it enters state ``i``.

    With ``period = s > 1`` every state is a group of ``s`` symbols whose
    codeword is emitted once per ``s`` slots; ``grouping_delay`` records the
    ``s - 1`` slots spent collecting the group.
    """

    Q: np.ndarray
    lengths: np.ndarray
    P: np.ndarray | None = None
    labels: tuple | None = None
    period: int = 1
    grouping_delay: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        q = _as_stochastic(self.Q)
        lengths = np.asarray(self.lengths, dtype=float)
        if lengths.shape != (q.shape[0],):
            raise ValueError("need one emission length per state")
        if np.any(lengths < 0):
            raise ValueError("emission lengths must be non-negative")
        p = stationary(q) if self.P is None else np.asarray(self.P, dtype=float)
        if self.P is not None:
            check_irreducible(q)
            if np.abs(p @ q - p).max() > 1e-9 or abs(p.sum() - 1) > 1e-9:
                raise ValueError("P is not stationary for Q")
        if self.period < 1:
            raise ValueError("period must be >= 1")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "P", p)

    @property
    def m(self) -> int:
        return int(self.Q.shape[0])

    @property
    def mean_rate(self) -> float:
        """Expected emitted bits per slot."""
        return float(self.P @ self.lengths) / self.period

    def effective_bandwidth(self) -> "MarkovEB":
        eb = self._cache.get("eb")
        if eb is None:
            eb = self._cache["eb"] = MarkovEB(self)
        return eb


class MarkovEB(EffectiveBandwidth):
    """Effective bandwidth of a (possibly grouped) Markov source.

    ``t alpha(theta, t) = ln(P (L Q)^(ceil(t/s) - 1) L 1) / theta`` where
    ``L = diag(exp(theta l_i))``; all products are carried out with per-step
    rescaling so that nothing overflows.
    """

    BURST_MAXITER = 100_000
    PERRON_RTOL = 1e-10
    PERRON_MAXITER = 1_000_000

    def __init__(self, source: MarkovSource):
        self.source = source
        self.period = source.period
        self.time_class = "monotone" if source.period == 1 else "periodic"
        self._P = np.ascontiguousarray(source.P)
        self._Q = np.ascontiguousarray(source.Q)
        self._l = source.lengths
        self._lmax = float(self._l.max())
        spread = float(self._lmax - self._l.min())
        self.theta_max = MAX_LOG_SPREAD / spread if spread > 0 else math.inf
        self.mean_rate = source.mean_rate
        self.peak_rate = self._lmax / source.period
        self._rates: dict[float, float] = {}
        self._paths: dict[float, np.ndarray] = {}

    def __repr__(self):
        return f"MarkovEB(m={self.source.m}, s={self.period})"

    def _scaled(self, theta):
        lsc = np.exp(theta * (self._l - self._lmax))
        return self._P * lsc, lsc

    def _groups(self, t: int) -> int:
        return -(-int(t) // self.period)

    def log_mgf(self, theta, t):
        n = self._groups(t)
        v0, lsc = self._scaled(theta)
        path, _, _ = _kernels.markov_log_path(v0, self._Q, lsc, n, 0.0, True)
        return float(path[-1]) + n * theta * self._lmax

    def log_mgf_path(self, theta, horizon):
        n = self._groups(horizon)
        v0, lsc = self._scaled(theta)
        path, _, _ = _kernels.markov_log_path(v0, self._Q, lsc, n, 0.0, True)
        k = np.arange(1, n + 1)
        groups = path + k * theta * self._lmax
        t = np.arange(1, horizon + 1)
        return groups[-(-t // self.period) - 1]

    def log_spectral_radius(self, theta: float) -> float:
        """``ln rho(L(theta) Q)`` by power iteration."""
        cached = self._rates.get(theta)
        if cached is not None:
            return cached
        _, lsc = self._scaled(theta)
        mat = np.ascontiguousarray(lsc[:, None] * self._Q)
        # the rate divides ln(rho) by theta, so tighten the tolerance at small theta
        rtol = min(self.PERRON_RTOL, max(1e-14, self.PERRON_RTOL * theta * max(self._lmax, 1.0)))
        rho, _, ok = _kernels.perron_root(mat, rtol, self.PERRON_MAXITER)
        if not ok:
            raise ConvergenceError(f"power iteration did not converge at theta={theta}")
        val = math.log(rho) + theta * self._lmax
        if len(self._rates) > 100_000:
            self._rates.clear()
        self._rates[theta] = val
        return val

    def rate(self, theta):
        return self.log_spectral_radius(theta) / (theta * self.period)

    def group_path(self, theta: float) -> np.ndarray:
        """``ln M_A`` after ``k = 1, 2, ...`` groups, until the increments settle.

        The path is extended in doubling chunks until the last increment is
        within ``1e-9`` (relative) of the spectral limit, or
        ``BURST_MAXITER`` groups.  Results are cached per theta.
        """
        cached = self._paths.get(theta)
        if cached is not None:
            return cached
        step = self.log_spectral_radius(theta)
        tol = 1e-9 * max(abs(step), 1e-12)
        v, lsc = self._scaled(theta)
        acc, fresh, k0, chunk = 0.0, True, 0, 64
        parts = []
        while k0 < self.BURST_MAXITER:
            path, v, acc = _kernels.markov_log_path(v, self._Q, lsc, chunk, acc, fresh)
            fresh = False
            k = np.arange(k0 + 1, k0 + chunk + 1)
            parts.append(path + k * theta * self._lmax)
            k0 += chunk
            if abs(parts[-1][-1] - parts[-1][-2] - step) <= tol:
                break
            chunk = min(2 * chunk, 4096)
        lg = np.concatenate(parts)
        if len(self._paths) > 4096:
            self._paths.clear()
        self._paths[theta] = lg
        return lg

    def burst(self, theta, rate):
        """``sup_t (t alpha(theta,t) - rate t)``; groups are emitted at slots ``s(k-1)+1``."""
        if not _approx_ge(rate, self.rate(theta)):
            return math.inf
        lg = self.group_path(theta)
        k = np.arange(lg.size)
        return max(0.0, float((lg / theta - rate * (self.period * k + 1)).max()))


def alpha_markov(ms: MarkovSource, theta: float, t: int) -> float:
    """``alpha(theta, t)`` of the Markov source in bits per slot."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if not theta > 0:
        raise DomainError("theta must be positive")
    return ms.effective_bandwidth()(theta, t)


def alpha_markov_sup(ms: MarkovSource, theta: float) -> float:
    """``lim_t alpha(theta, t) = ln rho(L(theta) Q) / (theta s)``."""
    if not theta > 0:
        raise DomainError("theta must be positive")
    return ms.effective_bandwidth().rate(theta)


def conditional_information(Q) -> np.ndarray:
    """``I[j, i] = -ld q_ji``: information of symbol i after symbol j."""
    q = np.asarray(Q, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.log2(q)


def extend_conditional(Q, lengths=None) -> MarkovSource:
    """Extend an ``m``-state chain to pair states ``(i|j)`` (symbol i after j).

    The transition ``(j|k) -> (i|j)`` has probability ``q_ji``.  States with
    ``q_ji = 0`` never occur and are dropped.  ``lengths[j][i]`` gives the
    emission of state ``(i|j)``; by default the conditional information
    ``-ld q_ji``.
    """
    q = _as_stochastic(Q)
    check_irreducible(q)
    p = stationary(q)
    m = q.shape[0]
    states = [(i, j) for j in range(m) for i in range(m) if q[j, i] > 0]
    index = {st: n for n, st in enumerate(states)}
    big = np.zeros((len(states), len(states)))
    for (j, k), a in index.items():
        # current state (j|k): last symbol j, next symbol i w.p. q_ji
        for i in range(m):
            if q[j, i] > 0:
                big[a, index[(i, j)]] = q[j, i]
    if lengths is None:
        lv = np.array([-math.log2(q[j, i]) for i, j in states])
    else:
        lt = np.asarray(lengths, dtype=float)
        lv = np.array([lt[j, i] for i, j in states])
    pv = np.array([p[j] * q[j, i] for i, j in states])
    return MarkovSource(big, lv, P=pv, labels=tuple(states))


def sequence_probabilities(Q, s: int, P=None) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """All ``s``-symbol sequences of a stationary chain with non-zero probability."""
    q = _as_stochastic(Q)
    p = stationary(q) if P is None else np.asarray(P, float)
    m = q.shape[0]
    if m ** s > 2 ** 16:
        raise ValueError(f"{m}^{s} sequences exceed the enumeration limit 2^16")
    seqs, probs = [], []
    for tup in itertools.product(range(m), repeat=s):
        pr = p[tup[0]]
        for a, b in zip(tup, tup[1:]):
            pr *= q[a, b]
        if pr > 0:
            seqs.append(tup)
            probs.append(pr)
    return seqs, np.array(probs)


def extend_group(Q, s: int, codeword_lengths: Mapping[tuple, float] | Callable | Sequence) -> MarkovSource:
    """Supersymbol chain over ``s``-tuples, one codeword emitted every ``s`` slots.

    ``codeword_lengths`` maps each reachable ``s``-tuple to its codeword
    length (a mapping, a callable, or a sequence aligned with
    :func:`sequence_probabilities`).  The transition from tuple ``a`` to tuple
    ``b`` has probability ``q[a_-1, b_0] q[b_0, b_1] ... q[b_-2, b_-1]``.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    q = _as_stochastic(Q)
    check_irreducible(q)
    seqs, probs = sequence_probabilities(q, s)
    if callable(codeword_lengths):
        lv = [codeword_lengths(t) for t in seqs]
    elif isinstance(codeword_lengths, Mapping):
        missing = [t for t in seqs if t not in codeword_lengths]
        if missing:
            raise KeyError(f"no codeword length for reachable tuple {missing[0]}")
        lv = [codeword_lengths[t] for t in seqs]
    else:
        lv = list(codeword_lengths)
        if len(lv) != len(seqs):
            raise ValueError("length sequence does not match the reachable tuples")
    n = len(seqs)
    # within-tuple probability of b given its first symbol
    inner = probs / stationary(q)[[t[0] for t in seqs]]
    first = np.array([t[0] for t in seqs])
    last = np.array([t[-1] for t in seqs])
    big = q[last][:, first] * inner[None, :]
    big /= big.sum(axis=1, keepdims=True)
    return MarkovSource(big, np.asarray(lv, float), P=probs / probs.sum(),
                        labels=tuple(seqs), period=s, grouping_delay=s - 1)


# --------------------------------------------------------------------------
# Memoryless effective bandwidths
# --------------------------------------------------------------------------

def categorical_cgf(probs, lengths) -> Callable[[float], float]:
    """``theta -> ln sum_i p_i exp(theta l_i)`` evaluated stably."""
    p = _as_probs(probs)
    l = np.asarray(lengths, dtype=float)
    keep = p > 0
    lp, l = np.log(p[keep]), l[keep]

    def cgf(theta: float) -> float:
        return float(logsumexp(lp + theta * l))

    return cgf


def categorical_eb(probs, lengths, label: str = "") -> ConstantEB:
    p = _as_probs(probs)
    l = np.asarray(lengths, dtype=float)
    return ConstantEB(categorical_cgf(p, l), mean_rate=float(p @ l),
                      peak_rate=float(l[p > 0].max()), label=label)


def alpha_categorical(probs, lengths, theta: float) -> float:
    """``(1/theta) ln sum_i p_i e^{theta l_i}``."""
    if not theta > 0:
        raise DomainError("theta must be positive")
    return categorical_cgf(probs, lengths)(theta) / theta


def geometric_ideal_cgf(p: float) -> Callable[[float], float]:
    def cgf(theta: float) -> float:
        if not 0.0 < theta < LN2:
            raise DomainError(f"theta={theta} outside (0, ln 2)")
        e = 1.0 - theta / LN2
        return e * math.log(p) - math.log1p(-((1.0 - p) ** e))

    return cgf


def geometric_ideal_eb(p: float) -> ConstantEB:
    """Geometric source coded with lengths ``-ld p_i`` (closed form, ``theta < ln 2``)."""
    GeometricSource(p)
    return ConstantEB(geometric_ideal_cgf(p), theta_max=LN2, mean_rate=geometric_entropy(p),
                      label=f"geometric(p={p})")


def alpha_geometric_ideal(p: float, theta: float) -> float:
    return geometric_ideal_cgf(p)(theta) / theta


# --------------------------------------------------------------------------
# Random symbol counts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonCount:
    """Poisson number of symbols per slot with mean ``rate``."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def log_pmf(self, n, t: int = 1):
        n = np.asarray(n, dtype=float)
        mu = self.rate * t
        return -mu + n * math.log(mu) - gammaln(n + 1)

    def pmf(self, n, t: int = 1):
        return np.exp(self.log_pmf(n, t))

    def support_bound(self, t: int = 1, tail: float = PROB_ATOL) -> int:
        mu = self.rate * t
        n = int(mu + 10 * math.sqrt(mu) + 20)
        while self.pmf(n, t) > tail * 1e-3:
            n *= 2
        return n


def alpha_variable_rate(count, log_mgf_l: Callable[[float], float], theta: float, t: int = 1,
                        tail: float = PROB_ATOL, max_terms: int = 1_000_000) -> float:
    """``(1/(theta t)) ln sum_n M_L(theta)^n p_N(n, t)`` by truncated summation."""
    if not theta > 0:
        raise DomainError("theta must be positive")
    lm = log_mgf_l(theta)
    total, mass, n = -math.inf, 0.0, 0
    chunk = 256
    while n < max_terms:
        ns = np.arange(n, n + chunk)
        lp = np.asarray(count.log_pmf(ns, t), dtype=float)
        terms = ns * lm + lp
        total = float(np.logaddexp(total, logsumexp(terms)))
        mass += float(np.exp(lp).sum())
        n += chunk
        if mass > 1.0 - tail and terms[-1] < total + math.log(1e-17) and terms[-1] < terms[-2]:
            return total / (theta * t)
    raise DomainError("variable-rate MGF sum does not converge at this theta")


def poisson_cgf(rate: float, log_mgf_l: Callable[[float], float]) -> Callable[[float], float]:
    """Per-slot log-MGF ``rate (M_L(theta) - 1)`` of a Poisson-modulated source."""

    def cgf(theta: float) -> float:
        lm = log_mgf_l(theta)
        if lm > 700:
            return math.inf
        return rate * math.expm1(lm)

    return cgf


def poisson_eb(rate: float, probs, lengths, label: str = "") -> ConstantEB:
    p = _as_probs(probs)
    l = np.asarray(lengths, dtype=float)
    return ConstantEB(poisson_cgf(rate, categorical_cgf(p, l)), mean_rate=rate * float(p @ l),
                      label=label or f"poisson(rate={rate})")
