"""Service models: constant-rate servers and Gilbert-Elliott channels.

A Gilbert-Elliott channel of peak rate ``R`` is described by an impairment
process that consumes ``R`` bits in bad slots and nothing in good slots, so
that the service curve is ``S(t) = R t - E_I(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import (BELOW_MEAN, EffectiveBandwidth, LegendreCurve, TradeoffPoint,
                       _check_eps, _minimize_theta, _service_numerator, legendre_service)
from .optimize import N_GRID, RTOL
from .sources import MarkovSource, _as_stochastic, check_irreducible, stationary

GOOD, BAD = 0, 1


class _ZeroEB(EffectiveBandwidth):
    """Impairment of a channel that never leaves the good state."""

    mean_rate = 0.0
    peak_rate = 0.0

    def __repr__(self):
        return "ZeroEB()"

    def log_mgf(self, theta, t):
        return 0.0

    def rate(self, theta):
        return 0.0

    def burst(self, theta, rate):
        return 0.0 if rate >= 0 else math.inf


class _FullEB(_ZeroEB):
    """Impairment of a channel that is always bad: consumes the peak rate."""

    def __init__(self, peak: float):
        self.mean_rate = self.peak_rate = peak

    def __repr__(self):
        return f"FullEB({self.peak_rate})"

    def log_mgf(self, theta, t):
        return theta * self.peak_rate * t

    def rate(self, theta):
        return self.peak_rate

    def burst(self, theta, rate):
        return 0.0 if rate >= self.peak_rate else math.inf


@dataclass(frozen=True)
class GilbertElliott:
    """Two-state channel: state 0 (good) serves ``R`` bits, state 1 (bad) nothing.

    States that cannot be reached from stationarity (e.g. the bad state of a
    channel with ``q_GB = 0``) are pruned before the impairment chain is built.
    """

    R: float
    Q: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("peak rate R must be positive")
        q = _as_stochastic(self.Q)
        if q.shape != (2, 2):
            raise ValueError("Gilbert-Elliott channels have exactly two states")
        object.__setattr__(self, "Q", q)

    @property
    def recurrent_states(self) -> tuple[int, ...]:
        q = self.Q
        if q[GOOD, BAD] == 0 and q[BAD, GOOD] == 0:
            raise ValueError("both states are absorbing; the channel state is undetermined")
        if q[GOOD, BAD] == 0:
            return (GOOD,)
        if q[BAD, GOOD] == 0:
            return (BAD,)
        return (GOOD, BAD)

    @property
    def P(self) -> np.ndarray:
        states = self.recurrent_states
        p = np.zeros(2)
        if len(states) == 1:
            p[states[0]] = 1.0
        else:
            p[:] = stationary(self.Q)
        return p

    @property
    def mean_rate(self) -> float:
        """Long-run service rate ``R P_good``."""
        return float(self.R * self.P[GOOD])

    @property
    def dwell_means(self) -> tuple[float, float]:
        q = self.Q
        return tuple(1.0 / q[i, 1 - i] if q[i, 1 - i] > 0 else math.inf for i in (GOOD, BAD))

    def impairment(self) -> EffectiveBandwidth:
        eb = self._cache.get("imp")
        if eb is not None:
            return eb
        states = self.recurrent_states
        if states == (GOOD,):
            eb = _ZeroEB()
        elif states == (BAD,):
            eb = _FullEB(self.R)
        else:
            check_irreducible(self.Q)
            eb = MarkovSource(self.Q, np.array([0.0, self.R])).effective_bandwidth()
        self._cache["imp"] = eb
        return eb

    def service_curve(self) -> LegendreCurve:
        return LegendreCurve(self.impairment(), "service", peak=self.R)


def ge_legendre(ch: GilbertElliott, theta: float, delta: float, c: float) -> float:
    """``L_S(c) = sup_t {(c + alpha_I(theta,t) + delta - R) t} - ln(theta delta)/theta``."""
    return legendre_service(ch.impairment(), ch.R, theta, delta, c)


def ge_delay(ch: GilbertElliott, c: float, epsilon: float, *, n_grid: int = N_GRID,
             rtol: float = RTOL) -> TradeoffPoint:
    """Delay bound of constant-rate-``c`` arrivals through the channel.

    ``d = inf_theta {L_S(c) - ln(epsilon)/theta} / c`` with slack
    ``delta = min(R - c - lim_t alpha_I(theta,t), 1/theta)``.
    """
    _check_eps(epsilon)
    if not c > 0:
        raise ValueError("capacity must be positive")
    if not c < ch.mean_rate:
        return TradeoffPoint(c, math.inf, epsilon, note=BELOW_MEAN)
    imp = ch.impairment()
    f = _service_numerator(imp, ch.R, c, epsilon)
    res = _minimize_theta(f, imp, n_grid, rtol)
    if not res.success or not math.isfinite(res.fun):
        return TradeoffPoint(c, math.inf, epsilon, note="no finite bound")
    th = res.x
    delta = min(ch.R - c - imp.rate(th), 1.0 / th)
    return TradeoffPoint(c, max(res.fun, 0.0) / c, epsilon, theta=th, delta=delta)
