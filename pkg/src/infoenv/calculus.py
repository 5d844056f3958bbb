"""Statistical envelopes, Legendre transforms and capacity-delay-error bounds.

Units: information and capacities in bits, time in integer slots, and the
free parameter ``theta`` in nats per bit, so that ``exp(theta * A)`` is the
moment generating function of ``A`` bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ParameterError
from .optimize import N_GRID, RTOL, optimize_scalar, theta_bounds

_TOL = 1e-12

BELOW_MEAN = "capacity below average codeword length"


@dataclass(frozen=True)
class TradeoffPoint:
    """Operating point: with capacity ``c`` the delay exceeds ``d`` w.p. <= ``epsilon``.

    ``latency`` is an additional deterministic delay (e.g. symbol grouping at
    the encoder) that is *not* included in ``d``.
    """

    c: float
    d: float
    epsilon: float
    theta: float = math.nan
    delta: float = math.nan
    latency: float = 0.0
    theta_s: float = math.nan
    note: str = ""

    @property
    def finite(self) -> bool:
        return math.isfinite(self.d)

    @property
    def total_delay(self) -> float:
        return self.d + self.latency


@dataclass(frozen=True)
class EnvelopeParams:
    theta: float
    delta: float

    def __post_init__(self):
        check_delta(self.theta, self.delta)

    @property
    def kappa(self) -> float:
        return self.theta * self.delta


def check_delta(theta: float, delta: float) -> None:
    if not theta > 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if not (0.0 < delta <= (1.0 + _TOL) / theta):
        raise ParameterError(f"delta={delta} outside (0, 1/theta={1.0 / theta}]")


def _approx_ge(a: float, b: float) -> bool:
    return a >= b - _TOL * max(1.0, abs(b))


class EffectiveBandwidth:
    """Effective bandwidth ``alpha(theta, t) = ln E[exp(theta A(t))] / (theta t)``.

    Subclasses implement :meth:`log_mgf`, :meth:`rate` (the ``t -> inf``
    limit) and :meth:`burst`.  ``time_class`` is one of ``"constant"``,
    ``"periodic"`` or ``"monotone"``.
    """

    time_class = "constant"
    period = 1
    theta_max = math.inf
    mean_rate = math.nan
    peak_rate = math.inf

    def log_mgf(self, theta: float, t: int) -> float:
        raise NotImplementedError

    def log_mgf_path(self, theta: float, horizon: int) -> np.ndarray:
        """``ln M_A(theta, t)`` for ``t = 1..horizon``."""
        return np.array([self.log_mgf(theta, t) for t in range(1, horizon + 1)])

    def __call__(self, theta: float, t: int = 1) -> float:
        return self.log_mgf(theta, t) / (theta * t)

    def rate(self, theta: float) -> float:
        raise NotImplementedError

    def burst(self, theta: float, rate: float) -> float:
        """``sup_{t >= 0} (t * alpha(theta, t) - rate * t)`` in bits."""
        raise NotImplementedError

    def check_theta(self, theta: float) -> None:
        if not (0.0 < theta < self.theta_max):
            raise DomainError(f"theta={theta} outside (0, {self.theta_max})")


class ConstantEB(EffectiveBandwidth):
    """Time-independent effective bandwidth from a per-slot log-MGF ``cgf(theta)``."""

    time_class = "constant"

    def __init__(self, cgf: Callable[[float], float], *, theta_max: float = math.inf,
                 mean_rate: float = math.nan, peak_rate: float = math.inf, label: str = ""):
        self.cgf = cgf
        self.theta_max = theta_max
        self.mean_rate = mean_rate
        self.peak_rate = peak_rate
        self.label = label

    def __repr__(self):
        return f"ConstantEB({self.label or self.cgf!r}, mean={self.mean_rate:.6g})"

    def log_mgf(self, theta, t):
        return t * self.cgf(theta)

    def log_mgf_path(self, theta, horizon):
        return self.cgf(theta) * np.arange(1, horizon + 1, dtype=float)

    def rate(self, theta):
        return self.cgf(theta) / theta

    def burst(self, theta, rate):
        return 0.0 if _approx_ge(rate, self.rate(theta)) else math.inf


class PeriodicEB(EffectiveBandwidth):
    """A burst of i.i.d. size emitted at the first slot of every period of ``s`` slots.

    ``cgf(theta)`` is the log-MGF of one burst, so that
    ``t * alpha(theta, t) = ceil(t / s) * cgf(theta) / theta``.
    """

    time_class = "periodic"

    def __init__(self, cgf: Callable[[float], float], period: int, *,
                 theta_max: float = math.inf, mean_rate: float = math.nan,
                 peak_rate: float = math.inf, label: str = ""):
        if period < 1:
            raise ValueError("period must be >= 1")
        self.cgf = cgf
        self.period = int(period)
        self.theta_max = theta_max
        self.mean_rate = mean_rate
        self.peak_rate = peak_rate
        self.label = label

    def __repr__(self):
        return f"PeriodicEB({self.label or self.cgf!r}, s={self.period})"

    def log_mgf(self, theta, t):
        return math.ceil(t / self.period) * self.cgf(theta)

    def rate(self, theta):
        return self.cgf(theta) / (theta * self.period)

    def burst(self, theta, rate):
        a = self.cgf(theta) / theta
        if not _approx_ge(rate * self.period, a):
            return math.inf
        # the supremum sits at t = 1 (one full burst) or at t = 0
        return max(0.0, a - rate)


def as_theta_search(alpha: EffectiveBandwidth) -> tuple[float, float]:
    return theta_bounds(alpha.theta_max)


# --------------------------------------------------------------------------
# Envelopes
# --------------------------------------------------------------------------

def information_envelope(alpha: EffectiveBandwidth, kappa: float, horizon: int, *,
                         n_grid: int = N_GRID, rtol: float = RTOL) -> list[tuple[int, float]]:
    """Pointwise minimized envelope ``F(t) = inf_theta {t alpha(theta, t) - ln(kappa)/theta}``.

    ``F(t)`` is exceeded by ``A(t)`` with probability at most ``kappa`` for the
    given ``t``.  Returns ``[(t, F(t)) for t in 1..horizon]``.
    """
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    lo, hi = as_theta_search(alpha)
    grid = np.geomspace(lo, hi, n_grid)
    lk = math.log(kappa)
    table = np.full((n_grid, horizon), math.inf)
    for i, th in enumerate(grid):
        try:
            path = alpha.log_mgf_path(float(th), horizon)
        except (DomainError, OverflowError, FloatingPointError):
            continue
        table[i] = (path - lk) / th
    table[~np.isfinite(table)] = math.inf

    out = []
    for t in range(1, horizon + 1):
        col = table[:, t - 1]
        if not np.any(np.isfinite(col)):
            out.append((t, math.inf))
            continue

        def f(th, t=t):
            return (alpha.log_mgf(th, t) - lk) / th

        i = int(np.argmin(col))
        best = float(col[i])
        if i == n_grid - 1 and not math.isfinite(alpha.theta_max):
            res = optimize_scalar(f, float(grid[-2]), float(grid[-1]), n_grid=2,
                                  rtol=rtol, probe_upper=True)
        else:
            a = float(grid[max(i - 1, 0)])
            b = float(grid[min(i + 1, n_grid - 1)])
            res = optimize_scalar(f, a, b, n_grid=3, rtol=rtol)
        out.append((t, min(best, res.fun)))
    return out


def legendre_arrival(alpha: EffectiveBandwidth, theta: float, delta: float, c: float) -> float:
    """``sup_t {(alpha(theta,t) + delta - c) t} - ln(theta delta)/theta``; ``inf`` if it diverges."""
    alpha.check_theta(theta)
    check_delta(theta, delta)
    if c < 0:
        raise ValueError("capacity must be non-negative")
    return alpha.burst(theta, c - delta) - math.log(theta * delta) / theta


def legendre_service(impairment: EffectiveBandwidth, peak: float, theta: float,
                     delta: float, c: float) -> float:
    """Convex transform of ``S(t) = peak t - E_I(t)`` for an impairment envelope ``E_I``."""
    impairment.check_theta(theta)
    check_delta(theta, delta)
    if c < 0:
        raise ValueError("capacity must be non-negative")
    return impairment.burst(theta, peak - c - delta) - math.log(theta * delta) / theta


def _arrival_numerator(alpha: EffectiveBandwidth, c: float, epsilon: float):
    """theta -> L_E(c) + sigma_E(epsilon) with delta = min(c - rate, 1/theta)."""
    le = math.log(epsilon)

    def f(theta: float) -> float:
        slack = c - alpha.rate(theta)
        if not slack > 0:
            return math.inf
        delta = min(slack, 1.0 / theta)
        b = alpha.burst(theta, c - delta)
        if not math.isfinite(b):
            return math.inf
        return b - (math.log(theta * delta) + le) / theta

    return f


def _service_numerator(impairment: EffectiveBandwidth, peak: float, c: float, epsilon: float):
    le = math.log(epsilon)

    def f(theta: float) -> float:
        slack = peak - c - impairment.rate(theta)
        if not slack > 0:
            return math.inf
        delta = min(slack, 1.0 / theta)
        b = impairment.burst(theta, peak - c - delta)
        if not math.isfinite(b):
            return math.inf
        return b - (math.log(theta * delta) + le) / theta

    return f


def _check_eps(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def _minimize_theta(f, alpha: EffectiveBandwidth, n_grid: int, rtol: float):
    lo, hi = as_theta_search(alpha)
    return optimize_scalar(f, lo, hi, n_grid=n_grid, rtol=rtol, probe_upper=True,
                           probe_max=alpha.theta_max)


def delay_bound(alpha: EffectiveBandwidth, c: float, epsilon: float, *,
                n_grid: int = N_GRID, rtol: float = RTOL) -> TradeoffPoint:
    """Minimal delay bound at a constant-rate server of capacity ``c``.

    ``d = inf_theta {L_E(c) - ln(epsilon)/theta} / c`` where ``L_E`` uses the
    slack ``delta = min(c - lim_t alpha(theta, t), 1/theta)``.
    """
    _check_eps(epsilon)
    if not c > 0:
        raise ValueError("capacity must be positive")
    if math.isfinite(alpha.mean_rate) and not c > alpha.mean_rate * (1 + _TOL):
        return TradeoffPoint(c, math.inf, epsilon, note=BELOW_MEAN)
    f = _arrival_numerator(alpha, c, epsilon)
    res = _minimize_theta(f, alpha, n_grid, rtol)
    if not res.success or not math.isfinite(res.fun):
        return TradeoffPoint(c, math.inf, epsilon, note=BELOW_MEAN)
    th = res.x
    delta = min(c - alpha.rate(th), 1.0 / th)
    return TradeoffPoint(c, max(res.fun, 0.0) / c, epsilon, theta=th, delta=delta)


def delay_bound_memoryless(alpha: EffectiveBandwidth, c: float, epsilon: float,
                           **kw) -> TradeoffPoint:
    """Delay bound for a time-independent effective bandwidth."""
    if alpha.time_class != "constant":
        raise ValueError("delay_bound_memoryless needs a constant-in-t effective bandwidth")
    return delay_bound(alpha, c, epsilon, **kw)


def delay_bound_sup(alpha: EffectiveBandwidth, c: float, epsilon: float, **kw) -> TradeoffPoint:
    """Delay bound with the slack taken against ``sup_t alpha(theta, t)``.

    For Markov sources the supremum is the spectral limit ``alpha.rate``;
    any residual transient above it enters through ``alpha.burst``.
    """
    return delay_bound(alpha, c, epsilon, **kw)


def backlog_bound(alpha: EffectiveBandwidth, c: float, epsilon: float, *,
                  n_grid: int = N_GRID, rtol: float = RTOL) -> float:
    """``b = inf_theta {L_E(c) - ln(epsilon)/theta}`` in bits."""
    _check_eps(epsilon)
    if not c > 0:
        raise ValueError("capacity must be positive")
    if math.isfinite(alpha.mean_rate) and not c > alpha.mean_rate * (1 + _TOL):
        return math.inf
    res = _minimize_theta(_arrival_numerator(alpha, c, epsilon), alpha, n_grid, rtol)
    return max(res.fun, 0.0) if res.success else math.inf


# --------------------------------------------------------------------------
# Composition of sources and systems
# --------------------------------------------------------------------------

class LegendreCurve:
    """Legendre-transform model of a source (``kind="arrival"``) or a system.

    ``kind="service"`` wraps an impairment process on a link of peak rate
    ``peak``; ``kind="zero"`` is the deterministic constant-rate server whose
    transform vanishes with a zero deficit profile.
    """

    def __init__(self, alpha: EffectiveBandwidth | None, kind: str = "arrival",
                 peak: float = math.nan):
        if kind not in ("arrival", "service", "zero"):
            raise ValueError(f"unknown curve kind {kind!r}")
        if kind != "zero" and alpha is None:
            raise ValueError("an effective bandwidth is required")
        if kind == "service" and not peak > 0:
            raise ValueError("a service curve needs a positive peak rate")
        self.alpha = alpha
        self.kind = kind
        self.peak = peak

    @classmethod
    def constant_rate(cls) -> "LegendreCurve":
        return cls(None, "zero")

    def __repr__(self):
        return f"LegendreCurve({self.kind}, {self.alpha!r})"

    def transform(self, c: float, theta: float, delta: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "arrival":
            return legendre_arrival(self.alpha, theta, delta, c)
        return legendre_service(self.alpha, self.peak, theta, delta, c)

    def c_interval(self) -> tuple[float, float]:
        if self.kind == "zero":
            return 0.0, math.inf
        if self.kind == "arrival":
            return self.alpha.mean_rate, math.inf
        return 0.0, self.peak - self.alpha.mean_rate

    def bound(self, c: float, epsilon: float, *, n_grid: int = N_GRID,
              rtol: float = RTOL) -> tuple[float, float]:
        """``inf_theta {transform(c) - ln(epsilon)/theta}`` and its minimizer."""
        if self.kind == "zero":
            return 0.0, math.inf
        lo, hi = self.c_interval()
        if not lo < c < hi:
            return math.inf, math.nan
        if self.kind == "arrival":
            f = _arrival_numerator(self.alpha, c, epsilon)
        else:
            f = _service_numerator(self.alpha, self.peak, c, epsilon)
        res = _minimize_theta(f, self.alpha, n_grid, rtol)
        if not res.success:
            return math.inf, math.nan
        return max(res.fun, 0.0), res.x


def compose_delay(le: LegendreCurve, ls: LegendreCurve, epsilon_e: float,
                  epsilon_s: float, *, c: float | None = None, n_grid_c: int = 60,
                  n_grid: int = N_GRID, rtol: float = RTOL) -> TradeoffPoint:
    """Delay bound of a source composed with a system by adding their transforms.

    ``d = inf_c (L_E(c) + L_S(c) + sigma_E + sigma_S) / c`` with total error
    ``epsilon_e + epsilon_s``.  With ``c`` given the outer minimization is
    skipped (needed when the system is a constant-rate server of capacity c).
    """
    _check_eps(epsilon_e)
    if ls.kind == "zero":
        epsilon_s = 0.0
    else:
        _check_eps(epsilon_s)
    total = epsilon_e + epsilon_s

    def parts(cc: float):
        ve, te = le.bound(cc, epsilon_e, n_grid=n_grid, rtol=rtol)
        if not math.isfinite(ve):
            return math.inf, te, math.nan
        vs, ts = ls.bound(cc, epsilon_s, n_grid=n_grid, rtol=rtol)
        return (ve + vs) / cc, te, ts

    if c is not None:
        d, te, ts = parts(c)
        return TradeoffPoint(c, d, total, theta=te, theta_s=ts,
                             note="" if math.isfinite(d) else "no finite bound")

    lo_e, hi_e = le.c_interval()
    lo_s, hi_s = ls.c_interval()
    lo, hi = max(lo_e, lo_s), min(hi_e, hi_s)
    if not math.isfinite(hi):
        raise ValueError("minimizing over c needs a system with a finite rate")
    if not lo < hi:
        return TradeoffPoint(math.nan, math.inf, total, note="no stabilizing capacity")
    lo = max(lo, 1e-9) * (1 + 1e-9)
    hi = hi * (1 - 1e-9)
    res = optimize_scalar(lambda cc: parts(cc)[0], lo, hi, n_grid=n_grid_c, rtol=rtol)
    if not res.success:
        return TradeoffPoint(math.nan, math.inf, total, note="no stabilizing capacity")
    d, te, ts = parts(res.x)
    return TradeoffPoint(res.x, d, total, theta=te, theta_s=ts)
