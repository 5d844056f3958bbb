"""Simulation checks of analytical bounds (one-sided dominance)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calculus import LegendreCurve, TradeoffPoint, compose_delay, delay_bound
from .channels import GilbertElliott, ge_delay
from .scenario import ArrivalModel, Scenario, Table
from .sim import (RngStream, constant_service, encode_stream, export_csv, fcfs_delays,
                  ge_service, sample_modulated, sample_symbols, violation_rate)

STREAM_ARRIVALS = 0
STREAM_SERVICE = 1


def simulate_arrivals(am: ArrivalModel, n: int, rng: RngStream) -> np.ndarray:
    """``n`` slots of encoded bits from the arrival model."""
    if am.poisson is not None:
        return sample_modulated(am.poisson, am.book, n, rng)
    if am.base_period > 1:  # base symbols grouped into blocks by the coder
        n_sym = -(-n // am.base_period) * am.base_period
    else:  # a state of a periodic chain covers `period` slots
        n_sym = -(-n // getattr(am.coder, "period", 1))
    inc = encode_stream(sample_symbols(am.sampler, n_sym, rng), am.coder)
    if inc.size < n:
        raise RuntimeError("encoder produced fewer slots than requested")
    return inc[:n]


def simulate_service(channel, n: int, rng: RngStream) -> np.ndarray:
    kind, ch = channel
    if kind == "constant":
        return constant_service(ch, n)
    return ge_service(ch, n, rng)


def analytic_bound(am: ArrivalModel | None, channel, epsilon: float, *,
                   c: float | None = None, **kw) -> TradeoffPoint:
    """Delay bound of the simulated system at total error ``epsilon``.

    * constant-rate server: the arrival bound at its capacity;
    * Gilbert-Elliott channel with a source: composition with ``epsilon/2`` each;
    * Gilbert-Elliott channel with constant-rate arrivals (``am is None``,
      rate ``c``): the channel bound.
    """
    kind, ch = channel
    if kind == "constant":
        return delay_bound(am.eb, ch, epsilon, **kw)
    if am is None:
        return ge_delay(ch, c, epsilon, **kw)
    return compose_delay(am.curve, ch.service_curve(), epsilon / 2, epsilon / 2, **kw)


@dataclass
class DominanceResult:
    label: str
    epsilon: float
    d: float
    violation: float
    se: float
    samples: int

    @property
    def ok(self) -> bool:
        return self.violation <= self.epsilon + 3.0 * self.se

    def line(self) -> str:
        return (f"{self.label}: eps={self.epsilon:g} d={self.d:.4g} "
                f"P[W>d]={self.violation:.3g} (se {self.se:.2g}, n={self.samples})")


def check_dominance(label: str, arrivals: np.ndarray, service: np.ndarray,
                    points: list[TradeoffPoint]) -> list[DominanceResult]:
    tr = fcfs_delays(arrivals, service)
    w = tr.samples
    out = []
    for pt in points:
        f, se = violation_rate(w, pt.d)
        out.append(DominanceResult(label, pt.epsilon, pt.d, f, se, w.size))
    return out


def simulate_scenario(sc: Scenario, opt, trace_dir: Path | None = None) -> list[Table]:
    a = sc.analysis
    seed = a["seed"] if opt.seed is None else opt.seed
    am = sc.arrivals
    points = [analytic_bound(am, sc.channel, e, **opt.kw) for e in a["epsilon"]]
    t = Table("simulate", ["replication", "epsilon", "d", "violation", "se", "samples", "dominated"],
              meta={"source": am.label, "channel": sc.channel[0], "slots": a["slots"],
                    "seed": seed, "warmup_fraction": 0.01})
    for i, pt in enumerate(points):
        t.meta[f"theta[eps={pt.epsilon:g}]"] = pt.theta
        if not math.isnan(pt.theta_s):
            t.meta[f"theta_S[eps={pt.epsilon:g}]"] = pt.theta_s
            t.meta[f"c[eps={pt.epsilon:g}]"] = pt.c
    for r in range(a["replications"]):
        arr = simulate_arrivals(am, a["slots"], RngStream(seed, 2 * r + STREAM_ARRIVALS))
        srv = simulate_service(sc.channel, a["slots"], RngStream(seed, 2 * r + STREAM_SERVICE))
        tr = fcfs_delays(arr, srv)
        if r == 0 and a.get("trace") and trace_dir is not None:
            export_csv(tr, Path(trace_dir) / "trace.csv")
        for pt in points:
            f, se = violation_rate(tr.samples, pt.d)
            t.add(r, pt.epsilon, pt.d, f, se, int(tr.samples.size),
                  "yes" if f <= pt.epsilon + 3 * se else "no")
    return [t]
