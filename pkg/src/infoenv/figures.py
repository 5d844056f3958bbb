"""Canned reproductions and scenario analyses, each returning :class:`Table` objects."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .calculus import (LegendreCurve, TradeoffPoint, compose_delay, delay_bound,
                       information_envelope)
from .channels import GilbertElliott, ge_delay
from .coders import grouped_code, huffman, lz_delay, lz_model, shannon_code
from .optimize import N_GRID, RTOL
from .scenario import ArrivalModel, Scenario, Table
from .sources import (categorical_eb, entropy, entropy_rate_markov, extend_conditional,
                      geometric_entropy, geometric_ideal_eb, poisson_eb)

FIVE_SYMBOLS = (3 / 8, 2 / 8, 1 / 8, 1 / 8, 1 / 8)
LZ_SOURCE = (1 / 2048,) * 240 + (113 / 2048,) * 16
MARKOV_T = {"4.3": ((5 / 8, 3 / 8), (5 / 8, 3 / 8)),
            "8": ((4 / 5, 1 / 5), (1 / 3, 2 / 3)),
            "16": ((9 / 10, 1 / 10), (1 / 6, 5 / 6))}
TABLE2_Q = MARKOV_T["16"]
FIG12_CHANNEL = (6.0, ((7 / 8, 1 / 8), (1 / 4, 3 / 4)))
DYADIC8 = tuple(2.0 ** -i for i in range(1, 8)) + (2.0 ** -7,)


class Options:
    """Numerical settings shared by every analysis."""

    def __init__(self, rtol: float = RTOL, n_grid: int = N_GRID, seed: int | None = None):
        if not 0 < rtol < 1:
            raise ValueError("tolerance must lie in (0, 1)")
        self.rtol = rtol
        self.n_grid = n_grid
        self.seed = seed

    @property
    def kw(self) -> dict:
        return {"rtol": self.rtol, "n_grid": self.n_grid}


def _tag(x: float) -> str:
    return f"{x:g}"


def _curves(name: str, cs, curves: dict[str, Callable[[float], TradeoffPoint]],
            meta: dict, with_theta: bool = False) -> Table:
    cols = ["c"]
    for k in curves:
        cols.append(f"d_{k}")
        if with_theta:
            cols += [f"theta_{k}", f"delta_{k}"]
    t = Table(name, cols, meta=dict(meta))
    for c in cs:
        row = [float(c)]
        for f in curves.values():
            pt = f(float(c))
            row.append(pt.d)
            if with_theta:
                row += [pt.theta, pt.delta]
        t.add(*row)
    return t


# --------------------------------------------------------------------------
# Figures and tables
# --------------------------------------------------------------------------

def fig2(opt: Options, horizon: int = 100, kappa: float = 1e-6) -> list[Table]:
    ps = (0.25, 0.5, 0.75)
    t = Table("fig2", ["t"] + [f"F_over_H_p{_tag(p)}" for p in ps] + [f"F_over_tH_p{_tag(p)}" for p in ps],
              meta={"kappa": kappa, "horizon": horizon,
                    **{f"H_p{_tag(p)}": geometric_entropy(p) for p in ps}})
    env = {p: information_envelope(geometric_ideal_eb(p), kappa, horizon, **opt.kw) for p in ps}
    for i in range(horizon):
        tt = i + 1
        a = [env[p][i][1] / geometric_entropy(p) for p in ps]
        t.add(tt, *a, *[x / tt for x in a])
    return [t]


def fig3(opt: Options, cs=None) -> list[Table]:
    cs = np.linspace(2.05, 7.0, 100) if cs is None else cs
    eb = geometric_ideal_eb(0.5)
    eps = (1e-3, 1e-6, 1e-9)
    curves = {f"eps{_tag(e)}": (lambda c, e=e: delay_bound(eb, c, e, **opt.kw)) for e in eps}
    return [_curves("fig3", cs, curves, {"source": "geometric p=0.5, Huffman (l_i = i+1)",
                                         "mean_length": 2.0}, with_theta=True)]


def fig4(opt: Options, cs=None, epsilon: float = 1e-6) -> list[Table]:
    cs = np.linspace(2.26, 5.0, 100) if cs is None else cs
    h, s = huffman(FIVE_SYMBOLS), shannon_code(FIVE_SYMBOLS)
    ebs = {"huffman": categorical_eb(h.probs, h.lengths),
           "shannon": categorical_eb(s.probs, s.lengths)}
    curves = {k: (lambda c, eb=eb: delay_bound(eb, c, epsilon, **opt.kw)) for k, eb in ebs.items()}
    meta = {"epsilon": epsilon, "huffman_lengths": str(h.lengths.astype(int).tolist()),
            "shannon_lengths": str(s.lengths.astype(int).tolist()),
            "huffman_mean": h.mean_length, "shannon_mean": s.mean_length}
    return [_curves("fig4", cs, curves, meta, with_theta=True)]


def fig5(opt: Options, cs=None, epsilon: float = 1e-6) -> list[Table]:
    cs = np.linspace(5.05, 10.0, 60) if cs is None else cs
    h = huffman(LZ_SOURCE)
    heb = categorical_eb(h.probs, h.lengths)
    models = {s: lz_model(LZ_SOURCE, s) for s in range(1, 9)}
    cols = ["c", "d_huffman"] + [x for s in models for x in (f"d_lz_s{s}", f"total_lz_s{s}")]
    t = Table("fig5", cols, meta={"epsilon": epsilon, "entropy": entropy(LZ_SOURCE),
                                  "huffman_mean": h.mean_length,
                                  "note": "total = bound d + grouping latency s-1"})
    for c in cs:
        row = [float(c), delay_bound(heb, float(c), epsilon, **opt.kw).d]
        for m in models.values():
            pt = lz_delay(m, float(c), epsilon, **opt.kw)
            row += [pt.d, pt.total_delay]
        t.add(*row)
    return [t]


def fig6(opt: Options, cs=None, epsilon: float = 1e-6, rate: float = 1.0) -> list[Table]:
    cs = np.linspace(2.05, 10.0, 80) if cs is None else cs
    h = huffman(DYADIC8)
    H = entropy(DYADIC8)
    ebs = {
        "huffman_poisson": poisson_eb(rate, h.probs, h.lengths),
        "uncoded_poisson": poisson_eb(rate, [1.0], [3.0]),
        "entropy_poisson": poisson_eb(rate, [1.0], [H]),
        "huffman_constant": categorical_eb(h.probs, h.lengths),
    }
    curves = {k: (lambda c, eb=eb: delay_bound(eb, c, epsilon, **opt.kw)) for k, eb in ebs.items()}
    return [_curves("fig6", cs, curves, {"epsilon": epsilon, "symbol_rate": rate, "entropy": H})]


def fig9(opt: Options, horizon: int = 100, kappa: float = 1e-6) -> list[Table]:
    env = {}
    for k, q in MARKOV_T.items():
        eb = extend_conditional(q).effective_bandwidth()
        env[k] = [f for _, f in information_envelope(eb, kappa, horizon, **opt.kw)]
    cols = ["t"] + [f"dF_T{k}" for k in env] + [f"F_T{k}" for k in env]
    t = Table("fig9", cols, meta={"kappa": kappa,
                                  **{f"H_T{k}": entropy_rate_markov(q) for k, q in MARKOV_T.items()}})
    for i in range(horizon):
        inc = [v[i] - (v[i - 1] if i else 0.0) for v in env.values()]
        t.add(i + 1, *inc, *[v[i] for v in env.values()])
    return [t]


def fig11(opt: Options, cs=None, epsilon: float = 1e-6) -> list[Table]:
    cs = np.linspace(0.6, 1.6, 51) if cs is None else cs
    codes = {s: grouped_code(TABLE2_Q, s) for s in range(1, 9)}
    cols = ["c"] + [x for s in codes for x in (f"d_s{s}", f"total_s{s}")]
    t = Table("fig11", cols, meta={"epsilon": epsilon,
                                   "entropy_rate": entropy_rate_markov(TABLE2_Q),
                                   "note": "total = bound d + grouping latency s-1"})
    ebs = {s: g.source.effective_bandwidth() for s, g in codes.items()}
    for c in cs:
        row = [float(c)]
        for s, eb in ebs.items():
            d = delay_bound(eb, float(c), epsilon, **opt.kw).d
            row += [d, d + (s - 1)]
        t.add(*row)
    return [t]


def fig12(opt: Options, cs=None, epsilon_e: float = 1e-6, epsilon_s: float = 1e-6) -> list[Table]:
    cs = np.linspace(2.05, 3.95, 39) if cs is None else cs
    R, q = FIG12_CHANNEL
    ch = GilbertElliott(R, q)
    eb = geometric_ideal_eb(0.5)
    le = LegendreCurve(eb)
    t = Table("fig12", ["c", "d_source", "d_channel", "d_sum"],
              meta={"epsilon_E": epsilon_e, "epsilon_S": epsilon_s, "R": R,
                    "channel_P": str(ch.P.tolist()), "channel_mean_rate": ch.mean_rate,
                    "source_mean_rate": eb.mean_rate})
    for c in cs:
        ds = delay_bound(eb, float(c), epsilon_e, **opt.kw).d
        dc = ge_delay(ch, float(c), epsilon_s, **opt.kw).d
        t.add(float(c), ds, dc, ds + dc)
    best = compose_delay(le, ch.service_curve(), epsilon_e, epsilon_s, **opt.kw)
    t.meta.update({"min_composite_delay": best.d, "argmin_c": best.c,
                   "theta_E": best.theta, "theta_S": best.theta_s, "total_epsilon": best.epsilon})
    return [t]


def table1(opt: Options) -> list[Table]:
    t = Table("table1", ["s", "w", "log2_w_plus_2", "p_hit", "l_over_s"],
              meta={"entropy": entropy(LZ_SOURCE), "pointer_limit": "8s bits",
                    "miss_cost": "8s + 1 bits"})
    for s in range(1, 9):
        m = lz_model(LZ_SOURCE, s)
        t.add(s, m.w, math.log2(m.w + 2), m.p_hit, m.normalized_length)
    return [t]


def table2(opt: Options) -> list[Table]:
    t = Table("table2", ["s", "H_over_s", "l_over_s", "states"],
              meta={"Q": str([list(r) for r in TABLE2_Q]),
                    "entropy_rate": entropy_rate_markov(TABLE2_Q)})
    for s in range(1, 9):
        g = grouped_code(TABLE2_Q, s)
        t.add(s, g.normalized_entropy, g.normalized_length, g.source.m)
    return [t]


REPRODUCE = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6,
             "fig9": fig9, "fig11": fig11, "fig12": fig12, "table1": table1, "table2": table2}


# --------------------------------------------------------------------------
# Scenario analyses
# --------------------------------------------------------------------------

def _arrival_delay(am: ArrivalModel, c: float, eps: float, opt: Options) -> TradeoffPoint:
    pt = delay_bound(am.eb, c, eps, **opt.kw)
    return TradeoffPoint(pt.c, pt.d, pt.epsilon, pt.theta, pt.delta, latency=am.latency,
                         note=pt.note)


def analyze(sc: Scenario, opt: Options, out_dir=None) -> list[Table]:
    a = sc.analysis
    am = sc.arrivals
    base = {"source": am.label, "mean_rate": am.mean_rate, "latency": am.latency}
    if a["kind"] == "envelope":
        env = information_envelope(am.eb, a["kappa"], a["horizon"], **opt.kw)
        t = Table("envelope", ["t", "F", "F_over_t"], meta={**base, "kappa": a["kappa"]})
        for tt, f in env:
            t.add(tt, f, f / tt)
        return [t]
    if a["kind"] == "tradeoff":
        rows = Table("tradeoff", ["c", "epsilon", "d", "theta", "delta", "kappa", "latency",
                                  "note"], meta=base)
        ch = sc.channel
        for c in a["c"]:
            for e in a["epsilon"]:
                if ch is not None and ch[0] == "gilbert-elliott":
                    pt = ge_delay(ch[1], float(c), e, **opt.kw)
                else:
                    pt = _arrival_delay(am, float(c), e, opt)
                rows.add(float(c), e, pt.d, pt.theta, pt.delta, pt.theta * pt.delta,
                         pt.latency, pt.note or "-")
        return [rows]
    if a["kind"] == "compose":
        kind, ch = sc.channel
        t = Table("compose", ["c", "d", "theta_E", "theta_S", "epsilon", "note"],
                  meta={**base, "channel": kind, "epsilon_E": a["epsilon_E"],
                        "epsilon_S": a["epsilon_S"]})
        if kind == "constant":
            ls = LegendreCurve.constant_rate()
            pt = compose_delay(am.curve, ls, a["epsilon_E"], a["epsilon_S"], c=ch, **opt.kw)
            t.add(pt.c, pt.d, pt.theta, pt.theta_s, pt.epsilon, pt.note or "-")
            return [t]
        ls = ch.service_curve()
        if a["c"] is not None:
            for c in a["c"]:
                pt = compose_delay(am.curve, ls, a["epsilon_E"], a["epsilon_S"], c=float(c),
                                   **opt.kw)
                t.add(pt.c, pt.d, pt.theta, pt.theta_s, pt.epsilon, pt.note or "-")
        best = compose_delay(am.curve, ls, a["epsilon_E"], a["epsilon_S"], **opt.kw)
        t.meta.update({"min_composite_delay": best.d, "argmin_c": best.c})
        if a["c"] is None:
            t.add(best.c, best.d, best.theta, best.theta_s, best.epsilon, best.note or "min")
        return [t]
    from .validate import simulate_scenario
    return simulate_scenario(sc, opt, trace_dir=out_dir)
