"""Scenario documents: parsing, validation and model construction.

A scenario is a YAML or JSON mapping::

    version: 1
    source:   {kind: categorical, probs: [0.375, 0.25, 0.125, 0.125, 0.125]}
    coder:    {kind: huffman}
    channel:  {kind: constant, c: 3.0}
    analysis: {kind: tradeoff, c: {start: 2.3, stop: 5, num: 30}, epsilon: [1e-6]}
    output:   results/

Every field is checked before any computation; problems are reported as
:class:`ScenarioError` with the dotted path of the offending field.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .calculus import EffectiveBandwidth, LegendreCurve
from .channels import GilbertElliott
from .coders import (CodeBook, GroupedCode, LZModel, grouped_code, lz_model, make_code,
                     state_dependent_codes)
from .sources import (CategoricalSource, GeometricSource, MarkovSource, PoissonCount,
                      categorical_eb, extend_conditional, geometric_ideal_eb, poisson_eb)

SCHEMA_VERSION = 1
SOURCE_KINDS = ("categorical", "geometric", "markov", "poisson")
CODER_KINDS = ("huffman", "shannon", "sfe", "ideal", "lz", "state-dependent", "grouped", "none")
CHANNEL_KINDS = ("constant", "gilbert-elliott")
ANALYSIS_KINDS = ("envelope", "tradeoff", "compose", "simulate")


class ScenarioError(ValueError):
    """Invalid scenario; ``path`` names the offending field."""

    def __init__(self, path: str, msg: str):
        self.path = path
        super().__init__(f"{path}: {msg}")


# --------------------------------------------------------------------------
# Tables
# --------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


@dataclass
class Table:
    """Column-named rows plus the resolved parameters that produced them."""

    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError("row width does not match the header")
        self.rows.append(list(row))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def write_csv(self, directory) -> Path:
        path = Path(directory) / f"{self.name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_fmt(v) for v in r])
        return path

    def summary(self, max_rows: int = 12) -> str:
        lines = [f"== {self.name} =="]
        for k, v in self.meta.items():
            lines.append(f"  {k}: {_fmt(v) if not isinstance(v, str) else v}")
        lines.append("  " + ", ".join(self.columns))
        step = max(1, len(self.rows) // max_rows) if len(self.rows) > max_rows else 1
        for r in self.rows[::step]:
            lines.append("  " + ", ".join(_short(v) for v in r))
        return "\n".join(lines)


def _short(v) -> str:
    if isinstance(v, (float, np.floating)) and math.isfinite(v):
        return f"{float(v):.6g}"
    return _fmt(v)


# --------------------------------------------------------------------------
# Field accessors with path-aware errors
# --------------------------------------------------------------------------

def _get(d: dict, key: str, path: str, default=..., kind=None):
    if not isinstance(d, dict):
        raise ScenarioError(path, "expected a mapping")
    if key not in d:
        if default is ...:
            raise ScenarioError(f"{path}.{key}", "required field is missing")
        return default
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ScenarioError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return v


def _number(d, key, path, default=..., lo=None, hi=None, open_lo=False, open_hi=False):
    v = _get(d, key, path, default)
    if v is None:
        return v
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}.{key}", "expected a number")
    v = float(v)
    if lo is not None and (v < lo or (open_lo and v == lo)):
        raise ScenarioError(f"{path}.{key}", f"must be {'>' if open_lo else '>='} {lo}")
    if hi is not None and (v > hi or (open_hi and v == hi)):
        raise ScenarioError(f"{path}.{key}", f"must be {'<' if open_hi else '<='} {hi}")
    return v


def _integer(d, key, path, default=..., lo=None):
    v = _get(d, key, path, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{path}.{key}", "expected an integer")
    if lo is not None and v < lo:
        raise ScenarioError(f"{path}.{key}", f"must be >= {lo}")
    return v


def _vector(d, key, path, default=...):
    v = _get(d, key, path, default)
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path}.{key}", "expected a list of numbers") from None
    if arr.ndim != 1 or arr.size == 0:
        raise ScenarioError(f"{path}.{key}", "expected a non-empty list of numbers")
    return arr


def _probs(d, key, path):
    p = _vector(d, key, path)
    if np.any(p < 0):
        raise ScenarioError(f"{path}.{key}", "probabilities must be non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ScenarioError(f"{path}.{key}", f"probabilities sum to {p.sum():.12g}, not 1")
    return p


def _matrix(d, key, path):
    v = _get(d, key, path)
    try:
        q = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path}.{key}", "expected a matrix (list of rows)") from None
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ScenarioError(f"{path}.{key}", "expected a square matrix")
    if np.any(q < 0) or np.abs(q.sum(axis=1) - 1).max() > 1e-9:
        raise ScenarioError(f"{path}.{key}", "rows must be probability vectors")
    return q


def grid(spec, path: str) -> np.ndarray:
    """A list of values or ``{start, stop, num[, log]}``."""
    if isinstance(spec, dict):
        a = _number(spec, "start", path)
        b = _number(spec, "stop", path)
        n = _integer(spec, "num", path, 50, lo=1)
        log = _get(spec, "log", path, False, bool)
        if not a < b and n > 1:
            raise ScenarioError(path, "start must be below stop")
        if log:
            if a <= 0:
                raise ScenarioError(f"{path}.start", "log grids need a positive start")
            return np.geomspace(a, b, n)
        return np.linspace(a, b, n)
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.array([float(spec)])
    try:
        arr = np.asarray(spec, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(path, "expected a list of numbers or {start, stop, num}") from None
    if arr.ndim != 1 or arr.size == 0:
        raise ScenarioError(path, "expected a non-empty list")
    return np.sort(arr)


# --------------------------------------------------------------------------
# Model construction
# --------------------------------------------------------------------------

@dataclass
class ArrivalModel:
    """An encoded source: its effective bandwidth and what the simulator needs."""

    eb: EffectiveBandwidth
    label: str
    sampler: Any  # object understood by sim.sample_symbols
    coder: Any  # object understood by sim.encode_stream, or a CodeBook for poisson
    latency: float = 0.0
    mean_rate: float = math.nan
    book: CodeBook | None = None
    poisson: PoissonCount | None = None
    base_period: int = 1

    @property
    def curve(self) -> LegendreCurve:
        return LegendreCurve(self.eb, "arrival")


def _truncated_geometric(p: float) -> np.ndarray:
    probs = GeometricSource(p).probs()
    return probs / probs.sum()


def build_source(doc: dict, path: str = "source"):
    kind = _get(doc, "kind", path, kind=str)
    if kind not in SOURCE_KINDS:
        raise ScenarioError(f"{path}.kind", f"unknown source {kind!r}; expected {SOURCE_KINDS}")
    if kind == "categorical":
        return kind, _probs(doc, "probs", path)
    if kind == "geometric":
        return kind, _number(doc, "p", path, lo=0.0, hi=1.0, open_lo=True, open_hi=True)
    if kind == "markov":
        return kind, _matrix(doc, "Q", path)
    rate = _number(doc, "rate", path, lo=0.0, open_lo=True)
    return kind, (rate, _probs(doc, "probs", path))


def build_arrivals(source_doc: dict, coder_doc: dict | None) -> ArrivalModel:
    kind, par = build_source(source_doc)
    coder_doc = coder_doc or {"kind": "ideal" if kind in ("geometric", "markov") else "huffman"}
    ck = _get(coder_doc, "kind", "coder", kind=str)
    if ck not in CODER_KINDS:
        raise ScenarioError("coder.kind", f"unknown coder {ck!r}; expected {CODER_KINDS}")

    def bad(msg):
        raise ScenarioError("coder.kind", f"{ck!r} {msg} for a {kind} source")

    if kind == "geometric":
        if ck == "ideal":
            eb = geometric_ideal_eb(par)
            probs = _truncated_geometric(par)
            return ArrivalModel(eb, f"geometric(p={par}) ideal", CategoricalSource(probs),
                                make_code("ideal", probs), mean_rate=eb.mean_rate)
        if ck not in ("huffman", "shannon", "sfe"):
            bad("is not supported")
        probs = _truncated_geometric(par)
        kind, par = "categorical", probs

    if kind == "categorical":
        probs = par
        if ck == "lz":
            s = _integer(coder_doc, "s", "coder", 1, lo=1)
            bits = coder_doc.get("alphabet_bits")
            model = lz_model(probs, s, None if bits is None else _integer(coder_doc, "alphabet_bits", "coder", lo=1))
            return ArrivalModel(model.effective_bandwidth(), f"lz(s={s}, w={model.w})",
                                CategoricalSource(probs), model, latency=float(s - 1),
                                mean_rate=model.normalized_length)
        if ck == "none":
            lengths = _vector(coder_doc, "lengths", "coder", None) if "lengths" in coder_doc \
                else np.full(probs.size, float(max(1, math.ceil(math.log2(probs.size) - 1e-12))))
            if lengths.size != probs.size:
                raise ScenarioError("coder.lengths", "need one length per symbol")
            book = CodeBook(probs, lengths, None, "none")
        elif ck in ("huffman", "shannon", "sfe", "ideal"):
            book = make_code(ck, probs)
        else:
            bad("is not supported")
        eb = categorical_eb(book.probs, book.lengths, label=f"{ck}")
        return ArrivalModel(eb, f"categorical {ck}", CategoricalSource(book.probs), book,
                            mean_rate=book.mean_length, book=book)

    if kind == "markov":
        q = par
        if ck in ("ideal", "none"):
            if ck == "none":
                lengths = _vector(coder_doc, "lengths", "coder")
                if lengths.size != q.shape[0]:
                    raise ScenarioError("coder.lengths", "need one length per state")
                ms = MarkovSource(q, lengths)
            else:
                ms = extend_conditional(q)
            return ArrivalModel(ms.effective_bandwidth(), f"markov {ck}", ms, ms,
                                mean_rate=ms.mean_rate)
        if ck == "state-dependent":
            inner = _get(coder_doc, "code", "coder", "huffman", str)
            ms = state_dependent_codes(q, inner)
            return ArrivalModel(ms.effective_bandwidth(), f"markov state-dependent {inner}", ms,
                                ms, mean_rate=ms.mean_rate)
        if ck == "grouped":
            s = _integer(coder_doc, "s", "coder", lo=1)
            inner = _get(coder_doc, "code", "coder", "huffman", str)
            if q.shape[0] ** s > 2 ** 16:
                raise ScenarioError("coder.s", "m^s exceeds the enumeration limit 2^16")
            g = grouped_code(q, s, inner)
            base = MarkovSource(q, np.zeros(q.shape[0]))
            return ArrivalModel(g.source.effective_bandwidth(), f"markov grouped(s={s}) {inner}",
                                base, g, latency=float(s - 1), mean_rate=g.source.mean_rate,
                                book=g.book, base_period=s)
        bad("is not supported")

    rate, probs = par
    if ck == "none":
        lengths = _vector(coder_doc, "lengths", "coder") if "lengths" in coder_doc else \
            np.full(probs.size, float(max(1, math.ceil(math.log2(probs.size) - 1e-12))))
        book = CodeBook(probs, lengths, None, "none")
    elif ck in ("huffman", "shannon", "sfe", "ideal"):
        book = make_code(ck, probs)
    else:
        bad("is not supported")
    eb = poisson_eb(rate, book.probs, book.lengths)
    return ArrivalModel(eb, f"poisson(rate={rate}) {ck}", PoissonCount(rate), book,
                        mean_rate=eb.mean_rate, book=book, poisson=PoissonCount(rate))


def build_channel(doc: dict | None, path: str = "channel"):
    if doc is None:
        return None
    kind = _get(doc, "kind", path, kind=str)
    if kind not in CHANNEL_KINDS:
        raise ScenarioError(f"{path}.kind", f"unknown channel {kind!r}; expected {CHANNEL_KINDS}")
    if kind == "constant":
        return ("constant", _number(doc, "c", path, lo=0.0, open_lo=True))
    R = _number(doc, "R", path, lo=0.0, open_lo=True)
    q = _matrix(doc, "Q", path)
    if q.shape != (2, 2):
        raise ScenarioError(f"{path}.Q", "a Gilbert-Elliott channel has two states")
    try:
        return ("gilbert-elliott", GilbertElliott(R, q))
    except ValueError as exc:
        raise ScenarioError(f"{path}.Q", str(exc)) from None


def _eps(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v < 1:
        raise ScenarioError(path, "error probabilities must lie in (0, 1)")
    return float(v)


def parse_analysis(doc: dict, path: str = "analysis") -> dict:
    kind = _get(doc, "kind", path, kind=str)
    if kind not in ANALYSIS_KINDS:
        raise ScenarioError(f"{path}.kind", f"unknown analysis {kind!r}; expected {ANALYSIS_KINDS}")
    out: dict[str, Any] = {"kind": kind}
    if kind == "envelope":
        out["horizon"] = _integer(doc, "horizon", path, 50, lo=1)
        out["kappa"] = _number(doc, "kappa", path, 1e-6, lo=0, hi=1, open_lo=True, open_hi=True)
    elif kind == "tradeoff":
        out["c"] = grid(_get(doc, "c", path), f"{path}.c")
        if np.any(out["c"] <= 0):
            raise ScenarioError(f"{path}.c", "capacities must be positive")
        eps = _get(doc, "epsilon", path, [1e-6])
        eps = eps if isinstance(eps, list) else [eps]
        out["epsilon"] = [_eps(e, f"{path}.epsilon[{i}]") for i, e in enumerate(eps)]
    elif kind == "compose":
        out["epsilon_E"] = _eps(_get(doc, "epsilon_E", path, 1e-6), f"{path}.epsilon_E")
        out["epsilon_S"] = _eps(_get(doc, "epsilon_S", path, 1e-6), f"{path}.epsilon_S")
        c = _get(doc, "c", path, None)
        out["c"] = None if c is None else grid(c, f"{path}.c")
    else:
        out["slots"] = _integer(doc, "slots", path, 1_000_000, lo=1000)
        out["seed"] = _integer(doc, "seed", path, 0, lo=0)
        out["replications"] = _integer(doc, "replications", path, 1, lo=1)
        eps = _get(doc, "epsilon", path, [1e-2, 1e-3])
        eps = eps if isinstance(eps, list) else [eps]
        out["epsilon"] = [_eps(e, f"{path}.epsilon[{i}]") for i, e in enumerate(eps)]
        out["trace"] = _get(doc, "trace", path, False, bool)
    return out


@dataclass
class Scenario:
    arrivals: ArrivalModel
    channel: Any
    analysis: dict
    output: Path | None
    raw: dict


def load_document(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError("<file>", f"cannot read {p}: {exc.strerror}") from None
    try:
        doc = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ScenarioError("<file>", f"parse error: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "a scenario must be a mapping")
    return doc


def parse_scenario(doc: dict) -> Scenario:
    version = _get(doc, "version", "<root>", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError("version", f"unsupported schema version {version!r}")
    unknown = set(doc) - {"version", "source", "coder", "channel", "analysis", "output", "name"}
    if unknown:
        raise ScenarioError(sorted(unknown)[0], "unknown top-level field")
    try:
        arrivals = build_arrivals(_get(doc, "source", "<root>", kind=dict), doc.get("coder"))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("source", str(exc)) from None
    channel = build_channel(doc.get("channel"))
    analysis = parse_analysis(_get(doc, "analysis", "<root>", kind=dict))
    if analysis["kind"] == "compose" and channel is None:
        raise ScenarioError("channel", "a compose analysis needs a channel")
    if analysis["kind"] == "simulate" and channel is None:
        raise ScenarioError("channel", "a simulation needs a channel")
    out = doc.get("output")
    return Scenario(arrivals, channel, analysis, None if out is None else Path(out), doc)
