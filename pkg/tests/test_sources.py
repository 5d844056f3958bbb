import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import LN2, categorical_alpha, geometric_alpha, random_chain, random_probs
from infoenv.errors import DomainError, ReducibleChainError
from infoenv.sources import (CategoricalSource, GeometricSource, MarkovSource, PoissonCount,
                             alpha_categorical, alpha_geometric_ideal, alpha_markov,
                             alpha_markov_sup, alpha_variable_rate, categorical_cgf,
                             entropy, entropy_rate_markov, extend_conditional, extend_group,
                             geometric_entropy, poisson_cgf, sequence_probabilities,
                             stationary)

Q_T43 = [[5 / 8, 3 / 8], [5 / 8, 3 / 8]]
Q_T8 = [[4 / 5, 1 / 5], [1 / 3, 2 / 3]]
Q_T16 = [[9 / 10, 1 / 10], [1 / 6, 5 / 6]]
Q_IMPAIR = [[7 / 8, 1 / 8], [1 / 4, 3 / 4]]


def matrix_power_alpha(q, lengths, p, theta, t):
    """Oracle: P (LQ)^(t-1) L 1 by an explicit matrix power, no rescaling."""
    L = np.diag(np.exp(theta * np.asarray(lengths, float)))
    v = np.asarray(p, float) @ np.linalg.matrix_power(L @ np.asarray(q, float), t - 1)
    return float(np.log(v @ L @ np.ones(len(lengths))) / (theta * t))


# -- entropy -------------------------------------------------------------------

def test_entropy_examples(five_symbols):
    assert entropy([0.25] * 4) == pytest.approx(2.0)
    assert entropy(five_symbols) == pytest.approx(2.156, abs=5e-4)
    assert entropy(CategoricalSource([1.0])) == 0.0
    assert entropy([0.5, 0.5, 0.0]) == pytest.approx(1.0)


@pytest.mark.parametrize("p,h", [(0.25, 3.25), (0.5, 2.0), (0.75, 1.08)])
def test_geometric_entropy(p, h):
    assert entropy(GeometricSource(p)) == pytest.approx(h, abs=0.01)
    # against the truncated series
    probs = GeometricSource(p).probs(1e-15)
    assert geometric_entropy(p) == pytest.approx(-(probs * np.log2(probs)).sum(), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2 ** 31))
def test_entropy_bounds(n, seed):
    p = random_probs(np.random.default_rng(seed), n)
    h = entropy(p)
    assert -1e-12 <= h <= math.log2(n) + 1e-12


def test_source_validation():
    with pytest.raises(ValueError):
        CategoricalSource([0.5, 0.6])
    with pytest.raises(ValueError):
        GeometricSource(1.0)


# -- Markov chains -------------------------------------------------------------

@pytest.mark.parametrize("q,h", [(Q_T43, 0.954), (Q_T8, 0.80), (Q_T16, 0.54)])
def test_entropy_rate(q, h):
    assert entropy_rate_markov(q) == pytest.approx(h, abs=0.005)


def test_entropy_rate_deterministic_cycle():
    assert entropy_rate_markov([[0, 1], [1, 0]]) == 0.0


def test_entropy_rate_bounded_by_marginal():
    rng = np.random.default_rng(3)
    for _ in range(10):
        q = random_chain(rng, int(rng.integers(2, 6)))
        assert 0 <= entropy_rate_markov(q) <= entropy(stationary(q)) + 1e-12


def test_reducible_rejected():
    q = [[1.0, 0.0], [0.5, 0.5]]
    with pytest.raises(ReducibleChainError):
        stationary(q)
    with pytest.raises(ReducibleChainError):
        entropy_rate_markov(q)
    with pytest.raises(ReducibleChainError):
        MarkovSource(q, [0, 1])


@pytest.mark.parametrize("q,p", [([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5]),
                                 (Q_T16, [5 / 8, 3 / 8]),
                                 (Q_IMPAIR, [2 / 3, 1 / 3])])
def test_stationary_examples(q, p):
    assert stationary(q) == pytest.approx(p, abs=1e-12)


def test_stationary_large_chain_power_iteration():
    rng = np.random.default_rng(11)
    q = random_chain(rng, 90)
    p = stationary(q)
    w, v = np.linalg.eig(q.T)
    ref = np.real(v[:, np.argmin(abs(w - 1))])
    assert p == pytest.approx(ref / ref.sum(), abs=1e-12)
    assert np.abs(p @ q - p).max() < 1e-13


def test_markov_source_checks():
    with pytest.raises(ValueError):
        MarkovSource([[0.5, 0.6], [0.5, 0.5]], [1, 1])
    with pytest.raises(ValueError):
        MarkovSource(Q_T16, [1, 1, 1])
    with pytest.raises(ValueError):
        MarkovSource(Q_T16, [1, 1], P=[0.5, 0.5])


# -- memoryless effective bandwidths ------------------------------------------

def test_alpha_categorical_ideal_lengths(five_symbols):
    theta = 0.37
    ideal = -np.log2(five_symbols)
    closed = math.log((five_symbols ** (1 - theta / LN2)).sum()) / theta
    assert alpha_categorical(five_symbols, ideal, theta) == pytest.approx(closed, rel=1e-13)


def test_alpha_categorical_equal_lengths():
    for th in (1e-3, 0.5, 20.0):
        assert alpha_categorical([0.2, 0.3, 0.5], [4, 4, 4], th) == pytest.approx(4.0)


def test_alpha_categorical_huffman_spot_value():
    ref = (1 / 0.5) * math.log(3 / 8 * math.e ** 0.5 + 2 / 8 * math.e ** 1 + 1 / 8 * math.e ** 1.5
                               + 1 / 8 * math.e ** 2 + 1 / 8 * math.e ** 2)
    assert alpha_categorical([3 / 8, 2 / 8, 1 / 8, 1 / 8, 1 / 8], [1, 2, 3, 4, 4], 0.5) == \
        pytest.approx(ref, rel=1e-14)


def test_alpha_categorical_limits(five_symbols):
    lengths = np.array([1, 2, 3, 4, 4.0])
    assert alpha_categorical(five_symbols, lengths, 1e-6) == pytest.approx(five_symbols @ lengths, abs=1e-5)
    assert alpha_categorical(five_symbols, lengths, 500.0) == pytest.approx(4.0, abs=0.01)
    with pytest.raises(DomainError):
        alpha_categorical(five_symbols, lengths, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(1e-3, 5.0), st.floats(1.01, 3.0))
def test_alpha_monotone_in_theta(seed, theta, factor):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    p = random_probs(rng, n)
    l = rng.integers(0, 10, n).astype(float)
    assert alpha_categorical(p, l, theta * factor) >= alpha_categorical(p, l, theta) - 1e-12


def test_alpha_geometric_ideal():
    assert alpha_geometric_ideal(0.5, 1e-6) == pytest.approx(2.0, abs=1e-5)
    assert alpha_geometric_ideal(0.75, 1e-6) == pytest.approx(1.08, abs=5e-3)
    i = np.arange(201)
    p_i = 0.5 * 0.5 ** i
    series = math.log((p_i ** (1 - 0.3 / LN2)).sum()) / 0.3
    assert alpha_geometric_ideal(0.5, 0.3) == pytest.approx(series, abs=1e-9)
    assert alpha_geometric_ideal(0.25, 0.2) == pytest.approx(float(geometric_alpha(0.25, 0.2)), rel=1e-12)
    with pytest.raises(DomainError):
        alpha_geometric_ideal(0.5, LN2)


# -- Markov effective bandwidth ------------------------------------------------

def test_alpha_markov_t1_is_categorical():
    ms = MarkovSource(Q_T16, [1.0, 3.0])
    assert alpha_markov(ms, 0.4, 1) == pytest.approx(alpha_categorical(ms.P, ms.lengths, 0.4))


def test_alpha_markov_identical_rows_t_independent():
    probs = [0.2, 0.5, 0.3]
    ms = MarkovSource([probs] * 3, [1.0, 2.0, 5.0])
    ref = alpha_categorical(probs, [1.0, 2.0, 5.0], 0.7)
    for t in (1, 2, 17, 1000):
        assert alpha_markov(ms, 0.7, t) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("t", [1, 2, 5, 30])
def test_alpha_markov_matches_matrix_power(t):
    rng = np.random.default_rng(t)
    q = random_chain(rng, 4)
    l = rng.random(4) * 6
    ms = MarkovSource(q, l)
    assert alpha_markov(ms, 0.45, t) == pytest.approx(matrix_power_alpha(q, l, ms.P, 0.45, t), rel=1e-10)


def test_alpha_markov_no_overflow():
    ms = MarkovSource(Q_T16, [0.0, 64.0])
    a = alpha_markov(ms, 1000.0, 100_000)
    assert math.isfinite(a) and 0 < a <= 64.0


def test_extended_entropy_rate_limit():
    ms = extend_conditional(Q_T8)
    assert alpha_markov(ms, 1e-5, 20_000) == pytest.approx(0.80, abs=0.01)


@pytest.mark.parametrize("q", [Q_T43, Q_T8, Q_T16])
def test_extended_alpha_non_decreasing_in_t_moderate_theta(q):
    eb = extend_conditional(q).effective_bandwidth()
    for th in (0.05, 0.5):
        a = eb.log_mgf_path(th, 400) / (th * np.arange(1, 401))
        assert np.all(np.diff(a) >= -1e-12)


def test_impairment_alpha_non_decreasing_in_t():
    eb = MarkovSource(Q_IMPAIR, [0.0, 6.0]).effective_bandwidth()
    for th in (0.05, 0.5, 3.0):
        a = eb.log_mgf_path(th, 400) / (th * np.arange(1, 401))
        assert np.all(np.diff(a) >= -1e-12)


def test_extended_alpha_zigzags_at_large_theta():
    # irreducible chains need not have alpha non-decreasing in t; the burst
    # term then carries the excess over the limit
    eb = extend_conditional(Q_T8).effective_bandwidth()
    a = eb.log_mgf_path(3.0, 10) / (3.0 * np.arange(1, 11))
    assert a[1] < a[0] and a[0] > eb.rate(3.0)
    assert eb.burst(3.0, eb.rate(3.0)) > 0


def test_alpha_markov_sup_identical_rows():
    probs = [0.6, 0.4]
    ms = MarkovSource([probs, probs], [2.0, 7.0])
    assert alpha_markov_sup(ms, 0.3) == pytest.approx(alpha_categorical(probs, [2, 7], 0.3), rel=1e-9)


def test_alpha_markov_sup_mean_limit():
    ms = MarkovSource(Q_IMPAIR, [0.0, 6.0])
    assert alpha_markov_sup(ms, 1e-6) == pytest.approx(2.0, abs=1e-4)


def test_alpha_markov_sup_is_increment_limit():
    # the per-step increment of ln M converges geometrically to ln(rho)
    rng = np.random.default_rng(5)
    for _ in range(10):
        q = random_chain(rng, int(rng.integers(2, 6)))
        ms = MarkovSource(q, rng.random(q.shape[0]) * 5)
        eb = ms.effective_bandwidth()
        lm = eb.log_mgf_path(0.5, 2000)
        assert (lm[-1] - lm[-2]) / 0.5 == pytest.approx(alpha_markov_sup(ms, 0.5), rel=1e-9)


def test_alpha_markov_converges_to_sup_like_one_over_t():
    ms = MarkovSource(Q_IMPAIR, [0.0, 6.0])
    lim = alpha_markov_sup(ms, 0.1)
    g1 = abs(alpha_markov(ms, 0.1, 1000) - lim) * 1000
    g2 = abs(alpha_markov(ms, 0.1, 10_000) - lim) * 10_000
    assert g1 == pytest.approx(g2, rel=1e-3)


def test_burst_zero_for_increasing_alpha():
    eb = MarkovSource(Q_IMPAIR, [0.0, 6.0]).effective_bandwidth()
    assert eb.burst(0.2, eb.rate(0.2)) == 0.0
    assert math.isinf(eb.burst(0.2, eb.rate(0.2) * 0.99))


def test_burst_matches_brute_force_for_nonmonotone_chain():
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = random_chain(rng, 3)
        ms = MarkovSource(q, rng.random(3) * 5)
        eb = ms.effective_bandwidth()
        th = 0.5
        r = eb.rate(th) * 1.0001
        lm = eb.log_mgf_path(th, 5000)
        t = np.arange(1, 5001)
        ref = max(0.0, float(np.max(lm / th - r * t)))
        assert eb.burst(th, r) == pytest.approx(ref, rel=1e-9, abs=1e-9)


# -- state-space extensions ---------------------------------------------------

def test_extend_conditional_stationary():
    ext = extend_conditional(Q_T16)
    p = stationary(Q_T16)
    q = np.asarray(Q_T16)
    expect = {(i, j): p[j] * q[j, i] for i in range(2) for j in range(2)}
    for (i, j), pi in zip(ext.labels, ext.P):
        assert pi == pytest.approx(expect[(i, j)], abs=1e-12)


def test_extend_conditional_max_information():
    ext = extend_conditional(Q_T8)
    k = int(np.argmax(ext.lengths))
    assert ext.labels[k] == (1, 0)  # symbol 2 after symbol 1
    assert ext.lengths[k] == pytest.approx(2.32, abs=0.005)


def test_extend_conditional_prunes_zero_transitions():
    ext = extend_conditional([[0.0, 1.0], [0.5, 0.5]])
    assert (0, 0) not in ext.labels and ext.m == 3


@pytest.mark.parametrize("seed", range(8))
def test_extension_marginals_and_entropy(seed):
    rng = np.random.default_rng(seed)
    q = random_chain(rng, int(rng.integers(2, 5)))
    ext = extend_conditional(q)
    marg = np.zeros(q.shape[0])
    for (i, j), pi in zip(ext.labels, ext.P):
        marg[i] += pi
    assert marg == pytest.approx(stationary(q), abs=1e-9)
    assert ext.mean_rate == pytest.approx(entropy_rate_markov(q), abs=1e-9)


def test_extension_of_memoryless_chain():
    ext = extend_conditional(Q_T43)
    assert ext.mean_rate == pytest.approx(entropy([5 / 8, 3 / 8]), abs=1e-12)


def test_extend_group_s1_is_base_chain():
    g = extend_group(Q_T16, 1, lambda t: [1.0, 2.0][t[0]])
    assert g.Q == pytest.approx(np.asarray(Q_T16))
    assert g.period == 1 and g.grouping_delay == 0


def test_extend_group_structure():
    g = extend_group(Q_T16, 2, lambda t: float(len(t)))
    q = np.asarray(Q_T16)
    a, b = g.labels.index((0, 1)), g.labels.index((1, 0))
    assert g.Q[a, b] == pytest.approx(q[1, 1] * q[1, 0])
    assert g.period == 2 and g.grouping_delay == 1
    assert np.abs(g.P @ g.Q - g.P).max() < 1e-12
    eb = g.effective_bandwidth()
    assert eb.time_class == "periodic"
    assert eb(0.3, 3) == pytest.approx(eb.log_mgf(0.3, 4) / (0.3 * 3))


def test_extend_group_mean_rate():
    seqs, probs = sequence_probabilities(Q_T8, 3)
    lengths = {t: float(sum(t) + 1) for t in seqs}
    g = extend_group(Q_T8, 3, lengths)
    assert g.mean_rate == pytest.approx(sum(p * lengths[t] for t, p in zip(seqs, probs)) / 3, abs=1e-9)


def test_extend_group_missing_length():
    with pytest.raises(KeyError):
        extend_group(Q_T16, 2, {(0, 0): 1.0})


# -- variable symbol rate ---------------------------------------------------

DYADIC8 = [2.0 ** -i for i in range(1, 8)] + [2.0 ** -7]


def test_poisson_closed_form_matches_series():
    lengths = [-math.log2(p) for p in DYADIC8]
    cgf = categorical_cgf(DYADIC8, lengths)
    for th in (0.05, 0.3, 0.6):
        series = alpha_variable_rate(PoissonCount(1.0), cgf, th, t=1)
        closed = poisson_cgf(1.0, cgf)(th) / th
        assert series == pytest.approx(closed, abs=1e-9)


def test_poisson_independent_of_t():
    cgf = categorical_cgf([0.5, 0.5], [1.0, 3.0])
    vals = [alpha_variable_rate(PoissonCount(0.7), cgf, 0.4, t=t) for t in (1, 3, 10)]
    assert vals == pytest.approx([vals[0]] * 3, rel=1e-9)


def test_zero_length_codewords():
    assert alpha_variable_rate(PoissonCount(2.0), lambda th: 0.0, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_variable_rate_divergence():
    class HeavyCount:
        def log_pmf(self, n, t=1):
            n = np.asarray(n, float)
            return np.where(n > 0, -2.0 * np.log(np.maximum(n, 1)), -1.0) - 0.5

    with pytest.raises(DomainError):
        alpha_variable_rate(HeavyCount(), lambda th: 5 * th, 1.0, max_terms=20_000)


def test_poisson_pmf_normalized():
    pc = PoissonCount(3.0)
    n = np.arange(pc.support_bound(4))
    assert pc.pmf(n, 4).sum() == pytest.approx(1.0, abs=1e-12)
