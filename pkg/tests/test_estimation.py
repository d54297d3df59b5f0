import math
import random

import numpy as np
import pytest

from conftest import PLAIN
from oracles import digamma_half_integer, digamma_reference, edcm_loglik, grid_argmax
from spudlm.errors import DivergenceError, DomainError
from spudlm.estimation import (
    SmoothingHyper,
    derive_mu_prime,
    digamma,
    doc_side_estimates,
    edcm_fixed_point,
    estimate_mc,
)
from spudlm.index import DocStats, build_index
from spudlm.synthetic import polya_corpus

EULER_GAMMA = 0.57721566490153286061

LOG_GRID = np.geomspace(1e-3, 1e9, 400)


def test_digamma_at_one():
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-14)


def test_digamma_half_integer():
    assert abs(digamma(10.5) - digamma_half_integer(10)) < 1e-13
    assert abs(digamma(0.5) - digamma_half_integer(0)) < 1e-13


def test_digamma_against_high_precision_on_log_grid():
    errors = [abs(digamma(x) - digamma_reference(x)) for x in LOG_GRID]
    assert max(errors) < 1e-10


def test_digamma_array_matches_scalar():
    arr = digamma(LOG_GRID)
    assert np.array_equal(arr, np.array([digamma(x) for x in LOG_GRID]))


def test_digamma_recurrence():
    rng = random.Random(0)
    xs = [10 ** rng.uniform(-3, 8) for _ in range(500)]
    assert max(abs(digamma(x + 1) - digamma(x) - 1 / x) for x in xs) < 1e-10


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.nan])
def test_digamma_domain(x):
    with pytest.raises(DomainError):
        digamma(x)
    with pytest.raises(DomainError):
        digamma(np.array([1.0, x]))


# -- m_c ---------------------------------------------------------------------------


def _stats(corpus):
    idx = build_index(corpus, PLAIN)
    return idx, idx.doc_lengths, idx.doc_types


@pytest.mark.parametrize("seed", range(6))
def test_estimate_matches_likelihood_grid_search(seed):
    rng = np.random.default_rng(seed)
    concentration = float(rng.uniform(20, 400))
    idx, lengths, types = _stats(
        polya_corpus(50, vocab_size=150, concentration=concentration, length_range=(10, 300), seed=seed)
    )
    est = estimate_mc(idx)
    assert est.converged and est.iterations <= 100
    assert est.residual < 1e-6
    oracle = grid_argmax(lengths, types, hi=10 * lengths.mean())
    assert est.m_c == pytest.approx(oracle, rel=0.01)
    # the estimate is at least as likely as any nearby grid point
    for factor in (0.99, 1.01):
        assert edcm_loglik(est.m_c, lengths, types) >= edcm_loglik(est.m_c * factor, lengths, types)


def test_estimate_converges_from_several_starts():
    idx, lengths, _ = _stats(polya_corpus(200, vocab_size=200, concentration=80, seed=21))
    results = [estimate_mc(idx, init=init) for init in (10.0, 200.0, 10 * float(lengths.mean()))]
    assert all(r.converged and r.residual < 1e-6 for r in results)
    assert max(r.m_c for r in results) - min(r.m_c for r in results) < 1e-6 * results[0].m_c


def test_fixed_point_is_stationary():
    idx, _, _ = _stats(polya_corpus(80, vocab_size=100, seed=2))
    est = estimate_mc(idx, tol=1e-12, max_iter=500)
    lengths, types = idx.doc_lengths.astype(float), idx.doc_types
    lhs = float(types.sum()) / (np.sum(digamma(lengths + est.m_c)) - len(lengths) * digamma(est.m_c))
    assert lhs == pytest.approx(est.m_c, rel=1e-9)


def test_all_length_one_is_uninformative():
    idx = build_index([(f"d{i}", f"w{i % 3}") for i in range(10)], PLAIN)
    est = estimate_mc(idx, init=200.0)
    assert est.uninformative and est.converged
    assert est.m_c == pytest.approx(200.0, rel=1e-12)
    assert est.iterations == 1


def test_empty_documents_are_ignored():
    corpus = polya_corpus(40, vocab_size=60, seed=4)
    a = estimate_mc(build_index(corpus, PLAIN))
    b = estimate_mc(build_index(corpus + [("e1", ""), ("e2", "")], PLAIN))
    assert a == b


def test_accepts_length_arrays():
    idx = build_index(polya_corpus(40, vocab_size=60, seed=4), PLAIN)
    assert estimate_mc((idx.doc_lengths, idx.doc_types)) == estimate_mc(idx)


def test_non_convergence_is_reported():
    idx = build_index(polya_corpus(40, vocab_size=60, seed=4), PLAIN)
    est = estimate_mc(idx, max_iter=2)
    assert not est.converged and est.iterations == 2


def test_divergence_raises_with_state():
    # |d vec| > |d| is impossible in real data; it drives the update negative
    with pytest.raises(DivergenceError) as err:
        estimate_mc((np.array([3, 5]), np.array([40, 50])), init=1.0)
    assert err.value.iterations >= 1 and err.value.last_value > 0


def test_bad_init():
    idx = build_index([("a", "x y")], PLAIN)
    for init in (0.0, -1.0, math.inf):
        with pytest.raises(DomainError):
            estimate_mc(idx, init=init)


def test_fixed_point_map_formula():
    lengths, counts = np.array([2.0, 5.0]), np.array([3.0, 1.0])
    m = 7.0
    expected = 9 / (3 * digamma(9.0) + digamma(12.0) - 4 * digamma(7.0))
    assert edcm_fixed_point(m, lengths, counts, 9, 4) == pytest.approx(expected, rel=1e-14)


# -- mu' --------------------------------------------------------------------------


def test_mu_prime_examples():
    assert derive_mu_prime(0.8, 258.0) == 1032.0
    assert derive_mu_prime(0.8, 100.0) == 400.0
    assert derive_mu_prime(0.5, 123.456) == 123.456


def test_mu_prime_is_four_times_m_at_point_eight():
    rng = random.Random(1)
    ms = [10 ** rng.uniform(-6, 9) for _ in range(5000)] + [1e-300, 5e-324, 1.7e308 / 8]
    assert all(derive_mu_prime(0.8, m) == 4 * m for m in ms)


def test_mu_prime_linear_and_increasing():
    assert derive_mu_prime(0.7, 30.0) == pytest.approx(3 * derive_mu_prime(0.7, 10.0), rel=1e-15)
    omegas = [0.05 * i for i in range(1, 20)]
    values = [derive_mu_prime(w, 10.0) for w in omegas]
    assert all(a < b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("omega", [0.0, 1.0, -0.1, 1.5])
def test_mu_prime_domain(omega):
    with pytest.raises(DomainError):
        derive_mu_prime(omega, 10.0)


def test_smoothing_hyper():
    h = SmoothingHyper(0.9, 20.0)
    assert abs(h.mu_prime - 0.9 / 0.1 * 20.0) < 1e-12


def test_doc_side_estimates(toy_index):
    assert doc_side_estimates(toy_index.docs[0]) == (2.0, 0.2)
    assert doc_side_estimates(DocStats("x", 3, 3)) == (3.0, 1.0)
    assert doc_side_estimates(DocStats("x", 10, 4)) == (4.0, 0.4)
    with pytest.raises(DomainError):
        doc_side_estimates(DocStats("x", 0, 0))


@pytest.mark.parametrize("true_m", [20.0, 300.0])
def test_recovers_concentration_of_flat_polya_corpus(true_m):
    # many equally likely terms keep every per-term share small
    V = 20000
    corpus = polya_corpus(400, vocab_size=V, concentration=true_m, length_range=(20, 400), seed=1,
                          background=np.full(V, 1.0 / V))
    est = estimate_mc(build_index(corpus, PLAIN))
    assert est.m_c == pytest.approx(true_m, rel=0.1)
