import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import chain, random_attractive, random_kappa_attractive
from ggmlearn import generators as gen
from ggmlearn import learners as L
from ggmlearn import model as M
from ggmlearn import sampler as S
from ggmlearn.errors import BadParams, EnumerationBudgetExceeded, MissingNode, TooFewSamples
from ggmlearn.oracles import conditional_variance_table


def _cfg(model, **kw):
    return L.config_for_model(model, **kw)


# ---------------------------------------------------------- greedy-and-prune


def test_greedy_chain_population():
    c = chain(3)
    est = L.greedy_and_prune(c, 1, _cfg(c, t_steps=2))
    assert est.support == (0, 2)
    assert 1.0 / est.sigma_hat_sq == pytest.approx(c.theta[1, 1])


def test_greedy_identity_prunes_everything():
    ident = M.GgmModel.from_precision(np.eye(4))
    for i in range(4):
        assert L.greedy_and_prune(ident, i, L.LearnerConfig(kappa=0.5, t_steps=2)).support == ()


def test_greedy_too_few_samples():
    c = chain(4)
    with pytest.raises(TooFewSamples):
        L.greedy_and_prune(S.sample(c, 1, 0), 0, _cfg(c, t_steps=2))


def test_greedy_grid_matches_single_runs():
    m = gen.path_cliques(16, 4, 0.9)
    s = S.sample(m, 200, 4)
    grid = L.greedy_and_prune_grid(s, 3, [2, 5], [0.01, 0.05])
    for (t, nu), est in grid.items():
        single = L.greedy_and_prune(s, 3, L.LearnerConfig(t_steps=t, nu=nu))
        assert est.support == single.support
        assert est.sigma_hat_sq == pytest.approx(single.sigma_hat_sq)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(1, 3))
def test_greedy_population_exact(seed, n, d):
    m = random_kappa_attractive(n, d, np.random.default_rng(seed))
    est = L.learn(m, "greedy-and-prune", _cfg(m))
    assert est.edge_set == m.edges


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 7))
def test_greedy_progress_matches_supermodularity(seed, n):
    m = random_attractive(n, np.random.default_rng(seed))
    table = conditional_variance_table(m)
    for i in range(n):
        order = L.greedy_and_prune(m, i, _cfg(m, t_steps=n - 1, nu=0.0)).diagnostics["omp_order"]
        mask = 0
        for j in order:
            nbrs = set(m.neighbors(i))
            missing = [v for v in nbrs if not mask >> v & 1]
            if not missing:
                break
            gap = table[mask, i] - 1.0 / m.theta[i, i]
            assert table[mask, i] - table[mask | 1 << j, i] >= gap / len(missing) - 1e-9
            mask |= 1 << j


def test_break_greedy_no_superset_within_2d():
    m = gen.break_greedy(4, 1e-3)
    truth = set(m.neighbors(0))
    base = L.config_for_model(m)
    supersets = [
        t
        for t in range(1, 9)
        if truth <= set(L.greedy_and_prune(m, 0, L.LearnerConfig(**{**base.to_dict(), "t_steps": t})).support)
    ]
    assert supersets == []


# ------------------------------------------------------- search-and-validate


def test_search_identity():
    ident = M.GgmModel.from_precision(np.eye(4))
    assert L.search_and_validate(ident, 2, L.LearnerConfig(kappa=0.5, d=0)).support == ()


def test_search_chain_samples():
    c = chain(5)
    est = L.search_and_validate(S.sample(c, 2000, 3), 2, _cfg(c, d=2))
    assert est.support == (1, 3)


def test_search_no_submodularity():
    m = gen.no_submodularity()
    assert L.search_and_validate(m, 0, _cfg(m, d=2)).support == (1, 2)


def test_search_budget():
    m = M.GgmModel.from_precision(np.eye(30))
    with pytest.raises(EnumerationBudgetExceeded):
        L.search_and_validate(m, 0, L.LearnerConfig(kappa=0.5, d=6, budget=1000))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.integers(1, 3))
def test_search_population_exact(seed, n, d):
    m = random_kappa_attractive(n, d, np.random.default_rng(seed))
    assert L.learn(m, "search-and-validate", _cfg(m)).edge_set == m.edges


# --------------------------------------------------------------- ws / hybrid


def test_ws_regression_chain_population():
    c = chain(3)
    res = L.ws_regression(c, 1, _cfg(c, gamma=np.sqrt(2.0)))
    target = M.conditional_coefficients(c, 1, [0, 2])
    u = res.predictor(3)
    diff = np.delete(u, 1) - target
    assert diff @ c.sigma[np.ix_([0, 2], [0, 2])] @ diff <= 1e-6
    assert 0.5 <= c.theta[1, 1] * res.sigma_hat_sq <= 2.0


def test_ws_regression_isolated_node():
    theta = np.eye(4)
    theta[1:, 1:] = chain(3).theta
    m = M.GgmModel.from_precision(theta)
    res = L.ws_regression(m, 0, L.LearnerConfig(kappa=0.5, d=2))
    assert np.allclose(res.predictor(4), 0.0, atol=1e-6)
    assert res.sigma_hat_sq == pytest.approx(1.0, rel=1e-6)


def test_ws_regression_random_walk_risk():
    m = gen.gaussian_walk(32, start_time=32)
    i = 15
    res = L.ws_regression(S.sample(m, 600, 2), i, _cfg(m))
    others = [k for k in range(32) if k != i]
    diff = np.delete(res.predictor(32), i) - M.conditional_coefficients(m, i, others)
    assert diff @ m.sigma[np.ix_(others, others)] @ diff <= 0.1 / m.theta[i, i]


def test_hybrid_identity_empty():
    ident = M.GgmModel.from_precision(np.eye(5))
    cfg = L.LearnerConfig(kappa=0.5, d=1, tau=0.01, sample_split_mode="single")
    est = L.hybrid_mb(S.sample(ident, 300, 0), cfg)
    assert est.edge_set == frozenset()


def test_hybrid_chain_population():
    c = chain(4)
    est = L.hybrid_mb(c, _cfg(c))
    assert est.edge_set == frozenset({(0, 1), (1, 2), (2, 3)})
    assert np.allclose(est.theta_hat, c.theta, atol=1e-6)


def test_hybrid_tau_zero_keeps_mutual_nonzeros():
    c = chain(4)
    s = S.sample(c, 400, 6)
    cfg = _cfg(c, tau=0.0, sample_split_mode="single")
    est = L.hybrid_mb(s, cfg)
    u = np.array([L.ws_regression(s, i, cfg).predictor(4) for i in range(4)])
    mutual = {(a, b) for a in range(4) for b in range(a + 1, 4) if u[a, b] != 0 and u[b, a] != 0}
    assert est.edge_set == frozenset(mutual)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.integers(1, 3))
def test_hybrid_population_exact(seed, n, d):
    m = random_kappa_attractive(n, d, np.random.default_rng(seed))
    assert L.hybrid_mb(m, _cfg(m)).edge_set == m.edges


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_population_scale_invariance(seed, n):
    rng = np.random.default_rng(seed)
    m = random_kappa_attractive(n, 2, rng)
    r = m.rescaled(np.exp(rng.uniform(-1.5, 1.5, n)))
    for alg in ("greedy-and-prune", "hybrid-mb"):
        assert L.learn(m, alg, _cfg(m)).edge_set == L.learn(r, alg, _cfg(m)).edge_set


# ------------------------------------------------------------ merge/threshold


def _nb(i, support, coef, var=1.0):
    return L.NeighborhoodEstimate(i, tuple(support), np.array(coef, dtype=float), var)


def test_merge_consistent():
    est = L.merge_and_symmetrize([_nb(0, [1], [0.5]), _nb(1, [0], [0.5])])
    assert est.edge_set == frozenset({(0, 1)})
    assert est.theta_hat[0, 1] == pytest.approx(-0.5)


def test_merge_one_sided_edge_dropped():
    est = L.merge_and_symmetrize([_nb(0, [1], [0.5]), _nb(1, [], [])])
    assert est.edge_set == frozenset() and est.theta_hat[0, 1] == 0.0
    union = L.merge_and_symmetrize([_nb(0, [1], [0.5]), _nb(1, [], [])], rule="union")
    assert union.edge_set == frozenset({(0, 1)})


def test_merge_picks_smaller_magnitude():
    est = L.merge_and_symmetrize([_nb(0, [1], [0.5], 0.5), _nb(1, [0], [0.3], 1.0)])
    assert est.theta_hat[0, 1] == pytest.approx(-0.3)


def test_merge_missing_node():
    with pytest.raises(MissingNode):
        L.merge_and_symmetrize([_nb(0, [1], [0.5])], n=3)


def test_merge_population_chain():
    c = chain(5)
    nbhds = [L.greedy_and_prune(c, i, _cfg(c)) for i in range(5)]
    assert np.allclose(L.merge_and_symmetrize(nbhds).theta_hat, c.theta, atol=1e-8)


def test_threshold_edges():
    c = chain(4)
    assert L.threshold_edges(c.theta, c.kappa) == c.edges
    assert L.threshold_edges(np.eye(3), 0.5) == frozenset()
    kappa = 0.5
    theta = np.eye(3)
    theta[0, 1] = theta[1, 0] = 0.49 * kappa
    theta[0, 2] = theta[2, 0] = 0.51 * kappa
    assert L.threshold_edges(theta, kappa) == frozenset({(0, 2)})
    # normalization by the diagonal
    theta[0, 0] = 4.0
    assert L.threshold_edges(theta, kappa) == frozenset()


def test_degenerate_single_node():
    one = M.GgmModel.from_precision([[2.0]])
    for alg in L.ALGORITHMS:
        est = L.learn(one, alg, L.LearnerConfig(kappa=1.0, d=0))
        assert est.edge_set == frozenset() and est.theta_hat[0, 0] == pytest.approx(2.0)


def test_config_validation():
    with pytest.raises(BadParams):
        L.LearnerConfig(nu=-1.0)
    with pytest.raises(BadParams):
        L.LearnerConfig(gamma=0.0)
    with pytest.raises(BadParams):
        L.LearnerConfig().greedy_nu()
    assert L.LearnerConfig(kappa=0.5, d=1).greedy_steps() == int(np.ceil(64 * np.log(16.0))) + 1
