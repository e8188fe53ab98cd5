import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fd_gradient, naive_loss, naive_ro_step
from relretro.core import (
    RelationalOperator,
    RetrofitConfig,
    assemble_hessian,
    compute_centroids,
    compute_loss,
    derive_params,
    loss_gradient,
)
from relretro.relations import RelationGroup
from relretro.synthetic import convex_config, random_instance

seeds = st.integers(0, 2**32 - 1)


def setup(seed, n_max=10, dim_max=4, convex=True, mode="RO"):
    rng = np.random.default_rng(seed)
    n, dim = int(rng.integers(2, n_max + 1)), int(rng.integers(1, dim_max + 1))
    inst = random_instance(rng, n, dim, n_categories=int(rng.integers(1, 4)), self_group=bool(rng.random() < 0.3),
                           zero_rows=int(rng.integers(0, 2)))
    cfg = RetrofitConfig(alpha=1.0, beta=float(rng.uniform(0, 2)), gamma=float(rng.uniform(0, 3)),
                         delta=float(rng.uniform(0, 3)), mode=mode)
    if convex:
        cfg = convex_config(inst, cfg)
    return rng, inst, derive_params(cfg, inst.n, inst.groups)


def test_centroid_examples():
    W0 = np.array([[1.0, 0.0], [0.0, 1.0], [4.0, 4.0], [0.0, 0.0]])
    c = compute_centroids(W0, [[0, 1], [2], [3]])
    np.testing.assert_allclose(c, [[0.5, 0.5], [0.5, 0.5], [4, 4], [0, 0]])


def test_loss_at_origin_is_zero():
    rng, inst, _ = setup(3)
    p = derive_params(RetrofitConfig(alpha=1, beta=0, gamma=0, delta=0), inst.n, inst.groups)
    assert compute_loss(inst.W0, inst.W0, p, inst.categories, inst.groups) == 0.0


def test_loss_single_shift():
    W0 = np.zeros((2, 3))
    W = W0.copy()
    W[0, 1] = 1.0
    g = RelationGroup("a→b", "a", "b", np.array([[0, 1]]))
    p = derive_params(RetrofitConfig(alpha=1, beta=0, gamma=0, delta=0), 2, [g])
    assert compute_loss(W, W0, p, [[0], [1]], [g]) == 1.0


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_loss_matches_scalar_resummation(seed):
    rng, inst, p = setup(seed, convex=False)
    W = rng.normal(size=inst.W0.shape)
    expected = naive_loss(W, inst.W0, p, inst.categories, inst.groups)
    assert compute_loss(W, inst.W0, p, inst.categories, inst.groups) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_gradient_matches_finite_differences(seed):
    rng, inst, p = setup(seed)
    W = rng.normal(size=inst.W0.shape)
    grad = loss_gradient(W, inst.W0, p, inst.categories, inst.groups)
    fd = fd_gradient(lambda X: compute_loss(X, inst.W0, p, inst.categories, inst.groups), W)
    assert np.max(np.abs(grad - fd)) / max(1.0, np.max(np.abs(fd))) < 1e-4


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_shortcut_equals_enumeration(seed):
    rng, inst, p = setup(seed, convex=False)
    W = rng.normal(size=inst.W0.shape)
    _, num, den = naive_ro_step(W, inst.W0, p, inst.categories, inst.groups)
    op = RelationalOperator(p, inst.groups)
    c = compute_centroids(inst.W0, inst.categories)
    np.testing.assert_allclose(op.numerator(W, inst.W0, c), num, rtol=0, atol=1e-9)
    np.testing.assert_allclose(op.denominator(), den, rtol=0, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_full_hessian_matches_finite_differences(seed):
    rng, inst, p = setup(seed, n_max=6, dim_max=2, convex=False)
    H = assemble_hessian(p, inst.groups, inst.W0.shape[1], part="full")
    W = rng.normal(size=inst.W0.shape)

    def grad_flat(x):
        return loss_gradient(x.reshape(W.shape), inst.W0, p, inst.categories, inst.groups).ravel()

    h = 1e-5
    cols = []
    for k in range(W.size):
        e = np.zeros(W.size)
        e[k] = h
        cols.append((grad_flat(W.ravel() + e) - grad_flat(W.ravel() - e)) / (2 * h))
    np.testing.assert_allclose(H, np.array(cols).T, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_hessian_psd_when_convex(seed):
    _, inst, p = setup(seed, n_max=10, dim_max=4)
    for part in ("hat", "full"):
        H = assemble_hessian(p, inst.groups, inst.W0.shape[1], part=part)
        assert np.linalg.eigvalsh(H).min() >= -1e-8


def test_hessian_negative_when_repulsion_dominates():
    # one group, 3 sources x 3 targets, a single edge: many unrelated pairs
    g = RelationGroup("a→b", "a", "b", np.array([[0, 3], [1, 4], [2, 5]]))
    p = derive_params(RetrofitConfig(alpha=0.01, delta=3.0, gamma=0.0, mode="RO"), 6, [g])
    assert np.linalg.eigvalsh(assemble_hessian(p, [g], 2)).min() < 0


def test_unknown_hessian_part():
    g = RelationGroup("a→b", "a", "b", np.array([[0, 1]]))
    with pytest.raises(ValueError):
        assemble_hessian(derive_params(RetrofitConfig(), 2, [g]), [g], 1, part="nope")
