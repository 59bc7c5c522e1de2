import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from threshgraph.core import NotPositiveDefiniteError, edge_set, sample_covariance
from threshgraph.simulate import (
    GraphSpec,
    build_spec,
    calibrate_h_diag,
    chain_precision,
    eta,
    eta_product_form,
    latent_spec,
    marginal_precision,
    marginal_precision_by_inversion,
    sample_mvn,
    small_world_precision,
)


# observed graphs

@settings(max_examples=60, deadline=None)
@given(st.integers(5, 40), st.sampled_from([2, 4]), st.floats(0, 1), st.integers(0, 10**6))
def test_small_world_edge_count_and_pd(p, k, beta, seed):
    if k >= p:
        return
    th = small_world_precision(p, k, beta, 1.0, seed=seed)
    assert len(edge_set(th, 0.0)) == p * k // 2
    assert np.linalg.eigvalsh(th)[0] >= 0.1 - 1e-10
    off = th[~np.eye(p, dtype=bool)]
    assert set(np.unique(off)) <= {0.0, 1.0}


def test_small_world_beta_zero_is_ring():
    th = small_world_precision(10, 2, 0.0, seed=123)
    assert edge_set(th, 0.0).edges == {(i, i + 1) for i in range(9)} | {(0, 9)}


def test_small_world_frozen_seed7(frozen):
    th = small_world_precision(30, 2, 0.1, 1.0, seed=7)
    assert sorted(map(list, edge_set(th, 0.0))) == frozen["small_world_p30_k2_b01_seed7"]


def test_small_world_errors():
    with pytest.raises(ValueError):
        small_world_precision(4, 4)
    with pytest.raises(ValueError):
        small_world_precision(10, 3)


def test_chain_examples():
    assert edge_set(chain_precision(2), 0.0).edges == {(0, 1)}
    th = chain_precision(5, weight=0.7, margin=0.1)
    assert edge_set(th, 0.0).edges == {(i, i + 1) for i in range(4)}
    # diagonal equals the closed-form spectral bound plus margin
    assert th[0, 0] == pytest.approx(2 * 0.7 * math.cos(math.pi / 6) + 0.1)
    assert np.linalg.eigvalsh(th)[0] == pytest.approx(0.1, abs=1e-12)
    with pytest.raises(ValueError):
        chain_precision(1)


# latent augmentation

def test_two_by_two_worked_case():
    spec = latent_spec(2 * np.eye(2), p_h=1, oh_magnitude=1.0, h_diag=2.0)
    np.testing.assert_allclose(marginal_precision(spec), [[1.5, -0.5], [-0.5, 1.5]], atol=1e-15)
    assert spec.eta == pytest.approx(0.25, abs=1e-15)
    assert eta_product_form(spec) == pytest.approx(0.25, abs=1e-15)
    np.testing.assert_allclose(spec.sigma_o, [[0.75, 0.25], [0.25, 0.75]], atol=1e-15)
    assert spec.diagnostics["rank_l"] == 1


def test_no_hidden_nodes():
    th = small_world_precision(12, seed=2)
    spec = latent_spec(th, p_h=0)
    assert spec.eta == 0.0 and spec.diagnostics["rank_l"] == 0
    np.testing.assert_allclose(spec.sigma_o, np.linalg.inv(th), atol=1e-12)


def test_zero_magnitude_is_no_confounding():
    th = small_world_precision(12, seed=2)
    spec = latent_spec(th, p_h=4, oh_magnitude=0.0, h_diag=1.0)
    assert spec.eta == 0.0
    np.testing.assert_allclose(marginal_precision(spec), th, atol=0)
    np.testing.assert_allclose(spec.sigma_o, np.linalg.inv(th), atol=1e-12)


def test_h_diag_must_be_positive():
    with pytest.raises(ValueError):
        latent_spec(np.eye(3), p_h=1, h_diag=0.0)
    with pytest.raises(ValueError):
        latent_spec(np.eye(3), p_h=1, h_diag=-1.0)


def test_build_spec_rejects_non_pd_joint():
    with pytest.raises(NotPositiveDefiniteError):
        build_spec(np.eye(2), np.ones((2, 1)), [[0.5]])


def test_marginal_matches_inversion_seeded_small():
    th = small_world_precision(4, 2, 0.3, seed=9)
    spec = latent_spec(th, p_h=2, oh_magnitude=0.4, oh_sparsity=0.25,
                       h_offdiag_magnitude=0.2, seed=9)
    np.testing.assert_allclose(marginal_precision(spec), marginal_precision_by_inversion(spec),
                               rtol=0, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 8), st.integers(0, 4), st.floats(0.05, 0.6), st.floats(0, 1),
       st.integers(0, 10**6))
def test_spec_invariants(p_o, p_h, oh, frac, seed):
    spec = latent_spec(small_world_precision(p_o, seed=seed), p_h=p_h, oh_magnitude=oh,
                       oh_sparsity=frac, h_offdiag_magnitude=0.1, seed=seed)
    assert np.linalg.eigvalsh(spec.full_theta())[0] > 0
    assert np.linalg.eigvalsh(spec.sigma_o)[0] > 0
    np.testing.assert_allclose(np.linalg.inv(spec.sigma_o), marginal_precision(spec), atol=1e-10)
    assert spec.eta >= 0
    assert abs(eta(spec) - eta_product_form(spec)) <= 1e-10


def test_calibrated_h_diag_meets_target():
    th = small_world_precision(30, seed=0)
    spec = latent_spec(th, p_h=20, oh_magnitude=0.2, seed=0)
    h = spec.knobs["h_diag"]
    target = 0.5 * np.linalg.eigvalsh(th)[0]
    assert np.linalg.eigvalsh(marginal_precision(spec))[0] >= target - 1e-12
    below = latent_spec(th, p_h=20, oh_magnitude=0.2, h_diag=h * (1 - 1e-6), seed=0)
    assert np.linalg.eigvalsh(marginal_precision(below))[0] < target
    assert calibrate_h_diag(th, np.zeros((30, 0))) == 1.0
    assert calibrate_h_diag(th, np.zeros((30, 2))) == 1.0


def test_fully_sparsified_coupling():
    spec = latent_spec(small_world_precision(3, seed=1), p_h=1, oh_sparsity=1.0, seed=1)
    assert spec.eta == 0.0 and not np.any(spec.theta_oh)


def test_base_spec_frozen(frozen):
    spec = latent_spec(small_world_precision(30, seed=0), p_h=20, oh_magnitude=0.2, seed=0)
    assert spec.eta == pytest.approx(frozen["base_spec_eta"], rel=1e-10)
    assert spec.knobs["h_diag"] == pytest.approx(frozen["base_spec_h_diag"], rel=1e-8)
    assert spec.knobs["diagonal_raise"] == 0.0


# knob monotonicity

def _etas(seed, knob, values, **fixed):
    th = small_world_precision(30, seed=seed, weight=fixed.pop("weight", 1.0))
    base = dict(p_h=20, oh_magnitude=0.2, h_diag=25.0, seed=seed)
    base.update(fixed)
    specs = [latent_spec(th, **{**base, knob: v}) for v in values]
    assert all(s.knobs["diagonal_raise"] == 0.0 for s in specs)
    return [s.eta for s in specs]


@pytest.mark.parametrize("seed", range(5))
def test_eta_increases_with_p_h(seed):
    e = _etas(seed, "p_h", [5, 10, 20, 40], h_diag=12.5)
    assert all(a < b for a, b in zip(e, e[1:]))


@pytest.mark.parametrize("seed", range(5))
def test_eta_increases_with_oh_magnitude(seed):
    e = _etas(seed, "oh_magnitude", [0.1, 0.2, 0.4])
    assert all(a < b for a, b in zip(e, e[1:]))


@pytest.mark.parametrize("seed", range(5))
def test_eta_decreases_with_h_diag(seed):
    e = _etas(seed, "h_diag", [1.0, 2.0, 4.0], p_h=5, oh_magnitude=0.1)
    assert all(a > b for a, b in zip(e, e[1:]))


@pytest.mark.parametrize("seed", range(5))
def test_eta_grows_with_oh_density_for_negative_weights(seed):
    # With nonpositive edge weights theta_o is an M-matrix and eta is
    # entrywise monotone in theta_oh; zeroed patterns are nested.
    e = _etas(seed, "oh_sparsity", [0.75, 0.5, 0.25, 0.0], weight=-1.0,
              oh_magnitude=0.1, h_diag=200.0)
    assert all(a < b for a, b in zip(e, e[1:]))


def test_oh_sparsity_patterns_nested():
    th = small_world_precision(10, seed=4)
    masks = [latent_spec(th, p_h=3, oh_sparsity=f, h_diag=50.0, seed=4).theta_oh != 0
             for f in (0.0, 0.3, 0.6, 0.9)]
    for a, b in zip(masks, masks[1:]):
        assert np.all(a[b])
        assert b.sum() < a.sum()


# sampling

def test_sample_deterministic():
    sig = latent_spec(small_world_precision(8, seed=1), p_h=2, seed=1).sigma_o
    a = sample_mvn(sig, 50, seed=4)
    b = sample_mvn(sig, 50, seed=4)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, sample_mvn(sig, 50, seed=5))


def test_sample_identity_covariance():
    x = sample_mvn(np.eye(4), 10_000, seed=3)
    assert np.abs(np.asarray(sample_covariance(x)) - np.eye(4)).max() < 0.1


def test_sample_single_row_and_errors():
    x = sample_mvn(np.eye(3), 1, seed=0)
    assert x.shape == (1, 3) and np.all(np.isfinite(x))
    with pytest.raises(ValueError):
        sample_mvn(np.eye(3), 0, seed=0)
    with pytest.raises(NotPositiveDefiniteError):
        sample_mvn(np.array([[1.0, 2.0], [2.0, 1.0]]), 5, seed=0)


def test_json_round_trip():
    spec = latent_spec(small_world_precision(6, seed=3), p_h=2, oh_sparsity=0.5, seed=3)
    back = GraphSpec.from_json(spec.to_json())
    for name in ("theta_o", "theta_oh", "theta_h", "sigma_o"):
        np.testing.assert_array_equal(getattr(back, name), getattr(spec, name))
    assert back.eta == spec.eta and back.knobs == spec.knobs and back.seed == 3
    assert back.diagnostics == spec.diagnostics
