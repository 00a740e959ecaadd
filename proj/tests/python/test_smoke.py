"""Smoke tests for the python bindings: a few closed forms end to end."""

import math

import numpy as np
import pytest

import tclab


@pytest.fixture(scope="module")
def pair_chain():
    q = np.array([[-2.0, 1.0], [1.0, -2.0]])
    return tclab.build_chain(q, np.ones(2))


@pytest.fixture(scope="module")
def first_state(pair_chain):
    return tclab.chain_measure(np.array([1.0, 0.0]))


def test_build_rejects_conservative_chains():
    with pytest.raises(tclab.TclabError):
        tclab.build_chain(np.zeros((2, 2)), np.ones(2))


def test_green_matrix(pair_chain):
    op, kernel = tclab.resolvent_kernel(pair_chain, 0.0)
    assert np.allclose(op, np.array([[2, 1], [1, 2]]) / 3.0, atol=1e-13)
    assert np.allclose(op, kernel)  # uniform reference measure


def test_resolvent_formula(pair_chain, first_state):
    u = np.ones(2)
    for alpha in (0.0, 1.0, 4.0):
        got = tclab.timechanged_resolvent(pair_chain, first_state, alpha, u)
        expect = np.array([2.0, 1.0]) / (3.0 + 2.0 * alpha)
        assert np.allclose(got, expect, atol=1e-12)


def test_trace_generator_and_semigroup(pair_chain, first_state):
    tg = tclab.trace_generator(pair_chain, first_state)
    assert tg.matrix[0, 0] == pytest.approx(-1.5, abs=1e-12)
    got = tclab.semigroup_apply(pair_chain, first_state, 1.0, np.array([1.0, 0.0]))
    assert got[0] == pytest.approx(math.exp(-1.5), abs=1e-12)
    assert got[1] == pytest.approx(0.5 * math.exp(-1.5), abs=1e-12)


def test_hitting_and_phi(pair_chain, first_state):
    hit = tclab.hitting_apply(pair_chain, first_state, np.array([1.0, 0.0]))
    assert np.allclose(hit, [1.0, 0.5], atol=1e-13)
    phi = tclab.phi_A(pair_chain, first_state)
    assert np.allclose(phi, [1.0, 1.0 / 3.0], atol=1e-13)


def test_diffusion_potential_and_kato():
    model = tclab.make_diffusion(500)
    leb = tclab.lebesgue_measure(model)
    grid = np.asarray(model.grid)
    g1 = tclab.potential_apply(model, leb, 0.0, np.ones(500))
    assert np.abs(g1 - grid * (1.0 - grid)).max() < 1e-10
    assert tclab.is_green_kato(model, leb)["kato"]
    delta = tclab.diffusion_measure([(0.5, 1.0)])
    assert tclab.is_green_kato(model, delta)["sup"] == pytest.approx(0.5)


def test_monte_carlo_agrees_with_closed_form(pair_chain, first_state):
    est = tclab.mc_semigroup(
        pair_chain, first_state, 1.0, np.array([1.0, 0.0]), 1, n_paths=30000, seed=11
    )
    z = (est["value"] - 0.5 * math.exp(-1.5)) / est["std_error"]
    assert abs(z) <= 4.0
    rerun = tclab.mc_semigroup(
        pair_chain, first_state, 1.0, np.array([1.0, 0.0]), 1, n_paths=30000, seed=11, workers=3
    )
    assert rerun["value"] == est["value"]  # reproducible across worker counts


def test_exact_fdd(pair_chain, first_state):
    ind = np.array([1.0, 0.0])
    got = tclab.exact_fdd(pair_chain, first_state, first_state, [1.0], [ind, ind])
    assert got == pytest.approx(math.exp(-1.5), abs=1e-12)
