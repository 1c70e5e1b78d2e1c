import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import channel_mixer.channels as ch
from channel_mixer.circuits import INPUT_STATES, build_total_mm_circuit, channel_from_circuit
from channel_mixer.divisibility import (Verdict, apply_transfer, batch_intermediate_choi_eigs,
                                        chi_from_transfer, choi_from_transfer, cp_verdict,
                                        intermediate_report, intermediate_transfer, is_markovian,
                                        markovianity_scan, process_fidelity, transfer_from_chi,
                                        transfer_from_outputs, transfer_of_family)
from channel_mixer.errors import NonPositiveInput

from oracles import bell_projector, charpoly_eigenvalues, choi_direct, kraus_apply, mm_total_min_eig

prob_vectors = st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3)


def random_state(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_identity_chi_gives_identity_transfer():
    np.testing.assert_allclose(transfer_from_chi(np.diag([1, 0, 0, 0])), np.eye(4))


def test_transfer_action_matches_kraus_sum():
    rng = np.random.default_rng(5)
    t = 0.7
    probs = ch.MARKOV_X.probs(t)
    f = transfer_of_family(ch.MARKOV_X, t)
    for _ in range(10):
        rho = random_state(rng)
        np.testing.assert_allclose(apply_transfer(f, rho), kraus_apply(probs, rho), atol=1e-14)
        # Bloch map (x, y, z) -> (x, e^-t y, e^-t z)
        out = apply_transfer(f, rho)
        for s, factor in zip(ch.PAULIS[1:], (1, np.exp(-t), np.exp(-t))):
            assert np.trace(s @ out).real == pytest.approx(factor * np.trace(s @ rho).real, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_chi_transfer_round_trip(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    chi = a + a.conj().T
    np.testing.assert_allclose(chi_from_transfer(transfer_from_chi(chi)), chi, atol=1e-10)


def test_transfer_from_outputs_matches_chi():
    p = 0.73
    f = transfer_from_outputs(channel_from_circuit(build_total_mm_circuit(p)))
    np.testing.assert_allclose(f, transfer_from_chi(np.diag([p, (1 - p) / 2, (1 - p) / 2, 0])),
                               atol=1e-14)


@pytest.mark.parametrize("name", sorted(ch.FAMILIES))
def test_trace_preservation(name):
    f = transfer_of_family(ch.FAMILIES[name], 1.3)
    np.testing.assert_allclose(f[0] + f[3], [1, 0, 0, 1], atol=1e-9)


def test_intermediate_examples():
    f = transfer_of_family(ch.MIXED_MM, 1.1)
    np.testing.assert_allclose(intermediate_transfer(f, f).transfer, np.eye(4), atol=1e-12)
    s, t = 0.5, 1.7
    im = intermediate_transfer(transfer_of_family(ch.MARKOV_X, t), transfer_of_family(ch.MARKOV_X, s))
    assert not im.singular
    rho = random_state(np.random.default_rng(1))
    out = apply_transfer(im.transfer, rho)
    for sig, factor in zip(ch.PAULIS[1:], (1, np.exp(-(t - s)), np.exp(-(t - s)))):
        assert np.trace(sig @ out).real == pytest.approx(factor * np.trace(sig @ rho).real, abs=1e-12)
    assert intermediate_transfer(transfer_of_family(ch.NM_X2, 1.0),
                                 transfer_of_family(ch.NM_X2, np.pi / 4)).singular


def test_choi_of_identity_is_bell_projector():
    w = choi_from_transfer(np.eye(4))
    np.testing.assert_allclose(w, bell_projector(), atol=1e-15)
    np.testing.assert_allclose(hermitian_eigs(w), [0, 0, 0, 1], atol=1e-14)


def hermitian_eigs(w):
    return np.linalg.eigvalsh(w)


@settings(max_examples=40, deadline=None)
@given(prob_vectors)
def test_choi_matches_direct_construction_and_probs(raw):
    probs = np.array(raw) / sum(raw)
    w = choi_from_transfer(transfer_from_chi(np.diag(probs)))
    np.testing.assert_allclose(w, choi_direct(lambda e: kraus_apply(probs, e)), atol=1e-14)
    np.testing.assert_allclose(hermitian_eigs(w), np.sort(probs), atol=1e-10)


def test_choi_eigenvalues_equal_probs_random_families():
    rng = np.random.default_rng(9)
    names = sorted(ch.FAMILIES)
    for _ in range(200):
        fam = ch.FAMILIES[names[rng.integers(len(names))]]
        t = rng.uniform(0, 3.7)
        w = choi_from_transfer(transfer_of_family(fam, t))
        np.testing.assert_allclose(hermitian_eigs(w), np.sort(fam.probs(t)), atol=1e-10)


def test_choi_batched_equals_single():
    fs = np.stack([transfer_of_family(ch.MIXED_MM, t) for t in (0.2, 1.0, 2.0)])
    np.testing.assert_allclose(choi_from_transfer(fs), [choi_from_transfer(f) for f in fs])


def test_mixed_mm_intermediate_min_eig_spot_values():
    f_s = transfer_of_family(ch.MIXED_MM, 0.5)
    w = choi_from_transfer(intermediate_transfer(transfer_of_family(ch.MIXED_MM, 3.8), f_s).transfer)
    lam = charpoly_eigenvalues(w)
    assert lam[0] == pytest.approx(mm_total_min_eig(0.5, 3.8), abs=1e-12)
    assert lam[0] == pytest.approx(-0.0590, abs=5e-5)
    assert hermitian_eigs(w)[0] == pytest.approx(lam[0], abs=1e-12)


def test_cp_verdict_examples():
    min_eig, tn, verdict = cp_verdict(bell_projector())
    assert min_eig == pytest.approx(0, abs=1e-15) and tn == pytest.approx(1)
    assert verdict is Verdict.CP
    r = intermediate_report(transfer_of_family(ch.MIXED_MM, 2.0), transfer_of_family(ch.MIXED_MM, 0.5),
                            0.5, 2.0)
    assert r.verdict is Verdict.NOT_CP and r.min_eig < -0.04
    for t in np.linspace(0.6, 3.7, 20):
        r = intermediate_report(transfer_of_family(ch.MIXED_NM_REPLICA, t),
                                transfer_of_family(ch.MIXED_NM_REPLICA, 0.5), 0.5, t)
        assert r.verdict is Verdict.CP and abs(r.min_eig) < 1e-9


def test_singular_reference_flagged():
    r = intermediate_report(transfer_of_family(ch.NM_X2, 1.0), transfer_of_family(ch.NM_X2, np.pi / 4),
                            np.pi / 4, 1.0)
    assert r.singular and r.verdict is Verdict.SINGULAR


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(ch.FAMILIES)), st.floats(0, 3.6), st.floats(0, 3.6))
def test_composition_law(name, s, dt):
    fam = ch.FAMILIES[name]
    t = min(s + dt, 3.7)
    f_s = transfer_of_family(fam, s)
    im = intermediate_transfer(transfer_of_family(fam, t), f_s)
    if not im.singular:
        np.testing.assert_allclose(im.transfer @ f_s, transfer_of_family(fam, t), atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(ch.FAMILIES)), st.floats(0, 3.6), st.floats(0, 3.6))
def test_cp_implies_unit_trace_norm(name, s, dt):
    fam = ch.FAMILIES[name]
    t = min(s + dt, 3.7)
    r = intermediate_report(transfer_of_family(fam, t), transfer_of_family(fam, s), s, t)
    if r.min_eig >= 0 and not r.singular:
        assert abs(r.trace_norm - 1) <= 1e-8


def test_fidelity_examples():
    chi = np.diag([0.5, 0.3, 0.2, 0])
    assert process_fidelity(chi, chi) == pytest.approx(1)
    assert process_fidelity(np.diag([1, 0, 0, 0]), np.diag([0, 1, 0, 0])) == pytest.approx(0, abs=1e-12)
    with pytest.raises(NonPositiveInput):
        process_fidelity(np.diag([1.1, -0.1, 0, 0]), chi)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_fidelity_bounds_and_symmetry(seed):
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(2):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = a @ a.conj().T
        mats.append(m / np.trace(m))
    f = process_fidelity(*mats)
    assert -1e-12 <= f <= 1 + 1e-9
    assert f == pytest.approx(process_fidelity(*mats[::-1]), abs=1e-8)


def test_scan_accepts_callable_and_family():
    grid = [1.0, 2.0]
    a = markovianity_scan(ch.MIXED_MM, 0.5, grid)
    b = markovianity_scan(lambda t: ch.chi_ideal(ch.MIXED_MM, t), 0.5, grid)
    assert [r.min_eig for r in a] == pytest.approx([r.min_eig for r in b])
    assert not is_markovian(a)
    with pytest.raises(ValueError):
        markovianity_scan(ch.MIXED_MM, 0.5, [0.2])


def test_batch_eigs_match_pairwise_reports():
    ts = [transfer_of_family(ch.MIXED_MM, t) for t in (1.0, 2.5)]
    ss = [transfer_of_family(ch.MIXED_MM, s) for s in (0.4, 0.5, 0.6)]
    eigs, singular = batch_intermediate_choi_eigs(np.stack(ts), np.stack(ss))
    assert eigs.shape == (2, 3, 4) and not singular.any()
    for i, ft in enumerate(ts):
        for j, fs in enumerate(ss):
            assert eigs[i, j, 0] == pytest.approx(intermediate_report(ft, fs, 0, 1).min_eig, abs=1e-12)
