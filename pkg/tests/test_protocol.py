import math

import numpy as np
import pytest

from unitary_inversion import protocol as pr
from unitary_inversion.tensor import (
    basis_state,
    haar_unitary,
    random_state,
    reduced_density_matrix,
)

GATE = pr.default_circuit("gate")
MATRIX = pr.default_circuit("matrix")
TRANSFER = np.array([[-1.0, -1.0], [1.0, -2.0]]) / math.sqrt(3.0)


def label(bits):
    return basis_state((2,) * len(bits), bits).amplitudes


def test_cg_angle_values():
    assert math.cos(pr.cg_angle(1.0, 0.5).theta) == pytest.approx(math.sqrt(2 / 3), abs=1e-14)
    assert math.cos(pr.cg_angle(1.0, -0.5).theta) == pytest.approx(math.sqrt(1 / 3), abs=1e-14)
    assert math.cos(pr.cg_angle(0.5, 0.0).theta) == pytest.approx(math.sqrt(1 / 2), abs=1e-14)


def test_cg_angle_validation():
    with pytest.raises(ValueError):
        pr.cg_angle(0.5, 1.5)
    with pytest.raises(ValueError):
        pr.cg_angle(0.3, 0.0)


def test_pair_coupling_circuit_unitary():
    for build in (pr.build_vcg2, pr.build_vcg2_matrix):
        v = build().entries
        assert np.abs(v.conj().T @ v - np.eye(8)).max() <= 1e-12


def test_pair_coupling_labels():
    # spin-aligned pairs map onto the stretched labels; the antisymmetric
    # pair lands on the j=0 label (third register returns to zero)
    v = pr.build_vcg2().entries
    assert np.abs(v @ label((1, 1, 0)) - label((1, 1, 0))).max() <= 1e-12
    assert np.abs(v @ label((0, 0, 0)) - label((1, 0, 0))).max() <= 1e-12
    singlet_in = np.kron(pr.SINGLET, [1.0, 0.0])
    out = v @ singlet_in
    assert abs(abs(out[0]) - 1.0) <= 1e-12  # |0>|00> up to sign
    assert np.abs(out[1:]).max() <= 1e-12


def test_pair_coupling_symmetric_combination():
    v = pr.build_vcg2().entries
    plus = (label((0, 1, 0)) + label((1, 0, 0))) / math.sqrt(2)
    out = v @ plus
    assert abs(abs(out[int("101", 2)]) - 1.0) <= 1e-12  # |1>|01> label


def test_triple_coupling_defining_relations():
    c, s = math.sqrt(2 / 3), math.sqrt(1 / 3)
    relations = [
        (label((0, 0, 1, 0)), c * label((1, 1, 0, 0)) - s * label((1, 0, 1, 1))),
        (label((0, 0, 0, 0)), s * label((1, 0, 1, 0)) - c * label((1, 0, 0, 1))),
        (label((0, 0, 1, 1)), label((0, 0, 0, 1))),
        (label((0, 0, 0, 1)), label((0, 0, 0, 0))),
    ]
    for build in (pr.build_vcg3, pr.build_vcg3_matrix):
        vdg = build().entries.conj().T
        for state, expected in relations:
            assert np.abs(vdg @ state - expected).max() <= 1e-12


def test_triple_coupling_unitary():
    for build in (pr.build_vcg3, pr.build_vcg3_matrix):
        v = build().entries
        assert np.abs(v.conj().T @ v - np.eye(16)).max() <= 1e-12


def test_protocol_unitaries():
    for circ in (GATE, MATRIX):
        for v in (circ.v1, circ.v2):
            assert np.abs(v.entries.conj().T @ v.entries - np.eye(128)).max() <= 1e-12


def test_inversion_identity_input():
    state, fid = pr.run_inversion(np.eye(2), np.array([1.0, 0.0]), GATE)
    assert fid >= 1 - 1e-12
    expected = pr.expected_output(np.eye(2), np.array([1.0, 0.0]))
    # the exact output carries the overall minus sign baked into expected_output
    assert abs(np.vdot(expected.amplitudes, state.amplitudes) - 1.0) <= 1e-10


def test_inversion_exact_over_haar_samples():
    rng = np.random.default_rng(99)
    for circ in (GATE, MATRIX):
        for _ in range(25):
            u = haar_unitary(2, rng)
            phi = random_state((2,), rng)
            state, fid = pr.run_inversion(u, phi, circ)
            assert fid >= 1 - 1e-10
            assert pr.ancilla_restoration(state) >= 1 - 1e-10


def test_inversion_output_phase_pinned_for_both_builds():
    rng = np.random.default_rng(5)
    u = haar_unitary(2, rng)
    phi = random_state((2,), rng)
    expected = pr.expected_output(u.entries, phi.amplitudes)
    for circ in (GATE, MATRIX):
        state, _ = pr.run_inversion(u, phi, circ)
        overlap = np.vdot(expected.amplitudes, state.amplitudes)
        assert abs(overlap - 1.0) <= 1e-10


def test_build_paths_agree_on_protocol_outputs():
    rng = np.random.default_rng(123)
    for _ in range(10):
        u = haar_unitary(2, rng)
        phi = random_state((2,), rng)
        a, fa = pr.run_inversion(u, phi, GATE)
        b, fb = pr.run_inversion(u, phi, MATRIX)
        assert abs(fa - fb) <= 1e-10
        assert abs(abs(np.vdot(a.amplitudes, b.amplitudes)) - 1.0) <= 1e-10


def test_third_wire_marginal_for_explicit_rotation():
    # u = exp(-i pi X / 2) = -iX lies in SU(2)
    u = np.array([[0.0, -1.0j], [-1.0j, 0.0]])
    phi = np.array([1.0, 0.0])
    state, fid = pr.run_inversion(u, phi, GATE)
    assert fid >= 1 - 1e-10
    rho = reduced_density_matrix(state, (2,))
    target = u.conj().T @ phi
    assert abs(np.real(target.conj() @ rho @ target) - 1.0) <= 1e-10


def test_non_special_unitary_rejected():
    with pytest.raises(ValueError):
        pr.run_inversion(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        pr.run_inversion(np.diag([1.0, 1.0j]), np.array([1.0, 0.0]))


def test_unnormalized_state_rejected():
    with pytest.raises(ValueError):
        pr.run_inversion(np.eye(2), np.array([1.0, 1.0]))


def test_transfer_matrix_matches_and_is_input_independent():
    rng = np.random.default_rng(2718)
    observed = []
    for _ in range(20):
        u = haar_unitary(2, rng)
        phi = random_state((2,), rng)
        g, residual = pr.empirical_transfer_matrix(u, phi, GATE)
        assert residual <= 1e-10
        assert np.abs(g - TRANSFER).max() <= 1e-10
        observed.append(g)
    stacked = np.stack(observed)
    assert np.abs(stacked - stacked[0]).max() <= 1e-10


def test_transfer_matrix_square_flips_first_basis_vector():
    g2 = TRANSFER @ TRANSFER
    assert np.abs(g2 - np.array([[0.0, 1.0], [-1.0, 1.0]])).max() <= 1e-12
    assert np.allclose(g2 @ np.array([1.0, 0.0]), np.array([0.0, -1.0]))


def test_catalytic_honest_run():
    rng = np.random.default_rng(7)
    for _ in range(10):
        u = haar_unitary(2, rng)
        phi = random_state((2,), rng)
        catalyst = pr.honest_catalyst(u)
        state, cat_fid, target_fid = pr.run_catalytic(u, phi, catalyst, GATE)
        assert cat_fid >= 1 - 1e-10
        assert target_fid >= 1 - 1e-10
        assert pr.ancilla_restoration(state) >= 1 - 1e-10


def test_extra_call_erases_catalyst():
    rng = np.random.default_rng(11)
    for _ in range(10):
        u = haar_unitary(2, rng).entries
        erased = np.kron(np.eye(2), u) @ np.kron(u, np.eye(2)) @ pr.SINGLET
        assert np.abs(erased - pr.SINGLET).max() <= 1e-12


def test_mismatched_catalyst_fails():
    rng = np.random.default_rng(13)
    below = 0
    trials = 100
    for _ in range(trials):
        u = haar_unitary(2, rng)
        v = haar_unitary(2, rng)
        phi = random_state((2,), rng)
        _, _, target_fid = pr.run_catalytic(u, phi, pr.honest_catalyst(v), GATE)
        if target_fid < 1 - 1e-3:
            below += 1
    assert below >= 95


def test_catalyst_validation():
    with pytest.raises(ValueError):
        pr.run_catalytic(np.eye(2), np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        pr.run_catalytic(
            np.eye(2), np.array([1.0, 0.0]), np.array([1.0, 1.0, 0.0, 0.0])
        )


def test_wire_roles():
    roles = GATE.wire_roles
    assert roles["input"] == (0,)
    assert roles["singlet"] == (1, 2)
    assert roles["ancilla"] == (3, 4, 5, 6)
