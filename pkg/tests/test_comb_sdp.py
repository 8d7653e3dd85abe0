import numpy as np
import pytest

from unitary_inversion import comb_sdp as cs
from unitary_inversion import tensor
from unitary_inversion.sdp import SdpProblem, solve
from unitary_inversion.symmetric_group import (
    YoungDiagram,
    su_dim,
    tableau_count,
    young_diagrams,
)


def constraint_residual(problem: SdpProblem, blocks: list[np.ndarray]) -> float:
    worst = 0.0
    for c in problem.constraints:
        value = sum(float(np.tensordot(m, blocks[b])) for b, m in c.coeffs.items())
        worst = max(worst, abs(value - c.rhs))
    return worst


def comb_blocks_in_problem_order(d: int, n: int, comb: cs.ReducedComb) -> list[np.ndarray]:
    return [comb.blocks[k] for k in cs.block_keys(d, n)]


def test_performance_blocks_single_row():
    blocks = cs.performance_blocks(3, 1)
    single = YoungDiagram((2,))
    m = su_dim(single, 3)
    assert blocks.omega[single].shape == (1, 1)
    assert abs(blocks.omega[single][0, 0] - 1.0 / (9 * m)) <= 1e-15


def test_performance_blocks_rank_one_and_trace():
    for d, n in ((2, 2), (2, 3), (3, 2)):
        blocks = cs.performance_blocks(d, n)
        for mu, omega in blocks.omega.items():
            eigs = np.linalg.eigvalsh(omega)
            assert eigs[0] >= -1e-10
            assert sum(e > 1e-10 for e in eigs) == 1
            expected_trace = tableau_count(mu) / (d * d * su_dim(mu, d))
            assert abs(np.trace(omega) - expected_trace) <= 1e-12


def test_evaluate_fidelity_zero_and_off_diagonal_invariance():
    d, n = 2, 2
    perf = cs.performance_blocks(d, n)
    zero = cs.ReducedComb(
        d,
        n,
        {
            (mu, nu): np.zeros(
                (tableau_count(mu) * tableau_count(nu),) * 2
            )
            for mu in young_diagrams(n + 1, d)
            for nu in young_diagrams(n + 1, d)
        },
    )
    assert cs.evaluate_fidelity(zero, perf) == 0.0
    bumped = {k: b.copy() for k, b in zero.blocks.items()}
    for (mu, nu), block in bumped.items():
        if mu != nu:
            block += 1.0
    assert cs.evaluate_fidelity(cs.ReducedComb(d, n, bumped), perf) == 0.0


def test_evaluate_fidelity_on_optimizer_output():
    d, n = 2, 3
    problem = cs.build_sequential_sdp(d, n)
    solution = solve(problem)
    comb = cs.solution_blocks_to_comb(d, n, solution.blocks)
    value = cs.evaluate_fidelity(comb, cs.performance_blocks(d, n))
    assert abs(value - 0.9330) <= 1e-3
    assert abs(value - solution.objective_value) <= 1e-10


def test_reduced_comb_validation():
    with pytest.raises(ValueError):
        cs.ReducedComb(2, 1, {})
    blocks = {
        (mu, nu): np.zeros((tableau_count(mu) * tableau_count(nu),) * 2)
        for mu in young_diagrams(2, 2)
        for nu in young_diagrams(2, 2)
    }
    blocks[(young_diagrams(2, 2)[0], young_diagrams(2, 2)[0])] = np.zeros((2, 2))
    with pytest.raises(ValueError):
        cs.ReducedComb(2, 1, blocks)


def test_reduce_identity_structure():
    d, n = 2, 1
    full = np.eye(d ** (2 * n + 2))
    comb = cs.reduce_comb(full, d, n)
    for (mu, nu), block in comb.blocks.items():
        m_mu, m_nu = su_dim(mu, d), su_dim(nu, d)
        expected = m_mu * m_nu * np.eye(block.shape[0])
        assert np.abs(block - expected).max() <= 1e-10


def test_reduce_round_trip_on_commutant_element():
    d, n = 2, 1
    rng = np.random.default_rng(8)
    # random symmetric element of the commutant via expansion with random blocks
    keys = cs.block_keys(d, n)
    blocks = {}
    for mu, nu in keys:
        size = tableau_count(mu) * tableau_count(nu)
        g = rng.standard_normal((size, size))
        blocks[(mu, nu)] = g + g.T
    comb = cs.ReducedComb(d, n, blocks)
    full = cs.expand_comb(comb)
    back = cs.reduce_comb(full, d, n)
    for key in keys:
        assert np.abs(back.blocks[key] - blocks[key]).max() <= 1e-8
    rebuilt = cs.expand_comb(back)
    assert np.abs(rebuilt - full).max() <= 1e-8


def test_reduce_rejects_unsymmetric_input():
    d, n = 2, 1
    rng = np.random.default_rng(9)
    g = rng.standard_normal((16, 16))
    with pytest.raises(ValueError):
        cs.reduce_comb(g + g.T, d, n)


def test_reduce_of_full_objective_matches_performance_blocks():
    for d, n in ((2, 1), (2, 2), (3, 1)):
        omega = cs.full_performance_operator(d, n)
        comb = cs.reduce_comb(omega, d, n)
        perf = cs.performance_blocks(d, n)
        for mu, block in perf.omega.items():
            scaled = su_dim(mu, d) ** 2 * block
            assert np.abs(comb.blocks[(mu, mu)] - scaled).max() <= 1e-10
        for mu in perf.omega:
            for nu in perf.omega:
                if mu != nu:
                    assert np.abs(comb.blocks[(mu, nu)]).max() <= 1e-10


def test_full_objective_trace_and_positivity():
    for d, n in ((2, 1), (2, 2), (3, 1)):
        omega = cs.full_performance_operator(d, n)
        assert np.abs(omega - omega.T).max() <= 1e-10
        assert np.linalg.eigvalsh(omega)[0] >= -1e-10
        expected = sum(
            tableau_count(mu) * su_dim(mu, d) for mu in young_diagrams(n + 1, d)
        ) / (d * d)
        assert abs(np.trace(omega) - expected) <= 1e-10
        assert abs(expected - float(d) ** (n - 1)) <= 1e-12


def test_maximally_mixed_comb_is_feasible_in_full_space():
    for d, n, mode in ((2, 1, "seq"), (2, 1, "par"), (2, 2, "seq"), (2, 2, "par")):
        problem = cs.build_full_sdp(d, n, mode)
        mixed = cs.maximally_mixed_comb(d, n)
        assert constraint_residual(problem, [mixed]) <= 1e-12
        assert abs(np.trace(mixed) - d ** (n + 1)) <= 1e-12


def test_wire_comb_is_feasible_in_full_space_sequential():
    # the pass-through comb: each slot output feeds the next slot input
    for d, n in ((2, 1), (2, 2)):
        dims = cs.full_register_dims(d, n)
        reg = cs.register_indices(n)
        bell = np.zeros(d * d)
        for i in range(d):
            bell[i * d + i] = 1.0
        pairs = [(reg["P"], reg["I"][0])]
        for k in range(n - 1):
            pairs.append((reg["O"][k], reg["I"][k + 1]))
        pairs.append((reg["O"][n - 1], reg["F"]))
        full = np.eye(d ** (2 * n + 2))
        for a, b in pairs:
            full = full @ tensor.embed_operator(np.outer(bell, bell), (a, b), dims).real
        problem = cs.build_full_sdp(d, n, "seq")
        assert constraint_residual(problem, [full]) <= 1e-12


def test_reduction_of_feasible_comb_satisfies_reduced_constraints():
    for d, n in ((2, 1), (2, 2)):
        mixed = cs.maximally_mixed_comb(d, n)
        comb = cs.reduce_comb(mixed, d, n)
        blocks = comb_blocks_in_problem_order(d, n, comb)
        for build in (cs.build_sequential_sdp, cs.build_parallel_sdp):
            problem = build(d, n)
            assert constraint_residual(problem, blocks) <= 1e-8


def test_sequential_reference_values():
    for d, n, ref in ((2, 1, 0.5000), (2, 4, 1.0000), (3, 2, 0.3333)):
        solution = solve(cs.build_sequential_sdp(d, n))
        assert solution.status == "optimal"
        assert abs(solution.objective_value - ref) <= 1e-3


def test_parallel_reference_values():
    for d, n, ref in ((2, 2, 0.6545), (2, 3, 0.7500), (3, 3, 0.4310)):
        solution = solve(cs.build_parallel_sdp(d, n))
        assert solution.status == "optimal"
        assert abs(solution.objective_value - ref) <= 1e-3


def test_full_space_cap():
    with pytest.raises(ValueError):
        cs.build_full_sdp(2, 5, "seq", dim_cap=256)
    with pytest.raises(ValueError):
        cs.build_full_sdp(2, 1, "other")


def test_reduced_svec_sizes():
    assert cs.reduced_svec_size(2, 1) == 4
    block_sizes = cs.reduced_block_dims(2, 4)
    assert sum(block_sizes) == (1 + 4 + 5) ** 2
    assert cs.reduced_svec_size(2, 4) == sum(s * (s + 1) // 2 for s in block_sizes)


def test_problem_json_has_schema_fields():
    import json

    problem = cs.build_parallel_sdp(2, 2)
    payload = json.loads(problem.to_json())
    assert payload["d"] == 2 and payload["n"] == 2 and payload["mode"] == "par"
    assert payload["block_dims"] == cs.reduced_block_dims(2, 2)
    first = payload["constraints"][0]
    assert "rhs" in first and "blocks" in first
    assert {"index", "coeff_upper_triangle"} == set(first["blocks"][0])
