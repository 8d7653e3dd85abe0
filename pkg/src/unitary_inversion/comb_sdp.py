"""Symmetry-reduced and full-space SDPs for optimal deterministic unitary inversion.

A comb with n slots over local dimension d is scored by the average-case
channel fidelity against the inverse of the unknown unitary.  Group
symmetry lets the comb's Choi matrix be replaced by one real PSD block per
ordered pair of (n+1)-box Young diagrams; the constraints couple blocks
through 0/1 tableau-embedding matrices and the objective touches only the
diagonal pairs through rank-one performance blocks.

The full-space programs on d^(2(n+1))-dimensional Choi matrices are kept
as brute-force oracles for cross-validating the reduction at desk scale.

Register bookkeeping for the full space: global factor order is
[P, I_1..I_n, O_1..O_n, F].  The commutant machinery treats the group
(I_1, ..., I_n, F) and the group (P, O_1, ..., O_n) as (n+1)-fold tensor
factors, in those orders, so "last factor" lemmas apply to F and O_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import tensor
from .sdp import SdpConstraint, SdpProblem
from .symmetric_group import (
    YoungDiagram,
    cycle_permutation,
    embedding_matrix,
    matrix_unit,
    permutation_matrix,
    su_dim,
    tableau_count,
    young_diagrams,
)

FULL_SPACE_DIM_CAP = 4096
REDUCED_SVEC_CAP = 2000


@dataclass(frozen=True)
class PerformanceBlocks:
    """Rank-one objective blocks, one per diagram with n+1 boxes."""

    d: int
    n: int
    omega: dict[YoungDiagram, np.ndarray]


def performance_blocks(d: int, n: int) -> PerformanceBlocks:
    """Objective blocks [Omega_mu]_{ik,jl} = pi_{ik} pi_{jl} / (d^2 m_mu).

    pi is the orthogonal representation matrix of the long cycle on n+1
    letters, so each block is the outer product of its vectorization.  The
    cycle orientation (last letter to the front) is pinned by the Haar
    integral behind the objective: with the blocks' index convention, the
    pairing Tr(C^{mu mu} Omega_mu) must reproduce Tr(C Omega) on the full
    register space, and only this orientation does.
    """
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    cycle = cycle_permutation(n + 1)
    omega = {}
    for mu in young_diagrams(n + 1, d):
        pi = permutation_matrix(mu, cycle).T
        v = pi.reshape(-1)
        omega[mu] = np.outer(v, v) / (d * d * su_dim(mu, d))
    return PerformanceBlocks(d, n, omega)


@dataclass(frozen=True)
class ReducedComb:
    """Symmetry-reduced comb: one real block per ordered diagram pair.

    Block (mu, nu) has size d_mu*d_nu with row index (i, k): i runs over
    mu tableaux, k over nu tableaux, k fastest.
    """

    d: int
    n: int
    blocks: dict[tuple[YoungDiagram, YoungDiagram], np.ndarray]

    def __post_init__(self):
        shapes = set(young_diagrams(self.n + 1, self.d))
        for (mu, nu), mat in self.blocks.items():
            if mu not in shapes or nu not in shapes:
                raise ValueError(f"unexpected diagram pair {(mu.rows, nu.rows)}")
            size = tableau_count(mu) * tableau_count(nu)
            if mat.shape != (size, size):
                raise ValueError(
                    f"block {(mu.rows, nu.rows)} has shape {mat.shape}, expected {size}"
                )
        missing = {
            (mu, nu)
            for mu in shapes
            for nu in shapes
            if (mu, nu) not in self.blocks
        }
        if missing:
            raise ValueError(f"missing blocks for {sorted((m.rows, n_.rows) for m, n_ in missing)}")


def evaluate_fidelity(comb: ReducedComb, blocks: PerformanceBlocks) -> float:
    """Objective value sum_mu Tr(C^{mu mu} Omega_mu); off-diagonal pairs never enter."""
    if (comb.d, comb.n) != (blocks.d, blocks.n):
        raise ValueError("comb and performance blocks have mismatched (d, n)")
    total = 0.0
    for mu, omega in blocks.omega.items():
        total += float(np.tensordot(comb.blocks[(mu, mu)], omega))
    return total


def block_keys(d: int, n: int) -> list[tuple[YoungDiagram, YoungDiagram]]:
    shapes = young_diagrams(n + 1, d)
    return [(mu, nu) for mu in shapes for nu in shapes]


def reduced_block_dims(d: int, n: int) -> list[int]:
    return [tableau_count(mu) * tableau_count(nu) for mu, nu in block_keys(d, n)]


def reduced_svec_size(d: int, n: int) -> int:
    return sum(s * (s + 1) // 2 for s in reduced_block_dims(d, n))


def solution_blocks_to_comb(d: int, n: int, blocks: list[np.ndarray]) -> ReducedComb:
    keys = block_keys(d, n)
    return ReducedComb(d, n, {k: b for k, b in zip(keys, blocks)})


def _objective_list(d: int, n: int) -> list[np.ndarray]:
    perf = performance_blocks(d, n)
    out = []
    for mu, nu in block_keys(d, n):
        size = tableau_count(mu) * tableau_count(nu)
        out.append(perf.omega[mu].copy() if mu == nu else np.zeros((size, size)))
    return out


def _entry_rows(
    terms: list[tuple[float, np.ndarray, np.ndarray, int]],
    out_rows: int,
    out_cols: int,
    rhs_fn,
) -> list[SdpConstraint]:
    """Scalar equality rows from a matrix identity sum_t scale*(P x Q) C (P x Q)^T = RHS.

    ``terms`` lists (scale, P, Q, block_index); entries are generated over
    the upper triangle of the (out_rows*out_cols) output matrix after
    symmetrizing coefficients, and ``rhs_fn(p, q)`` supplies the target.
    """
    rows: list[SdpConstraint] = []
    for g1 in range(out_rows):
        for b1 in range(out_cols):
            p = g1 * out_cols + b1
            for g2 in range(out_rows):
                for b2 in range(out_cols):
                    q = g2 * out_cols + b2
                    if q < p:
                        continue
                    coeffs: dict[int, np.ndarray] = {}
                    for scale, pm, qm, key in terms:
                        u = np.kron(pm[g1], qm[b1])
                        v = np.kron(pm[g2], qm[b2])
                        contrib = scale * np.outer(v, u)
                        contrib = (contrib + contrib.T) / 2.0
                        if not contrib.any():
                            continue
                        if key in coeffs:
                            coeffs[key] += contrib
                        else:
                            coeffs[key] = contrib
                    coeffs = {k: m for k, m in coeffs.items() if np.abs(m).max() > 0.0}
                    rhs = rhs_fn(p, q)
                    if not coeffs and rhs == 0.0:
                        continue
                    rows.append(SdpConstraint(coeffs, rhs))
    return rows


def _shape_chains(base: YoungDiagram, top_boxes: int, d: int) -> list[tuple[YoungDiagram, ...]]:
    """Single-box growth chains from ``base`` up to ``top_boxes`` within depth d."""
    if base.boxes == top_boxes:
        return [(base,)]
    out = []
    for child in base.children(max_depth=d):
        for tail in _shape_chains(child, top_boxes, d):
            out.append((base,) + tail)
    return out


def _chain_matrix(chain: tuple[YoungDiagram, ...]) -> np.ndarray:
    mat = np.eye(tableau_count(chain[0]))
    for parent, child in zip(chain, chain[1:]):
        mat = mat @ embedding_matrix(parent, child)
    return mat


def build_sequential_sdp(d: int, n: int) -> SdpProblem:
    """Reduced SDP for the best fidelity with n sequential calls.

    Variables are the blocks C^{mu nu}.  A level-i block is the 1/d-scaled
    sum of conjugations of top-level blocks, one conjugation per pair of
    single-box growth chains (unrolling the level recursion keeps chains
    separate; collapsing them into one restriction matrix would add
    spurious cross terms).  Each level contributes one matrix equality per
    (gamma, beta) pair of diagrams with i-1 and i boxes, and the recursion
    bottoms out in the trace normalization.
    """
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    keys = block_keys(d, n)
    key_index = {k: i for i, k in enumerate(keys)}
    sizes = reduced_block_dims(d, n)
    top = n + 1

    def level_terms(alpha: YoungDiagram, beta: YoungDiagram, level: int):
        """(scale, P, Q, block) with C_level^{alpha beta} = sum scale*(P x Q) C (P x Q)^T."""
        out = []
        scale = float(d) ** -(top - level)
        left = [(c[-1], _chain_matrix(c)) for c in _shape_chains(alpha, top, d)]
        right = [(c[-1], _chain_matrix(c)) for c in _shape_chains(beta, top, d)]
        for mu, p in left:
            for nu, q in right:
                out.append((scale, p, q, key_index[(mu, nu)]))
        return out

    constraints: list[SdpConstraint] = []
    for level in range(1, top + 1):
        for gamma in young_diagrams(level - 1, d):
            d_gamma = tableau_count(gamma)
            for beta in young_diagrams(level, d):
                d_beta = tableau_count(beta)
                terms: list[tuple[float, np.ndarray, np.ndarray, int]] = []
                for alpha in gamma.children(max_depth=d):
                    x = embedding_matrix(gamma, alpha)
                    for scale, p, q, key in level_terms(alpha, beta, level):
                        terms.append((scale / su_dim(beta, d), x @ p, q, key))
                for delta in beta.parents():
                    x = embedding_matrix(delta, beta)
                    for scale, p, q, key in level_terms(gamma, delta, level - 1):
                        terms.append((-scale / su_dim(delta, d), p, x.T @ q, key))
                constraints.extend(
                    _entry_rows(terms, d_gamma, d_beta, lambda p, q: 0.0)
                )
    # normalization: the fully contracted scalar equals one, i.e. the total
    # trace over all blocks is d^(n+1)
    trace_coeffs = {key_index[k]: np.eye(size) for k, size in zip(keys, sizes)}
    constraints.append(SdpConstraint(trace_coeffs, float(d**top)))
    problem = SdpProblem(
        sizes,
        _objective_list(d, n),
        constraints,
        metadata={"d": d, "n": n, "mode": "seq"},
    )
    problem.validate()
    return problem


def build_parallel_sdp(d: int, n: int) -> SdpProblem:
    """Reduced SDP for the best fidelity with n parallel calls.

    The auxiliary per-diagram matrix coupling the constraint family is
    linear in the variables and eliminated by substitution, leaving
    homogeneous equalities plus the trace normalization.
    """
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    keys = block_keys(d, n)
    key_index = {k: i for i, k in enumerate(keys)}
    sizes = reduced_block_dims(d, n)
    top = n + 1
    shapes_top = young_diagrams(top, d)
    constraints: list[SdpConstraint] = []
    for alpha in young_diagrams(n, d):
        d_alpha = tableau_count(alpha)
        children = [mu for mu in alpha.children(max_depth=d)]
        embeddings = {mu: embedding_matrix(alpha, mu) for mu in children}
        # substituted right-hand side: (D^alpha)_{a1 a2} * delta_{k1 k2} / d^(n+1)
        # with D^alpha = sum_{mu, nu'} Tr_2[(X x 1) C^{mu nu'} (X x 1)^T]
        d_terms: list[tuple[float, np.ndarray, int]] = []
        for mu in children:
            for nu in shapes_top:
                d_terms.append((1.0, embeddings[mu], key_index[(mu, nu)]))
        for nu in shapes_top:
            d_nu = tableau_count(nu)
            terms = [
                (1.0 / su_dim(nu, d), embeddings[mu], np.eye(d_nu), key_index[(mu, nu)])
                for mu in children
            ]
            rows: list[SdpConstraint] = []
            for a1 in range(d_alpha):
                for k1 in range(d_nu):
                    p = a1 * d_nu + k1
                    for a2 in range(d_alpha):
                        for k2 in range(d_nu):
                            q = a2 * d_nu + k2
                            if q < p:
                                continue
                            coeffs: dict[int, np.ndarray] = {}
                            for scale, pm, qm, key in terms:
                                u = np.kron(pm[a1], qm[k1])
                                v = np.kron(pm[a2], qm[k2])
                                contrib = scale * np.outer(v, u)
                                contrib = (contrib + contrib.T) / 2.0
                                if contrib.any():
                                    coeffs[key] = coeffs.get(key, 0) + contrib
                            if k1 == k2:
                                for scale, xm, key in d_terms:
                                    size_nu = tableau_count(keys[key][1])
                                    contrib = -scale / (d ** (n + 1)) * np.kron(
                                        np.outer(xm[a2], xm[a1]), np.eye(size_nu)
                                    )
                                    contrib = (contrib + contrib.T) / 2.0
                                    coeffs[key] = coeffs.get(key, 0) + contrib
                            coeffs = {
                                k: np.asarray(mmat)
                                for k, mmat in coeffs.items()
                                if np.abs(mmat).max() > 0.0
                            }
                            if coeffs:
                                rows.append(SdpConstraint(coeffs, 0.0))
            constraints.extend(rows)
    trace_coeffs = {
        key_index[k]: np.eye(size) for k, size in zip(keys, sizes)
    }
    constraints.append(SdpConstraint(trace_coeffs, float(d ** (n + 1))))
    problem = SdpProblem(
        sizes,
        _objective_list(d, n),
        constraints,
        metadata={"d": d, "n": n, "mode": "par"},
    )
    problem.validate()
    return problem


# ---------------------------------------------------------------------------
# Full-space oracles
# ---------------------------------------------------------------------------


def full_register_dims(d: int, n: int) -> tuple[int, ...]:
    return (d,) * (2 * n + 2)


def register_indices(n: int) -> dict[str, object]:
    """Positions in the global order [P, I_1..I_n, O_1..O_n, F]."""
    return {
        "P": 0,
        "I": tuple(range(1, n + 1)),
        "O": tuple(range(n + 1, 2 * n + 1)),
        "F": 2 * n + 1,
    }


def _input_group(n: int) -> list[int]:
    reg = register_indices(n)
    return list(reg["I"]) + [reg["F"]]


def _output_group(n: int) -> list[int]:
    reg = register_indices(n)
    return [reg["P"]] + list(reg["O"])


@lru_cache(maxsize=None)
def _matrix_unit_cached(mu: YoungDiagram, i: int, j: int, d: int) -> np.ndarray:
    e = matrix_unit(mu, i, j, d)
    e.setflags(write=False)
    return e


def full_performance_operator(d: int, n: int) -> np.ndarray:
    """Haar-averaged objective on the full register space.

    Assembled from commutant matrix units placed on the register groups
    (I_1..I_n, F) and (O_1..O_n, P); the second group's order encodes the
    cyclic pairing between the future/past registers and the call slots.
    """
    dims = full_register_dims(d, n)
    reg = register_indices(n)
    group_a = list(reg["I"]) + [reg["F"]]
    group_b = list(reg["O"]) + [reg["P"]]
    total = d ** (2 * n + 2)
    omega = np.zeros((total, total))
    for mu in young_diagrams(n + 1, d):
        m_mu = su_dim(mu, d)
        for i in range(tableau_count(mu)):
            for j in range(tableau_count(mu)):
                e = _matrix_unit_cached(mu, i, j, d)
                omega += (
                    tensor.embed_operator(e, group_a, dims).real
                    @ tensor.embed_operator(e, group_b, dims).real
                ) / (d * d * m_mu)
    return omega


def _ptrace(mat: np.ndarray, keep: list[int], dims: tuple[int, ...]) -> np.ndarray:
    return tensor.partial_trace(mat, keep, dims=dims).entries.real


def _full_rows(
    lhs_coeff,
    out_regs: list[int],
    dims: tuple[int, ...],
    rhs_fn,
) -> list[SdpConstraint]:
    """Rows Tr(A C) = rhs for each upper-triangle entry of a register-matrix identity.

    ``lhs_coeff(e)`` maps an elementary output matrix to the coefficient
    matrix A via adjoints of the partial traces and embeddings involved.
    """
    out_dim = int(np.prod([dims[r] for r in out_regs])) if out_regs else 1
    rows = []
    for p in range(out_dim):
        for q in range(p, out_dim):
            e = np.zeros((out_dim, out_dim))
            e[p, q] = 0.5
            e[q, p] += 0.5
            coeff = lhs_coeff(e)
            rows.append(SdpConstraint({0: (coeff + coeff.T) / 2.0}, rhs_fn(p, q)))
    return rows


def build_full_sdp(d: int, n: int, mode: str, dim_cap: int = FULL_SPACE_DIM_CAP) -> SdpProblem:
    """Brute-force SDP on the unreduced Choi matrix (oracle use only)."""
    if mode not in ("seq", "par"):
        raise ValueError("mode must be 'seq' or 'par'")
    total = d ** (2 * n + 2)
    if total > dim_cap:
        raise ValueError(
            f"full-space dimension {total} exceeds cap {dim_cap} for (d={d}, n={n})"
        )
    dims = full_register_dims(d, n)
    reg = register_indices(n)
    all_regs = list(range(2 * n + 2))
    constraints: list[SdpConstraint] = []

    if mode == "seq":
        # level i spaces: C_i lives on (P, I_1..I_i, O_1..O_{i-1})
        for i in range(1, n + 2):
            i_regs = list(reg["I"][: min(i, n)]) + ([reg["F"]] if i == n + 1 else [])
            o_regs = list(reg["O"][: i - 1])
            kept_i = sorted([reg["P"]] + i_regs + o_regs)
            drop_count = (n + 1 - i)
            scale_i = float(d ** -drop_count)
            last_i = i_regs[-1]
            lhs_regs = sorted(set(kept_i) - {last_i})
            rhs_inner = sorted(set(lhs_regs) - ({o_regs[-1]} if o_regs else {reg["P"]}))
            scale_im1 = float(d ** -(drop_count + 1))

            def lhs_coeff(e, lhs_regs=lhs_regs, scale_i=scale_i, rhs_inner=rhs_inner,
                          scale_im1=scale_im1):
                a = scale_i * tensor.embed_operator(e, lhs_regs, dims).real
                if rhs_inner:
                    inner = _ptrace(
                        e,
                        [lhs_regs.index(r) for r in rhs_inner],
                        tuple(dims[r] for r in lhs_regs),
                    )
                    b = scale_im1 * tensor.embed_operator(inner, rhs_inner, dims).real
                else:
                    b = scale_im1 * float(np.trace(e)) * np.eye(total)
                return a - b

            constraints.extend(_full_rows(lhs_coeff, lhs_regs, dims, lambda p, q: 0.0))
        # normalization: fully contracted scalar equals one
        constraints.append(
            SdpConstraint({0: np.eye(total) * float(d ** -(n + 1))}, 1.0)
        )
    else:
        # parallel: Tr_F C = Tr_{O F} C x 1_O / d^n  and  Tr_{I O F} C = d^n 1_P
        f_reg = reg["F"]
        lhs_regs = sorted(set(all_regs) - {f_reg})
        inner_regs = sorted([reg["P"]] + list(reg["I"]))

        def par_coeff(e):
            a = tensor.embed_operator(e, lhs_regs, dims).real
            inner = _ptrace(
                e,
                [lhs_regs.index(r) for r in inner_regs],
                tuple(dims[r] for r in lhs_regs),
            )
            b = tensor.embed_operator(inner, inner_regs, dims).real / float(d**n)
            return a - b

        constraints.extend(_full_rows(par_coeff, lhs_regs, dims, lambda p, q: 0.0))

        def p_coeff(e):
            return tensor.embed_operator(e, [reg["P"]], dims).real

        constraints.extend(
            _full_rows(
                p_coeff,
                [reg["P"]],
                dims,
                lambda p, q: float(d**n) if p == q else 0.0,
            )
        )

    omega = full_performance_operator(d, n)
    problem = SdpProblem(
        [total],
        [(omega + omega.T) / 2.0],
        constraints,
        metadata={"d": d, "n": n, "mode": f"full-{mode}"},
    )
    problem.validate()
    return problem


def maximally_mixed_comb(d: int, n: int) -> np.ndarray:
    """Feasible comb for both orders: ignore everything, output white noise."""
    total = d ** (2 * n + 2)
    return np.eye(total) / float(d ** (n + 1))


def check_commutant_symmetry(full: np.ndarray, d: int, n: int, samples: int = 2, seed: int = 1234) -> float:
    """Largest commutator norm against sampled collective rotations."""
    dims = full_register_dims(d, n)
    group_a = _input_group(n)
    group_b = _output_group(n)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        v = tensor.haar_unitary(d, rng).entries
        w = tensor.haar_unitary(d, rng).entries
        big = tensor.embed_operator(
            tensor.kron_all(*([v] * (n + 1))), group_a, dims
        ) @ tensor.embed_operator(tensor.kron_all(*([w] * (n + 1))), group_b, dims)
        comm = full @ big - big @ full
        worst = max(worst, float(np.abs(comm).max()))
    return worst


def reduce_comb(full: np.ndarray | tensor.DensityOrChoiMatrix, d: int, n: int) -> ReducedComb:
    """Extract reduced blocks from a collectively symmetric full-space matrix.

    Coefficients come from Hilbert-Schmidt pairing with the commutant
    matrix units; round-tripping through :func:`expand_comb` reproduces the
    input for matrices inside the commutant.
    """
    mat = full.entries if isinstance(full, tensor.DensityOrChoiMatrix) else np.asarray(full)
    total = d ** (2 * n + 2)
    if mat.shape != (total, total):
        raise ValueError(f"matrix shape {mat.shape} does not match (d={d}, n={n})")
    sym_err = check_commutant_symmetry(mat, d, n)
    if sym_err > 1e-8 * max(1.0, float(np.abs(mat).max())):
        raise ValueError(f"input is not collectively symmetric (deviation {sym_err:.3e})")
    dims = full_register_dims(d, n)
    group_a = _input_group(n)
    group_b = _output_group(n)
    blocks: dict[tuple[YoungDiagram, YoungDiagram], np.ndarray] = {}
    for mu in young_diagrams(n + 1, d):
        d_mu = tableau_count(mu)
        for nu in young_diagrams(n + 1, d):
            d_nu = tableau_count(nu)
            block = np.zeros((d_mu * d_nu, d_mu * d_nu))
            for i in range(d_mu):
                for j in range(d_mu):
                    e_mu = tensor.embed_operator(
                        _matrix_unit_cached(mu, j, i, d), group_a, dims
                    ).real
                    for k in range(d_nu):
                        for l in range(d_nu):
                            e_nu = tensor.embed_operator(
                                _matrix_unit_cached(nu, l, k, d), group_b, dims
                            ).real
                            value = float(np.real(np.trace(mat @ e_mu @ e_nu)))
                            block[i * d_nu + k, j * d_nu + l] = value
            blocks[(mu, nu)] = block
    return ReducedComb(d, n, blocks)


def expand_comb(comb: ReducedComb) -> np.ndarray:
    """Rebuild the full-space matrix from reduced blocks."""
    d, n = comb.d, comb.n
    dims = full_register_dims(d, n)
    group_a = _input_group(n)
    group_b = _output_group(n)
    total = d ** (2 * n + 2)
    out = np.zeros((total, total))
    for (mu, nu), block in comb.blocks.items():
        d_mu, d_nu = tableau_count(mu), tableau_count(nu)
        m_mu, m_nu = su_dim(mu, d), su_dim(nu, d)
        for i in range(d_mu):
            for j in range(d_mu):
                e_mu = tensor.embed_operator(
                    _matrix_unit_cached(mu, i, j, d), group_a, dims
                ).real
                for k in range(d_nu):
                    for l in range(d_nu):
                        c = block[i * d_nu + k, j * d_nu + l]
                        if c == 0.0:
                            continue
                        e_nu = tensor.embed_operator(
                            _matrix_unit_cached(nu, k, l, d), group_b, dims
                        ).real
                        out += (c / (m_mu * m_nu)) * (e_mu @ e_nu)
    return out
