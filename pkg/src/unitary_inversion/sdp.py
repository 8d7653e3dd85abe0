"""Deterministic solver for small block-diagonal real SDPs.

Standard form: maximize sum_b Tr(C_b X_b) subject to linear equalities
sum_b Tr(A_{i,b} X_b) = rhs_i and X_b >= 0.  The method is an infeasible
primal-dual path-following iteration with a Mehrotra predictor-corrector
and a Newton direction symmetrized at the dual iterate.  The contract is
the certificate (duality gap plus residuals), not the algorithm.

Constraint rows are preprocessed: exact duplicates collapse, and a
rank-revealing QR drops dependent rows after checking their right-hand
sides for consistency (an inconsistency is reported as infeasibility).
All data must be real symmetric; complex or unsymmetric input is rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

_SYM_ATOL = 1e-10
_PIVOT_THRESHOLD = 1e-10
_BOUNDARY_FRACTION = 0.98


@dataclass(frozen=True)
class SdpConstraint:
    """One equality: sum over listed blocks of Tr(coeff * X_block) = rhs."""

    coeffs: dict[int, np.ndarray]
    rhs: float


@dataclass
class SdpProblem:
    """Block-diagonal SDP in equality standard form (maximization)."""

    block_dims: list[int]
    objective: list[np.ndarray]
    constraints: list[SdpConstraint]
    metadata: dict = field(default_factory=dict)

    def validate(self) -> None:
        if len(self.objective) != len(self.block_dims):
            raise ValueError("one objective matrix per block required")
        for dim, mat in zip(self.block_dims, self.objective):
            _check_symmetric(mat, dim, "objective")
        for c in self.constraints:
            if not math.isfinite(c.rhs):
                raise ValueError("constraint right-hand side must be finite")
            for b, mat in c.coeffs.items():
                if not 0 <= b < len(self.block_dims):
                    raise ValueError(f"constraint references unknown block {b}")
                _check_symmetric(mat, self.block_dims[b], "constraint")

    def to_json(self) -> str:
        payload = {
            "block_dims": list(self.block_dims),
            "objective": [_upper_triangle(m) for m in self.objective],
            "constraints": [
                {
                    "blocks": [
                        {"index": b, "coeff_upper_triangle": _upper_triangle(m)}
                        for b, m in sorted(c.coeffs.items())
                    ],
                    "rhs": c.rhs,
                }
                for c in self.constraints
            ],
        }
        payload.update({k: self.metadata[k] for k in ("d", "n", "mode") if k in self.metadata})
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SdpProblem":
        data = json.loads(text)
        dims = [int(x) for x in data["block_dims"]]
        objective = [_from_upper_triangle(v, s) for v, s in zip(data["objective"], dims)]
        constraints = []
        for c in data["constraints"]:
            coeffs = {
                int(e["index"]): _from_upper_triangle(
                    e["coeff_upper_triangle"], dims[int(e["index"])]
                )
                for e in c["blocks"]
            }
            constraints.append(SdpConstraint(coeffs, float(c["rhs"])))
        metadata = {k: data[k] for k in ("d", "n", "mode") if k in data}
        problem = cls(dims, objective, constraints, metadata)
        problem.validate()
        return problem


def _check_symmetric(mat: np.ndarray, dim: int, what: str) -> None:
    mat = np.asarray(mat)
    if np.iscomplexobj(mat) and np.abs(mat.imag).max() > 0:
        raise ValueError(f"{what} matrix must be real")
    if mat.shape != (dim, dim):
        raise ValueError(f"{what} matrix shape {mat.shape} does not match block size {dim}")
    if np.abs(mat - mat.T).max() > _SYM_ATOL:
        raise ValueError(f"{what} matrix is not symmetric")


def _upper_triangle(mat: np.ndarray) -> list[float]:
    mat = np.asarray(mat, dtype=float)
    idx = np.triu_indices(mat.shape[0])
    return [float(x) for x in mat[idx]]


def _from_upper_triangle(values, dim: int) -> np.ndarray:
    mat = np.zeros((dim, dim))
    mat[np.triu_indices(dim)] = values
    return mat + np.triu(mat, 1).T


@dataclass(frozen=True)
class SolverConfig:
    feasibility_tol: float = 1e-8
    gap_tol: float = 1e-6
    max_iterations: int = 200
    initial_point_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.feasibility_tol <= 0 or self.gap_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class SdpSolution:
    blocks: list[np.ndarray]
    dual: np.ndarray
    objective_value: float
    gap: float
    primal_residual: float
    status: str
    iterations: int = 0
    mu_history: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "objective": self.objective_value,
            "gap": self.gap,
            "residual": self.primal_residual,
            "iterations": self.iterations,
            "status": self.status,
            "block_eigenvalue_minima": [
                float(np.linalg.eigvalsh(b)[0]) for b in self.blocks
            ],
        }
        return json.dumps(payload, sort_keys=True)


class _SvecIndexer:
    """Symmetric vectorization with sqrt(2)-scaled off-diagonals.

    <svec(A), svec(B)> equals Tr(AB) for symmetric A, B.
    """

    def __init__(self, dims: list[int]):
        self.dims = dims
        self.offsets = []
        total = 0
        self.index_pairs = []
        for s in dims:
            self.offsets.append(total)
            iu = np.triu_indices(s)
            self.index_pairs.append(iu)
            total += s * (s + 1) // 2
        self.total = total
        root2 = math.sqrt(2.0)
        self.scales = []
        for s, (ii, jj) in zip(dims, self.index_pairs):
            sc = np.where(ii == jj, 1.0, root2)
            self.scales.append(sc)

    def pack(self, mats: list[np.ndarray]) -> np.ndarray:
        out = np.empty(self.total)
        for b, m in enumerate(mats):
            ii, jj = self.index_pairs[b]
            out[self.offsets[b] : self.offsets[b] + ii.size] = m[ii, jj] * self.scales[b]
        return out

    def unpack(self, vec: np.ndarray) -> list[np.ndarray]:
        mats = []
        for b, s in enumerate(self.dims):
            ii, jj = self.index_pairs[b]
            chunk = vec[self.offsets[b] : self.offsets[b] + ii.size] / self.scales[b]
            m = np.zeros((s, s))
            m[ii, jj] = chunk
            m[jj, ii] = chunk
            mats.append(m)
        return mats


def _preprocess_rows(a: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """Deduplicate and drop linearly dependent rows.

    Returns (A_kept, rhs_kept, kept_indices, consistent).  ``consistent``
    is False when a dropped row's right-hand side disagrees with the kept
    rows, which certifies primal infeasibility.
    """
    m = a.shape[0]
    seen: dict[bytes, int] = {}
    order: list[int] = []
    for i in range(m):
        key = a[i].tobytes()
        if key in seen:
            j = seen[key]
            if abs(rhs[i] - rhs[j]) > 1e-12 * max(1.0, abs(rhs[j])):
                return a[order], rhs[order], np.array(order, dtype=int), False
        else:
            seen[key] = i
            order.append(i)
    a = a[order]
    rhs = rhs[order]
    norms = np.linalg.norm(a, axis=1)
    nonzero = norms > _PIVOT_THRESHOLD
    for i in np.where(~nonzero)[0]:
        if abs(rhs[i]) > 1e-12:
            return a, rhs, np.array(order, dtype=int), False
    a, rhs = a[nonzero], rhs[nonzero]
    kept_orig = np.array(order, dtype=int)[nonzero]
    if a.shape[0] == 0:
        return a, rhs, kept_orig, True
    _, r, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > _PIVOT_THRESHOLD * max(diag[0], 1e-300)))
    keep = np.sort(piv[:rank])
    drop = np.sort(piv[rank:])
    if drop.size:
        # dropped rows must be consistent combinations of the kept ones
        coeffs, *_ = np.linalg.lstsq(a[keep].T, a[drop].T, rcond=None)
        rhs_pred = coeffs.T @ rhs[keep]
        scale = max(1.0, float(np.abs(rhs).max()))
        if np.abs(rhs_pred - rhs[drop]).max() > 1e-8 * scale:
            return a[keep], rhs[keep], kept_orig[keep], False
    return a[keep], rhs[keep], kept_orig[keep], True


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha*dx staying positive semidefinite."""
    try:
        l = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return 0.0
    s = scipy.linalg.solve_triangular(l, dx, lower=True)
    s = scipy.linalg.solve_triangular(l, s.T, lower=True)
    w = np.linalg.eigvalsh((s + s.T) / 2.0)
    lam = w[0]
    if lam >= -1e-14:
        return math.inf
    return -1.0 / lam


def _chol_ok(mats: list[np.ndarray]) -> bool:
    for m in mats:
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            return False
    return True


def solve(problem: SdpProblem, config: SolverConfig | None = None) -> SdpSolution:
    """Solve the SDP; deterministic for fixed inputs."""
    config = config or SolverConfig()
    problem.validate()
    dims = list(problem.block_dims)
    nblocks = len(dims)
    indexer = _SvecIndexer(dims)
    cvec = indexer.pack([np.asarray(m, dtype=float) for m in problem.objective])

    m_rows = len(problem.constraints)
    a_full = np.zeros((m_rows, indexer.total))
    rhs_full = np.zeros(m_rows)
    for i, constraint in enumerate(problem.constraints):
        mats = [np.zeros((s, s)) for s in dims]
        for b, mat in constraint.coeffs.items():
            mats[b] = np.asarray(mat, dtype=float)
        a_full[i] = indexer.pack(mats)
        rhs_full[i] = constraint.rhs

    a, rhs, kept, consistent = _preprocess_rows(a_full, rhs_full)
    if not consistent:
        zeros = [np.zeros((s, s)) for s in dims]
        return SdpSolution(zeros, np.zeros(m_rows), 0.0, math.inf, math.inf, "infeasible_detected")
    m = a.shape[0]

    a_mats = [indexer.unpack(a[i]) for i in range(m)]
    c_mats = [np.asarray(mat, dtype=float) for mat in problem.objective]

    tau = config.initial_point_scale * max(
        1.0,
        float(np.abs(rhs).max()) if m else 1.0,
        max(float(np.abs(mat).max()) for mat in c_mats) if nblocks else 1.0,
    )
    x = [tau * np.eye(s) for s in dims]
    z = [tau * np.eye(s) for s in dims]
    y = np.zeros(m)
    ntotal = sum(dims)

    def apply_a(xm: list[np.ndarray]) -> np.ndarray:
        return a @ indexer.pack(xm)

    def adjoint(yv: np.ndarray) -> list[np.ndarray]:
        return indexer.unpack(a.T @ yv)

    status = "max_iter"
    mu_history: list[float] = []
    iterations = 0
    norm_rhs = 1.0 + (float(np.abs(rhs).max()) if m else 0.0)
    norm_c = 1.0 + max((float(np.abs(mat).max()) for mat in c_mats), default=0.0)

    for iteration in range(config.max_iterations):
        iterations = iteration + 1
        rp = rhs - apply_a(x)
        aty = adjoint(y)
        rd = [c_mats[b] - aty[b] + z[b] for b in range(nblocks)]
        mu = sum(float(np.tensordot(x[b], z[b])) for b in range(nblocks)) / ntotal
        mu_history.append(mu)
        pobj = float(cvec @ indexer.pack(x))
        dobj = float(rhs @ y)
        gap_rel = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = float(np.abs(rp).max()) / norm_rhs if m else 0.0
        dinf = max(float(np.abs(rd[b]).max()) for b in range(nblocks)) / norm_c
        if gap_rel <= config.gap_tol and pinf <= config.feasibility_tol and dinf <= config.feasibility_tol:
            status = "optimal"
            break
        if float(np.abs(y).max() if m else 0.0) > 1e12 and pinf > config.feasibility_tol:
            status = "infeasible_detected"
            break

        zinv_chol = []
        try:
            for b in range(nblocks):
                zinv_chol.append(np.linalg.cholesky(z[b]))
        except np.linalg.LinAlgError:
            status = "max_iter"
            break

        def zinv_apply(b: int, mat: np.ndarray) -> np.ndarray:
            l = zinv_chol[b]
            s = scipy.linalg.solve_triangular(l, mat, lower=True)
            return scipy.linalg.solve_triangular(l.T, s, lower=False)

        zinv = [zinv_apply(b, np.eye(dims[b])) for b in range(nblocks)]

        # Schur complement M_ij = Tr(A_i sym(X A_j Z^{-1}))
        w_cols = np.empty((m, indexer.total))
        for j in range(m):
            packed = []
            for b in range(nblocks):
                t = x[b] @ a_mats[j][b] @ zinv[b]
                packed.append((t + t.T) / 2.0)
            w_cols[j] = indexer.pack(packed)
        big_m = a @ w_cols.T
        big_m = (big_m + big_m.T) / 2.0

        def solve_m(rhs_vec: np.ndarray) -> np.ndarray:
            jitter = 0.0
            base = np.trace(big_m) / max(1, m)
            for _ in range(8):
                try:
                    l = np.linalg.cholesky(big_m + jitter * np.eye(m))
                    sol = scipy.linalg.solve_triangular(l, rhs_vec, lower=True)
                    return scipy.linalg.solve_triangular(l.T, sol, lower=False)
                except np.linalg.LinAlgError:
                    jitter = max(jitter * 10.0, 1e-14 * max(base, 1.0))
            return np.linalg.lstsq(big_m, rhs_vec, rcond=None)[0]

        az = np.array(
            [
                sum(float(np.tensordot(a_mats[i][b], zinv[b])) for b in range(nblocks))
                for i in range(m)
            ]
        )

        def direction(sigma_mu: float, cross: list[np.ndarray] | None):
            # Solve M dy = sigma*mu*A(Z^-1) + A(sym(X Rd Z^-1) - K) - b, then
            # dZ = A*dy - Rd and dX from the symmetrized complementarity row.
            wvec = np.empty(m)
            extra = []
            for b in range(nblocks):
                t = x[b] @ rd[b] @ zinv[b]
                term = (t + t.T) / 2.0
                if cross is not None:
                    term = term - cross[b]
                extra.append(term)
            for i in range(m):
                wvec[i] = sum(
                    float(np.tensordot(a_mats[i][b], extra[b])) for b in range(nblocks)
                )
            rhs_vec = sigma_mu * az + wvec - rhs
            dy = solve_m(rhs_vec)
            atdy = adjoint(dy)
            dz = [atdy[b] - rd[b] for b in range(nblocks)]
            dx = []
            for b in range(nblocks):
                t = x[b] @ dz[b] @ zinv[b]
                dx.append(sigma_mu * zinv[b] - x[b] - (t + t.T) / 2.0 - (cross[b] if cross is not None else 0.0))
            return dx, dy, dz

        dx_aff, dy_aff, dz_aff = direction(0.0, None)
        ap = min(1.0, _BOUNDARY_FRACTION * min(_max_step(x[b], dx_aff[b]) for b in range(nblocks)))
        ad = min(1.0, _BOUNDARY_FRACTION * min(_max_step(z[b], dz_aff[b]) for b in range(nblocks)))
        mu_aff = sum(
            float(np.tensordot(x[b] + ap * dx_aff[b], z[b] + ad * dz_aff[b]))
            for b in range(nblocks)
        ) / ntotal
        sigma = min(1.0, max(0.0, (mu_aff / mu)) ** 3)

        cross = []
        for b in range(nblocks):
            t = dx_aff[b] @ dz_aff[b] @ zinv[b]
            cross.append((t + t.T) / 2.0)
        dx, dy, dz = direction(sigma * mu, cross)

        ap = min(1.0, _BOUNDARY_FRACTION * min(_max_step(x[b], dx[b]) for b in range(nblocks)))
        ad = min(1.0, _BOUNDARY_FRACTION * min(_max_step(z[b], dz[b]) for b in range(nblocks)))
        # Cholesky failure from rounding triggers step halving.
        for _ in range(40):
            if _chol_ok([x[b] + ap * dx[b] for b in range(nblocks)]):
                break
            ap *= 0.5
        for _ in range(40):
            if _chol_ok([z[b] + ad * dz[b] for b in range(nblocks)]):
                break
            ad *= 0.5
        for b in range(nblocks):
            x[b] = x[b] + ap * dx[b]
            z[b] = z[b] + ad * dz[b]
        y = y + ad * dy

    pobj = float(cvec @ indexer.pack(x))
    dobj = float(rhs @ y)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    residual = float(np.abs(rhs_full - a_full @ indexer.pack(x)).max()) if m_rows else 0.0
    dual_full = np.zeros(m_rows)
    dual_full[kept] = y
    if status == "optimal" and residual > config.feasibility_tol * norm_rhs:
        status = "max_iter"
    return SdpSolution(
        blocks=x,
        dual=dual_full,
        objective_value=pobj,
        gap=gap,
        primal_residual=residual,
        status=status,
        iterations=iterations,
        mu_history=mu_history,
    )


@dataclass(frozen=True)
class VerificationReport:
    objective: float
    max_constraint_violation: float
    block_min_eigenvalues: tuple[float, ...]
    dual_objective: float | None
    dual_min_eigenvalue: float | None
    gap: float | None


def verify(problem: SdpProblem, solution: SdpSolution) -> VerificationReport:
    """Recompute residuals from scratch, independent of solver bookkeeping."""
    if len(solution.blocks) != len(problem.block_dims):
        raise ValueError("solution block count does not match problem")
    for mat, s in zip(solution.blocks, problem.block_dims):
        if mat.shape != (s, s):
            raise ValueError("solution block shape mismatch")
    objective = 0.0
    for mat, cost in zip(solution.blocks, problem.objective):
        objective += float(np.sum(np.asarray(cost, dtype=float) * mat))
    violation = 0.0
    for c in problem.constraints:
        value = sum(float(np.sum(np.asarray(m, dtype=float) * solution.blocks[b])) for b, m in c.coeffs.items())
        violation = max(violation, abs(value - c.rhs))
    minima = tuple(float(np.linalg.eigvalsh((b + b.T) / 2.0)[0]) for b in solution.blocks)
    dual_obj = None
    dual_min = None
    gap = None
    if solution.dual is not None and len(solution.dual) == len(problem.constraints):
        dual_obj = float(
            sum(yi * c.rhs for yi, c in zip(solution.dual, problem.constraints))
        )
        zmin = math.inf
        for b, s in enumerate(problem.block_dims):
            zb = -np.asarray(problem.objective[b], dtype=float)
            for yi, c in zip(solution.dual, problem.constraints):
                if b in c.coeffs:
                    zb = zb + yi * np.asarray(c.coeffs[b], dtype=float)
            zmin = min(zmin, float(np.linalg.eigvalsh((zb + zb.T) / 2.0)[0]))
        dual_min = zmin
        gap = abs(objective - dual_obj) / (1.0 + abs(objective) + abs(dual_obj))
    return VerificationReport(
        objective=objective,
        max_constraint_violation=violation,
        block_min_eigenvalues=minima,
        dual_objective=dual_obj,
        dual_min_eigenvalue=dual_min,
        gap=gap,
    )
