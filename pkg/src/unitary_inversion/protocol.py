"""Exact qubit-unitary inversion on seven qubits.

The circuit consumes four black-box calls of an unknown U in SU(2) and
outputs U^{-1} applied to the input qubit, together with the two-qubit
state (U x 1)|psi^-> on the top wires and restored |0> ancillas.  The two
fixed unitaries are assembled from Clebsch-Gordan transforms that convert
between computational qubits and total-spin label registers.

Label conventions: a j-register stores floor(j) in binary, an m-register
stores m + j in binary, and a single qubit |1> carries spin up (+1/2).
Two build paths exist for the Clebsch-Gordan blocks: ``gate`` multiplies
out the explicit gate sequence, ``matrix`` writes the defining coupling
relations column by column and completes them to a unitary.  Both agree on
every state the protocol can reach; behavior off that subspace is not
specified and may differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import (
    DenseUnitary,
    Statevector,
    apply_to_subsystems,
    basis_state,
    embed_operator,
    reduced_density_matrix,
)

NUM_WIRES = 7
# Wire roles (0-based): 0 input qubit, 1-2 singlet pair, 3-6 ancillas.
INPUT_WIRE = 0
SINGLET_WIRES = (1, 2)
ANCILLA_WIRES = (3, 4, 5, 6)
CALL_WIRE = 1  # every black-box call acts here

SINGLET = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def rotation_y(theta: float) -> np.ndarray:
    """Real y-rotation [[cos t/2, -sin t/2], [sin t/2, cos t/2]]."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class CgAngle:
    """Coupling angle for adding one spin-1/2 to total spin j."""

    j: float
    m_prime: float
    theta: float


def cg_angle(j: float, m_prime: float) -> CgAngle:
    """Angle with cos(theta) = sqrt((j + m' + 1/2) / (2j + 1))."""
    if j < 0 or abs(round(2 * j) - 2 * j) > 1e-12 or abs(round(2 * m_prime) - 2 * m_prime) > 1e-12:
        raise ValueError(f"j and m' must be non-negative half-integers: ({j}, {m_prime})")
    if abs(m_prime) > j + 0.5 + 1e-12:
        raise ValueError(f"no valid coupling for (j={j}, m'={m_prime})")
    ratio = (j + m_prime + 0.5) / (2.0 * j + 1.0)
    ratio = min(1.0, max(0.0, ratio))
    return CgAngle(j, m_prime, math.acos(math.sqrt(ratio)))


def _controlled(n: int, controls: dict[int, int], targets: tuple[int, ...], op: np.ndarray) -> np.ndarray:
    """Gate applying ``op`` to ``targets`` when every control matches its value."""
    dim = 2**n
    mat = np.eye(dim, dtype=complex)
    t = len(targets)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        if any(bits[q] != v for q, v in controls.items()):
            continue
        tin = 0
        for q in targets:
            tin = (tin << 1) | bits[q]
        mat[:, col] = 0.0
        for tout in range(2**t):
            if op[tout, tin] == 0.0:
                continue
            new_bits = list(bits)
            for pos, q in enumerate(targets):
                new_bits[q] = (tout >> (t - 1 - pos)) & 1
            row = 0
            for b in new_bits:
                row = (row << 1) | b
            mat[row, col] = op[tout, tin]
    return mat


def _product(n: int, gates: list[np.ndarray]) -> np.ndarray:
    """Compose gates listed in circuit order (first gate acts first)."""
    mat = np.eye(2**n, dtype=complex)
    for g in gates:
        mat = g @ mat
    return mat


def build_vcg2() -> DenseUnitary:
    """Three-qubit coupling circuit: two qubits plus |0> to (j, m) labels.

    Output registers: wire 0 holds the j bit, wires 1-2 hold m + j.
    """
    ry = rotation_y(math.pi / 2.0)
    gates = [
        _controlled(3, {0: 1, 1: 1}, (2,), _X),
        _controlled(3, {1: 1}, (0,), _X),
        _controlled(3, {2: 0}, (1,), ry),
        _controlled(3, {0: 0, 2: 0}, (1,), ry),
        _controlled(3, {1: 0}, (0,), _X),
        _controlled(3, {}, (0, 1), _SWAP),
        _controlled(3, {}, (1, 2), _SWAP),
    ]
    return DenseUnitary(_product(3, gates))


def build_vcg3() -> DenseUnitary:
    """Four-qubit coupling circuit: (j, m) labels plus one qubit to (j', m', p') labels.

    Wire layout: 0 j-bit in / j'-bit out, 1-2 m-register in / m'-register
    out, 3 fresh qubit in / multiplicity bit out.  The rotation angle is
    2*arccos(sqrt(2/3)).
    """
    theta = 2.0 * math.acos(math.sqrt(2.0 / 3.0))
    gates = [
        _controlled(4, {0: 0}, (2,), _X),
        _controlled(4, {2: 1, 3: 1}, (1,), _X),
        _controlled(4, {3: 1}, (2,), _X),
        _controlled(4, {1: 1}, (2,), _X),
        _controlled(4, {1: 0}, (3,), rotation_y(math.pi)),
        _controlled(4, {0: 1, 1: 0, 2: 1}, (3,), rotation_y(-theta)),
        _controlled(4, {0: 1, 1: 1, 2: 1}, (3,), rotation_y(theta)),
        _controlled(4, {3: 1}, (0,), _X),
        _controlled(4, {}, (0,), _X),
        _controlled(4, {}, (1, 2), _SWAP),
        _controlled(4, {}, (1,), _X),
        _controlled(4, {0: 1}, (1,), _X),
        _controlled(4, {0: 1}, (1, 2), _SWAP),
        _controlled(4, {0: 1, 1: 1}, (2,), _X),
    ]
    return DenseUnitary(_product(4, gates))


def _complete_isometry(columns: dict[int, np.ndarray], dim: int) -> np.ndarray:
    """Extend defined columns to a unitary, deterministically.

    Undefined columns take the matching identity column when it is
    consistent, otherwise the first remaining basis direction, always
    orthogonalized against everything placed so far.
    """
    mat = np.zeros((dim, dim), dtype=complex)
    used: list[np.ndarray] = []
    for col, vec in sorted(columns.items()):
        mat[:, col] = vec
        used.append(vec)
    for col in range(dim):
        if col in columns:
            continue
        placed = False
        for candidate_idx in [col] + [k for k in range(dim) if k != col]:
            v = np.zeros(dim, dtype=complex)
            v[candidate_idx] = 1.0
            for u in used:
                v = v - u * np.vdot(u, v)
            norm = np.linalg.norm(v)
            if norm > 1e-9:
                v = v / norm
                mat[:, col] = v
                used.append(v)
                placed = True
                break
        if not placed:
            raise AssertionError("unitary completion failed")
    return mat


def _spin_state(j: float, m: float, n: int) -> np.ndarray:
    """Total-spin basis state |j; m> of n qubits, built by recursive coupling."""
    if n == 1:
        v = np.zeros(2)
        v[int(m + 0.5)] = 1.0
        return v
    # couple (n-1)-qubit spin j0 with one more qubit
    out = np.zeros(2**n)
    for j0 in (j - 0.5, j + 0.5):
        if j0 < 0 or j0 > (n - 1) / 2.0 or abs(m) > j0 + 0.5:
            continue
        ang = cg_angle(j0, m)
        c, s = math.cos(ang.theta), math.sin(ang.theta)
        # row selected by whether j = j0 - 1/2 or j0 + 1/2
        if abs(j - (j0 - 0.5)) < 1e-9:
            coeff_down, coeff_up = c, -s  # partner qubit |0> vs |1>
        else:
            coeff_down, coeff_up = s, c
        if abs(m + 0.5) <= j0 + 1e-9 and coeff_down != 0.0:
            out += coeff_down * np.kron(_spin_state(j0, m + 0.5, n - 1), [1.0, 0.0])
        if abs(m - 0.5) <= j0 + 1e-9 and coeff_up != 0.0:
            out += coeff_up * np.kron(_spin_state(j0, m - 0.5, n - 1), [0.0, 1.0])
    return out


def build_vcg2_matrix() -> DenseUnitary:
    """Coupling transform for two qubits from its defining relations.

    Columns of the inverse are pinned on every valid (j, m) label; the
    remainder is a deterministic unitary completion.
    """
    columns: dict[int, np.ndarray] = {}
    # label (j bit, m-register) -> physical |j; m> x |0>
    for jbit, j in ((0, 0.0), (1, 1.0)):
        m = -j
        while m <= j + 1e-9:
            reg = int(round(m + j))
            col = (jbit << 2) | reg
            columns[col] = np.kron(_spin_state(j, m, 2), [1.0, 0.0]).astype(complex)
            m += 1.0
    return DenseUnitary(_complete_isometry(columns, 8).conj().T)


def build_vcg3_matrix() -> DenseUnitary:
    """Coupling transform for (two-qubit labels + one qubit) from its relations.

    For each valid (j', m', p') label the inverse maps to the superposition
    of (j, m-register, new-qubit) states prescribed by the coupling
    coefficients; completion as in the two-qubit build.
    """
    columns: dict[int, np.ndarray] = {}

    def reg_state(jbit: int, reg: int, q: int) -> int:
        return (jbit << 3) | (reg << 1) | q

    def basis16(idx: int) -> np.ndarray:
        v = np.zeros(16, dtype=complex)
        v[idx] = 1.0
        return v

    # j' = 1/2 labels (j'-bit 0), m-register holds m' + 1/2 in {0, 1}.
    for mreg, m_prime in ((0, -0.5), (1, 0.5)):
        ang1 = cg_angle(1.0, m_prime)
        c1, s1 = math.cos(ang1.theta), math.sin(ang1.theta)
        # multiplicity bit 0: descended from the triplet of the first two qubits
        col = reg_state(0, mreg, 0)
        vec = c1 * basis16(reg_state(1, int(round(m_prime + 1.5)), 0))
        vec -= s1 * basis16(reg_state(1, int(round(m_prime + 0.5)), 1))
        columns[col] = vec
        # multiplicity bit 1: descended from the singlet
        ang0 = cg_angle(0.0, m_prime)
        c0, s0 = math.cos(ang0.theta), math.sin(ang0.theta)
        vec = np.zeros(16, dtype=complex)
        if s0 != 0.0:
            vec += s0 * basis16(reg_state(0, 0, 0))
        if c0 != 0.0:
            vec += c0 * basis16(reg_state(0, 0, 1))
        columns[reg_state(0, mreg, 1)] = vec
    # j' = 3/2 labels (j'-bit 1), m-register holds m' + 3/2 in {0..3}.
    for mreg in range(4):
        m_prime = mreg - 1.5
        ang1 = cg_angle(1.0, m_prime)
        c1, s1 = math.cos(ang1.theta), math.sin(ang1.theta)
        vec = np.zeros(16, dtype=complex)
        if s1 != 0.0:
            vec += s1 * basis16(reg_state(1, int(round(m_prime + 1.5)), 0))
        if c1 != 0.0:
            vec += c1 * basis16(reg_state(1, int(round(m_prime + 0.5)), 1))
        columns[reg_state(1, mreg, 1)] = vec
    return DenseUnitary(_complete_isometry(columns, 16).conj().T)


@dataclass(frozen=True)
class ProtocolCircuit:
    """The two fixed seven-qubit unitaries plus the wire-role map."""

    v1: DenseUnitary
    v2: DenseUnitary
    build_path: str

    @property
    def wire_roles(self) -> dict[str, tuple[int, ...]]:
        return {
            "input": (INPUT_WIRE,),
            "singlet": SINGLET_WIRES,
            "ancilla": ANCILLA_WIRES,
        }


def _assemble_v1(vcg2: np.ndarray, vcg3: np.ndarray) -> np.ndarray:
    dims = (2,) * NUM_WIRES
    gates = [
        embed_operator(_SWAP, (2, 5), dims),
        embed_operator(vcg2, (0, 1, 2), dims),
        embed_operator(np.asarray(_controlled(2, {0: 1}, (1,), _X)), (0, 6), dims),
        embed_operator(vcg3.conj().T, (3, 4, 5, 6), dims),
        embed_operator(_SWAP, (3, 6), dims),
        embed_operator(_SWAP, (1, 3), dims),
    ]
    return _product(NUM_WIRES, gates)


def _assemble_v2(vcg2: np.ndarray, vcg3: np.ndarray) -> np.ndarray:
    dims = (2,) * NUM_WIRES
    gates = [
        embed_operator(_SWAP, (1, 3), dims),
        embed_operator(vcg3, (0, 1, 2, 3), dims),
        embed_operator(_SWAP, (4, 6), dims),
        embed_operator(np.asarray(_controlled(2, {0: 1}, (1,), _X)), (4, 3), dims),
        embed_operator(_SWAP, (5, 6), dims),
        embed_operator(vcg2.conj().T, (4, 5, 6), dims),
        embed_operator(_SWAP, (2, 4), dims),
        embed_operator(_SWAP, (1, 5), dims),
        embed_operator(_SWAP, (0, 4), dims),
    ]
    return _product(NUM_WIRES, gates)


def build_protocol(path: str = "gate") -> ProtocolCircuit:
    """Assemble the two fixed unitaries from either build path."""
    if path == "gate":
        vcg2, vcg3 = build_vcg2(), build_vcg3()
    elif path == "matrix":
        vcg2, vcg3 = build_vcg2_matrix(), build_vcg3_matrix()
    else:
        raise ValueError(f"unknown build path {path!r}")
    v1 = DenseUnitary(_assemble_v1(vcg2.entries, vcg3.entries))
    v2 = DenseUnitary(_assemble_v2(vcg2.entries, vcg3.entries))
    return ProtocolCircuit(v1, v2, path)


def _require_su2(u: DenseUnitary | np.ndarray) -> np.ndarray:
    mat = u.entries if isinstance(u, DenseUnitary) else np.asarray(u, dtype=complex)
    if mat.shape != (2, 2):
        raise ValueError("expected a single-qubit operator")
    if np.abs(mat.conj().T @ mat - np.eye(2)).max() > 1e-10:
        raise ValueError("input operator is not unitary")
    det = np.linalg.det(mat)
    if abs(det - 1.0) > 1e-10:
        raise ValueError(
            f"input must be special unitary (det 1), got det {det:.6f}; "
            "use project_to_special_unitary explicitly if intended"
        )
    return mat


def _as_qubit_state(phi) -> np.ndarray:
    vec = phi.amplitudes if isinstance(phi, Statevector) else np.asarray(phi, dtype=complex)
    if vec.shape != (2,):
        raise ValueError("expected a single-qubit state")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError("input state must be normalized")
    return vec


def _initial_state(phi: np.ndarray, pair: np.ndarray) -> Statevector:
    amps = np.kron(np.kron(phi, pair), basis_state((2,) * 4, (0, 0, 0, 0)).amplitudes)
    return Statevector(amps, (2,) * NUM_WIRES)


def expected_output(u: np.ndarray, phi: np.ndarray) -> Statevector:
    """Exact final state: -(U x 1)|psi^-> on wires 1-2, U^{-1}|phi> on wire 3."""
    pair_out = np.kron(u, np.eye(2)) @ SINGLET
    wire3 = u.conj().T @ phi
    amps = -np.kron(np.kron(pair_out, wire3), basis_state((2,) * 4, (0, 0, 0, 0)).amplitudes)
    return Statevector(amps, (2,) * NUM_WIRES)


def _run_rounds(state: Statevector, u: np.ndarray, circuit: ProtocolCircuit, skip_first_call: bool) -> Statevector:
    sequence = ["call", "v1", "call", "v2", "call", "v1", "call", "v2"]
    if skip_first_call:
        sequence = sequence[1:]
    for step in sequence:
        if step == "call":
            state = apply_to_subsystems(state, u, (CALL_WIRE,))
        elif step == "v1":
            state = apply_to_subsystems(state, circuit.v1, tuple(range(NUM_WIRES)))
        else:
            state = apply_to_subsystems(state, circuit.v2, tuple(range(NUM_WIRES)))
    return state


def run_inversion(
    u: DenseUnitary | np.ndarray,
    phi: Statevector | np.ndarray,
    circuit: ProtocolCircuit | None = None,
) -> tuple[Statevector, float]:
    """Simulate the four-call inversion circuit; returns (final state, fidelity).

    Fidelity is the squared overlap with the exact expected output.
    """
    mat = _require_su2(u)
    vec = _as_qubit_state(phi)
    circuit = circuit or default_circuit()
    state = _initial_state(vec, SINGLET)
    final = _run_rounds(state, mat, circuit, skip_first_call=False)
    return final, final.fidelity(expected_output(mat, vec))


def run_catalytic(
    u: DenseUnitary | np.ndarray,
    phi: Statevector | np.ndarray,
    catalyst: Statevector | np.ndarray,
    circuit: ProtocolCircuit | None = None,
) -> tuple[Statevector, float, float]:
    """Three-call run with the first call replaced by a supplied pair state.

    The pair state enters on the wires the first call would have produced
    it on; returns (final state, catalyst fidelity on the top pair,
    target fidelity of the third wire against U^{-1}|phi>).
    """
    mat = _require_su2(u)
    vec = _as_qubit_state(phi)
    cat = catalyst.amplitudes if isinstance(catalyst, Statevector) else np.asarray(catalyst, dtype=complex)
    if cat.shape != (4,):
        raise ValueError("catalyst must be a two-qubit state")
    if abs(np.linalg.norm(cat) - 1.0) > 1e-10:
        raise ValueError("catalyst must be normalized")
    circuit = circuit or default_circuit()
    state = _initial_state(vec, cat)
    final = _run_rounds(state, mat, circuit, skip_first_call=True)
    rho_pair = reduced_density_matrix(final, (0, 1))
    catalyst_fidelity = float(np.real(cat.conj() @ rho_pair @ cat))
    rho_target = reduced_density_matrix(final, (2,))
    target = mat.conj().T @ vec
    target_fidelity = float(np.real(target.conj() @ rho_target @ target))
    return final, catalyst_fidelity, target_fidelity


def honest_catalyst(u: DenseUnitary | np.ndarray) -> Statevector:
    """The pair state (U x 1)|psi^-> the protocol regenerates."""
    mat = _require_su2(u)
    return Statevector(np.kron(mat, np.eye(2)) @ SINGLET, (2, 2))


def ancilla_restoration(state: Statevector) -> float:
    """Probability that all four ancilla wires read zero."""
    rho = reduced_density_matrix(state, ANCILLA_WIRES)
    return float(np.real(rho[0, 0]))


def call_operator(u: DenseUnitary | np.ndarray, circuit: ProtocolCircuit) -> np.ndarray:
    """One round of the protocol as a matrix: V2 (call) V1 (call)."""
    mat = u.entries if isinstance(u, DenseUnitary) else np.asarray(u, dtype=complex)
    dims = (2,) * NUM_WIRES
    ucall = embed_operator(mat, (CALL_WIRE,), dims)
    return circuit.v2.entries @ ucall @ circuit.v1.entries @ ucall


def pair_basis_states(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The vectors |phi>|psi^->|0^4> and |psi^->|phi>|0^4>."""
    anc = basis_state((2,) * 4, (0, 0, 0, 0)).amplitudes
    v = np.kron(np.kron(phi, SINGLET), anc)
    w = np.kron(np.kron(SINGLET, phi), anc)
    return v, w


def empirical_transfer_matrix(
    u: DenseUnitary | np.ndarray,
    phi: Statevector | np.ndarray,
    circuit: ProtocolCircuit | None = None,
) -> tuple[np.ndarray, float]:
    """2x2 matrix of the conjugated round operator on span{|v>, |w>}.

    Returns (G, residual) where residual measures how far the images leave
    the span; the exact protocol keeps it at numerical zero and G is
    independent of both the unitary and the state.
    """
    mat = _require_su2(u)
    vec = _as_qubit_state(phi)
    circuit = circuit or default_circuit()
    dims = (2,) * NUM_WIRES
    f = call_operator(mat, circuit)
    u1 = embed_operator(mat, (INPUT_WIRE,), dims)
    g = u1.conj().T @ f @ u1
    v, w = pair_basis_states(vec)
    basis = np.column_stack([v, w])
    images = np.column_stack([g @ v, g @ w])
    coeffs, _, _, _ = np.linalg.lstsq(basis, images, rcond=None)
    residual = float(np.abs(images - basis @ coeffs).max())
    return coeffs, residual


_DEFAULT_CIRCUIT: dict[str, ProtocolCircuit] = {}


def default_circuit(path: str = "gate") -> ProtocolCircuit:
    """Cached protocol circuit; building it is pure and deterministic."""
    if path not in _DEFAULT_CIRCUIT:
        _DEFAULT_CIRCUIT[path] = build_protocol(path)
    return _DEFAULT_CIRCUIT[path]
