"""Reference optimal-fidelity values for deterministic unitary inversion.

Four-decimal reference values for the sequential and parallel programs,
shipped as a static dataset together with per-cell comparison tolerances:
cells following the exact (n+1)/d^2 pattern carry a tight tolerance, cells
only known through solver output carry a looser one, and the d=5, n=5
parallel entry sits right at the rounding edge and gets its own.
Parallel n=1 equals sequential n=1 (a single call admits no ordering), so
those cells are carried as derived references.
"""

from __future__ import annotations

from dataclasses import dataclass

PATTERN_TOL = 2e-4
SOLVER_TOL = 1e-3
EDGE_TOL = 5e-4

_SEQUENTIAL = {
    2: (0.5000, 0.7500, 0.9330, 1.0000, 1.0000),
    3: (0.2222, 0.3333, 0.4444, 0.5556, 0.6667),
    4: (0.1250, 0.1875, 0.2500, 0.3125, 0.3750),
    5: (0.0800, 0.1200, 0.1600, 0.2000, 0.2400),
    6: (0.0556, 0.0833, 0.1111, 0.1389, 0.1667),
}

_PARALLEL = {
    2: (0.5000, 0.6545, 0.7500, 0.8117, 0.8536),
    3: (0.2222, 0.3333, 0.4310, 0.5131, 0.5810),
    4: (0.1250, 0.1875, 0.2500, 0.3105, 0.3675),
    5: (0.0800, 0.1200, 0.1600, 0.2000, 0.2397),
    6: (0.0556, 0.0833, 0.1111, 0.1389, 0.1667),
}


@dataclass(frozen=True)
class ReferenceCell:
    mode: str
    d: int
    n: int
    value: float
    tolerance: float


def _tolerance(mode: str, d: int, n: int, value: float) -> float:
    if mode == "par" and (d, n) == (5, 5):
        return EDGE_TOL
    if abs(value - round((n + 1) / d**2, 4)) < 5e-9:
        return PATTERN_TOL
    return SOLVER_TOL


def reference_cells() -> dict[tuple[str, int, int], ReferenceCell]:
    cells: dict[tuple[str, int, int], ReferenceCell] = {}
    for mode, table in (("seq", _SEQUENTIAL), ("par", _PARALLEL)):
        for d, row in table.items():
            for n, value in enumerate(row, start=1):
                cells[(mode, d, n)] = ReferenceCell(
                    mode, d, n, value, _tolerance(mode, d, n, value)
                )
    return cells


def reference_value(mode: str, d: int, n: int) -> ReferenceCell | None:
    return reference_cells().get((mode, d, n))
