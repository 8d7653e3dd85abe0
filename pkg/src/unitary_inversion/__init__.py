"""Exact qubit-unitary inversion circuits and symmetry-reduced comb SDPs."""

from . import comb_sdp, protocol, reference_tables, sdp, symmetric_group, tensor

__all__ = [
    "comb_sdp",
    "protocol",
    "reference_tables",
    "sdp",
    "symmetric_group",
    "tensor",
]
