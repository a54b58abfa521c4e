"""Centralized numerical tolerances and resource caps.

Every threshold used by the library lives in :data:`TOL`. Functions accept an
optional ``tol`` argument so callers can override individual fields with
:func:`dataclasses.replace`.
"""
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    psd: float = 1e-9
    trace: float = 1e-9
    unit_norm: float = 1e-10
    sqrt_clip: float = 1e-8
    dedup: float = 1e-8
    dedup_decimals: int = 8
    rank: float = 1e-8
    cone: float = 1e-10
    denom_zero: float = 1e-14
    numer_zero: float = 1e-12
    support_eig: float = 1e-9
    support_overlap: float = 1e-12
    route_agreement: float = 1e-9
    gap_slack: float = 1e-7
    sdp_stop: float = 1e-9
    sdp_gap_rel: float = 1e-7
    sdp_max_iter: int = 200
    sdp_t0: float = 1.0
    sdp_mu: float = 8.0
    schur_residual: float = 1e-9
    jacobi_max_dim: int = 64
    jacobi_max_sweeps: int = 60
    max_sdp_dim: int = 256
    max_comp_dim: int = 4096
    max_wires: int = 12
    max_gates: int = 6
    max_schur_k: int = 10
    max_ghse_qubits: int = 20
    pair_enum_cap: int = 10_000

    def as_dict(self):
        return asdict(self)


TOL = Tolerances()
