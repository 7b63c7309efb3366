"""Linear-programming core: containers, solver backends, branch-and-bound."""

from __future__ import annotations

import os
import threading

from . import highs
from .certify import Certificate, CertificateError, certify
from .model import (
    INF,
    TOLERANCES,
    LinearProgram,
    LpBuilder,
    LpError,
    LpSolution,
    LpStatus,
    MipError,
    MipSolution,
    MixedIntegerProgram,
    NumericalError,
    Tolerances,
)
from .simplex import solve_simplex

BACKENDS = ("simplex", "highs")


class _Verification:
    """Process-wide switch for checking every Optimal solve's certificate.

    Off by default; the test-suite turns it on. Tallies are kept so a run
    can report how many solves were checked.
    """

    def __init__(self):
        self.enabled = os.environ.get("STRANDED_GRID_VERIFY", "") not in ("", "0")
        self.checked = 0
        self.worst_residual = 0.0
        self.worst_gap = 0.0
        self.worst_complementarity = 0.0
        self._lock = threading.Lock()

    def record(self, cert: Certificate, objective: float):
        with self._lock:
            self.checked += 1
            self.worst_residual = max(self.worst_residual, cert.primal_residual)
            self.worst_gap = max(self.worst_gap, cert.duality_gap / (1.0 + abs(objective)))
            self.worst_complementarity = max(self.worst_complementarity, cert.complementarity)


verification = _Verification()


def default_backend() -> str:
    env = os.environ.get("STRANDED_GRID_LP_BACKEND")
    if env:
        return env
    return "highs" if highs.available() else "simplex"


def solve_lp(lp: LinearProgram, backend: str | None = None) -> LpSolution:
    backend = backend or default_backend()
    if backend == "simplex":
        sol = solve_simplex(lp)
    elif backend == "highs":
        sol = highs.solve_highs(lp)
    else:
        raise ValueError(f"unknown LP backend {backend!r}")
    if verification.enabled and sol.optimal:
        cert = certify(lp, sol)
        if not cert.ok:
            raise CertificateError(f"{lp.name}: {cert.reason} (backend {backend})")
        verification.record(cert, sol.objective)
    return sol


from .mip import solve_mip  # noqa: E402

__all__ = [
    "BACKENDS", "INF", "TOLERANCES", "Certificate", "CertificateError", "LinearProgram",
    "LpBuilder", "LpError", "LpSolution", "LpStatus", "MipError", "MipSolution",
    "MixedIntegerProgram", "NumericalError", "Tolerances", "certify", "default_backend",
    "solve_lp", "solve_mip", "verification",
]
